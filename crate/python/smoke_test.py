"""Smoke test of the qmu Python extension."""

import json
import math

import qmu

DIAMOND = {
    "states": [{"id": "s", "predicates": {"P": 0}}, {"id": "t", "predicates": {"P": 5}}],
    "edges": [{"from": "s", "to": "t", "discount": 2}],
}

SELF_LOOP = {
    "states": [{"id": "v", "predicates": {"P": 1}}],
    "edges": [{"from": "v", "to": "v", "discount": 1}],
}

PUMPING = {
    "positions": [
        {"id": "start", "owner": 1, "priority": 0},
        {"id": "pump", "owner": 0, "priority": 1},
        {"id": "exit", "owner": 0, "priority": 0, "payoff": 1},
    ],
    "moves": [
        {"from": "start", "to": "start", "discount": 0.5},
        {"from": "start", "to": "pump", "discount": 1},
        {"from": "pump", "to": "pump", "discount": 2},
        {"from": "pump", "to": "exit", "discount": 1},
    ],
}


def main():
    system = qmu.Qts.from_json(json.dumps(DIAMOND))
    phi = qmu.parse("<>|P - 1|")
    assert system.states == ["s", "t"]
    assert system.eval(phi) == {"s": 8.0, "t": 0.0}

    negated = qmu.Formula("~<>|P - 1|").to_nnf()
    assert str(negated) == "[]~|P - 1|"
    assert system.eval(negated)["t"] == math.inf

    game = qmu.Game.from_json(json.dumps(PUMPING))
    values = game.solve()
    assert values["start"] == math.inf and values["exit"] == 1.0
    details = game.solve_details()
    assert details["stats"]["limit_steps"] > 0

    mc = qmu.mc_game(system, phi)
    assert len(mc) == 2 * 2 + 2
    report = qmu.check_mc(system, phi)
    assert report["pass"] and report["max_deviation"] == 0

    win = qmu.win_formula(2)
    assert win.alternation_depth() == 2
    assert qmu.check_win(game, 2)["pass"]
    assert len(qmu.game_to_qts(game, 2)) == len(game)

    try:
        qmu.parse("nu X. (X")
    except ValueError as e:
        assert "syntax error" in str(e)
    else:
        raise AssertionError("parse error expected")

    try:
        qmu.Qts.from_json(json.dumps(SELF_LOOP)).eval(qmu.parse("mu X. (1.01 * <>X \\/ |P - 0|)"), max_iters=5)
    except qmu.NonConvergenceError:
        pass
    else:
        raise AssertionError("budget exhaustion expected")

    print("python smoke test: ok")


if __name__ == "__main__":
    main()
