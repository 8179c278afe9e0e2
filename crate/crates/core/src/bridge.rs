//! Translations between formulae and games: the model-checking game of a system
//! and a formula, and the encoding of a game as a system with the formula
//! describing its values.

use serde::Serialize;

use crate::error::{BridgeError, EvalError, LogicError};
use crate::games::{solve, Player, QuantParityGame, SolveConfig, StageLog};
use crate::logic::{assign_priorities, is_nnf, to_nnf, Formula, PriorityAssignment};
use crate::semantics::{eval_with_stats, Environment, Qts};
use crate::values::{closeness_gap, ext_recip, Discount, ExtValue, Tolerances};

pub const PRED_V0: &str = "V0";
pub const PRED_V1: &str = "V1";
pub const PRED_LAMBDA: &str = "Lambda";
pub const PRED_OMEGA: &str = "Omega";

/// A position of the model-checking game.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum McPosition {
    /// Subformula occurrence (pre-order index) at a state.
    Node { sub: usize, state: usize },
    Zero,
    Infinity,
}

/// The model-checking game together with the meaning of its positions.
#[derive(Clone, Debug)]
pub struct McGame {
    pub game: QuantParityGame,
    pub positions: Vec<McPosition>,
    /// Subformula occurrences in pre-order; index 0 is the whole formula.
    pub subformulas: Vec<Formula>,
    pub priorities: PriorityAssignment,
    states: usize,
}

impl McGame {
    pub fn position(&self, sub: usize, state: usize) -> usize {
        sub * self.states + state
    }

    /// The position `(φ, s)` of the whole formula.
    pub fn root(&self, state: usize) -> usize {
        self.position(0, state)
    }

    pub fn zero(&self) -> usize {
        self.subformulas.len() * self.states
    }

    pub fn infinity(&self) -> usize {
        self.zero() + 1
    }
}

struct Node {
    f: Formula,
    /// Successor subformula indices: children, or the binder body for a variable.
    next: Vec<usize>,
}

fn flatten(f: &Formula, scope: &mut Vec<(String, usize)>, out: &mut Vec<Node>) -> usize {
    let me = out.len();
    out.push(Node { f: f.clone(), next: Vec::new() });
    let next = match f {
        Formula::Var(x) => {
            let binder = scope.iter().rev().find(|(y, _)| y == x).map(|&(_, i)| i).expect("closed formula");
            vec![binder + 1]
        }
        Formula::Mu(x, body) | Formula::Nu(x, body) => {
            scope.push((x.clone(), me));
            let b = flatten(body, scope, out);
            scope.pop();
            vec![b]
        }
        Formula::Pred { .. } | Formula::Not(_) => Vec::new(),
        _ => f.children().into_iter().map(|c| flatten(c, scope, out)).collect(),
    };
    out[me].next = next;
    me
}

fn predicate_values<'a>(system: &'a Qts, name: &str) -> Result<&'a [ExtValue], BridgeError> {
    system.predicate(name).ok_or_else(|| EvalError::UnknownPredicate(name.to_string()).into())
}

/// Builds the model-checking game of `system` and a closed formula in negation
/// normal form.
///
/// Positions are all pairs (subformula occurrence, state) plus the sinks `(0)` and
/// `(∞)`. Player 1 owns the positions of `[]`, `/\` and `nu`; Player 0 all others.
/// Moves go to the operands at the same state, to the successor states for the
/// modalities (or to `(0)`/`(∞)` at terminal states), and from a variable back to
/// the body of its binder. Modal moves carry `δ` (diamond) or `1/δ` (box), scaling
/// moves their factor. Variable positions get the priority of their variable, all
/// other positions the alternation depth.
pub fn build_mc_game(system: &Qts, phi: &Formula) -> Result<McGame, BridgeError> {
    let free: Vec<String> = phi.free_vars().into_iter().collect();
    if !free.is_empty() {
        return Err(LogicError::NotClosed(free).into());
    }
    if !is_nnf(phi) {
        return Err(LogicError::NotNnf.into());
    }
    let phi = if phi.is_well_named() { phi.clone() } else { phi.rename_apart() };
    let prios = assign_priorities(&phi);
    let top = prios.depth;
    let mut nodes = Vec::new();
    flatten(&phi, &mut Vec::new(), &mut nodes);
    let (k, n) = (system.len(), nodes.len());

    let mut g = QuantParityGame::new();
    let mut positions = Vec::with_capacity(n * k + 2);
    for (i, node) in nodes.iter().enumerate() {
        let owner = match node.f {
            Formula::Box(_) | Formula::And(..) | Formula::Nu(..) => Player::P1,
            _ => Player::P0,
        };
        let priority = match &node.f {
            Formula::Var(x) => prios.priority(x).expect("bound variable"),
            _ => top,
        };
        let payoffs: Option<Vec<ExtValue>> = match &node.f {
            Formula::Pred { name, c } => Some(predicate_values(system, name)?.iter().map(|v| v.abs_diff(*c)).collect()),
            Formula::Not(inner) => match &**inner {
                Formula::Pred { name, c } => {
                    Some(predicate_values(system, name)?.iter().map(|v| ext_recip(v.abs_diff(*c))).collect())
                }
                _ => return Err(LogicError::NotNnf.into()),
            },
            _ => None,
        };
        for s in 0..k {
            g.add_position(format!("{i}@{}", system.id(s)), owner, priority, payoffs.as_ref().map(|p| p[s]))?;
            positions.push(McPosition::Node { sub: i, state: s });
        }
    }
    let zero = g.add_position("(0)", Player::P0, top, Some(ExtValue::ZERO))?;
    let inf = g.add_position("(inf)", Player::P0, top, Some(ExtValue::INFINITY))?;
    positions.extend([McPosition::Zero, McPosition::Infinity]);

    for (i, node) in nodes.iter().enumerate() {
        for s in 0..k {
            let from = i * k + s;
            match &node.f {
                Formula::Diamond(_) | Formula::Box(_) => {
                    let is_box = matches!(node.f, Formula::Box(_));
                    let succ = system.successors(s);
                    if succ.is_empty() {
                        g.add_move(from, if is_box { inf } else { zero }, Discount::ONE)?;
                    }
                    for &(t, d) in succ {
                        g.add_move(from, node.next[0] * k + t, if is_box { d.recip() } else { d })?;
                    }
                }
                Formula::Scale(d, _) => g.add_move(from, node.next[0] * k + s, *d)?,
                _ => {
                    for &c in &node.next {
                        g.add_move(from, c * k + s, Discount::ONE)?;
                    }
                }
            }
        }
    }
    Ok(McGame { game: g, positions, subformulas: nodes.into_iter().map(|n| n.f).collect(), priorities: prios, states: k })
}

/// Encodes a game with priorities below `d` as a transition system over its
/// positions. Edges out of Player 1 positions carry the reciprocal discount.
/// Predicates: `V0`/`V1` are ∞ on the positions of the respective player and 0
/// elsewhere, `Lambda` is the payoff at terminals and 0 elsewhere, `Omega` is the
/// priority, and `d` at terminals.
pub fn game_to_qts(game: &QuantParityGame, d: u32) -> Result<Qts, BridgeError> {
    if d == 0 {
        return Err(BridgeError::ZeroPriorities);
    }
    game.validate()?;
    let ids: Vec<&str> = game.positions().iter().map(|p| p.id.as_str()).collect();
    let mut k = Qts::new(ids)?;
    for v in 0..game.len() {
        let terminal = game.is_terminal(v);
        let prio = game.priority(v);
        if !terminal && prio >= d {
            return Err(BridgeError::PriorityOutOfRange { position: game.id(v).to_string(), priority: prio, d });
        }
        let mine = |p: Player| if game.owner(v) == p { ExtValue::INFINITY } else { ExtValue::ZERO };
        k.set_predicate(PRED_V0, v, mine(Player::P0));
        k.set_predicate(PRED_V1, v, mine(Player::P1));
        k.set_predicate(PRED_LAMBDA, v, game.payoff(v).unwrap_or(ExtValue::ZERO));
        k.set_predicate(PRED_OMEGA, v, ExtValue::of(if terminal { d } else { prio } as f64));
        for &(w, delta) in game.moves(v) {
            let delta = if game.owner(v) == Player::P1 { delta.recip() } else { delta };
            k.add_edge(v, w, delta)?;
        }
    }
    Ok(k)
}

/// `~(mu Yj. (2 * Yj \/ |Omega - j|))`: ∞ where `Omega = j`, 0 elsewhere.
pub fn priority_indicator(j: u32) -> Formula {
    let y = format!("Y{j}");
    Formula::not(Formula::mu(
        y.clone(),
        Formula::or(Formula::scale(2.0, Formula::var(y)), Formula::pred(PRED_OMEGA, j as f64)),
    ))
}

/// The formula whose value on [`game_to_qts`] is the game value, in negation
/// normal form: alternating `nu X0. mu X1. nu X2. …` over
/// `⋁_j ((V0 /\ Pj /\ <>Xj) \/ (V1 /\ Pj /\ []Xj)) \/ Lambda`.
pub fn win_formula(d: u32) -> Result<Formula, BridgeError> {
    if d == 0 {
        return Err(BridgeError::ZeroPriorities);
    }
    let x = |j: u32| format!("X{j}");
    let disjuncts = (0..d).flat_map(|j| {
        let p = || priority_indicator(j);
        [
            Formula::and_all([Formula::pred(PRED_V0, 0.0), p(), Formula::diamond(Formula::var(x(j)))]),
            Formula::and_all([Formula::pred(PRED_V1, 0.0), p(), Formula::boxed(Formula::var(x(j)))]),
        ]
    });
    let mut f = Formula::or(Formula::or_all(disjuncts), Formula::pred(PRED_LAMBDA, 0.0));
    for j in (0..d).rev() {
        f = if j % 2 == 0 { Formula::nu(x(j), f) } else { Formula::mu(x(j), f) };
    }
    Ok(to_nnf(&f.rename_apart())?)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckRow {
    pub id: String,
    pub logic: ExtValue,
    pub game: ExtValue,
    /// Smallest tolerance under which the compared values are close.
    pub deviation: ExtValue,
}

/// Outcome of comparing the logic side and the game side of a theorem.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckReport {
    pub rows: Vec<CheckRow>,
    pub max_deviation: ExtValue,
    pub tol_cmp: f64,
    pub pass: bool,
    pub eval_iterations: usize,
    pub game_stages: usize,
    pub game_sweeps: usize,
    pub monotonicity_violations: usize,
    /// Outermost unfolding of the game side, kept when the check fails.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stage_log: Option<StageLog>,
}

fn report(rows: Vec<CheckRow>, tol: &Tolerances, eval_iterations: usize, sol: crate::games::SolveResult) -> CheckReport {
    let max = rows.iter().map(|r| r.deviation).max().unwrap_or(ExtValue::ZERO);
    let pass = max.get() <= tol.tol_cmp;
    CheckReport {
        rows,
        max_deviation: max,
        tol_cmp: tol.tol_cmp,
        pass,
        eval_iterations,
        game_stages: sol.stats.stages,
        game_sweeps: sol.stats.sweeps,
        monotonicity_violations: sol.stats.monotonicity_violations,
        stage_log: if pass { None } else { sol.stages },
    }
}

fn deviation(k: ExtValue, p: ExtValue) -> ExtValue {
    ExtValue::of(closeness_gap(k, p))
}

/// Compares `⟦φ⟧(s)` with the value of the model-checking game at `(φ, s)` for
/// every state. The game value must be `tol_cmp`-close to the formula value.
pub fn check_mc_theorem(system: &Qts, phi: &Formula, tol: &Tolerances) -> Result<CheckReport, BridgeError> {
    let nnf = to_nnf(phi)?;
    let (logic, stats) = eval_with_stats(system, &nnf, &Environment::new(), tol)?;
    let mc = build_mc_game(system, &nnf)?;
    let sol = solve(&mc.game, &SolveConfig::from(*tol))?;
    let rows = (0..system.len())
        .map(|s| {
            let game = sol.values[mc.root(s)];
            CheckRow { id: system.id(s).to_string(), logic: logic[s], game, deviation: deviation(game, logic[s]) }
        })
        .collect();
    Ok(report(rows, tol, stats.iterations, sol))
}

/// Compares the game value with the value of [`win_formula`] on [`game_to_qts`] at
/// every position. The formula value must be `tol_cmp`-close to the game value.
pub fn check_win_theorem(game: &QuantParityGame, d: u32, tol: &Tolerances) -> Result<CheckReport, BridgeError> {
    let k = game_to_qts(game, d)?;
    let f = win_formula(d)?;
    let (logic, stats) = eval_with_stats(&k, &f, &Environment::new(), tol)?;
    let sol = solve(game, &SolveConfig::from(*tol))?;
    let rows = (0..game.len())
        .map(|v| {
            let g = sol.values[v];
            CheckRow { id: game.id(v).to_string(), logic: logic[v], game: g, deviation: deviation(logic[v], g) }
        })
        .collect();
    Ok(report(rows, tol, stats.iterations, sol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse;
    use crate::semantics::eval;

    fn v(x: f64) -> ExtValue {
        ExtValue::of(x)
    }

    fn diamond_example() -> Qts {
        let mut k = Qts::new(["s", "t"]).unwrap();
        k.add_edge_by_id("s", "t", 2.0).unwrap();
        k.set_predicate("P", 1, v(5.0));
        k
    }

    #[test]
    fn diamond_game() {
        let k = diamond_example();
        let phi = parse("<>|P - 1|").unwrap();
        let mc = build_mc_game(&k, &phi).unwrap();
        assert_eq!(mc.game.len(), 2 * 2 + 2);
        let root = mc.root(0);
        let target = mc.position(1, 1);
        assert_eq!(mc.game.moves(root), &[(target, Discount::new(2.0).unwrap())]);
        assert_eq!(mc.game.payoff(target), Some(v(4.0)));
        let r = solve(&mc.game, &SolveConfig::default()).unwrap();
        assert_eq!(r.values[root], v(8.0));
        let rep = check_mc_theorem(&k, &phi, &Tolerances::default()).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.max_deviation, ExtValue::ZERO);
        assert_eq!(rep.rows[0].logic, v(8.0));
    }

    #[test]
    fn box_at_terminal_state_goes_to_infinity_sink() {
        let k = diamond_example();
        let mc = build_mc_game(&k, &parse("[]|P - 1|").unwrap()).unwrap();
        assert_eq!(mc.game.moves(mc.root(1)), &[(mc.infinity(), Discount::ONE)]);
        assert_eq!(mc.game.owner(mc.root(1)), Player::P1);
    }

    #[test]
    fn fixpoint_positions_have_one_successor() {
        let mut k = diamond_example();
        k.add_edge_by_id("t", "s", 0.5).unwrap();
        let phi = parse("nu X. mu Y. ((|P - 1| /\\ []X) \\/ <>Y)").unwrap();
        let mc = build_mc_game(&k, &phi).unwrap();
        assert!(mc.game.len() <= phi.size() * k.len() + 2);
        for (i, f) in mc.subformulas.iter().enumerate() {
            if matches!(f, Formula::Mu(..) | Formula::Nu(..) | Formula::Var(_)) {
                for s in 0..k.len() {
                    assert_eq!(mc.game.moves(mc.position(i, s)).len(), 1);
                }
            }
        }
        assert!(check_mc_theorem(&k, &phi, &Tolerances::default()).unwrap().pass);
    }

    #[test]
    fn rejects_open_or_non_nnf_formulae() {
        let k = diamond_example();
        assert!(matches!(build_mc_game(&k, &parse("<>X").unwrap()), Err(BridgeError::Logic(LogicError::NotClosed(_)))));
        assert!(matches!(build_mc_game(&k, &parse("~<>|P - 0|").unwrap()), Err(BridgeError::Logic(LogicError::NotNnf))));
    }

    fn two_player_game() -> QuantParityGame {
        two_player_game_with(0)
    }

    fn two_player_game_with(prio_a: u32) -> QuantParityGame {
        let mut g = QuantParityGame::new();
        g.add_position("a", Player::P1, prio_a, None).unwrap();
        g.add_position("b", Player::P0, 1, None).unwrap();
        g.add_position("t", Player::P0, 0, Some(v(7.0))).unwrap();
        g.add_move_by_id("a", "b", 0.25).unwrap();
        g.add_move_by_id("a", "a", 1.0).unwrap();
        g.add_move_by_id("b", "t", 0.5).unwrap();
        g.add_move_by_id("b", "a", 1.0).unwrap();
        g
    }

    #[test]
    fn game_encoding() {
        let g = two_player_game();
        let k = game_to_qts(&g, 2).unwrap();
        assert_eq!(k.successors(0), &[(1, Discount::new(4.0).unwrap()), (0, Discount::ONE)]);
        assert_eq!(k.predicate(PRED_LAMBDA).unwrap()[2], v(7.0));
        assert_eq!(k.predicate(PRED_OMEGA).unwrap()[2], v(2.0));
        assert_eq!(k.predicate(PRED_V0).unwrap()[1], ExtValue::INFINITY);
        assert_eq!(k.predicate(PRED_V1).unwrap()[1], ExtValue::ZERO);
        assert_eq!(k.predicate(PRED_LAMBDA).unwrap()[1], ExtValue::ZERO);
        assert!(matches!(game_to_qts(&g, 1), Err(BridgeError::PriorityOutOfRange { .. })));
        assert_eq!(game_to_qts(&g, 0).unwrap_err(), BridgeError::ZeroPriorities);
    }

    #[test]
    fn win_formula_shape() {
        let w1 = win_formula(1).unwrap();
        assert!(matches!(w1, Formula::Nu(ref x, _) if x == "X0"));
        let w2 = win_formula(2).unwrap();
        match &w2 {
            Formula::Nu(x, body) => assert!(matches!(&**body, Formula::Mu(y, _) if y == "X1") && x == "X0"),
            _ => panic!("unexpected shape {w2}"),
        }
        for d in 1..=4 {
            let f = win_formula(d).unwrap();
            assert!(is_nnf(&f) && f.is_closed() && f.is_well_named());
            let a = assign_priorities(&f);
            assert_eq!(a.depth, d);
            for j in 0..d {
                assert_eq!(a.priority(&format!("X{j}")), Some(j));
            }
        }
    }

    #[test]
    fn priority_indicator_is_exact() {
        let g = two_player_game();
        let k = game_to_qts(&g, 2).unwrap();
        for j in 0..3 {
            let f = to_nnf(&priority_indicator(j)).unwrap();
            let vals = eval(&k, &f, &Environment::new(), &Tolerances::default()).unwrap();
            let omega = k.predicate(PRED_OMEGA).unwrap();
            for s in 0..k.len() {
                let expect = if omega[s] == v(j as f64) { ExtValue::INFINITY } else { ExtValue::ZERO };
                assert_eq!(vals[s], expect);
            }
        }
    }

    #[test]
    fn win_theorem_on_small_game() {
        let g = two_player_game();
        let rep = check_win_theorem(&g, 2, &Tolerances::default()).unwrap();
        assert!(rep.pass, "{rep:?}");
        assert_eq!(rep.rows[0].game, ExtValue::INFINITY);
        assert_eq!(rep.rows[1].game, ExtValue::INFINITY);

        let g = two_player_game_with(2);
        let rep = check_win_theorem(&g, 3, &Tolerances::default()).unwrap();
        assert!(rep.pass, "{rep:?}");
        // the a-b cycle is odd and shrinking, so Player 0 exits to t at once
        assert_eq!(rep.rows[1].game, v(3.5));
        assert_eq!(rep.rows[0].game, v(0.875));
        assert_eq!(rep.rows[0].logic, v(0.875));
    }
}
