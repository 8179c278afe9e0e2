use std::fs;
use std::path::Path;
use std::process::ExitCode;

use qmu_core::bridge::{build_mc_game, check_mc_theorem, check_win_theorem, game_to_qts, win_formula, CheckReport};
use qmu_core::games::SolveResult;
use qmu_core::random::{self, FormulaShape};
use qmu_core::semantics::eval_with_stats;
use qmu_core::{
    closeness_gap, eps_above, eps_below, eps_close, ext_recip, parse, simulate, solve, strategy_p0, strategy_p1,
    to_nnf, zielonka_qualitative, Environment, ExtValue, Formula, Player, QuantParityGame, Qts, SolveConfig,
    Tolerances,
};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::CliError;
use crate::{CheckArgs, CheckMode, Cli, Command};

pub fn run(cli: &Cli) -> Result<ExitCode, CliError> {
    let cfg = &cli.cfg;
    let tol = cfg.tolerances()?;
    match &cli.command {
        Command::Eval { system, formula } => {
            let k = read_qts(system)?;
            let phi = to_nnf(&read_formula(formula)?)?;
            let (vals, stats) = eval_with_stats(&k, &phi, &Environment::new(), &tol)?;
            eprintln!(
                "fixpoints: {}, iterations: {}, limit steps: {}",
                stats.fixpoints, stats.iterations, stats.limit_steps
            );
            print_json(&vals.to_json(&k));
            Ok(ExitCode::SUCCESS)
        }
        Command::Solve { game, simulate, samples, oracle, stages } => {
            let g = read_game(game)?;
            let sol = solve(&g, &SolveConfig { tol, keep_strategies: *simulate })?;
            let s = &sol.stats;
            eprintln!(
                "levels: {}, stages: {}, sweeps: {}, limit steps: {}, monotonicity violations: {}",
                s.levels, s.stages, s.sweeps, s.limit_steps, s.monotonicity_violations
            );
            if !(*simulate || *oracle || *stages) {
                print_json(&sol.values_json(&g));
                return Ok(ExitCode::SUCCESS);
            }
            let mut out = json!({ "values": sol.values_json(&g), "stats": sol.stats });
            let mut pass = true;
            if *stages {
                out["stages"] = json!(sol.stages);
            }
            if *oracle {
                let (name, verdict) = run_oracle(&g, &sol, &tol)?;
                pass &= verdict;
                out["oracle"] = json!({ "name": name, "verdict": if verdict { "pass" } else { "fail" } });
            }
            if *simulate {
                let seed = cfg.require_seed("--simulate")?;
                let (runs, ok) = run_simulations(&g, &sol, cfg.epsilon, cfg.horizon, *samples, seed)?;
                pass &= ok;
                out["simulation"] = runs;
            }
            print_json(&out);
            Ok(verdict_code(pass))
        }
        Command::Mcgame { system, formula } => {
            let k = read_qts(system)?;
            let phi = to_nnf(&read_formula(formula)?)?;
            let mc = build_mc_game(&k, &phi)?;
            for (i, f) in mc.subformulas.iter().enumerate() {
                eprintln!("{i}: {f}");
            }
            print_json(&mc.game.to_json());
            Ok(ExitCode::SUCCESS)
        }
        Command::Gts { game, d } => {
            let g = read_game(game)?;
            let k = game_to_qts(&g, d.unwrap_or_else(|| default_d(&g)))?;
            print_json(&k.to_json());
            Ok(ExitCode::SUCCESS)
        }
        Command::Winfmla { d } => {
            println!("{}", win_formula(*d)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Nnf { formula } => {
            println!("{}", to_nnf(&read_formula(formula)?)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Check(args) => check(args, cfg.seed, &tol),
    }
}

fn print_json(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("serializable"));
}

fn verdict_code(pass: bool) -> ExitCode {
    if pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn read_qts(path: &Path) -> Result<Qts, CliError> {
    Qts::from_json_str(&read_text(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn read_game(path: &Path) -> Result<QuantParityGame, CliError> {
    QuantParityGame::from_json_str(&read_text(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn read_formula(arg: &str) -> Result<Formula, CliError> {
    let text = match arg.strip_prefix('@') {
        Some(path) => read_text(Path::new(path))?,
        None => arg.to_string(),
    };
    Ok(parse(text.trim())?)
}

fn default_d(g: &QuantParityGame) -> u32 {
    (0..g.len()).filter(|&v| !g.is_terminal(v)).map(|v| g.priority(v) + 1).max().unwrap_or(1)
}

fn is_acyclic(g: &QuantParityGame) -> bool {
    // Kahn's algorithm over the move graph
    let mut indeg = vec![0usize; g.len()];
    for (_, t, _) in g.edges() {
        indeg[t] += 1;
    }
    let mut stack: Vec<usize> = (0..g.len()).filter(|&v| indeg[v] == 0).collect();
    let mut seen = 0;
    while let Some(v) = stack.pop() {
        seen += 1;
        for &(w, _) in g.moves(v) {
            indeg[w] -= 1;
            if indeg[w] == 0 {
                stack.push(w);
            }
        }
    }
    seen == g.len()
}

fn backwards_induction(g: &QuantParityGame) -> Vec<ExtValue> {
    fn value(g: &QuantParityGame, v: usize, memo: &mut [Option<ExtValue>]) -> ExtValue {
        if let Some(x) = memo[v] {
            return x;
        }
        let x = match g.payoff(v) {
            Some(p) => p,
            None => {
                let opts = g.moves(v).iter().map(|&(w, d)| value(g, w, memo).scale(d)).collect::<Vec<_>>();
                match g.owner(v) {
                    Player::P0 => opts.into_iter().max().unwrap_or(ExtValue::ZERO),
                    Player::P1 => opts.into_iter().min().unwrap_or(ExtValue::INFINITY),
                }
            }
        };
        memo[v] = Some(x);
        x
    }
    let mut memo = vec![None; g.len()];
    (0..g.len()).map(|v| value(g, v, &mut memo)).collect()
}

fn run_oracle(g: &QuantParityGame, sol: &SolveResult, tol: &Tolerances) -> Result<(&'static str, bool), CliError> {
    if g.is_qualitative() && g.is_non_discounted() {
        let w = zielonka_qualitative(g)?;
        let ok = (0..g.len()).all(|v| {
            let want = if w.winner(v) == Player::P0 { ExtValue::INFINITY } else { ExtValue::ZERO };
            sol.values[v] == want
        });
        return Ok(("zielonka", ok));
    }
    if is_acyclic(g) {
        let want = backwards_induction(g);
        let ok = (0..g.len()).all(|v| eps_close(sol.values[v], want[v], tol.tol_cmp));
        return Ok(("backwards-induction", ok));
    }
    Err(CliError::Input("no oracle applies: the game is neither qualitative and non-discounted nor acyclic".into()))
}

fn run_simulations(
    g: &QuantParityGame,
    sol: &SolveResult,
    eps: f64,
    horizon: usize,
    samples: usize,
    seed: u64,
) -> Result<(Value, bool), CliError> {
    let mut rng = random::rng(seed);
    let mut runs = Vec::new();
    let mut pass = true;
    for start in 0..g.len() {
        let target = sol.values[start];
        for player in [Player::P0, Player::P1] {
            for sample in 0..samples {
                let mut opponent = random::positional(&mut rng, g, player.opponent());
                let sim = match player {
                    Player::P0 => simulate(g, &mut strategy_p0(sol, eps)?, &mut opponent, start, horizon)?,
                    Player::P1 => simulate(g, &mut opponent, &mut strategy_p1(sol, eps)?, start, horizon)?,
                };
                let verdict = match sim.outcome {
                    None => "undecided",
                    Some(out) => {
                        let ok = match player {
                            Player::P0 => eps_above(out, target, eps),
                            Player::P1 => eps_below(out, target, eps),
                        };
                        pass &= ok;
                        if ok {
                            "pass"
                        } else {
                            "fail"
                        }
                    }
                };
                runs.push(json!({
                    "start": g.id(start),
                    "player": player,
                    "opponent": sample,
                    "kind": sim.kind,
                    "play": sim.play,
                    "outcome": sim.outcome,
                    "prefix_discount": sim.prefix_discount,
                    "value": target,
                    "verdict": verdict,
                }));
            }
        }
    }
    Ok((Value::Array(runs), pass))
}

fn check(args: &CheckArgs, seed: Option<u64>, tol: &Tolerances) -> Result<ExitCode, CliError> {
    let Some(input) = &args.input else {
        let seed = seed.ok_or_else(|| CliError::Input("a random batch needs an explicit --seed".into()))?;
        return batch(args.mode, seed, args.count, tol);
    };
    let report = match args.mode {
        CheckMode::Mc => {
            let k = read_qts(input)?;
            let phi = read_formula(args.formula.as_deref().ok_or_else(|| missing("formula"))?)?;
            serde_json::to_value(check_mc_theorem(&k, &phi, tol)?).expect("serializable")
        }
        CheckMode::Win => {
            let g = read_game(input)?;
            let d = args.d.unwrap_or_else(|| default_d(&g));
            serde_json::to_value(check_win_theorem(&g, d, tol)?).expect("serializable")
        }
        CheckMode::Nnf => {
            let k = read_qts(input)?;
            let phi = read_formula(args.formula.as_deref().ok_or_else(|| missing("formula"))?)?;
            check_negation(&k, &phi, tol)?
        }
    };
    let pass = report["pass"].as_bool().unwrap_or(false);
    print_json(&report);
    Ok(verdict_code(pass))
}

fn missing(what: &str) -> CliError {
    CliError::Input(format!("missing {what}"))
}

/// `~φ` evaluated through its negation normal form against `1/⟦φ⟧`.
fn check_negation(k: &Qts, phi: &Formula, tol: &Tolerances) -> Result<Value, CliError> {
    let env = Environment::new();
    let (pos, _) = eval_with_stats(k, &to_nnf(phi)?, &env, tol)?;
    let (neg, _) = eval_with_stats(k, &to_nnf(&Formula::not(phi.clone()))?, &env, tol)?;
    let mut max: f64 = 0.0;
    let rows: Vec<Value> = (0..k.len())
        .map(|s| {
            let recip = ext_recip(pos[s]);
            let dev = closeness_gap(neg[s], recip).min(closeness_gap(recip, neg[s]));
            max = max.max(dev);
            json!({ "id": k.id(s), "negated": neg[s], "reciprocal": recip, "deviation": ExtValue::of(dev) })
        })
        .collect();
    Ok(json!({ "rows": rows, "max_deviation": ExtValue::of(max), "tol_cmp": tol.tol_cmp, "pass": max <= tol.tol_cmp }))
}

enum Instance {
    Done { input: Value, report: Value, pass: bool, deviation: f64 },
    Failed { input: Value, error: CliError },
}

fn instance(mode: CheckMode, seed: u64, tol: &Tolerances) -> Instance {
    let mut r = random::rng(seed);
    let (input, result) = match mode {
        CheckMode::Mc | CheckMode::Nnf => {
            let k = random::qts(&mut r, 5);
            let shape = FormulaShape { negations: mode == CheckMode::Nnf, ..FormulaShape::default() };
            let phi = random::formula(&mut r, shape);
            let input = json!({ "system": k.to_json(), "formula": phi.to_string() });
            let result = match mode {
                CheckMode::Mc => check_mc_theorem(&k, &phi, tol).map(to_value).map_err(CliError::from),
                _ => check_negation(&k, &phi, tol),
            };
            (input, result)
        }
        CheckMode::Win => {
            let d = 1 + (seed % 3) as u32;
            let g = random::game(&mut r, 6, d);
            let input = json!({ "game": g.to_json(), "d": d });
            (input, check_win_theorem(&g, d, tol).map(to_value).map_err(CliError::from))
        }
    };
    match result {
        Ok(report) => {
            let pass = report["pass"].as_bool().unwrap_or(false);
            let deviation = match &report["max_deviation"] {
                Value::String(_) => f64::INFINITY,
                v => v.as_f64().unwrap_or(f64::INFINITY),
            };
            Instance::Done { input, report, pass, deviation }
        }
        Err(error) => Instance::Failed { input, error },
    }
}

fn to_value(r: CheckReport) -> Value {
    serde_json::to_value(r).expect("serializable")
}

/// Seeded random instances, run in parallel and reported in instance order.
fn batch(mode: CheckMode, seed: u64, count: usize, tol: &Tolerances) -> Result<ExitCode, CliError> {
    let seeds = random::instance_seeds(seed, count);
    let results: Vec<Instance> = seeds.par_iter().map(|&s| instance(mode, s, tol)).collect();
    let mut max: f64 = 0.0;
    let (mut failed, mut stalled) = (Vec::new(), false);
    for (i, (inst, s)) in results.into_iter().zip(&seeds).enumerate() {
        match inst {
            Instance::Done { input, report, pass, deviation } => {
                max = max.max(deviation);
                if !pass {
                    failed.push(json!({ "index": i, "seed": s, "input": input, "report": report }));
                }
            }
            Instance::Failed { input, error } => {
                stalled |= matches!(error, CliError::NonConvergence(_));
                failed.push(json!({ "index": i, "seed": s, "input": input, "error": error.to_string() }));
            }
        }
    }
    let mode_name = match mode {
        CheckMode::Mc => "mc",
        CheckMode::Win => "win",
        CheckMode::Nnf => "nnf",
    };
    let pass = failed.is_empty();
    print_json(&json!({
        "mode": mode_name,
        "seed": seed,
        "count": count,
        "max_deviation": ExtValue::of(max),
        "tol_cmp": tol.tol_cmp,
        "pass": pass,
        "failures": failed,
    }));
    Ok(if stalled { ExitCode::from(3) } else { verdict_code(pass) })
}
