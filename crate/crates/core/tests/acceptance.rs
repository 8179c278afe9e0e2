//! Acceptance suite: one line per criterion, non-zero exit if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use qmu_core::bridge::{build_mc_game, game_to_qts, priority_indicator, win_formula};
use qmu_core::games::{PlayKind, Positional, Simulation, SolveResult, StageLog};
use qmu_core::random::{self, FormulaShape};
use qmu_core::{
    eps_close, eval, ext_recip, simulate, solve, strategy_p0, to_nnf, zielonka_qualitative, Discount, Environment,
    ExtValue, Formula, Player, QuantParityGame, SolveConfig, Strategy, Tolerances, Valuation,
};

const TOL: f64 = 1e-6;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(failures: &[String], detail: String) -> Outcome {
    match failures.first() {
        None => Outcome { pass: true, detail },
        Some(first) => Outcome { pass: false, detail: format!("{} failures, first: {first}", failures.len()) },
    }
}

fn tol() -> Tolerances {
    Tolerances::default()
}

fn nnf_eval(k: &qmu_core::Qts, f: &Formula) -> Result<Valuation, String> {
    let nnf = to_nnf(f).map_err(|e| e.to_string())?;
    eval(k, &nnf, &Environment::new(), &tol()).map_err(|e| e.to_string())
}

fn agree(a: ExtValue, b: ExtValue) -> bool {
    eps_close(a, b, TOL) || eps_close(b, a, TOL)
}

fn compare(name: &str, seed: u64, lhs: &[ExtValue], rhs: &[ExtValue], failures: &mut Vec<String>) {
    for (s, (a, b)) in lhs.iter().zip(rhs).enumerate() {
        if !agree(*a, *b) {
            failures.push(format!("seed {seed} {name} state {s}: {a} vs {b}"));
            return;
        }
    }
}

fn recip(v: &Valuation) -> Vec<ExtValue> {
    v.iter().map(|&x| ext_recip(x)).collect()
}

/// Negation via the reciprocal and the five duality laws.
fn criterion_1() -> Outcome {
    let shape = FormulaShape { negations: true, ..FormulaShape::default() };
    let mut failures = Vec::new();
    let mut checks = 0;
    for seed in 0..200u64 {
        let mut r = random::rng(1_000 + seed);
        let k = random::qts(&mut r, 6);
        let phi = random::formula(&mut r, shape);
        let psi = random::formula(&mut r, shape);
        let body = random::open_formula(&mut r, shape, "Z");
        let d = [0.5, 2.0, 3.0][seed as usize % 3];
        let not = |f: &Formula| Formula::not(f.clone());
        let run = |f: &Formula| nnf_eval(&k, f);
        let result = (|| -> Result<(), String> {
            let p = run(&phi)?;
            let mut law = |name: &str, lhs: Vec<ExtValue>, rhs: Valuation| {
                checks += 1;
                compare(name, seed, &lhs, &rhs.0, &mut failures);
            };
            law("~phi", recip(&p), run(&not(&phi))?);
            law("~~phi", p.0.clone(), run(&not(&not(&phi)))?);
            let conj = run(&Formula::and(phi.clone(), psi.clone()))?;
            law("~(phi/\\psi)", recip(&conj), run(&Formula::or(not(&phi), not(&psi)))?);
            let disj = run(&Formula::or(phi.clone(), psi.clone()))?;
            law("~(phi\\/psi)", recip(&disj), run(&Formula::and(not(&phi), not(&psi)))?);
            let dia = run(&Formula::diamond(phi.clone()))?;
            law("~<>phi", recip(&dia), run(&Formula::boxed(not(&phi)))?);
            let bx = run(&Formula::boxed(phi.clone()))?;
            law("~[]phi", recip(&bx), run(&Formula::diamond(not(&phi)))?);
            let sc = run(&Formula::scale(d, phi.clone()))?;
            law("~d*phi", recip(&sc), run(&Formula::scale(1.0 / d, not(&phi)))?);
            let dual_body = not(&body.substitute("Z", &not(&Formula::var("Z"))));
            let mu = run(&Formula::mu("Z", body.clone()))?;
            law("~mu", recip(&mu), run(&Formula::nu("Z", dual_body.clone()))?);
            let nu = run(&Formula::nu("Z", body.clone()))?;
            law("~nu", recip(&nu), run(&Formula::mu("Z", dual_body))?);
            Ok(())
        })();
        if let Err(e) = result {
            failures.push(format!("seed {seed}: {e}"));
        }
    }
    outcome(&failures, format!("200 instances, {checks} law checks"))
}

fn check_stage_log(log: &StageLog, what: &str, failures: &mut Vec<String>) {
    let descending = log.priority % 2 == 0;
    for (a, rows) in log.values.windows(2).enumerate() {
        for (v, (&prev, &next)) in rows[0].iter().zip(&rows[1]).enumerate() {
            let wrong = if descending { next > prev } else { next < prev };
            if wrong && qmu_core::values::rel_change(prev, next) > TOL {
                failures.push(format!("{what}: stage {a}->{} position {v}: {prev} -> {next}", a + 1));
                return;
            }
        }
    }
}

/// Monotonicity evidence collected for criterion 8.
#[derive(Default)]
struct StageAudit {
    solves: usize,
    logs: usize,
    failures: Vec<String>,
}

impl StageAudit {
    fn record(&mut self, what: String, r: &SolveResult) {
        self.solves += 1;
        if r.stats.monotonicity_violations > 0 {
            self.failures.push(format!("{what}: {} violations reported", r.stats.monotonicity_violations));
        }
        if let Some(log) = &r.stages {
            self.logs += 1;
            check_stage_log(log, &what, &mut self.failures);
        }
    }
}

/// Value of the model-checking game equals the formula value.
fn criterion_2(audit: &mut StageAudit) -> Outcome {
    let shape = FormulaShape::default();
    let mut failures = Vec::new();
    let mut max_dev: f64 = 0.0;
    for seed in 0..100u64 {
        let mut r = random::rng(2_000 + seed);
        let k = random::qts(&mut r, 5);
        let phi = random::formula(&mut r, shape);
        let res = (|| -> Result<(), String> {
            let logic = eval(&k, &phi, &Environment::new(), &tol()).map_err(|e| e.to_string())?;
            let mc = build_mc_game(&k, &phi).map_err(|e| e.to_string())?;
            let sol = solve(&mc.game, &SolveConfig::from(tol())).map_err(|e| e.to_string())?;
            audit.record(format!("mc seed {seed}"), &sol);
            for s in 0..k.len() {
                let game = sol.values[mc.root(s)];
                max_dev = max_dev.max(qmu_core::closeness_gap(game, logic[s]));
                if !eps_close(game, logic[s], TOL) {
                    return Err(format!("state {s}: game {game} vs logic {} for {phi}", logic[s]));
                }
            }
            Ok(())
        })();
        if let Err(e) = res {
            failures.push(format!("seed {seed}: {e}"));
        }
    }
    outcome(&failures, format!("100 pairs, max deviation {max_dev:e}"))
}

/// Value of the win formula on the encoded system equals the game value; the
/// priority gadget is exact (criterion 7).
fn criterion_3_and_7(audit: &mut StageAudit) -> (Outcome, Outcome) {
    let mut failures = Vec::new();
    let mut gadget_failures = Vec::new();
    let mut gadget_checks = 0;
    let mut max_dev: f64 = 0.0;
    for seed in 0..100u64 {
        let mut r = random::rng(3_000 + seed);
        let d = 1 + (seed % 3) as u32;
        let g = random::game(&mut r, 6, d);
        let res = (|| -> Result<(), String> {
            let k = game_to_qts(&g, d).map_err(|e| e.to_string())?;
            let f = win_formula(d).map_err(|e| e.to_string())?;
            let logic = eval(&k, &f, &Environment::new(), &tol()).map_err(|e| e.to_string())?;
            let sol = solve(&g, &SolveConfig::from(tol())).map_err(|e| e.to_string())?;
            audit.record(format!("win seed {seed}"), &sol);
            let omega = k.predicate("Omega").unwrap();
            for j in 0..d {
                let p = nnf_eval(&k, &priority_indicator(j))?;
                for v in 0..g.len() {
                    gadget_checks += 1;
                    let want = if omega[v].get() == j as f64 { ExtValue::INFINITY } else { ExtValue::ZERO };
                    if p[v] != want {
                        gadget_failures.push(format!("seed {seed} P{j} at {}: {} (want {want})", g.id(v), p[v]));
                    }
                }
            }
            for v in 0..g.len() {
                max_dev = max_dev.max(qmu_core::closeness_gap(logic[v], sol.values[v]));
                if !eps_close(logic[v], sol.values[v], TOL) {
                    return Err(format!("{}: logic {} vs game {}", g.id(v), logic[v], sol.values[v]));
                }
            }
            Ok(())
        })();
        if let Err(e) = res {
            failures.push(format!("seed {seed} d={d}: {e}"));
        }
    }
    (
        outcome(&failures, format!("100 games, max deviation {max_dev:e}")),
        outcome(&gadget_failures, format!("{gadget_checks} exact gadget values")),
    )
}

/// Qualitative games: values agree exactly with the classical winning regions.
fn criterion_4(audit: &mut StageAudit) -> Outcome {
    let mut failures = Vec::new();
    for seed in 0..100u64 {
        let mut r = random::rng(4_000 + seed);
        let g = random::qualitative_game(&mut r, 8, 4);
        let res = (|| -> Result<(), String> {
            let sol = solve(&g, &SolveConfig::from(tol())).map_err(|e| e.to_string())?;
            audit.record(format!("qualitative seed {seed}"), &sol);
            let w = zielonka_qualitative(&g).map_err(|e| e.to_string())?;
            for v in 0..g.len() {
                let want = if w.winner(v) == Player::P0 { ExtValue::INFINITY } else { ExtValue::ZERO };
                if sol.values[v] != want {
                    return Err(format!("{}: solve {} vs regions {want}", g.id(v), sol.values[v]));
                }
            }
            Ok(())
        })();
        if let Err(e) = res {
            failures.push(format!("seed {seed}: {e}"));
        }
    }
    outcome(&failures, "100 games".into())
}

fn example_4_2() -> QuantParityGame {
    let mut g = QuantParityGame::new();
    g.add_position("a", Player::P1, 0, None).unwrap();
    g.add_position("b", Player::P0, 1, None).unwrap();
    g.add_position("t", Player::P0, 0, Some(ExtValue::ONE)).unwrap();
    g.add_move_by_id("a", "a", 0.5).unwrap();
    g.add_move_by_id("a", "b", 1.0).unwrap();
    g.add_move_by_id("b", "b", 2.0).unwrap();
    g.add_move_by_id("b", "t", 1.0).unwrap();
    g
}

/// Player 1 loops `n` times at the initial position, then leaves.
struct LoopCount {
    n: usize,
    seen: usize,
}

impl Strategy for LoopCount {
    fn player(&self) -> Player {
        Player::P1
    }
    fn reset(&mut self, _start: usize) {
        self.seen = 0;
    }
    fn choose(&mut self, _pos: usize) -> usize {
        if self.seen < self.n {
            0
        } else {
            1
        }
    }
    fn observe(&mut self, from: usize, to: usize, _d: Discount) {
        if from == 0 && to == 0 {
            self.seen += 1;
        }
    }
    fn memory_key(&self) -> Vec<i64> {
        vec![self.seen as i64]
    }
}

fn against_loops(g: &QuantParityGame, s0: &mut dyn Strategy, n: usize) -> Result<Simulation, String> {
    simulate(g, s0, &mut LoopCount { n, seen: 0 }, 0, 100_000).map_err(|e| e.to_string())
}

/// The infinite-memory example.
fn criterion_5(audit: &mut StageAudit) -> Outcome {
    let g = example_4_2();
    let mut failures = Vec::new();
    let cfg = SolveConfig { tol: tol(), keep_strategies: true };
    let sol = match solve(&g, &cfg) {
        Ok(s) => s,
        Err(e) => return Outcome { pass: false, detail: e.to_string() },
    };
    audit.record("example".into(), &sol);
    if sol.values[0] != ExtValue::INFINITY {
        failures.push(format!("value at a is {}", sol.values[0]));
    }
    if sol.stats.limit_steps == 0 {
        failures.push("no stage value was promoted past the cap".into());
    }
    let mut worst = f64::INFINITY;
    for eps in [0.1, 0.01] {
        for n in 0..=20 {
            let run = strategy_p0(&sol, eps).map_err(|e| e.to_string()).and_then(|mut s0| against_loops(&g, &mut s0, n));
            match run {
                Ok(sim) => {
                    let out = sim.outcome.map(|x| x.get()).unwrap_or(0.0);
                    worst = worst.min(out * eps);
                    if sim.kind != PlayKind::Terminated || out < 1.0 / eps {
                        failures.push(format!("eps {eps} n {n}: {:?} outcome {out}", sim.kind));
                    }
                }
                Err(e) => failures.push(format!("eps {eps} n {n}: {e}")),
            }
        }
    }
    // b has two moves, so there are exactly two positional strategies for Player 0.
    for choice in [1usize, 2] {
        let s = Positional::from_fn(&g, Player::P0, |_| choice);
        let beaten = (0..=20).any(|n| {
            against_loops(&g, &mut s.clone(), n).map(|sim| sim.outcome.is_some_and(|x| x.get() < 10.0)).unwrap_or(false)
        });
        if !beaten {
            failures.push(format!("positional strategy b -> {} reaches 10 against every n", g.id(choice)));
        }
    }
    outcome(&failures, format!("42 counter-strategy runs, min outcome*eps {worst:.3}; both positional strategies fail"))
}

fn backwards_induction(g: &QuantParityGame) -> Vec<ExtValue> {
    // moves only go to later positions, so a reverse sweep sees successors first
    let mut val = vec![ExtValue::ZERO; g.len()];
    for v in (0..g.len()).rev() {
        val[v] = match g.payoff(v) {
            Some(p) => p,
            None => {
                let opts = g.moves(v).iter().map(|&(w, d)| {
                    let x = val[w];
                    if x.is_infinite() {
                        x
                    } else {
                        ExtValue::of(d.get() * x.get())
                    }
                });
                match g.owner(v) {
                    Player::P0 => opts.fold(ExtValue::ZERO, ExtValue::max),
                    Player::P1 => opts.fold(ExtValue::INFINITY, ExtValue::min),
                }
            }
        };
    }
    val
}

/// Acyclic games against backwards induction.
fn criterion_6() -> Outcome {
    let mut failures = Vec::new();
    for seed in 0..200u64 {
        let mut r = random::rng(6_000 + seed);
        let g = random::acyclic_game(&mut r, 10);
        match solve(&g, &SolveConfig::from(tol())) {
            Ok(sol) => {
                let want = backwards_induction(&g);
                for v in 0..g.len() {
                    let (a, b) = (sol.values[v], want[v]);
                    let ok = if a.is_infinite() || b.is_infinite() { a == b } else { (a.get() - b.get()).abs() <= 1e-9 };
                    if !ok {
                        failures.push(format!("seed {seed} {}: solve {a} vs induction {b}", g.id(v)));
                        break;
                    }
                }
            }
            Err(e) => failures.push(format!("seed {seed}: {e}")),
        }
    }
    outcome(&failures, "200 games".into())
}

fn main() -> ExitCode {
    let mut audit = StageAudit::default();
    let mut lines: Vec<(u32, Outcome, Duration, Option<Duration>)> = Vec::new();
    let timed = |f: &mut dyn FnMut() -> Outcome| {
        let t = Instant::now();
        let o = f();
        (o, t.elapsed())
    };
    let (o, t) = timed(&mut criterion_1);
    lines.push((1, o, t, Some(Duration::from_secs(30))));
    let (o, t) = timed(&mut || criterion_2(&mut audit));
    lines.push((2, o, t, Some(Duration::from_secs(120))));
    let start = Instant::now();
    let (o3, o7) = criterion_3_and_7(&mut audit);
    let t = start.elapsed();
    lines.push((3, o3, t, Some(Duration::from_secs(120))));
    let (o, t) = timed(&mut || criterion_4(&mut audit));
    lines.push((4, o, t, Some(Duration::from_secs(10))));
    let (o, t) = timed(&mut || criterion_5(&mut audit));
    lines.push((5, o, t, Some(Duration::from_secs(5))));
    let (o, t) = timed(&mut criterion_6);
    lines.push((6, o, t, Some(Duration::from_secs(5))));
    lines.push((7, o7, Duration::ZERO, None));
    let o8 = outcome(&audit.failures, format!("{} solves, {} outermost stage logs", audit.solves, audit.logs));
    lines.push((8, o8, Duration::ZERO, None));
    lines.sort_by_key(|l| l.0);

    let mut all = true;
    for (n, o, t, budget) in &lines {
        let within = budget.map_or(true, |b| *t <= b);
        let pass = o.pass && within;
        all &= pass;
        let time = match budget {
            Some(b) => format!(" [{:.2}s, target {}s]", t.as_secs_f64(), b.as_secs()),
            None => String::new(),
        };
        println!("criterion {n}: {} - {}{time}", if pass { "PASS" } else { "FAIL" }, o.detail);
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
