use std::sync::{Arc, Mutex};

use serde::Serialize;

use super::{normalize_deep, Player, QuantParityGame};
use crate::error::{GameError, ModelError};
use crate::values::{eps_above, eps_below, rel_change, ExtValue, Tolerances};

/// Solver settings. `keep_strategies` retains the whole unfolding so that
/// [`strategy_p0`](super::strategy_p0) and [`strategy_p1`](super::strategy_p1)
/// can be built from the result.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SolveConfig {
    pub tol: Tolerances,
    pub keep_strategies: bool,
}

impl From<Tolerances> for SolveConfig {
    fn from(tol: Tolerances) -> Self {
        SolveConfig { tol, keep_strategies: false }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SolveStats {
    /// Games solved across all levels of the unfolding.
    pub levels: usize,
    /// Unfolding stages, summed over all levels.
    pub stages: usize,
    /// Value-iteration sweeps in single-priority games.
    pub sweeps: usize,
    /// Coordinates promoted to ∞ or floored to 0.
    pub limit_steps: usize,
    /// Stage-to-stage changes in the wrong direction by more than the comparison tolerance.
    pub monotonicity_violations: usize,
    /// Every fixpoint stabilized exactly, without limit steps.
    pub exact: bool,
}

/// Values of the truncated games, one row per stage, for the outermost unfolding.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StageLog {
    pub priority: u32,
    pub values: Vec<Vec<ExtValue>>,
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    /// Game value per position.
    pub values: Vec<ExtValue>,
    pub stages: Option<StageLog>,
    pub stats: SolveStats,
    pub(crate) tree: Option<Arc<SolvedGame>>,
}

impl SolveResult {
    pub fn has_strategies(&self) -> bool {
        self.tree.is_some()
    }

    /// `{position-id: value}` in position order.
    pub fn values_json(&self, game: &QuantParityGame) -> serde_json::Value {
        let mut m = serde_json::Map::new();
        for (v, x) in self.values.iter().enumerate() {
            m.insert(game.id(v).to_string(), serde_json::to_value(x).unwrap());
        }
        serde_json::Value::Object(m)
    }
}

/// The normalized game together with its full unfolding.
#[derive(Debug)]
pub(crate) struct SolvedGame {
    pub game: QuantParityGame,
    pub fresh: Vec<Option<usize>>,
    pub root: Level,
    pub exact: bool,
}

#[derive(Debug)]
pub(crate) enum Level {
    Single(SingleLevel),
    Unfold(UnfoldLevel),
}

impl Level {
    pub fn values(&self) -> &[ExtValue] {
        match self {
            Level::Single(s) => &s.values,
            Level::Unfold(u) => &u.values,
        }
    }
}

/// A game in which every live position has the same priority.
#[derive(Debug)]
pub(crate) struct SingleLevel {
    pub priority: u32,
    /// Payoffs of the positions that are terminal at this level.
    pub term: Vec<Option<ExtValue>>,
    pub values: Vec<ExtValue>,
    pub exact: bool,
    /// Index `K` with `V_K = V_{K+1}` when `exact`.
    pub stable: usize,
    /// Raw (uncapped) value-iteration iterates `V_0, V_1, …`, extended on demand.
    iterates: Mutex<Vec<Vec<ExtValue>>>,
}

impl SingleLevel {
    fn start_value(&self) -> ExtValue {
        if self.priority % 2 == 1 {
            ExtValue::ZERO
        } else {
            ExtValue::INFINITY
        }
    }

    /// `V_k(v)`.
    pub fn iterate(&self, game: &QuantParityGame, k: usize, v: usize) -> ExtValue {
        let mut its = self.iterates.lock().unwrap();
        if its.is_empty() {
            let start = self.start_value();
            its.push(self.term.iter().map(|t| t.unwrap_or(start)).collect());
        }
        while its.len() <= k {
            let next = sweep(game, &self.term, its.last().unwrap());
            its.push(next);
        }
        its[k][v]
    }
}

/// A game unfolded along its minimal priority.
#[derive(Debug)]
pub(crate) struct UnfoldLevel {
    pub priority: u32,
    /// Positions truncated at this level.
    pub cut: Vec<bool>,
    /// The truncated game of every stage; the last one is the limit surrogate.
    pub stages: Vec<Level>,
    pub values: Vec<ExtValue>,
}

/// One Jacobi step of the one-step operator.
fn sweep(game: &QuantParityGame, term: &[Option<ExtValue>], cur: &[ExtValue]) -> Vec<ExtValue> {
    (0..game.len())
        .map(|v| match term[v] {
            Some(x) => x,
            None => {
                let opts = game.moves(v).iter().map(|&(w, d)| cur[w].scale(d));
                match game.owner(v) {
                    Player::P0 => opts.max().unwrap_or(ExtValue::ZERO),
                    Player::P1 => opts.min().unwrap_or(ExtValue::INFINITY),
                }
            }
        })
        .collect()
}

struct Solver<'a> {
    game: &'a QuantParityGame,
    original: usize,
    tol: Tolerances,
    keep: bool,
    stats: SolveStats,
    log: Option<StageLog>,
}

struct Solved {
    values: Vec<ExtValue>,
    level: Option<Level>,
    exact: bool,
}

impl Solver<'_> {
    fn level(&mut self, term: Vec<Option<ExtValue>>, depth: usize) -> Result<Solved, GameError> {
        self.stats.levels += 1;
        let g = self.game;
        let mut live: Vec<u32> = (0..g.len()).filter(|&v| term[v].is_none()).map(|v| g.priority(v)).collect();
        live.sort_unstable();
        live.dedup();
        if live.len() <= 1 {
            self.single(term, live.first().copied().unwrap_or(0))
        } else {
            self.unfold(term, live[0], depth)
        }
    }

    fn single(&mut self, term: Vec<Option<ExtValue>>, p: u32) -> Result<Solved, GameError> {
        let ascending = p % 2 == 1;
        let start = if ascending { ExtValue::ZERO } else { ExtValue::INFINITY };
        let mut cur: Vec<ExtValue> = term.iter().map(|t| t.unwrap_or(start)).collect();
        let mut exact = true;
        let mut iters = 0;
        loop {
            let raw = sweep(self.game, &term, &cur);
            let mut change: f64 = 0.0;
            let next: Vec<ExtValue> = cur
                .iter()
                .zip(raw)
                .map(|(&a, b)| {
                    let r = self.tol.limit_step(a, b, ascending);
                    if r != b {
                        exact = false;
                        self.stats.limit_steps += 1;
                    }
                    change = change.max(rel_change(a, r));
                    r
                })
                .collect();
            iters += 1;
            self.stats.sweeps += 1;
            cur = next;
            if change == 0.0 {
                break;
            }
            if change <= self.tol.tol_fix {
                exact = false;
                break;
            }
            if iters >= self.tol.max_iters {
                return Err(GameError::NoConvergence { iters, residual: change });
            }
        }
        let level = self.keep.then(|| {
            Level::Single(SingleLevel {
                priority: p,
                term,
                values: cur.clone(),
                exact,
                stable: iters - 1,
                iterates: Mutex::new(Vec::new()),
            })
        });
        Ok(Solved { values: cur, level, exact })
    }

    fn unfold(&mut self, term: Vec<Option<ExtValue>>, m: u32, depth: usize) -> Result<Solved, GameError> {
        let g = self.game;
        let n = g.len();
        let cut: Vec<bool> = (0..n).map(|v| term[v].is_none() && g.priority(v) == m).collect();
        let succ: Vec<usize> = (0..n).map(|v| if cut[v] { g.moves(v)[0].0 } else { v }).collect();
        let ascending = m % 2 == 1;
        let start = if ascending { ExtValue::ZERO } else { ExtValue::INFINITY };
        let mut lam: Vec<ExtValue> = vec![start; n];
        let mut prev: Option<Vec<ExtValue>> = None;
        let mut stages = Vec::new();
        let mut exact = true;
        let mut count = 0;
        if depth == 0 {
            self.log = Some(StageLog { priority: m, values: Vec::new() });
        }
        loop {
            let t: Vec<Option<ExtValue>> = (0..n).map(|v| if cut[v] { Some(lam[v]) } else { term[v] }).collect();
            let solved = self.level(t, depth + 1)?;
            self.stats.stages += 1;
            exact &= solved.exact;
            let vals = solved.values;
            if let Some(p) = &prev {
                self.stats.monotonicity_violations += p
                    .iter()
                    .zip(&vals)
                    .filter(|&(&a, &b)| {
                        let wrong = if ascending { b < a } else { b > a };
                        wrong && rel_change(a, b) > self.tol.tol_cmp
                    })
                    .count();
            }
            if depth == 0 {
                if let Some(log) = &mut self.log {
                    log.values.push(vals[..self.original].to_vec());
                }
            }
            if let Some(l) = solved.level {
                stages.push(l);
            }
            let mut change: f64 = 0.0;
            let next: Vec<ExtValue> = (0..n)
                .map(|v| {
                    if !cut[v] {
                        return lam[v];
                    }
                    let raw = vals[succ[v]];
                    let r = self.tol.limit_step(lam[v], raw, ascending);
                    if r != raw {
                        exact = false;
                        self.stats.limit_steps += 1;
                    }
                    change = change.max(rel_change(lam[v], r));
                    r
                })
                .collect();
            if change <= self.tol.tol_fix {
                if change > 0.0 {
                    exact = false;
                }
                let level = self.keep.then(|| {
                    Level::Unfold(UnfoldLevel { priority: m, cut, stages, values: vals.clone() })
                });
                return Ok(Solved { values: vals, level, exact });
            }
            count += 1;
            if count >= self.tol.max_iters {
                return Err(GameError::StageBudget { priority: m, stages: count, residual: change });
            }
            lam = next;
            prev = Some(vals);
        }
    }
}

fn check_inputs(game: &QuantParityGame, tol: &Tolerances) -> Result<(), GameError> {
    game.validate()?;
    tol.validate().map_err(ModelError::from)?;
    Ok(())
}

/// Solves a quantitative parity game by unfolding.
///
/// The game is first normalized so that every position below the maximal
/// priority has a unique discount-1 successor. Then, recursively: a game whose
/// live positions share one priority is solved by value iteration (least fixpoint
/// from 0 for an odd priority, greatest from ∞ for an even one); otherwise the
/// positions of minimal priority `m` are made terminal and their payoffs are
/// refined stage by stage, starting from ∞ (`m` even) or 0 (`m` odd), with the
/// value of their successor in the previous stage, until the relative change is at
/// most `tol_fix`.
pub fn solve(game: &QuantParityGame, cfg: &SolveConfig) -> Result<SolveResult, GameError> {
    check_inputs(game, &cfg.tol)?;
    let (expanded, fresh) = normalize_deep(game);
    let term: Vec<Option<ExtValue>> =
        (0..expanded.len()).map(|v| if expanded.is_terminal(v) { expanded.payoff(v) } else { None }).collect();
    let mut s = Solver {
        game: &expanded,
        original: game.len(),
        tol: cfg.tol,
        keep: cfg.keep_strategies,
        stats: SolveStats::default(),
        log: None,
    };
    let solved = s.level(term, 0)?;
    let mut stats = s.stats;
    stats.exact = solved.exact;
    let log = s.log;
    let values = solved.values[..game.len()].to_vec();
    let tree = solved.level.map(|root| {
        Arc::new(SolvedGame { game: expanded, fresh, root, exact: solved.exact })
    });
    Ok(SolveResult { values, stages: log, stats, tree })
}

/// Solves a game whose non-terminal positions all share one priority.
pub fn solve_reach_safe(game: &QuantParityGame, cfg: &SolveConfig) -> Result<SolveResult, GameError> {
    check_inputs(game, &cfg.tol)?;
    if game.live_priorities().len() > 1 {
        return Err(GameError::NotSinglePriority);
    }
    solve(game, cfg)
}

/// Whether `x` is acceptable for `player` against target `target` at slack `e`.
pub(crate) fn within(player: Player, x: ExtValue, target: ExtValue, e: f64) -> bool {
    match player {
        Player::P0 => eps_above(x, target, e),
        Player::P1 => eps_below(x, target, e),
    }
}
