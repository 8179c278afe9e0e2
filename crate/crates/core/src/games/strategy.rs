use std::sync::Arc;

use super::solve::{within, Level, SingleLevel, SolveResult, SolvedGame, UnfoldLevel};
use super::{Player, QuantParityGame};
use crate::error::GameError;
use crate::values::{Discount, ExtValue};

/// Iterates beyond which a budget search gives up and keeps the last index.
const BUDGET_SEARCH_LIMIT: usize = 100_000;

/// A strategy with memory. The play driver calls [`Strategy::reset`] once, then
/// [`Strategy::choose`] at every position owned by [`Strategy::player`] and
/// [`Strategy::observe`] after every move, whoever made it.
pub trait Strategy {
    fn player(&self) -> Player;

    fn reset(&mut self, start: usize);

    /// The successor to move to from `pos`.
    fn choose(&mut self, pos: usize) -> usize;

    fn observe(&mut self, from: usize, to: usize, discount: Discount);

    /// A fingerprint of the memory state; equal keys must lead to equal future
    /// behaviour. Positional strategies have an empty key.
    fn memory_key(&self) -> Vec<i64> {
        Vec::new()
    }
}

/// A memoryless strategy given by a table of choices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Positional {
    player: Player,
    choice: Vec<Option<usize>>,
}

impl Positional {
    pub fn new(player: Player, choice: Vec<Option<usize>>) -> Self {
        Positional { player, choice }
    }

    /// Picks `f(v)` at every non-terminal position of `player`.
    pub fn from_fn(game: &QuantParityGame, player: Player, f: impl Fn(usize) -> usize) -> Self {
        let choice = (0..game.len()).map(|v| (game.owner(v) == player && !game.is_terminal(v)).then(|| f(v))).collect();
        Positional { player, choice }
    }

    /// Moves to a successor optimizing `δ · values`, lowest index on ties.
    pub fn greedy(game: &QuantParityGame, player: Player, values: &[ExtValue]) -> Self {
        Self::from_fn(game, player, |v| best_move(game, v, player, |w| values[w]))
    }

    pub fn choices(&self) -> &[Option<usize>] {
        &self.choice
    }
}

impl Strategy for Positional {
    fn player(&self) -> Player {
        self.player
    }

    fn reset(&mut self, _start: usize) {}

    fn choose(&mut self, pos: usize) -> usize {
        self.choice[pos].expect("no choice recorded for this position")
    }

    fn observe(&mut self, _from: usize, _to: usize, _discount: Discount) {}
}

/// The successor maximizing (P0) or minimizing (P1) `δ · value(w)`; ties go to
/// the lowest position index.
pub(crate) fn best_move(game: &QuantParityGame, v: usize, player: Player, value: impl Fn(usize) -> ExtValue) -> usize {
    let mut moves: Vec<(usize, Discount)> = game.moves(v).to_vec();
    moves.sort_by_key(|&(w, _)| w);
    let mut best: Option<(usize, ExtValue)> = None;
    for (w, d) in moves {
        let x = value(w).scale(d);
        let better = match best {
            None => true,
            Some((_, b)) => match player {
                Player::P0 => x > b,
                Player::P1 => x < b,
            },
        };
        if better {
            best = Some((w, x));
        }
    }
    best.expect("position has no moves").0
}

#[derive(Clone, Debug, PartialEq)]
enum State {
    /// `budget` counts the remaining steps of a disfavored player's bounded-horizon
    /// strategy; the favored player has none and plays greedily.
    Single { budget: Option<usize> },
    /// `stage` indexes the truncated game currently played; `visits` counts
    /// minimal-priority positions seen and `log_delta` the discount product so far.
    Unfold { stage: usize, visits: i32, log_delta: f64, sub: Box<State> },
}

/// The counter strategies built from a kept unfolding: the favored player of each
/// level glues together segment strategies with shrinking slack, the other player
/// additionally counts the stage index down at every visit of a minimal-priority
/// position.
#[derive(Clone, Debug)]
pub struct CounterStrategy {
    solved: Arc<SolvedGame>,
    player: Player,
    eps: f64,
    state: Option<State>,
}

fn start(sg: &SolvedGame, level: &Level, player: Player, pos: usize, e: f64) -> State {
    match level {
        Level::Single(s) => State::Single { budget: budget(sg, s, player, pos, e) },
        Level::Unfold(u) => {
            let top = u.stages.len() - 1;
            let e0 = if Player::favored_by(u.priority) == player { e / 2.0 } else { e / 4.0 };
            State::Unfold { stage: top, visits: 0, log_delta: 0.0, sub: Box::new(start(sg, &u.stages[top], player, pos, e0)) }
        }
    }
}

fn budget(sg: &SolvedGame, s: &SingleLevel, player: Player, pos: usize, e: f64) -> Option<usize> {
    if Player::favored_by(s.priority) == player {
        return None;
    }
    if s.exact {
        return Some(s.stable);
    }
    let target = s.values[pos];
    let k = (0..BUDGET_SEARCH_LIMIT)
        .find(|&k| within(player, s.iterate(&sg.game, k, pos), target, e))
        .unwrap_or(BUDGET_SEARCH_LIMIT);
    Some(k)
}

fn choose(sg: &SolvedGame, level: &Level, st: &State, player: Player, pos: usize) -> usize {
    match (level, st) {
        (Level::Single(s), State::Single { budget }) => match budget {
            Some(j) if *j >= 1 => best_move(&sg.game, pos, player, |w| s.iterate(&sg.game, j - 1, w)),
            _ => best_move(&sg.game, pos, player, |w| s.values[w]),
        },
        (Level::Unfold(u), State::Unfold { stage, sub, .. }) => {
            if u.cut[pos] {
                sg.game.moves(pos)[0].0
            } else {
                choose(sg, &u.stages[*stage], sub, player, pos)
            }
        }
        _ => unreachable!("strategy state does not match the unfolding"),
    }
}

/// The earliest stage whose value at `to` is within slack of the limit surrogate.
fn restrict(u: &UnfoldLevel, exact: bool, player: Player, to: usize, e: f64) -> usize {
    let top = u.stages.len() - 1;
    let target = u.stages[top].values()[to];
    (0..top)
        .find(|&n| {
            let x = u.stages[n].values()[to];
            if exact {
                x == target
            } else {
                within(player, x, target, e)
            }
        })
        .unwrap_or(top.saturating_sub(1))
}

#[allow(clippy::too_many_arguments)]
fn observe(
    sg: &SolvedGame,
    level: &Level,
    st: &mut State,
    player: Player,
    eps: f64,
    from: usize,
    to: usize,
    d: Discount,
) {
    match (level, st) {
        (Level::Single(_), State::Single { budget }) => {
            if let Some(j) = budget {
                *j = j.saturating_sub(1);
            }
        }
        (Level::Unfold(u), State::Unfold { stage, visits, log_delta, sub }) => {
            *log_delta += d.get().ln();
            if !u.cut[from] {
                observe(sg, &u.stages[*stage], sub, player, eps, from, to, d);
                return;
            }
            *visits += 1;
            let big_d = log_delta.abs().exp();
            let top = u.stages.len() - 1;
            let e = if Player::favored_by(u.priority) == player {
                eps / (2f64.powi(*visits + 1) * big_d)
            } else {
                let e = eps / (4f64.powi(*visits) * big_d) / 4.0;
                *stage = if *stage == top { restrict(u, sg.exact, player, to, e) } else { stage.saturating_sub(1) };
                e
            };
            **sub = start(sg, &u.stages[*stage], player, to, e);
        }
        _ => unreachable!("strategy state does not match the unfolding"),
    }
}

fn key(st: &State, exact: bool, out: &mut Vec<i64>) {
    match st {
        State::Single { budget } => out.push(budget.map_or(-1, |b| b as i64)),
        State::Unfold { stage, visits, log_delta, sub } => {
            out.push(*stage as i64);
            if !exact {
                out.push(*visits as i64);
                out.push((log_delta * 1e6).round() as i64);
            }
            key(sub, exact, out);
        }
    }
}

impl CounterStrategy {
    fn state_at(&mut self, pos: usize) -> &mut State {
        if self.state.is_none() {
            self.reset(pos);
        }
        self.state.as_mut().unwrap()
    }

    /// Feeds a move of the original game into the expanded game, routing it through
    /// the intermediate position inserted by normalization when there is one.
    fn feed(sg: &SolvedGame, st: &mut State, player: Player, eps: f64, from: usize, to: usize, d: Discount) {
        match sg.fresh[from] {
            Some(f) => {
                observe(sg, &sg.root, st, player, eps, from, f, Discount::ONE);
                observe(sg, &sg.root, st, player, eps, f, to, d);
            }
            None => observe(sg, &sg.root, st, player, eps, from, to, d),
        }
    }
}

impl Strategy for CounterStrategy {
    fn player(&self) -> Player {
        self.player
    }

    fn reset(&mut self, pos: usize) {
        self.state = Some(start(&self.solved, &self.solved.root, self.player, pos, self.eps));
    }

    fn choose(&mut self, pos: usize) -> usize {
        let (player, eps) = (self.player, self.eps);
        let sg = Arc::clone(&self.solved);
        let st = self.state_at(pos);
        match sg.fresh[pos] {
            Some(f) => {
                let mut tmp = st.clone();
                observe(&sg, &sg.root, &mut tmp, player, eps, pos, f, Discount::ONE);
                choose(&sg, &sg.root, &tmp, player, f)
            }
            None => choose(&sg, &sg.root, st, player, pos),
        }
    }

    fn observe(&mut self, from: usize, to: usize, discount: Discount) {
        let (player, eps) = (self.player, self.eps);
        let sg = Arc::clone(&self.solved);
        let st = self.state_at(from);
        Self::feed(&sg, st, player, eps, from, to, discount);
    }

    fn memory_key(&self) -> Vec<i64> {
        let mut out = Vec::new();
        if let Some(st) = &self.state {
            key(st, self.solved.exact, &mut out);
        }
        out
    }
}

fn counter(result: &SolveResult, player: Player, eps: f64) -> Result<CounterStrategy, GameError> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(GameError::BadEpsilon(eps));
    }
    let solved = result.tree.clone().ok_or(GameError::NoStrategyData)?;
    Ok(CounterStrategy { solved, player, eps, state: None })
}

/// Player 0's ε-optimal strategy: against every opponent, the outcome is
/// ε-above the value of the starting position.
pub fn strategy_p0(result: &SolveResult, eps: f64) -> Result<CounterStrategy, GameError> {
    counter(result, Player::P0, eps)
}

/// Player 1's ε-optimal strategy: against every opponent, the outcome is
/// ε-below the value of the starting position.
pub fn strategy_p1(result: &SolveResult, eps: f64) -> Result<CounterStrategy, GameError> {
    counter(result, Player::P1, eps)
}
