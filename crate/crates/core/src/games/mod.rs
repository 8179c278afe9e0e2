//! Quantitative parity games: representation, play outcomes, normalization,
//! the unfolding solver, ε-optimal counter strategies, simulation, and a
//! classical solver for the qualitative case.

mod simulate;
mod solve;
mod strategy;
mod zielonka;

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{GameError, ModelError};
use crate::values::{Discount, ExtValue};

pub use simulate::{simulate, PlayKind, Simulation};
pub use solve::{solve, solve_reach_safe, SolveConfig, SolveResult, SolveStats, StageLog};
pub use strategy::{strategy_p0, strategy_p1, CounterStrategy, Positional, Strategy};
pub use zielonka::{zielonka_qualitative, WinningRegions};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Player {
    P0,
    P1,
}

impl Player {
    pub fn index(self) -> u8 {
        match self {
            Player::P0 => 0,
            Player::P1 => 1,
        }
    }

    pub fn opponent(self) -> Player {
        match self {
            Player::P0 => Player::P1,
            Player::P1 => Player::P0,
        }
    }

    /// The player who wins infinite plays whose least recurring priority is `p`.
    pub fn favored_by(p: u32) -> Player {
        if p % 2 == 0 {
            Player::P0
        } else {
            Player::P1
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index())
    }
}

impl Serialize for Player {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(self.index())
    }
}

impl<'de> Deserialize<'de> for Player {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match u8::deserialize(d)? {
            0 => Ok(Player::P0),
            1 => Ok(Player::P1),
            n => Err(serde::de::Error::custom(format!("owner must be 0 or 1, got {n}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Position {
    pub id: String,
    pub owner: Player,
    pub priority: u32,
    pub payoff: Option<ExtValue>,
}

/// A quantitative parity game. Positions are indexed in insertion order.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct QuantParityGame {
    positions: Vec<Position>,
    index: HashMap<String, usize>,
    succ: Vec<Vec<(usize, Discount)>>,
}

impl QuantParityGame {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a position. `payoff` must be given exactly for positions that end up
    /// without moves; [`QuantParityGame::validate`] checks this.
    pub fn add_position(
        &mut self,
        id: impl Into<String>,
        owner: Player,
        priority: u32,
        payoff: Option<ExtValue>,
    ) -> Result<usize, ModelError> {
        let id = id.into();
        if self.index.contains_key(&id) {
            return Err(ModelError::DuplicateId(id));
        }
        let i = self.positions.len();
        self.index.insert(id.clone(), i);
        self.positions.push(Position { id, owner, priority, payoff });
        self.succ.push(Vec::new());
        Ok(i)
    }

    pub fn add_move(&mut self, from: usize, to: usize, discount: Discount) -> Result<(), ModelError> {
        if self.succ[from].iter().any(|&(t, _)| t == to) {
            return Err(ModelError::DuplicateEdge(self.positions[from].id.clone(), self.positions[to].id.clone()));
        }
        self.succ[from].push((to, discount));
        Ok(())
    }

    pub fn add_move_by_id(&mut self, from: &str, to: &str, discount: f64) -> Result<(), ModelError> {
        let (f, t) = (self.lookup(from)?, self.lookup(to)?);
        self.add_move(f, t, Discount::new(discount)?)
    }

    fn lookup(&self, id: &str) -> Result<usize, ModelError> {
        self.position(id).ok_or_else(|| ModelError::UnknownId(id.to_string()))
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn positions(&self) -> &[Position] {
        &self.positions
    }

    pub fn id(&self, v: usize) -> &str {
        &self.positions[v].id
    }

    pub fn owner(&self, v: usize) -> Player {
        self.positions[v].owner
    }

    pub fn priority(&self, v: usize) -> u32 {
        self.positions[v].priority
    }

    pub fn payoff(&self, v: usize) -> Option<ExtValue> {
        self.positions[v].payoff
    }

    pub fn moves(&self, v: usize) -> &[(usize, Discount)] {
        &self.succ[v]
    }

    pub fn discount(&self, from: usize, to: usize) -> Option<Discount> {
        self.succ[from].iter().find(|&&(t, _)| t == to).map(|&(_, d)| d)
    }

    pub fn is_terminal(&self, v: usize) -> bool {
        self.succ[v].is_empty()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, Discount)> + '_ {
        self.succ.iter().enumerate().flat_map(|(s, out)| out.iter().map(move |&(t, d)| (s, t, d)))
    }

    pub fn max_priority(&self) -> u32 {
        self.positions.iter().map(|p| p.priority).max().unwrap_or(0)
    }

    /// Payoffs are defined exactly on terminal positions.
    pub fn validate(&self) -> Result<(), ModelError> {
        for (v, p) in self.positions.iter().enumerate() {
            match (self.is_terminal(v), p.payoff.is_some()) {
                (true, false) => return Err(ModelError::MissingPayoff(p.id.clone())),
                (false, true) => return Err(ModelError::UnexpectedPayoff(p.id.clone())),
                _ => {}
            }
        }
        Ok(())
    }

    /// All payoffs are 0 or ∞.
    pub fn is_qualitative(&self) -> bool {
        self.positions.iter().filter_map(|p| p.payoff).all(|v| v.is_zero() || v.is_infinite())
    }

    pub fn is_non_discounted(&self) -> bool {
        self.edges().all(|(_, _, d)| d == Discount::ONE)
    }

    /// Priorities of non-terminal positions, ascending and deduplicated.
    pub fn live_priorities(&self) -> Vec<u32> {
        let mut ps: Vec<u32> =
            (0..self.len()).filter(|&v| !self.is_terminal(v)).map(|v| self.priority(v)).collect();
        ps.sort_unstable();
        ps.dedup();
        ps
    }

    fn fresh_id(&self, base: &str) -> String {
        let mut id = format!("{base}'");
        while self.index.contains_key(&id) {
            id.push('\'');
        }
        id
    }

    /// Gives every non-terminal position `v` accepted by `needs` a fresh
    /// intermediate successor `v′` (same owner, priority `prio`) that inherits
    /// `v`'s moves; `v` keeps a single discount-1 move to `v′`. Returns the new
    /// game and, for each original position, its intermediate successor.
    fn insert_intermediates(&self, prio: u32, needs: impl Fn(usize) -> bool) -> (QuantParityGame, Vec<Option<usize>>) {
        let mut g = self.clone();
        let mut fresh = vec![None; self.len()];
        for v in 0..self.len() {
            if self.is_terminal(v) || !needs(v) {
                continue;
            }
            let single_unit = self.succ[v].len() == 1 && self.succ[v][0].1 == Discount::ONE;
            if single_unit {
                continue;
            }
            let id = g.fresh_id(&self.positions[v].id);
            let w = g.add_position(id, self.positions[v].owner, prio, None).expect("fresh id");
            g.succ[w] = std::mem::replace(&mut g.succ[v], vec![(w, Discount::ONE)]);
            fresh[v] = Some(w);
        }
        (g, fresh)
    }
}

/// Gives every position of minimal priority a unique successor reached by a
/// discount-1 move, routing its original moves through a fresh intermediate
/// position of higher priority and the same owner. Values at the original
/// positions are unchanged. Already normalized games are returned as they are.
pub fn normalize(game: &QuantParityGame) -> QuantParityGame {
    let live = game.live_priorities();
    let Some(&m) = live.first() else {
        return game.clone();
    };
    let top = game.max_priority().max(m + 1);
    game.insert_intermediates(top, |v| game.priority(v) == m).0
}

/// Normalizes every priority below the maximal one at once, so that each
/// truncation step of the unfolding finds unique discount-1 successors.
pub(crate) fn normalize_deep(game: &QuantParityGame) -> (QuantParityGame, Vec<Option<usize>>) {
    let top = game.max_priority();
    game.insert_intermediates(top, |v| game.priority(v) < top)
}

/// A play: a finite sequence of positions ending at a terminal (`cycle` empty),
/// or an ultimately periodic play `prefix · cycle^ω`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Play {
    pub prefix: Vec<usize>,
    pub cycle: Vec<usize>,
}

impl Play {
    pub fn finite(positions: Vec<usize>) -> Play {
        Play { prefix: positions, cycle: Vec::new() }
    }

    pub fn lasso(prefix: Vec<usize>, cycle: Vec<usize>) -> Play {
        Play { prefix, cycle }
    }

    pub fn is_infinite(&self) -> bool {
        !self.cycle.is_empty()
    }

    /// The first `n` positions of the play (all of them for finite plays shorter than `n`).
    pub fn unroll(&self, n: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self.prefix.iter().copied().take(n).collect();
        if !self.cycle.is_empty() {
            out.extend(self.cycle.iter().copied().cycle().take(n.saturating_sub(out.len())));
        }
        out
    }

    /// The suffix starting at position `k` (counted along the unrolled play).
    pub fn suffix(&self, k: usize) -> Play {
        if k < self.prefix.len() {
            return Play { prefix: self.prefix[k..].to_vec(), cycle: self.cycle.clone() };
        }
        if self.cycle.is_empty() {
            return Play::finite(Vec::new());
        }
        let r = (k - self.prefix.len()) % self.cycle.len();
        let mut cycle = self.cycle[r..].to_vec();
        cycle.extend_from_slice(&self.cycle[..r]);
        Play { prefix: Vec::new(), cycle }
    }
}

/// The discount product along a sequence of positions.
pub(crate) fn discount_product(game: &QuantParityGame, path: &[usize]) -> Result<f64, GameError> {
    let mut acc = 1.0;
    for w in path.windows(2) {
        let d = game
            .discount(w[0], w[1])
            .ok_or_else(|| GameError::InvalidPlay(format!("no move {} -> {}", game.id(w[0]), game.id(w[1]))))?;
        acc *= d.get();
    }
    Ok(acc)
}

/// `delta · v`, keeping 0 and ∞ exact even when `delta` under- or overflows.
pub(crate) fn scale_by(delta: f64, v: ExtValue) -> ExtValue {
    if v.is_zero() || v.is_infinite() {
        v
    } else {
        ExtValue::of(delta * v.get())
    }
}

/// The outcome of a play: the discounted payoff of a finite play, or 0/∞ for an
/// infinite play according to the parity of the least priority on its cycle.
pub fn play_outcome(game: &QuantParityGame, play: &Play) -> Result<ExtValue, GameError> {
    let n = game.len();
    if play.prefix.iter().chain(&play.cycle).any(|&v| v >= n) {
        return Err(GameError::InvalidPlay("position out of range".into()));
    }
    if play.cycle.is_empty() {
        let Some(&last) = play.prefix.last() else {
            return Err(GameError::InvalidPlay("empty play".into()));
        };
        let delta = discount_product(game, &play.prefix)?;
        let payoff = game
            .payoff(last)
            .filter(|_| game.is_terminal(last))
            .ok_or_else(|| GameError::InvalidPlay(format!("finite play ends at non-terminal {}", game.id(last))))?;
        return Ok(scale_by(delta, payoff));
    }
    let mut path = play.prefix.clone();
    path.extend_from_slice(&play.cycle);
    path.push(play.cycle[0]);
    discount_product(game, &path)?;
    let least = play.cycle.iter().map(|&v| game.priority(v)).min().unwrap();
    Ok(if least % 2 == 0 { ExtValue::INFINITY } else { ExtValue::ZERO })
}
