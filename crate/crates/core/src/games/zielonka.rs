use std::collections::VecDeque;

use serde::Serialize;

use super::{Player, QuantParityGame};
use crate::error::GameError;

/// Winning regions of a qualitative game: Player 0 secures ∞ on `w0`, Player 1
/// secures 0 on `w1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WinningRegions {
    pub w0: Vec<usize>,
    pub w1: Vec<usize>,
}

impl WinningRegions {
    pub fn winner(&self, v: usize) -> Player {
        if self.w0.binary_search(&v).is_ok() {
            Player::P0
        } else {
            Player::P1
        }
    }
}

struct Arena {
    owner: Vec<Player>,
    prio: Vec<u32>,
    succ: Vec<Vec<usize>>,
    pred: Vec<Vec<usize>>,
}

impl Arena {
    /// Positions of `set` from which `player` can force a visit to `target`.
    fn attractor(&self, set: &[bool], target: &[bool], player: Player) -> Vec<bool> {
        let n = set.len();
        let mut attr = target.to_vec();
        let mut left: Vec<usize> = (0..n).map(|v| self.succ[v].iter().filter(|&&w| set[w]).count()).collect();
        let mut queue: VecDeque<usize> = (0..n).filter(|&v| attr[v]).collect();
        while let Some(w) = queue.pop_front() {
            for &v in &self.pred[w] {
                if !set[v] || attr[v] {
                    continue;
                }
                let take = if self.owner[v] == player {
                    true
                } else {
                    left[v] -= 1;
                    left[v] == 0
                };
                if take {
                    attr[v] = true;
                    queue.push_back(v);
                }
            }
        }
        attr
    }

    /// Classical recursive algorithm for min-parity games on the subgame `set`.
    fn solve(&self, set: &[bool]) -> (Vec<bool>, Vec<bool>) {
        let n = set.len();
        let Some(p) = (0..n).filter(|&v| set[v]).map(|v| self.prio[v]).min() else {
            return (vec![false; n], vec![false; n]);
        };
        let me = Player::favored_by(p);
        let target: Vec<bool> = (0..n).map(|v| set[v] && self.prio[v] == p).collect();
        let a = self.attractor(set, &target, me);
        let rest: Vec<bool> = (0..n).map(|v| set[v] && !a[v]).collect();
        let (w0, w1) = self.solve(&rest);
        let theirs = if me == Player::P0 { w1 } else { w0 };
        if !theirs.iter().any(|&b| b) {
            let mine = set.to_vec();
            let none = vec![false; n];
            return if me == Player::P0 { (mine, none) } else { (none, mine) };
        }
        let b = self.attractor(set, &theirs, me.opponent());
        let rest: Vec<bool> = (0..n).map(|v| set[v] && !b[v]).collect();
        let (mut w0, mut w1) = self.solve(&rest);
        let grow = if me == Player::P0 { &mut w1 } else { &mut w0 };
        for v in 0..n {
            grow[v] |= b[v];
        }
        (w0, w1)
    }
}

/// Winning regions of a qualitative, non-discounted game. Terminals are read as
/// self-loops of priority 0 (payoff ∞) or 1 (payoff 0).
pub fn zielonka_qualitative(game: &QuantParityGame) -> Result<WinningRegions, GameError> {
    game.validate()?;
    if !(game.is_qualitative() && game.is_non_discounted()) {
        return Err(GameError::NotQualitative);
    }
    let n = game.len();
    let mut arena = Arena {
        owner: (0..n).map(|v| game.owner(v)).collect(),
        prio: (0..n).map(|v| game.priority(v)).collect(),
        succ: (0..n).map(|v| game.moves(v).iter().map(|&(w, _)| w).collect()).collect(),
        pred: vec![Vec::new(); n],
    };
    for v in 0..n {
        if let Some(x) = game.payoff(v).filter(|_| game.is_terminal(v)) {
            arena.succ[v] = vec![v];
            arena.prio[v] = if x.is_infinite() { 0 } else { 1 };
        }
    }
    for v in 0..n {
        for &w in &arena.succ[v] {
            arena.pred[w].push(v);
        }
    }
    let (w0, _) = arena.solve(&vec![true; n]);
    Ok(WinningRegions {
        w0: (0..n).filter(|&v| w0[v]).collect(),
        w1: (0..n).filter(|&v| !w0[v]).collect(),
    })
}
