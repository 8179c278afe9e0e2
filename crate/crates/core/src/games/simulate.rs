use std::collections::HashMap;

use serde::Serialize;

use super::{discount_product, play_outcome, Play, Player, QuantParityGame, Strategy};
use crate::error::GameError;
use crate::values::ExtValue;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PlayKind {
    Terminated,
    Periodic,
    Truncated,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Simulation {
    pub play: Play,
    pub kind: PlayKind,
    /// The exact outcome; `None` for truncated plays.
    pub outcome: Option<ExtValue>,
    /// Discount product of the simulated prefix. For a truncated play the outcome
    /// is this factor times the (unknown) outcome of the remaining play.
    pub prefix_discount: ExtValue,
}

/// Runs the unique play from `start` consistent with both strategies, for at most
/// `horizon` moves. A repeated (position, memory) configuration closes a cycle and
/// yields the exact outcome of the ultimately periodic play.
pub fn simulate(
    game: &QuantParityGame,
    s0: &mut dyn Strategy,
    s1: &mut dyn Strategy,
    start: usize,
    horizon: usize,
) -> Result<Simulation, GameError> {
    if start >= game.len() {
        return Err(GameError::InvalidPlay("start position out of range".into()));
    }
    s0.reset(start);
    s1.reset(start);
    let mut seen: HashMap<(usize, Vec<i64>, Vec<i64>), usize> = HashMap::new();
    let mut path = vec![start];
    let finish = |play: Play, kind: PlayKind, path: &[usize]| -> Result<Simulation, GameError> {
        let outcome = match kind {
            PlayKind::Truncated => None,
            _ => Some(play_outcome(game, &play)?),
        };
        let prefix_discount = ExtValue::of(discount_product(game, path)?);
        Ok(Simulation { play, kind, outcome, prefix_discount })
    };
    loop {
        let pos = *path.last().unwrap();
        if game.is_terminal(pos) {
            return finish(Play::finite(path.clone()), PlayKind::Terminated, &path);
        }
        let key = (pos, s0.memory_key(), s1.memory_key());
        if let Some(&j) = seen.get(&key) {
            let i = path.len() - 1;
            let play = Play::lasso(path[..j].to_vec(), path[j..i].to_vec());
            return finish(play, PlayKind::Periodic, &path[..=j]);
        }
        seen.insert(key, path.len() - 1);
        if path.len() > horizon {
            return finish(Play::finite(path.clone()), PlayKind::Truncated, &path);
        }
        let next = match game.owner(pos) {
            Player::P0 => s0.choose(pos),
            Player::P1 => s1.choose(pos),
        };
        let d = game.discount(pos, next).ok_or_else(|| {
            GameError::InvalidPlay(format!("strategy chose illegal move {} -> {}", game.id(pos), game.id(next)))
        })?;
        s0.observe(pos, next, d);
        s1.observe(pos, next, d);
        path.push(next);
    }
}
