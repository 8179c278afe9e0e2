//! Seeded generators of small random systems, formulae and games.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::games::{Player, Positional, QuantParityGame};
use crate::logic::{assign_priorities, Formula};
use crate::semantics::Qts;
use crate::values::{Discount, ExtValue};

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub const PREDICATES: [&str; 2] = ["P", "Q"];

const VALUES: [f64; 5] = [0.0, 0.5, 1.0, 2.0, 3.0];

fn value(rng: &mut impl Rng) -> ExtValue {
    // ∞ with probability 1/10, otherwise one of the finite samples
    if rng.gen_bool(0.1) {
        ExtValue::INFINITY
    } else {
        ExtValue::of(*VALUES.choose(rng).unwrap())
    }
}

fn discount(rng: &mut impl Rng, lo: f64, hi: f64) -> Discount {
    // log-uniform, rounded to two decimals so systems print compactly
    let x = (rng.gen_range(lo.ln()..=hi.ln())).exp();
    Discount::new(((x * 100.0).round() / 100.0).clamp(lo, hi)).unwrap()
}

/// A system with `1..=max_states` states named `s0, s1, …`, predicates `P` and `Q`,
/// each ordered pair connected with probability 0.4 and discounts in `[0.25, 4]`.
pub fn qts(rng: &mut impl Rng, max_states: usize) -> Qts {
    let n = rng.gen_range(1..=max_states.max(1));
    let mut k = Qts::new((0..n).map(|i| format!("s{i}"))).unwrap();
    for s in 0..n {
        for p in PREDICATES {
            k.set_predicate(p, s, value(rng));
        }
    }
    for s in 0..n {
        for t in 0..n {
            if rng.gen_bool(0.4) {
                k.add_edge(s, t, discount(rng, 0.25, 4.0)).unwrap();
            }
        }
    }
    k
}

/// Size limits for [`formula`].
#[derive(Clone, Copy, Debug)]
pub struct FormulaShape {
    pub max_depth: usize,
    pub max_size: usize,
    /// Upper bound on the alternation depth as computed by [`assign_priorities`].
    pub max_alternation: u32,
    /// Allow `~` above closed subformulae (the result is then not in negation normal form).
    pub negations: bool,
}

impl Default for FormulaShape {
    fn default() -> Self {
        FormulaShape { max_depth: 5, max_size: 12, max_alternation: 2, negations: false }
    }
}

struct FormulaGen<'a, R> {
    rng: &'a mut R,
    shape: FormulaShape,
    fresh: usize,
    /// Kinds of the enclosing binders, innermost last (`true` for least).
    kinds: Vec<bool>,
}

impl<R: Rng> FormulaGen<'_, R> {
    fn leaf(&mut self, scope: &[String]) -> Formula {
        if !scope.is_empty() && self.rng.gen_bool(0.6) {
            return Formula::var(scope.choose(self.rng).unwrap().clone());
        }
        let p = Formula::pred(*PREDICATES.choose(self.rng).unwrap(), self.rng.gen_range(0..=2) as f64);
        if self.rng.gen_bool(0.2) {
            Formula::not(p)
        } else {
            p
        }
    }

    /// A formula with exactly `size` nodes (up to the depth limit).
    fn gen(&mut self, size: usize, depth: usize, scope: &mut Vec<String>) -> Formula {
        if size <= 1 || depth <= 1 {
            return self.leaf(scope);
        }
        if size == 2 || self.rng.gen_bool(0.6) {
            let negate = self.shape.negations && scope.is_empty() && self.rng.gen_bool(0.15);
            let choice = if negate { 5 } else { self.rng.gen_range(0..5) };
            let child = |g: &mut Self, scope: &mut Vec<String>| g.gen(size - 1, depth - 1, scope);
            return match choice {
                0 => Formula::diamond(child(self, scope)),
                1 => Formula::boxed(child(self, scope)),
                2 => {
                    let d = discount(self.rng, 0.5, 2.0).get();
                    Formula::scale(d, child(self, scope))
                }
                3 | 4 => {
                    let x = format!("X{}", self.fresh);
                    self.fresh += 1;
                    // alternate with the enclosing binder more often than not
                    let least = match self.kinds.last() {
                        Some(&outer) => self.rng.gen_bool(if outer { 0.25 } else { 0.75 }),
                        None => self.rng.gen_bool(0.5),
                    };
                    scope.push(x.clone());
                    self.kinds.push(least);
                    let body = child(self, scope);
                    self.kinds.pop();
                    scope.pop();
                    if least {
                        Formula::mu(x, body)
                    } else {
                        Formula::nu(x, body)
                    }
                }
                _ => Formula::not(child(self, scope)),
            };
        }
        let left = self.rng.gen_range(1..size - 1);
        let a = self.gen(left, depth - 1, scope);
        let b = self.gen(size - 1 - left, depth - 1, scope);
        if self.rng.gen_bool(0.5) {
            Formula::and(a, b)
        } else {
            Formula::or(a, b)
        }
    }

    fn sample(&mut self, scope: &mut Vec<String>) -> Formula {
        let size = self.rng.gen_range(1..=self.shape.max_size.max(1));
        self.gen(size, self.shape.max_depth, scope)
    }
}

/// A closed, well-named formula over `P` and `Q` within the given shape. The target
/// alternation depth is drawn uniformly up to the shape's bound, then samples are
/// drawn until one fits; the fallback is a single predicate.
pub fn formula(rng: &mut impl Rng, shape: FormulaShape) -> Formula {
    let target = rng.gen_range(0..=shape.max_alternation);
    let mut fallback = None;
    for _ in 0..2000 {
        let mut g = FormulaGen { rng: &mut *rng, shape, fresh: 0, kinds: Vec::new() };
        let f = g.sample(&mut Vec::new());
        if f.size() > shape.max_size || f.depth() > shape.max_depth {
            continue;
        }
        let alt = assign_priorities(&f).depth;
        if alt == target {
            return f;
        }
        if alt <= shape.max_alternation && fallback.is_none() {
            fallback = Some(f);
        }
    }
    fallback.unwrap_or_else(|| Formula::pred("P", 0.0))
}

/// A formula whose only free variable is `x` (possibly unused), for fixpoint laws.
pub fn open_formula(rng: &mut impl Rng, shape: FormulaShape, x: &str) -> Formula {
    for _ in 0..1000 {
        let mut g = FormulaGen { rng: &mut *rng, shape, fresh: 0, kinds: Vec::new() };
        let f = g.sample(&mut vec![x.to_string()]);
        let closed = Formula::mu(x, f.clone());
        if closed.size() <= shape.max_size
            && closed.depth() <= shape.max_depth
            && assign_priorities(&closed).depth <= shape.max_alternation
        {
            return f;
        }
    }
    Formula::var(x)
}

/// A game with `2..=max_positions` positions named `v0, v1, …` and priorities below
/// `d`. About a quarter of the positions are terminal; the others get one to three
/// moves with discounts in `[0.25, 4]`.
pub fn game(rng: &mut impl Rng, max_positions: usize, d: u32) -> QuantParityGame {
    build(rng, max_positions.max(2), d, false)
}

/// A qualitative, non-discounted game: payoffs 0 or ∞, every discount 1.
pub fn qualitative_game(rng: &mut impl Rng, max_positions: usize, priorities: u32) -> QuantParityGame {
    build(rng, max_positions.max(2), priorities, true)
}

fn build(
    rng: &mut impl Rng,
    max_positions: usize,
    d: u32,
    qualitative: bool,
) -> QuantParityGame {
    let n = rng.gen_range(2..=max_positions);
    let mut g = QuantParityGame::new();
    for i in 0..n {
        let owner = if rng.gen_bool(0.5) { Player::P0 } else { Player::P1 };
        let pay = match (rng.gen_bool(0.25), qualitative) {
            (false, _) => None,
            (true, true) => Some(if rng.gen_bool(0.5) { ExtValue::INFINITY } else { ExtValue::ZERO }),
            (true, false) => Some(value(rng)),
        };
        g.add_position(format!("v{i}"), owner, rng.gen_range(0..d.max(1)), pay).unwrap();
    }
    for v in 0..n {
        if g.payoff(v).is_some() {
            continue;
        }
        let mut targets: Vec<usize> = (0..n).collect();
        targets.shuffle(rng);
        for &w in &targets[..rng.gen_range(1..=3.min(n))] {
            let d = if qualitative { Discount::ONE } else { discount(rng, 0.25, 4.0) };
            g.add_move(v, w, d).unwrap();
        }
    }
    g
}

/// An acyclic game with `2..=max_positions` positions: moves only go to later
/// positions and the last position is terminal.
pub fn acyclic_game(rng: &mut impl Rng, max_positions: usize) -> QuantParityGame {
    let n = rng.gen_range(2..=max_positions.max(2));
    let mut g = QuantParityGame::new();
    for i in 0..n {
        let owner = if rng.gen_bool(0.5) { Player::P0 } else { Player::P1 };
        let terminal = i == n - 1 || rng.gen_bool(0.3);
        let pay = if terminal { Some(value(rng)) } else { None };
        g.add_position(format!("v{i}"), owner, rng.gen_range(0..3), pay).unwrap();
    }
    for v in 0..n {
        if g.payoff(v).is_some() {
            continue;
        }
        let mut targets: Vec<usize> = (v + 1..n).collect();
        targets.shuffle(rng);
        let k = rng.gen_range(1..=3.min(targets.len()));
        for &w in &targets[..k] {
            g.add_move(v, w, discount(rng, 0.25, 4.0)).unwrap();
        }
    }
    g
}

/// Independent seeds for the instances of a batch, derived from one master seed.
pub fn instance_seeds(seed: u64, count: usize) -> Vec<u64> {
    let mut r = rng(seed);
    (0..count).map(|_| r.gen()).collect()
}

/// A positional strategy picking a uniformly random move at each position.
pub fn positional(rng: &mut impl Rng, game: &QuantParityGame, player: Player) -> Positional {
    let picks: Vec<usize> = (0..game.len())
        .map(|v| match game.moves(v) {
            [] => v,
            moves => moves[rng.gen_range(0..moves.len())].0,
        })
        .collect();
    Positional::from_fn(game, player, move |v| picks[v])
}
