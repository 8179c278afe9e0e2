//! Quantitative μ-calculus over quantitative transition systems, quantitative
//! parity games, and the translations between the two.

pub mod bridge;
pub mod error;
pub mod games;
pub mod io;
pub mod logic;
pub mod random;
pub mod semantics;
pub mod values;

pub use error::*;
pub use games::{
    normalize, play_outcome, simulate, solve, solve_reach_safe, strategy_p0, strategy_p1, zielonka_qualitative, Play,
    Player, QuantParityGame, SolveConfig, SolveResult, Strategy,
};
pub use logic::{assign_priorities, parse, to_nnf, Formula, PriorityAssignment};
pub use semantics::{eval, eval_qualitative, Environment, Qts, Valuation};
pub use values::{closeness_gap, eps_above, eps_below, eps_close, ext_mul, ext_recip, Discount, ExtValue, Tolerances};
