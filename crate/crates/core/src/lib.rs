//! Exact arithmetic for Q-systems and Kirillov-Reshetikhin characters.
//!
//! The crate solves finite, truncated-infinite and specialized Q-systems for
//! their unique or canonical power-series solutions over exact rationals,
//! evaluates the combinatorial series `K^ν` and `R^ν` from their closed-form
//! coefficients, and verifies the classical identities relating the two:
//! power-series formulae, denominator formulae (Weyl and Jacobian forms),
//! character comparisons and multiplicity extraction.
//!
//! Every value is immutable after construction and every operation is a pure
//! function; values may be freely shared across threads.

pub mod combinat;
pub mod json;
pub mod kr;
pub mod laurent;
pub mod liedata;
pub mod linalg;
pub mod qsolve;
pub mod rat;
pub mod series;

pub use combinat::BinomialConvention;
pub use qsolve::{QSystemSpec, SolutionFamily, SysIndex, SystemKind};
pub use rat::Rat;
pub use series::{Expo, TruncatedSeries, VarSet};
