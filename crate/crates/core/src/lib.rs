//! Exact finite-level realizations of p-adic projective limits.
//!
//! Every object here is a finite stage of an inverse system indexed by the
//! precision level `k`: the rings `Z/p^kZ`, the level sets `M_k` of a clopen
//! manifold, maps and permutations between level sets, loop monoids of
//! finite-support maps and their Grothendieck groups, and truncated p-adic
//! completions. Compatibility with the connecting projections is checked
//! exhaustively wherever a tower is built.

pub mod completion_characters;
pub mod diff_profinite;
pub mod error;
pub mod function_tower;
pub mod grothendieck;
pub mod level_rings;
pub mod loop_monoid;
pub mod manifold_tower;
pub mod ultrametric;

pub use error::{Error, Result};
