//! Decide whether a Cayley digraph `Cay(Z_n, S)` of a cyclic group is normal
//! and whether it has the CI property, with checkable certificates.
//!
//! The group is written additively throughout: vertices are the residues
//! `0..n`, the identity is `0`, and the arc set is `{(g, g + s) : s in S}`.
//! Group automorphisms of `Z_n` are multipliers `x -> k*x` with `gcd(k, n) = 1`.
//!
//! Module map:
//! - [`perm`]: permutations and permutation groups given by generators.
//! - [`arith`]: CRT decomposition of `Z_n`, multipliers and the affine group.
//! - [`cayley`]: construction and structural probing of Cayley digraphs.
//! - [`search`]: automorphism groups by refinement and backtracking.
//! - [`ci`]: normality and CI decisions and their certificates.
//! - [`constructions`]: the known non-CI witness families and classification predicates.
//! - [`sweep`]: orbit-reduced exhaustive sweeps, reports and the result cache.

pub mod arith;
pub mod cayley;
pub mod ci;
pub mod config;
pub mod constructions;
pub mod error;
pub mod perm;
pub mod search;
pub mod sweep;

pub use error::{Error, Result};
