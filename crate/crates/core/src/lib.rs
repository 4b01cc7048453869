//! Explicit, certificate-carrying permutation actions over the integers.
//!
//! The library builds two permutations of ℤ — `alpha`, assembled step by step
//! as a partial injection, and `beta`, fixed once and for all as the successor
//! map — together with a conjugating involution `sigma`, so that the group
//! generated by two tagged copies of the pair (glued along the common element
//! `c(alpha, beta)`) acts faithfully and transitively, with explicit Følner
//! blocks certifying amenability-style smallness of the `alpha` generator.
//!
//! Everything is exact: points are `i64`, group elements are reduced words,
//! and every promise the construction makes (fixed points of `c`, witness
//! pairs, block ratios, commutation of `sigma` with `c`) is recorded in the
//! state and re-checkable after the fact by [`verify`].
//!
//! Module map:
//! - [`words`]: reduced words over two generators, cyclic reduction, conjugacy,
//!   power detection.
//! - [`autos`]: Nielsen moves, induced integer matrices, and the specialization
//!   pipeline that rewrites a base word until its exponent sums divide.
//! - [`perm`]: partial injections of ℤ with pinned points and fresh-interval
//!   allocation.
//! - [`graphs`]: labeled graphs, folding, and the cycle/path gadgets that get
//!   embedded into the integers.
//! - [`engine`]: the staged construction itself — requirements, scheduling,
//!   and the growing [`engine::ConstructionState`].
//! - [`amalgam`]: two-factor words, alternating normal forms, and the induced
//!   action (the second factor acts through `sigma`).
//! - [`statefile`]: the versioned text snapshot format.
//! - [`verify`]: invariant re-validation of a snapshot, including full log
//!   replay.

pub mod amalgam;
pub mod autos;
pub mod engine;
pub mod graphs;
pub mod perm;
pub mod statefile;
pub mod verify;
pub mod words;
