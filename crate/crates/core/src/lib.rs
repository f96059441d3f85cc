//! Exact toric GIT quotients, Klyachko filtrations, slope stability and the
//! Minkowski problem for quotient polarizations.
//!
//! Modules build on each other from bottom to top: [`linalg`] and
//! [`lattice`] supply exact integer and rational algebra, [`polytope`]
//! handles H-polytopes and lattice volumes, [`klyachko`] holds filtration
//! data for equivariant sheaves, [`stability`] decides slope stability,
//! [`git`] builds quotients and the functors between them, and
//! [`minkowski`] connects the two sides numerically. [`build`] constructs
//! standard families and [`json`] is the serialization boundary.
//!
//! The `parallel` feature (on by default) runs candidate evaluation and
//! searches on a rayon pool; see [`par`].

pub mod build;
pub mod git;
pub mod json;
pub mod klyachko;
pub mod lattice;
pub mod linalg;
pub mod minkowski;
pub mod par;
pub mod polytope;
pub mod stability;

pub use git::{GitSetup, UnstableIndexVector};
pub use klyachko::{FiltrationSheaf, Subspace};
pub use lattice::{QuotientLattice, Sublattice};
pub use polytope::{DivisorClass, HPolytope};
