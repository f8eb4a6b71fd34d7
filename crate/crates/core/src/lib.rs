//! Covariant observables on finite Abelian groups.
//!
//! A covariant observable is a family of positive effect matrices indexed by
//! the cosets `Ω = G/H` of a subgroup, summing to the identity and transported
//! by a diagonal unitary representation of `G`. This crate builds such
//! observables from isometry fields or Gram structures and decides whether a
//! given one is an extreme point of the covariant set and of the set of all
//! observables, returning explicit certificates and witness decompositions.
//!
//! ```
//! use covext_core::{models, extremality, Tolerances, Verdict};
//!
//! let tol = Tolerances::default();
//! let qubit = models::qubit_cyclic(4).unwrap();
//! let cov = extremality::covariant_extreme_test(&qubit, &tol).unwrap();
//! let glob = extremality::global_extreme_test(&qubit, &tol).unwrap();
//! assert_eq!(cov.verdict, Verdict::Extreme);
//! assert_eq!(glob.verdict, Verdict::NotExtreme);
//! ```

pub mod abelian;
pub mod construct;
pub mod error;
pub mod extremality;
pub mod linalg;
pub mod models;
pub mod povm;
pub mod repspace;
pub mod sample;

pub use num_complex;

pub use abelian::{GroupElement, GroupSpec, Subgroup, Transversal};
pub use construct::{GramStructure, IsometryField, PositiveTypeFunction, ProbabilityVector};
pub use error::{Error, Result};
pub use extremality::{Certificate, ExtremalityReport, Verdict};
pub use linalg::CMatrix;
pub use models::MomentObservable;
pub use povm::{CovariantPovm, Tolerances};
pub use repspace::Spectrum;
