//! Effective concept classes over Cantor space.
//!
//! Concepts are co-c.e. binary trees ([`pi01::StageTree`]) whose infinite
//! paths form closed subsets of `2^ω`. On top of that representation the
//! crate provides the standard concept families (propositional formulas,
//! intervals, half-spaces, convex polygons), shatter counting and VC
//! lower bounds, seeded PAC experiments with a consistent learner, the
//! ε-transversal predicates, and a finite-horizon simulator of the
//! limit-lemma construction that produces classes of finite or infinite
//! VC dimension depending on a Π⁰₃ predicate.

pub mod cantor;
pub mod catalog;
pub mod concepts;
pub mod construction;
pub mod error;
pub mod pac;
pub mod pi01;
pub mod rational;
pub mod seeds;
pub mod vc;

pub use cantor::{BitSource, BitWord, CantorBox, DyadicBall, PointGen};
pub use catalog::{ConceptCatalog, Effectivity, TreeSpec};
pub use error::{Error, Result};
pub use pi01::{ConceptClassEnum, MembershipOracle, NodeStatus, PointVerdict, StageTree};
