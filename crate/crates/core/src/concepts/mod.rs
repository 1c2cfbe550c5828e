//! Concrete concept families and the two constructions that keep them
//! effective: rational approximation of hyperplanes and computable
//! replacement of witness points.

mod formula;
mod geometry;
pub mod rationalize;
pub mod replacement;

pub use formula::Formula;
pub use geometry::{DGon, RationalHalfspace, RationalInterval};
pub use rationalize::{rationalize_hyperplane, RationalizeOptions, Rationalized, RealCoeff, RealHyperplane};
pub use replacement::{computable_replacement, Replacement, ReplacementKind};

use crate::cantor::CantorBox;
use crate::catalog::TreeSpec;
use crate::pi01::StageTree;

/// Paths are exactly the satisfying assignments of `phi`.
pub fn formula_tree(phi: Formula) -> StageTree {
    StageTree::from_spec(TreeSpec::Formula { formula: phi }).expect("formulas are always valid")
}

/// Paths are the encodings of the points of `interval` (unit box).
pub fn interval_tree(interval: RationalInterval) -> StageTree {
    interval_tree_in(interval, CantorBox::unit())
}

pub fn interval_tree_in(interval: RationalInterval, bbox: CantorBox) -> StageTree {
    StageTree::new(TreeSpec::Interval(interval), bbox).expect("validated interval")
}

pub fn halfspace_tree(h: RationalHalfspace) -> StageTree {
    halfspace_tree_in(h, CantorBox::unit())
}

pub fn halfspace_tree_in(h: RationalHalfspace, bbox: CantorBox) -> StageTree {
    StageTree::new(TreeSpec::Halfspace(h), bbox).expect("validated half-space")
}

/// Excludes a node exactly when one of the component half-planes does.
pub fn dgon_tree(g: DGon) -> StageTree {
    dgon_tree_in(g, CantorBox::unit())
}

pub fn dgon_tree_in(g: DGon, bbox: CantorBox) -> StageTree {
    StageTree::new(TreeSpec::Dgon(g), bbox).expect("validated d-gon")
}
