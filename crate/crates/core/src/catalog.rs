//! JSON concept catalogs: the on-disk form of a concept class.
//!
//! ```json
//! {
//!   "schema": "effpac.catalog/v1",
//!   "box": {"lo": "0", "hi": "1"},
//!   "effectivity": "effective",
//!   "lookahead": 8,
//!   "concepts": [
//!     {"kind": "interval", "lo": "0", "hi": "1/2"},
//!     {"kind": "halfspace", "d": 2, "a": ["1/2", "1/3"], "b": "1/4"},
//!     {"kind": "formula", "formula": "(x0 | x1) & (!x0 | x2)"},
//!     {"kind": "dgon", "halfspaces": [ ... ]},
//!     {"kind": "finite_paths", "paths": ["ep:1|0"], "height": null},
//!     {"kind": "empty"},
//!     {"kind": "full"}
//!   ]
//! }
//! ```
//!
//! The position of a concept in `concepts` is its tree index.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::cantor::{CantorBox, PointGen};
use crate::concepts::{DGon, Formula, RationalHalfspace, RationalInterval};
use crate::error::{Error, Result};
use crate::pi01::{ConceptClassEnum, StageTree, DEFAULT_LOOKAHEAD};

pub const CATALOG_SCHEMA: &str = "effpac.catalog/v1";

/// Descriptor of one tree in the closed catalog of rule kinds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TreeSpec {
    Full,
    Empty,
    Formula {
        formula: Formula,
    },
    Interval(RationalInterval),
    Halfspace(RationalHalfspace),
    Dgon(DGon),
    /// Initial segments of finitely many paths; with `height`, only
    /// segments shorter than `height` (a finite tree, hence no paths).
    FinitePaths {
        paths: Vec<PointGen>,
        #[serde(default)]
        height: Option<usize>,
    },
}

impl TreeSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            TreeSpec::Interval(i) => i.validate(),
            TreeSpec::Halfspace(h) => h.validate(),
            TreeSpec::Dgon(g) => g.validate(),
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Effectivity {
    Weak,
    #[default]
    Effective,
}

fn default_schema() -> String {
    CATALOG_SCHEMA.to_string()
}

fn default_lookahead() -> usize {
    DEFAULT_LOOKAHEAD
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConceptCatalog {
    #[serde(default = "default_schema")]
    pub schema: String,
    #[serde(rename = "box", default)]
    pub bbox: CantorBox,
    #[serde(default)]
    pub effectivity: Effectivity,
    #[serde(default = "default_lookahead")]
    pub lookahead: usize,
    pub concepts: Vec<TreeSpec>,
}

impl ConceptCatalog {
    pub fn new(concepts: Vec<TreeSpec>) -> Self {
        Self {
            schema: default_schema(),
            bbox: CantorBox::unit(),
            effectivity: Effectivity::Effective,
            lookahead: DEFAULT_LOOKAHEAD,
            concepts,
        }
    }

    pub fn with_box(mut self, bbox: CantorBox) -> Self {
        self.bbox = bbox;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != CATALOG_SCHEMA {
            return Err(Error::Schema(format!("unsupported catalog schema `{}`", self.schema)));
        }
        if self.bbox.lo >= self.bbox.hi {
            return Err(Error::Schema("catalog box needs lo < hi".into()));
        }
        for (i, c) in self.concepts.iter().enumerate() {
            c.validate().map_err(|e| Error::Schema(format!("concept {i}: {e}")))?;
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cat: ConceptCatalog = serde_json::from_str(text).map_err(|e| Error::Schema(format!("catalog: {e}")))?;
        cat.validate()?;
        Ok(cat)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Schema(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("catalog serializes")
    }

    pub fn to_class(&self) -> Result<ConceptClassEnum> {
        self.validate()?;
        let trees = self
            .concepts
            .iter()
            .map(|spec| StageTree::new(spec.clone(), self.bbox.clone()).map(Arc::new))
            .collect::<Result<Vec<_>>>()?;
        Ok(ConceptClassEnum::new(trees, self.effectivity, self.lookahead))
    }
}
