//! Replacing an arbitrary point by a finitely described one with the same
//! membership in finitely many effective concepts.

use serde::Serialize;

use crate::cantor::{BitSource, BitWord, PointGen};
use crate::error::{Error, Result};
use crate::pi01::MembershipOracle;
use crate::rational;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ReplacementKind {
    /// Every concept was settled on the cylinder of a prefix of this length.
    Resolved { prefix_len: usize },
    /// Some concept stayed unresolved; the point's own description is used.
    Boundary,
}

#[derive(Clone, Debug, Serialize)]
pub struct Replacement {
    pub point: PointGen,
    pub kind: ReplacementKind,
}

/// A cylinder `[σ]` settles a concept when it lies inside it, or when the
/// oracle reports that `[σ]` misses it.
fn settled(o: &MembershipOracle, sigma: &BitWord) -> Result<bool> {
    if o.tree().cylinder_inside(sigma) {
        return Ok(true);
    }
    Ok(!o.decide(sigma, &rational::dyadic(sigma.len()))?)
}

/// Finds `x` with a finite description such that `x ∈ cᵢ ⟺ y ∈ cᵢ` for
/// every concept, looking at prefixes of `y` up to `precision` bits.
pub fn computable_replacement(
    y: &dyn BitSource,
    oracles: &[MembershipOracle],
    precision: usize,
) -> Result<Replacement> {
    if oracles.is_empty() {
        return Ok(Replacement {
            point: PointGen::zero_tail(BitWord::new()),
            kind: ReplacementKind::Resolved { prefix_len: 0 },
        });
    }
    for m in 0..=precision {
        let Some(sigma) = y.prefix_bits(m) else { break };
        let mut all = true;
        for o in oracles {
            if !settled(o, &sigma)? {
                all = false;
                break;
            }
        }
        if all {
            return Ok(Replacement {
                point: PointGen::zero_tail(sigma),
                kind: ReplacementKind::Resolved { prefix_len: m },
            });
        }
    }
    match y.description() {
        Some(p) => Ok(Replacement { point: p.clone(), kind: ReplacementKind::Boundary }),
        None => Err(Error::Precision { precision }),
    }
}
