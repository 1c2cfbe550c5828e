//! Distributions, the (ε, δ) learning experiment, and ε-transversals.

mod distribution;
mod learning;
mod transversal;

pub use distribution::{Distribution, Sampler};
pub use learning::{
    consistent_learner, draw_sample, error_mass, pac_experiment, ErrorMass, LabeledSample, PacReport, PacSetup,
    TrialRecord,
};
pub use transversal::{j_membership, q_membership, transversal_check};

use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, format_rational, ratio, to_f64, Rational};

/// Accuracy and confidence, both in `(0, 1/2)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PacParams {
    #[serde(with = "rational::serde_str")]
    pub eps: Rational,
    #[serde(with = "rational::serde_str")]
    pub delta: Rational,
}

impl PacParams {
    pub fn new(eps: Rational, delta: Rational) -> Result<Self> {
        let half = ratio(1, 2);
        for (name, v) in [("eps", &eps), ("delta", &delta)] {
            if !v.is_positive() || *v >= half {
                return Err(Error::InvalidArgument(format!("{name} = {} must lie in (0, 1/2)", format_rational(v))));
            }
        }
        Ok(Self { eps, delta })
    }
}

/// Constants of `m = ⌈(outer/ε)(d·ln(eps_log/ε) + ln(delta_log/δ))⌉`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleSizeConstants {
    pub outer: f64,
    pub eps_log: f64,
    pub delta_log: f64,
}

impl Default for SampleSizeConstants {
    fn default() -> Self {
        Self { outer: 4.0, eps_log: 12.0, delta_log: 2.0 }
    }
}

/// Sample size sufficient for a consistent learner over a class of VC
/// dimension `d`.
pub fn behw_sample_size(p: &PacParams, d: usize) -> usize {
    behw_sample_size_with(p, d, SampleSizeConstants::default())
}

pub fn behw_sample_size_with(p: &PacParams, d: usize, k: SampleSizeConstants) -> usize {
    let eps = to_f64(&p.eps);
    let delta = to_f64(&p.delta);
    let m = (k.outer / eps) * (d as f64 * (k.eps_log / eps).ln() + (k.delta_log / delta).ln());
    m.ceil().max(1.0) as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(e: (i64, i64), d: (i64, i64)) -> PacParams {
        PacParams::new(ratio(e.0, e.1), ratio(d.0, d.1)).unwrap()
    }

    #[test]
    fn sample_size_examples() {
        assert_eq!(behw_sample_size(&params((1, 10), (1, 10)), 3), 695);
        assert_eq!(behw_sample_size(&params((1, 5), (1, 5)), 2), 210);
        // d = 0 leaves only the confidence term: 40 ln 20 = 119.8.
        assert_eq!(behw_sample_size(&params((1, 10), (1, 10)), 0), 120);
        let coarse = behw_sample_size(&params((1, 5), (1, 10)), 3);
        let fine = behw_sample_size(&params((1, 10), (1, 10)), 3);
        assert!(fine > 2 * coarse);
    }

    #[test]
    fn params_bounds() {
        assert!(PacParams::new(ratio(1, 2), ratio(1, 4)).is_err());
        assert!(PacParams::new(ratio(0, 1), ratio(1, 4)).is_err());
        assert!(PacParams::new(ratio(1, 4), ratio(49, 100)).is_ok());
    }
}
