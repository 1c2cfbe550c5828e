use num_bigint::{BigInt, RandBigInt};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cantor::{BitWord, PointGen};
use crate::error::{Error, Result};
use crate::rational::{self, format_rational, Rational};

/// A sampleable probability distribution on Cantor space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Distribution {
    /// Finitely many atoms; `weights` empty means uniform.
    FiniteSupport {
        atoms: Vec<PointGen>,
        #[serde(default, with = "rational::serde_str_vec", skip_serializing_if = "Vec::is_empty")]
        weights: Vec<Rational>,
    },
    /// The first `precision` bits are independent with `P(1) = p`; the rest
    /// are zero. With `p = 1/2` this is the uniform measure at that resolution.
    ProductBernoulli {
        #[serde(with = "rational::serde_str")]
        p: Rational,
        precision: usize,
    },
}

impl Distribution {
    pub fn uniform(atoms: Vec<PointGen>) -> Result<Self> {
        let d = Distribution::FiniteSupport { atoms, weights: Vec::new() };
        d.validate()?;
        Ok(d)
    }

    pub fn weighted(atoms: Vec<PointGen>, weights: Vec<Rational>) -> Result<Self> {
        let d = Distribution::FiniteSupport { atoms, weights };
        d.validate()?;
        Ok(d)
    }

    pub fn point_mass(x: PointGen) -> Self {
        Distribution::FiniteSupport { atoms: vec![x], weights: Vec::new() }
    }

    pub fn product_bernoulli(p: Rational, precision: usize) -> Result<Self> {
        let d = Distribution::ProductBernoulli { p, precision };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Distribution::FiniteSupport { atoms, weights } => {
                if atoms.is_empty() {
                    return Err(Error::InvalidArgument("finite-support distribution has no atoms".into()));
                }
                if !weights.is_empty() {
                    if weights.len() != atoms.len() {
                        return Err(Error::InvalidArgument(format!(
                            "{} atoms but {} weights",
                            atoms.len(),
                            weights.len()
                        )));
                    }
                    if weights.iter().any(Signed::is_negative) {
                        return Err(Error::InvalidArgument("negative weight".into()));
                    }
                    let total: Rational = weights.iter().sum();
                    if !total.is_one() {
                        return Err(Error::InvalidArgument(format!(
                            "weights sum to {}, not 1",
                            format_rational(&total)
                        )));
                    }
                }
                let canon: Vec<_> = atoms.iter().map(PointGen::canonical).collect();
                for i in 0..canon.len() {
                    if canon[i + 1..].contains(&canon[i]) {
                        return Err(Error::InvalidArgument(format!("atom {} listed twice", atoms[i])));
                    }
                }
                Ok(())
            }
            Distribution::ProductBernoulli { p, precision } => {
                if p.is_negative() || *p > Rational::one() {
                    return Err(Error::InvalidArgument(format!("bias {} outside [0,1]", format_rational(p))));
                }
                if *precision == 0 {
                    return Err(Error::InvalidArgument("precision must be at least 1".into()));
                }
                Ok(())
            }
        }
    }

    /// Atoms with their weights, for finite support.
    pub fn atoms(&self) -> Option<Vec<(&PointGen, Rational)>> {
        match self {
            Distribution::FiniteSupport { atoms, weights } => {
                let uniform = Rational::new(BigInt::one(), BigInt::from(atoms.len()));
                Some(
                    atoms
                        .iter()
                        .enumerate()
                        .map(|(i, a)| (a, weights.get(i).cloned().unwrap_or_else(|| uniform.clone())))
                        .collect(),
                )
            }
            Distribution::ProductBernoulli { .. } => None,
        }
    }

    /// A sampler with the cumulative table precomputed.
    pub fn sampler(&self) -> Sampler<'_> {
        match self {
            Distribution::FiniteSupport { atoms, .. } => {
                let weighted = self.atoms().expect("finite support");
                let denom = weighted.iter().fold(BigInt::one(), |l, (_, w)| l.lcm(w.denom()));
                let mut acc = BigInt::zero();
                let cumulative = weighted
                    .iter()
                    .map(|(_, w)| {
                        acc += w.numer() * (&denom / w.denom());
                        acc.clone()
                    })
                    .collect();
                Sampler::Atoms { atoms, cumulative, denom }
            }
            Distribution::ProductBernoulli { p, precision } => Sampler::Bits { p, precision: *precision },
        }
    }
}

pub enum Sampler<'a> {
    Atoms { atoms: &'a [PointGen], cumulative: Vec<BigInt>, denom: BigInt },
    Bits { p: &'a Rational, precision: usize },
}

impl Sampler<'_> {
    /// Index of the drawn atom for finite support.
    pub fn sample_index<R: Rng>(&self, rng: &mut R) -> Option<usize> {
        match self {
            Sampler::Atoms { cumulative, denom, .. } => {
                let u = rng.gen_bigint_range(&BigInt::zero(), denom);
                Some(cumulative.partition_point(|c| *c <= u))
            }
            Sampler::Bits { .. } => None,
        }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> PointGen {
        match self {
            Sampler::Atoms { atoms, .. } => atoms[self.sample_index(rng).expect("atoms")].clone(),
            Sampler::Bits { p, precision } => {
                let bits = (0..*precision).map(|_| bernoulli(rng, p)).collect();
                PointGen::zero_tail(BitWord::from_bits(bits))
            }
        }
    }
}

/// Exact Bernoulli(p) draw for rational `p`.
fn bernoulli<R: Rng>(rng: &mut R, p: &Rational) -> bool {
    rng.gen_bigint_range(&BigInt::zero(), p.denom()) < *p.numer()
}
