//! Replacing a hyperplane with arbitrary real coefficients by a rational one
//! whose half-space differs from the original on a set of small measure.
//!
//! Coefficients are rounded to multiples of `2^-k` for growing `k`, and each
//! candidate is checked by Monte Carlo on one shared seeded sample.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::RationalHalfspace;
use crate::cantor::CantorBox;
use crate::error::{Error, Result};
use crate::pac::Distribution;
use crate::rational::{self, format_rational, from_f64, to_f64, Rational};
use crate::seeds;

/// A real coefficient: exact when rational, otherwise a double approximation.
#[derive(Clone, Debug, PartialEq)]
pub enum RealCoeff {
    Exact(Rational),
    Approx(f64),
}

impl RealCoeff {
    pub fn to_f64(&self) -> f64 {
        match self {
            RealCoeff::Exact(r) => to_f64(r),
            RealCoeff::Approx(x) => *x,
        }
    }

    fn exact(&self) -> Option<&Rational> {
        match self {
            RealCoeff::Exact(r) => Some(r),
            RealCoeff::Approx(_) => None,
        }
    }
}

impl fmt::Display for RealCoeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RealCoeff::Exact(r) => f.write_str(&format_rational(r)),
            RealCoeff::Approx(x) => write!(f, "{x:?}"),
        }
    }
}

/// Parses a rational literal, a float literal, or a product/quotient of
/// numbers and the constants `pi`, `e`, `sqrt(q)`, e.g. `-pi/4`, `3*sqrt(2)`.
impl FromStr for RealCoeff {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if let Ok(r) = rational::parse_rational(&s) {
            return Ok(RealCoeff::Exact(r));
        }
        let bad = || Error::Parse(format!("malformed coefficient `{text}`"));
        let (negative, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s.strip_prefix('+').unwrap_or(&s)),
        };
        if body.is_empty() {
            return Err(bad());
        }
        let mut value = 1.0f64;
        let mut exact = Some(rational::int(1));
        let mut op = '*';
        let mut rest = body;
        loop {
            let end = rest.find(['*', '/']).unwrap_or(rest.len());
            let factor = &rest[..end];
            let (v, q) = match factor {
                "pi" => (std::f64::consts::PI, None),
                "e" => (std::f64::consts::E, None),
                _ if factor.starts_with("sqrt(") && factor.ends_with(')') => {
                    let inner = rational::parse_rational(&factor[5..factor.len() - 1]).map_err(|_| bad())?;
                    (to_f64(&inner).sqrt(), None)
                }
                _ => match rational::parse_rational(factor) {
                    Ok(r) => (to_f64(&r), Some(r)),
                    Err(_) => (factor.parse::<f64>().map_err(|_| bad())?, None),
                },
            };
            if op == '*' {
                value *= v;
            } else {
                value /= v;
            }
            exact = match (exact, q) {
                (Some(acc), Some(q)) if op == '*' => Some(acc * q),
                (Some(acc), Some(q)) if !num_traits::Zero::is_zero(&q) => Some(acc / q),
                _ => None,
            };
            if end == rest.len() {
                break;
            }
            op = rest.as_bytes()[end] as char;
            rest = &rest[end + 1..];
        }
        if !value.is_finite() {
            return Err(bad());
        }
        Ok(match exact {
            Some(r) => RealCoeff::Exact(if negative { -r } else { r }),
            None => RealCoeff::Approx(if negative { -value } else { value }),
        })
    }
}

impl Serialize for RealCoeff {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for RealCoeff {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// `{x : a·x ≤ b}` with real coefficients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealHyperplane {
    pub a: Vec<RealCoeff>,
    pub b: RealCoeff,
}

impl RealHyperplane {
    pub fn new(a: Vec<RealCoeff>, b: RealCoeff) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::InvalidArgument("hyperplane needs at least one coefficient".into()));
        }
        if a.iter().all(|c| c.to_f64() == 0.0) {
            return Err(Error::InvalidArgument("hyperplane coefficients are all zero".into()));
        }
        Ok(Self { a, b })
    }

    pub fn d(&self) -> usize {
        self.a.len()
    }

    fn as_rational(&self) -> Option<RationalHalfspace> {
        let a = self.a.iter().map(|c| c.exact().cloned()).collect::<Option<Vec<_>>>()?;
        RationalHalfspace::new(a, self.b.exact()?.clone()).ok()
    }

    /// Every coefficient rounded to the nearest multiple of `2^-bits`.
    fn rounded(&self, bits: usize) -> Result<RationalHalfspace> {
        let round = |c: &RealCoeff| -> Result<Rational> {
            let scale = (bits as i32).min(1000);
            let x = c.to_f64() * 2f64.powi(scale);
            Ok(from_f64(x.round())? * rational::dyadic(bits))
        };
        let a = self.a.iter().map(round).collect::<Result<Vec<_>>>()?;
        RationalHalfspace::new(a, round(&self.b)?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalizeOptions {
    pub samples: usize,
    pub seed: u64,
    /// Largest denominator exponent tried before giving up.
    pub max_bits: usize,
}

impl Default for RationalizeOptions {
    fn default() -> Self {
        Self { samples: 100_000, seed: 0, max_bits: 48 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rationalized {
    pub halfspace: RationalHalfspace,
    /// `k` with all coefficients in `2^-k ℤ`; `None` when the input was exact.
    pub denominator_bits: Option<usize>,
    /// Fraction of the sample falling in the symmetric difference.
    pub mass_estimate: f64,
    /// `estimate + 3σ + 3/N`, the quantity compared with ε.
    pub upper_bound: f64,
    pub samples: usize,
}

fn upper_bound(est: f64, n: usize) -> f64 {
    let n = n as f64;
    est + 3.0 * (est * (1.0 - est) / n).sqrt() + 3.0 / n
}

/// Sample points of `mu` decoded to box coordinates, in chunk order.
fn sample_coords(mu: &Distribution, d: usize, bbox: &CantorBox, opts: &RationalizeOptions) -> Vec<Vec<f64>> {
    let sampler = mu.sampler();
    let (lo, width) = (to_f64(&bbox.lo), to_f64(&bbox.width()));
    let bits_per_coord = 53;
    seeds::chunks(opts.samples)
        .into_par_iter()
        .flat_map_iter(|(chunk, len)| {
            let mut rng = seeds::rng(opts.seed, chunk);
            (0..len)
                .map(|_| {
                    let x = sampler.sample(&mut rng);
                    let prefix = x.prefix(d * bits_per_coord);
                    (0..d)
                        .map(|i| {
                            let u = (0..bits_per_coord)
                                .rev()
                                .fold(0.0, |acc, k| (acc + f64::from(u8::from(prefix.bits()[k * d + i]))) / 2.0);
                            lo + width * u
                        })
                        .collect()
                })
                .collect::<Vec<_>>()
        })
        .collect()
}

/// Finds a rational half-space whose symmetric difference with
/// `{a·x ≤ b}` has `mu`-mass below `eps`, certified by a Monte Carlo upper
/// bound. Errors with the best bound reached when `max_bits` is exhausted.
pub fn rationalize_hyperplane(
    f: &RealHyperplane,
    mu: &Distribution,
    bbox: &CantorBox,
    eps: &Rational,
    opts: &RationalizeOptions,
) -> Result<Rationalized> {
    if *eps <= rational::int(0) || *eps > rational::int(1) {
        return Err(Error::InvalidArgument(format!("eps = {} must lie in (0, 1]", format_rational(eps))));
    }
    mu.validate()?;
    if let Some(h) = f.as_rational() {
        return Ok(Rationalized {
            halfspace: h,
            denominator_bits: None,
            mass_estimate: 0.0,
            upper_bound: 0.0,
            samples: 0,
        });
    }
    if opts.samples == 0 {
        return Err(Error::InvalidArgument("sample count must be at least 1".into()));
    }
    let d = f.d();
    let points = sample_coords(mu, d, bbox, opts);
    let a: Vec<f64> = f.a.iter().map(RealCoeff::to_f64).collect();
    let b = f.b.to_f64();
    let side = |coef: &[f64], off: f64, x: &[f64]| coef.iter().zip(x).map(|(c, x)| c * x).sum::<f64>() <= off;
    let truth: Vec<bool> = points.par_iter().map(|x| side(&a, b, x)).collect();
    let eps = to_f64(eps);
    let mut best = f64::INFINITY;
    for bits in 1..=opts.max_bits {
        let Ok(h) = f.rounded(bits) else { continue };
        let ha: Vec<f64> = h.a.iter().map(to_f64).collect();
        let hb = to_f64(&h.b);
        let diff = points.par_iter().zip(&truth).filter(|(x, &t)| side(&ha, hb, x) != t).count();
        let est = diff as f64 / points.len() as f64;
        let ub = upper_bound(est, points.len());
        best = best.min(ub);
        if ub < eps || eps >= 1.0 {
            return Ok(Rationalized {
                halfspace: h,
                denominator_bits: Some(bits),
                mass_estimate: est,
                upper_bound: ub,
                samples: points.len(),
            });
        }
    }
    Err(Error::Approximation { achieved: best })
}
