//! Shatter counts and VC-dimension witnesses over finite pools of points.
//!
//! Membership of every pool point in every concept of the class prefix is
//! decided once; subsets are then compared as bit masks.

use std::collections::BTreeSet;

use itertools::Itertools;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cantor::PointGen;
use crate::error::{Error, Result};
use crate::pi01::{ConceptClassEnum, PreparedPoint};

/// Candidate witness points, pairwise distinguished by their first
/// `precision` bits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessPool {
    pub points: Vec<PointGen>,
    pub precision: usize,
}

impl WitnessPool {
    pub fn new(points: Vec<PointGen>, precision: usize) -> Result<Self> {
        let pool = Self { points, precision };
        pool.validate()?;
        Ok(pool)
    }

    pub fn validate(&self) -> Result<()> {
        let prefixes: Vec<_> = self.points.iter().map(|p| p.prefix(self.precision)).collect();
        for (i, j) in (0..prefixes.len()).tuple_combinations() {
            if prefixes[i] == prefixes[j] {
                return Err(Error::InvalidArgument(format!(
                    "pool points {i} and {j} agree on their first {} bits",
                    self.precision
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Traces `S ∩ c` realized by the concepts `C(0) … C(prefix_len − 1)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShatterReport {
    /// Pool indices of `S`.
    pub subset: Vec<usize>,
    /// Each trace as the pool indices it contains, in increasing mask order.
    pub realized_traces: Vec<Vec<usize>>,
    pub count: usize,
    pub prefix_len: usize,
    pub budget: usize,
}

impl ShatterReport {
    pub fn is_shattered(&self) -> bool {
        self.count == 1usize << self.subset.len()
    }
}

/// Decided memberships `C(k) ∋ pool[i]`, or the error that prevented it.
struct Matrix {
    rows: Vec<Vec<Result<bool>>>,
}

impl Matrix {
    fn build(class: &ConceptClassEnum, prefix_len: usize, pool: &WitnessPool, budget: usize) -> Self {
        let prepared: Vec<PreparedPoint> = pool.points.iter().map(|p| PreparedPoint::new(p.clone(), budget)).collect();
        let rows =
            (0..prefix_len).into_par_iter().map(|k| prepared.iter().map(|p| class.member(k, p)).collect()).collect();
        Self { rows }
    }

    fn traces(&self, subset: &[usize]) -> Result<BTreeSet<u64>> {
        let mut out = BTreeSet::new();
        for row in &self.rows {
            let mut mask = 0u64;
            for (bit, &i) in subset.iter().enumerate() {
                if row[i].clone()? {
                    mask |= 1 << bit;
                }
            }
            out.insert(mask);
        }
        Ok(out)
    }

    fn report(&self, subset: &[usize], prefix_len: usize, budget: usize) -> Result<ShatterReport> {
        let traces = self.traces(subset)?;
        Ok(ShatterReport {
            subset: subset.to_vec(),
            count: traces.len(),
            realized_traces: traces
                .iter()
                .map(|m| subset.iter().enumerate().filter(|(b, _)| m >> b & 1 == 1).map(|(_, &i)| i).collect())
                .collect(),
            prefix_len,
            budget,
        })
    }
}

fn check_args(prefix_len: usize, pool: &WitnessPool, subset: &[usize], budget: usize) -> Result<()> {
    if prefix_len == 0 {
        return Err(Error::InvalidArgument("class prefix must hold at least one concept".into()));
    }
    if budget == 0 {
        return Err(Error::InvalidArgument("budget must be at least 1".into()));
    }
    if subset.len() > 63 {
        return Err(Error::InvalidArgument("subsets are limited to 63 points".into()));
    }
    if let Some(&i) = subset.iter().find(|&&i| i >= pool.len()) {
        return Err(Error::InvalidArgument(format!("pool index {i} out of range")));
    }
    if subset.iter().tuple_combinations().any(|(a, b)| a == b) {
        return Err(Error::InvalidArgument("subset lists a pool index twice".into()));
    }
    Ok(())
}

/// `Π_C(S)` over the class prefix, with memberships decided at `budget`.
pub fn shatter_count(
    class: &ConceptClassEnum,
    prefix_len: usize,
    pool: &WitnessPool,
    subset: &[usize],
    budget: usize,
) -> Result<ShatterReport> {
    check_args(prefix_len, pool, subset, budget)?;
    let sub =
        WitnessPool { points: subset.iter().map(|&i| pool.points[i].clone()).collect(), precision: pool.precision };
    let local: Vec<usize> = (0..subset.len()).collect();
    let mut report = Matrix::build(class, prefix_len, &sub, budget).report(&local, prefix_len, budget)?;
    report.subset = subset.to_vec();
    for t in &mut report.realized_traces {
        for i in t.iter_mut() {
            *i = subset[*i];
        }
    }
    Ok(report)
}

pub fn is_shattered(
    class: &ConceptClassEnum,
    prefix_len: usize,
    pool: &WitnessPool,
    subset: &[usize],
    budget: usize,
) -> Result<bool> {
    shatter_count(class, prefix_len, pool, subset, budget).map(|r| r.is_shattered())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum VcBound {
    /// First shattered `d`-subset in lexicographic order of pool indices.
    Found { witness: Vec<usize>, report: ShatterReport },
    /// No `d`-subset of the pool is shattered by the class prefix.
    NotFound { examined: usize },
}

impl VcBound {
    pub fn found(&self) -> bool {
        matches!(self, VcBound::Found { .. })
    }
}

/// Exhaustive search for a shattered `d`-subset of the pool.
pub fn vc_lower_bound(
    class: &ConceptClassEnum,
    prefix_len: usize,
    pool: &WitnessPool,
    d: usize,
    budget: usize,
) -> Result<VcBound> {
    check_args(prefix_len, pool, &[], budget)?;
    if d > pool.len() {
        return Err(Error::InvalidArgument(format!("d = {d} exceeds the pool size {}", pool.len())));
    }
    if d > 63 {
        return Err(Error::InvalidArgument("subsets are limited to 63 points".into()));
    }
    let matrix = Matrix::build(class, prefix_len, pool, budget);
    let full = 1usize << d;
    let subsets: Vec<Vec<usize>> = (0..pool.len()).combinations(d).collect();
    let hit =
        subsets.par_iter().map(|s| matrix.traces(s).map(|t| t.len() == full)).find_first(|r| !matches!(r, Ok(false)));
    match hit {
        None => Ok(VcBound::NotFound { examined: subsets.len() }),
        Some(Err(e)) => Err(e),
        Some(Ok(_)) => {
            let witness = subsets
                .into_iter()
                .find(|s| matches!(matrix.traces(s), Ok(t) if t.len() == full))
                .expect("witness found above");
            let report = matrix.report(&witness, prefix_len, budget)?;
            Ok(VcBound::Found { witness, report })
        }
    }
}

/// Level `n` of the infinite-VC predicate: some `n` pool points have every
/// trace `S ⊆ {1..n}` realized by a concept of the prefix.
pub fn infinite_vc_horizon_check(
    class: &ConceptClassEnum,
    n: usize,
    pool: &WitnessPool,
    prefix_len: usize,
    budget: usize,
) -> Result<bool> {
    if n == 0 {
        return Err(Error::InvalidArgument("level n must be at least 1".into()));
    }
    if n > pool.len() {
        return Ok(false);
    }
    vc_lower_bound(class, prefix_len, pool, n, budget).map(|b| b.found())
}
