use std::collections::{HashMap, HashSet};
use std::sync::RwLock;

use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{behw_sample_size_with, Distribution, PacParams, SampleSizeConstants};
use crate::cantor::PointGen;
use crate::error::{Error, Result};
use crate::pi01::{ConceptClassEnum, PreparedPoint};
use crate::rational::{self, to_f64, Rational};
use crate::seeds;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledPoint {
    pub x: PointGen,
    pub label: bool,
}

/// Points drawn from a distribution, labeled by a target concept.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledSample {
    pub target: usize,
    pub seed: u64,
    pub precision: usize,
    pub pairs: Vec<LabeledPoint>,
}

/// Memoized decided membership, keyed by concept index and point text.
pub(crate) struct Memo<'a> {
    class: &'a ConceptClassEnum,
    precision: usize,
    map: RwLock<HashMap<(usize, String), bool>>,
}

impl<'a> Memo<'a> {
    pub(crate) fn new(class: &'a ConceptClassEnum, precision: usize) -> Self {
        Self { class, precision, map: RwLock::new(HashMap::new()) }
    }

    pub(crate) fn member(&self, k: usize, x: &PointGen) -> Result<bool> {
        let key = (k, x.to_string());
        if let Some(&v) = self.map.read().expect("memo lock").get(&key) {
            return Ok(v);
        }
        let v = self.class.member(k, &PreparedPoint::new(x.clone(), self.precision))?;
        self.map.write().expect("memo lock").insert(key, v);
        Ok(v)
    }
}

fn check_precision(precision: usize) -> Result<()> {
    if precision == 0 {
        return Err(Error::InvalidArgument("precision must be at least 1".into()));
    }
    Ok(())
}

/// Draws `m` independent points from `d` and labels them by `C(target)`.
pub fn draw_sample(
    d: &Distribution,
    m: usize,
    class: &ConceptClassEnum,
    target: usize,
    seed: u64,
    precision: usize,
) -> Result<LabeledSample> {
    check_precision(precision)?;
    draw_with(d, m, &Memo::new(class, precision), target, seed)
}

fn draw_with(d: &Distribution, m: usize, memo: &Memo<'_>, target: usize, seed: u64) -> Result<LabeledSample> {
    if m == 0 {
        return Err(Error::InvalidArgument("sample size must be at least 1".into()));
    }
    d.validate()?;
    let sampler = d.sampler();
    let mut rng = seeds::rng(seed, 0);
    let mut pairs = Vec::with_capacity(m);
    for _ in 0..m {
        let x = sampler.sample(&mut rng);
        let label = memo.member(target, &x)?;
        pairs.push(LabeledPoint { x, label });
    }
    Ok(LabeledSample { target, seed, precision: memo.precision, pairs })
}

/// Least `k < prefix_len` whose concept agrees with every labeled point.
pub fn consistent_learner(
    sample: &LabeledSample,
    class: &ConceptClassEnum,
    prefix_len: usize,
    precision: usize,
) -> Result<usize> {
    check_precision(precision)?;
    learn_with(sample, &Memo::new(class, precision), prefix_len)
}

fn learn_with(sample: &LabeledSample, memo: &Memo<'_>, prefix_len: usize) -> Result<usize> {
    let mut distinct: Vec<(&PointGen, bool)> = Vec::new();
    let mut seen: HashMap<String, bool> = HashMap::new();
    for p in &sample.pairs {
        match seen.insert(p.x.to_string(), p.label) {
            Some(prev) if prev != p.label => return Err(Error::NoConsistentHypothesis { prefix_len }),
            Some(_) => {}
            None => distinct.push((&p.x, p.label)),
        }
    }
    for k in 0..prefix_len {
        let mut consistent = true;
        for (x, label) in &distinct {
            if memo.member(k, x)? != *label {
                consistent = false;
                break;
            }
        }
        if consistent {
            return Ok(k);
        }
    }
    Err(Error::NoConsistentHypothesis { prefix_len })
}

/// Probability of the symmetric difference of two concepts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorMass {
    Exact(#[serde(with = "rational::serde_str")] Rational),
    Estimate { value: f64, disagreements: usize, samples: usize },
}

impl ErrorMass {
    pub fn value(&self) -> f64 {
        match self {
            ErrorMass::Exact(r) => to_f64(r),
            ErrorMass::Estimate { value, .. } => *value,
        }
    }

    pub fn at_most(&self, eps: &Rational) -> bool {
        match self {
            ErrorMass::Exact(r) => r <= eps,
            ErrorMass::Estimate { value, .. } => *value <= to_f64(eps),
        }
    }
}

/// `P_D(C(h) △ C(c))`: exact for finite support, a seeded Monte Carlo
/// estimate over `mc_samples` draws otherwise.
pub fn error_mass(
    d: &Distribution,
    class: &ConceptClassEnum,
    h: usize,
    c: usize,
    precision: usize,
    mc_samples: usize,
    seed: u64,
) -> Result<ErrorMass> {
    check_precision(precision)?;
    mass_with(d, &Memo::new(class, precision), h, c, mc_samples, seed)
}

fn mass_with(d: &Distribution, memo: &Memo<'_>, h: usize, c: usize, mc_samples: usize, seed: u64) -> Result<ErrorMass> {
    d.validate()?;
    if let Some(atoms) = d.atoms() {
        let mut mass = Rational::zero();
        for (x, w) in atoms {
            if h == c || w.is_zero() {
                continue;
            }
            if memo.member(h, x)? != memo.member(c, x)? {
                mass += w;
            }
        }
        return Ok(ErrorMass::Exact(mass));
    }
    if mc_samples == 0 {
        return Err(Error::InvalidArgument("Monte Carlo sample count must be at least 1".into()));
    }
    let sampler = d.sampler();
    let counts: Vec<usize> = seeds::chunks(mc_samples)
        .into_par_iter()
        .map(|(chunk, len)| {
            let mut rng = seeds::rng(seed, chunk);
            let mut n = 0;
            for _ in 0..len {
                let x = sampler.sample(&mut rng);
                if h != c && memo.member(h, &x)? != memo.member(c, &x)? {
                    n += 1;
                }
            }
            Ok(n)
        })
        .collect::<Result<_>>()?;
    let disagreements: usize = counts.iter().sum();
    Ok(ErrorMass::Estimate { value: disagreements as f64 / mc_samples as f64, disagreements, samples: mc_samples })
}

/// Everything a learning experiment needs besides the trial count and seed.
#[derive(Clone, Debug)]
pub struct PacSetup<'a> {
    pub class: &'a ConceptClassEnum,
    pub prefix_len: usize,
    pub target: usize,
    pub dist: &'a Distribution,
    pub params: PacParams,
    /// VC dimension used to size samples (a certified lower bound in practice).
    pub d: usize,
    pub precision: usize,
    pub mc_samples: usize,
    pub constants: SampleSizeConstants,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub hypothesis: Option<usize>,
    pub error: Option<ErrorMass>,
    pub success: bool,
    /// A drawn point sat on a concept boundary at the working precision.
    pub aborted: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PacReport {
    pub m_used: usize,
    pub d: usize,
    pub trial_count: usize,
    pub successes: usize,
    pub aborted: usize,
    pub success_rate: f64,
    /// `1 − δ − 3·sqrt(δ(1−δ)/trials)`.
    pub acceptance_floor: f64,
    /// At least two distinct traces on the support; unknown for
    /// continuous distributions.
    pub nontrivial: Option<bool>,
    pub trials: Vec<TrialRecord>,
}

fn run_trial(s: &PacSetup<'_>, memo: &Memo<'_>, m: usize, trial: usize, seed: u64) -> Result<TrialRecord> {
    let tseed = seeds::derive(seed, trial as u64);
    let outcome = draw_with(s.dist, m, memo, s.target, tseed).and_then(|sample| {
        let h = learn_with(&sample, memo, s.prefix_len)?;
        let err = mass_with(s.dist, memo, h, s.target, s.mc_samples, seeds::derive(tseed, 1))?;
        Ok((h, err))
    });
    match outcome {
        Ok((h, err)) => Ok(TrialRecord {
            trial,
            seed: tseed,
            hypothesis: Some(h),
            success: err.at_most(&s.params.eps),
            error: Some(err),
            aborted: false,
        }),
        Err(Error::UndecidedMembership { .. }) => {
            Ok(TrialRecord { trial, seed: tseed, hypothesis: None, error: None, success: false, aborted: true })
        }
        Err(e) => Err(e),
    }
}

fn nontrivial(s: &PacSetup<'_>, memo: &Memo<'_>) -> Option<bool> {
    let atoms = s.dist.atoms()?;
    let mut traces = HashSet::new();
    for k in 0..s.prefix_len {
        let mut trace = Vec::with_capacity(atoms.len());
        for (x, w) in &atoms {
            if !w.is_zero() {
                trace.push(memo.member(k, x).ok()?);
            }
        }
        traces.insert(trace);
        if traces.len() >= 2 {
            return Some(true);
        }
    }
    Some(false)
}

/// Runs `trials` independent learning trials. Trial `i` uses the seed
/// derived from `(seed, i)`, so the report is independent of thread count.
pub fn pac_experiment(s: &PacSetup<'_>, trials: usize, seed: u64) -> Result<PacReport> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    if s.target >= s.prefix_len {
        return Err(Error::InvalidArgument(format!(
            "target {} lies outside the class prefix of length {}",
            s.target, s.prefix_len
        )));
    }
    check_precision(s.precision)?;
    let memo = Memo::new(s.class, s.precision);
    let m = behw_sample_size_with(&s.params, s.d, s.constants);
    let records: Vec<TrialRecord> =
        (0..trials).into_par_iter().map(|t| run_trial(s, &memo, m, t, seed)).collect::<Result<_>>()?;
    let successes = records.iter().filter(|r| r.success).count();
    let aborted = records.iter().filter(|r| r.aborted).count();
    let delta = to_f64(&s.params.delta);
    Ok(PacReport {
        m_used: m,
        d: s.d,
        trial_count: trials,
        successes,
        aborted,
        success_rate: successes as f64 / trials as f64,
        acceptance_floor: 1.0 - delta - 3.0 * (delta * (1.0 - delta) / trials as f64).sqrt(),
        nontrivial: nontrivial(s, &memo),
        trials: records,
    })
}
