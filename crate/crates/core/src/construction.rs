//! Finite-horizon simulation of the limit-lemma construction.
//!
//! Given a Π⁰₃ predicate `∃^∞x ∀y R(x, y, n)`, the construction emits
//! finite-path trees into a concept class whose VC dimension is infinite
//! exactly when the predicate holds. At stage `s`, every level `t ≤ s` with
//! `f_s(t) = 1` and no live treatment receives a fresh treatment `k`: a
//! block of `2^t` trees realizing every trace on the witnesses
//! `π_{t,k,1} … π_{t,k,t}`. When `f` later drops at `t`, the block's trees
//! are cut at that length and hold no paths.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::cantor::{BitWord, PointGen};
use crate::catalog::{ConceptCatalog, TreeSpec};
use crate::error::{Error, Result};
use crate::pi01::ConceptClassEnum;
use crate::vc::{self, WitnessPool};

/// Built-in decidable relations `R(x, y, n)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    True,
    False,
    /// `x` even.
    Even,
    /// `x ≤ c`.
    Threshold(u64),
    /// `y ≤ x`.
    YLeX,
}

impl Relation {
    pub fn eval(&self, x: u64, y: u64, _n: u64) -> bool {
        match *self {
            Relation::True => true,
            Relation::False => false,
            Relation::Even => x.is_multiple_of(2),
            Relation::Threshold(c) => x <= c,
            Relation::YLeX => y <= x,
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Relation::True => f.write_str("true"),
            Relation::False => f.write_str("false"),
            Relation::Even => f.write_str("even"),
            Relation::Threshold(c) => write!(f, "threshold({c})"),
            Relation::YLeX => f.write_str("y-le-x"),
        }
    }
}

impl FromStr for Relation {
    type Err = Error;

    /// Accepts the names above, optionally prefixed with `builtin:`.
    fn from_str(text: &str) -> Result<Self> {
        let s = text.trim();
        let s = s.strip_prefix("builtin:").unwrap_or(s);
        Ok(match s {
            "true" => Relation::True,
            "false" => Relation::False,
            "even" => Relation::Even,
            "y-le-x" => Relation::YLeX,
            _ => {
                let c = s
                    .strip_prefix("threshold(")
                    .and_then(|r| r.strip_suffix(')'))
                    .and_then(|c| c.trim().parse().ok())
                    .ok_or_else(|| {
                        Error::Parse(format!(
                            "unknown relation `{text}`; expected true, false, even, threshold(c) or y-le-x"
                        ))
                    })?;
                Relation::Threshold(c)
            }
        })
    }
}

impl Serialize for Relation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Relation {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// `∃^∞x ∀y R(x, y, n)` for a fixed parameter `n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PiThreePredicate {
    pub relation: Relation,
    pub n: u64,
}

impl PiThreePredicate {
    pub fn new(relation: Relation, n: u64) -> Self {
        Self { relation, n }
    }
}

/// `f_s(x) = [∀y < s R(x, y, n)]`, nonincreasing in `s`.
pub fn limit_approx(p: &PiThreePredicate, x: u64, s: u64) -> bool {
    (0..s).all(|y| p.relation.eval(x, y, p.n))
}

/// `P_t(S) = 1 + Σ_{i∈S} 2^{i−1}` from subsets of `{1..t}` onto `{1..2^t}`.
pub fn subset_bijection(t: usize, subset: &BTreeSet<usize>) -> Result<u64> {
    if t > 63 {
        return Err(Error::InvalidArgument("t is limited to 63".into()));
    }
    let mut v = 1u64;
    for &i in subset {
        if i == 0 || i > t {
            return Err(Error::InvalidArgument(format!("element {i} outside 1..={t}")));
        }
        v += 1 << (i - 1);
    }
    Ok(v)
}

/// `P_t⁻¹(v)` for `1 ≤ v ≤ 2^t`.
pub fn subset_bijection_inverse(t: usize, v: u64) -> Result<BTreeSet<usize>> {
    if t > 63 || v == 0 || (v - 1) >> t != 0 {
        return Err(Error::InvalidArgument(format!("{v} outside 1..=2^{t}")));
    }
    Ok((1..=t).filter(|i| (v - 1) >> (i - 1) & 1 == 1).collect())
}

fn push_gamma(bits: &mut Vec<bool>, v: u64) {
    let width = 64 - v.leading_zeros() as usize;
    bits.extend(std::iter::repeat_n(false, width - 1));
    bits.extend((0..width).rev().map(|i| v >> i & 1 == 1));
}

/// The witness `π_{t,k,j}`: `k` zeros, a one, the Elias gamma codes of
/// `t+1`, `k+1`, `j+1`, then zeros forever. Witnesses with second indices
/// `k`, `k′` agree below `min{k, k′}`.
pub fn witness(t: usize, k: usize, j: usize) -> PointGen {
    let mut bits = vec![false; k];
    bits.push(true);
    for v in [t, k, j] {
        push_gamma(&mut bits, v as u64 + 1);
    }
    PointGen::zero_tail(BitWord::from_bits(bits))
}

/// Recovers `(t, k, j)` from a witness, if `p` is one.
pub fn decode_witness(p: &PointGen) -> Option<(usize, usize, usize)> {
    let (prefix, period) = p.canonical();
    if period.bits() != [false] {
        return None;
    }
    let bits = prefix.bits();
    let at = |i: usize| bits.get(i).copied().unwrap_or(false);
    let k = bits.iter().position(|&b| b)?;
    let mut pos = k + 1;
    let mut vals = [0u64; 3];
    for v in &mut vals {
        let mut zeros = 0;
        while !at(pos) {
            zeros += 1;
            pos += 1;
            if zeros > 63 || pos > bits.len() {
                return None;
            }
        }
        let mut x = 0u64;
        for _ in 0..=zeros {
            x = x << 1 | u64::from(at(pos));
            pos += 1;
        }
        *v = x - 1;
    }
    if pos < bits.len() || vals[1] != k as u64 {
        return None;
    }
    Some((vals[0] as usize, k, vals[2] as usize))
}

/// Witnesses `π_{t,k,1} … π_{t,k,t}` of one treatment.
pub fn treatment_witnesses(t: usize, k: usize) -> Vec<PointGen> {
    (1..=t).map(|j| witness(t, k, j)).collect()
}

/// Length bound on the trees of a block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Truncation {
    /// `f_z(t) = 0` at this `z`; only segments shorter than `z` survive.
    At { z: usize },
    /// No drop found up to the search limit; the true `z` may lie beyond.
    UnboundedAtHorizon,
}

/// One treatment `(t, k)`: `2^t` consecutive slots starting at `first_slot`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub t: usize,
    pub k: usize,
    pub stage: usize,
    pub first_slot: usize,
    pub size: usize,
    pub truncation: Truncation,
}

impl Block {
    /// Slot `first_slot + i` holds the witnesses `j ∈ P_t⁻¹(i + 1)`.
    pub fn concepts(&self) -> Vec<TreeSpec> {
        let height = match self.truncation {
            Truncation::At { z } => Some(z),
            Truncation::UnboundedAtHorizon => None,
        };
        (0..self.size as u64)
            .map(|i| TreeSpec::FinitePaths {
                paths: subset_bijection_inverse(self.t, i + 1)
                    .expect("i < 2^t")
                    .into_iter()
                    .map(|j| witness(self.t, self.k, j))
                    .collect(),
                height,
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageLog {
    pub stage: usize,
    /// `(t, k, first_slot)` of every treatment started at this stage.
    pub treated: Vec<(usize, usize, usize)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstructionState {
    pub predicate: PiThreePredicate,
    pub stage: usize,
    pub horizon: usize,
    /// Last `z` examined when looking for the drop of `f` at a level.
    pub search_limit: usize,
    /// `G_{t,s}`: treatments already used at level `t`.
    pub used: BTreeMap<usize, BTreeSet<usize>>,
    /// `i_s`: least unfilled slot.
    pub next_slot: usize,
    pub blocks: Vec<Block>,
    pub log: Vec<StageLog>,
}

impl ConstructionState {
    pub fn new(predicate: PiThreePredicate, horizon: usize) -> Self {
        Self::with_search_limit(predicate, horizon, 2 * horizon + 2)
    }

    pub fn with_search_limit(predicate: PiThreePredicate, horizon: usize, search_limit: usize) -> Self {
        Self {
            predicate,
            stage: 0,
            horizon,
            search_limit,
            used: BTreeMap::new(),
            next_slot: 0,
            blocks: Vec::new(),
            log: Vec::new(),
        }
    }

    /// Whether level `t` has a treatment whose trees still grow at stage `s`.
    fn live_treatment(&self, t: usize, s: usize) -> bool {
        self.blocks.iter().any(|b| {
            b.t == t
                && match b.truncation {
                    Truncation::UnboundedAtHorizon => true,
                    Truncation::At { z } => z > s,
                }
        })
    }

    fn truncation(&self, t: usize, s: usize) -> Truncation {
        ((s + 1)..=self.search_limit.max(s + 1))
            .find(|&z| !limit_approx(&self.predicate, t as u64, z as u64))
            .map_or(Truncation::UnboundedAtHorizon, |z| Truncation::At { z })
    }
}

/// Runs stage `s = state.stage + 1`.
pub fn construction_step(state: &mut ConstructionState, s: usize) -> Result<()> {
    if s != state.stage + 1 || s > state.horizon {
        return Err(Error::HorizonExceeded { stage: s, horizon: state.horizon });
    }
    let mut treated = Vec::new();
    for t in 1..=s {
        if !limit_approx(&state.predicate, t as u64, s as u64) || state.live_treatment(t, s) {
            continue;
        }
        if t > 63 {
            return Err(Error::InvalidArgument("levels above 63 are not supported".into()));
        }
        let used = state.used.entry(t).or_default();
        let k = (0..).find(|k| !used.contains(k)).expect("finite set");
        used.insert(k);
        let block =
            Block { t, k, stage: s, first_slot: state.next_slot, size: 1 << t, truncation: state.truncation(t, s) };
        treated.push((t, k, block.first_slot));
        state.next_slot += block.size;
        state.blocks.push(block);
    }
    state.stage = s;
    state.log.push(StageLog { stage: s, treated });
    Ok(())
}

/// Completed run: the emitted blocks and the stage log.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstructionReport {
    pub predicate: PiThreePredicate,
    pub horizon: usize,
    pub search_limit: usize,
    pub slots: usize,
    pub blocks: Vec<Block>,
    pub log: Vec<StageLog>,
}

impl ConstructionReport {
    /// Tree descriptors of all slots, in slot order.
    pub fn concepts(&self) -> Vec<TreeSpec> {
        self.blocks.iter().flat_map(Block::concepts).collect()
    }

    pub fn catalog(&self) -> ConceptCatalog {
        ConceptCatalog::new(self.concepts())
    }

    pub fn class(&self) -> Result<ConceptClassEnum> {
        self.catalog().to_class()
    }

    /// Every witness placed into some tree, with its block.
    pub fn witnesses(&self) -> Vec<(usize, PointGen)> {
        self.blocks
            .iter()
            .enumerate()
            .flat_map(|(b, block)| treatment_witnesses(block.t, block.k).into_iter().map(move |w| (b, w)))
            .collect()
    }

    /// Latest treatment of level `t`.
    pub fn block_for(&self, t: usize) -> Option<&Block> {
        self.blocks.iter().rev().find(|b| b.t == t)
    }
}

/// Stages `1 ..= horizon`.
pub fn run_construction(p: PiThreePredicate, horizon: usize) -> Result<ConstructionReport> {
    run_with_state(ConstructionState::new(p, horizon))
}

pub fn run_with_state(mut state: ConstructionState) -> Result<ConstructionReport> {
    for s in 1..=state.horizon {
        construction_step(&mut state, s)?;
    }
    Ok(ConstructionReport {
        predicate: state.predicate,
        horizon: state.horizon,
        search_limit: state.search_limit,
        slots: state.next_slot,
        blocks: state.blocks,
        log: state.log,
    })
}

/// No tree mixes witnesses of two treatments, and no two blocks share a
/// treatment. Reads the witnesses back from the tree descriptors.
pub fn verify_disjoint_witnesses(concepts: &[TreeSpec]) -> bool {
    let mut owner: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut blocks = 0usize;
    let mut prev: Option<(usize, usize)> = None;
    for spec in concepts {
        let TreeSpec::FinitePaths { paths, .. } = spec else { return false };
        let mut tk: Option<(usize, usize)> = None;
        for p in paths {
            let Some((t, k, _)) = decode_witness(p) else { return false };
            match tk {
                Some(x) if x != (t, k) => return false,
                _ => tk = Some((t, k)),
            }
        }
        if let Some(key) = tk {
            // A treatment's trees are contiguous; a return to an earlier
            // treatment after another one began means shared witnesses.
            if prev != Some(key) {
                blocks += 1;
                if owner.insert(key, blocks).is_some() {
                    return false;
                }
            }
            prev = Some(key);
        }
    }
    true
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelProfile {
    pub t: usize,
    pub treated: bool,
    pub k: Option<usize>,
    /// Treated and not cut off within the search limit.
    pub stabilized: bool,
    pub truncation: Option<Truncation>,
    pub shattered: bool,
}

/// For each level `t ≤ horizon`, whether the latest block shatters its
/// witnesses `π_{t,k,1} … π_{t,k,t}`.
pub fn vc_growth_profile(
    report: &ConstructionReport,
    class: &ConceptClassEnum,
    budget: usize,
) -> Result<BTreeMap<usize, LevelProfile>> {
    let mut out = BTreeMap::new();
    for t in 1..=report.horizon {
        let Some(block) = report.block_for(t) else {
            out.insert(
                t,
                LevelProfile { t, treated: false, k: None, stabilized: false, truncation: None, shattered: false },
            );
            continue;
        };
        let points = treatment_witnesses(t, block.k);
        let precision = points.iter().map(|p| p.canonical().0.len()).max().unwrap_or(0) + 1;
        let pool = WitnessPool::new(points, precision)?;
        let sub = class.slice(block.first_slot..block.first_slot + block.size);
        let all: Vec<usize> = (0..t).collect();
        let shattered = vc::is_shattered(&sub, block.size, &pool, &all, budget)?;
        out.insert(
            t,
            LevelProfile {
                t,
                treated: true,
                k: Some(block.k),
                stabilized: block.truncation == Truncation::UnboundedAtHorizon,
                truncation: Some(block.truncation),
                shattered,
            },
        );
    }
    Ok(out)
}
