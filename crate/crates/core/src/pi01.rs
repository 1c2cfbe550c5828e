//! Co-c.e. trees given by stagewise exclusion rules, and the effective
//! membership oracle `f_c(σ, r)` built on top of them.
//!
//! A tree never materializes its nodes. `excluded(σ, s)` answers whether
//! `σ` has been removed by stage `s`; at stage `s` a rule may inspect the
//! prefixes of `σ` of length at most `s`, which makes exclusion monotone in
//! the stage and closed under extension.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, OnceLock, RwLock};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::cantor::{BitWord, CantorBox, DyadicBall, PointGen};
use crate::catalog::{Effectivity, TreeSpec};
use crate::concepts::Formula;
use crate::error::{Error, Result};
use crate::rational::{self, Rational};

pub const DEFAULT_LOOKAHEAD: usize = 8;
const CACHE_LIMIT: usize = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeStatus {
    Included,
    Excluded,
}

/// Outcome of searching for an excluded prefix of a point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassVerdict {
    NotExcludedWithin(usize),
    ExcludedAt(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointVerdict {
    In,
    Out,
    BoundaryUnresolved,
}

/// Compiled form of a [`TreeSpec`].
#[derive(Debug)]
enum Rule {
    Full,
    Empty,
    Formula(Formula),
    Interval(crate::concepts::RationalInterval),
    Halfspace(crate::concepts::RationalHalfspace),
    Dgon(crate::concepts::DGon),
    Paths { paths: Vec<PointGen>, canonical: Vec<(BitWord, BitWord)>, height: Option<usize> },
}

/// A Π⁰₁ tree: its infinite paths are the members of the concept.
pub struct StageTree {
    spec: TreeSpec,
    bbox: CantorBox,
    rule: Rule,
    cache: RwLock<HashMap<BitWord, bool>>,
}

impl fmt::Debug for StageTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StageTree").field("spec", &self.spec).finish()
    }
}

impl StageTree {
    pub fn new(spec: TreeSpec, bbox: CantorBox) -> Result<Self> {
        spec.validate()?;
        let rule = match &spec {
            TreeSpec::Full => Rule::Full,
            TreeSpec::Empty => Rule::Empty,
            TreeSpec::Formula { formula } => Rule::Formula(formula.clone()),
            TreeSpec::Interval(i) => Rule::Interval(i.clone()),
            TreeSpec::Halfspace(h) => Rule::Halfspace(h.clone()),
            TreeSpec::Dgon(g) => Rule::Dgon(g.clone()),
            TreeSpec::FinitePaths { paths, height } => Rule::Paths {
                canonical: paths.iter().map(PointGen::canonical).collect(),
                paths: paths.clone(),
                height: *height,
            },
        };
        Ok(Self { spec, bbox, rule, cache: RwLock::new(HashMap::new()) })
    }

    /// Tree over the unit box.
    pub fn from_spec(spec: TreeSpec) -> Result<Self> {
        Self::new(spec, CantorBox::unit())
    }

    pub fn spec(&self) -> &TreeSpec {
        &self.spec
    }

    pub fn bbox(&self) -> &CantorBox {
        &self.bbox
    }

    /// Node-level exclusion test, monotone under extension.
    fn node_excluded(&self, node: &BitWord) -> bool {
        match &self.rule {
            Rule::Full => false,
            Rule::Empty => true,
            Rule::Formula(f) => !f.satisfiable_extending(node),
            Rule::Interval(i) => !i.cell_meets(node, &self.bbox),
            Rule::Halfspace(h) => !h.cell_meets(node, &self.bbox),
            Rule::Dgon(g) => g.some_component_excludes(node, &self.bbox),
            Rule::Paths { paths, height, .. } => {
                height.is_some_and(|h| node.len() >= h)
                    || !paths.iter().any(|p| node.bits().iter().enumerate().all(|(i, &b)| p.bit_at(i) == b))
            }
        }
    }

    fn node_excluded_cached(&self, node: &BitWord) -> bool {
        if let Some(&v) = self.cache.read().expect("cache lock").get(node) {
            return v;
        }
        let v = self.node_excluded(node);
        let mut cache = self.cache.write().expect("cache lock");
        if cache.len() >= CACHE_LIMIT {
            cache.clear();
        }
        cache.insert(node.clone(), v);
        v
    }

    /// Whether `sigma` is excluded by stage `stage`.
    pub fn excluded(&self, sigma: &BitWord, stage: usize) -> bool {
        self.node_excluded_cached(&sigma.truncated(stage))
    }

    pub fn node_status(&self, sigma: &BitWord, stage: usize) -> NodeStatus {
        if self.excluded(sigma, stage) {
            NodeStatus::Excluded
        } else {
            NodeStatus::Included
        }
    }

    /// Certified: no infinite path of the tree passes through `node`.
    ///
    /// Exact for every rule kind in the catalog.
    pub fn dead(&self, node: &BitWord) -> bool {
        match &self.rule {
            Rule::Dgon(g) => !g.cell_meets(node, &self.bbox),
            Rule::Paths { height: Some(_), .. } => true,
            _ => self.node_excluded_cached(node),
        }
    }

    /// Certified: every path through `node` belongs to the concept.
    pub fn cylinder_inside(&self, node: &BitWord) -> bool {
        match &self.rule {
            Rule::Full => true,
            Rule::Empty | Rule::Paths { .. } => false,
            Rule::Formula(f) => f.valid_extending(node),
            Rule::Interval(i) => i.cell_inside(node, &self.bbox),
            Rule::Halfspace(h) => h.cell_inside(node, &self.bbox),
            Rule::Dgon(g) => g.cell_inside(node, &self.bbox),
        }
    }

    /// Exact membership for concepts made of finitely many described paths.
    fn exact_member(&self, p: &PreparedPoint) -> Option<bool> {
        match &self.rule {
            Rule::Empty => Some(false),
            Rule::Full => Some(true),
            Rule::Paths { height: Some(_), .. } => Some(false),
            Rule::Paths { canonical, .. } => Some(canonical.iter().any(|c| c == p.canonical())),
            _ => None,
        }
    }

    /// Search for an excluded prefix of `p`, checking prefix `s` at stage `s`
    /// for `s = 0..=budget`.
    pub fn point_in_class(&self, p: &PointGen, budget: usize) -> ClassVerdict {
        let prefix = p.prefix(budget);
        (0..=budget)
            .find(|&s| self.excluded(&prefix.truncated(s), s))
            .map_or(ClassVerdict::NotExcludedWithin(budget), ClassVerdict::ExcludedAt)
    }

    /// Depth-first search for a node of length `depth` below `node` that is
    /// neither excluded at stage `depth` nor certified dead.
    fn has_live_descendant(&self, node: &mut BitWord, depth: usize) -> bool {
        if self.excluded(node, depth) || self.dead(node) {
            return false;
        }
        if node.len() >= depth {
            return true;
        }
        for b in [false, true] {
            node.push(b);
            let found = self.has_live_descendant(node, depth);
            node.pop();
            if found {
                return true;
            }
        }
        false
    }

    /// Paths described by this tree, when it is a finite-path tree.
    pub fn described_paths(&self) -> Option<(&[PointGen], Option<usize>)> {
        match &self.rule {
            Rule::Paths { paths, height, .. } => Some((paths, *height)),
            Rule::Empty => Some((&[], None)),
            _ => None,
        }
    }
}

/// A point with its prefix at a fixed precision and its canonical form
/// computed once.
#[derive(Debug)]
pub struct PreparedPoint {
    point: PointGen,
    prefix: BitWord,
    canonical: OnceLock<(BitWord, BitWord)>,
}

impl PreparedPoint {
    pub fn new(point: PointGen, precision: usize) -> Self {
        let prefix = point.prefix(precision);
        Self { point, prefix, canonical: OnceLock::new() }
    }

    pub fn point(&self) -> &PointGen {
        &self.point
    }

    pub fn precision(&self) -> usize {
        self.prefix.len()
    }

    fn canonical(&self) -> &(BitWord, BitWord) {
        self.canonical.get_or_init(|| self.point.canonical())
    }
}

/// The effective membership procedure `f_c(σ, r)` of one concept.
///
/// Returns 1 when `B_r(σ)` meets the concept and 0 when `B_{2r}(σ)` misses
/// it. In between, the answer is fixed deterministically: 1 iff some node
/// of length `⌈−lg r⌉ + lookahead` inside the ball survives to that stage.
#[derive(Clone, Debug)]
pub struct MembershipOracle {
    tree: Arc<StageTree>,
    lookahead: usize,
}

impl MembershipOracle {
    pub fn new(tree: Arc<StageTree>, lookahead: usize) -> Self {
        Self { tree, lookahead }
    }

    pub fn tree(&self) -> &Arc<StageTree> {
        &self.tree
    }

    pub fn decide(&self, sigma: &BitWord, r: &Rational) -> Result<bool> {
        let ball = DyadicBall::new(sigma.clone(), r.clone())?;
        let mut node = ball.cylinder();
        let depth = ball.cutoff() + self.lookahead;
        Ok(self.tree.has_live_descendant(&mut node, depth))
    }

    pub fn decide_prepared(&self, p: &PreparedPoint) -> PointVerdict {
        if let Some(member) = self.tree.exact_member(p) {
            return if member { PointVerdict::In } else { PointVerdict::Out };
        }
        let r = rational::dyadic(p.precision());
        if !self.decide(&p.prefix, &r).expect("dyadic radius is valid") {
            return PointVerdict::Out;
        }
        if self.tree.cylinder_inside(&p.prefix) {
            return PointVerdict::In;
        }
        PointVerdict::BoundaryUnresolved
    }

    pub fn decide_point(&self, p: &PointGen, precision: usize) -> PointVerdict {
        self.decide_prepared(&PreparedPoint::new(p.clone(), precision))
    }
}

/// `node_status(T, σ, s)`.
pub fn node_status(tree: &StageTree, sigma: &BitWord, stage: usize) -> NodeStatus {
    tree.node_status(sigma, stage)
}

/// `point_in_class(T, p, budget)`; `budget ≥ 1`.
pub fn point_in_class(tree: &StageTree, p: &PointGen, budget: usize) -> Result<ClassVerdict> {
    if budget == 0 {
        return Err(Error::InvalidArgument("budget must be at least 1".into()));
    }
    Ok(tree.point_in_class(p, budget))
}

/// `effective_membership(o, σ, r)` for `0 < r ≤ 1`, as 0 or 1.
pub fn effective_membership(o: &MembershipOracle, sigma: &BitWord, r: &Rational) -> Result<u8> {
    if r.is_zero() || *r > Rational::one() {
        return Err(Error::InvalidArgument("radius must lie in (0, 1]".into()));
    }
    o.decide(sigma, r).map(u8::from)
}

/// `decide_point(o, p, precision)`; sound `In`/`Out` verdicts, and a
/// definite verdict for every point farther than `2^{1-precision}` from the
/// boundary.
pub fn decide_point(o: &MembershipOracle, p: &PointGen, precision: usize) -> Result<PointVerdict> {
    if precision == 0 {
        return Err(Error::InvalidArgument("precision must be at least 1".into()));
    }
    Ok(o.decide_point(p, precision))
}

/// An effective (or weakly effective) concept class: `n ↦ C(n)`.
///
/// Total on the naturals; indices past the listed trees are empty concepts.
#[derive(Clone, Debug)]
pub struct ConceptClassEnum {
    trees: Vec<Arc<StageTree>>,
    effectivity: Effectivity,
    lookahead: usize,
    padding: Arc<StageTree>,
}

impl ConceptClassEnum {
    pub fn new(trees: Vec<Arc<StageTree>>, effectivity: Effectivity, lookahead: usize) -> Self {
        let padding = Arc::new(StageTree::from_spec(TreeSpec::Empty).expect("empty tree"));
        Self { trees, effectivity, lookahead, padding }
    }

    pub fn effective(trees: Vec<StageTree>) -> Self {
        Self::new(trees.into_iter().map(Arc::new).collect(), Effectivity::Effective, DEFAULT_LOOKAHEAD)
    }

    /// Number of explicitly listed concepts.
    pub fn len(&self) -> usize {
        self.trees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trees.is_empty()
    }

    pub fn effectivity(&self) -> Effectivity {
        self.effectivity
    }

    pub fn enumerate(&self, n: usize) -> &Arc<StageTree> {
        self.trees.get(n).unwrap_or(&self.padding)
    }

    /// The subclass `C(range.start) … C(range.end − 1)`, reindexed from 0.
    pub fn slice(&self, range: std::ops::Range<usize>) -> Self {
        let trees = range.map(|n| self.enumerate(n).clone()).collect();
        Self { trees, effectivity: self.effectivity, lookahead: self.lookahead, padding: self.padding.clone() }
    }

    pub fn oracle(&self, n: usize) -> Option<MembershipOracle> {
        match self.effectivity {
            Effectivity::Effective => Some(MembershipOracle::new(self.enumerate(n).clone(), self.lookahead)),
            Effectivity::Weak => None,
        }
    }

    /// Decided membership of a prepared point in `C(n)`.
    pub fn member(&self, n: usize, p: &PreparedPoint) -> Result<bool> {
        let oracle = self.oracle(n).ok_or(Error::NotEffective(n))?;
        match oracle.decide_prepared(p) {
            PointVerdict::In => Ok(true),
            PointVerdict::Out => Ok(false),
            PointVerdict::BoundaryUnresolved => {
                Err(Error::UndecidedMembership { point: p.point().to_string(), concept: n, precision: p.precision() })
            }
        }
    }
}
