use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use effpac::cantor::{interleave_encode, BitSource, ExternalBits};
use effpac::concepts::{
    computable_replacement, rationalize_hyperplane, RationalizeOptions, RealCoeff, RealHyperplane, ReplacementKind,
};
use effpac::construction::{
    run_with_state, vc_growth_profile, verify_disjoint_witnesses, ConstructionReport, ConstructionState,
    PiThreePredicate, Relation,
};
use effpac::pac::{self, Distribution, PacParams, PacSetup, SampleSizeConstants};
use effpac::rational::{self, Rational};
use effpac::vc::{self, VcBound, WitnessPool};
use effpac::{BitWord, CantorBox, ConceptCatalog, ConceptClassEnum, Error, MembershipOracle, PointGen, PointVerdict};

use crate::report::{Outcome, Table};

pub const CACHE_ENV: &str = "EFFPAC_CACHE_DIR";

fn parse_rational(s: &str) -> Result<Rational, String> {
    rational::parse_rational(s).map_err(|e| e.to_string())
}

fn parse_sigma_stage(s: &str) -> Result<(BitWord, usize), String> {
    let (sigma, stage) = s.split_once(':').ok_or_else(|| format!("`{s}`: expected <bits>:<stage>"))?;
    let sigma: BitWord = sigma.parse().map_err(|e: Error| e.to_string())?;
    let stage = stage.parse().map_err(|_| format!("`{s}`: bad stage"))?;
    Ok((sigma, stage))
}

/// A coefficient as typed, kept for the config echo, with its parsed value.
#[derive(Clone, Debug)]
pub struct CoeffArg {
    text: String,
    value: RealCoeff,
}

impl std::str::FromStr for CoeffArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let value = s.parse().map_err(|e: Error| e.to_string())?;
        Ok(Self { text: s.trim().to_string(), value })
    }
}

impl Serialize for CoeffArg {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.text)
    }
}

mod serde_opt_rational {
    use effpac::rational::{format_rational, Rational};
    use serde::Serializer;

    pub fn serialize<S: Serializer>(r: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
        match r {
            Some(r) => s.serialize_some(&format_rational(r)),
            None => s.serialize_none(),
        }
    }
}

mod serde_nodes {
    use effpac::BitWord;
    use serde::Serializer;

    pub fn serialize<S: Serializer>(v: &[(BitWord, usize)], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|(w, st)| format!("{w}:{st}")))
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Node decisions of catalog trees, and bit encodings of points.
    Encode(EncodeArgs),
    /// Traces realized on one subset of a witness pool.
    Shatter(ShatterArgs),
    /// Search a pool for a shattered d-subset, or profile a construction.
    Vc(VcArgs),
    /// Repeated consistent-learner trials against a target concept.
    Pac(PacArgs),
    /// Check the ε-transversal property and its negations.
    Transversal(TransversalArgs),
    /// Replace a real half-space by a rational one of small error mass.
    Rationalize(RationalizeArgs),
    /// Run the limit-lemma construction up to a finite horizon.
    Construct(ConstructArgs),
    /// Find a finitely described point with the same memberships as a given one.
    Replace(ReplaceArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Encode(_) => "encode",
            Command::Shatter(_) => "shatter",
            Command::Vc(_) => "vc",
            Command::Pac(_) => "pac",
            Command::Transversal(_) => "transversal",
            Command::Rationalize(_) => "rationalize",
            Command::Construct(_) => "construct",
            Command::Replace(_) => "replace",
        }
    }

    pub fn config(&self) -> Result<Value> {
        Ok(match self {
            Command::Encode(a) => serde_json::to_value(a)?,
            Command::Shatter(a) => serde_json::to_value(a)?,
            Command::Vc(a) => serde_json::to_value(a)?,
            Command::Pac(a) => serde_json::to_value(a)?,
            Command::Transversal(a) => serde_json::to_value(a)?,
            Command::Rationalize(a) => serde_json::to_value(a)?,
            Command::Construct(a) => serde_json::to_value(a)?,
            Command::Replace(a) => serde_json::to_value(a)?,
        })
    }

    pub fn run(&self) -> Result<Outcome> {
        match self {
            Command::Encode(a) => a.run(),
            Command::Shatter(a) => a.run(),
            Command::Vc(a) => a.run(),
            Command::Pac(a) => a.run(),
            Command::Transversal(a) => a.run(),
            Command::Rationalize(a) => a.run(),
            Command::Construct(a) => a.run(),
            Command::Replace(a) => a.run(),
        }
    }
}

fn read_json<T: DeserializeOwned>(path: &Path, what: &str) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {what} {}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| Error::Schema(format!("{what} {}: {e}", path.display())).into())
}

fn load_class(path: &Path) -> Result<(ConceptCatalog, ConceptClassEnum)> {
    let cat = ConceptCatalog::load(path)?;
    let class = cat.to_class()?;
    Ok((cat, class))
}

fn load_pool(path: &Path) -> Result<WitnessPool> {
    let pool: WitnessPool = read_json(path, "pool")?;
    pool.validate().map_err(|e| Error::Schema(format!("pool {}: {e}", path.display())))?;
    Ok(pool)
}

fn load_dist(path: &Path) -> Result<Distribution> {
    let d: Distribution = read_json(path, "distribution")?;
    d.validate().map_err(|e| Error::Schema(format!("distribution {}: {e}", path.display())))?;
    Ok(d)
}

fn prefix_len(requested: Option<usize>, class: &ConceptClassEnum) -> Result<usize> {
    match requested {
        None => Ok(class.len()),
        Some(p) if p <= class.len() => Ok(p),
        Some(p) => bail!(Error::InvalidArgument(format!("prefix {p} exceeds the catalog size {}", class.len()))),
    }
}

fn oracles(class: &ConceptClassEnum, concepts: &[usize]) -> Result<Vec<MembershipOracle>> {
    concepts
        .iter()
        .map(|&k| {
            if k >= class.len() {
                bail!(Error::InvalidArgument(format!("concept {k} outside a catalog of {}", class.len())));
            }
            class.oracle(k).ok_or_else(|| Error::NotEffective(k).into())
        })
        .collect()
}

fn verdict_name(v: PointVerdict) -> &'static str {
    match v {
        PointVerdict::In => "in",
        PointVerdict::Out => "out",
        PointVerdict::BoundaryUnresolved => "boundary_unresolved",
    }
}

fn join<T: ToString>(v: &[T], sep: &str) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(sep)
}

const MAX_ENCODE_DEPTH: usize = 16;

#[derive(Args, Debug, Serialize)]
pub struct EncodeArgs {
    /// Concept catalog (JSON).
    #[arg(long, alias = "catalog")]
    pub class: Option<PathBuf>,
    /// Node and stage as `<bits>:<stage>`, e.g. `0110:4`. Repeatable.
    #[arg(long = "node", value_parser = parse_sigma_stage)]
    #[serde(rename = "node", with = "serde_nodes")]
    pub nodes: Vec<(BitWord, usize)>,
    /// Every node of this length, at stage equal to the length.
    #[arg(long)]
    pub depth: Option<usize>,
    /// Real coordinates (comma-separated) to encode inside the catalog box.
    #[arg(long, value_delimiter = ',', value_parser = parse_rational)]
    #[serde(with = "rational::serde_str_vec")]
    pub coords: Vec<Rational>,
    /// Point in canonical text form, e.g. `rat2:1/2,1/4`. Repeatable.
    #[arg(long)]
    pub point: Vec<PointGen>,
    /// Number of bits printed per encoded point.
    #[arg(long, default_value_t = 16)]
    pub bits: usize,
}

impl EncodeArgs {
    fn run(&self) -> Result<Outcome> {
        let mut table = Table::new(&["kind", "concept", "input", "stage", "value"]);
        let loaded = self.class.as_deref().map(load_class).transpose()?;
        let bbox = loaded.as_ref().map_or_else(CantorBox::unit, |(c, _)| c.bbox.clone());

        let mut points: Vec<PointGen> = self.point.clone();
        if !self.coords.is_empty() {
            points.push(interleave_encode(&self.coords, &bbox)?);
        }
        let mut encodings = Vec::new();
        for p in &points {
            let bits = p.prefix(self.bits).to_string();
            table.push(vec!["encoding".into(), String::new(), p.to_string(), String::new(), bits.clone()]);
            encodings.push(json!({"point": p.to_string(), "bits": bits}));
        }

        let mut nodes = self.nodes.clone();
        if let Some(n) = self.depth {
            if n > MAX_ENCODE_DEPTH {
                bail!(Error::InvalidArgument(format!("depth {n} exceeds {MAX_ENCODE_DEPTH}")));
            }
            nodes.extend(BitWord::all_of_length(n).map(|w| (w, n)));
        }
        let mut decisions = Vec::new();
        if !nodes.is_empty() {
            let Some((_, class)) = &loaded else {
                bail!(Error::InvalidArgument("node decisions need --class".into()));
            };
            for k in 0..class.len() {
                let tree = class.enumerate(k);
                for (sigma, stage) in &nodes {
                    let status = if tree.excluded(sigma, *stage) { "excluded" } else { "included" };
                    table.push(vec![
                        "decision".into(),
                        k.to_string(),
                        sigma.to_string(),
                        stage.to_string(),
                        status.into(),
                    ]);
                    decisions.push(json!({"concept": k, "sigma": sigma.to_string(), "stage": stage, "status": status}));
                }
            }
        }
        Ok(Outcome { result: json!({"encodings": encodings, "decisions": decisions}), table })
    }
}

#[derive(Args, Debug, Serialize)]
pub struct ShatterArgs {
    #[arg(long, alias = "catalog")]
    pub class: PathBuf,
    /// Witness pool (JSON `{"points": [...], "precision": n}`).
    #[arg(long)]
    pub pool: PathBuf,
    /// Pool indices, comma-separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub subset: Vec<usize>,
    /// Number of concepts used; defaults to the whole catalog.
    #[arg(long)]
    pub prefix: Option<usize>,
    /// Precision for membership decisions.
    #[arg(long, default_value_t = 32)]
    pub budget: usize,
}

impl ShatterArgs {
    fn run(&self) -> Result<Outcome> {
        let (_, class) = load_class(&self.class)?;
        let pool = load_pool(&self.pool)?;
        let prefix = prefix_len(self.prefix, &class)?;
        let report = vc::shatter_count(&class, prefix, &pool, &self.subset, self.budget)?;
        let mut table = Table::new(&["trace"]);
        for t in &report.realized_traces {
            table.push(vec![join(t, " ")]);
        }
        let mut result = serde_json::to_value(&report)?;
        result["shattered"] = json!(report.is_shattered());
        Ok(Outcome { result, table })
    }
}

#[derive(Args, Debug, Serialize)]
pub struct VcArgs {
    /// Concept catalog; with --construction it defaults to the construction's class.
    #[arg(long, alias = "catalog")]
    pub class: Option<PathBuf>,
    #[arg(long, conflicts_with = "construction")]
    pub pool: Option<PathBuf>,
    /// Output of `construct` (run report or bare construction report);
    /// switches to the per-level growth profile.
    #[arg(long)]
    pub construction: Option<PathBuf>,
    /// Size of the subsets searched.
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub prefix: Option<usize>,
    #[arg(long, default_value_t = 32)]
    pub budget: usize,
    /// Accepted for shared configs; unused by this command.
    #[arg(long, value_parser = parse_rational)]
    #[serde(with = "serde_opt_rational", skip_serializing_if = "Option::is_none")]
    pub eps: Option<Rational>,
}

impl VcArgs {
    fn run(&self) -> Result<Outcome> {
        if let Some(path) = &self.construction {
            return self.profile(path);
        }
        let (Some(class_path), Some(pool_path), Some(d)) = (&self.class, &self.pool, self.d) else {
            bail!(Error::InvalidArgument("vc needs --class, --pool and --d (or --construction)".into()));
        };
        let (_, class) = load_class(class_path)?;
        let pool = load_pool(pool_path)?;
        let prefix = prefix_len(self.prefix, &class)?;
        let bound = vc::vc_lower_bound(&class, prefix, &pool, d, self.budget)?;
        let (witness, count) = match &bound {
            VcBound::Found { witness, report } => (Some(witness.clone()), Some(report.count)),
            VcBound::NotFound { .. } => (None, None),
        };
        let mut table = Table::new(&["d", "found", "witness", "shatter_count"]);
        table.push(vec![
            d.to_string(),
            bound.found().to_string(),
            witness.as_deref().map(|w| join(w, " ")).unwrap_or_default(),
            count.map(|c| c.to_string()).unwrap_or_default(),
        ]);
        let result = json!({
            "d": d,
            "found": bound.found(),
            "witness": witness,
            "shatter_counts": {"realized": count, "required": 1u128 << d.min(127)},
            "bound": bound,
        });
        Ok(Outcome { result, table })
    }

    fn profile(&self, path: &Path) -> Result<Outcome> {
        let value: Value = read_json(path, "construction report")?;
        // Either a bare report or the run report written by `construct`.
        let inner = match value.pointer("/result/report") {
            Some(r) => r.clone(),
            None => value,
        };
        let report: ConstructionReport = serde_json::from_value(inner)
            .map_err(|e| Error::Schema(format!("construction report {}: {e}", path.display())))?;
        let class = match &self.class {
            Some(p) => load_class(p)?.1,
            None => report.class()?,
        };
        if class.len() < report.slots {
            bail!(Error::Schema(format!(
                "catalog has {} concepts but the construction emitted {}",
                class.len(),
                report.slots
            )));
        }
        let profile = vc_growth_profile(&report, &class, self.budget)?;
        let mut table = Table::new(&["t", "treated", "k", "stabilized", "shattered"]);
        for p in profile.values() {
            table.push(vec![
                p.t.to_string(),
                p.treated.to_string(),
                p.k.map(|k| k.to_string()).unwrap_or_default(),
                p.stabilized.to_string(),
                p.shattered.to_string(),
            ]);
        }
        let levels: Vec<_> = profile.into_values().collect();
        let max_shattered = levels.iter().filter(|p| p.shattered).map(|p| p.t).max();
        Ok(Outcome { result: json!({"profile": levels, "max_shattered_level": max_shattered}), table })
    }
}

#[derive(Args, Debug, Serialize)]
pub struct PacArgs {
    #[arg(long, alias = "catalog")]
    pub class: PathBuf,
    /// Index of the target concept.
    #[arg(long)]
    pub target: usize,
    /// Distribution (JSON).
    #[arg(long)]
    pub dist: PathBuf,
    #[arg(long, value_parser = parse_rational)]
    #[serde(with = "rational::serde_str")]
    pub eps: Rational,
    #[arg(long, value_parser = parse_rational)]
    #[serde(with = "rational::serde_str")]
    pub delta: Rational,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long)]
    pub seed: u64,
    /// VC dimension used for sample sizing. Without it, the largest
    /// dimension shattered on the support of a finite distribution is used.
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub prefix: Option<usize>,
    #[arg(long, default_value_t = 32)]
    pub precision: usize,
    /// Monte Carlo samples for error mass under non-atomic distributions.
    #[arg(long, default_value_t = 10_000)]
    pub mc_samples: usize,
}

/// Largest `d` for which some `d` atoms of the support are shattered.
fn certified_dimension(class: &ConceptClassEnum, prefix: usize, dist: &Distribution, budget: usize) -> Result<usize> {
    let atoms: Vec<PointGen> = dist
        .atoms()
        .ok_or_else(|| Error::InvalidArgument("--d is required for distributions without finite support".into()))?
        .into_iter()
        .filter(|(_, w)| *w > Rational::from_integer(0.into()))
        .map(|(p, _)| p.clone())
        .collect();
    let precision = (1..=4096)
        .find(|&n| WitnessPool::new(atoms.clone(), n).is_ok())
        .ok_or_else(|| Error::InvalidArgument("support atoms are not separated within 4096 bits".into()))?;
    let pool = WitnessPool::new(atoms, precision)?;
    let mut d = 0;
    while d < pool.len().min(63) && vc::vc_lower_bound(class, prefix, &pool, d + 1, budget)?.found() {
        d += 1;
    }
    Ok(d)
}

impl PacArgs {
    fn run(&self) -> Result<Outcome> {
        let (_, class) = load_class(&self.class)?;
        let dist = load_dist(&self.dist)?;
        let prefix = prefix_len(self.prefix, &class)?;
        let params = PacParams::new(self.eps.clone(), self.delta.clone())?;
        let (d, d_source) = match self.d {
            Some(d) => (d, "flag"),
            None => (certified_dimension(&class, prefix, &dist, self.precision)?, "certified_on_support"),
        };
        let setup = PacSetup {
            class: &class,
            prefix_len: prefix,
            target: self.target,
            dist: &dist,
            params,
            d,
            precision: self.precision,
            mc_samples: self.mc_samples,
            constants: SampleSizeConstants::default(),
        };
        let report = pac::pac_experiment(&setup, self.trials, self.seed)?;
        let mut table = Table::new(&["trial", "seed", "hypothesis", "error", "success", "aborted"]);
        for t in &report.trials {
            table.push(vec![
                t.trial.to_string(),
                t.seed.to_string(),
                t.hypothesis.map(|h| h.to_string()).unwrap_or_default(),
                t.error.as_ref().map(|e| e.value().to_string()).unwrap_or_default(),
                t.success.to_string(),
                t.aborted.to_string(),
            ]);
        }
        let mut result = serde_json::to_value(&report)?;
        result["d_source"] = json!(d_source);
        result["sample_size_constants"] = serde_json::to_value(SampleSizeConstants::default())?;
        Ok(Outcome { result, table })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TransversalMode {
    /// The points of --point meet every heavy concept.
    Transversal,
    /// The distinct points of --point fail to be a transversal.
    Q,
    /// Some heavy concept misses --point yet holds half the expected share of --y.
    J,
}

#[derive(Args, Debug, Serialize)]
pub struct TransversalArgs {
    #[arg(long, alias = "catalog")]
    pub class: PathBuf,
    #[arg(long)]
    pub dist: PathBuf,
    #[arg(long, value_parser = parse_rational)]
    #[serde(with = "rational::serde_str")]
    pub eps: Rational,
    /// Candidate transversal points. Repeatable.
    #[arg(long)]
    pub point: Vec<PointGen>,
    /// Second tuple for `--mode j`. Repeatable.
    #[arg(long)]
    pub y: Vec<PointGen>,
    /// Concepts checked, comma-separated; defaults to the whole catalog.
    #[arg(long, value_delimiter = ',')]
    pub concepts: Vec<usize>,
    #[arg(long, value_enum, default_value_t = TransversalMode::Transversal)]
    pub mode: TransversalMode,
    #[arg(long, default_value_t = 32)]
    pub precision: usize,
}

impl TransversalArgs {
    fn run(&self) -> Result<Outcome> {
        let (_, class) = load_class(&self.class)?;
        let dist = load_dist(&self.dist)?;
        let concepts: Vec<usize> =
            if self.concepts.is_empty() { (0..class.len()).collect() } else { self.concepts.clone() };
        if let Some(&k) = concepts.iter().find(|&&k| k >= class.len()) {
            bail!(Error::InvalidArgument(format!("concept {k} outside a catalog of {}", class.len())));
        }
        let holds = match self.mode {
            TransversalMode::Transversal => {
                pac::transversal_check(&self.point, &class, &concepts, &dist, &self.eps, self.precision)?
            }
            TransversalMode::Q => pac::q_membership(&self.point, &class, &concepts, &dist, &self.eps, self.precision)?,
            TransversalMode::J => {
                pac::j_membership(&self.point, &self.y, &class, &concepts, &dist, &self.eps, self.precision)?
            }
        };
        let mut table = Table::new(&["mode", "holds"]);
        table.push(vec![format!("{:?}", self.mode).to_lowercase(), holds.to_string()]);
        Ok(Outcome { result: json!({"mode": self.mode, "holds": holds}), table })
    }
}

#[derive(Args, Debug, Serialize)]
pub struct RationalizeArgs {
    /// Coefficients of `a·x ≤ b`, comma-separated (`1/2`, `pi/4`, `3*sqrt(2)`, `0.25`).
    #[arg(long, value_delimiter = ',', required = true)]
    pub a: Vec<CoeffArg>,
    #[arg(long)]
    pub b: CoeffArg,
    /// Bound on the mass of the symmetric difference, in (0, 1].
    #[arg(long, value_parser = parse_rational)]
    #[serde(with = "rational::serde_str")]
    pub eps: Rational,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 48)]
    pub max_bits: usize,
    /// Distribution (JSON); defaults to the uniform measure on the box.
    #[arg(long)]
    pub dist: Option<PathBuf>,
    #[arg(long, value_parser = parse_rational)]
    #[serde(with = "serde_opt_rational", skip_serializing_if = "Option::is_none")]
    pub lo: Option<Rational>,
    #[arg(long, value_parser = parse_rational)]
    #[serde(with = "serde_opt_rational", skip_serializing_if = "Option::is_none")]
    pub hi: Option<Rational>,
}

impl RationalizeArgs {
    fn run(&self) -> Result<Outcome> {
        let f = RealHyperplane::new(self.a.iter().map(|c| c.value.clone()).collect(), self.b.value.clone())?;
        let bbox = CantorBox::new(
            self.lo.clone().unwrap_or_else(|| rational::int(0)),
            self.hi.clone().unwrap_or_else(|| rational::int(1)),
        )?;
        let mu = match &self.dist {
            Some(p) => load_dist(p)?,
            None => Distribution::product_bernoulli(rational::ratio(1, 2), 53 * f.d())?,
        };
        let opts = RationalizeOptions { samples: self.samples, seed: self.seed, max_bits: self.max_bits };
        let r = rationalize_hyperplane(&f, &mu, &bbox, &self.eps, &opts)?;
        let mut table = Table::new(&["a", "b", "denominator_bits", "mass_estimate", "upper_bound", "samples"]);
        table.push(vec![
            r.halfspace.a.iter().map(rational::format_rational).collect::<Vec<_>>().join(" "),
            rational::format_rational(&r.halfspace.b),
            r.denominator_bits.map(|b| b.to_string()).unwrap_or_default(),
            r.mass_estimate.to_string(),
            r.upper_bound.to_string(),
            r.samples.to_string(),
        ]);
        Ok(Outcome { result: serde_json::to_value(&r)?, table })
    }
}

#[derive(Args, Debug, Serialize)]
pub struct ConstructArgs {
    /// Built-in relation: true, false, even, threshold(c), y-le-x (optionally `builtin:`-prefixed).
    #[arg(long = "R", alias = "relation")]
    #[serde(rename = "R")]
    pub relation: Relation,
    /// Parameter `n` of the predicate.
    #[arg(long, default_value_t = 0)]
    pub n: u64,
    /// Last stage simulated.
    #[arg(long)]
    pub horizon: usize,
    /// Last stage searched for a truncation point; defaults to 2·horizon + 2.
    #[arg(long)]
    pub search_limit: Option<usize>,
    /// Also write the emitted class as a concept catalog.
    #[arg(long)]
    pub catalog_out: Option<PathBuf>,
    /// Also write every emitted witness as a pool.
    #[arg(long)]
    pub pool_out: Option<PathBuf>,
    /// Precision for the shattering profile.
    #[arg(long, default_value_t = 32)]
    pub budget: usize,
    /// Skip the shattering profile.
    #[arg(long)]
    pub no_profile: bool,
}

fn cache_file(dir: &Path, a: &ConstructArgs) -> PathBuf {
    let limit = a.search_limit.map_or_else(|| "default".to_string(), |l| l.to_string());
    let rel: String = a.relation.to_string().chars().map(|c| if c.is_ascii_alphanumeric() { c } else { '_' }).collect();
    dir.join(format!("construct-{rel}-n{}-h{}-l{limit}.json", a.n, a.horizon))
}

impl ConstructArgs {
    fn build(&self) -> Result<ConstructionReport> {
        let predicate = PiThreePredicate::new(self.relation, self.n);
        let state = match self.search_limit {
            Some(l) => ConstructionState::with_search_limit(predicate, self.horizon, l),
            None => ConstructionState::new(predicate, self.horizon),
        };
        Ok(run_with_state(state)?)
    }

    /// Reuses a report from the cache directory when one is configured.
    fn report(&self) -> Result<ConstructionReport> {
        let Some(dir) = std::env::var_os(CACHE_ENV).map(PathBuf::from) else { return self.build() };
        let file = cache_file(&dir, self);
        if let Ok(text) = std::fs::read_to_string(&file) {
            if let Ok(r) = serde_json::from_str::<ConstructionReport>(&text) {
                return Ok(r);
            }
        }
        let r = self.build()?;
        std::fs::create_dir_all(&dir).with_context(|| format!("cannot create cache {}", dir.display()))?;
        std::fs::write(&file, serde_json::to_vec(&r)?).with_context(|| format!("cannot write {}", file.display()))?;
        Ok(r)
    }

    fn run(&self) -> Result<Outcome> {
        let report = self.report()?;
        let catalog = report.catalog();
        let disjoint = verify_disjoint_witnesses(&catalog.concepts);
        if let Some(p) = &self.catalog_out {
            std::fs::write(p, catalog.to_json() + "\n").with_context(|| format!("cannot write {}", p.display()))?;
        }
        if let Some(p) = &self.pool_out {
            let points: Vec<PointGen> = report.witnesses().into_iter().map(|(_, w)| w).collect();
            let precision = points.iter().map(|w| w.canonical().0.len()).max().unwrap_or(0) + 1;
            let pool = WitnessPool::new(points, precision)?;
            std::fs::write(p, serde_json::to_string_pretty(&pool)? + "\n")
                .with_context(|| format!("cannot write {}", p.display()))?;
        }
        let profile = if self.no_profile {
            None
        } else {
            let class = catalog.to_class()?;
            Some(vc_growth_profile(&report, &class, self.budget)?.into_values().collect::<Vec<_>>())
        };
        let mut table = Table::new(&["t", "k", "stage", "first_slot", "size", "truncation"]);
        for b in &report.blocks {
            table.push(vec![
                b.t.to_string(),
                b.k.to_string(),
                b.stage.to_string(),
                b.first_slot.to_string(),
                b.size.to_string(),
                serde_json::to_string(&b.truncation)?,
            ]);
        }
        let result = json!({
            "report": report,
            "disjoint_witnesses": disjoint,
            "profile": profile,
        });
        Ok(Outcome { result, table })
    }
}

#[derive(Args, Debug, Serialize)]
pub struct ReplaceArgs {
    #[arg(long, alias = "catalog")]
    pub class: PathBuf,
    /// Concepts to agree on, comma-separated; defaults to the whole catalog.
    #[arg(long, value_delimiter = ',')]
    pub concepts: Vec<usize>,
    /// Point with a finite description.
    #[arg(long, conflicts_with = "bits", required_unless_present = "bits")]
    pub point: Option<PointGen>,
    /// Raw bits of a point known only through this prefix.
    #[arg(long)]
    pub bits: Option<BitWord>,
    #[arg(long, default_value_t = 32)]
    pub precision: usize,
}

impl ReplaceArgs {
    fn run(&self) -> Result<Outcome> {
        let (_, class) = load_class(&self.class)?;
        let concepts: Vec<usize> =
            if self.concepts.is_empty() { (0..class.len()).collect() } else { self.concepts.clone() };
        let oracles = oracles(&class, &concepts)?;
        let external;
        let source: &dyn BitSource = match (&self.point, &self.bits) {
            (Some(p), _) => p,
            (None, Some(b)) => {
                external = ExternalBits(b.clone());
                &external
            }
            (None, None) => bail!(Error::InvalidArgument("replace needs --point or --bits".into())),
        };
        let r = computable_replacement(source, &oracles, self.precision)?;
        let mut table = Table::new(&["concept", "original", "replacement"]);
        let mut agreement = Vec::new();
        for (k, o) in concepts.iter().zip(&oracles) {
            let original = self.point.as_ref().map(|p| verdict_name(o.decide_point(p, self.precision)));
            let replaced = verdict_name(o.decide_point(&r.point, self.precision));
            table.push(vec![k.to_string(), original.unwrap_or_default().into(), replaced.into()]);
            agreement.push(json!({"concept": k, "original": original, "replacement": replaced}));
        }
        let resolved = matches!(r.kind, ReplacementKind::Resolved { .. });
        Ok(Outcome { result: json!({"replacement": r, "resolved": resolved, "verdicts": agreement}), table })
    }
}
