//! Acceptance suite: one PASS/FAIL line per criterion, each under its time limit.
//!
//! Run with `cargo test -p effpac-cli --test acceptance` (add `--release` for
//! representative timings).

use std::collections::{BTreeSet, HashSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use effpac::cantor::ExternalBits;
use effpac::concepts::{
    computable_replacement, formula_tree, rationalize_hyperplane, Formula, RationalHalfspace, RationalInterval,
    RationalizeOptions, RealCoeff, RealHyperplane,
};
use effpac::construction::{
    decode_witness, run_construction, vc_growth_profile, verify_disjoint_witnesses, PiThreePredicate, Truncation,
};
use effpac::pac::{pac_experiment, Distribution, PacParams, PacSetup, SampleSizeConstants};
use effpac::rational::{format_rational, int, ratio, to_f64, Rational};
use effpac::vc::{shatter_count, vc_lower_bound, VcBound, WitnessPool};
use effpac::{BitSource, BitWord, CantorBox, ConceptClassEnum, PointGen, PointVerdict, StageTree, TreeSpec};

type Check = Result<String, String>;
type Criterion = (u32, &'static str, Duration, fn() -> Check);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if let false = $cond {
            return Err(format!($($msg)+));
        }
    };
}

fn class_of(specs: Vec<TreeSpec>) -> ConceptClassEnum {
    ConceptClassEnum::effective(specs.into_iter().map(|s| StageTree::from_spec(s).unwrap()).collect())
}

fn interval(lo: Rational, hi: Rational) -> TreeSpec {
    TreeSpec::Interval(RationalInterval::new(lo, hi).unwrap())
}

fn halfspace(a: Vec<Rational>, b: Rational) -> TreeSpec {
    TreeSpec::Halfspace(RationalHalfspace::new(a, b).unwrap())
}

/// Integer normal in `[-3, 3]^2`, not zero.
fn small_normal(rng: &mut ChaCha8Rng) -> Vec<Rational> {
    loop {
        let (a, b) = (rng.gen_range(-3..=3), rng.gen_range(-3..=3));
        if (a, b) != (0, 0) {
            return vec![int(a), int(b)];
        }
    }
}

fn pt(coords: Vec<Rational>) -> PointGen {
    PointGen::rational(coords).unwrap()
}

/// Exact membership straight from the rational descriptors.
fn exact_member(spec: &TreeSpec, x: &[Rational]) -> bool {
    match spec {
        TreeSpec::Interval(i) => i.lo <= x[0] && x[0] <= i.hi,
        TreeSpec::Halfspace(h) => {
            let v: Rational = h.a.iter().zip(x).map(|(a, x)| a * x).sum();
            v <= h.b
        }
        other => panic!("no exact oracle for {other:?}"),
    }
}

/// Distinct traces of `specs` on `points`, as bit masks.
fn brute_traces(specs: &[TreeSpec], points: &[Vec<Rational>]) -> HashSet<u64> {
    specs
        .iter()
        .map(|s| points.iter().enumerate().filter(|(_, x)| exact_member(s, x)).fold(0u64, |m, (i, _)| m | 1 << i))
        .collect()
}

fn brute_vc(specs: &[TreeSpec], pool: &[Vec<Rational>]) -> usize {
    let mut best = 0;
    for mask in 1u32..(1 << pool.len()) {
        let size = mask.count_ones() as usize;
        if size <= best {
            continue;
        }
        let sub: Vec<Vec<Rational>> = (0..pool.len()).filter(|i| mask >> i & 1 == 1).map(|i| pool[i].clone()).collect();
        if brute_traces(specs, &sub).len() == 1 << size {
            best = size;
        }
    }
    best
}

fn c1_halfplanes() -> Check {
    let dirs = [(1, 0), (0, 1), (1, 1), (1, -1), (-1, 0), (0, -1), (-1, -1), (-1, 1)];
    let mut specs = Vec::new();
    for (a1, a2) in dirs {
        for m in -10..10 {
            specs.push(halfspace(vec![int(a1), int(a2)], ratio(2 * m + 1, 20)));
        }
    }
    let grid: Vec<Vec<Rational>> =
        (0..5).flat_map(|i| (0..5).map(move |j| vec![ratio(2 * i + 1, 10), ratio(2 * j + 1, 10)])).collect();
    // a·x has numerator parity fixed over tenths while b is an odd number of twentieths.
    for s in &specs {
        let TreeSpec::Halfspace(h) = s else { unreachable!() };
        for x in &grid {
            let v: Rational = h.a.iter().zip(x).map(|(a, x)| a * x).sum();
            ensure!(v != h.b, "grid point on a line");
        }
    }
    let class = class_of(specs.clone());
    let pool = WitnessPool::new(grid.iter().map(|x| pt(x.clone())).collect(), 16).map_err(|e| e.to_string())?;
    let three = vc_lower_bound(&class, specs.len(), &pool, 3, 32).map_err(|e| e.to_string())?;
    let VcBound::Found { witness, .. } = &three else { return Err("no shattered 3-set".into()) };
    let four = vc_lower_bound(&class, specs.len(), &pool, 4, 32).map_err(|e| e.to_string())?;
    let VcBound::NotFound { examined } = four else { return Err("a 4-set was shattered".into()) };
    let w: Vec<Vec<Rational>> = witness.iter().map(|&i| grid[i].clone()).collect();
    ensure!(brute_traces(&specs, &w).len() == 8, "witness {witness:?} not shattered by the exact oracle");
    Ok(format!("{} half-planes, 3-set {witness:?} shattered, {examined} 4-sets certified", specs.len()))
}

fn interval_catalog() -> Vec<TreeSpec> {
    let mut specs = Vec::new();
    for a in 0..=16 {
        for b in a..=16 {
            specs.push(interval(ratio(a, 16), ratio(b, 16)));
        }
    }
    specs
}

fn c2_intervals() -> Check {
    let specs = interval_catalog();
    let class = class_of(specs.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let pools = 10;
    for _ in 0..pools {
        let mut odd: BTreeSet<i64> = BTreeSet::new();
        while odd.len() < 8 {
            odd.insert(2 * rng.gen_range(0..32) + 1);
        }
        let xs: Vec<Vec<Rational>> = odd.iter().map(|&n| vec![ratio(n, 64)]).collect();
        let pool = WitnessPool::new(xs.iter().map(|x| pt(x.clone())).collect(), 8).map_err(|e| e.to_string())?;
        let two = vc_lower_bound(&class, specs.len(), &pool, 2, 32).map_err(|e| e.to_string())?;
        let three = vc_lower_bound(&class, specs.len(), &pool, 3, 32).map_err(|e| e.to_string())?;
        ensure!(two.found(), "no shattered pair in {odd:?}");
        ensure!(!three.found(), "shattered triple in {odd:?}");
        ensure!(brute_vc(&specs, &xs) == 2, "brute-force dimension differs on {odd:?}");
    }
    Ok(format!("{pools} pools of 8 points, dimension 2 each, matches brute force"))
}

fn c3_shatter_equivalence() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for case in 0..100 {
        let n = rng.gen_range(1..=12usize);
        let prefix = rng.gen_range(1..=64usize);
        let two_d = rng.gen_bool(0.5);
        let specs: Vec<TreeSpec> = (0..prefix)
            .map(|_| {
                if two_d {
                    let a = small_normal(&mut rng);
                    halfspace(a, ratio(2 * rng.gen_range(-64..64) + 1, 64))
                } else {
                    let a = rng.gen_range(0..=16);
                    let b = rng.gen_range(a..=16);
                    interval(ratio(a, 16), ratio(b, 16))
                }
            })
            .collect();
        let mut seen = BTreeSet::new();
        let mut xs = Vec::new();
        while xs.len() < n {
            let x: Vec<Rational> = if two_d {
                vec![ratio(2 * rng.gen_range(0..16) + 1, 32), ratio(2 * rng.gen_range(0..16) + 1, 32)]
            } else {
                vec![ratio(2 * rng.gen_range(0..32) + 1, 64)]
            };
            if seen.insert(x.iter().map(format_rational).collect::<Vec<_>>()) {
                xs.push(x);
            }
        }
        let class = class_of(specs.clone());
        let pool = WitnessPool::new(xs.iter().map(|x| pt(x.clone())).collect(), 16).map_err(|e| e.to_string())?;
        let subset: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.6)).collect();
        let report = shatter_count(&class, prefix, &pool, &subset, 32).map_err(|e| e.to_string())?;
        let sub: Vec<Vec<Rational>> = subset.iter().map(|&i| xs[i].clone()).collect();
        let expected = brute_traces(&specs, &sub).len();
        ensure!(report.count == expected, "case {case}: shatter_count {} vs brute force {expected}", report.count);
    }
    Ok("100 instances agree".into())
}

fn random_formula(rng: &mut ChaCha8Rng, vars: usize, depth: usize) -> Formula {
    if depth == 0 || rng.gen_bool(0.25) {
        return if rng.gen_bool(0.1) {
            Formula::Const(rng.gen_bool(0.5))
        } else {
            Formula::var(rng.gen_range(0..vars))
        };
    }
    match rng.gen_range(0..3) {
        0 => Formula::not(random_formula(rng, vars, depth - 1)),
        1 => Formula::and(random_formula(rng, vars, depth - 1), random_formula(rng, vars, depth - 1)),
        _ => Formula::or(random_formula(rng, vars, depth - 1), random_formula(rng, vars, depth - 1)),
    }
}

fn truth(f: &Formula, row: &[bool]) -> bool {
    match f {
        Formula::Const(b) => *b,
        Formula::Var(i) => row[*i],
        Formula::Not(g) => !truth(g, row),
        Formula::And(a, b) => truth(a, row) & truth(b, row),
        Formula::Or(a, b) => truth(a, row) | truth(b, row),
    }
}

fn c4_formulas() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let corpus = 600;
    for i in 0..corpus {
        let vars = rng.gen_range(1..=4);
        let f = random_formula(&mut rng, vars, 5);
        let tree = formula_tree(f.clone());
        for sigma in BitWord::all_of_length(4) {
            let expected = truth(&f, sigma.bits());
            ensure!(tree.dead(&sigma) != expected, "formula {i}: path set differs at {sigma}");
            ensure!(tree.excluded(&sigma, 4) != expected, "formula {i}: stage-4 exclusion differs at {sigma}");
        }
    }
    Ok(format!("{corpus} formulas match their truth tables"))
}

fn c5_pac() -> Check {
    let specs = interval_catalog();
    let class = class_of(specs.clone());
    let atoms: Vec<PointGen> = (0..16).map(|i| pt(vec![ratio(2 * i + 1, 32)])).collect();
    let dist = Distribution::uniform(atoms).map_err(|e| e.to_string())?;
    let target = specs.iter().position(|s| *s == interval(ratio(3, 16), ratio(11, 16))).ok_or("target missing")?;
    let setup = PacSetup {
        class: &class,
        prefix_len: specs.len(),
        target,
        dist: &dist,
        params: PacParams::new(ratio(1, 5), ratio(1, 5)).map_err(|e| e.to_string())?,
        d: 2,
        precision: 32,
        mc_samples: 0,
        constants: SampleSizeConstants::default(),
    };
    let r = pac_experiment(&setup, 200, 5).map_err(|e| e.to_string())?;
    let floor = 1.0 - 0.2 - 3.0 * (0.2f64 * 0.8 / 200.0).sqrt();
    ensure!(r.aborted == 0, "{} trials aborted", r.aborted);
    ensure!(r.success_rate >= floor, "success rate {} below {floor:.3}", r.success_rate);
    Ok(format!("m = {}, success rate {:.3} (floor {floor:.3})", r.m_used, r.success_rate))
}

fn c6_rationalize() -> Check {
    let opts = RationalizeOptions { samples: 100_000, seed: 6, max_bits: 48 };
    let eps = ratio(1, 100);
    let f: RealHyperplane =
        RealHyperplane::new(vec![RealCoeff::Exact(int(1))], "pi/4".parse().map_err(|e| format!("{e}"))?)
            .map_err(|e| e.to_string())?;
    let mu1 = Distribution::product_bernoulli(ratio(1, 2), 53).map_err(|e| e.to_string())?;
    let r = rationalize_hyperplane(&f, &mu1, &CantorBox::unit(), &eps, &opts).map_err(|e| e.to_string())?;
    let h = &r.halfspace;
    ensure!(h.a == vec![int(1)], "slope changed");
    let gap = (to_f64(&h.b) - std::f64::consts::FRAC_PI_4).abs();
    ensure!(gap < 0.01, "1-d mass {gap}");

    let a = vec!["1".parse::<RealCoeff>().unwrap(), "sqrt(2)".parse().unwrap()];
    let f2 = RealHyperplane::new(a, "e/3".parse().unwrap()).map_err(|e| e.to_string())?;
    let mu2 = Distribution::product_bernoulli(ratio(1, 2), 106).map_err(|e| e.to_string())?;
    let r2 = rationalize_hyperplane(&f2, &mu2, &CantorBox::unit(), &eps, &opts).map_err(|e| e.to_string())?;
    // Independent estimate with a separate generator.
    let (a0, a1, b) = (1.0, 2f64.sqrt(), std::f64::consts::E / 3.0);
    let h2 = &r2.halfspace;
    let (q0, q1, qb) = (to_f64(&h2.a[0]), to_f64(&h2.a[1]), to_f64(&h2.b));
    let mut rng = ChaCha8Rng::seed_from_u64(60);
    let n = 100_000;
    let diff = (0..n)
        .filter(|_| {
            let (x, y): (f64, f64) = (rng.gen(), rng.gen());
            (a0 * x + a1 * y <= b) != (q0 * x + q1 * y <= qb)
        })
        .count();
    let est = diff as f64 / n as f64;
    let e = 0.01;
    let bound = e + 3.0 * (e * (1.0 - e) / n as f64).sqrt();
    ensure!(est < bound, "2-d estimate {est} ≥ {bound}");
    Ok(format!("1-d gap {gap:.2e}; 2-d estimate {est:.2e} < {bound:.4}"))
}

fn c7_dichotomy() -> Check {
    let mut notes = Vec::new();
    for h in [4usize, 8, 16] {
        let even = run_construction(PiThreePredicate::new("builtin:even".parse().unwrap(), 0), h)
            .map_err(|e| e.to_string())?;
        let class = even.class().map_err(|e| e.to_string())?;
        let profile = vc_growth_profile(&even, &class, 32).map_err(|e| e.to_string())?;
        let stabilized: Vec<usize> = profile.values().filter(|p| p.stabilized).map(|p| p.t).collect();
        ensure!(!stabilized.is_empty(), "even, H = {h}: nothing stabilized");
        for p in profile.values() {
            ensure!(!p.stabilized || p.shattered, "even, H = {h}: level {} stabilized but not shattered", p.t);
        }
        let top = profile.values().filter(|p| p.shattered).map(|p| p.t).max().unwrap_or(0);
        ensure!(top + 1 >= h, "even, H = {h}: shattering stops at {top}");

        let fin = run_construction(PiThreePredicate::new("builtin:y-le-x".parse().unwrap(), 0), h)
            .map_err(|e| e.to_string())?;
        let fclass = fin.class().map_err(|e| e.to_string())?;
        for k in 0..fclass.len() {
            ensure!(fclass.enumerate(k).dead(&BitWord::new()), "y-le-x, H = {h}: concept {k} nonempty");
        }
        ensure!(
            fin.blocks.iter().all(|b| matches!(b.truncation, Truncation::At { .. })),
            "y-le-x, H = {h}: a block was never cut off"
        );
        let fprof = vc_growth_profile(&fin, &fclass, 32).map_err(|e| e.to_string())?;
        ensure!(fprof.values().all(|p| !p.shattered), "y-le-x, H = {h}: a level shattered");
        notes.push(format!("H={h}: even shatters up to {top}, y-le-x {} empty", fclass.len()));
    }
    Ok(notes.join("; "))
}

fn c8_witness_hygiene() -> Check {
    let mut total = 0;
    for rel in ["true", "false", "even", "threshold(3)", "y-le-x"] {
        for h in [4usize, 8, 12] {
            let r = run_construction(PiThreePredicate::new(rel.parse().unwrap(), 0), h).map_err(|e| e.to_string())?;
            ensure!(verify_disjoint_witnesses(&r.concepts()), "{rel}, H = {h}: witnesses shared");
            let ws: Vec<PointGen> = r.witnesses().into_iter().map(|(_, w)| w).collect();
            let decoded: Vec<(usize, usize, usize)> =
                ws.iter().map(|w| decode_witness(w).ok_or("undecodable witness")).collect::<Result<_, _>>()?;
            for (i, (w, &(_, k, _))) in ws.iter().zip(&decoded).enumerate() {
                for (v, &(_, k2, _)) in ws.iter().zip(&decoded).skip(i + 1) {
                    ensure!(!w.same_point(v), "{rel}, H = {h}: repeated witness");
                    let q = k.min(k2);
                    ensure!(w.prefix(q) == v.prefix(q), "{rel}, H = {h}: prefixes differ below {q}");
                }
            }
            total += ws.len();
        }
    }
    Ok(format!("{total} witnesses over 15 runs"))
}

fn c9_replacement() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let dens = [3i64, 5, 7, 9, 11, 13, 15];
    for case in 0..50 {
        let k = rng.gen_range(1..=4);
        let two_d = rng.gen_bool(0.5);
        let specs: Vec<TreeSpec> = (0..k)
            .map(|_| {
                if two_d {
                    let a = small_normal(&mut rng);
                    halfspace(a, ratio(2 * rng.gen_range(-32..32) + 1, 32))
                } else {
                    let a = rng.gen_range(0..=16);
                    let b = rng.gen_range(a..=16);
                    interval(ratio(a, 16), ratio(b, 16))
                }
            })
            .collect();
        // Odd denominators keep the target off every dyadic boundary.
        let dims = if two_d { 2 } else { 1 };
        let y = pt((0..dims)
            .map(|_| {
                let q = dens[rng.gen_range(0..dens.len())];
                ratio(rng.gen_range(1..q), q)
            })
            .collect());
        let class = class_of(specs);
        let oracles: Vec<_> = (0..k).map(|i| class.oracle(i).unwrap()).collect();
        let use_external = rng.gen_bool(0.3);
        let r = if use_external {
            computable_replacement(&ExternalBits(y.prefix(96)), &oracles, 96)
        } else {
            computable_replacement(&y, &oracles, 96)
        }
        .map_err(|e| format!("case {case}: {e}"))?;
        ensure!(matches!(r.point, PointGen::EventuallyPeriodic { .. }), "case {case}: not finitely described");
        ensure!(r.point.description().is_some(), "case {case}: no description");
        for i in 0..k {
            let o = class.oracle(i).unwrap();
            let (vy, vx) = (o.decide_point(&y, 128), o.decide_point(&r.point, 128));
            ensure!(vy != PointVerdict::BoundaryUnresolved, "case {case}: target on a boundary");
            ensure!(vy == vx, "case {case}: concept {i} disagrees ({vy:?} vs {vx:?})");
        }
    }
    Ok("50 cases agree on every concept".into())
}

fn run_cli(dir: &Path, args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_effpac"))
        .current_dir(dir)
        .env_remove("EFFPAC_CACHE_DIR")
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    ensure!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    Ok(out.stdout)
}

fn c10_determinism() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let catalog = effpac::ConceptCatalog::new(interval_catalog());
    std::fs::write(dir.path().join("iv.json"), catalog.to_json()).map_err(|e| e.to_string())?;
    let atoms: Vec<String> = (0..16).map(|i| format!("\"rat1:{}/32\"", 2 * i + 1)).collect();
    std::fs::write(
        dir.path().join("dist.json"),
        format!(r#"{{"kind":"finite_support","atoms":[{}]}}"#, atoms.join(",")),
    )
    .map_err(|e| e.to_string())?;
    std::fs::write(dir.path().join("cont.json"), r#"{"kind":"product_bernoulli","p":"1/2","precision":40}"#)
        .map_err(|e| e.to_string())?;
    let commands: [&[&str]; 5] = [
        &[
            "pac",
            "--class",
            "iv.json",
            "--target",
            "40",
            "--dist",
            "dist.json",
            "--eps",
            "1/5",
            "--delta",
            "1/5",
            "--trials",
            "50",
            "--seed",
            "42",
        ],
        &[
            "pac",
            "--class",
            "iv.json",
            "--target",
            "40",
            "--dist",
            "cont.json",
            "--eps",
            "1/5",
            "--delta",
            "1/5",
            "--trials",
            "20",
            "--seed",
            "7",
            "--d",
            "2",
            "--mc-samples",
            "5000",
        ],
        &["rationalize", "--a", "1,sqrt(2)", "--b", "e/3", "--eps", "1/100", "--seed", "3", "--samples", "50000"],
        &["construct", "--R", "builtin:even", "--horizon", "10"],
        &[
            "pac",
            "--class",
            "iv.json",
            "--target",
            "7",
            "--dist",
            "dist.json",
            "--eps",
            "1/5",
            "--delta",
            "1/5",
            "--trials",
            "30",
            "--seed",
            "1",
            "--format",
            "csv",
        ],
    ];
    for args in commands {
        let a = run_cli(dir.path(), args)?;
        let b = run_cli(dir.path(), args)?;
        let one: Vec<&str> = args.iter().copied().chain(["--workers", "1"]).collect();
        let many: Vec<&str> = args.iter().copied().chain(["--workers", "8"]).collect();
        let c = run_cli(dir.path(), &one)?;
        let d = run_cli(dir.path(), &many)?;
        ensure!(a == b, "{}: repeated runs differ", args[0]);
        ensure!(a == c && c == d, "{}: output depends on worker count", args[0]);
    }
    Ok(format!("{} commands × 4 runs byte-identical", commands.len()))
}

fn main() {
    let criteria: [Criterion; 10] = [
        (1, "half-plane VC dimension", Duration::from_secs(60), c1_halfplanes),
        (2, "interval VC dimension", Duration::from_secs(10), c2_intervals),
        (3, "shatter-count oracle equivalence", Duration::from_secs(120), c3_shatter_equivalence),
        (4, "formula trees", Duration::from_secs(60), c4_formulas),
        (5, "PAC experiment", Duration::from_secs(120), c5_pac),
        (6, "hyperplane rationalization", Duration::from_secs(60), c6_rationalize),
        (7, "construction dichotomy", Duration::from_secs(60), c7_dichotomy),
        (8, "witness hygiene", Duration::from_secs(10), c8_witness_hygiene),
        (9, "computable replacement", Duration::from_secs(30), c9_replacement),
        (10, "determinism", Duration::from_secs(300), c10_determinism),
    ];
    let filter: Option<u32> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    let mut failed = 0;
    for (id, name, limit, check) in criteria {
        if filter.is_some_and(|f| f != id) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(_) if elapsed > limit => Err(format!("took {elapsed:.1?}, limit {limit:?}")),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("PASS {id:>2} {name}: {detail} [{elapsed:.2?}]"),
            Err(why) => {
                failed += 1;
                println!("FAIL {id:>2} {name}: {why} [{elapsed:.2?}]");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
