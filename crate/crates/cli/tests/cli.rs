use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_effpac");

const INTERVALS: &str = r#"{"concepts":[
  {"kind":"interval","lo":"0","hi":"1/2"},
  {"kind":"interval","lo":"1/4","hi":"3/4"},
  {"kind":"interval","lo":"1/8","hi":"1/8"},
  {"kind":"interval","lo":"0","hi":"3/4"}
]}"#;
const POOL: &str = r#"{"points":["rat1:1/16","rat1:3/8","rat1:5/8","rat1:15/16"],"precision":8}"#;
const DIST: &str = r#"{"kind":"finite_support","atoms":["rat1:1/16","rat1:3/8","rat1:5/8","rat1:15/16"]}"#;

struct Fixture {
    dir: TempDir,
}

impl Fixture {
    fn new() -> Self {
        let f = Self { dir: tempfile::tempdir().unwrap() };
        f.write("iv.json", INTERVALS);
        f.write("pool.json", POOL);
        f.write("dist.json", DIST);
        f
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn write(&self, name: &str, text: &str) -> PathBuf {
        let p = self.path(name);
        std::fs::write(&p, text).unwrap();
        p
    }

    fn run(&self, args: &[&str]) -> Output {
        self.run_env(args, &[])
    }

    fn run_env(&self, args: &[&str], env: &[(&str, &Path)]) -> Output {
        let mut cmd = Command::new(BIN);
        cmd.current_dir(self.dir.path()).args(args).env_remove("EFFPAC_CACHE_DIR");
        for (k, v) in env {
            cmd.env(k, v);
        }
        cmd.output().unwrap()
    }
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

#[test]
fn unknown_flag_is_usage_error() {
    let f = Fixture::new();
    assert_eq!(code(&f.run(&["vc", "--frobnicate"])), 2);
}

#[test]
fn malformed_rational_is_usage_error() {
    let f = Fixture::new();
    let out = f.run(&["vc", "--class", "iv.json", "--pool", "pool.json", "--d", "2", "--eps", "1/0"]);
    assert_eq!(code(&out), 2);
    let out = f.run(&["vc", "--class", "iv.json", "--pool", "pool.json", "--d", "2", "--eps", "one"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn pac_without_seed_is_usage_error() {
    let f = Fixture::new();
    let out =
        f.run(&["pac", "--class", "iv.json", "--target", "1", "--dist", "dist.json", "--eps", "1/5", "--delta", "1/5"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("--seed"));
}

#[test]
fn rationalize_without_seed_is_usage_error() {
    let f = Fixture::new();
    assert_eq!(code(&f.run(&["rationalize", "--a", "1", "--b", "pi/4", "--eps", "1/100"])), 2);
}

#[test]
fn config_echo_keeps_exact_rational() {
    let f = Fixture::new();
    let r = json(&f.run(&["vc", "--class", "iv.json", "--pool", "pool.json", "--d", "3", "--eps", "1/5"]));
    assert_eq!(r["schema"], "effpac.report/v1");
    assert_eq!(r["command"], "vc");
    assert_eq!(r["config"]["eps"], "1/5");
    assert_eq!(r["config"]["d"], 3);
    assert_eq!(r["result"]["found"], false);
}

#[test]
fn flag_overrides_config_file() {
    let f = Fixture::new();
    f.write("cfg.json", r#"{"class":"iv.json","pool":"pool.json","d":3,"budget":16,"eps":"1/4"}"#);
    let r = json(&f.run(&["--config", "cfg.json", "vc", "--d", "2", "--eps", "2/10"]));
    assert_eq!(r["config"]["d"], 2);
    assert_eq!(r["config"]["eps"], "1/5");
    assert_eq!(r["config"]["budget"], 16);
    assert_eq!(r["result"]["found"], true);
    assert_eq!(r["result"]["witness"], serde_json::json!([0, 2]));
}

#[test]
fn config_file_can_name_the_command() {
    let f = Fixture::new();
    f.write("cfg.json", r#"{"command":"vc","class":"iv.json","pool":"pool.json","d":2}"#);
    let r = json(&f.run(&["--config", "cfg.json"]));
    assert_eq!(r["command"], "vc");
    assert_eq!(r["result"]["found"], true);
}

#[test]
fn missing_config_file_is_io_error() {
    let f = Fixture::new();
    assert_eq!(code(&f.run(&["--config", "nope.json", "vc"])), 3);
}

#[test]
fn invalid_catalog_is_schema_error() {
    let f = Fixture::new();
    f.write("bad.json", r#"{"concepts":[{"kind":"interval","lo":"1","hi":"0"}]}"#);
    assert_eq!(code(&f.run(&["vc", "--class", "bad.json", "--pool", "pool.json", "--d", "1"])), 3);
    f.write("worse.json", r#"{"concepts": 7}"#);
    assert_eq!(code(&f.run(&["vc", "--class", "worse.json", "--pool", "pool.json", "--d", "1"])), 3);
    assert_eq!(code(&f.run(&["vc", "--class", "absent.json", "--pool", "pool.json", "--d", "1"])), 3);
}

#[test]
fn encode_prints_node_decisions() {
    let f = Fixture::new();
    let r = json(&f.run(&["encode", "--class", "iv.json", "--depth", "2", "--coords", "3/8", "--bits", "6"]));
    let decisions = r["result"]["decisions"].as_array().unwrap();
    assert_eq!(decisions.len(), 4 * 4);
    // Concept 2 is the single point 1/8, inside the cell [0, 1/4) only.
    let excluded: Vec<&str> = decisions
        .iter()
        .filter(|d| d["concept"] == 2 && d["status"] == "excluded")
        .map(|d| d["sigma"].as_str().unwrap())
        .collect();
    assert_eq!(excluded, ["01", "10", "11"]);
    assert_eq!(r["result"]["encodings"][0]["bits"], "011000");
}

#[test]
fn encode_csv_table() {
    let f = Fixture::new();
    let out = f.run(&["encode", "--class", "iv.json", "--node", "1:1", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "kind,concept,input,stage,value");
    assert_eq!(lines[3], "decision,2,1,1,excluded");
    assert_eq!(lines.len(), 5);
}

#[test]
fn shatter_reports_traces() {
    let f = Fixture::new();
    let r = json(&f.run(&["shatter", "--class", "iv.json", "--pool", "pool.json", "--subset", "0,2"]));
    assert_eq!(r["result"]["count"], 4);
    assert_eq!(r["result"]["shattered"], true);
    let r = json(&f.run(&["shatter", "--class", "iv.json", "--pool", "pool.json", "--subset", "0,3"]));
    assert_eq!(r["result"]["shattered"], false);
}

#[test]
fn pac_report_is_deterministic_across_runs_and_workers() {
    let f = Fixture::new();
    let args = [
        "pac",
        "--class",
        "iv.json",
        "--target",
        "1",
        "--dist",
        "dist.json",
        "--eps",
        "1/5",
        "--delta",
        "1/5",
        "--trials",
        "20",
        "--seed",
        "42",
    ];
    let a = f.run(&args);
    let b = f.run(&args);
    let mut with_workers = args.to_vec();
    with_workers.extend(["--workers", "1"]);
    let c = f.run(&with_workers);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
    let r = json(&a);
    assert_eq!(r["result"]["trial_count"], 20);
    assert_eq!(r["result"]["d"], 2);
    assert_eq!(r["result"]["trials"].as_array().unwrap().len(), 20);
}

#[test]
fn pac_csv_has_one_row_per_trial() {
    let f = Fixture::new();
    let out = f.run(&[
        "pac",
        "--class",
        "iv.json",
        "--target",
        "0",
        "--dist",
        "dist.json",
        "--eps",
        "1/5",
        "--delta",
        "1/5",
        "--trials",
        "7",
        "--seed",
        "1",
        "--format",
        "csv",
        "--out",
        "trials.csv",
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(f.path("trials.csv")).unwrap();
    assert_eq!(text.lines().count(), 8);
    assert!(text.starts_with("trial,seed,hypothesis,error,success,aborted\n"));
}

#[test]
fn timing_only_when_requested() {
    let f = Fixture::new();
    let args = ["vc", "--class", "iv.json", "--pool", "pool.json", "--d", "1"];
    assert!(json(&f.run(&args)).get("duration_ms").is_none());
    let mut timed = args.to_vec();
    timed.push("--timing");
    assert!(json(&f.run(&timed))["duration_ms"].is_number());
}

#[test]
fn boundary_point_exits_with_undecided_code() {
    let f = Fixture::new();
    let out =
        f.run(&["transversal", "--class", "iv.json", "--dist", "dist.json", "--eps", "1/5", "--point", "rat1:1/2"]);
    assert_eq!(code(&out), 4);
}

#[test]
fn failed_approximation_exit_code() {
    let f = Fixture::new();
    let out = f.run(&[
        "rationalize",
        "--a",
        "1,1",
        "--b",
        "sqrt(2)/2",
        "--eps",
        "1/1000000000",
        "--samples",
        "1000",
        "--max-bits",
        "4",
        "--seed",
        "1",
    ]);
    assert_eq!(code(&out), 6);
}

#[test]
fn external_bits_exhaust_precision() {
    let f = Fixture::new();
    // Every prefix of 1000 spans a cell touching 1/2, the right end of concept 0.
    assert_eq!(code(&f.run(&["replace", "--class", "iv.json", "--bits", "1000", "--precision", "4"])), 7);
    let r = json(&f.run(&["replace", "--class", "iv.json", "--bits", "0110", "--precision", "4"]));
    assert_eq!(r["result"]["resolved"], true);
}

#[test]
fn replacement_agrees_with_original() {
    let f = Fixture::new();
    let r = json(&f.run(&["replace", "--class", "iv.json", "--point", "rat1:3/8"]));
    for v in r["result"]["verdicts"].as_array().unwrap() {
        assert_eq!(v["original"], v["replacement"]);
    }
}

#[test]
fn rationalize_quarter_pi() {
    let f = Fixture::new();
    let r = json(&f.run(&["rationalize", "--a", "1", "--b", "pi/4", "--eps", "1/100", "--seed", "7"]));
    assert!(r["result"]["upper_bound"].as_f64().unwrap() < 0.01);
    assert_eq!(r["config"]["b"], "pi/4");
}

#[test]
fn construct_then_vc_growth_profile() {
    let f = Fixture::new();
    let out = f.run(&[
        "construct",
        "--R",
        "builtin:even",
        "--n",
        "0",
        "--horizon",
        "8",
        "--catalog-out",
        "cat.json",
        "--pool-out",
        "wp.json",
        "--out",
        "construct.json",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let c: Value = serde_json::from_slice(&std::fs::read(f.path("construct.json")).unwrap()).unwrap();
    assert_eq!(c["result"]["disjoint_witnesses"], true);
    assert_eq!(c["config"]["R"], "even");

    let r = json(&f.run(&["vc", "--class", "cat.json", "--construction", "construct.json"]));
    let profile = r["result"]["profile"].as_array().unwrap();
    assert_eq!(profile.len(), 8);
    for p in profile {
        let t = p["t"].as_u64().unwrap();
        assert_eq!(p["shattered"], t % 2 == 0, "level {t}");
    }
    assert_eq!(r["result"]["max_shattered_level"], 8);

    // The emitted pool and catalog also feed the plain pool search.
    let r = json(&f.run(&["vc", "--class", "cat.json", "--pool", "wp.json", "--d", "2", "--prefix", "4"]));
    assert_eq!(r["result"]["found"], true);
}

#[test]
fn construct_cache_reuses_report() {
    let f = Fixture::new();
    let cache = f.path("cache");
    let args = ["construct", "--R", "y-le-x", "--horizon", "6", "--no-profile"];
    let a = f.run_env(&args, &[("EFFPAC_CACHE_DIR", &cache)]);
    assert!(a.status.success());
    let files: Vec<_> = std::fs::read_dir(&cache).unwrap().collect();
    assert_eq!(files.len(), 1);
    let b = f.run_env(&args, &[("EFFPAC_CACHE_DIR", &cache)]);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, f.run(&args).stdout);
}
