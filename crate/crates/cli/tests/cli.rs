use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fatcantor"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("fatcantor-cli-{}-{name}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> (i32, Value, String) {
    let out: Output = bin().args(args).output().unwrap();
    let stdout = String::from_utf8(out.stdout).unwrap();
    let report = serde_json::from_str(&stdout).unwrap_or(Value::Null);
    (out.status.code().unwrap(), report, String::from_utf8(out.stderr).unwrap())
}

fn at(p: &Path) -> String {
    format!("@{}", p.display())
}

fn full_family(dir: &Path) -> PathBuf {
    let members: Vec<String> = (0..3).flat_map(|a| (0..4).map(move |b| format!("[{a},{b}]"))).collect();
    let p = dir.join("f.json");
    fs::write(&p, serde_json::json!({ "base": "[]", "members": members }).to_string()).unwrap();
    p
}

#[test]
fn fat_examples() {
    let dir = scratch("fat");
    let f = at(&full_family(&dir));
    let (code, rep, _) = run(&["fat", "--family", &f, "--k", "2", "--height", "2"]);
    assert_eq!(code, 0);
    assert_eq!(rep["result"]["verdict"]["isFat"], true);
    assert_eq!(rep["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(rep["configDigest"].as_str().unwrap().len(), 64);

    let (code, rep, _) = run(&["fat", "--family", &f, "--k", "3", "--height", "1"]);
    assert_eq!(code, 1);
    assert_eq!(rep["status"], "FAIL");
    assert_eq!(rep["result"]["verdict"]["killer"], "[];0:{0,1,2};ht=1");
}

#[test]
fn dim_example() {
    let (code, rep, _) = run(&["dim", "--ifs", "1/10,0;1/10,1/2"]);
    assert_eq!(code, 0);
    let v = rep["result"]["similarity"]["value"].as_f64().unwrap();
    assert!((v - std::f64::consts::LOG10_2).abs() < 1e-12);
    assert_eq!(rep["result"]["chooseN"]["n"], 2);
    let (_, rep, _) = run(&["dim", "--upper", "0.8614"]);
    assert_eq!(rep["result"]["chooseNUpper"]["n"], 8);
}

#[test]
fn usage_and_resource_errors() {
    assert_eq!(run(&["fat", "--family", "[0]", "--k", "1", "--height", "1", "--depth", "2"]).0, 2);
    assert_eq!(run(&["fat", "--family", "[0]", "--k", "99", "--height", "1"]).0, 2);
    assert_eq!(run(&["fat", "--k", "1", "--height", "1"]).0, 2);
    assert_eq!(run(&["nonsense"]).0, 2);
    assert_eq!(run(&["dim", "--ifs", "1/2"]).0, 2);
    assert_eq!(run(&["cover", "--depth", "20", "--cap", "100"]).0, 3);
    assert_eq!(run(&["scheme", "--depth", "2", "--budget", "0"]).0, 3);
}

#[test]
fn config_file_and_digest() {
    let dir = scratch("config");
    let cfg = dir.join("run.cfg");
    fs::write(&cfg, "# box fit\ncommand = dim\ndepths = 4..8\n").unwrap();
    let c = cfg.display().to_string();
    let (code, a, _) = run(&["dim", "--config", &c]);
    assert_eq!(code, 0);
    assert_eq!(a["config"]["depths"], "4..8");
    let (_, b, _) = run(&["dim", "--depths", "4..8"]);
    assert_eq!(a["configDigest"], b["configDigest"]);
    let (_, d, _) = run(&["dim", "--config", &c, "--depths", "4..9"]);
    assert_ne!(a["configDigest"], d["configDigest"]);

    fs::write(&cfg, "depths = 4..8\nwidth = 3\n").unwrap();
    let (code, _, err) = run(&["dim", "--config", &c]);
    assert_eq!(code, 2);
    assert!(err.contains("unknown key `width`"));
    fs::write(&cfg, "command = fat\n").unwrap();
    assert_eq!(run(&["dim", "--config", &c]).0, 2);
}

#[test]
fn symbolic_commands() {
    let (code, rep, _) = run(&["escape", "--t", "[1,0]", "--slalom", "[];0:{0};1:{1};ht=2"]);
    assert_eq!((code, rep["result"]["escapes"].clone()), (0, Value::Bool(true)));
    assert_eq!(run(&["escape", "--t", "[1,1]", "--slalom", "[];0:{0};1:{1};ht=2"]).0, 1);
    assert_eq!(run(&["escape", "--t", "[1,0]", "--slalom", "[];0:{0};ht=2"]).0, 2);

    let dir = scratch("symbolic");
    let csv = dir.join("picks.csv");
    let (code, rep, _) = run(&[
        "antichain", "--family", "full:[]:1:4", "--k", "2", "--height", "1", "--csv", csv.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{rep}");
    assert_eq!(rep["result"]["antichain"], true);
    assert!(fs::read_to_string(&csv).unwrap().starts_with("string\n"));

    let (code, rep, _) = run(&["prune", "--family", "full:[]:1:3", "--k", "2", "--height", "2", "--sigma", "[1,1]"]);
    assert_eq!(code, 0);
    assert_eq!(rep["result"]["verdict"]["isFat"], true);
    let (code, rep, _) = run(&["prune", "--family", "[1,0];[1,2]", "--k", "1", "--height", "2", "--sigma", "[1]"]);
    assert_eq!(code, 1);
    assert_eq!(rep["result"]["augmentedKiller"]["killsFamily"], true);
}

#[test]
fn fusion_pipeline() {
    let dir = scratch("fusion");
    let cond = dir.join("cond.json");
    let runf = dir.join("run.json");
    let cert = dir.join("cert.json");
    let (code, rep, _) = run(&["build-cond", "--depth", "6", "--artifact", cond.to_str().unwrap()]);
    assert_eq!(code, 0, "{rep}");

    let (code, rep, _) = run(&[
        "fuse", "--condition", &at(&cond), "--steps", "8", "--opens", "whole;append:1",
        "--artifact", runf.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{rep}");
    assert_eq!(rep["result"]["replay"]["passed"], true);

    let (code, rep, _) = run(&["replay", "--run", &at(&runf)]);
    assert_eq!(code, 0, "{rep}");

    let (code, rep, _) = run(&["verify-cert", "--run", &at(&runf), "--artifact", cert.to_str().unwrap()]);
    assert_eq!(code, 0, "{rep}");
    assert_eq!(run(&["verify-cert", "--cert", &at(&cert)]).0, 0);

    // A run that cannot reach its step count is a report-level failure.
    let (code, rep, _) = run(&["fuse", "--depth", "6", "--steps", "500"]);
    assert_eq!(code, 1);
    assert!(rep["result"]["error"].as_str().unwrap().contains("DEPTH_EXHAUSTED"));
    assert_eq!(rep["result"]["replay"]["passed"], true);

    let mut tampered: Value = serde_json::from_str(&fs::read_to_string(&runf).unwrap()).unwrap();
    tampered["rounds"][3]["s"] = Value::String("[2,2,2]".into());
    fs::write(&runf, tampered.to_string()).unwrap();
    assert_eq!(run(&["replay", "--run", &at(&runf)]).0, 1);
}

#[test]
fn geometry_commands() {
    let dir = scratch("geometry");
    let csv = dir.join("cover.csv");
    let (code, rep, _) = run(&["cover", "--depth", "3", "--csv", csv.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(rep["result"]["intervals"], 8);
    let text = fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("lo,hi\n0,1/1800\n"), "{text}");

    let (code, rep, _) = run(&["minkowski", "--a", &at(&csv), "--b", "0,0", "--op", "sum"]);
    assert_eq!(code, 0);
    assert_eq!(rep["result"]["intervals"], 8);

    let (_, rep, _) = run(&["fn-check", "--xs", "0,1/2", "--depth", "3"]);
    assert_eq!(rep["result"]["result"]["verdict"], "COVERED");
    let (_, rep, _) = run(&["fn-check", "--xs", "0,1/4"]);
    assert_eq!(rep["result"]["result"]["verdict"], "DISJOINT_CERTIFIED");
}

#[test]
fn scheme_hits_and_samples() {
    let dir = scratch("scheme");
    let s = dir.join("scheme.json");
    let (code, rep, _) = run(&["scheme", "--depth", "2", "--artifact", s.to_str().unwrap()]);
    assert_eq!(code, 0, "{rep}");
    assert_eq!(rep["result"]["levelSizes"], serde_json::json!([1, 2, 4]));

    let (code, rep, _) = run(&["hits", "--scheme", &at(&s), "--samples", "50", "--seed", "9"]);
    assert_eq!(code, 0, "{rep}");
    assert_eq!(rep["result"]["exactWitnessViolations"], 0);

    let (code, rep, _) = run(&["sample", "--m", "8", "--grid", "1/100", "--depth", "4"]);
    assert_eq!(code, 0);
    assert_eq!(rep["result"]["points"].as_array().unwrap().len(), 8);
    assert_eq!(run(&["sample", "--m", "5", "--exclusion", "0,1"]).0, 1);

    let (code, rep, _) = run(&["verify-sample", "--m", "8", "--grid", "1/100", "--depth", "4", "--trials", "100"]);
    assert_eq!(code, 0, "{rep}");
    assert!(rep["result"]["maxHits"].as_u64().unwrap() <= 1);
}

#[test]
fn reports_are_deterministic() {
    let dir = scratch("determinism");
    for (i, args) in [
        vec!["hits", "--depth", "2", "--samples", "40", "--seed", "3"],
        vec!["verify-sample", "--m", "8", "--grid", "1/100", "--depth", "4", "--trials", "50", "--seed", "3"],
        vec!["fuse", "--depth", "6", "--steps", "6", "--mode", "avoiding"],
    ]
    .into_iter()
    .enumerate()
    {
        let a = bin().args(&args).output().unwrap().stdout;
        let b = bin().args(&args).output().unwrap().stdout;
        assert_eq!(a, b, "{args:?}");
        // Output paths do not change the report.
        let out = dir.join(format!("r{i}.json"));
        let mut with_out = args.clone();
        with_out.extend(["--out", out.to_str().unwrap()]);
        bin().args(&with_out).output().unwrap();
        assert_eq!(fs::read(&out).unwrap(), a);
    }
}
