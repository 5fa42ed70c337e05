use fatcantor::avoidance::{
    build_scheme, fn_membership, greedy_sample, translate_hit_count, validate_scheme, verify_single_hit, AvoidError,
    SchemeConfig,
};
use fatcantor::fatness::{augment_killer, extract_incomparable, is_fat, prune_parallel, ExtractMode, FatnessError};
use fatcantor::fractal::{
    attractor_cover, box_count, box_dimension_fit, choose_n, minkowski, similarity_dimension, FractalError,
    MinkowskiOp,
};
use fatcantor::poset::{
    build_condition, extract_certificate, fuse, length_schedule, replay_run, validate_certificate,
    validate_condition, BnCertificate, DefaultOracle, FusionConfig, FusionError, FusionMode, FusionRun,
    TreeCondition,
};
use fatcantor::rng::SplitMix64;
use fatcantor::symbolic::{escapes, Slalom};
use fatcantor::{CantorScheme, Rational, Scalar};
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::inputs;
use crate::CliError;

pub struct Outcome {
    pub passed: bool,
    pub result: Value,
    pub csv: Option<String>,
    pub artifact: Option<String>,
}

impl Outcome {
    fn new(passed: bool, result: Value) -> Self {
        Outcome { passed, result, csv: None, artifact: None }
    }

    fn csv(mut self, csv: String) -> Self {
        self.csv = Some(csv);
        self
    }

    fn artifact(mut self, a: &impl serde::Serialize) -> Self {
        self.artifact = Some(serde_json::to_string_pretty(a).expect("artifacts serialize"));
        self
    }
}

impl From<FractalError> for CliError {
    fn from(e: FractalError) -> Self {
        match e {
            FractalError::SizeGuard { .. } => CliError::Resource(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<AvoidError> for CliError {
    fn from(e: AvoidError) -> Self {
        match e {
            AvoidError::ResolutionExhausted { .. } | AvoidError::BudgetExceeded { .. } => {
                CliError::Resource(e.to_string())
            }
            AvoidError::Fractal(f) => f.into(),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

fn family(cfg: &RunConfig) -> Result<fatcantor::fatness::FiniteFamily, CliError> {
    inputs::family(cfg.require("family")?, cfg.require("base")?)
}

fn lines<T: ToString>(header: &str, items: impl IntoIterator<Item = T>) -> String {
    let mut s = format!("{header}\n");
    for x in items {
        s.push_str(&x.to_string());
        s.push('\n');
    }
    s
}

pub fn run(cfg: &RunConfig) -> Result<Outcome, CliError> {
    match cfg.command.name {
        "fat" => fat(cfg),
        "escape" => escape(cfg),
        "antichain" => antichain(cfg),
        "prune" => prune(cfg),
        "build-cond" => build_cond(cfg),
        "fuse" => fuse_cmd(cfg),
        "verify-cert" => verify_cert(cfg),
        "dim" => dim(cfg),
        "cover" => cover(cfg),
        "minkowski" => minkowski_cmd(cfg),
        "fn-check" => fn_check(cfg),
        "scheme" => scheme(cfg),
        "hits" => hits(cfg),
        "sample" => sample(cfg),
        "verify-sample" => verify_sample(cfg),
        "replay" => replay(cfg),
        other => Err(CliError::Usage(format!("no handler for `{other}`"))),
    }
}

fn fat(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let f = family(cfg)?;
    let v = is_fat(&f, cfg.int("k")?, cfg.int("height")?);
    Ok(Outcome::new(v.is_fat, json!({ "members": f.len(), "verdict": v })))
}

fn escape(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let t = inputs::digits(cfg.require("t")?)?;
    let s: Slalom = cfg.require("slalom")?.parse().map_err(|e| CliError::Usage(format!("bad slalom: {e}")))?;
    let ok = escapes(&t, &s);
    Ok(Outcome::new(ok, json!({ "t": t, "slalom": s, "escapes": ok })))
}

fn antichain(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let f = family(cfg)?;
    let mode = match cfg.require("mode")? {
        "skip" => ExtractMode::Skip,
        "every" => ExtractMode::EverySlalom,
        m => return Err(CliError::Usage(format!("mode must be skip or every, got {m:?}"))),
    };
    match extract_incomparable(&f, cfg.int("k")?, cfg.int("height")?, mode) {
        Ok(x) => {
            let passed = x.verdict.is_fat && x.family.is_antichain();
            let handled = x.handled.iter().filter(|(_, p)| p.is_some()).count();
            Ok(Outcome::new(
                passed,
                json!({
                    "picks": x.picks,
                    "slaloms": x.handled.len(),
                    "slalomsWithPick": handled,
                    "antichain": x.family.is_antichain(),
                    "verdict": x.verdict,
                }),
            )
            .csv(lines("string", &x.picks)))
        }
        Err(FatnessError::WidthTooSmall) => Err(CliError::Usage("k must be at least 1".into())),
        Err(e) => Ok(Outcome::new(false, json!({ "error": e.to_string() }))),
    }
}

fn prune(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let f = family(cfg)?;
    let sigma = inputs::digits(cfg.require("sigma")?)?;
    let (k, h) = (cfg.int("k")?, cfg.int("height")?);
    let (pruned, v) = prune_parallel(&f, &sigma, k, h).map_err(|e| CliError::Usage(e.to_string()))?;
    let augmented = v.killer.as_ref().map(|killer| {
        let aug = augment_killer(killer, &sigma);
        let kills = !f.iter().any(|t| escapes(t, &aug));
        json!({ "slalom": aug, "killsFamily": kills, "width": aug.width() })
    });
    let members: Vec<_> = pruned.iter().cloned().collect();
    Ok(Outcome::new(
        v.is_fat,
        json!({ "kept": members.len(), "members": members, "verdict": v, "augmentedKiller": augmented }),
    )
    .csv(lines("string", &members)))
}

fn build_cond(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let depth = cfg.int("depth")?;
    let p = match build_condition(depth) {
        Ok(p) => p,
        Err(e) => return Ok(Outcome::new(false, json!({ "error": e.to_string() }))),
    };
    let rep = validate_condition(&p, &length_schedule(&p, cfg.int("kmax")?));
    Ok(Outcome::new(
        rep.passed,
        json!({ "root": p.root(), "nodes": p.len(), "report": rep }),
    )
    .artifact(&p))
}

fn mode(cfg: &RunConfig) -> Result<FusionMode, CliError> {
    match cfg.require("mode")? {
        "plain" => Ok(FusionMode::Plain),
        "avoiding" => Ok(FusionMode::ParallelAvoiding),
        m => Err(CliError::Usage(format!("mode must be plain or avoiding, got {m:?}"))),
    }
}

fn fuse_cmd(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let p: TreeCondition = match cfg.get("condition") {
        Some(spec) => inputs::json_file(spec)?,
        None => build_condition(cfg.int("depth")?).map_err(|e| CliError::Usage(e.to_string()))?,
    };
    let opens = inputs::opens(cfg.require("opens")?)?;
    let fc = FusionConfig { mode: mode(cfg)?, steps: cfg.int("steps")?, bfs_cap: cfg.int("bfs-cap")? };
    let (run, error) = match fuse(&p, &opens, &fc, &mut DefaultOracle) {
        Ok(run) => (run, None),
        Err(FusionError::InvalidInput(m)) => return Err(CliError::Usage(m)),
        Err(e) => match e.partial() {
            Some(run) => (run.clone(), Some(e.to_string())),
            None => return Ok(Outcome::new(false, json!({ "error": e.to_string() }))),
        },
    };
    let replay = replay_run(&run);
    let result = json!({
        "mode": run.mode,
        "requestedSteps": fc.steps,
        "rounds": run.rounds.len(),
        "error": error,
        "r": run.r(),
        "replay": replay,
    });
    Ok(Outcome::new(error.is_none() && replay.passed, result).artifact(&run))
}

fn verify_cert(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let cert: BnCertificate = match (cfg.get("run"), cfg.get("cert")) {
        (Some(run), None) => {
            let run: FusionRun = inputs::json_file(run)?;
            match extract_certificate(&run) {
                Some(c) => c,
                None => return Ok(Outcome::new(false, json!({ "error": "run has no rounds" }))),
            }
        }
        (None, Some(c)) => inputs::json_file(c)?,
        _ => return Err(CliError::Usage("verify-cert needs exactly one of `run` and `cert`".into())),
    };
    let rep = validate_certificate(&cert);
    Ok(Outcome::new(rep.passed, json!({ "levels": cert.levels.len(), "report": rep })).artifact(&cert))
}

fn dim(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let ifs = inputs::ifs(cfg.require("ifs")?)?;
    let depths = inputs::range("depths", cfg.require("depths")?)?;
    let base = cfg.opt_int("box-base").map(|b| b as i64);
    let sim = similarity_dimension(&ifs)?;
    let fit = box_dimension_fit(&ifs, depths.clone(), base)?;
    let b = base.unwrap_or_else(|| (1.0 / ifs.min_ratio().to_f64_lossy()).round().max(2.0) as i64);
    let mut csv = String::from("depth,boxes\n");
    for d in depths {
        let c = attractor_cover(&ifs, d, fatcantor::fractal::DEFAULT_COVER_CAP)?;
        csv.push_str(&format!("{d},{}\n", box_count(&c, b, d as u32)));
    }
    let choose = |x: f64| if x < 1.0 { choose_n(&x).ok() } else { None };
    let upper = match cfg.get("upper") {
        Some(u) => Some(choose_n(&inputs::rational("upper", u)?)?),
        None => None,
    };
    Ok(Outcome::new(
        true,
        json!({
            "similarity": sim,
            "boxFit": fit,
            "boxBase": b,
            "chooseN": choose(sim.value),
            "chooseNDifferenceSet": choose(2.0 * sim.value),
            "chooseNUpper": upper,
        }),
    )
    .csv(csv))
}

fn cover(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let ifs = inputs::ifs(cfg.require("ifs")?)?;
    let c = attractor_cover(&ifs, cfg.int("depth")?, cfg.int("cap")?)?;
    Ok(Outcome::new(
        true,
        json!({ "intervals": c.len(), "totalLength": c.total_length().to_text(), "cover": c }),
    )
    .csv(c.to_csv()))
}

fn minkowski_cmd(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let ifs = inputs::ifs(cfg.require("ifs")?)?;
    let cap = cfg.int("cap")?;
    let side = |key: &str| -> Result<fatcantor::IntervalCover, CliError> {
        match cfg.get(key) {
            Some(spec) => inputs::cover(spec),
            None => Ok(attractor_cover(&ifs, cfg.int("depth")?, cap)?),
        }
    };
    let (a, b) = (side("a")?, side("b")?);
    let op = match cfg.require("op")? {
        "sum" => MinkowskiOp::Sum,
        "diff" => MinkowskiOp::Diff,
        o => return Err(CliError::Usage(format!("op must be sum or diff, got {o:?}"))),
    };
    let c = minkowski(&a, op, &b, cap)?;
    Ok(Outcome::new(
        true,
        json!({ "op": op, "intervals": c.len(), "totalLength": c.total_length().to_text(), "cover": c }),
    )
    .csv(c.to_csv()))
}

fn fn_check(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let ifs = inputs::ifs(cfg.require("ifs")?)?;
    let xs = inputs::tuple("xs", cfg.require("xs")?)?;
    let v = fn_membership(&xs, &ifs, cfg.int("depth")?)?;
    Ok(Outcome::new(true, json!({ "xs": xs.iter().map(Scalar::to_text).collect::<Vec<_>>(), "result": v })))
}

fn build(cfg: &RunConfig) -> Result<CantorScheme, CliError> {
    let ifs = inputs::ifs(cfg.require("ifs")?)?;
    let p = inputs::cover(cfg.require("p")?)?;
    let sc = SchemeConfig {
        n: cfg.int("n")?,
        depth: cfg.int("depth")?,
        budget: cfg.int("budget")?,
        tuple_cap: cfg.opt_int("tuple-cap").map_or(1 << 20, |c| c as u128),
    };
    Ok(build_scheme(&p, &ifs, &sc)?)
}

fn scheme(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let s = build(cfg)?;
    let rep = validate_scheme(&s)?;
    let sizes: Vec<usize> = s.levels.iter().map(Vec::len).collect();
    let bottom: Vec<String> = s.bottom().iter().map(ToString::to_string).collect();
    Ok(Outcome::new(rep.passed, json!({ "levelSizes": sizes, "bottom": bottom, "report": rep })).artifact(&s))
}

fn translates(cfg: &RunConfig, count_key: &str) -> Result<Vec<Rational>, CliError> {
    if let Some(r) = cfg.get("r") {
        return Ok(vec![inputs::rational("r", r)?]);
    }
    let lo = inputs::rational("lo", cfg.require("lo")?)?;
    let hi = inputs::rational("hi", cfg.require("hi")?)?;
    if lo > hi {
        return Err(CliError::Usage("`lo` exceeds `hi`".into()));
    }
    let mut rng = SplitMix64::new(cfg.u64("seed")?);
    Ok((0..cfg.int(count_key)?).map(|_| rng.rational_in(&lo, &hi)).collect())
}

fn hits(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let s: CantorScheme = match cfg.get("scheme") {
        Some(spec) => inputs::json_file(spec)?,
        None => build(cfg)?,
    };
    let n = s.n;
    let check = cfg.opt_int("check-depth").unwrap_or(s.depth());
    let deepen = cfg.int("deepen")?;
    let (mut within, mut exceptions, mut resolved, mut hard) = (0usize, 0usize, 0usize, 0usize);
    let mut csv = String::from("r,count,exact_hits,resolved_depth\n");
    for r in translates(cfg, "samples")? {
        let h = translate_hit_count(&s, &r, check)?;
        if h.exact_hits >= n {
            hard += 1;
        }
        let mut at = (h.count < n).then_some(check);
        if at.is_some() {
            within += 1;
        } else {
            exceptions += 1;
            for d in check + 1..=check + deepen {
                if translate_hit_count(&s, &r, d)?.count < n {
                    at = Some(d);
                    resolved += 1;
                    break;
                }
            }
        }
        let at = at.map_or(String::new(), |d| d.to_string());
        csv.push_str(&format!("{},{},{},{at}\n", r.to_text(), h.count, h.exact_hits));
    }
    Ok(Outcome::new(
        hard == 0 && resolved == exceptions,
        json!({
            "n": n,
            "checkDepth": check,
            "withinBound": within,
            "exceptions": exceptions,
            "resolvedByDeepening": resolved,
            "exactWitnessViolations": hard,
        }),
    )
    .csv(csv))
}

fn sample_set(cfg: &RunConfig) -> Result<Result<fatcantor::SampleSet, AvoidError>, CliError> {
    let ifs = inputs::ifs(cfg.require("ifs")?)?;
    let grid = inputs::rational("grid", cfg.require("grid")?)?;
    let exclusion = match cfg.get("exclusion") {
        Some(spec) => inputs::cover(spec)?,
        None => fatcantor::IntervalCover::empty(),
    };
    match greedy_sample(&ifs, cfg.int("m")?, &exclusion, &grid, cfg.int("depth")?) {
        Err(e @ AvoidError::GridExhausted { .. }) => Ok(Err(e)),
        other => Ok(Ok(other?)),
    }
}

fn sample(cfg: &RunConfig) -> Result<Outcome, CliError> {
    match sample_set(cfg)? {
        Ok(x) => {
            let points: Vec<String> = x.points.iter().map(Scalar::to_text).collect();
            Ok(Outcome::new(true, json!({ "points": points, "steps": x.steps, "depth": x.depth })).csv(x.to_csv()))
        }
        Err(e) => Ok(Outcome::new(false, json!({ "error": e.to_string() }))),
    }
}

fn verify_sample(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let x = match sample_set(cfg)? {
        Ok(x) => x,
        Err(e) => return Ok(Outcome::new(false, json!({ "error": e.to_string() }))),
    };
    let depth = cfg.opt_int("check-depth").unwrap_or(x.depth);
    let mut csv = String::from("t,hits\n");
    let (mut worst, mut over) = (0usize, 0usize);
    let ts = translates(cfg, "trials")?;
    for t in &ts {
        let h = verify_single_hit(&x, t, depth)?;
        worst = worst.max(h);
        over += usize::from(h > 1);
        csv.push_str(&format!("{},{h}\n", t.to_text()));
    }
    Ok(Outcome::new(
        over == 0,
        json!({ "points": x.points.len(), "checkDepth": depth, "trials": ts.len(), "maxHits": worst, "violations": over }),
    )
    .csv(csv))
}

fn replay(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let run: FusionRun = inputs::json_file(cfg.require("run")?)?;
    let rep = replay_run(&run);
    Ok(Outcome::new(rep.passed, json!({ "mode": run.mode, "report": rep })))
}
