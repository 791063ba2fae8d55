//! Subcommand dispatch.

use std::io::BufReader;
use std::path::Path as FsPath;

use halfspace::experiments::{
    check_representation_enumeration, check_sparre_andersen, default_increments_1d, default_increments_2d,
    experiment_initial_jump_law, experiment_max_norm, experiment_zoom_infimum, write_cloud_csv, EnumerationInput,
    ExperimentReport, InitialJumpConfig, MaxNormConfig, ZoomConfig,
};
use halfspace::{
    conditioning_transform, split_at_directional_infimum, split_at_max_norm, ConditionedBm, Dir, Direction, Mat, Path,
    PathSampler, Rational, RngStream, Spec, Split,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::*;
use crate::config::{self, Settings};
use crate::output::{emit, path_from_json, path_json, Block};
use crate::CliError;

/// Stream purposes for CLI-level sampling.
const PATH_PURPOSE: u64 = 1;

pub fn run(cli: Cli) -> Result<(), CliError> {
    let loaded = config::load(&cli.global)?;
    let settings = loaded.settings;
    if let Some(n) = settings.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::invalid("threads", e))?;
    }
    let file = loaded.options;
    match cli.command {
        Command::Simulate(o) => simulate(&settings, o.merged(config::options(file)?)),
        Command::Split(o) => split(&settings, o.merged(config::options(file)?)),
        Command::Condition(o) => condition(&settings, o.merged(config::options(file)?)),
        Command::Check(Check::Enum(o)) => check_enum(&settings, o.merged(config::options(file)?)),
        Command::Check(Check::Sparre(o)) => check_sparre(&settings, o.merged(config::options(file)?)),
        Command::Experiment(Experiment::Zoom(o)) => zoom(&settings, o.merged(config::options(file)?)),
        Command::Experiment(Experiment::Maxnorm(o)) => max_norm(&settings, o.merged(config::options(file)?)),
        Command::Experiment(Experiment::InitialJump(o)) => initial_jump(&settings, o.merged(config::options(file)?)),
    }
}

fn need<T>(v: Option<T>, field: &'static str) -> Result<T, CliError> {
    v.ok_or(CliError::Missing(field))
}

fn positive(v: f64, field: &'static str) -> Result<f64, CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(CliError::invalid(field, format!("must be positive, got {v}")))
    }
}

/// The effective configuration echoed into outputs.
fn echo(command: &str, settings: &Settings, options: &impl Serialize) -> Value {
    json!({
        "command": command,
        "seed": settings.seed,
        "format": settings.format,
        "options": options,
    })
}

fn load_spec(arg: SpecArg) -> Result<Spec, CliError> {
    let spec: Spec = match arg {
        SpecArg::Inline(s) => s,
        SpecArg::File(p) => serde_json::from_value(config::read_json(&p)?).map_err(|e| CliError::invalid("spec", e))?,
    };
    Ok(spec.validated()?)
}

fn direction(eta: Vec<f64>, dim: usize) -> Result<Dir, CliError> {
    if eta.len() != dim {
        return Err(CliError::invalid("eta", format!("expected {dim} components, got {}", eta.len())));
    }
    Direction::new(eta).map_err(|e| CliError::invalid("eta", e))
}

fn read_path(file: &FsPath) -> Result<Path, CliError> {
    if file.extension().is_some_and(|e| e == "json") {
        return path_from_json(&config::read_json(file)?);
    }
    let f = std::fs::File::open(file).map_err(|e| CliError::io(file, e))?;
    Path::read_csv(BufReader::new(f), 1.0).map_err(|e| CliError::invalid("path", e))
}

fn path_blocks(settings: &Settings, label: &str, path: &Path, cfg: &Value) -> Block {
    match settings.format {
        Format::Csv => Block::csv_path(label, path),
        Format::Json => Block::json(label, &json!({ "config": cfg, "path": path_json(path) })),
    }
}

fn simulate(settings: &Settings, o: SimulateOpts) -> Result<(), CliError> {
    let cfg = echo("simulate", settings, &o);
    let spec = load_spec(need(o.spec, "spec")?)?;
    let horizon = positive(need(o.horizon, "horizon")?, "horizon")?;
    let step = positive(need(o.step, "step")?, "step")?;
    let start = o.start.unwrap_or_else(|| vec![0.0; spec.dim()]);
    if start.len() != spec.dim() {
        return Err(CliError::invalid("start", format!("expected {} components", spec.dim())));
    }
    let sampler = PathSampler::new(&spec)?;
    let mut rng = RngStream::new(settings.seed, 0).substream(PATH_PURPOSE, 0).rng();
    let path = sampler.sample_from(&start, horizon, step, &mut rng)?;
    emit(settings, "simulate", &[path_blocks(settings, "path", &path, &cfg)])?;
    Ok(())
}

fn split(settings: &Settings, o: SplitOpts) -> Result<(), CliError> {
    let cfg = echo("split", settings, &o);
    let mode = need(o.mode, "mode")?;
    let path = match (o.path, o.spec) {
        (Some(file), None) => read_path(&file)?,
        (None, Some(spec)) => {
            let spec = load_spec(spec)?;
            let horizon = positive(need(o.horizon, "horizon")?, "horizon")?;
            let step = positive(need(o.step, "step")?, "step")?;
            let mut rng = RngStream::new(settings.seed, 0).substream(PATH_PURPOSE, 0).rng();
            PathSampler::new(&spec)?.sample_with(horizon, step, &mut rng)?
        }
        (Some(_), Some(_)) => return Err(CliError::invalid("path", "give either a path file or a spec, not both")),
        (None, None) => return Err(CliError::Missing("path")),
    };
    let (eta, pair): (Dir, Split) = match mode {
        SplitMode::Infimum => {
            let eta = direction(need(o.eta, "eta")?, path.dim())?;
            let pair = split_at_directional_infimum(&path, &eta)?;
            (eta, pair)
        }
        SplitMode::MaxNorm => split_at_max_norm(&path)?,
    };
    let blocks = match settings.format {
        Format::Csv => vec![Block::csv_path("pre", &pair.pre), Block::csv_path("post", &pair.post)],
        Format::Json => vec![Block::json(
            "split",
            &json!({
                "config": cfg,
                "tau_index": pair.tau_index,
                "extremum_point": pair.extremum_point,
                "direction": eta.as_slice(),
                "pre": path_json(&pair.pre),
                "post": path_json(&pair.post),
            }),
        )],
    };
    emit(settings, "split", &blocks)?;
    Ok(())
}

fn condition(settings: &Settings, o: ConditionOpts) -> Result<(), CliError> {
    let cfg = echo("condition", settings, &o);
    let sigma = match (&o.spec, o.sigma1, o.sigma2, o.rho) {
        (Some(spec), None, None, None) => load_spec(spec.clone())?.sigma,
        (None, s1, s2, rho) => {
            let (s1, s2, rho) = (need(s1, "sigma1")?, need(s2, "sigma2")?, need(rho, "rho")?);
            if !(-1.0..=1.0).contains(&rho) {
                return Err(CliError::invalid("rho", format!("must lie in [-1, 1], got {rho}")));
            }
            let c = rho * s1 * s2;
            Mat::from_rows(&[vec![s1 * s1, c], vec![c, s2 * s2]])?
        }
        _ => return Err(CliError::invalid("spec", "give either a spec or sigma1, sigma2 and rho")),
    };
    let eta = direction(need(o.eta, "eta")?, sigma.rows())?;
    if o.print_matrix.unwrap_or(false) {
        let t = conditioning_transform(&sigma, &eta)?;
        let mr = t.mr();
        let block = match settings.format {
            Format::Csv => Block::new("matrix", "csv", matrix_csv(&mr)),
            Format::Json => Block::json("matrix", &json!({ "config": cfg, "m": t.m, "r": t.r, "mr": mr, "scale": t.scale })),
        };
        emit(settings, "condition", &[block])?;
        return Ok(());
    }
    let bm = ConditionedBm::new(&sigma, &eta)?;
    let n_paths = need(o.n_paths.or(Some(1)), "n_paths")?;
    let horizon = positive(need(o.horizon, "horizon")?, "horizon")?;
    let step = positive(need(o.step, "step")?, "step")?;
    let start = o.start.unwrap_or_else(|| vec![0.0; sigma.rows()]);
    if start.len() != sigma.rows() {
        return Err(CliError::invalid("start", format!("expected {} components", sigma.rows())));
    }
    let master = RngStream::new(settings.seed, 0);
    let paths = (0..n_paths)
        .map(|k| bm.sample_from(&start, horizon, step, &mut master.substream(PATH_PURPOSE, k as u64).rng()))
        .collect::<Result<Vec<_>, _>>()?;
    let blocks = match settings.format {
        Format::Csv => paths.iter().enumerate().map(|(k, p)| Block::csv_path(format!("path{k}"), p)).collect(),
        Format::Json => vec![Block::json(
            "paths",
            &json!({ "config": cfg, "paths": paths.iter().map(path_json).collect::<Vec<_>>() }),
        )],
    };
    emit(settings, "condition", &blocks)?;
    Ok(())
}

fn matrix_csv(m: &Mat) -> Vec<u8> {
    let mut out = String::new();
    for i in 0..m.rows() {
        let row: Vec<String> = (0..m.cols()).map(|j| m[(i, j)].to_string()).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out.into_bytes()
}

fn rational(field: &str, s: &str) -> Result<Rational, CliError> {
    let s = s.trim();
    if let Ok(r) = s.parse::<Rational>() {
        return Ok(r);
    }
    let x: f64 = s.parse().map_err(|_| CliError::invalid(field, format!("not a number: {s:?}")))?;
    Rational::approximate_float(x).ok_or_else(|| CliError::invalid(field, format!("no rational close to {x}")))
}

/// Increments file: header `weight,x1,...,xd`, one increment per row.
fn read_increments(file: &FsPath, eta: Option<Vec<String>>) -> Result<EnumerationInput<Rational>, CliError> {
    let text = std::fs::read_to_string(file).map_err(|e| CliError::io(file, e))?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| CliError::invalid("increments", "empty file"))?;
    let dim = header.split(',').count().saturating_sub(1);
    if dim == 0 || !header.starts_with("weight") {
        return Err(CliError::invalid("increments", "expected header weight,x1,...,xd"));
    }
    let (mut increments, mut weights) = (Vec::new(), Vec::new());
    for (k, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != dim + 1 {
            return Err(CliError::invalid("increments", format!("row {} has {} fields, expected {}", k + 1, fields.len(), dim + 1)));
        }
        weights.push(rational("increments.weight", fields[0])?);
        increments.push(fields[1..].iter().map(|f| rational("increments", f)).collect::<Result<Vec<_>, _>>()?);
    }
    let eta = match eta {
        None => Direction::axis(dim, 0),
        Some(v) => {
            if v.len() != dim {
                return Err(CliError::invalid("eta", format!("expected {dim} components, got {}", v.len())));
            }
            let v = v.iter().map(|s| rational("eta", s)).collect::<Result<Vec<_>, _>>()?;
            Direction::new(v).map_err(|e| CliError::invalid("eta", e))?
        }
    };
    Ok(EnumerationInput { increments, weights, eta })
}

fn finish_report(settings: &Settings, mut report: ExperimentReport, cfg: Value) -> Result<ExperimentReport, CliError> {
    report.master_seed = settings.seed;
    if let Value::Object(m) = &mut report.parameters {
        m.insert("cli".into(), cfg);
    } else {
        report.parameters = json!({ "value": report.parameters, "cli": cfg });
    }
    let blocks = match settings.format {
        Format::Json => {
            let mut blocks = vec![Block::new("report", "json", format!("{}\n", report.to_json()).into_bytes())];
            if settings.out.is_some() {
                blocks.extend(extra_blocks(&report));
            }
            blocks
        }
        Format::Csv => {
            let mut blocks = vec![Block::new("summary", "csv", summary_csv(&report))];
            if settings.out.is_some() {
                blocks.push(Block::new("report", "json", format!("{}\n", report.to_json()).into_bytes()));
                blocks.extend(extra_blocks(&report));
            }
            blocks
        }
    };
    emit(settings, &report.name, &blocks)?;
    Ok(report)
}

/// Sample clouds and density grids as CSV blocks.
fn extra_blocks(report: &ExperimentReport) -> Vec<Block> {
    let mut blocks = Vec::new();
    for (label, cloud) in &report.clouds {
        let mut body = Vec::new();
        write_cloud_csv(cloud, &mut body).expect("write to memory");
        blocks.push(Block::new(label.clone(), "csv", body));
    }
    for (label, grid) in &report.grids {
        let mut body = Vec::new();
        grid.write_csv(&mut body).expect("write to memory");
        blocks.push(Block::new(label.clone(), "csv", body));
    }
    blocks
}

/// `key,value` rows: scalar summaries, then `test.<name>.statistic|p_value`.
fn summary_csv(report: &ExperimentReport) -> Vec<u8> {
    let mut out = String::from("key,value\n");
    out.push_str(&format!("total,{}\nretained,{}\n", report.total, report.retained));
    for (k, v) in &report.summaries {
        if let Some(x) = v.as_f64() {
            out.push_str(&format!("{k},{x}\n"));
        } else if let Some(b) = v.as_bool() {
            out.push_str(&format!("{k},{b}\n"));
        }
    }
    for (k, t) in &report.tests {
        out.push_str(&format!("test.{k}.statistic,{}\ntest.{k}.p_value,{}\n", t.statistic, t.p_value));
    }
    if let Some(v) = report.verdict {
        out.push_str(&format!("verdict,{v}\n"));
    }
    out.into_bytes()
}

fn check_enum(settings: &Settings, o: EnumOpts) -> Result<(), CliError> {
    let cfg = echo("check enum", settings, &o);
    let n = need(o.n, "n")?;
    if n == 0 {
        return Err(CliError::invalid("n", "must be at least 1"));
    }
    let kind = o.increments.unwrap_or_else(|| "default1d".into());
    let input = match kind.as_str() {
        "default1d" => default_increments_1d(),
        "default2d" => default_increments_2d(),
        file => read_increments(FsPath::new(file), o.eta)?,
    };
    let report = check_representation_enumeration(&input, n)?;
    let report = finish_report(settings, report, cfg)?;
    match report.verdict {
        Some(false) => Err(CliError::CheckFailed(format!(
            "{} construction/representation pairs differ",
            report.summaries.get("mismatched_pairs").cloned().unwrap_or(Value::Null)
        ))),
        _ => Ok(()),
    }
}

fn check_sparre(settings: &Settings, o: SparreOpts) -> Result<(), CliError> {
    let cfg = echo("check sparre", settings, &o);
    let n_steps = need(o.n_steps.or(Some(10)), "n_steps")?;
    let n_mc = need(o.n_mc.or(Some(100_000)), "n_mc")?;
    let alpha = o.alpha.unwrap_or(1e-3);
    if !(0.0..1.0).contains(&alpha) {
        return Err(CliError::invalid("alpha", format!("must lie in [0, 1), got {alpha}")));
    }
    let mut report = check_sparre_andersen(n_steps, n_mc, &RngStream::new(settings.seed, 0))?;
    let p = report.tests.get("a_plus_vs_argmax").map(|t| t.p_value);
    report.verdict = p.map(|p| p >= alpha);
    report.summary("alpha", alpha);
    let report = finish_report(settings, report, cfg)?;
    match (report.verdict, p) {
        (Some(false), Some(p)) => Err(CliError::CheckFailed(format!("occupation time vs argmax p = {p:.3e} < {alpha}"))),
        _ => Ok(()),
    }
}

fn zoom(settings: &Settings, o: ZoomOpts) -> Result<(), CliError> {
    let cfg = echo("experiment zoom", settings, &o);
    let spec = load_spec(need(o.spec, "spec")?)?;
    let eta = direction(need(o.eta, "eta")?, spec.dim())?;
    let mut zc = ZoomConfig::new(need(o.n, "n")?, need(o.step, "step")?, need(o.n_rep, "n_rep")?);
    if let Some(p) = o.n_perm {
        zc.n_perm = p;
    }
    if let Some(r) = o.reference {
        zc.reference = r.into();
    }
    let report = experiment_zoom_infimum(&spec, &eta, &zc, &RngStream::new(settings.seed, 0))?;
    finish_report(settings, report, cfg)?;
    Ok(())
}

fn max_norm(settings: &Settings, o: MaxNormOpts) -> Result<(), CliError> {
    let cfg = echo("experiment maxnorm", settings, &o);
    let mut mc = MaxNormConfig::new(
        o.sigma1.unwrap_or(1.0),
        o.sigma2.unwrap_or(1.0),
        need(o.rho, "rho")?,
        need(o.n, "n")?,
        need(o.step, "step")?,
        need(o.n_rep, "n_rep")?,
    );
    if let Some(p) = o.n_perm {
        mc.n_perm = p;
    }
    if let Some(k) = o.kde_points {
        mc.kde_points = k;
    }
    if let Some(r) = o.kde_range {
        mc.kde_range = r;
    }
    if let Some(b) = o.bandwidth {
        match b.as_slice() {
            &[hx, hy] => mc.bandwidth = Some((hx, hy)),
            _ => return Err(CliError::invalid("bandwidth", "expected two values hx,hy")),
        }
    }
    let report = experiment_max_norm(&mc, &RngStream::new(settings.seed, 0))?;
    finish_report(settings, report, cfg)?;
    Ok(())
}

fn initial_jump(settings: &Settings, o: InitialJumpOpts) -> Result<(), CliError> {
    let cfg = echo("experiment initial-jump", settings, &o);
    let spec = load_spec(need(o.spec, "spec")?)?;
    let eta = direction(need(o.eta, "eta")?, spec.dim())?;
    let ic = InitialJumpConfig {
        horizon: need(o.horizon, "horizon")?,
        step: need(o.step, "step")?,
        n_rep: need(o.n_rep, "n_rep")?,
    };
    let report = experiment_initial_jump_law(&spec, &eta, &ic, &RngStream::new(settings.seed, 0))?;
    finish_report(settings, report, cfg)?;
    Ok(())
}
