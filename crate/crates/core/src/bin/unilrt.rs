//! Command-line front end: regions for one dataset, figure data, closed-form
//! formulas, spec-driven experiments and the coverage suite.
//!
//! Exit codes: 0 success, 2 usage or validation failure, 3 numerical failure.
//! Output files are written only after the whole command succeeds.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use unilrt::data::{read_sample_csv, sample_gaussian, split_means, subsample_means, RngStream, SplitScratch};
use unilrt::doughnut::{intersection_power_exact, AnnulusNull};
use unilrt::engine::figures::{figure_spec, write_figure_csv, FigureId, FigureOverrides};
use unilrt::engine::harness::with_workers;
use unilrt::engine::{coverage_suite, run, run_with_raw, write_summary_csv, ExperimentSpec, RawSink};
use unilrt::power::{power_classical, power_limiting_subsampling, ClosedForm};
use unilrt::regions::{
    classical_region, expected_sq_radius_split, limiting_subsampling_region, optimal_split_proportion_log,
    polygon_area, prob_ratio_leq4_bounds, ratio_bounds_log, ratio_expected_split_vs_classical,
    region_boundary_2d, split_region, write_boundary_csv, write_regions_csv, CrossfitRegion, SubsamplingRegion,
};
use unilrt::specfun::{chi2_upper_quantile, noncentral_chi2_cdf};
use unilrt::{Error, Result};

#[derive(Parser)]
#[command(name = "unilrt", version, about = "Universal likelihood-ratio inference for a Gaussian mean")]
struct Cli {
    /// Worker threads for Monte Carlo work; never changes the output.
    #[arg(long, global = true, env = "UNILRT_WORKERS")]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Confidence sets for one simulated or imported dataset.
    Region(RegionArgs),
    /// Plotting data for one figure at desk scale.
    Figure(FigureArgs),
    /// Evaluate a closed-form expression.
    Formula(FormulaArgs),
    /// Run an experiment described by a JSON spec file.
    Run(RunArgs),
    /// Coverage of every confidence set.
    Coverage(CoverageArgs),
}

#[derive(Args)]
struct RegionArgs {
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    d: usize,
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.5)]
    p0: f64,
    #[arg(long = "B", default_value_t = 100)]
    b: usize,
    /// True mean `c * 1` of the simulated sample.
    #[arg(long, default_value_t = 0.0)]
    theta: f64,
    /// Read observations from a CSV file (header row, one column per coordinate).
    #[arg(long)]
    import: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct FigureArgs {
    /// 1..7, S2, S3 or S4.
    id: String,
    /// Dimensions (comma separated).
    #[arg(long, value_delimiter = ',')]
    d: Option<Vec<usize>>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    p0: Option<f64>,
    #[arg(long = "B")]
    b: Option<usize>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file (standard output when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormulaName {
    P0star,
    R,
    Ratio,
    RatioBounds,
    ProbBounds,
    ClassicalPower,
    SubsamplingPower,
    IntersectPower,
    Chi2Quantile,
    NoncentralCdf,
}

#[derive(Args)]
struct FormulaArgs {
    name: FormulaName,
    #[arg(long)]
    alpha: Option<f64>,
    /// `ln(1/alpha)`, for levels below the smallest double.
    #[arg(long)]
    log_inv_alpha: Option<f64>,
    #[arg(long, default_value_t = 2)]
    d: usize,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 0.5)]
    p0: f64,
    #[arg(long, default_value_t = 0.0)]
    theta_sq_norm: f64,
    #[arg(long, default_value_t = 0.0)]
    theta_norm: f64,
    #[arg(long, default_value_t = 0.0)]
    x: f64,
    #[arg(long, default_value_t = 0.0)]
    lambda: f64,
    /// Normal approximation instead of the exact series (power formulas).
    #[arg(long)]
    approx: bool,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    spec_file: PathBuf,
    /// Override the spec's master seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write every replication's metrics to this file.
    #[arg(long)]
    dump_raw: Option<PathBuf>,
}

#[derive(Args)]
struct CoverageArgs {
    #[arg(long, value_delimiter = ',', default_values_t = vec![1, 2, 10])]
    d: Vec<usize>,
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    #[arg(long, default_value_t = 1000)]
    reps: usize,
    #[arg(long = "B", default_value_t = 50)]
    b: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let workers = cli.workers.unwrap_or(0);
    let outcome = with_workers(workers, || dispatch(cli.command)).and_then(|r| r);
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Region(a) => cmd_region(a),
        Command::Figure(a) => cmd_figure(a),
        Command::Formula(a) => cmd_formula(a),
        Command::Run(a) => cmd_run(a),
        Command::Coverage(a) => cmd_coverage(a),
    }
}

/// Writes `bytes` to `path`, or to standard output when `path` is absent.
fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => fs::write(p, bytes)?,
        None => io::stdout().write_all(bytes)?,
    }
    Ok(())
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("--{name} must lie in (0, 1), got {v}")))
    }
}

fn cmd_region(a: RegionArgs) -> Result<()> {
    check_unit("alpha", a.alpha)?;
    check_unit("p0", a.p0)?;
    if a.b == 0 {
        return Err(Error::Domain("--B must be >= 1".into()));
    }
    let sample = match &a.import {
        Some(path) => read_sample_csv(fs::File::open(path)?)?,
        None => sample_gaussian(a.n, a.d, &vec![a.theta; a.d], &mut RngStream::new(a.seed, 0))?,
    };
    let (n, d) = (sample.n(), sample.d());
    let rng = RngStream::new(a.seed, 1);
    let pair = split_means(&sample, a.p0, &mut rng.substream(0), &mut SplitScratch::default())?;
    let splits = subsample_means(&sample, a.b, a.p0, &rng.substream(1))?;
    let classical = classical_region(&sample, a.alpha)?;
    let split = split_region(&pair, n, a.alpha)?;
    let limiting = limiting_subsampling_region(&sample, a.alpha)?;

    let mut files: Vec<(&str, Vec<u8>)> = Vec::new();
    let mut buf = Vec::new();
    write_regions_csv(&[classical.clone(), split.clone(), limiting.clone()], &mut buf)?;
    files.push(("regions.csv", buf));
    let mut summary = format!(
        "n={n} d={d} alpha={}\nclassical sq_radius={}\nsplit sq_radius={}\nlimiting_subsampling sq_radius={}\n",
        a.alpha, classical.sq_radius, split.sq_radius, limiting.sq_radius
    );
    if d == 2 {
        let center = [sample.mean()[0], sample.mean()[1]];
        let search = 10.0 * split.radius();
        let cf = CrossfitRegion { pair: &pair, n, alpha: a.alpha };
        let ss = SubsamplingRegion { splits: &splits, n, alpha: a.alpha };
        for (name, boundary) in [
            ("crossfit", region_boundary_2d(|t| cf.contains(t), center, 180, search, 1e-9)?),
            ("subsampling", region_boundary_2d(|t| ss.contains(t), center, 180, search, 1e-9)?),
        ] {
            let mut buf = Vec::new();
            write_boundary_csv(&boundary, &mut buf)?;
            files.push((if name == "crossfit" { "crossfit_boundary.csv" } else { "subsampling_boundary.csv" }, buf));
            summary.push_str(&format!(
                "{name} polygon area={} (rays without boundary: {})\n",
                polygon_area(&boundary.polygon()),
                boundary.failures()
            ));
        }
        summary.push_str(&format!("split area={}\n", std::f64::consts::PI * split.sq_radius));
    } else {
        log::warn!("boundary polygons are only produced for d = 2");
    }
    fs::create_dir_all(&a.out)?;
    for (name, bytes) in files {
        fs::write(a.out.join(name), bytes)?;
    }
    print!("{summary}");
    Ok(())
}

fn cmd_figure(a: FigureArgs) -> Result<()> {
    let figure: FigureId = a.id.parse()?;
    let overrides = FigureOverrides {
        d: a.d,
        n: a.n,
        alpha: a.alpha,
        p0: a.p0,
        b: a.b,
        reps: a.reps,
    };
    let spec = figure_spec(figure, &overrides, a.seed);
    let rows = run(&spec)?;
    for r in rows.iter().filter(|r| r.metric == "error") {
        log::warn!("cell {} failed: {}", r.cell, r.note);
    }
    let mut buf = Vec::new();
    write_figure_csv(figure, &rows, &mut buf)?;
    emit(a.out.as_deref(), &buf)
}

fn cmd_run(a: RunArgs) -> Result<()> {
    let mut spec = ExperimentSpec::from_json(&fs::read_to_string(&a.spec_file)?)?;
    if let Some(seed) = a.seed {
        spec.master_seed = seed;
    }
    let mut raw_buf = Vec::new();
    let rows = match a.dump_raw {
        Some(_) => {
            let mut sink = RawSink::new(&mut raw_buf)?;
            let rows = run_with_raw(&spec, &mut sink)?;
            sink.finish()?;
            rows
        }
        None => run(&spec)?,
    };
    let mut buf = Vec::new();
    write_summary_csv(&rows, &mut buf)?;
    if let Some(path) = &a.dump_raw {
        fs::write(path, raw_buf)?;
    }
    emit(a.out.as_deref(), &buf)
}

fn cmd_coverage(a: CoverageArgs) -> Result<()> {
    check_unit("alpha", a.alpha)?;
    let rows = coverage_suite(&a.d, a.n, a.alpha, a.reps, a.b, a.seed)?;
    let mut buf = Vec::new();
    write_summary_csv(&rows, &mut buf)?;
    emit(a.out.as_deref(), &buf)
}

/// `%.12g`-style formatting.
fn sig12(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let exp = x.abs().log10().floor() as i32;
    let trim = |s: String| {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    };
    if (-5..12).contains(&exp) {
        trim(format!("{:.*}", (11 - exp).max(0) as usize, x))
    } else {
        let s = format!("{x:.11e}");
        let (mantissa, e) = s.split_once('e').unwrap_or((&s, "0"));
        format!("{}e{e}", trim(mantissa.to_string()))
    }
}

fn cmd_formula(a: FormulaArgs) -> Result<()> {
    let l = match (a.log_inv_alpha, a.alpha) {
        (Some(l), _) => l,
        (None, Some(alpha)) => {
            check_unit("alpha", alpha)?;
            (1.0 / alpha).ln()
        }
        (None, None) => 10f64.ln(),
    };
    let alpha = (-l).exp();
    let form = if a.approx { ClosedForm::Approx } else { ClosedForm::Exact };
    let values: Vec<(&str, Value)> = match a.name {
        FormulaName::P0star => vec![("value", json!(optimal_split_proportion_log(l, a.d)?))],
        FormulaName::R => vec![("value", json!(expected_sq_radius_split(alpha, a.d, a.n, a.p0)?))],
        FormulaName::Ratio => vec![("value", json!(ratio_expected_split_vs_classical(alpha, a.d)?))],
        FormulaName::RatioBounds => {
            let b = ratio_bounds_log(l, a.d)?;
            vec![("lower", json!(b.lower)), ("upper", json!(b.upper)), ("domain_ok", json!(b.domain_ok))]
        }
        FormulaName::ProbBounds => {
            let b = prob_ratio_leq4_bounds(alpha, a.d)?;
            let lower = if b.lower.is_nan() { Value::Null } else { json!(b.lower) };
            vec![("lower", lower), ("upper", json!(b.upper)), ("condition_ok", json!(b.condition_ok))]
        }
        FormulaName::ClassicalPower => {
            vec![("value", json!(power_classical(a.theta_sq_norm, a.n, a.d, alpha, form)?.value))]
        }
        FormulaName::SubsamplingPower => {
            vec![("value", json!(power_limiting_subsampling(a.theta_sq_norm, a.n, a.d, alpha, form)?.value))]
        }
        FormulaName::IntersectPower => vec![(
            "value",
            json!(intersection_power_exact(a.theta_norm, a.n, a.d, alpha, &AnnulusNull::default())?),
        )],
        FormulaName::Chi2Quantile => vec![("value", json!(chi2_upper_quantile(alpha, a.d as u32)?))],
        FormulaName::NoncentralCdf => vec![("value", json!(noncentral_chi2_cdf(a.x, a.d as u32, a.lambda)?))],
    };
    let name = a.name.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default();
    let text = if a.json {
        let mut map = Map::new();
        map.insert("formula".into(), json!(name));
        map.insert("values".into(), Value::Object(values.into_iter().map(|(k, v)| (k.to_string(), v)).collect()));
        format!("{}\n", Value::Object(map))
    } else {
        let show = |v: &Value| match v {
            Value::Number(x) => sig12(x.as_f64().unwrap_or(f64::NAN)),
            Value::Null => "nan".to_string(),
            other => other.to_string(),
        };
        if let [(_, v)] = values.as_slice() {
            format!("{}\n", show(v))
        } else {
            values.iter().map(|(k, v)| format!("{k}={}\n", show(v))).collect()
        }
    };
    io::stdout().write_all(text.as_bytes())?;
    Ok(())
}
