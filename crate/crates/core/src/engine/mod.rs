//! Grid-driven Monte Carlo experiments with deterministic, worker-count
//! independent output.
//!
//! A spec names an experiment and a grid of parameter axes; the grid is the
//! cartesian product of the axes in the fixed order
//! `d, n, alpha, theta, p0, B, reps`. Cells run in that order, replications
//! within a cell run in parallel, and every cell reduces to a handful of
//! [`SummaryRow`]s.

mod experiments;
pub mod figures;
pub mod harness;

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::data::{mix64, RngStream};
use crate::error::{Error, Result};
use crate::regions::optimal_split_proportion_log;

pub use experiments::coverage_suite;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentId {
    RegionsFig1,
    ApproxFig2,
    SplitP0Fig3,
    RatioBoundsFig4,
    RatioProbFig5,
    PowerFig6,
    DoughnutFig7,
    CrossfitP0FigS2,
    IntersectPowerFigS3,
    HybridCasesFigS4,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 10] = [
        ExperimentId::RegionsFig1,
        ExperimentId::ApproxFig2,
        ExperimentId::SplitP0Fig3,
        ExperimentId::RatioBoundsFig4,
        ExperimentId::RatioProbFig5,
        ExperimentId::PowerFig6,
        ExperimentId::DoughnutFig7,
        ExperimentId::CrossfitP0FigS2,
        ExperimentId::IntersectPowerFigS3,
        ExperimentId::HybridCasesFigS4,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentId::RegionsFig1 => "regions_fig1",
            ExperimentId::ApproxFig2 => "approx_fig2",
            ExperimentId::SplitP0Fig3 => "split_p0_fig3",
            ExperimentId::RatioBoundsFig4 => "ratio_bounds_fig4",
            ExperimentId::RatioProbFig5 => "ratio_prob_fig5",
            ExperimentId::PowerFig6 => "power_fig6",
            ExperimentId::DoughnutFig7 => "doughnut_fig7",
            ExperimentId::CrossfitP0FigS2 => "crossfit_p0_figS2",
            ExperimentId::IntersectPowerFigS3 => "intersect_power_figS3",
            ExperimentId::HybridCasesFigS4 => "hybrid_cases_figS4",
        }
    }

    fn ordinal(&self) -> u64 {
        ExperimentId::ALL.iter().position(|e| e == self).unwrap_or(0) as u64
    }
}

/// A split proportion or the keyword `"opt"` for the size-optimal one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum P0Spec {
    Value(f64),
    Keyword(P0Keyword),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum P0Keyword {
    #[serde(rename = "opt")]
    Opt,
}

/// Parameter axes. `theta` is read per experiment: `|theta*|^2` for
/// `power_fig6`, `|theta*|` for the annulus experiments, the coordinate `c`
/// of the test point `c * 1` for `approx_fig2`, and the coordinate `c` of
/// `theta* = c * 1` elsewhere. A non-empty `log_inv_alpha` replaces `alpha`
/// by `exp(-L)`, for levels below the smallest double.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Grid {
    pub d: Vec<usize>,
    pub n: Vec<usize>,
    pub alpha: Vec<f64>,
    pub log_inv_alpha: Vec<f64>,
    pub theta: Vec<f64>,
    pub p0: Vec<P0Spec>,
    #[serde(rename = "B")]
    pub b: Vec<usize>,
    pub reps: Vec<usize>,
}

impl Default for Grid {
    fn default() -> Self {
        Grid {
            d: vec![2],
            n: vec![1000],
            alpha: vec![0.1],
            log_inv_alpha: Vec::new(),
            theta: vec![0.0],
            p0: vec![P0Spec::Value(0.5)],
            b: vec![100],
            reps: vec![1000],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub experiment_id: ExperimentId,
    #[serde(default)]
    pub grid: Grid,
    #[serde(default)]
    pub master_seed: u64,
    /// Worker threads; `None` or `0` uses the ambient pool.
    #[serde(default)]
    pub workers: Option<usize>,
}

impl ExperimentSpec {
    pub fn new(experiment_id: ExperimentId, grid: Grid, master_seed: u64) -> Self {
        ExperimentSpec {
            experiment_id,
            grid,
            master_seed,
            workers: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ExperimentSpec = serde_json::from_str(text)?;
        spec.cells()?;
        Ok(spec)
    }

    /// Expands the grid and checks every cell against the experiment's
    /// preconditions.
    pub fn cells(&self) -> Result<Vec<Cell>> {
        let g = &self.grid;
        let levels: Vec<(f64, f64)> = if g.log_inv_alpha.is_empty() {
            g.alpha.iter().map(|&a| (a, (1.0 / a).ln())).collect()
        } else {
            g.log_inv_alpha.iter().map(|&l| ((-l).exp(), l)).collect()
        };
        for (name, len) in [
            ("d", g.d.len()),
            ("n", g.n.len()),
            ("alpha", levels.len()),
            ("theta", g.theta.len()),
            ("p0", g.p0.len()),
            ("B", g.b.len()),
            ("reps", g.reps.len()),
        ] {
            if len == 0 {
                return Err(Error::domain(format!("grid axis `{name}` is empty")));
            }
        }
        let mut cells = Vec::new();
        for &d in &g.d {
            for &n in &g.n {
                for &(alpha, log_inv_alpha) in &levels {
                    for &theta in &g.theta {
                        for &p0 in &g.p0 {
                            for &b in &g.b {
                                for &reps in &g.reps {
                                    let cell = Cell {
                                        index: cells.len(),
                                        d,
                                        n,
                                        alpha,
                                        log_inv_alpha,
                                        theta,
                                        p0: resolve_p0(p0, log_inv_alpha, d)?,
                                        b,
                                        reps,
                                    };
                                    experiments::validate(self.experiment_id, &cell)?;
                                    cells.push(cell);
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(cells)
    }
}

fn resolve_p0(p0: P0Spec, log_inv_alpha: f64, d: usize) -> Result<f64> {
    match p0 {
        P0Spec::Value(v) if v > 0.0 && v < 1.0 => Ok(v),
        P0Spec::Value(v) => Err(Error::domain(format!("p0 must lie in (0, 1), got {v}"))),
        P0Spec::Keyword(P0Keyword::Opt) => optimal_split_proportion_log(log_inv_alpha, d.max(1)),
    }
}

/// One point of an expanded grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub index: usize,
    pub d: usize,
    pub n: usize,
    pub alpha: f64,
    pub log_inv_alpha: f64,
    pub theta: f64,
    pub p0: f64,
    pub b: usize,
    pub reps: usize,
}

impl Cell {
    /// Stream key from the cell's parameters, ignoring `theta` and `p0` when
    /// `share_theta_p0` so that those axes reuse the same datasets.
    fn stream_key(&self, id: ExperimentId, share_theta_p0: bool) -> u64 {
        let mut parts = vec![
            id.ordinal(),
            self.d as u64,
            self.n as u64,
            self.log_inv_alpha.to_bits(),
            self.b as u64,
        ];
        if !share_theta_p0 {
            parts.push(self.theta.to_bits());
            parts.push(self.p0.to_bits());
        }
        parts.iter().fold(0x5EED, |h, &p| mix64(h ^ mix64(p)))
    }

    /// Stream for replication `rep`.
    fn rep_stream(&self, master_seed: u64, key: u64, rep: u64) -> RngStream {
        RngStream::for_replication(master_seed, key, rep)
    }
}

/// One aggregated output line.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub experiment: String,
    pub cell: usize,
    pub metric: String,
    pub d: usize,
    pub n: usize,
    pub alpha: f64,
    pub theta: f64,
    pub p0: f64,
    pub b: usize,
    pub reps: usize,
    pub estimate: f64,
    pub stderr: f64,
    pub reps_used: u64,
    pub note: String,
}

impl SummaryRow {
    fn new(experiment: &str, cell: &Cell, metric: &str, estimate: f64, stderr: f64, reps_used: u64) -> Self {
        SummaryRow {
            experiment: experiment.to_string(),
            cell: cell.index,
            metric: metric.to_string(),
            d: cell.d,
            n: cell.n,
            alpha: cell.alpha,
            theta: cell.theta,
            p0: cell.p0,
            b: cell.b,
            reps: cell.reps,
            estimate,
            stderr,
            reps_used,
            note: String::new(),
        }
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }
}

pub const SUMMARY_HEADER: [&str; 14] = [
    "experiment", "cell", "metric", "d", "n", "alpha", "theta", "p0", "B", "reps", "estimate", "stderr",
    "reps_used", "note",
];

pub(crate) fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

pub fn write_summary_csv<W: Write>(rows: &[SummaryRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(SUMMARY_HEADER)?;
    for r in rows {
        w.write_record([
            r.experiment.clone(),
            r.cell.to_string(),
            r.metric.clone(),
            r.d.to_string(),
            r.n.to_string(),
            fmt_f64(r.alpha),
            fmt_f64(r.theta),
            fmt_f64(r.p0),
            r.b.to_string(),
            r.reps.to_string(),
            fmt_f64(r.estimate),
            fmt_f64(r.stderr),
            r.reps_used.to_string(),
            r.note.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Raw per-replication values, one `(cell, rep, metric, value)` per line.
pub struct RawSink<'a> {
    writer: csv::Writer<&'a mut (dyn Write + Send)>,
}

impl<'a> RawSink<'a> {
    pub fn new(writer: &'a mut (dyn Write + Send)) -> Result<Self> {
        let mut writer = csv::Writer::from_writer(writer);
        writer.write_record(["cell", "rep", "metric", "value"])?;
        Ok(RawSink { writer })
    }

    fn record(&mut self, cell: usize, rep: u64, names: &[&str], values: &[f64]) -> Result<()> {
        for (name, v) in names.iter().zip(values) {
            self.writer
                .write_record([cell.to_string(), rep.to_string(), name.to_string(), fmt_f64(*v)])?;
        }
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.writer.flush()?;
        Ok(())
    }
}

/// Runs every cell of `spec`. A cell that fails numerically yields a single
/// `error` row carrying the message; the rest of the grid still runs.
pub fn run(spec: &ExperimentSpec) -> Result<Vec<SummaryRow>> {
    run_inner(spec, None)
}

/// [`run`] that also streams every replication's metrics to `raw`.
pub fn run_with_raw(spec: &ExperimentSpec, raw: &mut RawSink<'_>) -> Result<Vec<SummaryRow>> {
    run_inner(spec, Some(raw))
}

fn run_inner(spec: &ExperimentSpec, mut raw: Option<&mut RawSink<'_>>) -> Result<Vec<SummaryRow>> {
    let cells = spec.cells()?;
    let body = |raw: &mut Option<&mut RawSink<'_>>| -> Result<Vec<SummaryRow>> {
        let mut rows = Vec::new();
        for cell in &cells {
            match experiments::run_cell(spec.experiment_id, cell, spec.master_seed, raw.as_deref_mut()) {
                Ok(mut r) => rows.append(&mut r),
                Err(e @ (Error::Io(_) | Error::Csv(_))) => return Err(e),
                Err(e) => rows.push(
                    SummaryRow::new(spec.experiment_id.as_str(), cell, "error", f64::NAN, f64::NAN, 0).with_note(e.to_string()),
                ),
            }
        }
        Ok(rows)
    };
    match spec.workers {
        Some(w) if w > 0 => harness::with_workers(w, || body(&mut raw))?,
        _ => body(&mut raw),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_spec_with_opt_p0() {
        let spec = ExperimentSpec::from_json(
            r#"{"experiment_id": "split_p0_fig3",
                "grid": {"d": [1, 100], "p0": [0.5, "opt"], "reps": [10]},
                "master_seed": 7}"#,
        )
        .unwrap();
        let cells = spec.cells().unwrap();
        assert_eq!(cells.len(), 4);
        assert_eq!(cells[0].p0, 0.5);
        assert!((cells[1].p0 - 0.7030459229173989).abs() < 1e-12);
        assert_eq!(cells[3].d, 100);
        assert_eq!(cells[3].index, 3);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(ExperimentSpec::from_json(r#"{"experiment_id": "nope"}"#).is_err());
        assert!(ExperimentSpec::from_json(r#"{"experiment_id": "power_fig6", "grid": {"bogus": [1]}}"#).is_err());
        assert!(ExperimentSpec::from_json(r#"{"experiment_id": "power_fig6", "grid": {"alpha": [1.5]}}"#).is_err());
        assert!(ExperimentSpec::from_json(r#"{"experiment_id": "power_fig6", "grid": {"reps": [0]}}"#).is_err());
        assert!(ExperimentSpec::from_json(r#"{"experiment_id": "regions_fig1", "grid": {"d": [3]}}"#).is_err());
        assert!(ExperimentSpec::from_json(r#"{"experiment_id": "doughnut_fig7", "grid": {"n": [999]}}"#).is_err());
        assert!(ExperimentSpec::from_json(r#"{"experiment_id": "power_fig6", "grid": {"n": []}}"#).is_err());
    }

    #[test]
    fn log_inv_alpha_axis_overrides_alpha() {
        let spec = ExperimentSpec::from_json(
            r#"{"experiment_id": "ratio_bounds_fig4", "grid": {"d": [10], "log_inv_alpha": [1e8, 1.0]}}"#,
        )
        .unwrap();
        let cells = spec.cells().unwrap();
        assert_eq!(cells[0].alpha, 0.0);
        assert_eq!(cells[0].log_inv_alpha, 1e8);
        assert!((cells[1].alpha - (-1f64).exp()).abs() < 1e-16);
    }

    #[test]
    fn summary_csv_layout() {
        let spec = ExperimentSpec::new(ExperimentId::RatioBoundsFig4, Grid::default(), 0);
        let rows = run(&spec).unwrap();
        let mut buf = Vec::new();
        write_summary_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "experiment,cell,metric,d,n,alpha,theta,p0,B,reps,estimate,stderr,reps_used,note"
        );
        assert!(lines.next().unwrap().starts_with("ratio_bounds_fig4,0,expectation,2,1000,0.1,"));
    }
}
