//! Desk-scale default grids for each figure and the plotting-ready CSV
//! layouts derived from summary rows.
//!
//! | figure | experiment | desk default | full scale |
//! |---|---|---|---|
//! | 1 | `regions_fig1` | d=2, n=1000, B=100, 6 reps | same |
//! | 2 | `approx_fig2` | d=1, n=1000, B=20000, c in [-0.1, 0.1] | `--B 100000`, also `--d 20` |
//! | 3 | `split_p0_fig3` | d in {1,2,10,100}, p0 in {0.3..0.9, opt}, 1000 reps | same |
//! | 4 | `ratio_bounds_fig4` | d in {10, 100000}, alpha = exp(-10^x), x = 8..0 | same |
//! | 5 | `ratio_prob_fig5` | d in {2,10,100}, n=1000, 10000 reps | same |
//! | 6 | `power_fig6` | d=2, n=1000, \|theta\|^2 in [0, 0.06], 1000 reps | `--reps 5000` |
//! | 7 | `doughnut_fig7` | d in {2,10}, n=1000, B=100, 200 reps | `--d 2,10,100,1000 --reps 1000` |
//! | S2 | `crossfit_p0_figS2` | d=2, p0 in {0.1,0.3,0.5,0.7,0.9}, 20 reps | same |
//! | S3 | `intersect_power_figS3` | d in {2,10,100,1000}, \|theta\| in [0, 1.6], 2000 reps | `--reps 1000` |
//! | S4 | `hybrid_cases_figS4` | d in {2,10}, B=100, 100 reps | `--d 2,10,100,1000 --reps 1000` |

use std::collections::BTreeMap;
use std::io::Write;
use std::str::FromStr;

use super::{fmt_f64, write_summary_csv, ExperimentId, ExperimentSpec, Grid, P0Keyword, P0Spec, SummaryRow};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureId {
    F1,
    F2,
    F3,
    F4,
    F5,
    F6,
    F7,
    S2,
    S3,
    S4,
}

impl FromStr for FigureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_uppercase().as_str() {
            "1" => FigureId::F1,
            "2" => FigureId::F2,
            "3" => FigureId::F3,
            "4" => FigureId::F4,
            "5" => FigureId::F5,
            "6" => FigureId::F6,
            "7" => FigureId::F7,
            "S2" => FigureId::S2,
            "S3" => FigureId::S3,
            "S4" => FigureId::S4,
            other => {
                return Err(Error::domain(format!(
                    "unknown figure `{other}`; expected one of 1..7, S2, S3, S4"
                )))
            }
        })
    }
}

impl FigureId {
    pub fn experiment(&self) -> ExperimentId {
        match self {
            FigureId::F1 => ExperimentId::RegionsFig1,
            FigureId::F2 => ExperimentId::ApproxFig2,
            FigureId::F3 => ExperimentId::SplitP0Fig3,
            FigureId::F4 => ExperimentId::RatioBoundsFig4,
            FigureId::F5 => ExperimentId::RatioProbFig5,
            FigureId::F6 => ExperimentId::PowerFig6,
            FigureId::F7 => ExperimentId::DoughnutFig7,
            FigureId::S2 => ExperimentId::CrossfitP0FigS2,
            FigureId::S3 => ExperimentId::IntersectPowerFigS3,
            FigureId::S4 => ExperimentId::HybridCasesFigS4,
        }
    }
}

/// Overrides applied on top of a figure's default grid.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FigureOverrides {
    pub d: Option<Vec<usize>>,
    pub n: Option<usize>,
    pub alpha: Option<f64>,
    pub p0: Option<f64>,
    pub b: Option<usize>,
    pub reps: Option<usize>,
}

fn steps(from: f64, to: f64, step: f64) -> Vec<f64> {
    let count = ((to - from) / step).round() as i64;
    (0..=count).map(|i| from + i as f64 * step).collect()
}

/// Default grid of `figure`, with overrides applied.
pub fn figure_spec(figure: FigureId, overrides: &FigureOverrides, master_seed: u64) -> ExperimentSpec {
    let mut g = Grid::default();
    match figure {
        FigureId::F1 => {
            g.reps = vec![6];
        }
        FigureId::F2 => {
            g.d = vec![1];
            g.b = vec![20_000];
            g.theta = steps(-0.1, 0.1, 0.01);
            g.reps = vec![1];
        }
        FigureId::F3 => {
            g.d = vec![1, 2, 10, 100];
            g.p0 = steps(0.3, 0.9, 0.1).into_iter().map(P0Spec::Value).collect();
            g.p0.push(P0Spec::Keyword(P0Keyword::Opt));
        }
        FigureId::F4 => {
            g.d = vec![10, 100_000];
            g.log_inv_alpha = steps(0.0, 8.0, 0.5).into_iter().rev().map(|x| 10f64.powf(x)).collect();
            g.reps = vec![1];
        }
        FigureId::F5 => {
            g.d = vec![2, 10, 100];
            g.reps = vec![10_000];
        }
        FigureId::F6 => {
            g.theta = steps(0.0, 0.06, 0.005);
        }
        FigureId::F7 => {
            g.d = vec![2, 10];
            g.theta = vec![0.0, 0.1, 0.2, 0.3, 0.4, 1.1, 1.2, 1.3, 1.4, 1.5];
            g.reps = vec![200];
        }
        FigureId::S2 => {
            g.p0 = [0.1, 0.3, 0.5, 0.7, 0.9].into_iter().map(P0Spec::Value).collect();
            g.reps = vec![20];
        }
        FigureId::S3 => {
            g.d = vec![2, 10, 100, 1000];
            g.theta = steps(0.0, 1.6, 0.1);
            g.reps = vec![2000];
        }
        FigureId::S4 => {
            g.d = vec![2, 10];
            g.theta = steps(0.0, 1.5, 0.1);
            g.reps = vec![100];
        }
    }
    if let Some(d) = &overrides.d {
        g.d = d.clone();
    }
    if let Some(n) = overrides.n {
        g.n = vec![n];
    }
    if let Some(a) = overrides.alpha {
        g.alpha = vec![a];
        g.log_inv_alpha.clear();
    }
    if let Some(p0) = overrides.p0 {
        g.p0 = vec![P0Spec::Value(p0)];
    }
    if let Some(b) = overrides.b {
        g.b = vec![b];
    }
    if let Some(reps) = overrides.reps {
        g.reps = vec![reps];
    }
    ExperimentSpec::new(figure.experiment(), g, master_seed)
}

/// Rows of each cell keyed by metric, in cell order.
fn by_cell(rows: &[SummaryRow]) -> BTreeMap<usize, BTreeMap<&str, &SummaryRow>> {
    let mut cells: BTreeMap<usize, BTreeMap<&str, &SummaryRow>> = BTreeMap::new();
    for r in rows {
        cells.entry(r.cell).or_default().insert(r.metric.as_str(), r);
    }
    cells
}

/// Writes the plotting CSV for `figure`. Figures without a dedicated layout
/// use the summary layout.
pub fn write_figure_csv<W: Write>(figure: FigureId, rows: &[SummaryRow], writer: W) -> Result<()> {
    match figure {
        FigureId::F2 => write_fig2(rows, writer),
        FigureId::F4 => write_fig4(rows, writer),
        FigureId::F6 => write_power(rows, writer),
        FigureId::F7 | FigureId::S4 => write_doughnut(rows, writer),
        _ => write_summary_csv(rows, writer),
    }
}

fn write_fig2<W: Write>(rows: &[SummaryRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["d", "n", "B", "c", "simulated_mean", "analytic", "ratio", "scaled_distance"])?;
    for metrics in by_cell(rows).values() {
        let (Some(sim), Some(an), Some(ratio), Some(dist)) = (
            metrics.get("simulated_mean"),
            metrics.get("analytic"),
            metrics.get("ratio"),
            metrics.get("scaled_distance"),
        ) else {
            continue;
        };
        w.write_record([
            sim.d.to_string(),
            sim.n.to_string(),
            sim.b.to_string(),
            fmt_f64(sim.theta),
            fmt_f64(sim.estimate),
            fmt_f64(an.estimate),
            fmt_f64(ratio.estimate),
            fmt_f64(dist.estimate),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn write_fig4<W: Write>(rows: &[SummaryRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["d", "alpha", "log_inv_alpha", "expectation", "lower", "upper"])?;
    for metrics in by_cell(rows).values() {
        let (Some(e), Some(lo), Some(up)) = (metrics.get("expectation"), metrics.get("lower"), metrics.get("upper"))
        else {
            continue;
        };
        let log_inv_alpha = if e.alpha > 0.0 { (1.0 / e.alpha).ln() } else { f64::INFINITY };
        w.write_record([
            e.d.to_string(),
            fmt_f64(e.alpha),
            fmt_f64(log_inv_alpha),
            fmt_f64(e.estimate),
            fmt_f64(lo.estimate),
            fmt_f64(up.estimate),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn write_power<W: Write>(rows: &[SummaryRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["test", "d", "n", "alpha", "theta_sq_norm", "power", "stderr", "method"])?;
    for r in rows {
        let (test, method) = match r.metric.as_str() {
            "classical_exact" => ("classical", "exact_noncentral"),
            "classical_approx" => ("classical", "normal_approx"),
            "limiting_subsampling_exact" => ("limiting_subsampling", "exact_noncentral"),
            "limiting_subsampling_approx" => ("limiting_subsampling", "normal_approx"),
            "split" => ("split", "monte_carlo"),
            "crossfit" => ("crossfit", "monte_carlo"),
            "subsampling" => ("subsampling", "monte_carlo"),
            _ => continue,
        };
        w.write_record([
            test.to_string(),
            r.d.to_string(),
            r.n.to_string(),
            fmt_f64(r.alpha),
            fmt_f64(r.theta),
            fmt_f64(r.estimate),
            fmt_f64(r.stderr),
            method.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn write_doughnut<W: Write>(rows: &[SummaryRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "method", "d", "n", "alpha", "theta_norm", "B", "reps", "power", "stderr", "frac_split_case",
        "frac_unit_case", "frac_ripr_case",
    ])?;
    for metrics in by_cell(rows).values() {
        let fracs: Vec<String> = ["frac_split_case", "frac_unit_case", "frac_ripr_case"]
            .iter()
            .map(|k| metrics.get(k).map_or(String::new(), |r| fmt_f64(r.estimate)))
            .collect();
        let split_fracs = ["1.0".to_string(), "0.0".to_string(), "0.0".to_string()];
        let blank = [String::new(), String::new(), String::new()];
        for (method, fr) in [
            ("intersection", &blank[..]),
            ("intersection_exact", &blank[..]),
            ("subsampled_split", &split_fracs[..]),
            ("subsampled_hybrid", &fracs[..]),
        ] {
            let Some(r) = metrics.get(method) else { continue };
            let mut rec = vec![
                method.to_string(),
                r.d.to_string(),
                r.n.to_string(),
                fmt_f64(r.alpha),
                fmt_f64(r.theta),
                r.b.to_string(),
                r.reps.to_string(),
                fmt_f64(r.estimate),
                fmt_f64(r.stderr),
            ];
            rec.extend(fr.iter().cloned());
            w.write_record(&rec)?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn figure_ids_parse() {
        assert_eq!("s3".parse::<FigureId>().unwrap(), FigureId::S3);
        assert_eq!("7".parse::<FigureId>().unwrap(), FigureId::F7);
        assert!("8".parse::<FigureId>().is_err());
    }

    #[test]
    fn every_default_grid_is_valid() {
        for f in ["1", "2", "3", "4", "5", "6", "7", "S2", "S3", "S4"] {
            let spec = figure_spec(f.parse().unwrap(), &FigureOverrides::default(), 0);
            spec.cells().unwrap_or_else(|e| panic!("figure {f}: {e}"));
        }
    }

    #[test]
    fn fig4_grid_spans_eight_decades() {
        let spec = figure_spec(FigureId::F4, &FigureOverrides::default(), 0);
        let l = &spec.grid.log_inv_alpha;
        assert_eq!(l.len(), 17);
        assert_eq!(l[0], 1e8);
        assert_eq!(*l.last().unwrap(), 1.0);
    }

    #[test]
    fn fig4_pivot() {
        let mut spec = figure_spec(FigureId::F4, &FigureOverrides::default(), 0);
        spec.grid.d = vec![10];
        let rows = super::super::run(&spec).unwrap();
        let mut buf = Vec::new();
        write_figure_csv(FigureId::F4, &rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 18);
        assert!(text.starts_with("d,alpha,log_inv_alpha,expectation,lower,upper\n10,0.0,inf,NaN,"));
    }
}
