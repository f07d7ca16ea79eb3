//! Per-experiment replication jobs.

use std::f64::consts::PI;

use super::harness::{replicate, replicate_with_raw, Accumulator};
use super::{Cell, ExperimentId, RawSink, SummaryRow};
use crate::data::{
    d0_size, sample_gaussian, sample_split_means, split_means, subsample_means, RngStream, SampleSet, SplitScratch,
};
use crate::doughnut::{doughnut_replication, intersection_power_exact, intersection_test_mean, AnnulusNull};
use crate::error::{Error, Result};
use crate::logspace::sq_dist;
use crate::power::{null_exclusions, power_classical, power_limiting_subsampling, ClosedForm};
use crate::regions::{
    classical_region, crossfit_log_statistic, expected_sq_radius_split, limiting_subsampling_log_statistic,
    limiting_subsampling_region, polygon_area, polygon_sq_diameter, prob_ratio_leq4_bounds, ratio_bounds_log,
    region_boundary_2d, split_region, subsampling_log_statistic, CrossfitRegion, SubsamplingRegion,
};
use crate::specfun::{chi2_upper_quantile, MAX_LOG_INV_ALPHA};

/// Rays used for two-dimensional boundary extraction.
const RAYS: usize = 90;
/// Absolute bisection tolerance for boundary points.
const BOUNDARY_TOL: f64 = 1e-9;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Agg {
    Mean,
    /// 0/1 outcomes; stderr is `sqrt(p (1 - p) / reps)`.
    Proportion,
}

pub(super) fn validate(id: ExperimentId, cell: &Cell) -> Result<()> {
    use ExperimentId::*;
    let fail = |msg: String| Err(Error::domain(format!("{} cell {}: {msg}", id.as_str(), cell.index)));
    if cell.d == 0 {
        return fail("d must be >= 1".into());
    }
    if cell.n < 2 {
        return fail(format!("n must be >= 2, got {}", cell.n));
    }
    if cell.reps == 0 {
        return fail("reps must be >= 1".into());
    }
    if !(cell.log_inv_alpha > 0.0 && cell.log_inv_alpha.is_finite()) {
        return fail(format!("alpha must lie in (0, 1), got {}", cell.alpha));
    }
    if id != RatioBoundsFig4 && !(cell.alpha > 0.0 && cell.alpha < 1.0) {
        return fail(format!("alpha must lie in (0, 1), got {}", cell.alpha));
    }
    if !cell.theta.is_finite() {
        return fail("theta must be finite".into());
    }
    match id {
        RegionsFig1 | CrossfitP0FigS2 if cell.d != 2 => return fail("boundary experiments need d = 2".into()),
        PowerFig6 | DoughnutFig7 | IntersectPowerFigS3 | HybridCasesFigS4 if cell.theta < 0.0 => {
            return fail("theta is a norm here and must be >= 0".into())
        }
        _ => {}
    }
    let needs_b = matches!(id, RegionsFig1 | ApproxFig2 | DoughnutFig7 | HybridCasesFigS4);
    if needs_b && cell.b == 0 {
        return fail("B must be >= 1".into());
    }
    if matches!(id, DoughnutFig7 | IntersectPowerFigS3 | HybridCasesFigS4) && !cell.n.is_multiple_of(2) {
        return fail(format!("annulus experiments need even n, got {}", cell.n));
    }
    if matches!(id, RegionsFig1 | SplitP0Fig3 | RatioProbFig5 | CrossfitP0FigS2) {
        d0_size(cell.n, cell.p0)?;
    } else {
        d0_size(cell.n, 0.5)?;
    }
    Ok(())
}

fn closed_row(id: &str, cell: &Cell, metric: &str, value: f64) -> SummaryRow {
    SummaryRow::new(id, cell, metric, value, 0.0, 0)
}

/// Runs `job` over the cell's replications and turns each metric into a row.
fn mc_rows<F>(
    id: &str,
    cell: &Cell,
    metrics: &[(&str, Agg)],
    raw: Option<&mut RawSink<'_>>,
    job: F,
) -> Result<Vec<SummaryRow>>
where
    F: Fn(u64) -> Result<Vec<f64>> + Sync,
{
    let names: Vec<&str> = metrics.iter().map(|m| m.0).collect();
    let acc: Vec<Accumulator> = match raw {
        None => replicate(cell.reps, metrics.len(), job)?,
        Some(sink) => {
            let mut failure = None;
            let acc = replicate_with_raw(cell.reps, metrics.len(), job, |rep, values| {
                if failure.is_none() {
                    failure = sink.record(cell.index, rep, &names, values).err();
                }
            })?;
            if let Some(e) = failure {
                return Err(e);
            }
            acc
        }
    };
    Ok(metrics
        .iter()
        .zip(&acc)
        .map(|(&(name, agg), a)| {
            let mean = a.mean();
            let se = match agg {
                Agg::Mean => a.stderr(),
                Agg::Proportion => (mean * (1.0 - mean) / a.count() as f64).sqrt(),
            };
            SummaryRow::new(id, cell, name, mean, se, a.count())
        })
        .collect())
}

fn indicator(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

pub(super) fn run_cell(
    id: ExperimentId,
    cell: &Cell,
    master_seed: u64,
    raw: Option<&mut RawSink<'_>>,
) -> Result<Vec<SummaryRow>> {
    use ExperimentId::*;
    match id {
        RegionsFig1 => regions_fig1(cell, master_seed, raw),
        ApproxFig2 => approx_fig2(cell, master_seed, raw),
        SplitP0Fig3 => split_p0_fig3(cell, master_seed, raw),
        RatioBoundsFig4 => ratio_bounds_fig4(cell),
        RatioProbFig5 => ratio_prob_fig5(cell, master_seed, raw),
        PowerFig6 => power_fig6(cell, master_seed, raw),
        DoughnutFig7 | HybridCasesFigS4 => doughnut(id, cell, master_seed, raw),
        CrossfitP0FigS2 => crossfit_p0_fig_s2(cell, master_seed, raw),
        IntersectPowerFigS3 => intersect_power_fig_s3(cell, master_seed, raw),
    }
}

/// The one dataset shared by every replication of a fixed-data experiment.
fn fixed_dataset(cell: &Cell, id: ExperimentId, master_seed: u64) -> Result<(SampleSet, u64)> {
    let key = cell.stream_key(id, true);
    let mut rng = cell.rep_stream(master_seed, key, u64::MAX);
    let theta = vec![cell.theta; cell.d];
    Ok((sample_gaussian(cell.n, cell.d, &theta, &mut rng)?, key))
}

/// Areas of all five regions on one dataset; replications vary only the
/// splits.
fn regions_fig1(cell: &Cell, master_seed: u64, raw: Option<&mut RawSink<'_>>) -> Result<Vec<SummaryRow>> {
    let id = ExperimentId::RegionsFig1;
    let (sample, key) = fixed_dataset(cell, id, master_seed)?;
    let (n, alpha) = (cell.n, cell.alpha);
    let center = [sample.mean()[0], sample.mean()[1]];
    let classical = classical_region(&sample, alpha)?;
    let limiting = limiting_subsampling_region(&sample, alpha)?;
    let metrics = [
        ("split_area", Agg::Mean),
        ("crossfit_area", Agg::Mean),
        ("subsampling_area", Agg::Mean),
        ("crossfit_area_le_split", Agg::Proportion),
        ("subsampling_inside_split_frac", Agg::Mean),
        ("boundary_failures", Agg::Mean),
    ];
    let mut rows = mc_rows(id.as_str(), cell, &metrics, raw, |r| {
        let rng = cell.rep_stream(master_seed, key, r);
        let mut scratch = SplitScratch::default();
        let pair = split_means(&sample, cell.p0, &mut rng.substream(0), &mut scratch)?;
        let splits = subsample_means(&sample, cell.b, cell.p0, &rng.substream(1))?;
        let split = split_region(&pair, n, alpha)?;
        let search = 10.0 * split.radius();
        let cf = CrossfitRegion { pair: &pair, n, alpha };
        let ss = SubsamplingRegion { splits: &splits, n, alpha };
        let cf_b = region_boundary_2d(|t| cf.contains(t), center, RAYS, search, BOUNDARY_TOL)?;
        let ss_b = region_boundary_2d(|t| ss.contains(t), center, RAYS, search, BOUNDARY_TOL)?;
        let split_area = PI * split.sq_radius;
        let cf_area = polygon_area(&cf_b.polygon());
        let ss_poly = ss_b.polygon();
        let inside = ss_poly.iter().filter(|p| split.contains(&p[..])).count() as f64 / RAYS as f64;
        Ok(vec![
            split_area,
            cf_area,
            polygon_area(&ss_poly),
            indicator(cf_area <= split_area),
            inside,
            (cf_b.failures() + ss_b.failures()) as f64,
        ])
    })?;
    rows.push(closed_row(id.as_str(), cell, "classical_area", PI * classical.sq_radius));
    rows.push(closed_row(id.as_str(), cell, "limiting_subsampling_area", PI * limiting.sq_radius));
    Ok(rows)
}

/// Subsampling statistic at `theta = c * 1` against its large-`B` limit.
/// Replication `r` is a fresh `N(0, I_d)` dataset, shared across `c`.
fn approx_fig2(cell: &Cell, master_seed: u64, raw: Option<&mut RawSink<'_>>) -> Result<Vec<SummaryRow>> {
    let id = ExperimentId::ApproxFig2;
    let key = cell.stream_key(id, true);
    let point = vec![cell.theta; cell.d];
    let metrics = [
        ("simulated_mean", Agg::Mean),
        ("analytic", Agg::Mean),
        ("ratio", Agg::Mean),
        ("scaled_distance", Agg::Mean),
    ];
    mc_rows(id.as_str(), cell, &metrics, raw, |r| {
        let rng = cell.rep_stream(master_seed, key, r);
        let sample = sample_gaussian(cell.n, cell.d, &vec![0.0; cell.d], &mut rng.clone())?;
        let splits = subsample_means(&sample, cell.b, 0.5, &rng.substream(0))?;
        let sim = subsampling_log_statistic(&point, &splits, cell.n)?.log_value;
        let lim = limiting_subsampling_log_statistic(&sample, &point);
        let dist = (cell.n as f64 * sq_dist(sample.mean(), &point)).sqrt();
        Ok(vec![sim.exp(), lim.exp(), (sim - lim).exp(), dist])
    })
}

/// Split squared radius at `p0` under `theta* = 0`, from exact draws of the
/// split means.
fn split_p0_fig3(cell: &Cell, master_seed: u64, raw: Option<&mut RawSink<'_>>) -> Result<Vec<SummaryRow>> {
    let id = ExperimentId::SplitP0Fig3;
    let key = cell.stream_key(id, false);
    let zero = vec![0.0; cell.d];
    let mut rows = mc_rows(id.as_str(), cell, &[("sq_radius", Agg::Mean)], raw, |r| {
        let mut rng = cell.rep_stream(master_seed, key, r);
        let m = sample_split_means(cell.n, cell.p0, &zero, &mut rng)?;
        Ok(vec![split_region(&m, cell.n, cell.alpha)?.sq_radius])
    })?;
    let expected = expected_sq_radius_split(cell.alpha, cell.d, cell.n, cell.p0)?;
    rows.push(closed_row(id.as_str(), cell, "expected_sq_radius", expected));
    Ok(rows)
}

/// Expected split/classical squared-radius ratio and its bounds.
fn ratio_bounds_fig4(cell: &Cell) -> Result<Vec<SummaryRow>> {
    let id = ExperimentId::RatioBoundsFig4.as_str();
    let (l, d) = (cell.log_inv_alpha, cell.d);
    let bounds = ratio_bounds_log(l, d)?;
    let expectation = if l <= MAX_LOG_INV_ALPHA {
        let c = chi2_upper_quantile((-l).exp(), d as u32)?;
        closed_row(id, cell, "expectation", (4.0 * l + 4.0 * d as f64) / c)
    } else {
        closed_row(id, cell, "expectation", f64::NAN).with_note("quantile not computed for ln(1/alpha) > 700")
    };
    let upper = match bounds.upper {
        Some(u) => closed_row(id, cell, "upper", u),
        None => closed_row(id, cell, "upper", f64::NAN).with_note("outside the bound's validity domain"),
    };
    Ok(vec![expectation, closed_row(id, cell, "lower", bounds.lower), upper])
}

/// Frequency of `r^2 split / r^2 classical <= 4` against its bounds.
fn ratio_prob_fig5(cell: &Cell, master_seed: u64, raw: Option<&mut RawSink<'_>>) -> Result<Vec<SummaryRow>> {
    let id = ExperimentId::RatioProbFig5;
    let key = cell.stream_key(id, false);
    let zero = vec![0.0; cell.d];
    let classical_sq = chi2_upper_quantile(cell.alpha, cell.d as u32)? / cell.n as f64;
    let metrics = [("ratio_le_4", Agg::Proportion), ("mean_ratio", Agg::Mean)];
    let mut rows = mc_rows(id.as_str(), cell, &metrics, raw, |r| {
        let mut rng = cell.rep_stream(master_seed, key, r);
        let m = sample_split_means(cell.n, cell.p0, &zero, &mut rng)?;
        let ratio = split_region(&m, cell.n, cell.alpha)?.sq_radius / classical_sq;
        Ok(vec![indicator(ratio <= 4.0), ratio])
    })?;
    let b = prob_ratio_leq4_bounds(cell.alpha, cell.d)?;
    let note = if b.condition_ok { "condition holds" } else { "condition fails" };
    rows.push(closed_row(id.as_str(), cell, "lower_bound", b.lower).with_note(note));
    rows.push(closed_row(id.as_str(), cell, "upper_bound", b.upper).with_note(note));
    Ok(rows)
}

/// Power against `H0: theta* = 0` at `theta* = sqrt(t / d) * 1`, `t = cell.theta`.
fn power_fig6(cell: &Cell, master_seed: u64, raw: Option<&mut RawSink<'_>>) -> Result<Vec<SummaryRow>> {
    let id = ExperimentId::PowerFig6;
    let key = cell.stream_key(id, false);
    let (t, n, d, alpha) = (cell.theta, cell.n, cell.d, cell.alpha);
    let theta = vec![(t / d as f64).sqrt(); d];
    let mut rows = vec![
        closed_row(id.as_str(), cell, "classical_exact", power_classical(t, n, d, alpha, ClosedForm::Exact)?.value),
        closed_row(id.as_str(), cell, "classical_approx", power_classical(t, n, d, alpha, ClosedForm::Approx)?.value),
        closed_row(
            id.as_str(),
            cell,
            "limiting_subsampling_exact",
            power_limiting_subsampling(t, n, d, alpha, ClosedForm::Exact)?.value,
        ),
        closed_row(
            id.as_str(),
            cell,
            "limiting_subsampling_approx",
            power_limiting_subsampling(t, n, d, alpha, ClosedForm::Approx)?.value,
        ),
    ];
    let mut metrics = vec![("split", Agg::Proportion), ("crossfit", Agg::Proportion)];
    if cell.b > 0 {
        metrics.push(("subsampling", Agg::Proportion));
    }
    let width = metrics.len();
    rows.extend(mc_rows(id.as_str(), cell, &metrics, raw, |r| {
        let ex = null_exclusions(&theta, n, alpha, cell.b, &cell.rep_stream(master_seed, key, r))?;
        Ok(ex[..width].iter().map(|&e| indicator(e)).collect())
    })?);
    Ok(rows)
}

/// All three annulus tests at `theta* = (t, 0, ..., 0)`, `t = cell.theta`.
fn doughnut(id: ExperimentId, cell: &Cell, master_seed: u64, raw: Option<&mut RawSink<'_>>) -> Result<Vec<SummaryRow>> {
    let key = cell.stream_key(id, false);
    let null = AnnulusNull::default();
    let mut theta = vec![0.0; cell.d];
    theta[0] = cell.theta;
    let metrics = [
        ("intersection", Agg::Proportion),
        ("subsampled_split", Agg::Proportion),
        ("subsampled_hybrid", Agg::Proportion),
        ("frac_split_case", Agg::Mean),
        ("frac_unit_case", Agg::Mean),
        ("frac_ripr_case", Agg::Mean),
        ("ripr_subsamples", Agg::Mean),
        ("dominance_violations", Agg::Mean),
    ];
    let mut rows = mc_rows(id.as_str(), cell, &metrics, raw, |r| {
        let rng = cell.rep_stream(master_seed, key, r);
        let sample = sample_gaussian(cell.n, cell.d, &theta, &mut rng.clone())?;
        let rep = doughnut_replication(&sample, &null, cell.alpha, cell.b, &rng.substream(0))?;
        let [fs, fu, fr] = rep.hybrid.case_fractions;
        Ok(vec![
            indicator(rep.intersection),
            indicator(rep.split),
            indicator(rep.hybrid.reject),
            fs,
            fu,
            fr,
            rep.ripr_subsamples as f64,
            rep.dominance_violations as f64,
        ])
    })?;
    if id == ExperimentId::HybridCasesFigS4 {
        rows.retain(|r| r.metric.starts_with("frac_") || r.metric == "subsampled_hybrid");
    } else {
        let exact = intersection_power_exact(cell.theta, cell.n, cell.d, cell.alpha, &null)?;
        rows.push(closed_row(id.as_str(), cell, "intersection_exact", exact));
    }
    Ok(rows)
}

/// Cross-fit set diameter and area at `p0` on one shared dataset.
fn crossfit_p0_fig_s2(cell: &Cell, master_seed: u64, raw: Option<&mut RawSink<'_>>) -> Result<Vec<SummaryRow>> {
    let id = ExperimentId::CrossfitP0FigS2;
    let (sample, key) = fixed_dataset(cell, id, master_seed)?;
    let (n, alpha) = (cell.n, cell.alpha);
    let center = [sample.mean()[0], sample.mean()[1]];
    let metrics = [
        ("sq_diameter", Agg::Mean),
        ("area", Agg::Mean),
        ("boundary_failures", Agg::Mean),
    ];
    mc_rows(id.as_str(), cell, &metrics, raw, |r| {
        let rng = cell.rep_stream(master_seed, key, r);
        let mut scratch = SplitScratch::default();
        let pair = split_means(&sample, cell.p0, &mut rng.substream(0), &mut scratch)?;
        // members satisfy |Ybar_k - theta|^2 < (2/n_k) ln(2/alpha) + |Ybar0 - Ybar1|^2 for k = 0, 1
        let small = pair.n0.min(pair.n1) as f64;
        let sq = 2.0 / small * (2.0 / alpha).ln() + sq_dist(&pair.mean0, &pair.mean1);
        let search = 2.0 * sq.sqrt() + sq_dist(&pair.mean0, sample.mean()).max(sq_dist(&pair.mean1, sample.mean())).sqrt();
        let cf = CrossfitRegion { pair: &pair, n, alpha };
        if crossfit_log_statistic(&center, &pair, n)?.rejects(alpha) {
            return Err(Error::numeric("overall mean is outside the cross-fit set"));
        }
        let b = region_boundary_2d(|t| cf.contains(t), center, RAYS, search, BOUNDARY_TOL)?;
        let poly = b.polygon();
        Ok(vec![polygon_sq_diameter(&poly), polygon_area(&poly), b.failures() as f64])
    })
}

/// Intersection-test rejection frequency against its exact power; only
/// `Ybar ~ N(theta*, I/n)` is drawn.
fn intersect_power_fig_s3(cell: &Cell, master_seed: u64, raw: Option<&mut RawSink<'_>>) -> Result<Vec<SummaryRow>> {
    let id = ExperimentId::IntersectPowerFigS3;
    let key = cell.stream_key(id, false);
    let null = AnnulusNull::default();
    let scale = 1.0 / (cell.n as f64).sqrt();
    let mut rows = mc_rows(id.as_str(), cell, &[("intersection", Agg::Proportion)], raw, |r| {
        let mut rng = cell.rep_stream(master_seed, key, r);
        let ybar: Vec<f64> = (0..cell.d)
            .map(|j| if j == 0 { cell.theta } else { 0.0 } + scale * rng.standard_normal())
            .collect();
        Ok(vec![indicator(intersection_test_mean(&ybar, cell.n, &null, cell.alpha)?)])
    })?;
    let exact = intersection_power_exact(cell.theta, cell.n, cell.d, cell.alpha, &null)?;
    rows.push(closed_row(id.as_str(), cell, "intersection_exact", exact));
    Ok(rows)
}

/// Coverage of `theta* = 0` by every confidence set, one row per
/// `(method, d)`. Replication `r` at dimension index `i` uses stream
/// `(master_seed, i, r)`.
pub fn coverage_suite(
    dims: &[usize],
    n: usize,
    alpha: f64,
    reps: usize,
    b: usize,
    master_seed: u64,
) -> Result<Vec<SummaryRow>> {
    if dims.is_empty() || b == 0 {
        return Err(Error::domain("coverage needs at least one dimension and B >= 1"));
    }
    let mut rows = Vec::new();
    for (i, &d) in dims.iter().enumerate() {
        let cell = Cell {
            index: i,
            d,
            n,
            alpha,
            log_inv_alpha: (1.0 / alpha).ln(),
            theta: 0.0,
            p0: 0.5,
            b,
            reps,
        };
        validate(ExperimentId::PowerFig6, &cell)?;
        let metrics = [
            ("classical", Agg::Proportion),
            ("split", Agg::Proportion),
            ("crossfit", Agg::Proportion),
            ("subsampling", Agg::Proportion),
            ("limiting_subsampling", Agg::Proportion),
        ];
        let zero = vec![0.0; d];
        rows.extend(mc_rows("coverage", &cell, &metrics, None, |r| {
            let rng = RngStream::for_replication(master_seed, i as u64, r);
            let sample = sample_gaussian(n, d, &zero, &mut rng.clone())?;
            let classical = classical_region(&sample, alpha)?.contains(&zero);
            let limiting = limiting_subsampling_region(&sample, alpha)?.contains(&zero);
            let ex = null_exclusions(&zero, n, alpha, b, &rng)?;
            Ok(vec![
                indicator(classical),
                indicator(!ex[0]),
                indicator(!ex[1]),
                indicator(!ex[2]),
                indicator(limiting),
            ])
        })?);
    }
    Ok(rows)
}
