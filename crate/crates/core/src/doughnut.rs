//! Tests of the annulus ("doughnut") null `H0: r_in <= |theta*| <= r_out`.
//!
//! Three approaches are provided: intersecting the classical set with the
//! annulus, a subsampled split LRT whose null fit is the projection onto the
//! annulus, and a subsampled hybrid that switches to the reverse information
//! projection (RIPR) denominator when the estimation-half mean lies outside
//! the annulus.

use std::borrow::Borrow;

use crate::data::{subsample_means, RngStream, SampleSet, SplitMeans};
use crate::error::{check_alpha, Error, Result};
use crate::logspace::{log_mean_exp, sq_dist, sq_norm};
use crate::regions::directional_log_ratio;
use crate::specfun::{chi2_upper_quantile, noncentral_chi2_cdf};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnulusNull {
    pub r_in: f64,
    pub r_out: f64,
}

impl Default for AnnulusNull {
    fn default() -> Self {
        AnnulusNull { r_in: 0.5, r_out: 1.0 }
    }
}

impl AnnulusNull {
    pub fn new(r_in: f64, r_out: f64) -> Result<Self> {
        if !(r_in > 0.0 && r_out >= r_in && r_out.is_finite()) {
            return Err(Error::domain(format!(
                "annulus needs 0 < r_in <= r_out < inf, got [{r_in}, {r_out}]"
            )));
        }
        Ok(AnnulusNull { r_in, r_out })
    }

    fn is_default(&self) -> bool {
        *self == AnnulusNull::default()
    }
}

/// Which statistic the hybrid test used for one subsample, by `|Ybar1|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HybridCase {
    /// `|Ybar1| < r_in`: split LRT.
    Split,
    /// `r_in <= |Ybar1| <= r_out`: statistic fixed at 1.
    Unit,
    /// `|Ybar1| > r_out`: RIPR LRT.
    Ripr,
}

impl HybridCase {
    pub fn as_str(&self) -> &'static str {
        match self {
            HybridCase::Split => "split_case",
            HybridCase::Unit => "unit_case",
            HybridCase::Ripr => "ripr_case",
        }
    }

    fn index(&self) -> usize {
        match self {
            HybridCase::Split => 0,
            HybridCase::Unit => 1,
            HybridCase::Ripr => 2,
        }
    }

    pub fn classify(mean1: &[f64], null: &AnnulusNull) -> HybridCase {
        let norm = sq_norm(mean1).sqrt();
        if norm < null.r_in {
            HybridCase::Split
        } else if norm <= null.r_out {
            HybridCase::Unit
        } else {
            HybridCase::Ripr
        }
    }
}

fn rescale(y: &[f64], norm: f64, radius: f64) -> Vec<f64> {
    y.iter().map(|v| v * radius / norm).collect()
}

/// Nearest point of the annulus to `y`. For `y = 0` every point of the inner
/// circle is nearest; the first basis direction is used and a warning logged.
pub fn project_to_annulus(y: &[f64], null: &AnnulusNull) -> Vec<f64> {
    let norm = sq_norm(y).sqrt();
    if norm > null.r_out {
        rescale(y, norm, null.r_out)
    } else if norm >= null.r_in {
        y.to_vec()
    } else if norm > 0.0 {
        rescale(y, norm, null.r_in)
    } else {
        log::warn!("projecting the origin onto the annulus; using the first basis direction");
        let mut e = vec![0.0; y.len()];
        if let Some(first) = e.first_mut() {
            *first = null.r_in;
        }
        e
    }
}

/// Rejects when the projection of `Ybar` onto the annulus lies outside the
/// classical set: `|proj(Ybar) - Ybar|^2 > c_{alpha,d} / n`.
pub fn intersection_test(sample: &SampleSet, null: &AnnulusNull, alpha: f64) -> Result<bool> {
    intersection_test_mean(sample.mean(), sample.n(), null, alpha)
}

/// [`intersection_test`] from the sufficient statistic `Ybar` alone.
pub fn intersection_test_mean(ybar: &[f64], n: usize, null: &AnnulusNull, alpha: f64) -> Result<bool> {
    check_alpha(alpha)?;
    if ybar.is_empty() || n == 0 {
        return Err(Error::domain("intersection test needs d >= 1 and n >= 1"));
    }
    let c = chi2_upper_quantile(alpha, ybar.len() as u32)?;
    let proj = project_to_annulus(ybar, null);
    Ok(sq_dist(&proj, ybar) > c / n as f64)
}

/// Exact power of [`intersection_test`] for the annulus `[0.5, 1]`:
/// `1 - F(n + 2 sqrt(n c) + c) + 1{n > 4c} F(n/4 - sqrt(n c) + c)` with `F`
/// the noncentral chi-squared CDF at `lambda = n |theta*|^2`.
pub fn intersection_power_exact(theta_norm: f64, n: usize, d: usize, alpha: f64, null: &AnnulusNull) -> Result<f64> {
    check_alpha(alpha)?;
    if !null.is_default() {
        return Err(Error::Unsupported(format!(
            "exact intersection power is only available for the annulus [0.5, 1], got [{}, {}]",
            null.r_in, null.r_out
        )));
    }
    if !(theta_norm >= 0.0 && theta_norm.is_finite()) {
        return Err(Error::domain(format!("|theta| must be finite and >= 0, got {theta_norm}")));
    }
    if n == 0 || d == 0 {
        return Err(Error::domain("n and d must be positive"));
    }
    let c = chi2_upper_quantile(alpha, d as u32)?;
    let nf = n as f64;
    let lambda = nf * theta_norm * theta_norm;
    let root = (nf * c).sqrt();
    let mut power = 1.0 - noncentral_chi2_cdf(nf + 2.0 * root + c, d as u32, lambda)?;
    if nf > 4.0 * c {
        power += noncentral_chi2_cdf(nf / 4.0 - root + c, d as u32, lambda)?;
    }
    Ok(power.clamp(0.0, 1.0))
}

fn check_pair(m: &SplitMeans, n: usize) -> Result<()> {
    if m.n() != n {
        return Err(Error::domain(format!("split covers {} observations, expected n={n}", m.n())));
    }
    if m.p0 != 0.5 {
        return Err(Error::domain(format!("annulus tests use p0 = 0.5 splits, got p0={}", m.p0)));
    }
    Ok(())
}

/// `log U = (n0/2)(|Ybar0 - proj(Ybar0)|^2 - |Ybar0 - Ybar1|^2)`.
pub fn doughnut_split_log_statistic<S: Borrow<SplitMeans>>(pair: &S, n: usize, null: &AnnulusNull) -> Result<f64> {
    let m = pair.borrow();
    check_pair(m, n)?;
    let fit0 = project_to_annulus(&m.mean0, null);
    Ok(directional_log_ratio(&m.mean0, &m.mean1, m.n0, &fit0))
}

/// `log R = (n0/2)(|Ybar0 - r_out Ybar1/|Ybar1||^2 - |Ybar0 - Ybar1|^2)`;
/// requires `|Ybar1| > r_out`.
pub fn doughnut_ripr_log_statistic<S: Borrow<SplitMeans>>(pair: &S, n: usize, null: &AnnulusNull) -> Result<f64> {
    let m = pair.borrow();
    check_pair(m, n)?;
    let norm = sq_norm(&m.mean1).sqrt();
    if !(norm > null.r_out) {
        return Err(Error::domain(format!(
            "RIPR statistic needs |Ybar1| > r_out = {}, got {norm}",
            null.r_out
        )));
    }
    let boundary = rescale(&m.mean1, norm, null.r_out);
    Ok(directional_log_ratio(&m.mean0, &m.mean1, m.n0, &boundary))
}

/// Case-selected hybrid log statistic; the unit case contributes `log 1 = 0`.
pub fn hybrid_log_statistic<S: Borrow<SplitMeans>>(pair: &S, n: usize, null: &AnnulusNull) -> Result<(f64, HybridCase)> {
    let m = pair.borrow();
    let case = HybridCase::classify(&m.mean1, null);
    let value = match case {
        HybridCase::Split => doughnut_split_log_statistic(m, n, null)?,
        HybridCase::Unit => {
            check_pair(m, n)?;
            0.0
        }
        HybridCase::Ripr => doughnut_ripr_log_statistic(m, n, null)?,
    };
    Ok((value, case))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DoughnutKind {
    Split,
    Hybrid,
}

impl DoughnutKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            DoughnutKind::Split => "subsampled_split",
            DoughnutKind::Hybrid => "subsampled_hybrid",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoughnutOutcome {
    pub reject: bool,
    /// Fractions of subsamples in (split, unit, ripr) case; `(1, 0, 0)` for
    /// the split kind.
    pub case_fractions: [f64; 3],
}

/// Every annulus test on one dataset, sharing the `B` splits between the
/// subsampled split and hybrid tests.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoughnutReplication {
    pub intersection: bool,
    pub split: bool,
    pub hybrid: DoughnutOutcome,
    /// RIPR-case subsamples with `log R < log U`; always 0 in theory.
    pub dominance_violations: usize,
    pub ripr_subsamples: usize,
}

fn check_subsampled(sample: &SampleSet, b: usize) -> Result<()> {
    if b < 1 {
        return Err(Error::domain("number of subsamples must be >= 1"));
    }
    if !sample.n().is_multiple_of(2) {
        return Err(Error::domain(format!("annulus tests need even n, got {}", sample.n())));
    }
    Ok(())
}

/// Subsampled split or hybrid test: rejects when the log-mean-exp of the `B`
/// per-split log statistics is at least `ln(1/alpha)`. Split `i` uses
/// `rng.substream(i)`.
pub fn subsampled_doughnut_test(
    sample: &SampleSet,
    null: &AnnulusNull,
    alpha: f64,
    b: usize,
    kind: DoughnutKind,
    rng: &RngStream,
) -> Result<DoughnutOutcome> {
    check_alpha(alpha)?;
    check_subsampled(sample, b)?;
    let n = sample.n();
    let splits = subsample_means(sample, b, 0.5, rng)?;
    let mut logs = Vec::with_capacity(b);
    let mut counts = [0usize; 3];
    for s in &splits {
        match kind {
            DoughnutKind::Split => {
                logs.push(doughnut_split_log_statistic(s, n, null)?);
                counts[0] += 1;
            }
            DoughnutKind::Hybrid => {
                let (v, case) = hybrid_log_statistic(s, n, null)?;
                logs.push(v);
                counts[case.index()] += 1;
            }
        }
    }
    Ok(DoughnutOutcome {
        reject: log_mean_exp(&logs) >= (1.0 / alpha).ln(),
        case_fractions: counts.map(|c| c as f64 / b as f64),
    })
}

/// Runs the intersection, subsampled split and subsampled hybrid tests on
/// one dataset with shared splits (split `i` from `rng.substream(i)`, as in
/// [`subsampled_doughnut_test`]).
pub fn doughnut_replication(
    sample: &SampleSet,
    null: &AnnulusNull,
    alpha: f64,
    b: usize,
    rng: &RngStream,
) -> Result<DoughnutReplication> {
    check_alpha(alpha)?;
    check_subsampled(sample, b)?;
    let n = sample.n();
    let splits = subsample_means(sample, b, 0.5, rng)?;
    let mut split_logs = Vec::with_capacity(b);
    let mut hybrid_logs = Vec::with_capacity(b);
    let mut counts = [0usize; 3];
    let mut violations = 0;
    for s in &splits {
        let u = doughnut_split_log_statistic(s, n, null)?;
        let (h, case) = hybrid_log_statistic(s, n, null)?;
        if case == HybridCase::Ripr && h < u {
            violations += 1;
        }
        split_logs.push(u);
        hybrid_logs.push(h);
        counts[case.index()] += 1;
    }
    let threshold = (1.0 / alpha).ln();
    Ok(DoughnutReplication {
        intersection: intersection_test(sample, null, alpha)?,
        split: log_mean_exp(&split_logs) >= threshold,
        hybrid: DoughnutOutcome {
            reject: log_mean_exp(&hybrid_logs) >= threshold,
            case_fractions: counts.map(|c| c as f64 / b as f64),
        },
        dominance_violations: violations,
        ripr_subsamples: counts[2],
    })
}
