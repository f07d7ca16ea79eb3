//! Confidence sets for the Gaussian mean: the classical LRT ball, the split,
//! cross-fit and subsampling universal sets, and the limiting subsampling ball.
//!
//! Every universal statistic is kept in log domain; a parameter `theta` is
//! excluded from a level-`alpha` set when its log statistic reaches
//! `ln(1/alpha)`.

mod boundary;
mod export;
mod size;

pub use boundary::{
    polygon_area, polygon_sq_diameter, region_boundary_2d, Boundary, BoundaryPoint,
};
pub use export::{write_boundary_csv, write_regions_csv};
pub use size::{
    expected_sq_radius_split, optimal_split_proportion, optimal_split_proportion_log,
    prob_ratio_leq4_bounds, ratio_bounds, ratio_bounds_log, ratio_expected_split_vs_classical,
    ProbRatioBounds, RatioBounds,
};

use std::borrow::Borrow;

use crate::data::{SampleSet, SplitMeans};
use crate::error::{check_alpha, Error, Result};
use crate::logspace::{log_add_exp, log_mean_exp, sq_dist};
use crate::specfun::chi2_upper_quantile;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionKind {
    Classical,
    Split,
    LimitingSubsampling,
}

impl RegionKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            RegionKind::Classical => "classical",
            RegionKind::Split => "split",
            RegionKind::LimitingSubsampling => "limiting_subsampling",
        }
    }
}

/// A ball `{theta : |theta - center|^2 (<= or <) sq_radius}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphericalRegion {
    pub center: Vec<f64>,
    pub sq_radius: f64,
    pub alpha: f64,
    pub kind: RegionKind,
}

impl SphericalRegion {
    /// Classical sets are closed; the split and limiting sets use a strict inequality.
    pub fn contains(&self, theta: &[f64]) -> bool {
        let r2 = sq_dist(&self.center, theta);
        match self.kind {
            RegionKind::Classical => r2 <= self.sq_radius,
            RegionKind::Split | RegionKind::LimitingSubsampling => r2 < self.sq_radius,
        }
    }

    pub fn radius(&self) -> f64 {
        self.sq_radius.sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StatisticKind {
    Split,
    Crossfit,
    Subsampling,
}

/// Log of a universal test statistic at one `theta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogStatistic {
    pub log_value: f64,
    pub kind: StatisticKind,
}

impl LogStatistic {
    /// `theta` is rejected (excluded from the set) iff the statistic is at least `1/alpha`.
    pub fn rejects(&self, alpha: f64) -> bool {
        self.log_value >= (1.0 / alpha).ln()
    }
}

fn check_theta(theta: &[f64], means: &SplitMeans, n: usize) -> Result<()> {
    if theta.len() != means.d() {
        return Err(Error::domain(format!(
            "theta has dimension {}, split means have {}",
            theta.len(),
            means.d()
        )));
    }
    if means.n() != n {
        return Err(Error::domain(format!(
            "split covers {} observations, expected n={n}",
            means.n()
        )));
    }
    Ok(())
}

/// Log-likelihood ratio on `D0`: `(n0/2) (|Ybar0 - theta|^2 - |Ybar0 - Ybar1|^2)`.
///
/// With `n0 = n * p0` this is the textbook `(n p0 / 2)(...)` form.
#[inline]
pub(crate) fn directional_log_ratio(center: &[f64], other: &[f64], count: usize, theta: &[f64]) -> f64 {
    0.5 * count as f64 * (sq_dist(center, theta) - sq_dist(center, other))
}

/// Split LRT statistic `T_n(theta) = L0(Ybar1) / L0(theta)`, in log domain.
pub fn split_log_statistic<S: Borrow<SplitMeans>>(theta: &[f64], pair: &S, n: usize) -> Result<LogStatistic> {
    let m = pair.borrow();
    check_theta(theta, m, n)?;
    Ok(LogStatistic {
        log_value: directional_log_ratio(&m.mean0, &m.mean1, m.n0, theta),
        kind: StatisticKind::Split,
    })
}

/// Cross-fit statistic: the average of the split statistic and its role-swapped twin.
pub fn crossfit_log_statistic<S: Borrow<SplitMeans>>(theta: &[f64], pair: &S, n: usize) -> Result<LogStatistic> {
    let m = pair.borrow();
    check_theta(theta, m, n)?;
    let forward = directional_log_ratio(&m.mean0, &m.mean1, m.n0, theta);
    let swapped = directional_log_ratio(&m.mean1, &m.mean0, m.n1, theta);
    Ok(LogStatistic {
        log_value: log_add_exp(forward, swapped) - std::f64::consts::LN_2,
        kind: StatisticKind::Crossfit,
    })
}

/// Subsampling statistic: the mean of `B` split statistics, via log-sum-exp.
pub fn subsampling_log_statistic<S: Borrow<SplitMeans>>(
    theta: &[f64],
    splits: &[S],
    n: usize,
) -> Result<LogStatistic> {
    if splits.is_empty() {
        return Err(Error::domain("subsampling statistic needs at least one split"));
    }
    let mut logs = Vec::with_capacity(splits.len());
    for s in splits {
        let m = s.borrow();
        check_theta(theta, m, n)?;
        logs.push(directional_log_ratio(&m.mean0, &m.mean1, m.n0, theta));
    }
    let log_value = if logs.len() == 1 { logs[0] } else { log_mean_exp(&logs) };
    Ok(LogStatistic {
        log_value,
        kind: StatisticKind::Subsampling,
    })
}

/// Classical LRT set: center `Ybar`, squared radius `c_{alpha,d} / n`.
pub fn classical_region(sample: &SampleSet, alpha: f64) -> Result<SphericalRegion> {
    check_alpha(alpha)?;
    let c = chi2_upper_quantile(alpha, sample.d() as u32)?;
    Ok(SphericalRegion {
        center: sample.mean().to_vec(),
        sq_radius: c / sample.n() as f64,
        alpha,
        kind: RegionKind::Classical,
    })
}

/// Split LRT set: center `Ybar0`, squared radius `(2 / n0) ln(1/alpha) + |Ybar0 - Ybar1|^2`.
pub fn split_region<S: Borrow<SplitMeans>>(pair: &S, n: usize, alpha: f64) -> Result<SphericalRegion> {
    check_alpha(alpha)?;
    let m = pair.borrow();
    if m.n() != n {
        return Err(Error::domain(format!("split covers {} observations, expected n={n}", m.n())));
    }
    let sq_radius = 2.0 / m.n0 as f64 * (1.0 / alpha).ln() + sq_dist(&m.mean0, &m.mean1);
    Ok(SphericalRegion {
        center: m.mean0.clone(),
        sq_radius,
        alpha,
        kind: RegionKind::Split,
    })
}

/// Large-`B` approximation to the subsampling set:
/// center `Ybar`, squared radius `(10 / 3n) ln((5/2)^{d/2} / alpha)`.
pub fn limiting_subsampling_region(sample: &SampleSet, alpha: f64) -> Result<SphericalRegion> {
    check_alpha(alpha)?;
    Ok(SphericalRegion {
        center: sample.mean().to_vec(),
        sq_radius: limiting_subsampling_threshold(sample.d(), alpha) / sample.n() as f64,
        alpha,
        kind: RegionKind::LimitingSubsampling,
    })
}

/// `(10/3) ln((5/2)^{d/2} / alpha)`: the cutoff on `n |Ybar - theta|^2`.
pub fn limiting_subsampling_threshold(d: usize, alpha: f64) -> f64 {
    10.0 / 3.0 * (0.5 * d as f64 * 2.5f64.ln() + (1.0 / alpha).ln())
}

/// Large-`B` approximation of the subsampling statistic,
/// `exp((3n/10) |Ybar - theta|^2) (2/5)^{d/2}`, in log domain.
pub fn limiting_subsampling_log_statistic(sample: &SampleSet, theta: &[f64]) -> f64 {
    let n = sample.n() as f64;
    0.3 * n * sq_dist(sample.mean(), theta) + 0.5 * sample.d() as f64 * 0.4f64.ln()
}

/// Membership in the cross-fit set of one split.
#[derive(Debug, Clone, Copy)]
pub struct CrossfitRegion<'a> {
    pub pair: &'a SplitMeans,
    pub n: usize,
    pub alpha: f64,
}

impl CrossfitRegion<'_> {
    pub fn contains(&self, theta: &[f64]) -> bool {
        crossfit_log_statistic(theta, self.pair, self.n)
            .map(|s| !s.rejects(self.alpha))
            .unwrap_or(false)
    }
}

/// Membership in the subsampling set built from a fixed list of splits.
#[derive(Debug, Clone, Copy)]
pub struct SubsamplingRegion<'a> {
    pub splits: &'a [SplitMeans],
    pub n: usize,
    pub alpha: f64,
}

impl SubsamplingRegion<'_> {
    pub fn contains(&self, theta: &[f64]) -> bool {
        subsampling_log_statistic(theta, self.splits, self.n)
            .map(|s| !s.rejects(self.alpha))
            .unwrap_or(false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{sample_gaussian, split, subsample_splits, RngStream};

    fn setup(n: usize, d: usize, seed: u64) -> (SampleSet, crate::data::SplitPair) {
        let s = sample_gaussian(n, d, &vec![0.0; d], &mut RngStream::new(seed, 0)).unwrap();
        let p = split(&s, 0.5, &mut RngStream::new(seed, 1)).unwrap();
        (s, p)
    }

    #[test]
    fn classical_radius_d2() {
        let (s, _) = setup(1000, 2, 1);
        let r = classical_region(&s, 0.1).unwrap();
        assert!((r.sq_radius - 0.00460517).abs() < 1e-8);
        assert!(r.contains(s.mean()));
    }

    #[test]
    fn split_statistic_at_fitted_points() {
        let (_, p) = setup(100, 3, 2);
        let m = &p.means;
        let at1 = split_log_statistic(&m.mean1, &p, 100).unwrap();
        assert_eq!(at1.log_value, 0.0);
        let at0 = split_log_statistic(&m.mean0, &p, 100).unwrap();
        let expect = -(100.0 * 0.5 / 2.0) * sq_dist(&m.mean0, &m.mean1);
        assert!((at0.log_value - expect).abs() < 1e-12);
        assert!(at0.log_value <= 0.0);
    }

    #[test]
    fn split_region_agrees_with_statistic() {
        let (_, p) = setup(200, 2, 3);
        let alpha = 0.1;
        let region = split_region(&p, 200, alpha).unwrap();
        assert!(region.contains(&p.means.mean1));
        let mut rng = RngStream::new(99, 0);
        for _ in 0..1000 {
            let theta: Vec<f64> = (0..2).map(|_| 0.3 * rng.standard_normal()).collect();
            let stat = split_log_statistic(&theta, &p, 200).unwrap();
            let margin = stat.log_value - (1.0 / alpha).ln();
            if margin.abs() > 1e-10 {
                assert_eq!(region.contains(&theta), !stat.rejects(alpha));
            }
        }
    }

    #[test]
    fn dimension_mismatch_is_domain_error() {
        let (_, p) = setup(50, 2, 4);
        assert!(matches!(split_log_statistic(&[0.0], &p, 50), Err(Error::Domain(_))));
        assert!(matches!(split_log_statistic(&[0.0, 0.0], &p, 51), Err(Error::Domain(_))));
        let empty: [SplitMeans; 0] = [];
        assert!(subsampling_log_statistic(&[0.0, 0.0], &empty, 50).is_err());
    }

    #[test]
    fn crossfit_reduces_to_split_for_equal_halves() {
        let m = SplitMeans {
            p0: 0.5,
            n0: 50,
            n1: 50,
            mean0: vec![0.2, -0.1],
            mean1: vec![0.2, -0.1],
        };
        for theta in [[0.0, 0.0], [1.0, 2.0], [0.2, -0.1]] {
            let a = crossfit_log_statistic(&theta, &m, 100).unwrap().log_value;
            let b = split_log_statistic(&theta, &m, 100).unwrap().log_value;
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn crossfit_at_overall_mean() {
        let (s, p) = setup(100, 2, 5);
        let dd = sq_dist(&p.means.mean0, &p.means.mean1);
        let v = crossfit_log_statistic(s.mean(), &p, 100).unwrap().log_value;
        let expect = -(100.0 / 4.0) * dd + (100.0 / 16.0) * dd;
        assert!((v - expect).abs() < 1e-10);
    }

    #[test]
    fn subsampling_single_split_is_split() {
        let (s, _) = setup(60, 2, 6);
        let splits = subsample_splits(&s, 1, 0.5, &RngStream::new(6, 2)).unwrap();
        let theta = [0.4, -0.2];
        let a = subsampling_log_statistic(&theta, &splits, 60).unwrap().log_value;
        let b = split_log_statistic(&theta, &splits[0], 60).unwrap().log_value;
        assert_eq!(a, b);
    }

    #[test]
    fn statistics_finite_for_huge_exponents() {
        let (s, _) = setup(1000, 2, 7);
        let splits = subsample_splits(&s, 5, 0.5, &RngStream::new(7, 2)).unwrap();
        // pretend n = 10^6 with |theta - Ybar0| = 10
        let scaled: Vec<SplitMeans> = splits
            .iter()
            .map(|p| SplitMeans {
                n0: 500_000,
                n1: 500_000,
                ..p.means.clone()
            })
            .collect();
        let theta = [scaled[0].mean0[0] + 10.0, scaled[0].mean0[1]];
        let v = subsampling_log_statistic(&theta, &scaled, 1_000_000).unwrap();
        assert!(v.log_value.is_finite());
        assert!(v.log_value > 2.0e7);
        let c = crossfit_log_statistic(&theta, &scaled[0], 1_000_000).unwrap();
        assert!(c.log_value.is_finite());
    }

    #[test]
    fn limiting_radius_d2() {
        let (s, _) = setup(1000, 2, 8);
        let r = limiting_subsampling_region(&s, 0.1).unwrap();
        // (10/3000) ln 25
        assert!((r.sq_radius - 10.0 / 3000.0 * 25f64.ln()).abs() < 1e-15);
        assert!((r.sq_radius - 0.0107296).abs() < 1e-7);
    }

    #[test]
    fn strictness_follows_kind() {
        let ball = |kind| SphericalRegion {
            center: vec![0.0],
            sq_radius: 1.0,
            alpha: 0.1,
            kind,
        };
        assert!(ball(RegionKind::Classical).contains(&[1.0]));
        assert!(!ball(RegionKind::Split).contains(&[1.0]));
        assert!(!ball(RegionKind::LimitingSubsampling).contains(&[1.0]));
    }
}
