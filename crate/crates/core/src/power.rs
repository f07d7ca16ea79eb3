//! Power of the level-`alpha` tests of `H0: theta* = 0`.
//!
//! The classical and limiting-subsampling tests reject when `n |Ybar|^2`
//! exceeds a cutoff, and `n |Ybar|^2` is noncentral chi-squared with `d`
//! degrees of freedom and noncentrality `n |theta*|^2`. Their power therefore
//! has an exact series form and a normal approximation. The split, cross-fit
//! and finite-`B` subsampling tests are simulated.

use crate::data::{sample_gaussian, split_means, subsample_means, RngStream, SplitScratch};
use crate::engine::harness::replicate;
use crate::error::{check_alpha, Error, Result};
use crate::regions::{
    crossfit_log_statistic, limiting_subsampling_threshold, split_log_statistic,
    subsampling_log_statistic,
};
use crate::specfun::{chi2_sf, chi2_upper_quantile, noncentral_chi2_cdf, std_normal_cdf};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PowerMethod {
    ExactNoncentral,
    NormalApprox,
    MonteCarlo,
}

impl PowerMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            PowerMethod::ExactNoncentral => "exact_noncentral",
            PowerMethod::NormalApprox => "normal_approx",
            PowerMethod::MonteCarlo => "monte_carlo",
        }
    }
}

/// Which closed form to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClosedForm {
    Exact,
    Approx,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerEstimate {
    pub value: f64,
    /// Zero for closed forms; binomial `sqrt(p(1-p)/reps)` for Monte Carlo.
    pub stderr: f64,
    pub method: PowerMethod,
}

impl PowerEstimate {
    fn closed(value: f64, form: ClosedForm) -> Self {
        PowerEstimate {
            value: value.clamp(0.0, 1.0),
            stderr: 0.0,
            method: match form {
                ClosedForm::Exact => PowerMethod::ExactNoncentral,
                ClosedForm::Approx => PowerMethod::NormalApprox,
            },
        }
    }

    pub fn monte_carlo(rejections: f64, reps: usize) -> Self {
        let p = rejections / reps as f64;
        PowerEstimate {
            value: p,
            stderr: (p * (1.0 - p) / reps as f64).sqrt(),
            method: PowerMethod::MonteCarlo,
        }
    }
}

fn check_power_args(theta_sq_norm: f64, n: usize, d: usize, alpha: f64) -> Result<()> {
    check_alpha(alpha)?;
    if !(theta_sq_norm >= 0.0 && theta_sq_norm.is_finite()) {
        return Err(Error::domain(format!("|theta|^2 must be finite and >= 0, got {theta_sq_norm}")));
    }
    if n == 0 || d == 0 {
        return Err(Error::domain("n and d must be positive"));
    }
    Ok(())
}

/// `P(chi2_{d, lambda} > cutoff)` exactly, or by the normal approximation
/// `Phi((d + lambda - cutoff) / sqrt(2 (d + 2 lambda)))`.
fn exceedance(cutoff: f64, d: usize, lambda: f64, form: ClosedForm) -> Result<f64> {
    match form {
        ClosedForm::Exact if lambda == 0.0 => chi2_sf(cutoff, d as u32),
        ClosedForm::Exact => Ok(1.0 - noncentral_chi2_cdf(cutoff, d as u32, lambda)?),
        ClosedForm::Approx => {
            let d = d as f64;
            std_normal_cdf((d + lambda - cutoff) / (2.0 * (d + 2.0 * lambda)).sqrt())
        }
    }
}

/// Power of the classical LRT: `P(n |Ybar|^2 > c_{alpha,d})`.
pub fn power_classical(theta_sq_norm: f64, n: usize, d: usize, alpha: f64, form: ClosedForm) -> Result<PowerEstimate> {
    check_power_args(theta_sq_norm, n, d, alpha)?;
    let c = chi2_upper_quantile(alpha, d as u32)?;
    let lambda = n as f64 * theta_sq_norm;
    Ok(PowerEstimate::closed(exceedance(c, d, lambda, form)?, form))
}

/// Power of the limiting subsampling test:
/// `P(n |Ybar|^2 >= (10/3) ln((5/2)^{d/2} / alpha))`.
pub fn power_limiting_subsampling(
    theta_sq_norm: f64,
    n: usize,
    d: usize,
    alpha: f64,
    form: ClosedForm,
) -> Result<PowerEstimate> {
    check_power_args(theta_sq_norm, n, d, alpha)?;
    let cutoff = limiting_subsampling_threshold(d, alpha);
    let lambda = n as f64 * theta_sq_norm;
    Ok(PowerEstimate::closed(exceedance(cutoff, d, lambda, form)?, form))
}

/// Universal tests whose power is simulated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum McTest {
    Split,
    Crossfit,
    Subsampling,
}

impl McTest {
    pub fn as_str(&self) -> &'static str {
        match self {
            McTest::Split => "split",
            McTest::Crossfit => "crossfit",
            McTest::Subsampling => "subsampling",
        }
    }
}

/// Draws one dataset at `theta` and reports, for each of split, cross-fit and
/// `B`-subsampling, whether `0` is excluded from the level-`alpha` set.
///
/// The single split comes from `rng.substream(0)`; subsample `b` from
/// `rng.substream(b + 1)`.
pub fn null_exclusions(theta: &[f64], n: usize, alpha: f64, b: usize, rng: &RngStream) -> Result<[bool; 3]> {
    let d = theta.len();
    let mut data_rng = rng.clone();
    let sample = sample_gaussian(n, d, theta, &mut data_rng)?;
    let origin = vec![0.0; d];
    let mut scratch = SplitScratch::default();
    let one = split_means(&sample, 0.5, &mut rng.substream(0), &mut scratch)?;
    let split = split_log_statistic(&origin, &one, n)?.rejects(alpha);
    let crossfit = crossfit_log_statistic(&origin, &one, n)?.rejects(alpha);
    let subsampling = if b > 0 {
        let splits = subsample_means(&sample, b, 0.5, &rng.substream(1))?;
        subsampling_log_statistic(&origin, &splits, n)?.rejects(alpha)
    } else {
        false
    };
    Ok([split, crossfit, subsampling])
}

/// Monte Carlo power of one universal test at `theta`. Replication `r` uses
/// `rng.substream(r)`; the result does not depend on the worker count.
pub fn mc_power(
    test: McTest,
    theta: &[f64],
    n: usize,
    alpha: f64,
    b: usize,
    reps: usize,
    rng: &RngStream,
) -> Result<PowerEstimate> {
    check_alpha(alpha)?;
    if reps == 0 {
        return Err(Error::domain("reps must be >= 1"));
    }
    if test == McTest::Subsampling && b == 0 {
        return Err(Error::domain("subsampling power needs B >= 1"));
    }
    let b_used = if test == McTest::Subsampling { b } else { 0 };
    let idx = match test {
        McTest::Split => 0,
        McTest::Crossfit => 1,
        McTest::Subsampling => 2,
    };
    let acc = replicate(reps, 1, |r| {
        let ex = null_exclusions(theta, n, alpha, b_used, &rng.substream(r))?;
        Ok(vec![if ex[idx] { 1.0 } else { 0.0 }])
    })?;
    Ok(PowerEstimate::monte_carlo(acc[0].mean() * reps as f64, reps))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classical_size_is_alpha() {
        for &d in &[1, 2, 5, 30] {
            let p = power_classical(0.0, 1000, d, 0.1, ClosedForm::Exact).unwrap();
            assert!((p.value - 0.1).abs() < 1e-8, "d={d}: {}", p.value);
            assert_eq!(p.stderr, 0.0);
        }
    }

    #[test]
    fn limiting_subsampling_size_d2() {
        // 1 - F_{2,0}(10.7296) = exp(-10.7296 / 2)
        let p = power_limiting_subsampling(0.0, 1000, 2, 0.1, ClosedForm::Exact).unwrap();
        let cutoff = 10.0 / 3.0 * 25f64.ln();
        assert!((p.value - (-cutoff / 2.0).exp()).abs() < 1e-12);
        assert!((p.value - 0.00467).abs() < 1e-5);
    }

    #[test]
    fn high_signal_power_near_one() {
        let p = power_classical(10.0, 1000, 2, 0.1, ClosedForm::Exact).unwrap();
        assert!(p.value >= 0.9999);
    }

    #[test]
    fn exact_and_approx_close_at_lambda_100() {
        let e = power_classical(0.1, 1000, 2, 0.1, ClosedForm::Exact).unwrap();
        let a = power_classical(0.1, 1000, 2, 0.1, ClosedForm::Approx).unwrap();
        assert!((e.value - a.value).abs() <= 0.02);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(power_classical(-1.0, 10, 2, 0.1, ClosedForm::Exact).is_err());
        assert!(power_classical(1.0, 10, 2, 1.5, ClosedForm::Exact).is_err());
        assert!(mc_power(McTest::Split, &[0.0], 10, 0.1, 0, 0, &RngStream::new(0, 0)).is_err());
        assert!(mc_power(McTest::Subsampling, &[0.0], 10, 0.1, 0, 5, &RngStream::new(0, 0)).is_err());
    }

    #[test]
    fn mc_power_is_reproducible() {
        let rng = RngStream::new(3, 9);
        let a = mc_power(McTest::Crossfit, &[0.05, 0.05], 200, 0.1, 0, 64, &rng).unwrap();
        let b = mc_power(McTest::Crossfit, &[0.05, 0.05], 200, 0.1, 0, 64, &rng).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.method, PowerMethod::MonteCarlo);
    }
}
