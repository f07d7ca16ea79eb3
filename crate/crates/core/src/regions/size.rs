//! Closed forms for the size of the split set relative to the classical ball.

use crate::error::{check_alpha, Error, Result};
use crate::specfun::{chi2_pdf, chi2_upper_quantile};

fn check_dim(d: usize) -> Result<()> {
    if d == 0 {
        Err(Error::domain("dimension must be >= 1"))
    } else {
        Ok(())
    }
}

/// Split proportion minimizing the expected squared split radius.
pub fn optimal_split_proportion(alpha: f64, d: usize) -> Result<f64> {
    check_alpha(alpha)?;
    optimal_split_proportion_log((1.0 / alpha).ln(), d)
}

/// [`optimal_split_proportion`] parameterised by `L = ln(1/alpha)`, for
/// levels too small to represent.
///
/// `1 - (sqrt(4d^2 + 8dL) - 2d) / (4L)`, rewritten as
/// `1 - 2d / (sqrt(4d^2 + 8dL) + 2d)` to avoid cancellation at large `d`.
pub fn optimal_split_proportion_log(log_inv_alpha: f64, d: usize) -> Result<f64> {
    check_dim(d)?;
    if !(log_inv_alpha > 0.0 && log_inv_alpha.is_finite()) {
        return Err(Error::domain(format!("ln(1/alpha) must be positive, got {log_inv_alpha}")));
    }
    let d = d as f64;
    let root = (4.0 * d * d + 8.0 * d * log_inv_alpha).sqrt();
    Ok(1.0 - 2.0 * d / (root + 2.0 * d))
}

/// `E[r^2]` of the split set at proportion `p0`:
/// `(2 / (n p0)) ln(1/alpha) + (1/(n p0) + 1/(n (1 - p0))) d`.
pub fn expected_sq_radius_split(alpha: f64, d: usize, n: usize, p0: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_dim(d)?;
    if !(p0 > 0.0 && p0 < 1.0) {
        return Err(Error::domain(format!("p0 must lie in (0, 1), got {p0}")));
    }
    if n == 0 {
        return Err(Error::domain("n must be positive"));
    }
    let n = n as f64;
    let l = (1.0 / alpha).ln();
    Ok(2.0 / (n * p0) * l + (1.0 / (n * p0) + 1.0 / (n * (1.0 - p0))) * d as f64)
}

/// `E[r^2 split] / r^2 classical = (4 ln(1/alpha) + 4d) / c_{alpha,d}`.
pub fn ratio_expected_split_vs_classical(alpha: f64, d: usize) -> Result<f64> {
    check_alpha(alpha)?;
    check_dim(d)?;
    let c = chi2_upper_quantile(alpha, d as u32)?;
    let l = (1.0 / alpha).ln();
    Ok((4.0 * l + 4.0 * d as f64) / c)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioBounds {
    pub lower: f64,
    /// Present only when `domain_ok`.
    pub upper: Option<f64>,
    /// Whether the upper bound's hypotheses hold
    /// (`d >= 2, alpha <= 0.17` or `d = 1, alpha <= exp(-5(1 + sqrt 5)/4)`).
    pub domain_ok: bool,
}

/// Bounds on [`ratio_expected_split_vs_classical`].
pub fn ratio_bounds(alpha: f64, d: usize) -> Result<RatioBounds> {
    check_alpha(alpha)?;
    ratio_bounds_log((1.0 / alpha).ln(), d)
}

/// [`ratio_bounds`] in terms of `L = ln(1/alpha)`.
pub fn ratio_bounds_log(log_inv_alpha: f64, d: usize) -> Result<RatioBounds> {
    check_dim(d)?;
    let l = log_inv_alpha;
    if !(l > 0.0 && l.is_finite()) {
        return Err(Error::domain(format!("ln(1/alpha) must be positive, got {l}")));
    }
    let df = d as f64;
    let numer = 4.0 * l + 4.0 * df;
    let lower = numer / (2.0 * l + df + 2.0 * (df * l).sqrt());
    let (domain_ok, upper) = if d >= 2 {
        let ok = l >= (1.0f64 / 0.17).ln();
        (ok, numer / (2.0 * l + df - 2.5))
    } else {
        let ok = l >= 5.0 * (1.0 + 5f64.sqrt()) / 4.0;
        (ok, numer / (2.0 * l + 9.0 - 4.0 * (5.0 + 2.0 * l).sqrt()))
    };
    Ok(RatioBounds {
        lower,
        upper: domain_ok.then_some(upper),
        domain_ok,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbRatioBounds {
    pub lower: f64,
    pub upper: f64,
    /// `c_{alpha,d} + ln(alpha) > d - 2`.
    pub condition_ok: bool,
}

/// Bounds on `P(r^2 split / r^2 classical <= 4)`:
/// `1 - alpha - L f_d(c - L) <= P <= 1 - alpha - L f_d(c)`, `L = ln(1/alpha)`.
pub fn prob_ratio_leq4_bounds(alpha: f64, d: usize) -> Result<ProbRatioBounds> {
    check_alpha(alpha)?;
    check_dim(d)?;
    let c = chi2_upper_quantile(alpha, d as u32)?;
    let l = (1.0 / alpha).ln();
    let shifted = c - l;
    let condition_ok = shifted > d as f64 - 2.0;
    let lower = if shifted >= 0.0 {
        1.0 - alpha - l * chi2_pdf(shifted, d as u32)?
    } else {
        f64::NAN
    };
    let upper = 1.0 - alpha - l * chi2_pdf(c, d as u32)?;
    Ok(ProbRatioBounds {
        lower,
        upper,
        condition_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p0_star_reference_value() {
        // 1 - (sqrt(4 + 8 ln 10) - 2) / (4 ln 10), evaluated directly
        let l = 10f64.ln();
        let direct = 1.0 - ((4.0 + 8.0 * l).sqrt() - 2.0) / (4.0 * l);
        let p = optimal_split_proportion(0.1, 1).unwrap();
        assert!((p - direct).abs() < 1e-14);
        assert!((p - 0.703046).abs() < 1e-6);
    }

    #[test]
    fn p0_star_limits() {
        let p = optimal_split_proportion(0.1, 100_000_000).unwrap();
        assert!((0.499..=0.501).contains(&p));
        assert!(optimal_split_proportion_log(100.0, 1).unwrap() > 0.93);
        assert!(optimal_split_proportion(1.0, 1).is_err());
        assert!(optimal_split_proportion(0.0, 1).is_err());
    }

    #[test]
    fn expected_radius_half_split() {
        let r = expected_sq_radius_split(0.1, 2, 1000, 0.5).unwrap();
        let direct = 4.0 / 1000.0 * (10f64.ln() + 2.0);
        assert!((r - direct).abs() < 1e-15);
        assert!((r - 0.0172103).abs() < 1e-7);
        assert!(expected_sq_radius_split(0.1, 2, 1000, 1.0).is_err());
    }

    #[test]
    fn ratio_reference_d2() {
        let r = ratio_expected_split_vs_classical(0.1, 2).unwrap();
        let direct = (4.0 * 10f64.ln() + 8.0) / (2.0 * 10f64.ln());
        assert!((r - direct).abs() < 1e-10);
        assert!((r - 3.7372).abs() < 1e-4);
    }

    #[test]
    fn bounds_flag_domains() {
        assert!(!ratio_bounds(0.2, 5).unwrap().domain_ok);
        assert!(ratio_bounds(0.17, 5).unwrap().domain_ok);
        let edge = (-5.0 * (1.0 + 5f64.sqrt()) / 4.0).exp();
        assert!(!ratio_bounds(edge * 1.01, 1).unwrap().domain_ok);
        assert!(ratio_bounds(edge * 0.99, 1).unwrap().domain_ok);
        assert!(ratio_bounds(0.2, 5).unwrap().upper.is_none());
    }

    #[test]
    fn prob_bounds_ordered() {
        for &d in &[2, 10, 100] {
            let b = prob_ratio_leq4_bounds(0.1, d).unwrap();
            assert!(b.condition_ok);
            assert!(b.lower <= b.upper);
            assert!(b.upper <= 0.9);
        }
    }
}
