//! Special functions: standard normal CDF and the central and noncentral
//! chi-squared distributions.
//!
//! The regularized incomplete gamma function is evaluated with the usual
//! regime split: the power series below `x < a + 1`, the Lentz continued
//! fraction for the upper tail above it. Both expansions need `O(sqrt(a))`
//! terms near the transition, so the iteration budget grows with the shape.

use crate::error::{Error, Result};

/// Convergence controls for the iterative routines in this module.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_iter: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            max_iter: 500,
        }
    }
}

impl Tolerance {
    pub fn new(abs_tol: f64, rel_tol: f64, max_iter: usize) -> Result<Self> {
        if !(abs_tol > 0.0 && rel_tol > 0.0 && max_iter >= 1) {
            return Err(Error::domain(format!(
                "tolerance requires abs_tol > 0, rel_tol > 0, max_iter >= 1 \
                 (got {abs_tol}, {rel_tol}, {max_iter})"
            )));
        }
        Ok(Tolerance {
            abs_tol,
            rel_tol,
            max_iter,
        })
    }

    fn budget(&self, scale: f64) -> usize {
        self.max_iter + (20.0 * scale.max(0.0).sqrt()).ceil() as usize
    }
}

/// ln(1/alpha) beyond which the chi-squared upper tail underflows.
pub const MAX_LOG_INV_ALPHA: f64 = 700.0;

const SERIES_EPS: f64 = 1e-16;
const FPMIN: f64 = 1e-300;

/// Standard normal CDF.
pub fn std_normal_cdf(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::domain(format!("normal cdf needs a finite argument, got {x}")));
    }
    Ok(0.5 * libm::erfc(-x / std::f64::consts::SQRT_2))
}

fn check_dof(d: u32) -> Result<()> {
    if d == 0 {
        Err(Error::domain("degrees of freedom must be positive"))
    } else {
        Ok(())
    }
}

fn check_x(x: f64) -> Result<()> {
    if x.is_nan() || x < 0.0 {
        Err(Error::domain(format!("chi-squared argument must be >= 0, got {x}")))
    } else {
        Ok(())
    }
}

/// Chi-squared density with `d` degrees of freedom.
pub fn chi2_pdf(x: f64, d: u32) -> Result<f64> {
    check_x(x)?;
    check_dof(d)?;
    let k = 0.5 * d as f64;
    if x == 0.0 {
        return Ok(match d {
            1 => f64::INFINITY,
            2 => 0.5,
            _ => 0.0,
        });
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    let log_f = (k - 1.0) * x.ln() - 0.5 * x - k * std::f64::consts::LN_2 - libm::lgamma(k);
    Ok(log_f.exp())
}

/// Regularized incomplete gamma functions `(P(a, x), Q(a, x))`.
fn incomplete_gamma(a: f64, x: f64, tol: &Tolerance) -> Result<(f64, f64)> {
    if x == 0.0 {
        return Ok((0.0, 1.0));
    }
    if x.is_infinite() {
        return Ok((1.0, 0.0));
    }
    let log_prefactor = a * x.ln() - x - libm::lgamma(a);
    let budget = tol.budget(a.max(x));
    if x < a + 1.0 {
        let mut term = 1.0 / a;
        let mut sum = term;
        let mut converged = false;
        for n in 1..=budget {
            term *= x / (a + n as f64);
            sum += term;
            if term.abs() < sum.abs() * SERIES_EPS {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::numeric(format!(
                "incomplete gamma series did not converge (a={a}, x={x})"
            )));
        }
        let p = (log_prefactor + sum.ln()).exp().min(1.0);
        Ok((p, 1.0 - p))
    } else {
        // modified Lentz
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / FPMIN;
        let mut d = 1.0 / b;
        let mut h = d;
        let mut converged = false;
        for i in 1..=budget {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < FPMIN {
                d = FPMIN;
            }
            c = b + an / c;
            if c.abs() < FPMIN {
                c = FPMIN;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if (delta - 1.0).abs() < SERIES_EPS {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::numeric(format!(
                "incomplete gamma continued fraction did not converge (a={a}, x={x})"
            )));
        }
        let q = (log_prefactor + h.ln()).exp().min(1.0);
        Ok((1.0 - q, q))
    }
}

/// Chi-squared CDF, `P(d/2, x/2)`.
pub fn chi2_cdf(x: f64, d: u32) -> Result<f64> {
    chi2_cdf_with(x, d, &Tolerance::default())
}

pub fn chi2_cdf_with(x: f64, d: u32, tol: &Tolerance) -> Result<f64> {
    check_x(x)?;
    check_dof(d)?;
    Ok(incomplete_gamma(0.5 * d as f64, 0.5 * x, tol)?.0)
}

/// Chi-squared survival function, `Q(d/2, x/2)`. Accurate deep into the upper tail.
pub fn chi2_sf(x: f64, d: u32) -> Result<f64> {
    check_x(x)?;
    check_dof(d)?;
    Ok(incomplete_gamma(0.5 * d as f64, 0.5 * x, &Tolerance::default())?.1)
}

/// Lower and upper bounds on the upper `alpha` quantile of chi-squared(d),
/// valid for `d >= 2` and `alpha <= 0.17`.
pub fn quantile_sandwich(alpha: f64, d: u32) -> (f64, f64) {
    let l = (1.0 / alpha).ln();
    let d = d as f64;
    (d + 2.0 * l - 2.5, d + 2.0 * l + 2.0 * (d * l).sqrt())
}

/// Upper `alpha` quantile `c_{alpha,d}`: the `c` with `P(chi2_d > c) = alpha`.
pub fn chi2_upper_quantile(alpha: f64, d: u32) -> Result<f64> {
    chi2_upper_quantile_with(alpha, d, &Tolerance::default())
}

pub fn chi2_upper_quantile_with(alpha: f64, d: u32, tol: &Tolerance) -> Result<f64> {
    crate::error::check_alpha(alpha)?;
    check_dof(d)?;
    let log_inv = -alpha.ln();
    if log_inv > MAX_LOG_INV_ALPHA {
        return Err(Error::numeric(format!(
            "ln(1/alpha) = {log_inv} exceeds {MAX_LOG_INV_ALPHA}; the chi-squared tail underflows"
        )));
    }
    if d == 2 {
        return Ok(2.0 * log_inv);
    }
    let a = 0.5 * d as f64;
    // excess(x) > 0 while x is below the quantile
    let excess = |x: f64| -> Result<f64> {
        let (p, q) = incomplete_gamma(a, 0.5 * x, tol)?;
        Ok(if alpha < 0.5 { q - alpha } else { (1.0 - alpha) - p })
    };

    let df = d as f64;
    let mut bracket = None;
    if d >= 2 && alpha <= 0.17 {
        let (lo, hi) = quantile_sandwich(alpha, d);
        let lo = lo.max(0.0);
        if excess(lo)? >= 0.0 && excess(hi)? <= 0.0 {
            bracket = Some((lo, hi));
        }
    }
    let (mut lo, mut hi) = match bracket {
        Some(b) => b,
        None => {
            let mut hi = df + 40.0 * df.sqrt() + 4.0 * log_inv;
            let mut grow = 0;
            while excess(hi)? > 0.0 {
                hi *= 2.0;
                grow += 1;
                if grow > 64 {
                    return Err(Error::numeric("could not bracket chi-squared quantile"));
                }
            }
            (0.0, hi)
        }
    };

    let budget = tol.budget(df) + 200;
    let mut iter = 0;
    while hi - lo > tol.rel_tol * hi {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if excess(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        iter += 1;
        if iter > budget {
            return Err(Error::numeric(format!(
                "chi-squared quantile bisection exceeded {budget} iterations"
            )));
        }
    }

    // Newton polish, kept inside the bracket
    let mut x = 0.5 * (lo + hi);
    for _ in 0..2 {
        let f = chi2_pdf(x, d)?;
        if !(f > 0.0 && f.is_finite()) {
            break;
        }
        let step = excess(x)? / f;
        let next = x + step;
        if next > lo && next < hi {
            x = next;
        } else {
            break;
        }
    }
    Ok(x)
}

/// Noncentral chi-squared CDF via the Poisson mixture of central CDFs.
pub fn noncentral_chi2_cdf(x: f64, d: u32, lambda: f64) -> Result<f64> {
    noncentral_chi2_cdf_with(x, d, lambda, &Tolerance::default())
}

/// The series starts at the Poisson mode `k = floor(lambda/2)` and grows in
/// both directions. Each side stops once a geometric bound on its remaining
/// weight, times the largest CDF value it could carry, drops below
/// `abs_tol / 2`.
pub fn noncentral_chi2_cdf_with(x: f64, d: u32, lambda: f64, tol: &Tolerance) -> Result<f64> {
    check_x(x)?;
    check_dof(d)?;
    if lambda.is_nan() || lambda < 0.0 || lambda.is_infinite() {
        return Err(Error::domain(format!(
            "noncentrality must be finite and >= 0, got {lambda}"
        )));
    }
    if lambda == 0.0 {
        return chi2_cdf_with(x, d, tol);
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    let h = 0.5 * lambda;
    let a0 = 0.5 * d as f64;
    let hx = 0.5 * x;
    let mode = h.floor();
    let m = mode as u64;
    let w_mode = (-h + mode * h.ln() - libm::lgamma(mode + 1.0)).exp();
    let p_mode = incomplete_gamma(a0 + mode, hx, tol)?.0;
    let mut sum = w_mode * p_mode;
    let half_tol = 0.5 * tol.abs_tol;
    let budget = tol.budget(h) as u64;

    // upward: weights and P(a0 + k) both decrease once k > h
    let mut w = w_mode;
    let mut k = m;
    let mut done_up = false;
    while !done_up {
        k += 1;
        w *= h / k as f64;
        let p = incomplete_gamma(a0 + k as f64, hx, tol)?.0;
        sum += w * p;
        let ratio = h / (k + 1) as f64;
        if ratio < 1.0 {
            let tail = w * ratio / (1.0 - ratio);
            if tail * p < half_tol {
                done_up = true;
            }
        }
        if k - m > budget {
            return Err(Error::numeric(format!(
                "noncentral chi-squared series did not converge (x={x}, d={d}, lambda={lambda})"
            )));
        }
    }

    // downward to k = 0
    let mut w = w_mode;
    let mut k = m;
    while k > 0 {
        w *= k as f64 / h;
        k -= 1;
        let p = incomplete_gamma(a0 + k as f64, hx, tol)?.0;
        sum += w * p;
        if k == 0 {
            break;
        }
        let ratio = k as f64 / h;
        if ratio < 1.0 {
            let tail = w * ratio / (1.0 - ratio);
            if tail < half_tol {
                break;
            }
        }
        if m - k > budget {
            return Err(Error::numeric(format!(
                "noncentral chi-squared series did not converge (x={x}, d={d}, lambda={lambda})"
            )));
        }
    }
    Ok(sum.clamp(0.0, 1.0))
}
