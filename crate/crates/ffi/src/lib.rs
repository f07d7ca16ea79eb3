//! C ABI for `unilrt`.
//!
//! Every entry point returns a [`UnilrtStatus`] and writes results through
//! out-pointers. On failure the out-pointers are left untouched and a
//! message is available from [`unilrt_last_error_message`] on the same thread.
//! Panics never cross the boundary; they surface as `UNILRT_STATUS_PANIC`.
//!
//! Samples and split collections are opaque handles owned by the caller and
//! released with their matching `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use unilrt::data::{sample_gaussian, subsample_means, RngStream, SampleSet, SplitMeans};
use unilrt::doughnut::{intersection_power_exact, intersection_test, AnnulusNull};
use unilrt::power::{mc_power, power_classical, power_limiting_subsampling, ClosedForm, McTest};
use unilrt::regions::{
    classical_region, crossfit_log_statistic, limiting_subsampling_region, optimal_split_proportion,
    prob_ratio_leq4_bounds, ratio_bounds, ratio_expected_split_vs_classical, split_log_statistic,
    split_region, subsampling_log_statistic, expected_sq_radius_split, SphericalRegion,
};
use unilrt::specfun::{chi2_cdf, chi2_upper_quantile, noncentral_chi2_cdf, std_normal_cdf};
use unilrt::Error;

/// Result code of every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnilrtStatus {
    Ok = 0,
    /// An argument violates a precondition (alpha outside (0,1), dimension mismatch, ...).
    Domain = 1,
    /// A numerical routine failed to converge.
    Numeric = 2,
    /// The operation is not defined for this configuration.
    Unsupported = 3,
    /// Reading or writing data failed.
    Io = 4,
    /// A required pointer argument was null.
    NullPointer = 5,
    /// Rust code panicked; the library state is still valid.
    Panic = 6,
}

/// Closed form used by the power functions.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnilrtPowerForm {
    Exact = 0,
    NormalApprox = 1,
}

/// Universal tests whose power is simulated.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnilrtMcTest {
    Split = 0,
    Crossfit = 1,
    Subsampling = 2,
}

/// An `n x d` sample.
pub struct UnilrtSample {
    inner: SampleSet,
}

/// `B` random splits of one sample into `D0` and `D1`.
pub struct UnilrtSplits {
    n: usize,
    splits: Vec<SplitMeans>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn clear_last_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

enum Failure {
    Lib(Error),
    Null(&'static str),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type FfiResult = Result<(), Failure>;

fn status_of(e: &Error) -> UnilrtStatus {
    match e {
        Error::Domain(_) => UnilrtStatus::Domain,
        Error::Numeric(_) => UnilrtStatus::Numeric,
        Error::Unsupported(_) => UnilrtStatus::Unsupported,
        Error::Io(_) | Error::Csv(_) | Error::Json(_) => UnilrtStatus::Io,
    }
}

fn guard<F: FnOnce() -> FfiResult>(f: F) -> UnilrtStatus {
    clear_last_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => UnilrtStatus::Ok,
        Ok(Err(Failure::Lib(e))) => {
            set_last_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Failure::Null(name))) => {
            set_last_error(format!("null pointer passed for `{name}`"));
            UnilrtStatus::NullPointer
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".to_string());
            set_last_error(format!("panic: {msg}"));
            UnilrtStatus::Panic
        }
    }
}

unsafe fn out<'a, T>(p: *mut T, name: &'static str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or(Failure::Null(name))
}

unsafe fn borrow<'a, T>(p: *const T, name: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(name))
}

unsafe fn vector<'a>(p: *const f64, len: usize, name: &'static str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::Null(name));
    }
    Ok(slice::from_raw_parts(p, len))
}

fn dim(d: usize) -> Result<u32, Failure> {
    u32::try_from(d).map_err(|_| Failure::Lib(Error::Domain(format!("dimension {d} too large"))))
}

fn form(f: UnilrtPowerForm) -> ClosedForm {
    match f {
        UnilrtPowerForm::Exact => ClosedForm::Exact,
        UnilrtPowerForm::NormalApprox => ClosedForm::Approx,
    }
}

/// Message for the most recent failure on this thread, or null if the last
/// call succeeded. The pointer stays valid until the next call into this
/// library on the same thread; do not free it.
#[no_mangle]
pub extern "C" fn unilrt_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Static, NUL-terminated name of a status code.
#[no_mangle]
pub extern "C" fn unilrt_status_name(status: UnilrtStatus) -> *const c_char {
    let s: &'static [u8] = match status {
        UnilrtStatus::Ok => b"ok\0",
        UnilrtStatus::Domain => b"domain\0",
        UnilrtStatus::Numeric => b"numeric\0",
        UnilrtStatus::Unsupported => b"unsupported\0",
        UnilrtStatus::Io => b"io\0",
        UnilrtStatus::NullPointer => b"null_pointer\0",
        UnilrtStatus::Panic => b"panic\0",
    };
    s.as_ptr().cast()
}

// ---------------------------------------------------------------------------
// Special functions
// ---------------------------------------------------------------------------

/// Standard normal CDF.
///
/// # Safety
/// `out` must be a valid pointer to a `double`.
#[no_mangle]
pub unsafe extern "C" fn unilrt_std_normal_cdf(x: f64, out: *mut f64) -> UnilrtStatus {
    guard(|| {
        *unsafe { self::out(out, "out") }? = std_normal_cdf(x)?;
        Ok(())
    })
}

/// Chi-square CDF with `d` degrees of freedom.
///
/// # Safety
/// `out` must be a valid pointer to a `double`.
#[no_mangle]
pub unsafe extern "C" fn unilrt_chi2_cdf(x: f64, d: usize, out: *mut f64) -> UnilrtStatus {
    guard(|| {
        *unsafe { self::out(out, "out") }? = chi2_cdf(x, dim(d)?)?;
        Ok(())
    })
}

/// Upper quantile `c` with `P(chi2_d >= c) = alpha`.
///
/// # Safety
/// `out` must be a valid pointer to a `double`.
#[no_mangle]
pub unsafe extern "C" fn unilrt_chi2_upper_quantile(alpha: f64, d: usize, out: *mut f64) -> UnilrtStatus {
    guard(|| {
        *unsafe { self::out(out, "out") }? = chi2_upper_quantile(alpha, dim(d)?)?;
        Ok(())
    })
}

/// Noncentral chi-square CDF with `d` degrees of freedom and noncentrality `lambda`.
///
/// # Safety
/// `out` must be a valid pointer to a `double`.
#[no_mangle]
pub unsafe extern "C" fn unilrt_noncentral_chi2_cdf(x: f64, d: usize, lambda: f64, out: *mut f64) -> UnilrtStatus {
    guard(|| {
        *unsafe { self::out(out, "out") }? = noncentral_chi2_cdf(x, dim(d)?, lambda)?;
        Ok(())
    })
}

// ---------------------------------------------------------------------------
// Set size
// ---------------------------------------------------------------------------

/// Split proportion `p0` minimising the expected squared split radius.
///
/// # Safety
/// `out` must be a valid pointer to a `double`.
#[no_mangle]
pub unsafe extern "C" fn unilrt_optimal_split_proportion(alpha: f64, d: usize, out: *mut f64) -> UnilrtStatus {
    guard(|| {
        *unsafe { self::out(out, "out") }? = optimal_split_proportion(alpha, d)?;
        Ok(())
    })
}

/// Expected squared radius of the split set at proportion `p0`.
///
/// # Safety
/// `out` must be a valid pointer to a `double`.
#[no_mangle]
pub unsafe extern "C" fn unilrt_expected_sq_radius_split(
    alpha: f64,
    d: usize,
    n: usize,
    p0: f64,
    out: *mut f64,
) -> UnilrtStatus {
    guard(|| {
        *unsafe { self::out(out, "out") }? = expected_sq_radius_split(alpha, d, n, p0)?;
        Ok(())
    })
}

/// Ratio of expected squared radii, split (p0 = 1/2) over classical.
///
/// # Safety
/// `out` must be a valid pointer to a `double`.
#[no_mangle]
pub unsafe extern "C" fn unilrt_ratio_expected(alpha: f64, d: usize, out: *mut f64) -> UnilrtStatus {
    guard(|| {
        *unsafe { self::out(out, "out") }? = ratio_expected_split_vs_classical(alpha, d)?;
        Ok(())
    })
}

/// Lower and upper bounds on the expected-radius ratio.
///
/// `upper` is written as NaN and `domain_ok` as false when the upper bound's
/// hypotheses fail.
///
/// # Safety
/// All out-pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn unilrt_ratio_bounds(
    alpha: f64,
    d: usize,
    lower: *mut f64,
    upper: *mut f64,
    domain_ok: *mut bool,
) -> UnilrtStatus {
    guard(|| {
        let (lo, up, ok) = unsafe { (out(lower, "lower")?, out(upper, "upper")?, out(domain_ok, "domain_ok")?) };
        let b = ratio_bounds(alpha, d)?;
        *lo = b.lower;
        *up = b.upper.unwrap_or(f64::NAN);
        *ok = b.domain_ok;
        Ok(())
    })
}

/// Bounds on the probability that the squared-radius ratio is at most 4.
///
/// # Safety
/// All out-pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn unilrt_prob_ratio_bounds(
    alpha: f64,
    d: usize,
    lower: *mut f64,
    upper: *mut f64,
    condition_ok: *mut bool,
) -> UnilrtStatus {
    guard(|| {
        let (lo, up, ok) =
            unsafe { (out(lower, "lower")?, out(upper, "upper")?, out(condition_ok, "condition_ok")?) };
        let b = prob_ratio_leq4_bounds(alpha, d)?;
        *lo = b.lower;
        *up = b.upper;
        *ok = b.condition_ok;
        Ok(())
    })
}

// ---------------------------------------------------------------------------
// Power
// ---------------------------------------------------------------------------

/// Power of the classical LRT at squared mean norm `theta_sq_norm`.
///
/// # Safety
/// `out` must be a valid pointer to a `double`.
#[no_mangle]
pub unsafe extern "C" fn unilrt_power_classical(
    theta_sq_norm: f64,
    n: usize,
    d: usize,
    alpha: f64,
    power_form: UnilrtPowerForm,
    out: *mut f64,
) -> UnilrtStatus {
    guard(|| {
        *unsafe { self::out(out, "out") }? = power_classical(theta_sq_norm, n, d, alpha, form(power_form))?.value;
        Ok(())
    })
}

/// Power of the limiting (B to infinity) subsampling test.
///
/// # Safety
/// `out` must be a valid pointer to a `double`.
#[no_mangle]
pub unsafe extern "C" fn unilrt_power_limiting_subsampling(
    theta_sq_norm: f64,
    n: usize,
    d: usize,
    alpha: f64,
    power_form: UnilrtPowerForm,
    out: *mut f64,
) -> UnilrtStatus {
    guard(|| {
        *unsafe { self::out(out, "out") }? =
            power_limiting_subsampling(theta_sq_norm, n, d, alpha, form(power_form))?.value;
        Ok(())
    })
}

/// Monte Carlo power of a universal test at mean `theta[0..d]`.
///
/// Deterministic in `seed`. `b` is ignored except for subsampling.
///
/// # Safety
/// `theta` must point to `d` doubles; `value` and `stderr` must be valid.
#[no_mangle]
pub unsafe extern "C" fn unilrt_power_monte_carlo(
    test: UnilrtMcTest,
    theta: *const f64,
    d: usize,
    n: usize,
    alpha: f64,
    b: usize,
    reps: usize,
    seed: u64,
    value: *mut f64,
    stderr: *mut f64,
) -> UnilrtStatus {
    guard(|| {
        let theta = unsafe { vector(theta, d, "theta")? };
        let (v, se) = unsafe { (out(value, "value")?, out(stderr, "stderr")?) };
        let test = match test {
            UnilrtMcTest::Split => McTest::Split,
            UnilrtMcTest::Crossfit => McTest::Crossfit,
            UnilrtMcTest::Subsampling => McTest::Subsampling,
        };
        let est = mc_power(test, theta, n, alpha, b, reps, &RngStream::new(seed, 0))?;
        *v = est.value;
        *se = est.stderr;
        Ok(())
    })
}

/// Exact power of the intersection test of `r_in <= |theta| <= r_out`
/// at true mean norm `theta_norm`. Only the annulus `[0.5, 1]` is supported.
///
/// # Safety
/// `out` must be a valid pointer to a `double`.
#[no_mangle]
pub unsafe extern "C" fn unilrt_intersection_power_exact(
    theta_norm: f64,
    n: usize,
    d: usize,
    alpha: f64,
    r_in: f64,
    r_out: f64,
    out: *mut f64,
) -> UnilrtStatus {
    guard(|| {
        let o = unsafe { self::out(out, "out")? };
        let null = AnnulusNull::new(r_in, r_out)?;
        *o = intersection_power_exact(theta_norm, n, d, alpha, &null)?;
        Ok(())
    })
}

// ---------------------------------------------------------------------------
// Samples
// ---------------------------------------------------------------------------

/// Copies `n * d` row-major values into a new sample.
///
/// # Safety
/// `values` must point to `n * d` doubles; `sample` must be valid. The
/// handle written to `*sample` must be released with [`unilrt_sample_free`].
#[no_mangle]
pub unsafe extern "C" fn unilrt_sample_from_rows(
    values: *const f64,
    n: usize,
    d: usize,
    sample: *mut *mut UnilrtSample,
) -> UnilrtStatus {
    guard(|| {
        let slot = unsafe { out(sample, "sample")? };
        let len = n
            .checked_mul(d)
            .ok_or_else(|| Failure::Lib(Error::Domain("n * d overflows".into())))?;
        let values = unsafe { vector(values, len, "values")? }.to_vec();
        let inner = SampleSet::from_flat(n, d, values)?;
        *slot = Box::into_raw(Box::new(UnilrtSample { inner }));
        Ok(())
    })
}

/// Draws `n` observations from `N(theta, I_d)`; deterministic in `seed`.
///
/// # Safety
/// `theta` must point to `d` doubles; `sample` must be valid. Release the
/// handle with [`unilrt_sample_free`].
#[no_mangle]
pub unsafe extern "C" fn unilrt_sample_gaussian(
    n: usize,
    theta: *const f64,
    d: usize,
    seed: u64,
    sample: *mut *mut UnilrtSample,
) -> UnilrtStatus {
    guard(|| {
        let slot = unsafe { out(sample, "sample")? };
        let theta = unsafe { vector(theta, d, "theta")? };
        let inner = sample_gaussian(n, d, theta, &mut RngStream::new(seed, 0))?;
        *slot = Box::into_raw(Box::new(UnilrtSample { inner }));
        Ok(())
    })
}

/// Releases a sample. Null is a no-op.
///
/// # Safety
/// `sample` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn unilrt_sample_free(sample: *mut UnilrtSample) {
    if !sample.is_null() {
        drop(unsafe { Box::from_raw(sample) });
    }
}

/// Number of observations, or 0 for a null handle.
///
/// # Safety
/// `sample` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn unilrt_sample_n(sample: *const UnilrtSample) -> usize {
    unsafe { sample.as_ref() }.map_or(0, |s| s.inner.n())
}

/// Dimension, or 0 for a null handle.
///
/// # Safety
/// `sample` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn unilrt_sample_d(sample: *const UnilrtSample) -> usize {
    unsafe { sample.as_ref() }.map_or(0, |s| s.inner.d())
}

/// Copies the sample mean into `mean[0..len]`; `len` must equal the dimension.
///
/// # Safety
/// `sample` must be a live handle; `mean` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn unilrt_sample_mean(sample: *const UnilrtSample, mean: *mut f64, len: usize) -> UnilrtStatus {
    guard(|| {
        let s = unsafe { borrow(sample, "sample")? };
        let dst = unsafe { write_vector(mean, len, "mean")? };
        copy_exact(s.inner.mean(), dst)
    })
}

unsafe fn write_vector<'a>(p: *mut f64, len: usize, name: &'static str) -> Result<&'a mut [f64], Failure> {
    if p.is_null() {
        return Err(Failure::Null(name));
    }
    Ok(slice::from_raw_parts_mut(p, len))
}

fn copy_exact(src: &[f64], dst: &mut [f64]) -> FfiResult {
    if src.len() != dst.len() {
        return Err(Failure::Lib(Error::Domain(format!(
            "buffer holds {} values, need {}",
            dst.len(),
            src.len()
        ))));
    }
    dst.copy_from_slice(src);
    Ok(())
}

/// Tests `|Ybar| in [r_in, r_out]` at level `alpha` by intersecting the
/// classical set with the annulus.
///
/// # Safety
/// `sample` must be a live handle; `reject` must be valid.
#[no_mangle]
pub unsafe extern "C" fn unilrt_intersection_test(
    sample: *const UnilrtSample,
    alpha: f64,
    r_in: f64,
    r_out: f64,
    reject: *mut bool,
) -> UnilrtStatus {
    guard(|| {
        let s = unsafe { borrow(sample, "sample")? };
        let r = unsafe { out(reject, "reject")? };
        *r = intersection_test(&s.inner, &AnnulusNull::new(r_in, r_out)?, alpha)?;
        Ok(())
    })
}

/// A spherical confidence set `{theta : |theta - center|^2 <op> sq_radius}`.
/// The comparison is `<=` for the classical set and `<` otherwise.
unsafe fn write_region(region: SphericalRegion, center: *mut f64, len: usize, sq_radius: *mut f64) -> FfiResult {
    let r = unsafe { out(sq_radius, "sq_radius")? };
    let dst = unsafe { write_vector(center, len, "center")? };
    copy_exact(&region.center, dst)?;
    *r = region.sq_radius;
    Ok(())
}

/// Classical LRT set: writes its center (`len` = d values) and squared radius.
///
/// # Safety
/// `sample` must be a live handle; `center` must point to `len` writable
/// doubles; `sq_radius` must be valid.
#[no_mangle]
pub unsafe extern "C" fn unilrt_classical_region(
    sample: *const UnilrtSample,
    alpha: f64,
    center: *mut f64,
    len: usize,
    sq_radius: *mut f64,
) -> UnilrtStatus {
    guard(|| {
        let s = unsafe { borrow(sample, "sample")? };
        unsafe { write_region(classical_region(&s.inner, alpha)?, center, len, sq_radius) }
    })
}

/// Limiting (B to infinity) subsampling set: center and squared radius.
///
/// # Safety
/// As for [`unilrt_classical_region`].
#[no_mangle]
pub unsafe extern "C" fn unilrt_limiting_subsampling_region(
    sample: *const UnilrtSample,
    alpha: f64,
    center: *mut f64,
    len: usize,
    sq_radius: *mut f64,
) -> UnilrtStatus {
    guard(|| {
        let s = unsafe { borrow(sample, "sample")? };
        unsafe { write_region(limiting_subsampling_region(&s.inner, alpha)?, center, len, sq_radius) }
    })
}

// ---------------------------------------------------------------------------
// Splits
// ---------------------------------------------------------------------------

/// Draws `b` independent splits of `sample` with `D0` holding a `p0` share.
/// Deterministic in `seed`.
///
/// # Safety
/// `sample` must be a live handle; `splits` must be valid. Release the
/// handle with [`unilrt_splits_free`].
#[no_mangle]
pub unsafe extern "C" fn unilrt_splits_new(
    sample: *const UnilrtSample,
    b: usize,
    p0: f64,
    seed: u64,
    splits: *mut *mut UnilrtSplits,
) -> UnilrtStatus {
    guard(|| {
        let s = unsafe { borrow(sample, "sample")? };
        let slot = unsafe { out(splits, "splits")? };
        let means = subsample_means(&s.inner, b, p0, &RngStream::new(seed, 0))?;
        *slot = Box::into_raw(Box::new(UnilrtSplits {
            n: s.inner.n(),
            splits: means,
        }));
        Ok(())
    })
}

/// Releases a split collection. Null is a no-op.
///
/// # Safety
/// `splits` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn unilrt_splits_free(splits: *mut UnilrtSplits) {
    if !splits.is_null() {
        drop(unsafe { Box::from_raw(splits) });
    }
}

/// Number of splits, or 0 for a null handle.
///
/// # Safety
/// `splits` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn unilrt_splits_len(splits: *const UnilrtSplits) -> usize {
    unsafe { splits.as_ref() }.map_or(0, |s| s.splits.len())
}

fn pick(s: &UnilrtSplits, index: usize) -> Result<&SplitMeans, Failure> {
    s.splits.get(index).ok_or_else(|| {
        Failure::Lib(Error::Domain(format!(
            "split index {index} out of range for {} splits",
            s.splits.len()
        )))
    })
}

/// Log split statistic of split `index` at `theta[0..d]`. `theta` is
/// rejected at level alpha iff the value is at least `ln(1/alpha)`.
///
/// # Safety
/// `splits` must be a live handle; `theta` must point to `d` doubles;
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn unilrt_split_log_statistic(
    splits: *const UnilrtSplits,
    index: usize,
    theta: *const f64,
    d: usize,
    out: *mut f64,
) -> UnilrtStatus {
    guard(|| {
        let s = unsafe { borrow(splits, "splits")? };
        let theta = unsafe { vector(theta, d, "theta")? };
        let o = unsafe { self::out(out, "out")? };
        *o = split_log_statistic(theta, pick(s, index)?, s.n)?.log_value;
        Ok(())
    })
}

/// Log cross-fit statistic of split `index` at `theta[0..d]`.
///
/// # Safety
/// As for [`unilrt_split_log_statistic`].
#[no_mangle]
pub unsafe extern "C" fn unilrt_crossfit_log_statistic(
    splits: *const UnilrtSplits,
    index: usize,
    theta: *const f64,
    d: usize,
    out: *mut f64,
) -> UnilrtStatus {
    guard(|| {
        let s = unsafe { borrow(splits, "splits")? };
        let theta = unsafe { vector(theta, d, "theta")? };
        let o = unsafe { self::out(out, "out")? };
        *o = crossfit_log_statistic(theta, pick(s, index)?, s.n)?.log_value;
        Ok(())
    })
}

/// Log subsampling statistic over all splits at `theta[0..d]`.
///
/// # Safety
/// `splits` must be a live handle; `theta` must point to `d` doubles;
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn unilrt_subsampling_log_statistic(
    splits: *const UnilrtSplits,
    theta: *const f64,
    d: usize,
    out: *mut f64,
) -> UnilrtStatus {
    guard(|| {
        let s = unsafe { borrow(splits, "splits")? };
        let theta = unsafe { vector(theta, d, "theta")? };
        let o = unsafe { self::out(out, "out")? };
        *o = subsampling_log_statistic(theta, &s.splits, s.n)?.log_value;
        Ok(())
    })
}

/// Split set of split `index`: writes its center (`len` = d) and squared radius.
///
/// # Safety
/// `splits` must be a live handle; `center` must point to `len` writable
/// doubles; `sq_radius` must be valid.
#[no_mangle]
pub unsafe extern "C" fn unilrt_split_region(
    splits: *const UnilrtSplits,
    index: usize,
    alpha: f64,
    center: *mut f64,
    len: usize,
    sq_radius: *mut f64,
) -> UnilrtStatus {
    guard(|| {
        let s = unsafe { borrow(splits, "splits")? };
        unsafe { write_region(split_region(pick(s, index)?, s.n, alpha)?, center, len, sq_radius) }
    })
}
