//! Gaussian samples, reproducible splitting, and cached means.

mod io;
mod rng;

pub use io::{read_sample_csv, write_sample_csv};
pub use rng::{mix64, RngStream};

use std::borrow::Borrow;

use crate::error::{Error, Result};

/// An `n x d` data matrix (row-major) with its column means.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    values: Vec<f64>,
    n: usize,
    d: usize,
    mean: Vec<f64>,
}

impl SampleSet {
    pub fn from_flat(n: usize, d: usize, values: Vec<f64>) -> Result<Self> {
        if n < 2 || d < 1 {
            return Err(Error::domain(format!("sample needs n >= 2 and d >= 1, got n={n}, d={d}")));
        }
        if values.len() != n * d {
            return Err(Error::domain(format!(
                "expected {} values for a {n}x{d} sample, got {}",
                n * d,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("sample contains non-finite values"));
        }
        let mut mean = vec![0.0; d];
        for row in values.chunks_exact(d) {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        let inv = 1.0 / n as f64;
        mean.iter_mut().for_each(|m| *m *= inv);
        Ok(SampleSet { values, n, d, mean })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::domain("rows have inconsistent lengths"));
        }
        SampleSet::from_flat(rows.len(), d, rows.concat())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Sample mean `Ybar`.
    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.d..(i + 1) * self.d]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.d)
    }
}

/// `n` iid draws from `N(theta, I_d)`.
pub fn sample_gaussian(n: usize, d: usize, theta: &[f64], rng: &mut RngStream) -> Result<SampleSet> {
    if n < 2 || d < 1 {
        return Err(Error::domain(format!("sample needs n >= 2 and d >= 1, got n={n}, d={d}")));
    }
    if theta.len() != d {
        return Err(Error::domain(format!("theta has length {}, expected {d}", theta.len())));
    }
    let mut values = Vec::with_capacity(n * d);
    for _ in 0..n {
        for &t in theta {
            values.push(t + rng.standard_normal());
        }
    }
    SampleSet::from_flat(n, d, values)
}

/// Means of the two halves of a split; all the statistics need.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitMeans {
    /// Requested proportion of observations in `D0`.
    pub p0: f64,
    pub n0: usize,
    pub n1: usize,
    /// `Ybar0`, the mean over `D0` (likelihood-evaluation half).
    pub mean0: Vec<f64>,
    /// `Ybar1`, the mean over `D1` (estimation half).
    pub mean1: Vec<f64>,
}

impl SplitMeans {
    pub fn n(&self) -> usize {
        self.n0 + self.n1
    }

    pub fn d(&self) -> usize {
        self.mean0.len()
    }
}

/// An index partition of a sample into `D0` and `D1` with cached means.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitPair {
    pub indices0: Vec<usize>,
    pub indices1: Vec<usize>,
    pub means: SplitMeans,
}

impl Borrow<SplitMeans> for SplitPair {
    fn borrow(&self) -> &SplitMeans {
        &self.means
    }
}

/// Size of `D0`: `round(n * p0)`, halves rounding up.
pub fn d0_size(n: usize, p0: f64) -> Result<usize> {
    if !(p0.is_finite() && p0 > 0.0 && p0 < 1.0) {
        return Err(Error::domain(format!("p0 must lie in (0, 1), got {p0}")));
    }
    let n0 = (n as f64 * p0).round() as usize;
    if n0 < 1 || n0 + 1 > n {
        return Err(Error::domain(format!(
            "p0={p0} with n={n} leaves an empty side (|D0|={n0})"
        )));
    }
    Ok(n0)
}

/// Reusable permutation buffer for repeated splitting of one sample.
#[derive(Debug, Default)]
pub struct SplitScratch {
    perm: Vec<usize>,
}

fn shuffle_prefix(scratch: &mut SplitScratch, n: usize, n0: usize, rng: &mut RngStream) {
    scratch.perm.clear();
    scratch.perm.extend(0..n);
    for i in 0..n0 {
        let j = i + rng.below((n - i) as u64) as usize;
        scratch.perm.swap(i, j);
    }
}

fn side_mean(sample: &SampleSet, idx: &[usize]) -> Vec<f64> {
    let mut m = vec![0.0; sample.d];
    for &i in idx {
        for (acc, v) in m.iter_mut().zip(sample.row(i)) {
            *acc += v;
        }
    }
    let inv = 1.0 / idx.len() as f64;
    m.iter_mut().for_each(|x| *x *= inv);
    m
}

/// Means of a uniformly random split without materialising the index sets.
pub fn split_means(
    sample: &SampleSet,
    p0: f64,
    rng: &mut RngStream,
    scratch: &mut SplitScratch,
) -> Result<SplitMeans> {
    let n = sample.n;
    let n0 = d0_size(n, p0)?;
    shuffle_prefix(scratch, n, n0, rng);
    let (left, right) = scratch.perm.split_at(n0);
    Ok(SplitMeans {
        p0,
        n0,
        n1: n - n0,
        mean0: side_mean(sample, left),
        mean1: side_mean(sample, right),
    })
}

/// Uniformly random partition with `|D0| = round(n * p0)` via a partial
/// Fisher-Yates shuffle.
pub fn split(sample: &SampleSet, p0: f64, rng: &mut RngStream) -> Result<SplitPair> {
    let mut scratch = SplitScratch::default();
    let means = split_means(sample, p0, rng, &mut scratch)?;
    let indices0 = scratch.perm[..means.n0].to_vec();
    let indices1 = scratch.perm[means.n0..].to_vec();
    Ok(SplitPair {
        indices0,
        indices1,
        means,
    })
}

/// `b` independent splits; split `i` draws from `rng.substream(i)`.
pub fn subsample_splits(sample: &SampleSet, b: usize, p0: f64, rng: &RngStream) -> Result<Vec<SplitPair>> {
    if b < 1 {
        return Err(Error::domain("number of subsamples must be >= 1"));
    }
    (0..b as u64)
        .map(|i| split(sample, p0, &mut rng.substream(i)))
        .collect()
}

/// Split means of a fresh `N(theta, I_d)` sample of size `n`, drawn from
/// their exact joint law (`Ybar0 ~ N(theta, I/n0)`, `Ybar1 ~ N(theta, I/n1)`,
/// independent) without materialising the observations.
pub fn sample_split_means(n: usize, p0: f64, theta: &[f64], rng: &mut RngStream) -> Result<SplitMeans> {
    if theta.is_empty() {
        return Err(Error::domain("theta must have at least one coordinate"));
    }
    let n0 = d0_size(n, p0)?;
    let n1 = n - n0;
    let (s0, s1) = (1.0 / (n0 as f64).sqrt(), 1.0 / (n1 as f64).sqrt());
    let mean0 = theta.iter().map(|t| t + s0 * rng.standard_normal()).collect();
    let mean1 = theta.iter().map(|t| t + s1 * rng.standard_normal()).collect();
    Ok(SplitMeans { p0, n0, n1, mean0, mean1 })
}

/// Like [`subsample_splits`] but keeps only the means.
pub fn subsample_means(sample: &SampleSet, b: usize, p0: f64, rng: &RngStream) -> Result<Vec<SplitMeans>> {
    if b < 1 {
        return Err(Error::domain("number of subsamples must be >= 1"));
    }
    let mut scratch = SplitScratch::default();
    (0..b as u64)
        .map(|i| split_means(sample, p0, &mut rng.substream(i), &mut scratch))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(n: usize, d: usize, seed: u64) -> SampleSet {
        sample_gaussian(n, d, &vec![0.3; d], &mut RngStream::new(seed, 0)).unwrap()
    }

    #[test]
    fn rejects_tiny_samples() {
        assert!(sample_gaussian(1, 2, &[0.0, 0.0], &mut RngStream::new(0, 0)).is_err());
        assert!(sample_gaussian(5, 0, &[], &mut RngStream::new(0, 0)).is_err());
        assert!(sample_gaussian(5, 2, &[0.0], &mut RngStream::new(0, 0)).is_err());
    }

    #[test]
    fn sampling_is_deterministic() {
        assert_eq!(toy(50, 3, 11), toy(50, 3, 11));
        assert_ne!(toy(50, 3, 11), toy(50, 3, 12));
    }

    #[test]
    fn half_split_sizes_and_partition() {
        let s = toy(1000, 2, 1);
        let p = split(&s, 0.5, &mut RngStream::new(3, 3)).unwrap();
        assert_eq!(p.indices0.len(), 500);
        assert_eq!(p.indices1.len(), 500);
        let mut all: Vec<usize> = p.indices0.iter().chain(&p.indices1).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..1000).collect::<Vec<_>>());
    }

    #[test]
    fn half_split_mean_identity() {
        let s = toy(1000, 4, 2);
        let p = split(&s, 0.5, &mut RngStream::new(3, 4)).unwrap();
        for j in 0..4 {
            let combined = 0.5 * p.means.mean0[j] + 0.5 * p.means.mean1[j];
            assert!((combined - s.mean()[j]).abs() < 1e-12);
        }
    }

    #[test]
    fn odd_n_rounds_d0_up() {
        let s = toy(11, 1, 3);
        let p = split(&s, 0.5, &mut RngStream::new(0, 1)).unwrap();
        assert_eq!(p.indices0.len(), 6);
        assert_eq!(p.indices1.len(), 5);
    }

    #[test]
    fn direct_split_means_have_right_spread() {
        let mut rng = RngStream::new(5, 5);
        let reps = 4000;
        let mut acc0 = 0.0;
        let mut acc1 = 0.0;
        for _ in 0..reps {
            let m = sample_split_means(100, 0.8, &[1.0], &mut rng).unwrap();
            assert_eq!((m.n0, m.n1), (80, 20));
            acc0 += (m.mean0[0] - 1.0).powi(2);
            acc1 += (m.mean1[0] - 1.0).powi(2);
        }
        assert!((acc0 / reps as f64 * 80.0 - 1.0).abs() < 0.1);
        assert!((acc1 / reps as f64 * 20.0 - 1.0).abs() < 0.1);
    }

    #[test]
    fn degenerate_p0_rejected() {
        let s = toy(10, 1, 3);
        assert!(split(&s, 0.01, &mut RngStream::new(0, 1)).is_err());
        assert!(split(&s, 0.99, &mut RngStream::new(0, 1)).is_err());
        assert!(split(&s, 0.0, &mut RngStream::new(0, 1)).is_err());
        assert!(split(&s, 1.0, &mut RngStream::new(0, 1)).is_err());
    }

    #[test]
    fn split_is_reproducible() {
        let s = toy(200, 2, 4);
        let a = split(&s, 0.3, &mut RngStream::new(8, 8)).unwrap();
        let b = split(&s, 0.3, &mut RngStream::new(8, 8)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.indices0.len(), 60);
    }

    #[test]
    fn subsample_means_match_full_splits() {
        let s = toy(100, 3, 5);
        let rng = RngStream::new(1, 1);
        let full = subsample_splits(&s, 10, 0.5, &rng).unwrap();
        let light = subsample_means(&s, 10, 0.5, &rng).unwrap();
        for (f, l) in full.iter().zip(&light) {
            assert_eq!(&f.means, l);
        }
        assert!(subsample_splits(&s, 0, 0.5, &rng).is_err());
    }
}
