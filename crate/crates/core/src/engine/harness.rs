//! Deterministic parallel replication with streaming aggregation.
//!
//! Replications are grouped into fixed-size blocks. Each block is folded
//! sequentially into Welford accumulators; blocks run in parallel and are
//! merged in block order. Block boundaries never depend on the worker count,
//! so the floating-point reduction order (and the output) is fixed by the
//! replication count alone.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Replications per block.
pub const BLOCK: usize = 16;

/// Running count, mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Accumulator {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Accumulator {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    /// Chan et al. pairwise merge.
    pub fn merge(&mut self, other: &Accumulator) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let total = self.count + other.count;
        let delta = other.mean - self.mean;
        let w = other.count as f64 / total as f64;
        self.mean += delta * w;
        self.m2 += other.m2 + delta * delta * self.count as f64 * w;
        self.count = total;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        if self.count == 0 {
            f64::NAN
        } else {
            self.mean
        }
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    /// Standard error of the mean.
    pub fn stderr(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.variance() / self.count as f64).sqrt()
        }
    }
}

/// Runs `job(rep)` for `rep in 0..reps`, each returning `metrics` values, and
/// aggregates per metric. The first failing replication (in index order)
/// aborts the run with its error.
pub fn replicate<F>(reps: usize, metrics: usize, job: F) -> Result<Vec<Accumulator>>
where
    F: Fn(u64) -> Result<Vec<f64>> + Sync,
{
    run_blocks(reps, metrics, &job, false, &mut |_, _| {})
}

/// [`replicate`] that also hands every replication's raw metrics to `sink`,
/// in replication order, after the parallel phase.
pub fn replicate_with_raw<F, S>(reps: usize, metrics: usize, job: F, mut sink: S) -> Result<Vec<Accumulator>>
where
    F: Fn(u64) -> Result<Vec<f64>> + Sync,
    S: FnMut(u64, &[f64]),
{
    run_blocks(reps, metrics, &job, true, &mut sink)
}

/// One block's accumulators and, when kept, its raw per-replication values.
type BlockOutput = (Vec<Accumulator>, Vec<Vec<f64>>);

fn run_blocks<F>(
    reps: usize,
    metrics: usize,
    job: &F,
    keep_raw: bool,
    sink: &mut dyn FnMut(u64, &[f64]),
) -> Result<Vec<Accumulator>>
where
    F: Fn(u64) -> Result<Vec<f64>> + Sync,
{
    let blocks = reps.div_ceil(BLOCK);
    let per_block: Vec<Result<BlockOutput>> = (0..blocks)
        .into_par_iter()
        .map(|blk| {
            let mut acc = vec![Accumulator::default(); metrics];
            let mut raw = Vec::new();
            let start = blk * BLOCK;
            let end = (start + BLOCK).min(reps);
            for rep in start..end {
                let values = job(rep as u64)?;
                if values.len() != metrics {
                    return Err(Error::numeric(format!(
                        "replication returned {} metrics, expected {metrics}",
                        values.len()
                    )));
                }
                for (a, v) in acc.iter_mut().zip(&values) {
                    a.push(*v);
                }
                if keep_raw {
                    raw.push(values);
                }
            }
            Ok((acc, raw))
        })
        .collect();

    let mut total = vec![Accumulator::default(); metrics];
    for (blk, res) in per_block.into_iter().enumerate() {
        let (acc, raw) = res?;
        for (t, a) in total.iter_mut().zip(&acc) {
            t.merge(a);
        }
        for (i, values) in raw.iter().enumerate() {
            sink((blk * BLOCK + i) as u64, values);
        }
    }
    Ok(total)
}

/// Runs `f` on a dedicated pool with `workers` threads (`0` = rayon default).
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Unsupported(format!("cannot build worker pool: {e}")))?;
    Ok(pool.install(f))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn welford_matches_two_pass() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 * 0.25 + 1e6).collect();
        let mut a = Accumulator::default();
        xs.iter().for_each(|&x| a.push(x));
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
        assert!((a.mean() - mean).abs() / mean < 1e-12);
        assert!((a.variance() - var).abs() / var < 1e-10);
    }

    #[test]
    fn merge_equals_sequential() {
        let xs: Vec<f64> = (0..257).map(|i| (i as f64).sin()).collect();
        let mut seq = Accumulator::default();
        xs.iter().for_each(|&x| seq.push(x));
        let mut left = Accumulator::default();
        let mut right = Accumulator::default();
        xs[..100].iter().for_each(|&x| left.push(x));
        xs[100..].iter().for_each(|&x| right.push(x));
        left.merge(&right);
        assert_eq!(left.count(), seq.count());
        assert!((left.mean() - seq.mean()).abs() < 1e-14);
        assert!((left.variance() - seq.variance()).abs() < 1e-13);
    }

    #[test]
    fn worker_count_does_not_change_result() {
        let job = |r: u64| Ok(vec![(r as f64 * 0.1).cos(), (r % 3) as f64]);
        let one = with_workers(1, || replicate(1000, 2, job)).unwrap().unwrap();
        let four = with_workers(4, || replicate(1000, 2, job)).unwrap().unwrap();
        assert_eq!(one, four);
    }

    #[test]
    fn raw_sink_sees_replication_order() {
        let mut seen = Vec::new();
        replicate_with_raw(40, 1, |r| Ok(vec![r as f64]), |r, v| seen.push((r, v[0]))).unwrap();
        assert_eq!(seen.len(), 40);
        assert!(seen.iter().all(|(r, v)| *r as f64 == *v));
    }

    #[test]
    fn first_error_propagates() {
        let res = replicate(50, 1, |r| {
            if r == 20 {
                Err(Error::numeric("boom"))
            } else {
                Ok(vec![0.0])
            }
        });
        assert!(matches!(res, Err(Error::Numeric(_))));
    }
}
