//! Counter-mixed 64-bit generator with keyed sub-streams.
//!
//! Every draw is `mix64(origin + k * GOLDEN)` for the k-th call, so a stream is
//! fully described by its 64-bit origin. Origins are derived from
//! `(master_seed, stream_id)` through the same finalizer, which makes replication
//! `r` of grid cell `c` reproducible no matter which worker runs it.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone)]
pub struct RngStream {
    master_seed: u64,
    stream_id: u64,
    state: u64,
    spare_normal: Option<f64>,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        let origin = mix64(master_seed ^ mix64(stream_id.wrapping_add(GOLDEN)));
        RngStream {
            master_seed,
            stream_id,
            state: origin,
            spare_normal: None,
        }
    }

    /// Stream for replication `rep` of grid cell `cell`.
    pub fn for_replication(master_seed: u64, cell: u64, rep: u64) -> Self {
        let id = mix64(mix64(cell ^ 0x5851_F42D_4C95_7F2D).wrapping_add(rep));
        RngStream::new(master_seed, id)
    }

    /// Independent child stream keyed by `key`. Does not advance `self`.
    pub fn substream(&self, key: u64) -> Self {
        let id = mix64(self.stream_id ^ mix64(key.wrapping_mul(GOLDEN).wrapping_add(1)));
        RngStream::new(self.master_seed, id)
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        mix64(self.state)
    }

    /// Uniform on [0, 1) with 53 random bits.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Unbiased uniform integer in `[0, bound)` (Lemire's multiply-shift with rejection).
    #[inline]
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "bound must be non-zero");
        let mut m = (self.next_u64() as u128) * (bound as u128);
        let mut low = m as u64;
        if low < bound {
            let threshold = bound.wrapping_neg() % bound;
            while low < threshold {
                m = (self.next_u64() as u128) * (bound as u128);
                low = m as u64;
            }
        }
        (m >> 64) as u64
    }

    /// Standard normal draw, polar Box-Muller.
    #[inline]
    pub fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        loop {
            let u = 2.0 * self.next_f64() - 1.0;
            let v = 2.0 * self.next_f64() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let f = (-2.0 * s.ln() / s).sqrt();
                self.spare_normal = Some(v * f);
                return u * f;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_key_same_sequence() {
        let mut a = RngStream::new(42, 7);
        let mut b = RngStream::new(42, 7);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
        let mut c = RngStream::new(42, 8);
        let mut a = RngStream::new(42, 7);
        assert_ne!(a.next_u64(), c.next_u64());
    }

    #[test]
    fn pinned_first_draws() {
        // cross-platform reproducibility: integer-only pipeline
        let mut r = RngStream::new(0, 0);
        // reference values computed independently in Python
        assert_eq!(r.next_u64(), 0x568A_9B0B_1A2C_05EC);
        assert_eq!(mix64(0), 0);
        assert_eq!(mix64(1), 0x5692_161D_100B_05E5);
    }

    #[test]
    fn substream_does_not_advance_parent() {
        let parent = RngStream::new(1, 2);
        let mut x = parent.substream(3);
        let mut y = parent.substream(3);
        assert_eq!(x.next_u64(), y.next_u64());
        let mut z = parent.substream(4);
        assert_ne!(parent.substream(3).next_u64(), z.next_u64());
    }

    #[test]
    fn below_stays_in_range() {
        let mut r = RngStream::new(5, 5);
        let mut counts = [0usize; 7];
        for _ in 0..70_000 {
            counts[r.below(7) as usize] += 1;
        }
        for c in counts {
            assert!((c as f64 - 10_000.0).abs() < 500.0);
        }
    }

    #[test]
    fn uniform_in_unit_interval() {
        let mut r = RngStream::new(9, 1);
        for _ in 0..10_000 {
            let u = r.next_f64();
            assert!((0.0..1.0).contains(&u));
        }
    }
}
