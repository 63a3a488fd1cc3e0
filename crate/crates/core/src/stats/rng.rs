//! Reproducible random streams.
//!
//! The generator is ChaCha8, a counter-based stream cipher RNG: the keystream
//! at any (key, stream, position) is a pure function of those values, so a
//! `(seed, stream_id)` pair addresses an independent substream that replays
//! identically on every platform and thread layout. Parallel simulation
//! chunks each own one stream; reductions never share generator state.
//!
//! All variates derive from `next_uniform` (53-bit mantissa, strictly inside
//! (0, 1)); normals use the inverse-CDF transform so each normal consumes
//! exactly one uniform. That fixed accounting is what keeps common-random-
//! number couplings aligned across policy sweeps.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::special::norm_quantile;

/// Address of a reproducible random substream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RandomStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RandomStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        RandomStream { seed, stream_id }
    }

    /// Fresh generator positioned at the start of this substream.
    pub fn rng(&self) -> StreamRng {
        let mut inner = ChaCha8Rng::seed_from_u64(self.seed);
        inner.set_stream(self.stream_id);
        StreamRng { inner }
    }
}

/// Sequential draw interface over one substream.
#[derive(Debug, Clone)]
pub struct StreamRng {
    inner: ChaCha8Rng,
}

impl StreamRng {
    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform draw in the open interval (0, 1).
    #[inline]
    pub fn next_uniform(&mut self) -> f64 {
        // 53 high bits, offset half a ulp so 0 and 1 are unreachable.
        ((self.inner.next_u64() >> 11) as f64 + 0.5) * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Standard normal via the inverse CDF; consumes exactly one uniform.
    #[inline]
    pub fn next_normal(&mut self) -> f64 {
        let u = self.next_uniform();
        // u is strictly inside (0, 1), so the quantile cannot fail.
        norm_quantile(u).expect("uniform draw inside (0,1)")
    }

    /// Uniform index into 0..len.
    #[inline]
    pub fn next_index(&mut self, len: usize) -> usize {
        debug_assert!(len > 0);
        // Multiply-shift rejection-free mapping; bias is < 2^-64 * len.
        let wide = (self.inner.next_u64() as u128) * (len as u128);
        (wide >> 64) as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_address_replays() {
        let s = RandomStream::new(42, 7);
        let a: Vec<u64> = {
            let mut r = s.rng();
            (0..10).map(|_| r.next_u64()).collect()
        };
        let b: Vec<u64> = {
            let mut r = s.rng();
            (0..10).map(|_| r.next_u64()).collect()
        };
        assert_eq!(a, b);
    }

    #[test]
    fn distinct_streams_uncorrelated() {
        let mut r0 = RandomStream::new(123, 0).rng();
        let mut r1 = RandomStream::new(123, 1).rng();
        let n = 100_000;
        let (mut sx, mut sy, mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for _ in 0..n {
            let x = r0.next_uniform();
            let y = r1.next_uniform();
            sx += x;
            sy += y;
            sxx += x * x;
            syy += y * y;
            sxy += x * y;
        }
        let nf = n as f64;
        let cov = sxy / nf - (sx / nf) * (sy / nf);
        let vx = sxx / nf - (sx / nf).powi(2);
        let vy = syy / nf - (sy / nf).powi(2);
        let corr = cov / (vx * vy).sqrt();
        assert!(corr.abs() < 0.01, "corr = {corr}");
    }

    #[test]
    fn uniform_strictly_inside_unit_interval() {
        let mut r = RandomStream::new(0, 0).rng();
        for _ in 0..10_000 {
            let u = r.next_uniform();
            assert!(u > 0.0 && u < 1.0);
        }
    }

    #[test]
    fn normal_moments() {
        let mut r = RandomStream::new(9, 3).rng();
        let n = 200_000;
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let z = r.next_normal();
            s += z;
            s2 += z * z;
        }
        let mean = s / n as f64;
        let var = s2 / n as f64 - mean * mean;
        assert!(mean.abs() < 0.01, "mean {mean}");
        assert!((var - 1.0).abs() < 0.02, "var {var}");
    }

    #[test]
    fn index_bounds() {
        let mut r = RandomStream::new(5, 5).rng();
        for _ in 0..10_000 {
            assert!(r.next_index(7) < 7);
        }
    }
}
