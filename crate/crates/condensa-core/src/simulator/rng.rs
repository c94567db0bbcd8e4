//! Seeded replica streams: ChaCha8 keyed by the master seed, one stream
//! per replica index.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn replica_rng(seed: u64, replica: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replica);
    rng
}

/// Uniform on the open interval (0,1), 53-bit resolution.
#[inline]
pub fn open01(rng: &mut Rng) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Exponential holding time with the given rate.
#[inline]
pub fn exponential(rng: &mut Rng, rate: f64) -> f64 {
    -libm::log(open01(rng)) / rate
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_differ_and_repeat() {
        let a: [u64; 3] = core::array::from_fn(|_| replica_rng(7, 0).next_u64());
        assert_eq!(a[0], a[1]);
        let mut r0 = replica_rng(7, 0);
        let mut r1 = replica_rng(7, 1);
        assert_ne!(r0.next_u64(), r1.next_u64());
    }

    #[test]
    fn open_interval() {
        let mut r = replica_rng(1, 0);
        for _ in 0..10_000 {
            let u = open01(&mut r);
            assert!(u > 0.0 && u < 1.0);
        }
    }
}
