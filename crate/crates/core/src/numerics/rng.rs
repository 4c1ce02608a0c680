//! Seeded, splittable randomness.
//!
//! The generator is ChaCha8 (`rand_chacha::ChaCha8Rng`), seeded from a `u64`
//! via `SeedableRng::seed_from_u64`. ChaCha output is specified bit-for-bit,
//! so a seed produces the same stream on every platform.
//!
//! Child streams are derived from `(seed, label)` alone: the child seed is
//! `splitmix64(seed ^ fnv1a64(label))`. Splitting does not consume parent
//! output, so the order in which children are created does not matter.
//!
//! Uniforms on `[0, 1)` are `(next_u64() >> 11) * 2^-53`. Gaussians use the
//! Box–Muller transform on two uniforms `u1, u2`:
//! `r = sqrt(-2 ln(1 - u1))`, `z0 = r cos(2π u2)`, `z1 = r sin(2π u2)`.
//! Both outputs are used; the second is cached until the next draw.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::DenseVector;

#[derive(Debug, Clone)]
pub struct RngState {
    seed: u64,
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl RngState {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// An independent child stream identified by `label`.
    pub fn split(&self, label: &str) -> Self {
        Self::new(splitmix64(self.seed ^ fnv1a64(label.as_bytes())))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform on `[0, 1)` with 53 bits of precision.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform index in `0..n`.
    ///
    /// # Panics
    /// If `n == 0`.
    pub fn index(&mut self, n: usize) -> usize {
        assert!(n > 0, "cannot sample an index from an empty range");
        self.rng.random_range(0..n)
    }

    pub fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * (1.0 - u1).ln()).sqrt();
        let theta = std::f64::consts::TAU * u2;
        self.spare = Some(r * theta.sin());
        r * theta.cos()
    }

    /// Fills `out` with draws from `N(0, sigma²)`.
    pub fn fill_gaussian(&mut self, out: &mut [f64], sigma: f64) {
        for x in out.iter_mut() {
            *x = sigma * self.standard_normal();
        }
    }
}

/// `n` i.i.d. draws from `N(0, sigma²)`.
///
/// # Panics
/// If `n == 0` or `sigma` is negative or non-finite.
pub fn sample_gaussian(rng: &mut RngState, n: usize, sigma: f64) -> DenseVector {
    assert!(sigma >= 0.0 && sigma.is_finite(), "sigma must be finite and >= 0");
    let mut v = DenseVector::zeros(n);
    rng.fill_gaussian(&mut v, sigma);
    v
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
