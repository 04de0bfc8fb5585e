use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::invalid;
use crate::model::HybridSystem;
use crate::scalar::Real;
use crate::scattering::{complex_spectrum, ComplexSpectrum, Response};
use crate::Result;

/// Model spectrum plus independent complex Gaussian noise with standard
/// deviation `noise_sigma * max|S|` on each quadrature. Deterministic for a
/// given `seed`.
pub fn synthesize_noisy_spectrum<T: Real>(
    system: &HybridSystem<T>,
    b: T,
    frequencies: &[T],
    response: &Response,
    noise_sigma: T,
    seed: u64,
) -> Result<ComplexSpectrum<T>> {
    if !(noise_sigma >= T::zero() && noise_sigma.is_finite()) {
        return Err(invalid("noise_sigma", "must be finite and >= 0"));
    }
    let clean = complex_spectrum(system, b, frequencies, response)?;
    if noise_sigma == T::zero() {
        return Ok(clean);
    }
    let sigma = noise_sigma * clean.max_abs();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut normal = || -> T { T::of(StandardNormal.sample(&mut rng)) * sigma };
    let noisy = clean
        .values()
        .iter()
        .map(|v| v + Complex::new(normal(), normal()))
        .collect();
    ComplexSpectrum::new(frequencies.to_vec(), noisy)
}
