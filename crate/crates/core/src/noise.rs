//! Seeded white-noise synthesis.
//!
//! All randomness in the crate comes from [`rng`]: ChaCha8 (`rand_chacha` 0.9)
//! seeded with `seed_from_u64(seed)` and positioned on stream `stream`. The
//! generator is counter based, so a `(seed, stream)` pair names one fixed
//! sequence on every platform. Normal variates use `rand_distr::StandardNormal`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::grid::{GridFunction, InnerProductSpec, Space};

pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `len` independent standard-normal samples.
pub fn standard_normal(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| StandardNormal.sample(rng)).collect()
}

/// Adds white Gaussian noise scaled to `‖y − y^δ‖ = delta_rel · ‖y‖` exactly.
///
/// Returns the noisy data and the absolute noise level `δ = delta_rel · ‖y‖`.
pub fn add_noise(y: &GridFunction, delta_rel: f64, seed: u64) -> Result<(GridFunction, f64)> {
    add_noise_stream(y, delta_rel, seed, 0)
}

/// As [`add_noise`], drawing from stream `stream` of the seeded generator.
pub fn add_noise_stream(
    y: &GridFunction,
    delta_rel: f64,
    seed: u64,
    stream: u64,
) -> Result<(GridFunction, f64)> {
    if !(delta_rel >= 0.0) || !delta_rel.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "relative noise level must be a finite number >= 0, got {delta_rel}"
        )));
    }
    let space = InnerProductSpec::new(y.grid(), Space::L2)?;
    let y_l2 = y.clone().with_space(Space::L2)?;
    let y_norm = space.norm(&y_l2)?;
    if delta_rel == 0.0 {
        return Ok((y.clone(), 0.0));
    }
    if y_norm == 0.0 {
        return Err(Error::InvalidArgument(
            "relative noise level is undefined for zero data".into(),
        ));
    }
    let delta_abs = delta_rel * y_norm;
    let mut rng = rng(seed, stream);
    let mut e = GridFunction::new(y.grid(), Space::L2, standard_normal(&mut rng, y.len()))?;
    let mut e_norm = space.norm(&e)?;
    while e_norm == 0.0 {
        e = GridFunction::new(y.grid(), Space::L2, standard_normal(&mut rng, y.len()))?;
        e_norm = space.norm(&e)?;
    }
    let noise = e.scaled(delta_abs / e_norm);
    let y_delta = GridFunction::new(y.grid(), y.space(), y.add(&noise.with_space(y.space())?).into_values())?;
    Ok((y_delta, delta_abs))
}
