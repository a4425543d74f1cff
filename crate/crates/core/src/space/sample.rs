use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::HVector;
use crate::{tol, Error, Result, C64};

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derive an independent stream seed from `(seed, tag, k)` (splitmix64 mix).
pub fn derive_seed(seed: u64, tag: u64, k: u64) -> u64 {
    let mut z = seed
        ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ k.wrapping_mul(0xD1B5_4A32_D192_ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Returns `x` if `||x|| <= 1`, otherwise `x / ||x||`. Norms within
/// rounding of 1 count as inside, so the projection is idempotent.
pub fn norm_ball_project(x: &HVector) -> Result<HVector> {
    if x.dim() == 0 {
        return Err(Error::invalid("cannot project a zero-length vector"));
    }
    let n = x.norm();
    if n <= 1.0 + tol::IDENTITY {
        Ok(x.clone())
    } else {
        Ok(x.scale(C64::new(1.0 / n, 0.0)))
    }
}

pub(crate) fn gaussian_vector<R: Rng>(rng: &mut R, dim: usize) -> Vec<C64> {
    (0..dim)
        .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect()
}

pub(crate) fn random_sphere<R: Rng>(rng: &mut R, dim: usize) -> HVector {
    loop {
        let g = gaussian_vector(rng, dim);
        let n = g.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if n > 1e-300 {
            return HVector::from_coords(g.into_iter().map(|z| z / n).collect());
        }
    }
}

/// Uniform sphere direction scaled by `u^(1/dim)`.
pub(crate) fn random_ball<R: Rng>(rng: &mut R, dim: usize) -> HVector {
    let dir = random_sphere(rng, dim);
    let u: f64 = rng.random();
    dir.scale(C64::new(u.powf(1.0 / dim as f64), 0.0))
}

/// Deterministic sample of the unit ball of `C^space_dim`.
///
/// Even-numbered samples lie on the unit sphere, odd-numbered samples are
/// sphere directions scaled by `u^(1/space_dim)`.
pub fn sample_unit_ball(space_dim: usize, count: usize, seed: u64) -> Result<Vec<HVector>> {
    if count == 0 {
        return Err(Error::invalid("sample count must be at least 1"));
    }
    if space_dim == 0 {
        return Err(Error::invalid("space dimension must be at least 1"));
    }
    let mut rng = seeded_rng(seed);
    Ok((0..count)
        .map(|k| {
            if k % 2 == 0 {
                random_sphere(&mut rng, space_dim)
            } else {
                random_ball(&mut rng, space_dim)
            }
        })
        .collect())
}
