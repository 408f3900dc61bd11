//! Monte Carlo ground truth: empirical collision probability and shadow
//! mass, used to validate every certificate.
//!
//! Sampling is counter-based: sample i derives its own ChaCha stream from
//! (seed, i), so shards can be evaluated in any order or degree of
//! parallelism and the tally is bit-identical to the sequential run.

use crate::chi2::{chi2_inv, Chi2Error};
use crate::convex::ConvexBody;
use crate::exec;
use crate::gjk::{self, GjkError};
use crate::math::{Mat3, Vec3};
use crate::shadow::{ShadowKind, ShadowSpec, UncertainObstacle};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("samples must be >= 1")]
    NoSamples,
    #[error("risk level must lie in (0, 1), got {0}")]
    BadRisk(f64),
    #[error("collision check failed on sample {sample}: {source}")]
    Gjk { sample: u64, source: GjkError },
    #[error(transparent)]
    Chi2(#[from] Chi2Error),
}

/// A Monte Carlo estimate with a 3-sigma binomial confidence half-width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    pub samples: u64,
    pub ci_half_width_3sigma: f64,
    pub seed: u64,
}

impl McEstimate {
    fn from_hits(hits: u64, samples: u64, seed: u64) -> Self {
        let p = hits as f64 / samples as f64;
        let ci = (3.0 * (p * (1.0 - p) / samples as f64).sqrt()).max(3.0 / samples as f64);
        McEstimate {
            estimate: p,
            samples,
            ci_half_width_3sigma: ci,
            seed,
        }
    }
}

/// Factor Σ = L Lᵀ. Cholesky when positive definite, symmetric eigen
/// decomposition (negative eigenvalues clamped to zero) otherwise, so
/// singular covariances sample on their support.
pub(crate) fn covariance_factor(sigma: &Mat3) -> Mat3 {
    if let Some(chol) = sigma.cholesky() {
        return chol.l();
    }
    let eig = sigma.symmetric_eigen();
    let mut l = Mat3::zeros();
    for i in 0..3 {
        let s = eig.eigenvalues[i].max(0.0).sqrt();
        l.set_column(i, &(eig.eigenvectors.column(i) * s));
    }
    l
}

/// Standard normal triple for sample `i`, independent of evaluation order.
fn sample_z(seed: u64, i: u64) -> Vec3 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i);
    let n = StandardNormal;
    Vec3::new(n.sample(&mut rng), n.sample(&mut rng), n.sample(&mut rng))
}

/// Fraction of sampled obstacle displacements for which the displaced
/// nominal body intersects any link.
pub fn mc_collision_probability(
    links: &[ConvexBody],
    obstacle: &UncertainObstacle,
    samples: u64,
    seed: u64,
) -> Result<McEstimate, OracleError> {
    if samples == 0 {
        return Err(OracleError::NoSamples);
    }
    let hits = exec::try_count(samples, collision_hit_fn(links, obstacle, seed))?;
    Ok(McEstimate::from_hits(hits, samples, seed))
}

/// Sequential twin of [`mc_collision_probability`]; same tallies.
pub fn mc_collision_probability_seq(
    links: &[ConvexBody],
    obstacle: &UncertainObstacle,
    samples: u64,
    seed: u64,
) -> Result<McEstimate, OracleError> {
    if samples == 0 {
        return Err(OracleError::NoSamples);
    }
    let hits = exec::try_count_seq(samples, collision_hit_fn(links, obstacle, seed))?;
    Ok(McEstimate::from_hits(hits, samples, seed))
}

fn collision_hit_fn<'a>(
    links: &'a [ConvexBody],
    obstacle: &'a UncertainObstacle,
    seed: u64,
) -> impl Fn(u64) -> Result<bool, OracleError> + Sync + 'a {
    let l = covariance_factor(&obstacle.sigma_world());
    move |i: u64| {
        let d = l * sample_z(seed, i);
        let body = obstacle.displaced(&d);
        for link in links {
            match gjk::intersects(&body, link) {
                Ok(true) => return Ok(true),
                Ok(false) => {}
                Err(source) => return Err(OracleError::Gjk { sample: i, source }),
            }
        }
        Ok(false)
    }
}

/// Fraction of sampled displacements inside the shadow's displacement
/// region: the full ellipsoid, or the half-ellipsoid cut along the normal.
pub fn mc_shadow_mass(
    obstacle: &UncertainObstacle,
    spec: &ShadowSpec,
    samples: u64,
    seed: u64,
) -> Result<McEstimate, OracleError> {
    if samples == 0 {
        return Err(OracleError::NoSamples);
    }
    if !spec.epsilon.is_finite() || spec.epsilon <= 0.0 || spec.epsilon >= 1.0 {
        return Err(OracleError::BadRisk(spec.epsilon));
    }
    let level = chi2_inv(1.0 - spec.epsilon, 3)?;
    let l = covariance_factor(&obstacle.sigma_world());
    let inside = |i: u64| -> Result<bool, OracleError> {
        let z = sample_z(seed, i);
        // d = L z, so dᵀΣ⁻¹d = zᵀz (exact even for singular Σ)
        if z.norm_squared() > level {
            return Ok(false);
        }
        Ok(match spec.kind {
            ShadowKind::Full => true,
            ShadowKind::Half(n) => n.dot(&(l * z)) >= 0.0,
        })
    };
    let hits = exec::try_count(samples, &inside)?;
    Ok(McEstimate::from_hits(hits, samples, seed))
}
