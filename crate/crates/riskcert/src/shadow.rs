//! Shadow construction: regions guaranteed to contain an uncertain
//! obstacle with known probability.
//!
//! A full shadow is the Minkowski sum of the posed nominal body with the
//! covariance ellipsoid at level chi2_inv(1 - eps, 3); it contains the
//! obstacle with probability exactly 1 - eps. A half shadow swaps in the
//! ellipsoid cut by a halfspace through the mean, capturing (1 - eps) / 2.
//! Both stay implicit, so GJK consumes them directly.

use crate::chi2::{chi2_inv, Chi2Error};
use crate::convex::{covariance_ellipsoid, half_ellipsoid, minkowski_sum, ConvexBody, GeomError};
use crate::math::{check_covariance, Mat3, MathError, Pose, Vec3};
use thiserror::Error;

/// Risk levels below this are clamped; chi2_inv(1 - EPS_MIN, 3) stays finite.
pub const EPS_MIN: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum ShadowError {
    #[error("risk level must lie in [{min}, 1), got {eps}")]
    BadRisk { eps: f64, min: f64 },
    #[error(transparent)]
    Math(#[from] MathError),
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error(transparent)]
    Chi2(#[from] Chi2Error),
}

/// A convex obstacle with a known shape, a nominal world pose, and
/// Gaussian position uncertainty expressed in its local frame.
#[derive(Debug, Clone, PartialEq)]
pub struct UncertainObstacle {
    pub nominal: ConvexBody,
    pub pose: Pose,
    pub sigma_local: Mat3,
}

impl UncertainObstacle {
    pub fn new(nominal: ConvexBody, pose: Pose, sigma_local: Mat3) -> Result<Self, ShadowError> {
        check_covariance(&sigma_local)?;
        Ok(UncertainObstacle {
            nominal,
            pose,
            sigma_local,
        })
    }

    /// Position covariance in the world frame: R Σ_local Rᵀ, with R the
    /// local→world rotation of the pose.
    pub fn sigma_world(&self) -> Mat3 {
        let r = self.pose.rotation;
        r * self.sigma_local * r.transpose()
    }

    /// Nominal geometry placed at its world pose.
    pub fn posed_nominal(&self) -> ConvexBody {
        self.nominal.clone().posed(self.pose)
    }

    /// Nominal geometry displaced by a world-frame offset `d`.
    pub fn displaced(&self, d: &Vec3) -> ConvexBody {
        let mut pose = self.pose;
        pose.translation += d;
        self.nominal.clone().posed(pose)
    }
}

/// Which displacement region a shadow uses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ShadowKind {
    Full,
    Half(Vec3),
}

/// A shadow request together with the probability mass the displacement
/// region captures: 1 - eps for a full shadow, (1 - eps) / 2 for a half.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShadowSpec {
    pub kind: ShadowKind,
    pub epsilon: f64,
}

impl ShadowSpec {
    pub fn captured_mass(&self) -> f64 {
        match self.kind {
            ShadowKind::Full => 1.0 - self.epsilon,
            ShadowKind::Half(_) => (1.0 - self.epsilon) / 2.0,
        }
    }
}

fn check_risk(eps: f64) -> Result<(), ShadowError> {
    if !eps.is_finite() || eps < EPS_MIN || eps >= 1.0 {
        return Err(ShadowError::BadRisk {
            eps,
            min: EPS_MIN,
        });
    }
    Ok(())
}

/// Maximal eps-shadow: contains the obstacle with probability 1 - eps.
pub fn full_shadow(obstacle: &UncertainObstacle, eps: f64) -> Result<ConvexBody, ShadowError> {
    check_risk(eps)?;
    let level = chi2_inv(1.0 - eps, 3)?;
    let ellipsoid = covariance_ellipsoid(obstacle.sigma_world(), level)?;
    Ok(minkowski_sum(obstacle.posed_nominal(), ellipsoid))
}

/// Half shadow along world-frame normal `n`: the displacement region is
/// the eps2-level ellipsoid cut to n·d >= 0, capturing mass (1 - eps2)/2.
pub fn half_shadow(
    obstacle: &UncertainObstacle,
    eps2: f64,
    normal: Vec3,
) -> Result<ConvexBody, ShadowError> {
    check_risk(eps2)?;
    let level = chi2_inv(1.0 - eps2, 3)?;
    let half = half_ellipsoid(obstacle.sigma_world(), level, normal)?;
    Ok(minkowski_sum(obstacle.posed_nominal(), half))
}
