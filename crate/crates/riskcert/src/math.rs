//! Scalar/vector/matrix aliases, validity checks, and rigid-body poses.
//!
//! Everything downstream works in meters (covariances in m²) with
//! world-frame coordinates unless stated otherwise.

use nalgebra::{Matrix3, Vector3};
use thiserror::Error;

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;

/// Tolerance on covariance symmetry and rotation orthonormality.
pub const ORTHO_TOL: f64 = 1e-9;
/// Covariance eigenvalues may dip this far negative before rejection.
pub const PSD_EIG_TOL: f64 = -1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum MathError {
    #[error("matrix is not symmetric within {tol}: max asymmetry {asym}")]
    NotSymmetric { asym: f64, tol: f64 },
    #[error("matrix is not positive semi-definite: eigenvalue {eig}")]
    NotPsd { eig: f64 },
    #[error("rotation is not orthonormal within {tol}")]
    NotOrthonormal { tol: f64 },
    #[error("rotation determinant is {det}, expected +1")]
    NotProperRotation { det: f64 },
    #[error("non-finite entries")]
    NonFinite,
}

pub fn is_finite_vec(v: &Vec3) -> bool {
    v.iter().all(|x| x.is_finite())
}

pub fn is_finite_mat(m: &Mat3) -> bool {
    m.iter().all(|x| x.is_finite())
}

/// Validates a covariance matrix: finite, symmetric within `ORTHO_TOL`,
/// eigenvalues above `PSD_EIG_TOL`. Singular (flat) covariances pass.
pub fn check_covariance(sigma: &Mat3) -> Result<(), MathError> {
    if !is_finite_mat(sigma) {
        return Err(MathError::NonFinite);
    }
    let asym = (sigma - sigma.transpose()).abs().max();
    if asym > ORTHO_TOL {
        return Err(MathError::NotSymmetric {
            asym,
            tol: ORTHO_TOL,
        });
    }
    let sym = (sigma + sigma.transpose()) * 0.5;
    let eigs = sym.symmetric_eigenvalues();
    // scale the eigenvalue floor with the matrix magnitude
    let scale = sym.abs().max().max(1.0);
    for &e in eigs.iter() {
        if e < PSD_EIG_TOL * scale {
            return Err(MathError::NotPsd { eig: e });
        }
    }
    Ok(())
}

/// A rigid-body transform: world point = rotation * local point + translation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub rotation: Mat3,
    pub translation: Vec3,
}

impl Pose {
    pub fn new(rotation: Mat3, translation: Vec3) -> Result<Self, MathError> {
        if !is_finite_mat(&rotation) || !is_finite_vec(&translation) {
            return Err(MathError::NonFinite);
        }
        let err = (rotation.transpose() * rotation - Mat3::identity())
            .abs()
            .max();
        if err > ORTHO_TOL {
            return Err(MathError::NotOrthonormal { tol: ORTHO_TOL });
        }
        let det = rotation.determinant();
        if (det - 1.0).abs() > ORTHO_TOL {
            return Err(MathError::NotProperRotation { det });
        }
        Ok(Pose {
            rotation,
            translation,
        })
    }

    pub fn identity() -> Self {
        Pose {
            rotation: Mat3::identity(),
            translation: Vec3::zeros(),
        }
    }

    pub fn translation(t: Vec3) -> Self {
        Pose {
            rotation: Mat3::identity(),
            translation: t,
        }
    }

    /// Rotation about the z axis by `angle` radians, then translation.
    pub fn rot_z(angle: f64, t: Vec3) -> Self {
        let (s, c) = angle.sin_cos();
        Pose {
            rotation: Mat3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0),
            translation: t,
        }
    }

    pub fn apply(&self, p: &Vec3) -> Vec3 {
        self.rotation * p + self.translation
    }

    /// Pulls a world-frame direction back into the local frame.
    pub fn rotate_inv(&self, u: &Vec3) -> Vec3 {
        self.rotation.transpose() * u
    }
}
