//! Convex bodies represented by their support mappings.
//!
//! A body is anything that can answer "farthest point in direction u".
//! Minkowski sums and rigid transforms stay implicit: a sum node costs
//! one allocation at construction and its support is the sum of the
//! operand supports, so GJK runs on composite shapes without ever
//! enumerating vertices.

use crate::math::{check_covariance, is_finite_vec, Mat3, MathError, Pose, Vec3};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GeomError {
    #[error("support direction must be nonzero and finite")]
    BadDirection,
    #[error("polytope needs at least one vertex")]
    EmptyPolytope,
    #[error("ellipsoid level must be finite and >= 0, got {0}")]
    BadLevel(f64),
    #[error("sphere radius must be finite and >= 0, got {0}")]
    BadRadius(f64),
    #[error("box half-extents must be finite and > 0")]
    BadHalfExtents,
    #[error("cylinder dimensions must be finite and > 0")]
    BadCylinder,
    #[error("normal must be a unit vector (|n| = 1 within 1e-9)")]
    NonUnitNormal,
    #[error("non-finite vertex")]
    NonFiniteVertex,
    #[error(transparent)]
    Math(#[from] MathError),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConvexBody {
    /// Convex hull of a nonempty vertex list.
    Polytope(Vec<Vec3>),
    /// Origin-centered ball.
    Sphere(f64),
    /// Axis-aligned box centered at the origin.
    Box(Vec3),
    /// Origin-centered, z-axis-aligned cylinder.
    Cylinder { radius: f64, half_height: f64 },
    /// {d : dᵀΣ⁻¹d <= c}. Σ may be singular; the support never inverts it.
    CovarianceEllipsoid { sigma: Mat3, level: f64 },
    /// The ellipsoid above intersected with the halfspace n·d >= 0.
    HalfEllipsoid { sigma: Mat3, level: f64, normal: Vec3 },
    /// A body placed by a rigid transform.
    Posed(Box<ConvexBody>, Pose),
    /// Implicit Minkowski sum; support is the sum of operand supports.
    MinkowskiSum(Box<ConvexBody>, Box<ConvexBody>),
}

impl ConvexBody {
    pub fn polytope(vertices: Vec<Vec3>) -> Result<Self, GeomError> {
        if vertices.is_empty() {
            return Err(GeomError::EmptyPolytope);
        }
        if vertices.iter().any(|v| !is_finite_vec(v)) {
            return Err(GeomError::NonFiniteVertex);
        }
        Ok(ConvexBody::Polytope(vertices))
    }

    /// Single-point body.
    pub fn point(p: Vec3) -> Self {
        ConvexBody::Polytope(vec![p])
    }

    pub fn sphere(radius: f64) -> Result<Self, GeomError> {
        if !radius.is_finite() || radius < 0.0 {
            return Err(GeomError::BadRadius(radius));
        }
        Ok(ConvexBody::Sphere(radius))
    }

    pub fn cuboid(half_extents: Vec3) -> Result<Self, GeomError> {
        if !is_finite_vec(&half_extents) || half_extents.iter().any(|&h| h <= 0.0) {
            return Err(GeomError::BadHalfExtents);
        }
        Ok(ConvexBody::Box(half_extents))
    }

    pub fn cylinder(radius: f64, half_height: f64) -> Result<Self, GeomError> {
        if !radius.is_finite() || radius <= 0.0 || !half_height.is_finite() || half_height <= 0.0 {
            return Err(GeomError::BadCylinder);
        }
        Ok(ConvexBody::Cylinder {
            radius,
            half_height,
        })
    }

    pub fn posed(self, pose: Pose) -> Self {
        ConvexBody::Posed(Box::new(self), pose)
    }

    pub fn translated(self, t: Vec3) -> Self {
        self.posed(Pose::translation(t))
    }

    /// Farthest point of the body in `direction` (need not be unit length).
    pub fn support(&self, direction: &Vec3) -> Result<Vec3, GeomError> {
        if !is_finite_vec(direction) || direction.norm_squared() == 0.0 {
            return Err(GeomError::BadDirection);
        }
        Ok(self.support_raw(direction))
    }

    /// Support without the direction contract check; callers guarantee a
    /// nonzero finite direction.
    pub(crate) fn support_raw(&self, u: &Vec3) -> Vec3 {
        match self {
            ConvexBody::Polytope(vertices) => {
                // ties broken toward the lowest vertex index
                let mut best = 0;
                let mut best_dot = vertices[0].dot(u);
                for (i, v) in vertices.iter().enumerate().skip(1) {
                    let d = v.dot(u);
                    if d > best_dot {
                        best_dot = d;
                        best = i;
                    }
                }
                vertices[best]
            }
            ConvexBody::Sphere(r) => u * (r / u.norm()),
            ConvexBody::Box(h) => {
                // zero components resolve to the positive face
                Vec3::new(
                    if u.x < 0.0 { -h.x } else { h.x },
                    if u.y < 0.0 { -h.y } else { h.y },
                    if u.z < 0.0 { -h.z } else { h.z },
                )
            }
            ConvexBody::Cylinder {
                radius,
                half_height,
            } => {
                let z = if u.z < 0.0 { -half_height } else { *half_height };
                let rho = (u.x * u.x + u.y * u.y).sqrt();
                if rho > 0.0 {
                    Vec3::new(u.x * radius / rho, u.y * radius / rho, z)
                } else {
                    Vec3::new(0.0, 0.0, z)
                }
            }
            ConvexBody::CovarianceEllipsoid { sigma, level } => ellipsoid_support(sigma, *level, u),
            ConvexBody::HalfEllipsoid {
                sigma,
                level,
                normal,
            } => {
                let p = ellipsoid_support(sigma, *level, u);
                if normal.dot(&p) >= 0.0 {
                    return p;
                }
                // maximize on the cut plane n·d = 0: project u in the Σ metric
                let sn = sigma * normal;
                let nsn = normal.dot(&sn);
                if nsn <= 0.0 {
                    return Vec3::zeros();
                }
                let w = u - normal * (normal.dot(&(sigma * u)) / nsn);
                ellipsoid_support(sigma, *level, &w)
            }
            ConvexBody::Posed(inner, pose) => pose.apply(&inner.support_raw(&pose.rotate_inv(u))),
            ConvexBody::MinkowskiSum(a, b) => a.support_raw(u) + b.support_raw(u),
        }
    }

    /// Center and radius of a sphere guaranteed to contain the body,
    /// from the axis-aligned bounding box given by six support probes.
    pub(crate) fn bounding_sphere(&self) -> (Vec3, f64) {
        let mut lo = Vec3::zeros();
        let mut hi = Vec3::zeros();
        for axis in 0..3 {
            let mut u = Vec3::zeros();
            u[axis] = 1.0;
            hi[axis] = self.support_raw(&u)[axis];
            u[axis] = -1.0;
            lo[axis] = self.support_raw(&u)[axis];
        }
        let center = (lo + hi) * 0.5;
        ((center), (hi - lo).norm() * 0.5)
    }

    /// Interior reference point: average of the six axis support probes.
    pub(crate) fn centroid_probe(&self) -> Vec3 {
        let mut sum = Vec3::zeros();
        for axis in 0..3 {
            let mut u = Vec3::zeros();
            u[axis] = 1.0;
            sum += self.support_raw(&u);
            u[axis] = -1.0;
            sum += self.support_raw(&u);
        }
        sum / 6.0
    }
}

fn ellipsoid_support(sigma: &Mat3, level: f64, u: &Vec3) -> Vec3 {
    if level == 0.0 {
        return Vec3::zeros();
    }
    let su = sigma * u;
    let quad = u.dot(&su);
    if quad <= 0.0 {
        // u in the null space of a flat covariance
        return Vec3::zeros();
    }
    su * (level.sqrt() / quad.sqrt())
}

/// {d : dᵀΣ⁻¹d <= c}, validated. Support uses Σ directly, so singular Σ
/// degenerates to a flat ellipsoid instead of failing.
pub fn covariance_ellipsoid(sigma: Mat3, level: f64) -> Result<ConvexBody, GeomError> {
    check_covariance(&sigma)?;
    if !level.is_finite() || level < 0.0 {
        return Err(GeomError::BadLevel(level));
    }
    Ok(ConvexBody::CovarianceEllipsoid { sigma, level })
}

/// Covariance ellipsoid cut by the halfspace normal·d >= 0.
pub fn half_ellipsoid(sigma: Mat3, level: f64, normal: Vec3) -> Result<ConvexBody, GeomError> {
    check_covariance(&sigma)?;
    if !level.is_finite() || level < 0.0 {
        return Err(GeomError::BadLevel(level));
    }
    if !is_finite_vec(&normal) || (normal.norm() - 1.0).abs() > 1e-9 {
        return Err(GeomError::NonUnitNormal);
    }
    Ok(ConvexBody::HalfEllipsoid {
        sigma,
        level,
        normal,
    })
}

/// Implicit Minkowski sum node; constant-time construction.
pub fn minkowski_sum(a: ConvexBody, b: ConvexBody) -> ConvexBody {
    ConvexBody::MinkowskiSum(Box::new(a), Box::new(b))
}
