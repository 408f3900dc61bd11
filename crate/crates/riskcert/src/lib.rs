//! Certified upper bounds on the probability of collision between a
//! convex-decomposed robot and convex obstacles with Gaussian position
//! uncertainty.
//!
//! The pipeline: [`convex`] represents bodies by support mappings so
//! Minkowski sums stay implicit; [`gjk`] answers intersection and
//! distance queries; [`chi2`] maps risk levels to ellipsoid levels;
//! [`shadow`] builds the certificate regions; [`certify`] runs the
//! one-shot and two-shot bisection searches and aggregates per-obstacle
//! bounds with Boole's inequality; [`oracle`] provides the Monte Carlo
//! ground truth every certificate is validated against; [`scene`] parses
//! and generates scenes; [`cli`] exposes it all on the command line.

pub mod certify;
pub mod chi2;
pub mod cli;
pub mod convex;
pub mod exec;
pub mod gjk;
pub mod math;
pub mod oracle;
pub mod scene;
pub mod shadow;

pub use certify::{aggregate, certify_one_shot, certify_scene, certify_two_shot, CertifiedBound, Method, RiskReport};
pub use convex::{covariance_ellipsoid, half_ellipsoid, minkowski_sum, ConvexBody};
pub use gjk::{contact_normal_into, distance, intersects, ProximityResult};
pub use math::{Mat3, Pose, Vec3};
pub use oracle::{mc_collision_probability, mc_shadow_mass, McEstimate};
pub use scene::{gen_ring_scene, parse_scene, scale_covariances, serialize_scene, Scene};
pub use shadow::{full_shadow, half_shadow, ShadowKind, ShadowSpec, UncertainObstacle};
