//! Risk certification: one-shot bisection, two-shot directional expansion,
//! and Boole aggregation across obstacles.
//!
//! One-shot bisects the risk level until the shadow at the upper bracket
//! endpoint provably misses every link; that endpoint is returned, so the
//! certificate is unconditional rather than midpoint-plus-half-tolerance.
//! Two-shot reruns the search with half shadows expanding along the
//! contact normal found in phase one and certifies (eps1 + eps2) / 2.

use crate::convex::ConvexBody;
use crate::gjk::{self, GjkError};
use crate::math::Vec3;
use crate::scene::Scene;
use crate::shadow::{full_shadow, half_shadow, ShadowError, UncertainObstacle, EPS_MIN};
use std::time::{Duration, Instant};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CertifyError {
    #[error("at least one robot link is required")]
    NoLinks,
    #[error("epsilon tolerance must lie in (0, 0.5], got {0}")]
    BadTolerance(f64),
    #[error(transparent)]
    Gjk(#[from] GjkError),
    #[error(transparent)]
    Shadow(#[from] ShadowError),
    #[error("certification of obstacle '{name}' failed: {message}")]
    Obstacle { name: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    OneShot,
    TwoShot,
    /// Two-shot was requested but the contact normal was degenerate; the
    /// one-shot certificate is returned unchanged.
    OneShotFallback,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::OneShot => "one-shot",
            Method::TwoShot => "two-shot",
            Method::OneShotFallback => "one-shot-fallback",
        }
    }
}

/// A certified upper bound on the collision probability with one obstacle.
#[derive(Debug, Clone, PartialEq)]
pub struct CertifiedBound {
    /// The certified upper bound (the safe bracket endpoint).
    pub epsilon: f64,
    pub eps_lower: f64,
    pub eps_upper: f64,
    pub method: Method,
    pub eps1: Option<f64>,
    pub eps2: Option<f64>,
    /// Contact normal used by the second search, world frame.
    pub normal: Option<Vec3>,
    /// Bisection hit the lower clamp: risk indistinguishable from 0.
    pub saturated_low: bool,
    /// Shadow-vs-robot queries performed.
    pub collision_checks: u32,
    pub elapsed: Duration,
}

/// Per-obstacle bounds plus the Boole-aggregated scene bound.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskReport {
    pub per_obstacle: Vec<CertifiedBound>,
    pub scene_bound: f64,
}

fn clamp_risk(eps: f64) -> f64 {
    eps.clamp(EPS_MIN, 1.0 - EPS_MIN)
}

fn check_inputs(links: &[ConvexBody], eps_tol: f64) -> Result<(), CertifyError> {
    if links.is_empty() {
        return Err(CertifyError::NoLinks);
    }
    if !eps_tol.is_finite() || eps_tol <= 0.0 || eps_tol > 0.5 {
        return Err(CertifyError::BadTolerance(eps_tol));
    }
    Ok(())
}

/// Index of the first link the shadow intersects, scene order.
fn first_hit(shadow: &ConvexBody, links: &[ConvexBody]) -> Result<Option<usize>, CertifyError> {
    for (i, link) in links.iter().enumerate() {
        if gjk::intersects(shadow, link)? {
            return Ok(Some(i));
        }
    }
    Ok(None)
}

struct BisectionResult {
    lower: f64,
    upper: f64,
    /// First link that intersected the most recent colliding shadow.
    hit_link: Option<usize>,
    checks: u32,
}

fn bisect_full(
    links: &[ConvexBody],
    obstacle: &UncertainObstacle,
    eps_tol: f64,
) -> Result<BisectionResult, CertifyError> {
    let mut lower = 0.0;
    let mut upper = 1.0;
    let mut hit_link = None;
    let mut checks = 0u32;
    while upper - lower > eps_tol {
        let mid = 0.5 * (lower + upper);
        let shadow = full_shadow(obstacle, clamp_risk(mid))?;
        checks += 1;
        match first_hit(&shadow, links)? {
            Some(i) => {
                lower = mid;
                hit_link = Some(i);
            }
            None => upper = mid,
        }
    }
    Ok(BisectionResult {
        lower,
        upper,
        hit_link,
        checks,
    })
}

fn bisect_half(
    links: &[ConvexBody],
    obstacle: &UncertainObstacle,
    normal: Vec3,
    upper_start: f64,
    eps_tol: f64,
) -> Result<BisectionResult, CertifyError> {
    let mut lower = 0.0;
    let mut upper = upper_start;
    let mut hit_link = None;
    let mut checks = 0u32;
    while upper - lower > eps_tol {
        let mid = 0.5 * (lower + upper);
        let shadow = half_shadow(obstacle, clamp_risk(mid), normal)?;
        checks += 1;
        match first_hit(&shadow, links)? {
            Some(i) => {
                lower = mid;
                hit_link = Some(i);
            }
            None => upper = mid,
        }
    }
    Ok(BisectionResult {
        lower,
        upper,
        hit_link,
        checks,
    })
}

/// Single bisection over full shadows. The returned epsilon is the upper
/// bracket endpoint: the shadow there provably misses every link, so the
/// true collision probability cannot exceed it.
pub fn certify_one_shot(
    links: &[ConvexBody],
    obstacle: &UncertainObstacle,
    eps_tol: f64,
) -> Result<CertifiedBound, CertifyError> {
    check_inputs(links, eps_tol)?;
    let start = Instant::now();
    let r = bisect_full(links, obstacle, eps_tol)?;
    Ok(CertifiedBound {
        epsilon: r.upper,
        eps_lower: r.lower,
        eps_upper: r.upper,
        method: Method::OneShot,
        eps1: None,
        eps2: None,
        normal: None,
        saturated_low: r.hit_link.is_none(),
        collision_checks: r.checks,
        elapsed: start.elapsed(),
    })
}

/// Contact normal for the second search, with the centroid fallback when
/// GJK witnesses coincide. `None` means even the fallback is degenerate.
fn phase_two_normal(
    links: &[ConvexBody],
    obstacle: &UncertainObstacle,
    eps1: f64,
    hit_link: usize,
) -> Result<Option<Vec3>, CertifyError> {
    let shadow = full_shadow(obstacle, clamp_risk(eps1))?;
    if let Some(n) = gjk::contact_normal_into(&shadow, &links[hit_link])? {
        return Ok(Some(n));
    }
    let d = obstacle.posed_nominal().centroid_probe() - links[hit_link].centroid_probe();
    if d.norm() < 1e-9 {
        return Ok(None);
    }
    Ok(Some(d.normalize()))
}

/// Two-shot certification. Phase one is the one-shot search; phase two
/// bisects half shadows expanding along the contact normal, warm-started
/// with phase one's upper bracket. Certifies (eps1 + eps2) / 2, never
/// worse than one-shot.
pub fn certify_two_shot(
    links: &[ConvexBody],
    obstacle: &UncertainObstacle,
    eps_tol: f64,
) -> Result<CertifiedBound, CertifyError> {
    check_inputs(links, eps_tol)?;
    let start = Instant::now();
    let phase1 = bisect_full(links, obstacle, eps_tol)?;
    let eps1 = phase1.upper;

    let fallback = |checks: u32, start: Instant| CertifiedBound {
        epsilon: eps1,
        eps_lower: phase1.lower,
        eps_upper: eps1,
        method: Method::OneShotFallback,
        eps1: Some(eps1),
        eps2: None,
        normal: None,
        saturated_low: phase1.hit_link.is_none(),
        collision_checks: checks,
        elapsed: start.elapsed(),
    };

    // nothing ever collided: no contact to expand away from
    let Some(hit_link) = phase1.hit_link else {
        return Ok(fallback(phase1.checks, start));
    };
    let Some(normal) = phase_two_normal(links, obstacle, eps1, hit_link)? else {
        return Ok(fallback(phase1.checks, start));
    };

    let phase2 = bisect_half(links, obstacle, normal, eps1, eps_tol)?;
    let eps2 = phase2.upper;
    Ok(CertifiedBound {
        epsilon: 0.5 * (eps1 + eps2),
        eps_lower: 0.5 * (phase1.lower + phase2.lower),
        eps_upper: 0.5 * (eps1 + eps2),
        method: Method::TwoShot,
        eps1: Some(eps1),
        eps2: Some(eps2),
        normal: Some(normal),
        saturated_low: false,
        collision_checks: phase1.checks + phase2.checks,
        elapsed: start.elapsed(),
    })
}

/// Boole aggregation: the scene bound is the clamped sum of per-obstacle
/// bounds.
pub fn aggregate(bounds: Vec<CertifiedBound>) -> RiskReport {
    let scene_bound = bounds.iter().map(|b| b.epsilon).sum::<f64>().min(1.0);
    RiskReport {
        per_obstacle: bounds,
        scene_bound,
    }
}

/// Certifies every obstacle independently (in parallel when enabled;
/// results are merged in obstacle order either way) and aggregates.
pub fn certify_scene(
    scene: &Scene,
    method: Method,
    eps_tol: f64,
) -> Result<RiskReport, CertifyError> {
    let links = scene.posed_links();
    let bounds = crate::exec::try_map_indexed(scene.obstacles.len(), |i| {
        let o = &scene.obstacles[i];
        let res = match method {
            Method::OneShot => certify_one_shot(&links, &o.obstacle, eps_tol),
            Method::TwoShot | Method::OneShotFallback => {
                certify_two_shot(&links, &o.obstacle, eps_tol)
            }
        };
        res.map_err(|e| CertifyError::Obstacle {
            name: o.name.clone(),
            message: e.to_string(),
        })
    })?;
    Ok(aggregate(bounds))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chi2::chi2_cdf;
    use crate::math::{Mat3, Pose};

    const TOL: f64 = 1e-6;

    fn iso_obstacle(r: f64, center: Vec3, sigma2: f64) -> UncertainObstacle {
        UncertainObstacle::new(
            ConvexBody::sphere(r).unwrap(),
            Pose::translation(center),
            Mat3::identity() * sigma2,
        )
        .unwrap()
    }

    #[test]
    fn colliding_nominal_saturates_high() {
        let links = vec![ConvexBody::cuboid(Vec3::new(0.5, 0.5, 0.5)).unwrap()];
        let o = iso_obstacle(0.3, Vec3::zeros(), 0.01);
        let b = certify_one_shot(&links, &o, TOL).unwrap();
        assert!(b.epsilon >= 1.0 - TOL);
        assert!(!b.saturated_low);
    }

    #[test]
    fn remote_obstacle_saturates_low() {
        let links = vec![ConvexBody::cuboid(Vec3::new(0.5, 0.5, 0.5)).unwrap()];
        let o = iso_obstacle(0.3, Vec3::new(100.0, 0.0, 0.0), 0.01);
        let b = certify_one_shot(&links, &o, TOL).unwrap();
        assert!(b.epsilon <= TOL);
        assert!(b.saturated_low);
    }

    #[test]
    fn point_link_vs_sphere_matches_closed_form() {
        // isotropic case: the shadow touches the point when
        // r + sigma * sqrt(c) = L, so eps = 1 - chi2_cdf(((L-r)/sigma)^2, 3)
        for (l_dist, r, sigma) in [(2.0, 0.5, 0.3), (1.5, 0.2, 0.5), (3.0, 1.0, 0.7)] {
            let links = vec![ConvexBody::point(Vec3::new(l_dist, 0.0, 0.0))];
            let o = iso_obstacle(r, Vec3::zeros(), sigma * sigma);
            let b = certify_one_shot(&links, &o, TOL).unwrap();
            let want = 1.0 - chi2_cdf(((l_dist - r) / sigma).powi(2), 3).unwrap();
            assert!(
                (b.epsilon - want).abs() <= TOL,
                "L={l_dist} r={r} s={sigma}: got {} want {want}",
                b.epsilon
            );
        }
    }

    #[test]
    fn iteration_count_is_log2_of_inverse_tolerance() {
        let links = vec![ConvexBody::point(Vec3::new(2.0, 0.0, 0.0))];
        let o = iso_obstacle(0.5, Vec3::zeros(), 0.09);
        for tol in [1e-2, 1e-3, 1e-4, 1e-5, 1e-6] {
            let b = certify_one_shot(&links, &o, tol).unwrap();
            let want = (1.0 / tol).log2().ceil() as u32;
            assert!(
                b.collision_checks.abs_diff(want) <= 1,
                "tol={tol}: {} vs {want}",
                b.collision_checks
            );
        }
    }

    #[test]
    fn bracket_is_valid() {
        let links = vec![ConvexBody::point(Vec3::new(2.0, 0.0, 0.0))];
        let o = iso_obstacle(0.5, Vec3::zeros(), 0.09);
        let b = certify_one_shot(&links, &o, 1e-4).unwrap();
        assert!(b.eps_upper - b.eps_lower <= 1e-4);
        let lo_shadow = full_shadow(&o, b.eps_lower.clamp(EPS_MIN, 1.0 - EPS_MIN)).unwrap();
        assert!(gjk::intersects(&lo_shadow, &links[0]).unwrap());
        let hi_shadow = full_shadow(&o, b.eps_upper).unwrap();
        assert!(!gjk::intersects(&hi_shadow, &links[0]).unwrap());
    }

    #[test]
    fn one_sided_scene_halves() {
        // a single link on one side, open space behind: phase two expands
        // freely and eps2 saturates near zero, so epsilon ~ eps1 / 2
        let links = vec![ConvexBody::point(Vec3::new(1.2, 0.0, 0.0))];
        let o = iso_obstacle(0.5, Vec3::zeros(), 0.09);
        let one = certify_one_shot(&links, &o, TOL).unwrap();
        let two = certify_two_shot(&links, &o, TOL).unwrap();
        assert_eq!(two.method, Method::TwoShot);
        assert!(two.epsilon >= 0.5 * one.epsilon - TOL);
        assert!(two.epsilon <= 0.55 * one.epsilon, "{} vs {}", two.epsilon, one.epsilon);
        let (e1, e2) = (two.eps1.unwrap(), two.eps2.unwrap());
        assert!(e2 <= e1);
        assert!((two.epsilon - 0.5 * (e1 + e2)).abs() < 1e-15);
    }

    #[test]
    fn symmetric_pincer_gains_nothing() {
        let links = vec![
            ConvexBody::point(Vec3::new(1.2, 0.0, 0.0)),
            ConvexBody::point(Vec3::new(-1.2, 0.0, 0.0)),
        ];
        let o = iso_obstacle(0.5, Vec3::zeros(), 0.09);
        let one = certify_one_shot(&links, &o, TOL).unwrap();
        let two = certify_two_shot(&links, &o, TOL).unwrap();
        assert!((two.eps2.unwrap() - two.eps1.unwrap()).abs() <= 2.0 * TOL);
        assert!((two.epsilon - one.epsilon).abs() <= 2.0 * TOL);
    }

    #[test]
    fn two_shot_dominates_one_shot() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        for _ in 0..50 {
            let n_links = rng.gen_range(1..4);
            let links: Vec<ConvexBody> = (0..n_links)
                .map(|_| {
                    ConvexBody::cuboid(Vec3::new(0.2, 0.2, 0.2))
                        .unwrap()
                        .translated(Vec3::new(
                            rng.gen_range(-2.0..2.0),
                            rng.gen_range(-2.0..2.0),
                            rng.gen_range(-2.0..2.0),
                        ))
                })
                .collect();
            let o = iso_obstacle(0.3, Vec3::zeros(), rng.gen_range(0.01..0.3));
            let one = certify_one_shot(&links, &o, TOL).unwrap();
            let two = certify_two_shot(&links, &o, TOL).unwrap();
            assert!(
                two.epsilon <= one.epsilon + TOL,
                "two {} one {}",
                two.epsilon,
                one.epsilon
            );
        }
    }

    #[test]
    fn monotone_in_covariance_scale() {
        let links = vec![ConvexBody::point(Vec3::new(2.0, 0.0, 0.0))];
        let mut prev = 0.0;
        for alpha in [0.25, 0.5, 1.0, 2.0, 4.0] {
            let o = iso_obstacle(0.5, Vec3::zeros(), 0.09 * alpha);
            let b = certify_one_shot(&links, &o, TOL).unwrap();
            assert!(b.epsilon >= prev - TOL, "alpha={alpha}");
            prev = b.epsilon;
        }
    }

    #[test]
    fn deterministic_reruns() {
        let links = vec![
            ConvexBody::cuboid(Vec3::new(0.3, 0.2, 0.4))
                .unwrap()
                .translated(Vec3::new(0.5, 0.8, 0.1)),
        ];
        let o = UncertainObstacle::new(
            ConvexBody::cylinder(0.2, 0.5).unwrap(),
            Pose::rot_z(0.3, Vec3::new(-0.5, 0.8, 0.1)),
            Mat3::new(0.2, 0.0, 0.0, 0.0, 0.05, 0.0, 0.0, 0.0, 0.05),
        )
        .unwrap();
        let a = certify_two_shot(&links, &o, TOL).unwrap();
        let b = certify_two_shot(&links, &o, TOL).unwrap();
        // everything except wall time is bitwise identical
        assert_eq!(a.epsilon.to_bits(), b.epsilon.to_bits());
        assert_eq!(a.eps_lower.to_bits(), b.eps_lower.to_bits());
        assert_eq!(a.eps1.unwrap().to_bits(), b.eps1.unwrap().to_bits());
        assert_eq!(a.eps2.unwrap().to_bits(), b.eps2.unwrap().to_bits());
        assert_eq!(a.normal, b.normal);
        assert_eq!(a.collision_checks, b.collision_checks);
    }

    #[test]
    fn aggregate_boole() {
        let mk = |eps: f64| CertifiedBound {
            epsilon: eps,
            eps_lower: eps,
            eps_upper: eps,
            method: Method::OneShot,
            eps1: None,
            eps2: None,
            normal: None,
            saturated_low: false,
            collision_checks: 0,
            elapsed: Duration::ZERO,
        };
        let r = aggregate(vec![mk(0.1), mk(0.05), mk(0.02)]);
        assert!((r.scene_bound - 0.17).abs() < 1e-15);
        let clamped = aggregate(vec![mk(0.7), mk(0.7)]);
        assert_eq!(clamped.scene_bound, 1.0);
        assert_eq!(aggregate(vec![]).scene_bound, 0.0);
    }

    #[test]
    fn scene_certification_and_doubling() {
        let text = include_str!("../fixtures/paper_scene.json");
        let scene = crate::scene::parse_scene(text).unwrap();
        let report = certify_scene(&scene, Method::OneShot, 1e-4).unwrap();
        let sum: f64 = report.per_obstacle.iter().map(|b| b.epsilon).sum();
        assert!((report.scene_bound - sum.min(1.0)).abs() < 1e-15);

        // duplicating an obstacle doubles its contribution exactly
        let mut doubled = scene.clone();
        let mut dup = doubled.obstacles[0].clone();
        dup.name = "dup".to_string();
        doubled.obstacles.push(dup);
        let r2 = certify_scene(&doubled, Method::OneShot, 1e-4).unwrap();
        let expect = (sum + report.per_obstacle[0].epsilon).min(1.0);
        assert!((r2.scene_bound - expect).abs() < 1e-15);
    }

    #[test]
    fn input_validation() {
        let o = iso_obstacle(0.3, Vec3::zeros(), 0.01);
        assert_eq!(certify_one_shot(&[], &o, TOL), Err(CertifyError::NoLinks));
        let links = vec![ConvexBody::sphere(1.0).unwrap()];
        assert!(matches!(
            certify_one_shot(&links, &o, 0.7),
            Err(CertifyError::BadTolerance(_))
        ));
    }
}
