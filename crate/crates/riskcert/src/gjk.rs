//! GJK intersection / distance / closest-point queries over support-mapped
//! bodies.
//!
//! The solver iterates on a simplex of Minkowski-difference points, each
//! carrying its source supports on both bodies so that witness points fall
//! out of the final barycentric coordinates. A cheap bounding-sphere
//! reject (from six axis support probes) screens obviously separated
//! pairs before the full iteration runs.

use crate::convex::{ConvexBody, GeomError};
use crate::math::Vec3;
use thiserror::Error;

pub const GJK_MAX_ITERATIONS: u32 = 128;
/// Termination tolerance on simplex progress.
pub const GJK_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum GjkError {
    #[error("GJK failed to converge in {max} iterations (ambiguous margin {margin:.3e})")]
    IterationLimit { max: u32, margin: f64 },
    #[error(transparent)]
    Geom(#[from] GeomError),
}

/// Outcome of a distance query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProximityResult {
    pub intersecting: bool,
    /// Separation distance; 0 when intersecting.
    pub distance: f64,
    /// Closest point on body a (meaningful only when separated).
    pub witness_a: Vec3,
    /// Closest point on body b (meaningful only when separated).
    pub witness_b: Vec3,
    pub iterations: u32,
}

#[derive(Clone, Copy)]
struct SupportPoint {
    /// Point of the Minkowski difference a - b.
    w: Vec3,
    on_a: Vec3,
    on_b: Vec3,
}

fn difference_support(a: &ConvexBody, b: &ConvexBody, dir: &Vec3) -> SupportPoint {
    let on_a = a.support_raw(dir);
    let on_b = b.support_raw(&-dir);
    SupportPoint {
        w: on_a - on_b,
        on_a,
        on_b,
    }
}

/// Closest point of a 1-3 point simplex to the origin: the point, its
/// barycentric coordinates, and the indices of the retained vertices.
struct SimplexClosest {
    point: Vec3,
    lambdas: [f64; 3],
    keep: [usize; 3],
    n_keep: usize,
}

fn closest_point(pts: &[SupportPoint]) -> SimplexClosest {
    match pts.len() {
        1 => SimplexClosest {
            point: pts[0].w,
            lambdas: [1.0, 0.0, 0.0],
            keep: [0, 0, 0],
            n_keep: 1,
        },
        2 => closest_segment(pts, 0, 1),
        3 => closest_triangle(pts, 0, 1, 2),
        _ => unreachable!("simplex size"),
    }
}

fn closest_segment(pts: &[SupportPoint], i: usize, j: usize) -> SimplexClosest {
    let a = pts[i].w;
    let b = pts[j].w;
    let ab = b - a;
    let denom = ab.norm_squared();
    let t = if denom > 0.0 {
        (-a.dot(&ab) / denom).clamp(0.0, 1.0)
    } else {
        0.0
    };
    if t <= 0.0 {
        SimplexClosest {
            point: a,
            lambdas: [1.0, 0.0, 0.0],
            keep: [i, 0, 0],
            n_keep: 1,
        }
    } else if t >= 1.0 {
        SimplexClosest {
            point: b,
            lambdas: [1.0, 0.0, 0.0],
            keep: [j, 0, 0],
            n_keep: 1,
        }
    } else {
        SimplexClosest {
            point: a + ab * t,
            lambdas: [1.0 - t, t, 0.0],
            keep: [i, j, 0],
            n_keep: 2,
        }
    }
}

/// Closest point on triangle (i, j, k) to the origin; Ericson's region
/// classification specialized to a query point at the origin.
fn closest_triangle(pts: &[SupportPoint], i: usize, j: usize, k: usize) -> SimplexClosest {
    let a = pts[i].w;
    let b = pts[j].w;
    let c = pts[k].w;
    let ab = b - a;
    let ac = c - a;
    let ap = -a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return SimplexClosest {
            point: a,
            lambdas: [1.0, 0.0, 0.0],
            keep: [i, 0, 0],
            n_keep: 1,
        };
    }
    let bp = -b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return SimplexClosest {
            point: b,
            lambdas: [1.0, 0.0, 0.0],
            keep: [j, 0, 0],
            n_keep: 1,
        };
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return SimplexClosest {
            point: a + ab * v,
            lambdas: [1.0 - v, v, 0.0],
            keep: [i, j, 0],
            n_keep: 2,
        };
    }
    let cp = -c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return SimplexClosest {
            point: c,
            lambdas: [1.0, 0.0, 0.0],
            keep: [k, 0, 0],
            n_keep: 1,
        };
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return SimplexClosest {
            point: a + ac * w,
            lambdas: [1.0 - w, w, 0.0],
            keep: [i, k, 0],
            n_keep: 2,
        };
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return SimplexClosest {
            point: b + (c - b) * w,
            lambdas: [1.0 - w, w, 0.0],
            keep: [j, k, 0],
            n_keep: 2,
        };
    }
    let denom = va + vb + vc;
    if denom.abs() < f64::MIN_POSITIVE || !denom.is_finite() {
        // degenerate (collinear) triangle: best of the three edges
        let e1 = closest_segment(pts, i, j);
        let e2 = closest_segment(pts, i, k);
        let e3 = closest_segment(pts, j, k);
        let mut best = e1;
        if e2.point.norm_squared() < best.point.norm_squared() {
            best = e2;
        }
        if e3.point.norm_squared() < best.point.norm_squared() {
            best = e3;
        }
        return best;
    }
    let v = vb / denom;
    let w = vc / denom;
    SimplexClosest {
        point: a + ab * v + ac * w,
        lambdas: [1.0 - v - w, v, w],
        keep: [i, j, k],
        n_keep: 3,
    }
}

enum TetraClosest {
    ContainsOrigin,
    Face(SimplexClosest),
}

fn closest_tetrahedron(pts: &[SupportPoint]) -> TetraClosest {
    debug_assert_eq!(pts.len(), 4);
    let faces: [(usize, usize, usize, usize); 4] =
        [(0, 1, 2, 3), (0, 1, 3, 2), (0, 2, 3, 1), (1, 2, 3, 0)];
    let mut best: Option<SimplexClosest> = None;
    let mut outside_any = false;
    for &(i, j, k, opp) in &faces {
        let a = pts[i].w;
        let n = (pts[j].w - a).cross(&(pts[k].w - a));
        let sign_origin = n.dot(&-a);
        let sign_opp = n.dot(&(pts[opp].w - a));
        // origin strictly on the opposite side of the face from the
        // remaining vertex, or a degenerate face: examine the face
        if sign_origin * sign_opp < 0.0 || sign_opp == 0.0 {
            outside_any = true;
            let cand = closest_triangle(pts, i, j, k);
            let better = match &best {
                None => true,
                Some(b) => cand.point.norm_squared() < b.point.norm_squared(),
            };
            if better {
                best = Some(cand);
            }
        }
    }
    match best {
        Some(b) if outside_any => TetraClosest::Face(b),
        _ => TetraClosest::ContainsOrigin,
    }
}

enum Outcome {
    Intersecting { iterations: u32 },
    Separated(ProximityResult),
    /// Early boolean-only exit: provably disjoint, distance not resolved.
    DisjointEarly,
}

fn gjk_run(a: &ConvexBody, b: &ConvexBody, early_exit: bool) -> Result<Outcome, GjkError> {
    let init_dir = {
        let d = a.centroid_probe() - b.centroid_probe();
        if d.norm_squared() > 1e-24 {
            d
        } else {
            Vec3::x()
        }
    };
    let mut simplex: Vec<SupportPoint> = vec![difference_support(a, b, &init_dir)];
    let mut scale: f64 = simplex[0].w.norm_squared().max(1e-12);
    let mut last_margin = f64::INFINITY;
    let mut prev_v2 = f64::INFINITY;

    for it in 1..=GJK_MAX_ITERATIONS {
        // closest point of the current simplex to the origin
        let (closest, contained) = if simplex.len() == 4 {
            match closest_tetrahedron(&simplex) {
                TetraClosest::ContainsOrigin => (None, true),
                TetraClosest::Face(c) => (Some(c), false),
            }
        } else {
            (Some(closest_point(&simplex)), false)
        };
        if contained {
            return Ok(Outcome::Intersecting { iterations: it });
        }
        let c = closest.unwrap();
        // shrink the simplex to the supporting face
        let retained: Vec<SupportPoint> = c.keep[..c.n_keep].iter().map(|&i| simplex[i]).collect();
        simplex = retained;
        let v = c.point;
        let v2 = v.norm_squared();
        if v2 <= GJK_TOL * GJK_TOL * scale {
            return Ok(Outcome::Intersecting { iterations: it });
        }

        let w = difference_support(a, b, &-v);
        scale = scale.max(w.w.norm_squared());
        if early_exit && v.dot(&w.w) > 0.0 {
            // the support plane at w separates the origin from a - b
            return Ok(Outcome::DisjointEarly);
        }
        let margin = v2 - v.dot(&w.w);
        last_margin = margin;
        let duplicate = simplex
            .iter()
            .any(|p| (p.w - w.w).norm_squared() <= 1e-24 * scale);
        // smooth boundaries converge linearly and can stop making
        // floating-point progress before the margin test is met; a
        // stall with a noise-floor margin is the converged answer
        let no_progress = v2 >= prev_v2 - 1e-14 * scale;
        prev_v2 = v2;
        let stalled = no_progress && margin <= 1e-9 * scale;
        if no_progress && !stalled && v2 <= 1e-9 * scale {
            // grazing contact the margin cannot resolve: the
            // conservative verdict keeps certificates sound
            return Ok(Outcome::Intersecting { iterations: it });
        }
        if margin <= GJK_TOL * v2 + 1e-14 * scale || duplicate || stalled {
            let mut wa = Vec3::zeros();
            let mut wb = Vec3::zeros();
            for (idx, p) in simplex.iter().enumerate() {
                wa += p.on_a * c.lambdas[idx];
                wb += p.on_b * c.lambdas[idx];
            }
            return Ok(Outcome::Separated(ProximityResult {
                intersecting: false,
                distance: v2.sqrt(),
                witness_a: wa,
                witness_b: wb,
                iterations: it,
            }));
        }
        simplex.push(w);
    }
    Err(GjkError::IterationLimit {
        max: GJK_MAX_ITERATIONS,
        margin: last_margin,
    })
}

/// Conservative sphere-vs-sphere screen; `true` means provably disjoint.
fn bounding_reject(a: &ConvexBody, b: &ConvexBody) -> bool {
    let (ca, ra) = a.bounding_sphere();
    let (cb, rb) = b.bounding_sphere();
    (ca - cb).norm() > ra + rb
}

/// Boolean intersection test: true iff the bodies overlap (within the
/// GJK termination tolerance).
pub fn intersects(a: &ConvexBody, b: &ConvexBody) -> Result<bool, GjkError> {
    if bounding_reject(a, b) {
        return Ok(false);
    }
    match gjk_run(a, b, true)? {
        Outcome::Intersecting { .. } => Ok(true),
        Outcome::Separated(_) | Outcome::DisjointEarly => Ok(false),
    }
}

/// Separation distance with closest-point witnesses.
pub fn distance(a: &ConvexBody, b: &ConvexBody) -> Result<ProximityResult, GjkError> {
    match gjk_run(a, b, false)? {
        Outcome::Intersecting { iterations } => Ok(ProximityResult {
            intersecting: true,
            distance: 0.0,
            witness_a: Vec3::zeros(),
            witness_b: Vec3::zeros(),
            iterations,
        }),
        Outcome::Separated(r) => Ok(r),
        Outcome::DisjointEarly => unreachable!("early exit disabled"),
    }
}

/// Unit normal from `b_link` into `a_shadow` at the closest approach.
/// Returns `None` when the witnesses coincide (degenerate contact); the
/// caller then falls back to a centroid-based direction.
pub fn contact_normal_into(
    a_shadow: &ConvexBody,
    b_link: &ConvexBody,
) -> Result<Option<Vec3>, GjkError> {
    let prox = distance(a_shadow, b_link)?;
    if prox.intersecting || prox.distance < 1e-9 {
        return Ok(None);
    }
    let d = prox.witness_a - prox.witness_b;
    if d.norm() < 1e-9 {
        return Ok(None);
    }
    Ok(Some(d.normalize()))
}
