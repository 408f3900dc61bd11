//! Shared test oracles: an exact LP separation test and a min-norm-point
//! distance solver for polytope pairs, a high-precision erf, and random
//! scene generators. These are independent reimplementations used to
//! cross-check the library, so they deliberately share no code with it.

#![allow(dead_code)]

use rand::Rng;
use riskcert::scene::{Link, Scene, SceneObstacle};
use riskcert::{ConvexBody, Mat3, Pose, UncertainObstacle, Vec3};

/// Phase-1 simplex feasibility: do conv{a} and conv{b} intersect?
///
/// Feasible iff there are convex weights with sum_i l_i a_i = sum_j m_j b_j.
/// Five equality rows (three coordinates, two weight sums), artificial
/// basis, Bland's rule, so it terminates and is exact up to f64 pivoting.
pub fn lp_polytopes_intersect(a: &[Vec3], b: &[Vec3]) -> bool {
    let n = a.len();
    let m = b.len();
    let rows = 5;
    let cols = n + m;
    // tableau: rows x (cols + artificials + rhs); costs row at the end
    let width = cols + rows + 1;
    let mut t = vec![vec![0.0f64; width]; rows + 1];
    for (i, p) in a.iter().enumerate() {
        t[0][i] = p.x;
        t[1][i] = p.y;
        t[2][i] = p.z;
        t[3][i] = 1.0;
    }
    for (j, p) in b.iter().enumerate() {
        t[0][n + j] = -p.x;
        t[1][n + j] = -p.y;
        t[2][n + j] = -p.z;
        t[4][n + j] = 1.0;
    }
    t[3][width - 1] = 1.0;
    t[4][width - 1] = 1.0;
    // flip rows with negative rhs so artificials start feasible
    for r in 0..rows {
        if t[r][width - 1] < 0.0 {
            for v in t[r].iter_mut() {
                *v = -*v;
            }
        }
    }
    let mut basis = vec![0usize; rows];
    for r in 0..rows {
        t[r][cols + r] = 1.0;
        basis[r] = cols + r;
    }
    // cost row: minimize the sum of artificials (reduced form)
    for c in 0..width {
        let s: f64 = (0..rows).map(|r| t[r][c]).sum();
        t[rows][c] = -s;
    }
    for c in 0..rows {
        t[rows][cols + c] = 0.0;
    }

    let tol = 1e-11;
    loop {
        // Bland: lowest-index column with negative reduced cost
        let Some(pivot_col) = (0..cols + rows).find(|&c| t[rows][c] < -tol) else {
            break;
        };
        let mut pivot_row = None;
        let mut best = f64::INFINITY;
        for r in 0..rows {
            if t[r][pivot_col] > tol {
                let ratio = t[r][width - 1] / t[r][pivot_col];
                if ratio < best - tol
                    || (ratio < best + tol
                        && pivot_row.is_some_and(|pr: usize| basis[r] < basis[pr]))
                {
                    best = ratio;
                    pivot_row = Some(r);
                }
            }
        }
        let Some(pr) = pivot_row else {
            break; // unbounded cannot happen on a bounded feasible region
        };
        let pv = t[pr][pivot_col];
        for v in t[pr].iter_mut() {
            *v /= pv;
        }
        for r in 0..=rows {
            if r != pr {
                let f = t[r][pivot_col];
                if f != 0.0 {
                    for c in 0..width {
                        t[r][c] -= f * t[pr][c];
                    }
                }
            }
        }
        basis[pr] = pivot_col;
    }
    // objective value = -cost row rhs after the reduced-form setup
    let obj = -t[rows][width - 1];
    obj.abs() < 1e-8
}

/// Distance between polytope hulls via away-step Frank-Wolfe on the
/// difference point cloud conv{a_i - b_j}: the exact min-norm point.
pub fn fw_polytope_distance(a: &[Vec3], b: &[Vec3]) -> f64 {
    let pts: Vec<Vec3> = a
        .iter()
        .flat_map(|p| b.iter().map(move |q| p - q))
        .collect();
    let k = pts.len();
    let mut w = vec![0.0f64; k];
    w[0] = 1.0;
    let mut x = pts[0];
    let scale = pts.iter().map(|p| p.norm_squared()).fold(0.0, f64::max) + 1.0;
    for _ in 0..200_000 {
        // gradient of ||x||^2 is 2x; FW vertex minimizes p . x
        let (s_idx, _) = pts
            .iter()
            .enumerate()
            .map(|(i, p)| (i, p.dot(&x)))
            .min_by(|l, r| l.1.total_cmp(&r.1))
            .unwrap();
        let gap = x.dot(&x) - pts[s_idx].dot(&x);
        if gap <= 1e-16 * scale {
            break;
        }
        // away vertex: active point maximizing p . x
        let (a_idx, _) = pts
            .iter()
            .enumerate()
            .filter(|(i, _)| w[*i] > 0.0)
            .map(|(i, p)| (i, p.dot(&x)))
            .max_by(|l, r| l.1.total_cmp(&r.1))
            .unwrap();
        let fw_gain = gap;
        let away_gain = pts[a_idx].dot(&x) - x.dot(&x);
        if fw_gain >= away_gain {
            let d = pts[s_idx] - x;
            let gamma = (-x.dot(&d) / d.norm_squared()).clamp(0.0, 1.0);
            for v in w.iter_mut() {
                *v *= 1.0 - gamma;
            }
            w[s_idx] += gamma;
            x += gamma * d;
        } else {
            let d = x - pts[a_idx];
            let gamma_max = w[a_idx] / (1.0 - w[a_idx]).max(1e-300);
            let gamma = (-x.dot(&d) / d.norm_squared()).clamp(0.0, gamma_max);
            for (i, v) in w.iter_mut().enumerate() {
                if i == a_idx {
                    *v = (*v) * (1.0 + gamma) - gamma;
                } else {
                    *v *= 1.0 + gamma;
                }
            }
            x += gamma * d;
        }
    }
    x.norm()
}

/// erf accurate to ~1e-15: Maclaurin series below 1.5, Lentz continued
/// fraction for erfc above.
pub fn erf_oracle(z: f64) -> f64 {
    if z < 0.0 {
        return -erf_oracle(-z);
    }
    if z < 1.5 {
        let mut term = z;
        let mut sum = z;
        let z2 = z * z;
        let mut n = 0u32;
        while term.abs() > 1e-18 * sum.abs().max(1.0) {
            n += 1;
            term *= -z2 / n as f64;
            sum += term / (2 * n + 1) as f64;
        }
        return sum * 2.0 / std::f64::consts::PI.sqrt();
    }
    // erfc(z) = exp(-z^2)/sqrt(pi) * 1/(z + 1/2/(z + 1/(z + 3/2/(z + ...))))
    let tiny = 1e-300;
    let mut f = z;
    let mut c = z;
    let mut d = 0.0f64;
    for i in 1..500 {
        let an = i as f64 / 2.0;
        d = z + an * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = z + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-17 {
            break;
        }
    }
    let erfc = (-z * z).exp() / std::f64::consts::PI.sqrt() / f;
    1.0 - erfc
}

pub fn random_polytope<R: Rng>(rng: &mut R, center: Vec3, radius: f64) -> Vec<Vec3> {
    let n = rng.gen_range(4..=10);
    (0..n)
        .map(|_| {
            center
                + Vec3::new(
                    rng.gen_range(-radius..radius),
                    rng.gen_range(-radius..radius),
                    rng.gen_range(-radius..radius),
                )
        })
        .collect()
}

fn random_body<R: Rng>(rng: &mut R) -> ConvexBody {
    match rng.gen_range(0..3) {
        0 => ConvexBody::sphere(rng.gen_range(0.1..0.5)).unwrap(),
        1 => ConvexBody::cuboid(Vec3::new(
            rng.gen_range(0.1..0.4),
            rng.gen_range(0.1..0.4),
            rng.gen_range(0.1..0.4),
        ))
        .unwrap(),
        _ => ConvexBody::cylinder(rng.gen_range(0.1..0.3), rng.gen_range(0.1..0.4)).unwrap(),
    }
}

fn random_psd<R: Rng>(rng: &mut R, scale: f64) -> Mat3 {
    let a = Mat3::from_fn(|_, _| rng.gen_range(-1.0..1.0));
    a * a.transpose() * scale
}

fn random_point<R: Rng>(rng: &mut R, extent: f64) -> Vec3 {
    Vec3::new(
        rng.gen_range(-extent..extent),
        rng.gen_range(-extent..extent),
        rng.gen_range(-extent..extent),
    )
}

/// A random scene with 1-6 links and 1-3 uncertain obstacles inside a
/// few-meter working volume, biased so risks span saturated to midrange.
pub fn random_scene<R: Rng>(rng: &mut R) -> Scene {
    let mut scene = Scene::default();
    let n_links = rng.gen_range(1..=6);
    for i in 0..n_links {
        scene.links.push(Link {
            name: format!("link{i}"),
            body: random_body(rng),
            pose: Pose::rot_z(rng.gen_range(0.0..6.28), random_point(rng, 1.5)),
        });
    }
    let n_obstacles = rng.gen_range(1..=3);
    for i in 0..n_obstacles {
        let body = random_body(rng);
        let pose = Pose::rot_z(rng.gen_range(0.0..6.28), random_point(rng, 1.5));
        let scale = rng.gen_range(0.005..0.1);
        let obstacle = UncertainObstacle::new(body, pose, random_psd(rng, scale))
        .unwrap();
        scene.obstacles.push(SceneObstacle {
            name: format!("obstacle{i}"),
            obstacle,
        });
    }
    scene
}
