//! Chi-squared CDF and inverse CDF for small degrees of freedom.
//!
//! `chi2_cdf` is the regularized lower incomplete gamma function
//! P(k/2, x/2), evaluated by series for small arguments and by a
//! continued fraction otherwise. `chi2_inv` inverts it with a
//! safeguarded Newton iteration. Both target absolute accuracy well
//! below the 1e-10 the certifiers rely on.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum Chi2Error {
    #[error("x must be finite and >= 0, got {0}")]
    InvalidX(f64),
    #[error("p must satisfy 0 <= p < 1, got {0}")]
    InvalidP(f64),
    #[error("degrees of freedom must be >= 1, got {0}")]
    InvalidDof(u32),
}

const EPS: f64 = 1e-16;
const MAX_ITER: usize = 500;

/// Lanczos approximation, g = 7, 9 coefficients.
fn ln_gamma(x: f64) -> f64 {
    const COEF: [f64; 9] = [
        0.99999999999980993,
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ];
    if x < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = COEF[0];
    let t = x + 7.5;
    for (i, &c) in COEF.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Regularized lower incomplete gamma P(a, x) by series expansion.
fn gamma_p_series(a: f64, x: f64) -> f64 {
    let mut term = 1.0 / a;
    let mut sum = term;
    let mut n = a;
    for _ in 0..MAX_ITER {
        n += 1.0;
        term *= x / n;
        sum += term;
        if term.abs() < sum.abs() * EPS {
            break;
        }
    }
    sum * (-x + a * x.ln() - ln_gamma(a)).exp()
}

/// Regularized upper incomplete gamma Q(a, x) by Lentz continued fraction.
fn gamma_q_cf(a: f64, x: f64) -> f64 {
    let tiny = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..=MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h * (-x + a * x.ln() - ln_gamma(a)).exp()
}

fn gamma_p(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x < a + 1.0 {
        gamma_p_series(a, x)
    } else {
        1.0 - gamma_q_cf(a, x)
    }
}

/// P(chi²_k <= x).
pub fn chi2_cdf(x: f64, k: u32) -> Result<f64, Chi2Error> {
    if k < 1 {
        return Err(Chi2Error::InvalidDof(k));
    }
    if !x.is_finite() || x < 0.0 {
        return Err(Chi2Error::InvalidX(x));
    }
    Ok(gamma_p(k as f64 / 2.0, x / 2.0).clamp(0.0, 1.0))
}

/// Chi-squared density, the Newton derivative for the inverse.
fn chi2_pdf(x: f64, k: u32) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let a = k as f64 / 2.0;
    ((a - 1.0) * x.ln() - x / 2.0 - a * std::f64::consts::LN_2 - ln_gamma(a)).exp()
}

/// Inverse CDF: x with chi2_cdf(x, k) = p. Strictly increasing on (0, 1).
pub fn chi2_inv(p: f64, k: u32) -> Result<f64, Chi2Error> {
    if k < 1 {
        return Err(Chi2Error::InvalidDof(k));
    }
    if !p.is_finite() || !(0.0..1.0).contains(&p) {
        return Err(Chi2Error::InvalidP(p));
    }
    if p == 0.0 {
        return Ok(0.0);
    }
    // bracket the root, then Newton with bisection safeguard
    let mut lo = 0.0;
    let mut hi = k as f64;
    while chi2_cdf(hi, k)? < p {
        lo = hi;
        hi *= 2.0;
        if hi > 1e9 {
            break;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let f = chi2_cdf(x, k)? - p;
        if f > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        if f.abs() < 1e-14 {
            break;
        }
        let df = chi2_pdf(x, k);
        let step = if df > 0.0 { f / df } else { f64::INFINITY };
        let mut next = x - step;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() < 1e-15 * x.max(1.0) {
            x = next;
            break;
        }
        x = next;
    }
    Ok(x)
}
