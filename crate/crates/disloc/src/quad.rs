//! Deterministic quadrature building blocks: Gauss-Legendre rules and ray
//! geometry on the unit disk.

use crate::disk::Point;

/// Gauss-Legendre nodes and weights on `[-1, 1]`, by Newton iteration on the
/// Legendre polynomial from the Chebyshev initial guess.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1);
    let mut rule = Vec::with_capacity(n);
    let m = n.div_ceil(2);
    for i in 0..m {
        // Initial guess for the i-th positive root.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, x);
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_and_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.push((x, w));
        if !(n % 2 == 1 && i == m - 1 && x.abs() < 1e-12) {
            rule.push((-x, w));
        }
    }
    rule.sort_by(|a, b| a.0.total_cmp(&b.0));
    rule
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// The same rule mapped to `[a, b]`.
pub fn gauss_on(a: f64, b: f64, n: usize) -> Vec<(f64, f64)> {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    gauss_legendre(n)
        .into_iter()
        .map(|(x, w)| (mid + half * x, half * w))
        .collect()
}

/// Map a precomputed `[-1, 1]` rule onto `[a, b]` without recomputing nodes.
pub fn map_rule(rule: &[(f64, f64)], a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    rule.iter().map(move |&(x, w)| (mid + half * x, half * w))
}

/// Distance from an interior point `a` to the unit circle along direction `u`
/// (unit vector): the positive root of `|a + t u| = 1`.
pub fn ray_to_circle(a: Point, u: Point) -> f64 {
    let au = a.x * u.x + a.y * u.y;
    let c = a.x * a.x + a.y * a.y - 1.0;
    -au + (au * au - c).sqrt()
}

/// Intersection parameters of the ray `a + t u` with the circle of radius
/// `rho` around `b`, if any: roots of `t^2 - 2 t (u.c) + |c|^2 - rho^2` with
/// `c = b - a`. Returns `(t_minus, t_plus)` when the ray meets the circle.
pub fn ray_circle_interval(a: Point, u: Point, b: Point, rho: f64) -> Option<(f64, f64)> {
    let cx = b.x - a.x;
    let cy = b.y - a.y;
    let uc = u.x * cx + u.y * cy;
    let disc = uc * uc - (cx * cx + cy * cy - rho * rho);
    if disc <= 0.0 {
        return None;
    }
    let s = disc.sqrt();
    Some((uc - s, uc + s))
}
