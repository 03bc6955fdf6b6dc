//! Slow, independent evaluation of the renormalized energy from its original
//! self/interaction decomposition by 2-D quadrature, used to validate the
//! spectral path at small `n`.
//!
//! The self energy integrates `|grad phi + grad w|^2` over the disk minus the
//! core ball (log-radial substitution, so the `1/t^2` concentration integrates
//! exactly) plus `|grad w|^2` over the core ball. The interaction energy
//! integrates `(grad phi_a + grad w_a) . (grad phi_b + grad w_b)` over the
//! disk with disjoint polar patches around each singular point and an annular
//! panel decomposition in between; in core-centered coordinates the Jacobian
//! cancels the `1/t` singularity exactly.

use crate::disk::{
    adaptive_order, normal_derivative_log_coeffs, solve_neumann, NeumannSolution, Point,
};
use crate::energy::{renormalized_energy, BoundaryDatum, PointConfig};
use crate::error::{Error, Result};
use crate::quad::{gauss_legendre, gauss_on, map_rule, ray_circle_interval, ray_to_circle};
use rayon::prelude::*;
use std::f64::consts::PI;

/// Node budget for the polar quadratures: `radial` Gauss points per ray,
/// `angular` rays (split across panels where the schemes decompose).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureGrid {
    pub radial: usize,
    pub angular: usize,
}

impl Default for QuadratureGrid {
    fn default() -> Self {
        QuadratureGrid {
            radial: 512,
            angular: 1024,
        }
    }
}

impl QuadratureGrid {
    pub fn new(radial: usize, angular: usize) -> Self {
        QuadratureGrid {
            radial: radial.max(4),
            angular: angular.max(8),
        }
    }
}

fn harmonic_correction(a: Point, datum: &BoundaryDatum) -> Result<NeumannSolution> {
    let order = adaptive_order(a.norm())
        .max(datum.series().order())
        .max(1);
    let g = datum.series().sub(&normal_derivative_log_coeffs(a, order)?);
    solve_neumann(&g)
}

/// Self energy of a single dislocation:
/// `pi log d(a) + 1/2 int_{disk \ B_d(a)} |grad phi_a + grad w_a|^2
///  + 1/2 int_{B_d(a)} |grad w_a|^2`.
pub fn self_energy(a: Point, datum: &BoundaryDatum, n: usize) -> Result<f64> {
    self_energy_with_grid(a, datum, n, QuadratureGrid::default())
}

pub fn self_energy_with_grid(
    a: Point,
    datum: &BoundaryDatum,
    n: usize,
    grid: QuadratureGrid,
) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    if !a.is_finite() || a.norm() >= 1.0 {
        return Err(Error::OutsideDomain {
            x: a.x,
            y: a.y,
            detail: "must lie strictly inside the unit disk".into(),
        });
    }
    let d = 1.0 - a.norm();
    let w = harmonic_correction(a, datum)?;
    let base = gauss_legendre(grid.radial);
    let m = grid.angular;

    // Annulus in polar coordinates centered at a, radial variable s = log t:
    // integrand |u/t + grad w|^2 t^2 = 1 + 2 t (u . grad w) + t^2 |grad w|^2.
    let annulus: f64 = (0..m)
        .into_par_iter()
        .map(|j| {
            let psi = 2.0 * PI * (j as f64 + 0.5) / m as f64;
            let u = Point::new(psi.cos(), psi.sin());
            let reach = ray_to_circle(a, u);
            if reach <= d * (1.0 + 1e-14) {
                return 0.0;
            }
            let mut acc = 0.0;
            for (s, ws) in map_rule(&base, d.ln(), reach.ln()) {
                let t = s.exp();
                let x = Point::new(a.x + t * u.x, a.y + t * u.y);
                let gw = w.gradient_at(x);
                let udot = u.x * gw.x + u.y * gw.y;
                acc += ws * (1.0 + 2.0 * t * udot + t * t * (gw.x * gw.x + gw.y * gw.y));
            }
            acc
        })
        .collect::<Vec<f64>>()
        .iter()
        .sum::<f64>()
        * (2.0 * PI / m as f64)
        * 0.5;

    // Core ball: |grad w|^2 is smooth there.
    let radial = gauss_on(0.0, d, grid.radial);
    let core: f64 = (0..m)
        .into_par_iter()
        .map(|j| {
            let psi = 2.0 * PI * (j as f64 + 0.5) / m as f64;
            let u = Point::new(psi.cos(), psi.sin());
            let mut acc = 0.0;
            for &(t, wt) in &radial {
                let x = Point::new(a.x + t * u.x, a.y + t * u.y);
                let gw = w.gradient_at(x);
                acc += wt * t * (gw.x * gw.x + gw.y * gw.y);
            }
            acc
        })
        .collect::<Vec<f64>>()
        .iter()
        .sum::<f64>()
        * (2.0 * PI / m as f64)
        * 0.5;

    Ok(PI * d.ln() + annulus + core)
}

struct StrainField<'a> {
    core: Point,
    w: &'a NeumannSolution,
}

impl StrainField<'_> {
    /// `grad log|x - core| + grad w` at `x`.
    fn at(&self, x: Point) -> Point {
        let dx = x.x - self.core.x;
        let dy = x.y - self.core.y;
        let r2 = dx * dx + dy * dy;
        let gw = self.w.gradient_at(x);
        Point::new(dx / r2 + gw.x, dy / r2 + gw.y)
    }
}

/// Interaction energy of two dislocations,
/// `int_disk (grad phi_a + grad w_a) . (grad phi_b + grad w_b)`.
pub fn interaction_energy(a: Point, b: Point, datum: &BoundaryDatum, n: usize) -> Result<f64> {
    interaction_energy_with_grid(a, b, datum, n, QuadratureGrid::default())
}

pub fn interaction_energy_with_grid(
    a: Point,
    b: Point,
    datum: &BoundaryDatum,
    n: usize,
    grid: QuadratureGrid,
) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    for p in [a, b] {
        if !p.is_finite() || p.norm() >= 1.0 {
            return Err(Error::OutsideDomain {
                x: p.x,
                y: p.y,
                detail: "must lie strictly inside the unit disk".into(),
            });
        }
    }
    if a == b {
        return Err(Error::Collision { x: a.x, y: a.y });
    }
    let sep = a.dist(b);
    let rho_a = 0.45 * (1.0 - a.norm()).min(sep);
    let rho_b = 0.45 * (1.0 - b.norm()).min(sep);
    let w_a = harmonic_correction(a, datum)?;
    let w_b = harmonic_correction(b, datum)?;
    let fa = StrainField { core: a, w: &w_a };
    let fb = StrainField { core: b, w: &w_b };

    let patch = |center: Point, rho: f64, own: &StrainField, other: &StrainField| -> f64 {
        let mp = (grid.angular / 2).max(16);
        let radial = gauss_on(0.0, rho, (grid.radial / 2).max(8));
        (0..mp)
            .into_par_iter()
            .map(|j| {
                let psi = 2.0 * PI * (j as f64 + 0.5) / mp as f64;
                let u = Point::new(psi.cos(), psi.sin());
                let mut acc = 0.0;
                for &(t, wt) in &radial {
                    let x = Point::new(center.x + t * u.x, center.y + t * u.y);
                    let gw = own.w.gradient_at(x);
                    // t * own field = u + t grad w: the Jacobian cancels 1/t.
                    let tf = Point::new(u.x + t * gw.x, u.y + t * gw.y);
                    let g = other.at(x);
                    acc += wt * (tf.x * g.x + tf.y * g.y);
                }
                acc
            })
            .collect::<Vec<f64>>()
            .iter()
            .sum::<f64>()
            * (2.0 * PI / mp as f64)
    };
    let patch_a = patch(a, rho_a, &fa, &fb);
    let patch_b = patch(b, rho_b, &fb, &fa);

    // Remainder in a-centered polar coordinates, excluding both core patches.
    // The angular domain splits at the tangency angles of the patch around b.
    let dir = Point::new(b.x - a.x, b.y - a.y);
    let phi_c = dir.angle();
    let delta = (rho_b / sep).asin();
    let m = grid.angular;
    let floor_nodes = (m / 4).clamp(4, 48);
    let shadow_nodes =
        ((m as f64 * delta / PI).round() as usize).clamp(floor_nodes, m - floor_nodes);
    let open_nodes = m - shadow_nodes;
    let nr = (grid.radial / 2).max(8);
    let radial_base = gauss_legendre(nr);

    let sector = |lo: f64, hi: f64, nodes: usize, shadowed: bool| -> f64 {
        gauss_on(lo, hi, nodes)
            .into_par_iter()
            .map(|(psi, wpsi)| {
                let u = Point::new(psi.cos(), psi.sin());
                let reach = ray_to_circle(a, u);
                let mut segments = [(rho_a, reach), (0.0, 0.0)];
                let mut nseg = 1;
                if shadowed {
                    if let Some((t0, t1)) = ray_circle_interval(a, u, b, rho_b) {
                        let t0 = t0.max(rho_a);
                        let t1 = t1.min(reach);
                        if t1 > t0 {
                            segments = [(rho_a, t0), (t1, reach)];
                            nseg = 2;
                        }
                    }
                }
                let mut acc = 0.0;
                for &(s0, s1) in segments.iter().take(nseg) {
                    if s1 <= s0 {
                        continue;
                    }
                    for (t, wt) in map_rule(&radial_base, s0, s1) {
                        let x = Point::new(a.x + t * u.x, a.y + t * u.y);
                        let gw = w_a.gradient_at(x);
                        let tf = Point::new(u.x + t * gw.x, u.y + t * gw.y);
                        let g = fb.at(x);
                        acc += wt * (tf.x * g.x + tf.y * g.y);
                    }
                }
                wpsi * acc
            })
            .collect::<Vec<f64>>()
            .iter()
            .sum()
    };
    let remainder = sector(phi_c - delta, phi_c + delta, shadow_nodes, true)
        + sector(phi_c + delta, phi_c - delta + 2.0 * PI, open_nodes, false);

    Ok(patch_a + patch_b + remainder)
}

/// Absolute gap between the quadrature evaluation of the original
/// decomposition, rescaled by `1/n^2`, and the spectral four-term total.
/// Guarded to `n <= 3` because the quadrature cost grows quadratically.
pub fn identity_check(config: &PointConfig, datum: &BoundaryDatum) -> Result<f64> {
    identity_check_with_grid(config, datum, QuadratureGrid::default())
}

pub fn identity_check_with_grid(
    config: &PointConfig,
    datum: &BoundaryDatum,
    grid: QuadratureGrid,
) -> Result<f64> {
    let n = config.n();
    if n > 3 {
        return Err(Error::CostGuard { n, max: 3 });
    }
    let pts = config.points();
    let mut total = 0.0;
    for p in pts {
        total += self_energy_with_grid(*p, datum, n, grid)?;
    }
    for i in 0..n {
        for j in (i + 1)..n {
            // Each unordered pair contributes its full cross integral once:
            // expanding 1/2 |sum_i (grad phi_i + grad w_i)|^2 produces one
            // cross term per unordered pair.
            total += interaction_energy_with_grid(pts[i], pts[j], datum, n, grid)?;
        }
    }
    let oracle = total / (n * n) as f64;
    let spectral = renormalized_energy(config, datum)?.total;
    Ok((oracle - spectral).abs())
}
