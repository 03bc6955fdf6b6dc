//! The continuum side: limit measures on the closed disk, their logarithmic
//! potentials, the limit functional evaluated through its weak identity (and
//! through direct quadrature as an independent route), recovery sequences,
//! and the piecewise-constant approximation with boundary-cell mass transfer.
//!
//! Four measure classes are supported: a density on the boundary circle, a
//! piecewise-constant density on lattice cells compactly supported in the
//! disk, the uniform measure on a concentric circle, and the uniform measure
//! on a concentric disk. For each class the potential `phi(x) = int log|x-y|
//! dmu(y)`, its gradient, its boundary trace, and its exterior normal trace
//! are available in closed or spectrally exact form; grid potentials use the
//! exact antiderivative of the log kernel over rectangles, valid at any
//! evaluation point including inside a cell.

use crate::disk::{pairing, solve_neumann, Domain, FourierSeries, NeumannSolution, Point};
use crate::energy::PointConfig;
use crate::error::{Error, Result};
use crate::quad::{gauss_legendre, map_rule};
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

/// One open lattice square `(ix h, (ix+1) h) x (iy h, (iy+1) h)` carrying a
/// constant density `alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridCell {
    pub ix: i64,
    pub iy: i64,
    pub alpha: f64,
}

impl GridCell {
    fn rect(&self, h: f64) -> (f64, f64, f64, f64) {
        let x0 = self.ix as f64 * h;
        let y0 = self.iy as f64 * h;
        (x0, x0 + h, y0, y0 + h)
    }

    fn max_corner_radius(&self, h: f64) -> f64 {
        let (x0, x1, y0, y1) = self.rect(h);
        x0.abs().max(x1.abs()).hypot(y0.abs().max(y1.abs()))
    }
}

/// A probability measure on the closed unit disk in one of the supported
/// classes.
#[derive(Debug, Clone, PartialEq)]
pub enum LimitMeasure {
    /// `density dH^1` on the boundary circle; the density is a nonnegative
    /// series with mass `2 pi mean = 1`.
    Boundary { density: FourierSeries },
    /// Piecewise-constant density on lattice cells, compactly supported in
    /// the open disk (no massive cell touches the boundary circle).
    Grid { h: f64, cells: Vec<GridCell> },
    /// Uniform probability on the circle of radius `rho < 1`.
    Ring { rho: f64 },
    /// Uniform probability on the disk of radius `rho <= 1`.
    UniformDisk { rho: f64 },
}

const MASS_TOL: f64 = 1e-12;

impl LimitMeasure {
    pub fn boundary(density: FourierSeries) -> Result<Self> {
        let mass = density.circle_integral();
        if (mass - 1.0).abs() > MASS_TOL {
            return Err(Error::invalid(format!(
                "boundary density must have unit mass, got {mass}"
            )));
        }
        let floor = -1e-12 * (1.0 + density.sup_norm_bound());
        if density.min_on_samples(4096) < floor {
            return Err(Error::HypothesisViolation {
                detail: "boundary density is negative on part of the circle".into(),
            });
        }
        Ok(LimitMeasure::Boundary { density })
    }

    pub fn ring(rho: f64) -> Result<Self> {
        if !(rho.is_finite() && rho > 0.0 && rho < 1.0) {
            return Err(Error::invalid(format!(
                "ring radius must lie in (0,1), got {rho}"
            )));
        }
        Ok(LimitMeasure::Ring { rho })
    }

    pub fn uniform_disk(rho: f64) -> Result<Self> {
        if !(rho.is_finite() && rho > 0.0 && rho <= 1.0) {
            return Err(Error::invalid(format!(
                "disk radius must lie in (0,1], got {rho}"
            )));
        }
        Ok(LimitMeasure::UniformDisk { rho })
    }

    pub fn grid(h: f64, cells: Vec<GridCell>) -> Result<Self> {
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::invalid("cell size must be positive"));
        }
        let mut mass = 0.0;
        for c in &cells {
            if !c.alpha.is_finite() || c.alpha < 0.0 {
                return Err(Error::invalid("cell coefficients must be finite and >= 0"));
            }
            if c.alpha > 0.0 && c.max_corner_radius(h) >= 1.0 {
                return Err(Error::invalid(
                    "grid measures must vanish on cells meeting the boundary circle",
                ));
            }
            mass += c.alpha * h * h;
        }
        if (mass - 1.0).abs() > MASS_TOL {
            return Err(Error::invalid(format!(
                "grid measure must have unit mass, got {mass}"
            )));
        }
        Ok(LimitMeasure::Grid { h, cells })
    }

    /// Uniform probability on the lattice-aligned square `[-half, half]^2`
    /// split into `cells_per_side^2` cells; `cells_per_side` must be even so
    /// the corners sit on the lattice.
    pub fn uniform_square(half: f64, cells_per_side: usize) -> Result<Self> {
        if !(half.is_finite() && half > 0.0) || cells_per_side == 0 {
            return Err(Error::invalid(
                "square half-width and cell count must be positive",
            ));
        }
        if !cells_per_side.is_multiple_of(2) {
            return Err(Error::invalid(
                "cells_per_side must be even so the square is lattice-aligned",
            ));
        }
        if half * std::f64::consts::SQRT_2 >= 1.0 {
            return Err(Error::invalid(
                "the square must fit strictly inside the disk",
            ));
        }
        let h = 2.0 * half / cells_per_side as f64;
        let alpha = 1.0 / (4.0 * half * half);
        let m = (cells_per_side / 2) as i64;
        let mut cells = Vec::new();
        for iy in -m..m {
            for ix in -m..m {
                cells.push(GridCell { ix, iy, alpha });
            }
        }
        // Rescale so the mass is exactly 1 in floating point.
        let mass: f64 = cells.iter().map(|c| c.alpha * h * h).sum();
        for c in &mut cells {
            c.alpha /= mass;
        }
        LimitMeasure::grid(h, cells)
    }

    pub fn total_mass(&self) -> f64 {
        match self {
            LimitMeasure::Boundary { density } => density.circle_integral(),
            LimitMeasure::Grid { h, cells } => cells.iter().map(|c| c.alpha * h * h).sum(),
            LimitMeasure::Ring { .. } | LimitMeasure::UniformDisk { .. } => 1.0,
        }
    }
}

/// The limiting boundary measure `f / (2 pi) dH^1` for an admissible datum
/// (unit circle mean, nonnegative).
pub fn limiting_boundary_measure(f: &FourierSeries) -> Result<LimitMeasure> {
    if (f.mean() - 1.0).abs() > MASS_TOL {
        return Err(Error::invalid(format!(
            "datum must have circle mean 1, got {}",
            f.mean()
        )));
    }
    let floor = -1e-12 * (1.0 + f.sup_norm_bound());
    if f.min_on_samples(4096) < floor {
        return Err(Error::HypothesisViolation {
            detail: "datum is negative on part of the circle".into(),
        });
    }
    let mut density = f.scale(1.0 / (2.0 * PI));
    // Pin the mass to exactly 1 against rounding in the scale factor.
    let mass = density.circle_integral();
    density = density.scale(1.0 / mass);
    LimitMeasure::boundary(density)
}

/// Exact integral of `log|p - y|` over the rectangle `[x0,x1] x [y0,y1]`,
/// from the antiderivative with mixed second partial `log|(u,v)|`. Valid for
/// any `p`, including inside the rectangle (the antiderivative is continuous
/// across the axes).
fn rect_log_potential(p: Point, x0: f64, x1: f64, y0: f64, y1: f64) -> f64 {
    let a0 = p.x - x1;
    let a1 = p.x - x0;
    let b0 = p.y - y1;
    let b1 = p.y - y0;
    phi_anti(a1, b1) - phi_anti(a0, b1) - phi_anti(a1, b0) + phi_anti(a0, b0)
}

fn phi_anti(u: f64, v: f64) -> f64 {
    if u == 0.0 || v == 0.0 {
        return 0.0;
    }
    let r2 = u * u + v * v;
    0.5 * (u * v * r2.ln() - 3.0 * u * v + u * u * (v / u).atan() + v * v * (u / v).atan())
}

/// Gradient in `p` of [`rect_log_potential`].
fn rect_log_gradient(p: Point, x0: f64, x1: f64, y0: f64, y1: f64) -> Point {
    let a0 = p.x - x1;
    let a1 = p.x - x0;
    let b0 = p.y - y1;
    let b1 = p.y - y0;
    let gx = dphi_du(a1, b1) - dphi_du(a0, b1) - dphi_du(a1, b0) + dphi_du(a0, b0);
    let gy = dphi_du(b1, a1) - dphi_du(b1, a0) - dphi_du(b0, a1) + dphi_du(b0, a0);
    Point::new(gx, gy)
}

fn dphi_du(u: f64, v: f64) -> f64 {
    if v == 0.0 {
        return 0.0;
    }
    let r2 = u * u + v * v;
    let tu = if u == 0.0 { 0.0 } else { u * (v / u).atan() };
    0.5 * (v * r2.ln() - 2.0 * v + 2.0 * tu)
}

/// The logarithmic potential of a limit measure: evaluation of `phi` and
/// `grad phi` anywhere in the box, plus the boundary trace of `phi` and the
/// exterior trace of its normal derivative.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialField {
    measure: LimitMeasure,
    trace: FourierSeries,
    normal_trace_exterior: FourierSeries,
}

/// Project equispaced circle samples onto a series of the given order.
fn project_samples(values: &[f64], order: usize) -> FourierSeries {
    let m = values.len();
    let mean = values.iter().sum::<f64>() / m as f64;
    let mut cos = Vec::with_capacity(order);
    let mut sin = Vec::with_capacity(order);
    for k in 1..=order {
        let mut c = 0.0;
        let mut s = 0.0;
        for (j, v) in values.iter().enumerate() {
            let t = 2.0 * PI * (j as f64) * (k as f64) / m as f64;
            c += v * t.cos();
            s += v * t.sin();
        }
        cos.push(2.0 * c / m as f64);
        sin.push(2.0 * s / m as f64);
    }
    FourierSeries::new(mean, cos, sin).expect("finite samples")
}

fn grid_value(h: f64, cells: &[GridCell], p: Point) -> f64 {
    let mut acc = 0.0;
    for c in cells {
        if c.alpha == 0.0 {
            continue;
        }
        let (x0, x1, y0, y1) = c.rect(h);
        acc += c.alpha * rect_log_potential(p, x0, x1, y0, y1);
    }
    acc
}

fn grid_gradient(h: f64, cells: &[GridCell], p: Point) -> Point {
    let mut gx = 0.0;
    let mut gy = 0.0;
    for c in cells {
        if c.alpha == 0.0 {
            continue;
        }
        let (x0, x1, y0, y1) = c.rect(h);
        let g = rect_log_gradient(p, x0, x1, y0, y1);
        gx += c.alpha * g.x;
        gy += c.alpha * g.y;
    }
    Point::new(gx, gy)
}

/// Build the potential field of a measure.
pub fn newtonian_potential(mu: &LimitMeasure) -> PotentialField {
    match mu {
        LimitMeasure::Boundary { density } => {
            let k = density.order();
            let trace = FourierSeries::new(
                0.0,
                (1..=k)
                    .map(|i| -PI * density.cos_coeff(i) / i as f64)
                    .collect(),
                (1..=k)
                    .map(|i| -PI * density.sin_coeff(i) / i as f64)
                    .collect(),
            )
            .unwrap();
            let nte = FourierSeries::new(
                // Exterior radial derivative of mass log r at r = 1.
                density.circle_integral(),
                (1..=k).map(|i| PI * density.cos_coeff(i)).collect(),
                (1..=k).map(|i| PI * density.sin_coeff(i)).collect(),
            )
            .unwrap();
            PotentialField {
                measure: mu.clone(),
                trace,
                normal_trace_exterior: nte,
            }
        }
        LimitMeasure::Ring { .. } | LimitMeasure::UniformDisk { .. } => PotentialField {
            measure: mu.clone(),
            trace: FourierSeries::zero(),
            normal_trace_exterior: FourierSeries::constant(1.0),
        },
        LimitMeasure::Grid { h, cells } => {
            let support_radius = cells
                .iter()
                .filter(|c| c.alpha > 0.0)
                .map(|c| c.max_corner_radius(*h))
                .fold(0.0, f64::max);
            let order = crate::disk::adaptive_order(support_radius).clamp(8, 512);
            let m = (4 * order).max(1024);
            let mut vals = Vec::with_capacity(m);
            let mut ders = Vec::with_capacity(m);
            for j in 0..m {
                let t = 2.0 * PI * j as f64 / m as f64;
                let p = Point::new(t.cos(), t.sin());
                vals.push(grid_value(*h, cells, p));
                let g = grid_gradient(*h, cells, p);
                ders.push(g.x * p.x + g.y * p.y);
            }
            PotentialField {
                measure: mu.clone(),
                trace: project_samples(&vals, order),
                normal_trace_exterior: project_samples(&ders, order),
            }
        }
    }
}

impl PotentialField {
    pub fn measure(&self) -> &LimitMeasure {
        &self.measure
    }

    /// Boundary trace of the potential (zero circle mean for any unit-mass
    /// measure on the closed disk).
    pub fn trace(&self) -> &FourierSeries {
        &self.trace
    }

    /// Exterior normal trace on the boundary circle; its mean is 1 for a
    /// unit-mass measure (total flux `2 pi`).
    pub fn normal_trace_exterior(&self) -> &FourierSeries {
        &self.normal_trace_exterior
    }

    pub fn value(&self, p: Point) -> f64 {
        let r = p.norm();
        match &self.measure {
            LimitMeasure::Ring { rho } => r.max(*rho).ln(),
            LimitMeasure::UniformDisk { rho } => {
                if r <= *rho {
                    rho.ln() + (r * r - rho * rho) / (2.0 * rho * rho)
                } else {
                    r.ln()
                }
            }
            LimitMeasure::Grid { h, cells } => grid_value(*h, cells, p),
            LimitMeasure::Boundary { .. } => {
                let z = p.as_complex();
                if r <= 1.0 {
                    // Re sum_k gamma_k z^k with gamma_k from the trace.
                    let mut acc = Complex64::new(0.0, 0.0);
                    for k in (1..=self.trace.order()).rev() {
                        acc = acc * z
                            + Complex64::new(self.trace.cos_coeff(k), -self.trace.sin_coeff(k));
                    }
                    (acc * z).re
                } else {
                    // log|z| + Re sum_k eta_k z^{-k}.
                    let zi = Complex64::new(1.0, 0.0) / z;
                    let mut acc = Complex64::new(0.0, 0.0);
                    for k in (1..=self.trace.order()).rev() {
                        acc = acc * zi
                            + Complex64::new(self.trace.cos_coeff(k), self.trace.sin_coeff(k));
                    }
                    r.ln() + (acc * zi).re
                }
            }
        }
    }

    pub fn gradient(&self, p: Point) -> Point {
        let r = p.norm();
        match &self.measure {
            LimitMeasure::Ring { rho } => {
                if r <= *rho {
                    Point::new(0.0, 0.0)
                } else {
                    Point::new(p.x / (r * r), p.y / (r * r))
                }
            }
            LimitMeasure::UniformDisk { rho } => {
                if r <= *rho {
                    Point::new(p.x / (rho * rho), p.y / (rho * rho))
                } else {
                    Point::new(p.x / (r * r), p.y / (r * r))
                }
            }
            LimitMeasure::Grid { h, cells } => grid_gradient(*h, cells, p),
            LimitMeasure::Boundary { .. } => {
                let z = p.as_complex();
                if r <= 1.0 {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for k in (1..=self.trace.order()).rev() {
                        let kf = k as f64;
                        acc = acc * z
                            + Complex64::new(
                                kf * self.trace.cos_coeff(k),
                                -kf * self.trace.sin_coeff(k),
                            );
                    }
                    Point::new(acc.re, -acc.im)
                } else {
                    // h'(z) = 1/z - sum_k k eta_k z^{-k-1}.
                    let zi = Complex64::new(1.0, 0.0) / z;
                    let mut acc = Complex64::new(0.0, 0.0);
                    for k in (1..=self.trace.order()).rev() {
                        let kf = k as f64;
                        acc = acc * zi
                            + Complex64::new(
                                -kf * self.trace.cos_coeff(k),
                                -kf * self.trace.sin_coeff(k),
                            );
                    }
                    let hp = zi + acc * zi * zi;
                    Point::new(hp.re, -hp.im)
                }
            }
        }
    }
}

/// The pieces of `U = phi + w` shared by both evaluation routes of the limit
/// functional. `shift` is the boundary mean removed so that `U` integrates to
/// zero over the circle.
struct LimitSolution {
    pot: PotentialField,
    w: NeumannSolution,
    u_trace: FourierSeries,
    shift: f64,
}

fn limit_solution(mu: &LimitMeasure, f: &FourierSeries) -> Result<LimitSolution> {
    if (f.mean() - 1.0).abs() > 1e-9 {
        return Err(Error::IncompatibleDatum {
            mean: f.mean(),
            tol: 1e-9,
        });
    }
    let pot = newtonian_potential(mu);
    let g = f.sub(pot.normal_trace_exterior());
    let w = solve_neumann(&g)?;
    let raw = pot.trace().add(w.trace());
    let shift = raw.mean();
    let u_trace = raw.sub(&FourierSeries::constant(shift));
    Ok(LimitSolution {
        pot,
        w,
        u_trace,
        shift,
    })
}

impl LimitSolution {
    /// `int U dmu` against the solution's own measure.
    fn mean_against_measure(&self) -> f64 {
        match self.pot.measure() {
            LimitMeasure::Boundary { density } => pairing(&self.u_trace, density),
            LimitMeasure::Ring { rho } => {
                // The potential on its own circle is log rho; the circle
                // average of the zero-mean harmonic correction vanishes.
                rho.ln() - self.shift
            }
            LimitMeasure::UniformDisk { rho } => {
                // Disk average of the potential is log rho - 1/4; the disk
                // average of the correction is its center value, zero.
                rho.ln() - 0.25 - self.shift
            }
            LimitMeasure::Grid { h, cells } => {
                let rule = gauss_legendre(12);
                let mut acc = 0.0;
                for c in cells {
                    if c.alpha == 0.0 {
                        continue;
                    }
                    let (x0, x1, y0, y1) = c.rect(*h);
                    let mut cell_acc = 0.0;
                    for (x, wx) in map_rule(&rule, x0, x1) {
                        for (y, wy) in map_rule(&rule, y0, y1) {
                            let p = Point::new(x, y);
                            cell_acc +=
                                wx * wy * (grid_value(*h, cells, p) + self.w.value_at(p));
                        }
                    }
                    acc += c.alpha * (cell_acc - self.shift * (x1 - x0) * (y1 - y0));
                }
                acc
            }
        }
    }
}

/// The limit functional `1/2 int |grad U|^2` evaluated through the weak
/// identity `int |grad U|^2 = <f, U> - 2 pi int U dmu`, with `U` normalized
/// to zero boundary mean. Exact up to roundoff for the spectral classes.
pub fn limit_energy(mu: &LimitMeasure, f: &FourierSeries) -> Result<f64> {
    let sol = limit_solution(mu, f)?;
    let f_pair = pairing(f, &sol.u_trace);
    let mu_mean = sol.mean_against_measure();
    let e = 0.5 * (f_pair - 2.0 * PI * mu_mean);
    // Clamp pure roundoff below zero; the functional is a squared norm.
    if e < 0.0 && e > -1e-9 {
        Ok(0.0)
    } else {
        Ok(e)
    }
}

/// Independent evaluation of the limit functional by direct polar quadrature
/// of `1/2 int_disk |grad phi + grad w|^2`.
pub fn limit_energy_quadrature(mu: &LimitMeasure, f: &FourierSeries) -> Result<f64> {
    let sol = limit_solution(mu, f)?;
    // Radial panels split where the field has kinks.
    let mut edges = vec![0.0, 1.0];
    match mu {
        LimitMeasure::Ring { rho } => edges.push(*rho),
        LimitMeasure::UniformDisk { rho } if *rho < 1.0 => edges.push(*rho),
        _ => {}
    }
    edges.sort_by(f64::total_cmp);
    edges.dedup_by(|a, b| (*a - *b).abs() < 1e-13);

    let angular = 1024usize;
    let rule = gauss_legendre(256);
    let total: f64 = (0..angular)
        .into_par_iter()
        .map(|j| {
            let t = 2.0 * PI * (j as f64 + 0.5) / angular as f64;
            let u = Point::new(t.cos(), t.sin());
            let mut acc = 0.0;
            for win in edges.windows(2) {
                for (r, wr) in map_rule(&rule, win[0], win[1]) {
                    let p = Point::new(r * u.x, r * u.y);
                    let gp = sol.pot.gradient(p);
                    let gw = sol.w.gradient_at(p);
                    let (gx, gy) = (gp.x + gw.x, gp.y + gw.y);
                    acc += wr * r * (gx * gx + gy * gy);
                }
            }
            acc
        })
        .collect::<Vec<f64>>()
        .iter()
        .sum();
    Ok(0.5 * total * (2.0 * PI / angular as f64))
}

/// Deterministic discrete configuration approximating a compactly supported
/// grid measure: `floor(n alpha_j |cell_j|)` points per cell, remainders by
/// largest fractional part, placed on a centered square sublattice with
/// margin `h / (4 sqrt(count))` from the cell edges.
pub fn recovery_sequence(mu: &LimitMeasure, n: usize) -> Result<PointConfig> {
    let (h, cells) = match mu {
        LimitMeasure::Grid { h, cells } => (*h, cells),
        _ => {
            return Err(Error::invalid(
                "recovery sequences need a compactly supported grid measure",
            ))
        }
    };
    let mut active: Vec<&GridCell> = cells.iter().filter(|c| c.alpha > 0.0).collect();
    active.sort_by_key(|c| (c.iy, c.ix));
    if n < active.len() {
        return Err(Error::InfeasibleN {
            detail: format!("n = {n} is below the {} cells carrying mass", active.len()),
        });
    }
    let weights: Vec<f64> = active.iter().map(|c| n as f64 * c.alpha * h * h).collect();
    let mut counts: Vec<usize> = weights.iter().map(|w| w.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    // Distribute the remaining points by largest fractional part (ties by
    // cell order); guard against rounding drift in either direction.
    let frac_order = |descending: bool| -> Vec<usize> {
        let mut order: Vec<usize> = (0..active.len()).collect();
        order.sort_by(|&a, &b| {
            let fa = weights[a] - weights[a].floor();
            let fb = weights[b] - weights[b].floor();
            let cmp = if descending {
                fb.total_cmp(&fa)
            } else {
                fa.total_cmp(&fb)
            };
            cmp.then(a.cmp(&b))
        });
        order
    };
    if assigned < n {
        let order = frac_order(true);
        for i in 0..(n - assigned) {
            counts[order[i % order.len()]] += 1;
        }
    } else if assigned > n {
        let order = frac_order(false);
        let mut extra = assigned - n;
        let mut i = 0;
        while extra > 0 {
            let idx = order[i % order.len()];
            if counts[idx] > 0 {
                counts[idx] -= 1;
                extra -= 1;
            }
            i += 1;
        }
    }

    let mut points = Vec::with_capacity(n);
    for (cell, &count) in active.iter().zip(&counts) {
        if count == 0 {
            continue;
        }
        let (x0, x1, y0, y1) = cell.rect(h);
        let q = (count as f64).sqrt().ceil() as usize;
        let margin = h / (4.0 * (count as f64).sqrt());
        let line = |lo: f64, hi: f64, i: usize| -> f64 {
            if q == 1 {
                0.5 * (lo + hi)
            } else {
                lo + (hi - lo) * i as f64 / (q - 1) as f64
            }
        };
        let mut placed = 0;
        'cell: for jy in 0..q {
            for jx in 0..q {
                if placed == count {
                    break 'cell;
                }
                points.push(Point::new(
                    line(x0 + margin, x1 - margin, jx),
                    line(y0 + margin, y1 - margin, jy),
                ));
                placed += 1;
            }
        }
    }
    PointConfig::new(points)
}

/// Candidate lattice cells whose closure meets the open unit disk, with an
/// interior flag (true when the closure also avoids the boundary circle),
/// sorted in row-major order.
fn lattice_cells(h: f64) -> Vec<(i64, i64, bool)> {
    let lo = (-1.0 / h).floor() as i64 - 1;
    let hi = (1.0 / h).ceil() as i64 + 1;
    let mut out = Vec::new();
    for iy in lo..=hi {
        for ix in lo..=hi {
            let x0 = ix as f64 * h;
            let y0 = iy as f64 * h;
            let (x1, y1) = (x0 + h, y0 + h);
            // Nearest and farthest points of the closed square to the origin.
            let min_d = 0.0f64.clamp(x0, x1).hypot(0.0f64.clamp(y0, y1));
            let max_d = x0.abs().max(x1.abs()).hypot(y0.abs().max(y1.abs()));
            if min_d < 1.0 {
                out.push((ix, iy, max_d < 1.0));
            }
        }
    }
    out.sort_by_key(|&(ix, iy, _)| (iy, ix));
    out
}

fn normalize_angle(t: f64) -> f64 {
    let mut t = t % (2.0 * PI);
    if t < 0.0 {
        t += 2.0 * PI;
    }
    t
}

/// Crossing angles of the circle of radius `rho` with the lattice lines:
/// panel boundaries for exact arc-mass bookkeeping.
fn circle_lattice_angles(rho: f64, h: f64) -> Vec<f64> {
    let mut angles = vec![0.0];
    let kmax = (rho / h).floor() as i64 + 1;
    for k in -kmax..=kmax {
        let c = k as f64 * h / rho;
        if c.abs() <= 1.0 {
            let a = c.acos();
            angles.push(normalize_angle(a));
            angles.push(normalize_angle(2.0 * PI - a));
            let b = c.asin();
            angles.push(normalize_angle(b));
            angles.push(normalize_angle(PI - b));
        }
    }
    angles.sort_by(f64::total_cmp);
    angles.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    angles
}

/// Mass of `mu` carried by each candidate cell.
fn cell_masses(mu: &LimitMeasure, h: f64, cells: &[(i64, i64, bool)]) -> Vec<f64> {
    use std::collections::HashMap;
    let index: HashMap<(i64, i64), usize> = cells
        .iter()
        .enumerate()
        .map(|(j, &(ix, iy, _))| ((ix, iy), j))
        .collect();
    let index_of = |x: f64, y: f64| -> Option<usize> {
        let ix = (x / h).floor() as i64;
        let iy = (y / h).floor() as i64;
        index.get(&(ix, iy)).copied()
    };
    let mut masses = vec![0.0; cells.len()];
    match mu {
        LimitMeasure::Boundary { density } => {
            let angles = circle_lattice_angles(1.0, h);
            for (i, &t0) in angles.iter().enumerate() {
                let t1 = if i + 1 < angles.len() {
                    angles[i + 1]
                } else {
                    angles[0] + 2.0 * PI
                };
                if t1 - t0 < 1e-15 {
                    continue;
                }
                let mass = density.antiderivative(t1) - density.antiderivative(t0);
                let tm = 0.5 * (t0 + t1);
                if let Some(j) = index_of(tm.cos(), tm.sin()) {
                    masses[j] += mass;
                }
            }
        }
        LimitMeasure::Ring { rho } => {
            let angles = circle_lattice_angles(*rho, h);
            for (i, &t0) in angles.iter().enumerate() {
                let t1 = if i + 1 < angles.len() {
                    angles[i + 1]
                } else {
                    angles[0] + 2.0 * PI
                };
                if t1 - t0 < 1e-15 {
                    continue;
                }
                let tm = 0.5 * (t0 + t1);
                if let Some(j) = index_of(rho * tm.cos(), rho * tm.sin()) {
                    masses[j] += (t1 - t0) / (2.0 * PI);
                }
            }
        }
        LimitMeasure::UniformDisk { rho } => {
            let density = 1.0 / (PI * rho * rho);
            for (j, &(ix, iy, _)) in cells.iter().enumerate() {
                let x0 = ix as f64 * h;
                let y0 = iy as f64 * h;
                masses[j] = density * square_disk_area(x0, x0 + h, y0, y0 + h, *rho);
            }
        }
        LimitMeasure::Grid { h: hs, cells: src } => {
            for c in src {
                if c.alpha == 0.0 {
                    continue;
                }
                let (sx0, sx1, sy0, sy1) = c.rect(*hs);
                for (j, &(ix, iy, _)) in cells.iter().enumerate() {
                    let tx0 = ix as f64 * h;
                    let ty0 = iy as f64 * h;
                    let ox = (sx1.min(tx0 + h) - sx0.max(tx0)).max(0.0);
                    let oy = (sy1.min(ty0 + h) - sy0.max(ty0)).max(0.0);
                    masses[j] += c.alpha * ox * oy;
                }
            }
        }
    }
    masses
}

/// Exact area of the intersection of a rectangle with the disk of radius
/// `rho` about the origin, by panelwise antiderivatives of the chord length.
fn square_disk_area(x0: f64, x1: f64, y0: f64, y1: f64, rho: f64) -> f64 {
    let lo = x0.max(-rho);
    let hi = x1.min(rho);
    if hi <= lo {
        return 0.0;
    }
    // Antiderivative of sqrt(rho^2 - x^2).
    let anti = |x: f64| -> f64 {
        let c = (x / rho).clamp(-1.0, 1.0);
        0.5 * (x * (rho * rho - x * x).max(0.0).sqrt() + rho * rho * c.asin())
    };
    let mut cuts = vec![lo, hi];
    for y in [y0, y1] {
        if y.abs() < rho {
            let x = (rho * rho - y * y).sqrt();
            for c in [x, -x] {
                if c > lo && c < hi {
                    cuts.push(c);
                }
            }
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    let mut area = 0.0;
    for win in cuts.windows(2) {
        let (a, b) = (win[0], win[1]);
        if b <= a {
            continue;
        }
        let xm = 0.5 * (a + b);
        let g = (rho * rho - xm * xm).max(0.0).sqrt();
        let top_is_chord = g < y1;
        let bot_is_chord = -g > y0;
        if y1.min(g) <= y0.max(-g) {
            continue;
        }
        area += if top_is_chord {
            anti(b) - anti(a)
        } else {
            y1 * (b - a)
        };
        area -= if bot_is_chord {
            -(anti(b) - anti(a))
        } else {
            y0 * (b - a)
        };
    }
    area
}

/// Piecewise-constant approximation on the lattice of size `h`: interior
/// cells keep their averaged mass, and the mass of every cell meeting the
/// boundary is transferred to the nearest interior cell (ties broken by the
/// lowest cell in row-major order). Mass is preserved exactly and the result
/// is compactly supported.
pub fn piecewise_constant_approx(mu: &LimitMeasure, h: f64) -> Result<LimitMeasure> {
    if !(h.is_finite() && h > 0.0 && h < 2.0) {
        return Err(Error::invalid(format!(
            "cell size must lie in (0, 2), got {h}"
        )));
    }
    let cells = lattice_cells(h);
    let interior: Vec<usize> = (0..cells.len()).filter(|&j| cells[j].2).collect();
    if interior.is_empty() {
        return Err(Error::InfeasibleN {
            detail: format!("no interior cell exists at cell size {h}"),
        });
    }
    let masses = cell_masses(mu, h, &cells);
    let mut alloc = vec![0.0; cells.len()];
    for (j, &(ix, iy, is_interior)) in cells.iter().enumerate() {
        if masses[j] == 0.0 {
            continue;
        }
        if is_interior {
            alloc[j] += masses[j];
        } else {
            // Nearest interior cell, center to center; the scan order is
            // row-major, so the first minimum wins ties.
            let c = Point::new((ix as f64 + 0.5) * h, (iy as f64 + 0.5) * h);
            let mut best = interior[0];
            let mut best_d = f64::INFINITY;
            for &k in &interior {
                let (kx, ky, _) = cells[k];
                let ck = Point::new((kx as f64 + 0.5) * h, (ky as f64 + 0.5) * h);
                let d = c.dist(ck);
                if d < best_d {
                    best_d = d;
                    best = k;
                }
            }
            alloc[best] += masses[j];
        }
    }
    let out: Vec<GridCell> = cells
        .iter()
        .zip(&alloc)
        .filter(|&(_, &a)| a > 0.0)
        .map(|(&(ix, iy, _), &a)| GridCell {
            ix,
            iy,
            alpha: a / (h * h),
        })
        .collect();
    LimitMeasure::grid(h, out)
}

/// `L^2` norm over the box of the difference of the potential gradients of
/// two measures, the quadratic form realizing their `H^{-1}` distance.
pub fn hminus1_distance(mu1: &LimitMeasure, mu2: &LimitMeasure) -> f64 {
    let p1 = newtonian_potential(mu1);
    let p2 = newtonian_potential(mu2);
    let box_radius = Domain::default().box_radius();
    let mut edges = vec![0.0, 1.0, box_radius];
    for mu in [mu1, mu2] {
        match mu {
            LimitMeasure::Ring { rho } | LimitMeasure::UniformDisk { rho } => edges.push(*rho),
            _ => {}
        }
    }
    edges.sort_by(f64::total_cmp);
    edges.dedup_by(|a, b| (*a - *b).abs() < 1e-13);

    let angular = 768usize;
    let rule = gauss_legendre(96);
    let total: f64 = (0..angular)
        .into_par_iter()
        .map(|j| {
            let t = 2.0 * PI * (j as f64 + 0.5) / angular as f64;
            let u = Point::new(t.cos(), t.sin());
            let mut acc = 0.0;
            for win in edges.windows(2) {
                for (r, wr) in map_rule(&rule, win[0], win[1]) {
                    let p = Point::new(r * u.x, r * u.y);
                    let g1 = p1.gradient(p);
                    let g2 = p2.gradient(p);
                    let (dx, dy) = (g1.x - g2.x, g1.y - g2.y);
                    acc += wr * r * (dx * dx + dy * dy);
                }
            }
            acc
        })
        .collect::<Vec<f64>>()
        .iter()
        .sum();
    (total * (2.0 * PI / angular as f64)).max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform_boundary() -> LimitMeasure {
        limiting_boundary_measure(&FourierSeries::constant(1.0)).unwrap()
    }

    #[test]
    fn limiting_measure_examples() {
        let mu = uniform_boundary();
        assert!((mu.total_mass() - 1.0).abs() < 1e-14);
        if let LimitMeasure::Boundary { density } = &mu {
            assert!((density.mean() - 1.0 / (2.0 * PI)).abs() < 1e-15);
        } else {
            panic!("expected a boundary measure");
        }

        let f = FourierSeries::new(1.0, vec![0.5], vec![]).unwrap();
        let mu = limiting_boundary_measure(&f).unwrap();
        if let LimitMeasure::Boundary { density } = &mu {
            assert!((density.cos_coeff(1) - 0.5 / (2.0 * PI)).abs() < 1e-15);
        } else {
            panic!();
        }

        let bad = FourierSeries::new(1.0, vec![-2.0], vec![]).unwrap();
        assert!(matches!(
            limiting_boundary_measure(&bad),
            Err(Error::HypothesisViolation { .. })
        ));
    }

    #[test]
    fn ring_potential_closed_form() {
        let pot = newtonian_potential(&LimitMeasure::ring(0.5).unwrap());
        assert!((pot.value(Point::new(0.0, 0.0)) - 0.5f64.ln()).abs() < 1e-15);
        assert!((pot.value(Point::new(0.8, 0.0)) - 0.8f64.ln()).abs() < 1e-15);
        // Weak Laplacian: flux through concentric circles.
        let flux = |r: f64| -> f64 {
            let m = 2048;
            (0..m)
                .map(|j| {
                    let t = 2.0 * PI * j as f64 / m as f64;
                    let p = Point::new(r * t.cos(), r * t.sin());
                    let g = pot.gradient(p);
                    (g.x * t.cos() + g.y * t.sin()) * r
                })
                .sum::<f64>()
                * (2.0 * PI / m as f64)
        };
        assert!(flux(0.3).abs() < 1e-12);
        assert!((flux(0.7) - 2.0 * PI).abs() < 1e-10);
    }

    #[test]
    fn uniform_boundary_potential_vanishes_inside() {
        let pot = newtonian_potential(&uniform_boundary());
        for &(x, y) in &[(0.0, 0.0), (0.5, 0.2), (-0.9, 0.1)] {
            assert!(pot.value(Point::new(x, y)).abs() < 1e-14);
        }
        assert!((pot.normal_trace_exterior().mean() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn boundary_potential_trace_coefficients() {
        let f = FourierSeries::new(1.0, vec![0.5], vec![0.0]).unwrap();
        let mu = limiting_boundary_measure(&f).unwrap();
        let pot = newtonian_potential(&mu);
        // density c_1 = 0.5/(2 pi); trace c_1 = -pi c_1 / 1 = -0.25.
        assert!((pot.trace().cos_coeff(1) + 0.25).abs() < 1e-14);
        assert!((pot.normal_trace_exterior().cos_coeff(1) - 0.25).abs() < 1e-14);
        // Interior value matches the harmonic extension at a sample point.
        let p = Point::new(0.6, 0.2);
        let direct = -0.25 * p.norm() * p.angle().cos();
        assert!((pot.value(p) - direct).abs() < 1e-13);
        // Exterior value and gradient agree with finite differences.
        let q = Point::new(1.4, -0.3);
        let h = 1e-6;
        let gx = (pot.value(Point::new(q.x + h, q.y)) - pot.value(Point::new(q.x - h, q.y)))
            / (2.0 * h);
        let gy = (pot.value(Point::new(q.x, q.y + h)) - pot.value(Point::new(q.x, q.y - h)))
            / (2.0 * h);
        let g = pot.gradient(q);
        assert!((g.x - gx).abs() < 1e-8 && (g.y - gy).abs() < 1e-8);
    }

    #[test]
    fn grid_far_field_is_a_point_mass() {
        let h = 0.1;
        let cell = GridCell {
            ix: 0,
            iy: 0,
            alpha: 1.0 / (h * h),
        };
        let mu = LimitMeasure::grid(h, vec![cell]).unwrap();
        let pot = newtonian_potential(&mu);
        let center = Point::new(0.05, 0.05);
        for &(x, y) in &[(0.8, 0.0), (-0.5, 0.6), (0.0, -0.9)] {
            let p = Point::new(x, y);
            let dist = p.dist(center);
            let got = pot.value(p);
            assert!(
                (got - dist.ln()).abs() < (h * h) / (dist * dist),
                "{got} vs {}",
                dist.ln()
            );
        }
        assert!((pot.normal_trace_exterior().mean() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn grid_potential_flux_recovers_mass() {
        // Weak Laplacian check for the exact rectangle potential.
        let mu = LimitMeasure::uniform_square(0.3, 4).unwrap();
        let pot = newtonian_potential(&mu);
        let flux = |r: f64| -> f64 {
            let m = 4096;
            (0..m)
                .map(|j| {
                    let t = 2.0 * PI * j as f64 / m as f64;
                    let p = Point::new(r * t.cos(), r * t.sin());
                    let g = pot.gradient(p);
                    (g.x * t.cos() + g.y * t.sin()) * r
                })
                .sum::<f64>()
                * (2.0 * PI / m as f64)
        };
        assert!((flux(0.9) - 2.0 * PI).abs() < 1e-10);
        assert!((flux(1.5) - 2.0 * PI).abs() < 1e-10);
        // A circle through the support captures part of the mass only.
        let partial = flux(0.3);
        assert!(partial > 0.1 && partial < 2.0 * PI - 0.1);
    }

    #[test]
    fn zero_energy_on_the_limiting_measure() {
        for f in [
            FourierSeries::constant(1.0),
            FourierSeries::new(1.0, vec![0.5], vec![]).unwrap(),
            FourierSeries::new(1.0, vec![0.0], vec![0.0, 0.3]).unwrap(),
        ] {
            let mu = limiting_boundary_measure(&f).unwrap();
            let e = limit_energy(&mu, &f).unwrap();
            assert!(e.abs() <= 1e-10, "{e}");
        }
    }

    #[test]
    fn ring_and_disk_energies() {
        let f = FourierSeries::constant(1.0);
        for &rho in &[0.3, 0.5, 0.8] {
            let e = limit_energy(&LimitMeasure::ring(rho).unwrap(), &f).unwrap();
            assert!((e - (-PI * rho.ln())).abs() < 1e-12, "rho={rho}: {e}");
        }
        let e = limit_energy(&LimitMeasure::uniform_disk(1.0).unwrap(), &f).unwrap();
        assert!((e - PI / 4.0).abs() < 1e-12, "{e}");
        let eq = limit_energy_quadrature(&LimitMeasure::uniform_disk(1.0).unwrap(), &f).unwrap();
        assert!((eq - PI / 4.0).abs() < 1e-8, "{eq}");
    }

    #[test]
    fn weak_identity_matches_direct_quadrature() {
        let f = FourierSeries::new(1.0, vec![0.5, 0.1], vec![0.2]).unwrap();
        let cases = [
            uniform_boundary(),
            limiting_boundary_measure(&FourierSeries::new(1.0, vec![0.3], vec![]).unwrap())
                .unwrap(),
            LimitMeasure::ring(0.5).unwrap(),
            LimitMeasure::ring(0.85).unwrap(),
        ];
        for mu in cases {
            let weak = limit_energy(&mu, &f).unwrap();
            let direct = limit_energy_quadrature(&mu, &f).unwrap();
            assert!(
                (weak - direct).abs() < 1e-8,
                "weak {weak} vs direct {direct}"
            );
            assert!(weak >= 0.0);
        }
    }

    #[test]
    fn weak_identity_is_constant_shift_invariant() {
        // Recompute the weak identity with an artificial constant added to U:
        // both pairings carry total mass 2 pi, so the value must not change.
        let f = FourierSeries::new(1.0, vec![0.4], vec![]).unwrap();
        let mu = LimitMeasure::ring(0.6).unwrap();
        let e = limit_energy(&mu, &f).unwrap();
        let sol = super::limit_solution(&mu, &f).unwrap();
        let c = 3.7;
        let shifted_trace = sol.u_trace.add(&FourierSeries::constant(c));
        let f_pair = pairing(&f, &shifted_trace);
        let mu_mean = sol.mean_against_measure() + c;
        let e_shifted = 0.5 * (f_pair - 2.0 * PI * mu_mean);
        assert!((e - e_shifted).abs() < 1e-12, "{e} vs {e_shifted}");
    }

    #[test]
    fn recovery_counts_are_exact() {
        let mu = LimitMeasure::uniform_square(0.3, 4).unwrap();
        for &n in &[16usize, 17, 64, 200] {
            let config = recovery_sequence(&mu, n).unwrap();
            assert_eq!(config.n(), n);
            assert!(config.min_separation() > 0.0);
            assert!(config.max_radius() < 1.0);
        }
        // Per-cell counts differ from the ideal weights by less than 1.
        let n = 37;
        let config = recovery_sequence(&mu, n).unwrap();
        if let LimitMeasure::Grid { h, cells } = &mu {
            for c in cells {
                let (x0, x1, y0, y1) = c.rect(*h);
                let count = config
                    .points()
                    .iter()
                    .filter(|p| p.x > x0 && p.x < x1 && p.y > y0 && p.y < y1)
                    .count();
                let ideal = n as f64 * c.alpha * h * h;
                assert!(
                    (count as f64 - ideal).abs() < 1.0,
                    "count {count} vs ideal {ideal}"
                );
            }
        }
        assert!(matches!(
            recovery_sequence(&mu, 15),
            Err(Error::InfeasibleN { .. })
        ));
        // n equal to the cell count is feasible.
        assert_eq!(recovery_sequence(&mu, 16).unwrap().n(), 16);
    }

    #[test]
    fn single_cell_recovery_example() {
        let h = 0.2;
        let cell = GridCell {
            ix: 0,
            iy: 0,
            alpha: 1.0 / (h * h),
        };
        let mu = LimitMeasure::grid(h, vec![cell]).unwrap();
        let config = recovery_sequence(&mu, 4).unwrap();
        assert_eq!(config.n(), 4);
        for p in config.points() {
            assert!(p.x > 0.0 && p.x < h && p.y > 0.0 && p.y < h);
        }
    }

    #[test]
    fn piecewise_approx_is_a_fixed_point_on_the_same_lattice() {
        let mu = LimitMeasure::uniform_square(0.25, 2).unwrap();
        let again = piecewise_constant_approx(&mu, 0.25).unwrap();
        assert_eq!(mu, again);
    }

    #[test]
    fn piecewise_approx_preserves_mass_and_support() {
        for h in [0.2, 0.35] {
            for mu in [
                uniform_boundary(),
                LimitMeasure::ring(0.9).unwrap(),
                LimitMeasure::uniform_disk(1.0).unwrap(),
            ] {
                let approx = piecewise_constant_approx(&mu, h).unwrap();
                assert!(
                    (approx.total_mass() - 1.0).abs() < 1e-12,
                    "h={h}: mass {}",
                    approx.total_mass()
                );
                if let LimitMeasure::Grid { h: hh, cells } = &approx {
                    for c in cells {
                        assert!(c.max_corner_radius(*hh) < 1.0);
                    }
                }
            }
        }
        assert!(matches!(
            piecewise_constant_approx(&uniform_boundary(), 1.5),
            Err(Error::InfeasibleN { .. })
        ));
    }

    #[test]
    fn square_disk_area_cases() {
        assert!((square_disk_area(-0.1, 0.1, -0.1, 0.1, 1.0) - 0.04).abs() < 1e-14);
        assert_eq!(square_disk_area(2.0, 3.0, 0.0, 1.0, 1.0), 0.0);
        assert!((square_disk_area(-2.0, 2.0, -2.0, 2.0, 1.0) - PI).abs() < 1e-12);
        assert!((square_disk_area(0.0, 2.0, -2.0, 2.0, 1.0) - PI / 2.0).abs() < 1e-12);
        assert!((square_disk_area(0.0, 2.0, 0.0, 2.0, 1.0) - PI / 4.0).abs() < 1e-12);
    }

    #[test]
    fn hminus1_closed_forms() {
        let r1 = LimitMeasure::ring(0.4).unwrap();
        let r2 = LimitMeasure::ring(0.7).unwrap();
        assert!(hminus1_distance(&r1, &r1) < 1e-12);
        let d = hminus1_distance(&r1, &r2);
        let expect = (2.0 * PI * (0.7f64 / 0.4).ln()).sqrt();
        assert!((d - expect).abs() < 1e-10, "{d} vs {expect}");
        // Boundary vs ring: sqrt(-2 pi log rho), decreasing toward 1.
        let b = uniform_boundary();
        let mut last = f64::INFINITY;
        for rho in [0.5, 0.7, 0.9] {
            let d = hminus1_distance(&b, &LimitMeasure::ring(rho).unwrap());
            let expect = (-2.0 * PI * rho.ln()).sqrt();
            assert!((d - expect).abs() < 1e-10, "{d} vs {expect}");
            assert!(d < last);
            last = d;
        }
    }

    #[test]
    fn grid_energy_is_nonnegative_and_routes_agree() {
        let f = FourierSeries::constant(1.0);
        let mu = LimitMeasure::uniform_square(0.3, 4).unwrap();
        let weak = limit_energy(&mu, &f).unwrap();
        let direct = limit_energy_quadrature(&mu, &f).unwrap();
        assert!(weak >= 0.0);
        assert!(
            (weak - direct).abs() < 1e-3,
            "weak {weak} vs direct {direct}"
        );
    }
}
