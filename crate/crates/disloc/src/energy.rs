//! The rescaled renormalized energy of an n-point dislocation configuration
//! under a prescribed boundary strain, in its rewritten four-term form:
//! a harmonic correction energy, two boundary pairings, and the off-diagonal
//! logarithmic interaction. Every term is spectral or a finite pairwise sum,
//! so evaluation costs `O(n K + n^2)` with truncation order `K`.

use crate::disk::{
    adaptive_order, dist_to_boundary, log_trace_coeffs, normal_derivative_log_coeffs,
    FourierSeries, Point,
};
use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

/// An ordered configuration of `n` distinct dislocation positions strictly
/// inside the unit disk.
#[derive(Debug, Clone, PartialEq)]
pub struct PointConfig {
    points: Vec<Point>,
}

impl PointConfig {
    pub fn new(points: Vec<Point>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("a configuration needs at least one point"));
        }
        for p in &points {
            if !p.is_finite() || p.norm() >= 1.0 {
                return Err(Error::OutsideDomain {
                    x: p.x,
                    y: p.y,
                    detail: "dislocations must lie strictly inside the unit disk".into(),
                });
            }
        }
        for i in 0..points.len() {
            for j in (i + 1)..points.len() {
                if points[i] == points[j] {
                    return Err(Error::Collision {
                        x: points[i].x,
                        y: points[i].y,
                    });
                }
            }
        }
        Ok(PointConfig { points })
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn max_radius(&self) -> f64 {
        self.points.iter().map(Point::norm).fold(0.0, f64::max)
    }

    pub fn min_boundary_distance(&self) -> f64 {
        1.0 - self.max_radius()
    }

    /// Smallest pairwise separation; `inf` for a single point.
    pub fn min_separation(&self) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..self.points.len() {
            for j in (i + 1)..self.points.len() {
                best = best.min(self.points[i].dist(self.points[j]));
            }
        }
        best
    }

    pub fn rotated(&self, angle: f64) -> PointConfig {
        PointConfig {
            points: self.points.iter().map(|p| p.rotated(angle)).collect(),
        }
    }
}

/// The normalized boundary datum `f` (the prescribed strain divided by `n`),
/// whose circle mean must be 1.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryDatum {
    f: FourierSeries,
}

impl BoundaryDatum {
    pub fn new(f: FourierSeries) -> Result<Self> {
        if (f.mean() - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!(
                "normalized boundary datum must have circle mean 1, got {}",
                f.mean()
            )));
        }
        Ok(BoundaryDatum { f })
    }

    /// The constant datum `f = 1`.
    pub fn uniform() -> Self {
        BoundaryDatum {
            f: FourierSeries::constant(1.0),
        }
    }

    pub fn series(&self) -> &FourierSeries {
        &self.f
    }
}

/// The four terms of the rewritten energy and their total.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBreakdown {
    /// `1/2 int |grad w|^2` for the harmonic correction `w`.
    pub w_term: f64,
    /// Boundary pairing of the datum with the trace of the log potential.
    pub f_pairing: f64,
    /// `-1/2` times the pairing of the normal derivative with the trace.
    pub phi_pairing: f64,
    /// Off-diagonal logarithmic interaction `-(pi/n^2) sum_{i != j} log|a_i - a_j|`.
    pub log_term: f64,
    pub total: f64,
}

/// Boundary trace of the averaged logarithmic potential of the configuration,
/// truncated at the adaptive order for the outermost point. Always has zero
/// circle mean.
pub fn phi_trace(config: &PointConfig) -> FourierSeries {
    phi_trace_with_order(config, adaptive_order(config.max_radius()))
}

pub(crate) fn phi_trace_with_order(config: &PointConfig, order: usize) -> FourierSeries {
    let mut acc = FourierSeries::new(0.0, vec![0.0; order], vec![0.0; order]).unwrap();
    for p in config.points() {
        acc = acc.add(&log_trace_coeffs(*p, order).expect("config points are interior"));
    }
    acc.scale(1.0 / config.n() as f64)
}

/// Boundary trace of the normal derivative of the averaged potential; the
/// mean component is always 1 (total circulation `2 pi`).
pub fn phi_normal_derivative(config: &PointConfig) -> FourierSeries {
    phi_normal_derivative_with_order(config, adaptive_order(config.max_radius()))
}

pub(crate) fn phi_normal_derivative_with_order(
    config: &PointConfig,
    order: usize,
) -> FourierSeries {
    let mut acc = FourierSeries::new(0.0, vec![0.0; order], vec![0.0; order]).unwrap();
    for p in config.points() {
        acc = acc.add(&normal_derivative_log_coeffs(*p, order).expect("interior"));
    }
    acc.scale(1.0 / config.n() as f64)
}

/// `-(pi/n^2) sum_{i != j} log|a_i - a_j|`; the empty sum for `n = 1`.
pub fn log_interaction(config: &PointConfig) -> Result<f64> {
    let n = config.n() as f64;
    let mut acc = 0.0;
    let pts = config.points();
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            let d = pts[i].dist(pts[j]);
            if d == 0.0 {
                return Err(Error::Collision {
                    x: pts[i].x,
                    y: pts[i].y,
                });
            }
            acc += d.ln();
        }
    }
    Ok(-PI / (n * n) * 2.0 * acc)
}

/// Evaluate the full energy breakdown for a configuration and datum.
pub fn renormalized_energy(config: &PointConfig, datum: &BoundaryDatum) -> Result<EnergyBreakdown> {
    let order = effective_order(config, datum);
    let ws = EnergyWorkspace::new(config, datum, order)?;
    Ok(ws.breakdown())
}

pub(crate) fn effective_order(config: &PointConfig, datum: &BoundaryDatum) -> usize {
    adaptive_order(config.max_radius()).max(datum.series().order()).max(1)
}

/// Central finite differences of the total energy in each coordinate of each
/// point, with a uniform stencil width.
pub fn gradient(config: &PointConfig, datum: &BoundaryDatum, step: f64) -> Result<Vec<Point>> {
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::invalid(format!("stencil width must be positive, got {step}")));
    }
    let pts = config.points();
    for (i, p) in pts.iter().enumerate() {
        let bdist = dist_to_boundary(*p)?;
        let sep = pts
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, q)| p.dist(*q))
            .fold(f64::INFINITY, f64::min);
        if bdist <= 2.0 * step || sep <= 2.0 * step {
            return Err(Error::Stencil { index: i, step });
        }
    }
    let order = effective_order(config, datum);
    let ws = EnergyWorkspace::new(config, datum, order)?;
    Ok(ws.gradient_uniform(step))
}

/// Per-point stencil widths `scale * min(boundary distance, nearest-neighbor
/// distance)`, the default rule used by the optimizer.
pub(crate) fn adaptive_steps(config: &PointConfig, scale: f64) -> Vec<f64> {
    let pts = config.points();
    pts.iter()
        .enumerate()
        .map(|(i, p)| {
            let bdist = 1.0 - p.norm();
            let sep = pts
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, q)| p.dist(*q))
                .fold(f64::INFINITY, f64::min);
            scale * bdist.min(sep)
        })
        .collect()
}

/// Cached per-configuration sums enabling `O(K + n)` re-evaluation of the
/// energy after a single-point move. Used for finite-difference gradients and
/// the optimizer's line search.
pub(crate) struct EnergyWorkspace {
    order: usize,
    n: usize,
    points: Vec<Point>,
    f_cos: Vec<f64>,
    f_sin: Vec<f64>,
    // sum_re[k-1] = sum_i Re(z_i^k), likewise for the imaginary part.
    sum_re: Vec<f64>,
    sum_im: Vec<f64>,
    // log_rows[i] = sum_{j != i} log|a_i - a_j|, pair_log = sum_{i<j}.
    log_rows: Vec<f64>,
    pair_log: f64,
}

impl EnergyWorkspace {
    pub fn new(config: &PointConfig, datum: &BoundaryDatum, order: usize) -> Result<Self> {
        let n = config.n();
        let pts = config.points().to_vec();
        let f = datum.series();
        let f_cos: Vec<f64> = (1..=order).map(|k| f.cos_coeff(k)).collect();
        let f_sin: Vec<f64> = (1..=order).map(|k| f.sin_coeff(k)).collect();
        let mut sum_re = vec![0.0; order];
        let mut sum_im = vec![0.0; order];
        for p in &pts {
            let z = Complex64::new(p.x, p.y);
            let mut zp = Complex64::new(1.0, 0.0);
            for k in 0..order {
                zp *= z;
                sum_re[k] += zp.re;
                sum_im[k] += zp.im;
            }
        }
        let mut log_rows = vec![0.0; n];
        let mut pair_log = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                let d = pts[i].dist(pts[j]);
                if d == 0.0 {
                    return Err(Error::Collision {
                        x: pts[i].x,
                        y: pts[i].y,
                    });
                }
                let l = d.ln();
                log_rows[i] += l;
                log_rows[j] += l;
                pair_log += l;
            }
        }
        Ok(EnergyWorkspace {
            order,
            n,
            points: pts,
            f_cos,
            f_sin,
            sum_re,
            sum_im,
            log_rows,
            pair_log,
        })
    }

    fn assemble(&self, sum_re: impl Fn(usize) -> f64, sum_im: impl Fn(usize) -> f64, pair_log: f64) -> EnergyBreakdown {
        let n = self.n as f64;
        let mut w_term = 0.0;
        let mut f_pair = 0.0;
        let mut phi_pair = 0.0;
        for k in 0..self.order {
            let kf = (k + 1) as f64;
            let (sre, sim) = (sum_re(k), sum_im(k));
            // Normal-derivative modes d_k = S_k / n; trace modes p_k = -S_k / (k n).
            let (dc, ds) = (sre / n, sim / n);
            let (pc, ps) = (-sre / (kf * n), -sim / (kf * n));
            let (gc, gs) = (self.f_cos[k] - dc, self.f_sin[k] - ds);
            w_term += (gc * gc + gs * gs) / kf;
            f_pair += self.f_cos[k] * pc + self.f_sin[k] * ps;
            phi_pair += dc * pc + ds * ps;
        }
        let w_term = 0.5 * PI * w_term;
        let f_pairing = PI * f_pair;
        let phi_pairing = -0.5 * PI * phi_pair;
        let log_term = -PI / (n * n) * 2.0 * pair_log;
        EnergyBreakdown {
            w_term,
            f_pairing,
            phi_pairing,
            log_term,
            total: w_term + f_pairing + phi_pairing + log_term,
        }
    }

    pub fn breakdown(&self) -> EnergyBreakdown {
        self.assemble(|k| self.sum_re[k], |k| self.sum_im[k], self.pair_log)
    }

    pub fn total(&self) -> f64 {
        self.breakdown().total
    }

    /// Total energy after moving point `i` to `q`, without mutating the
    /// cached sums. Returns `+inf` if the move collides or leaves the disk,
    /// which rejects the trial step in callers.
    pub fn total_with_move(&self, i: usize, q: Point) -> f64 {
        if !q.is_finite() || q.norm() >= 1.0 {
            return f64::INFINITY;
        }
        let zo = self.points[i].as_complex();
        let zn = q.as_complex();
        let mut zop = Complex64::new(1.0, 0.0);
        let mut znp = Complex64::new(1.0, 0.0);
        let mut row_new = 0.0;
        for (j, p) in self.points.iter().enumerate() {
            if j == i {
                continue;
            }
            let d = q.dist(*p);
            if d == 0.0 {
                return f64::INFINITY;
            }
            row_new += d.ln();
        }
        let pair_log = self.pair_log - self.log_rows[i] + row_new;

        let n = self.n as f64;
        let mut w_term = 0.0;
        let mut f_pair = 0.0;
        let mut phi_pair = 0.0;
        for k in 0..self.order {
            zop *= zo;
            znp *= zn;
            let kf = (k + 1) as f64;
            let sre = self.sum_re[k] - zop.re + znp.re;
            let sim = self.sum_im[k] - zop.im + znp.im;
            let (dc, ds) = (sre / n, sim / n);
            let (pc, ps) = (-sre / (kf * n), -sim / (kf * n));
            let (gc, gs) = (self.f_cos[k] - dc, self.f_sin[k] - ds);
            w_term += (gc * gc + gs * gs) / kf;
            f_pair += self.f_cos[k] * pc + self.f_sin[k] * ps;
            phi_pair += dc * pc + ds * ps;
        }
        0.5 * PI * w_term + PI * f_pair - 0.5 * PI * phi_pair - PI / (n * n) * 2.0 * pair_log
    }

    /// Total energy of a full replacement configuration at this workspace's
    /// truncation order and datum; `+inf` when the candidate is inadmissible.
    pub fn total_replaced(&self, new_points: &[Point]) -> f64 {
        debug_assert_eq!(new_points.len(), self.n);
        for p in new_points {
            if !p.is_finite() || p.norm() >= 1.0 {
                return f64::INFINITY;
            }
        }
        let mut pair_log = 0.0;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let d = new_points[i].dist(new_points[j]);
                if d == 0.0 {
                    return f64::INFINITY;
                }
                pair_log += d.ln();
            }
        }
        let mut sum_re = vec![0.0; self.order];
        let mut sum_im = vec![0.0; self.order];
        for p in new_points {
            let z = p.as_complex();
            let mut zp = Complex64::new(1.0, 0.0);
            for k in 0..self.order {
                zp *= z;
                sum_re[k] += zp.re;
                sum_im[k] += zp.im;
            }
        }
        self.assemble(|k| sum_re[k], |k| sum_im[k], pair_log).total
    }

    pub fn gradient_uniform(&self, step: f64) -> Vec<Point> {
        self.gradient(&vec![step; self.n])
    }

    /// Central differences with per-point stencil widths.
    pub fn gradient(&self, steps: &[f64]) -> Vec<Point> {
        debug_assert_eq!(steps.len(), self.n);
        (0..self.n)
            .map(|i| {
                let p = self.points[i];
                let h = steps[i];
                let ex_p = self.total_with_move(i, Point::new(p.x + h, p.y));
                let ex_m = self.total_with_move(i, Point::new(p.x - h, p.y));
                let ey_p = self.total_with_move(i, Point::new(p.x, p.y + h));
                let ey_m = self.total_with_move(i, Point::new(p.x, p.y - h));
                Point::new((ex_p - ex_m) / (2.0 * h), (ey_p - ey_m) / (2.0 * h))
            })
            .collect()
    }
}
