//! Geometry of the unit disk, trigonometric series on its boundary circle,
//! boundary traces of logarithmic potentials, and the spectral solver for the
//! harmonic Neumann problem.
//!
//! Everything here is exact up to series truncation: on the unit circle the
//! trace of `log|x - a|` and its normal derivative have closed-form Fourier
//! coefficients, and the Neumann problem diagonalizes mode by mode.

use crate::error::{Error, Result};
use num_complex::Complex64;

/// Hard cap on the truncation order chosen by [`adaptive_order`].
pub const MAX_ORDER: usize = 4096;

/// A point of the plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(&self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn rotated(&self, angle: f64) -> Point {
        let (s, c) = angle.sin_cos();
        Point::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn angle(&self) -> f64 {
        self.y.atan2(self.x)
    }

    pub(crate) fn as_complex(&self) -> Complex64 {
        Complex64::new(self.x, self.y)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// The unit disk together with the concentric disk realizing the enclosing box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    box_radius: f64,
}

impl Default for Domain {
    fn default() -> Self {
        Domain { box_radius: 2.0 }
    }
}

impl Domain {
    /// Box of the given radius; must strictly contain the closed unit disk.
    pub fn with_box_radius(box_radius: f64) -> Result<Self> {
        if !(box_radius.is_finite() && box_radius > 1.0) {
            return Err(Error::invalid(format!(
                "box radius must be finite and > 1, got {box_radius}"
            )));
        }
        Ok(Domain { box_radius })
    }

    pub fn radius(&self) -> f64 {
        1.0
    }

    pub fn box_radius(&self) -> f64 {
        self.box_radius
    }

    /// Outward unit normal at boundary angle `theta`; on the unit circle this
    /// is the boundary point itself.
    pub fn boundary_normal(&self, theta: f64) -> Point {
        let (s, c) = theta.sin_cos();
        Point::new(c, s)
    }
}

/// Distance from an interior point to the boundary circle, `1 - |a|`.
pub fn dist_to_boundary(a: Point) -> Result<f64> {
    let r = a.norm();
    if !a.is_finite() || r > 1.0 {
        return Err(Error::OutsideDomain {
            x: a.x,
            y: a.y,
            detail: "outside the closed unit disk".into(),
        });
    }
    Ok(1.0 - r)
}

/// Real trigonometric series on the unit circle,
/// `mean + sum_k (cos_coeffs[k-1] cos(k t) + sin_coeffs[k-1] sin(k t))`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierSeries {
    mean: f64,
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl FourierSeries {
    pub fn new(mean: f64, cos: Vec<f64>, sin: Vec<f64>) -> Result<Self> {
        if !mean.is_finite()
            || cos.iter().any(|c| !c.is_finite())
            || sin.iter().any(|s| !s.is_finite())
        {
            return Err(Error::invalid("non-finite Fourier coefficient"));
        }
        let mut cos = cos;
        let mut sin = sin;
        let k = cos.len().max(sin.len());
        cos.resize(k, 0.0);
        sin.resize(k, 0.0);
        Ok(FourierSeries { mean, cos, sin })
    }

    pub fn constant(mean: f64) -> Self {
        FourierSeries {
            mean,
            cos: Vec::new(),
            sin: Vec::new(),
        }
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    /// Truncation order `K` (number of nonconstant modes carried).
    pub fn order(&self) -> usize {
        self.cos.len()
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Coefficient of `cos(k t)`, 1-based; zero beyond the truncation order.
    pub fn cos_coeff(&self, k: usize) -> f64 {
        if k >= 1 && k <= self.cos.len() {
            self.cos[k - 1]
        } else {
            0.0
        }
    }

    /// Coefficient of `sin(k t)`, 1-based; zero beyond the truncation order.
    pub fn sin_coeff(&self, k: usize) -> f64 {
        if k >= 1 && k <= self.sin.len() {
            self.sin[k - 1]
        } else {
            0.0
        }
    }

    pub fn cos_coeffs(&self) -> &[f64] {
        &self.cos
    }

    pub fn sin_coeffs(&self) -> &[f64] {
        &self.sin
    }

    /// Pointwise value at angle `theta`, via the Chebyshev three-term
    /// recurrence for `cos(k t)` and `sin(k t)`.
    pub fn value(&self, theta: f64) -> f64 {
        let (s1, c1) = theta.sin_cos();
        let mut ck_prev = 1.0; // cos(0 t)
        let mut sk_prev = 0.0;
        let mut ck = c1;
        let mut sk = s1;
        let mut acc = self.mean;
        for k in 0..self.cos.len() {
            acc += self.cos[k] * ck + self.sin[k] * sk;
            let cn = 2.0 * c1 * ck - ck_prev;
            let sn = 2.0 * c1 * sk - sk_prev;
            ck_prev = ck;
            sk_prev = sk;
            ck = cn;
            sk = sn;
        }
        acc
    }

    /// Antiderivative `int_0^theta` of the series, vanishing at zero.
    pub fn antiderivative(&self, theta: f64) -> f64 {
        let mut acc = self.mean * theta;
        for k in 1..=self.cos.len() {
            let kf = k as f64;
            let (skt, ckt) = (kf * theta).sin_cos();
            acc += self.cos[k - 1] * skt / kf + self.sin[k - 1] * (1.0 - ckt) / kf;
        }
        acc
    }

    /// Integral over the full circle, `2 pi * mean`.
    pub fn circle_integral(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.mean
    }

    /// Upper bound for the sup norm: `|mean| + sum (|c_k| + |s_k|)`.
    pub fn sup_norm_bound(&self) -> f64 {
        self.mean.abs()
            + self
                .cos
                .iter()
                .zip(&self.sin)
                .map(|(c, s)| c.abs() + s.abs())
                .sum::<f64>()
    }

    pub fn add(&self, other: &FourierSeries) -> FourierSeries {
        let k = self.order().max(other.order());
        let cos = (1..=k)
            .map(|i| self.cos_coeff(i) + other.cos_coeff(i))
            .collect();
        let sin = (1..=k)
            .map(|i| self.sin_coeff(i) + other.sin_coeff(i))
            .collect();
        FourierSeries {
            mean: self.mean + other.mean,
            cos,
            sin,
        }
    }

    pub fn sub(&self, other: &FourierSeries) -> FourierSeries {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, factor: f64) -> FourierSeries {
        FourierSeries {
            mean: self.mean * factor,
            cos: self.cos.iter().map(|c| c * factor).collect(),
            sin: self.sin.iter().map(|s| s * factor).collect(),
        }
    }

    /// Minimum of the series over `m` equispaced sample angles.
    pub fn min_on_samples(&self, m: usize) -> f64 {
        (0..m)
            .map(|j| self.value(2.0 * std::f64::consts::PI * j as f64 / m as f64))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Boundary pairing of two series,
/// `2 pi u0 v0 + pi sum_k (uc_k vc_k + us_k vs_k)`,
/// the circle integral of the pointwise product.
pub fn pairing(u: &FourierSeries, v: &FourierSeries) -> f64 {
    let k = u.order().min(v.order());
    let mut acc = 0.0;
    for i in 0..k {
        acc += u.cos[i] * v.cos[i] + u.sin[i] * v.sin[i];
    }
    2.0 * std::f64::consts::PI * u.mean * v.mean + std::f64::consts::PI * acc
}

/// Smallest truncation order whose geometric tail bound
/// `r^{K+1} / ((K+1)(1-r))` drops below 1e-12, capped at [`MAX_ORDER`].
pub fn adaptive_order(r_max: f64) -> usize {
    const TAIL_TOL: f64 = 1e-12;
    if !(0.0..1.0).contains(&r_max) {
        return MAX_ORDER;
    }
    if r_max < 1e-6 {
        return 1;
    }
    let mut pow = r_max * r_max; // r^{k+1} at k = 1
    for k in 1..MAX_ORDER {
        if pow / ((k + 1) as f64 * (1.0 - r_max)) <= TAIL_TOL {
            return k;
        }
        pow *= r_max;
    }
    MAX_ORDER
}

fn require_interior(a: Point) -> Result<()> {
    if !a.is_finite() || a.norm() >= 1.0 {
        return Err(Error::OutsideDomain {
            x: a.x,
            y: a.y,
            detail: "must lie strictly inside the unit disk".into(),
        });
    }
    Ok(())
}

/// Fourier coefficients of `t -> log|e^{it} - a|` for an interior point `a`.
///
/// With `a = r e^{i alpha}` the series is `-sum_k (r^k / k) cos(k(t - alpha))`,
/// i.e. mean 0, `cos_k = -(r^k/k) cos(k alpha)`, `sin_k = -(r^k/k) sin(k alpha)`.
pub fn log_trace_coeffs(a: Point, order: usize) -> Result<FourierSeries> {
    require_interior(a)?;
    let z = a.as_complex();
    let mut cos = Vec::with_capacity(order);
    let mut sin = Vec::with_capacity(order);
    let mut zp = Complex64::new(1.0, 0.0);
    for k in 1..=order {
        zp *= z;
        let kf = k as f64;
        cos.push(-zp.re / kf);
        sin.push(-zp.im / kf);
    }
    Ok(FourierSeries { mean: 0.0, cos, sin })
}

/// Fourier coefficients of the normal derivative of `log|x - a|` on the unit
/// circle: mean 1, `cos_k = r^k cos(k alpha)`, `sin_k = r^k sin(k alpha)`.
///
/// The unit mean realizes circulation `2 pi` around a single dislocation.
pub fn normal_derivative_log_coeffs(a: Point, order: usize) -> Result<FourierSeries> {
    require_interior(a)?;
    let z = a.as_complex();
    let mut cos = Vec::with_capacity(order);
    let mut sin = Vec::with_capacity(order);
    let mut zp = Complex64::new(1.0, 0.0);
    for _ in 1..=order {
        zp *= z;
        cos.push(zp.re);
        sin.push(zp.im);
    }
    Ok(FourierSeries { mean: 1.0, cos, sin })
}

/// Spectral solution of the harmonic Neumann problem on the unit disk.
///
/// For datum `g` with zero circle mean the solution is
/// `w(r, t) = sum_k (g_k / k) r^k (cos/sin)(k t)`, normalized to zero average.
#[derive(Debug, Clone, PartialEq)]
pub struct NeumannSolution {
    coeffs: FourierSeries,
    dirichlet_energy: f64,
}

impl NeumannSolution {
    /// Boundary trace of the solution (zero mean by normalization).
    pub fn trace(&self) -> &FourierSeries {
        &self.coeffs
    }

    /// `1/2 int_disk |grad w|^2`.
    pub fn dirichlet_energy(&self) -> f64 {
        self.dirichlet_energy
    }

    /// Pointwise value at an interior (or boundary) point, summing the series.
    pub fn value_at(&self, p: Point) -> f64 {
        let z = p.as_complex();
        // w = Re sum_k (t_ck - i t_sk) z^k, evaluated by Horner.
        let mut acc = Complex64::new(0.0, 0.0);
        for k in (1..=self.coeffs.order()).rev() {
            let gamma = Complex64::new(self.coeffs.cos[k - 1], -self.coeffs.sin[k - 1]);
            acc = acc * z + gamma;
        }
        (acc * z).re
    }

    /// Gradient at an interior point: with `h(z) = sum_k gamma_k z^k` and
    /// `w = Re h`, the gradient is `(Re h', -Im h')`.
    pub fn gradient_at(&self, p: Point) -> Point {
        let z = p.as_complex();
        let mut acc = Complex64::new(0.0, 0.0);
        for k in (1..=self.coeffs.order()).rev() {
            let kf = k as f64;
            let dk = Complex64::new(kf * self.coeffs.cos[k - 1], -kf * self.coeffs.sin[k - 1]);
            acc = acc * z + dk;
        }
        Point::new(acc.re, -acc.im)
    }
}

/// Solve the Neumann problem `lap w = 0` in the disk, `dw/dn = g` on the
/// circle. Fails unless the circle mean of `g` vanishes up to a tolerance
/// proportional to the series magnitude.
pub fn solve_neumann(g: &FourierSeries) -> Result<NeumannSolution> {
    let tol = 1e-9 * (1.0 + g.sup_norm_bound());
    if g.mean().abs() > tol {
        return Err(Error::IncompatibleDatum {
            mean: g.mean(),
            tol,
        });
    }
    let k = g.order();
    let mut cos = Vec::with_capacity(k);
    let mut sin = Vec::with_capacity(k);
    let mut energy = 0.0;
    for i in 1..=k {
        let kf = i as f64;
        let (gc, gs) = (g.cos[i - 1], g.sin[i - 1]);
        cos.push(gc / kf);
        sin.push(gs / kf);
        energy += (gc * gc + gs * gs) / kf;
    }
    Ok(NeumannSolution {
        coeffs: FourierSeries { mean: 0.0, cos, sin },
        dirichlet_energy: 0.5 * std::f64::consts::PI * energy,
    })
}
