//! Minimization of the renormalized energy over n-point configurations:
//! gradient descent with a backtracking Armijo line search that never crosses
//! the blow-up barriers at the boundary circle and at collisions, plus a
//! seeded multistart driver.

use crate::disk::Point;
use crate::energy::{adaptive_steps, effective_order, BoundaryDatum, EnergyWorkspace, PointConfig};
use crate::error::{Error, Result};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;

const ARMIJO_C: f64 = 1e-4;
const STEP_FLOOR: f64 = 1e-16;
const GRADIENT_STEP_SCALE: f64 = 1e-5;

/// Options for [`minimize`] and [`multistart`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimizeOptions {
    pub max_iters: usize,
    /// Sup-norm threshold on the finite-difference gradient.
    pub grad_tol: f64,
    pub initial_step: f64,
    pub shrink_factor: f64,
    pub restarts: usize,
    pub seed: u64,
}

impl MinimizeOptions {
    /// Defaults scaled for an n-point problem.
    pub fn defaults_for(n: usize) -> Self {
        MinimizeOptions {
            max_iters: 20_000,
            grad_tol: 1e-7 * n as f64,
            initial_step: 0.05,
            shrink_factor: 0.5,
            restarts: 4,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.grad_tol.is_finite() && self.grad_tol > 0.0) {
            return Err(Error::invalid("grad_tol must be positive"));
        }
        if !(self.shrink_factor > 0.0 && self.shrink_factor < 1.0) {
            return Err(Error::invalid("shrink_factor must lie in (0, 1)"));
        }
        if !(self.initial_step.is_finite() && self.initial_step > 0.0) {
            return Err(Error::invalid("initial_step must be positive"));
        }
        if self.max_iters == 0 {
            return Err(Error::invalid("max_iters must be at least 1"));
        }
        if self.restarts == 0 {
            return Err(Error::invalid("restarts must be at least 1"));
        }
        Ok(())
    }
}

/// Why a minimization run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Converged,
    MaxIters,
    /// No admissible decreasing step above the machine floor; the returned
    /// configuration is the best iterate reached.
    Stalled,
}

/// State at the start of an accepted iterate (the last row is the final one).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub iter: usize,
    pub total: f64,
    pub grad_norm: f64,
    pub min_bdist: f64,
    pub min_sep: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinimizeTrace {
    pub rows: Vec<TraceRow>,
    pub stop: StopReason,
}

impl MinimizeTrace {
    pub fn final_row(&self) -> &TraceRow {
        self.rows.last().expect("trace always has at least one row")
    }
}

/// Gradient descent with backtracking line search from a given start.
///
/// Every accepted step strictly decreases the total energy, and the per-step
/// displacement is capped at half the current margin to the boundary and to
/// the nearest collision, so iterates always satisfy the configuration
/// invariants.
pub fn minimize(
    start: &PointConfig,
    datum: &BoundaryDatum,
    opts: &MinimizeOptions,
) -> Result<(PointConfig, MinimizeTrace)> {
    opts.validate()?;
    let mut pts: Vec<Point> = start.points().to_vec();
    let mut rows = Vec::new();
    let mut warm = opts.initial_step;
    let mut iter = 0usize;

    let stop = loop {
        let config = PointConfig::new(pts.clone())?;
        let order = effective_order(&config, datum);
        let ws = EnergyWorkspace::new(&config, datum, order)?;
        let energy = ws.total();
        let steps = adaptive_steps(&config, GRADIENT_STEP_SCALE);
        let grad = ws.gradient(&steps);
        let grad_norm = grad
            .iter()
            .map(|g| g.x.abs().max(g.y.abs()))
            .fold(0.0, f64::max);
        let min_bdist = config.min_boundary_distance();
        let min_sep = config.min_separation();
        rows.push(TraceRow {
            iter,
            total: energy,
            grad_norm,
            min_bdist,
            min_sep,
        });

        if grad_norm <= opts.grad_tol {
            break StopReason::Converged;
        }
        if iter >= opts.max_iters {
            break StopReason::MaxIters;
        }

        let dir_max = grad.iter().map(|g| g.x.hypot(g.y)).fold(0.0, f64::max);
        let margin = min_bdist.min(0.5 * min_sep);
        let cap = 0.5 * margin / dir_max;
        let grad_sq: f64 = grad.iter().map(|g| g.x * g.x + g.y * g.y).sum();

        let mut t = warm.min(cap);
        let mut accepted = None;
        while t * dir_max > STEP_FLOOR {
            let candidate: Vec<Point> = pts
                .iter()
                .zip(&grad)
                .map(|(p, g)| Point::new(p.x - t * g.x, p.y - t * g.y))
                .collect();
            let trial = ws.total_replaced(&candidate);
            if trial <= energy - ARMIJO_C * t * grad_sq {
                accepted = Some(candidate);
                break;
            }
            t *= opts.shrink_factor;
        }
        match accepted {
            Some(candidate) => {
                pts = candidate;
                warm = 2.0 * t;
                iter += 1;
            }
            None => break StopReason::Stalled,
        }
    };

    Ok((
        PointConfig::new(pts)?,
        MinimizeTrace { rows, stop },
    ))
}

/// Seeded admissible start: points uniform in the disk of radius 0.9,
/// resampled until the minimum separation reaches `0.05 / sqrt(n)`.
pub fn sample_start(n: usize, seed: u64) -> Result<PointConfig> {
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut uniform = move || (rng.next_u64() >> 11) as f64 * (1.0 / 9007199254740992.0);
    let min_sep = 0.05 / (n as f64).sqrt();
    let mut pts: Vec<Point> = Vec::with_capacity(n);
    let mut attempts = 0usize;
    while pts.len() < n {
        attempts += 1;
        if attempts > 100_000 * n {
            return Err(Error::InfeasibleN {
                detail: format!("could not place {n} separated start points"),
            });
        }
        let r = 0.9 * uniform().sqrt();
        let theta = 2.0 * std::f64::consts::PI * uniform();
        let p = Point::new(r * theta.cos(), r * theta.sin());
        if pts.iter().all(|q| q.dist(p) >= min_sep) {
            pts.push(p);
        }
    }
    PointConfig::new(pts)
}

/// Run `opts.restarts` independent minimizations from seeded random starts
/// and return the best result. Ties are broken by final gradient norm, then
/// by restart index, so the outcome is deterministic for a fixed seed.
pub fn multistart(
    n: usize,
    datum: &BoundaryDatum,
    opts: &MinimizeOptions,
) -> Result<(PointConfig, MinimizeTrace)> {
    opts.validate()?;
    let runs: Vec<(PointConfig, MinimizeTrace)> = (0..opts.restarts)
        .into_par_iter()
        .map(|r| {
            let start = sample_start(n, opts.seed.wrapping_add(r as u64))?;
            minimize(&start, datum, opts)
        })
        .collect::<Result<Vec<_>>>()?;
    let best = runs
        .into_iter()
        .enumerate()
        .min_by(|(ia, (_, ta)), (ib, (_, tb))| {
            let fa = ta.final_row();
            let fb = tb.final_row();
            fa.total
                .total_cmp(&fb.total)
                .then(fa.grad_norm.total_cmp(&fb.grad_norm))
                .then(ia.cmp(ib))
        })
        .expect("restarts >= 1");
    Ok(best.1)
}
