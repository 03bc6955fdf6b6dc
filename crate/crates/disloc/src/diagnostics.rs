//! Upscaling experiments: Wasserstein-1 distance of empirical measures to a
//! limit measure, angular distribution discrepancy against the limiting
//! boundary density, the per-n minimization sweep, and the recovery-sequence
//! energy-gap trend.

use crate::disk::{FourierSeries, Point};
use crate::energy::{renormalized_energy, BoundaryDatum, PointConfig};
use crate::error::{Error, Result};
use crate::limit::{
    limit_energy_quadrature, limiting_boundary_measure, recovery_sequence, LimitMeasure,
};
use crate::optimize::{multistart, MinimizeOptions};
use crate::transport::min_cost_transport;
use std::f64::consts::PI;

/// Per-n record of an upscaling sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpscaleRecord {
    pub n: usize,
    /// Minimized rescaled energy.
    pub energy: f64,
    pub mean_bdist: f64,
    pub max_bdist: f64,
    /// Wasserstein-1 distance of the empirical measure to the limiting
    /// boundary measure.
    pub w1: f64,
    /// Sup-discrepancy of the angular distribution against the limit density.
    pub angular_disc: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UpscaleReport {
    pub records: Vec<UpscaleRecord>,
}

/// Golden angle, for a deterministic low-discrepancy disk filling.
const GOLDEN_ANGLE: f64 = 2.399963229728653;

/// Equal-mass atoms discretizing a limit measure.
fn measure_atoms(mu: &LimitMeasure, m: usize) -> Result<Vec<Point>> {
    match mu {
        LimitMeasure::Boundary { density } => {
            // Inverse of the angular mass function by bisection; the mass
            // function is nondecreasing with total 1.
            let mut atoms = Vec::with_capacity(m);
            for i in 0..m {
                let target = (i as f64 + 0.5) / m as f64;
                let mut lo = 0.0;
                let mut hi = 2.0 * PI;
                for _ in 0..64 {
                    let mid = 0.5 * (lo + hi);
                    if density.antiderivative(mid) < target {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let t = 0.5 * (lo + hi);
                atoms.push(Point::new(t.cos(), t.sin()));
            }
            Ok(atoms)
        }
        LimitMeasure::Ring { rho } => Ok((0..m)
            .map(|i| {
                let t = 2.0 * PI * (i as f64 + 0.5) / m as f64;
                Point::new(rho * t.cos(), rho * t.sin())
            })
            .collect()),
        LimitMeasure::UniformDisk { rho } => Ok((0..m)
            .map(|i| {
                let r = rho * ((i as f64 + 0.5) / m as f64).sqrt();
                let t = i as f64 * GOLDEN_ANGLE;
                Point::new(r * t.cos(), r * t.sin())
            })
            .collect()),
        LimitMeasure::Grid { cells, .. } => {
            let active = cells.iter().filter(|c| c.alpha > 0.0).count();
            let m = m.max(active);
            Ok(recovery_sequence(mu, m)?.points().to_vec())
        }
    }
}

/// Wasserstein-1 distance between the empirical measure of a configuration
/// and a limit measure, via an exact transport solve against `m >= 10 n`
/// equal-mass atoms.
pub fn wasserstein1_to_limit(config: &PointConfig, mu: &LimitMeasure) -> Result<f64> {
    let n = config.n();
    let m = 10 * n;
    let atoms = measure_atoms(mu, m)?;
    let m = atoms.len();
    // Scale both sides to integers: each source carries m units, each atom n.
    let sources: Vec<(Point, u64)> = config.points().iter().map(|&p| (p, m as u64)).collect();
    let targets: Vec<(Point, u64)> = atoms.into_iter().map(|p| (p, n as u64)).collect();
    let cost = min_cost_transport(&sources, &targets);
    Ok(cost / (n as f64 * m as f64))
}

/// Sup over angles of the gap between the empirical angular distribution of
/// the configuration and the limit distribution `f / (2 pi)`, both anchored
/// at angle zero.
pub fn angular_discrepancy(config: &PointConfig, f: &FourierSeries) -> Result<f64> {
    let mu = limiting_boundary_measure(f)?;
    let LimitMeasure::Boundary { density } = &mu else {
        unreachable!()
    };
    let n = config.n() as f64;
    let mut angles: Vec<f64> = config
        .points()
        .iter()
        .map(|p| {
            let t = p.angle();
            if t < 0.0 {
                t + 2.0 * PI
            } else {
                t
            }
        })
        .collect();
    angles.sort_by(f64::total_cmp);
    let mut disc: f64 = 0.0;
    for (i, &t) in angles.iter().enumerate() {
        let target = density.antiderivative(t);
        disc = disc.max((target - i as f64 / n).abs());
        disc = disc.max(((i + 1) as f64 / n - target).abs());
    }
    Ok(disc)
}

/// Minimize at each n of an increasing list and record energy, boundary
/// distances, the Wasserstein-1 distance to the limiting boundary measure,
/// and the angular discrepancy. Deterministic for a fixed seed.
///
/// A nonpositive `grad_tol` in `opts` selects the per-n default `1e-7 n`.
pub fn upscale_experiment(
    f: &FourierSeries,
    n_list: &[usize],
    opts: &MinimizeOptions,
) -> Result<UpscaleReport> {
    if n_list.is_empty() || n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("n_list must be strictly increasing"));
    }
    let datum = BoundaryDatum::new(f.clone())?;
    let mu_limit = limiting_boundary_measure(f)?;
    let mut records = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let mut opts_n = *opts;
        if opts_n.grad_tol <= 0.0 {
            opts_n.grad_tol = 1e-7 * n as f64;
        }
        let (config, trace) = multistart(n, &datum, &opts_n)?;
        let bdists: Vec<f64> = config.points().iter().map(|p| 1.0 - p.norm()).collect();
        let record = UpscaleRecord {
            n,
            energy: trace.final_row().total,
            mean_bdist: bdists.iter().sum::<f64>() / n as f64,
            max_bdist: bdists.iter().fold(0.0f64, |a, &b| a.max(b)),
            w1: wasserstein1_to_limit(&config, &mu_limit)?,
            angular_disc: angular_discrepancy(&config, f)?,
        };
        records.push(record);
    }
    Ok(UpscaleReport { records })
}

/// `|F^n(recovery sequence) - F_infinity(mu)|` for each n, with the limit
/// value computed once by the direct quadrature route.
pub fn gamma_limsup_trend(
    mu: &LimitMeasure,
    f: &FourierSeries,
    n_list: &[usize],
) -> Result<Vec<f64>> {
    let datum = BoundaryDatum::new(f.clone())?;
    let limit = limit_energy_quadrature(mu, f)?;
    n_list
        .iter()
        .map(|&n| {
            let config = recovery_sequence(mu, n)?;
            let fn_val = renormalized_energy(&config, &datum)?.total;
            Ok((fn_val - limit).abs())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn w1_center_to_uniform_boundary_is_one() {
        let config = PointConfig::new(vec![Point::new(0.0, 0.0)]).unwrap();
        let mu = limiting_boundary_measure(&FourierSeries::constant(1.0)).unwrap();
        let w = wasserstein1_to_limit(&config, &mu).unwrap();
        assert!((w - 1.0).abs() < 1e-3, "{w}");
    }

    #[test]
    fn w1_is_rotation_invariant_on_the_atom_lattice() {
        let mu = limiting_boundary_measure(&FourierSeries::constant(1.0)).unwrap();
        let n = 6;
        let m = 10 * n;
        let pts: Vec<Point> = (0..n)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / n as f64 + 0.13;
                Point::new(0.7 * t.cos(), 0.7 * t.sin())
            })
            .collect();
        let base = PointConfig::new(pts).unwrap();
        let w0 = wasserstein1_to_limit(&base, &mu).unwrap();
        // Rotating by a multiple of the atom spacing maps the discretized
        // measure onto itself.
        let rot = base.rotated(2.0 * PI * 7.0 / m as f64);
        let w1 = wasserstein1_to_limit(&rot, &mu).unwrap();
        assert!((w0 - w1).abs() < 1e-6, "{w0} vs {w1}");
    }

    #[test]
    fn w1_decreases_for_recovery_sequences() {
        let mu = LimitMeasure::uniform_square(0.3, 4).unwrap();
        let mut last = f64::INFINITY;
        for n in [16usize, 64, 256] {
            let config = recovery_sequence(&mu, n).unwrap();
            let w = wasserstein1_to_limit(&config, &mu).unwrap();
            assert!(w < last, "n={n}: {w} !< {last}");
            last = w;
        }
    }

    #[test]
    fn angular_discrepancy_examples() {
        let f = FourierSeries::constant(1.0);
        // Scaled roots of unity: discrepancy <= 1/n.
        for n in [4usize, 9, 30] {
            let pts: Vec<Point> = (0..n)
                .map(|k| {
                    let t = 2.0 * PI * k as f64 / n as f64;
                    Point::new(0.99 * t.cos(), 0.99 * t.sin())
                })
                .collect();
            let config = PointConfig::new(pts).unwrap();
            let d = angular_discrepancy(&config, &f).unwrap();
            assert!(d <= 1.0 / n as f64 + 1e-12, "n={n}: {d}");
        }
        // A single point at angle zero.
        let config = PointConfig::new(vec![Point::new(0.5, 0.0)]).unwrap();
        let d = angular_discrepancy(&config, &f).unwrap();
        assert!(d <= 1.0 + 1e-12);
    }

    #[test]
    fn angular_discrepancy_tracks_the_right_density() {
        // Points concentrated where 1 + cos t is large should match that
        // density better than the uniform one.
        let f = FourierSeries::new(1.0, vec![0.9], vec![]).unwrap();
        let uniform = FourierSeries::constant(1.0);
        let mu = limiting_boundary_measure(&f).unwrap();
        let LimitMeasure::Boundary { density } = &mu else {
            unreachable!()
        };
        let n = 48;
        let pts: Vec<Point> = (0..n)
            .map(|i| {
                let target = (i as f64 + 0.5) / n as f64;
                let mut lo = 0.0;
                let mut hi = 2.0 * PI;
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if density.antiderivative(mid) < target {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let t = 0.5 * (lo + hi);
                Point::new(0.95 * t.cos(), 0.95 * t.sin())
            })
            .collect();
        let config = PointConfig::new(pts).unwrap();
        let matched = angular_discrepancy(&config, &f).unwrap();
        let mismatched = angular_discrepancy(&config, &uniform).unwrap();
        assert!(matched < mismatched, "{matched} vs {mismatched}");
    }

    #[test]
    fn upscale_report_is_deterministic() {
        let f = FourierSeries::constant(1.0);
        let opts = MinimizeOptions {
            restarts: 2,
            max_iters: 300,
            seed: 5,
            grad_tol: -1.0,
            ..MinimizeOptions::defaults_for(4)
        };
        let a = upscale_experiment(&f, &[2, 4], &opts).unwrap();
        let b = upscale_experiment(&f, &[2, 4], &opts).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.records.len(), 2);
        assert!(upscale_experiment(&f, &[4, 2], &opts).is_err());
    }

    #[test]
    fn gamma_gap_shrinks_along_recovery_sequences() {
        let f = FourierSeries::constant(1.0);
        let mu = LimitMeasure::uniform_square(0.3, 4).unwrap();
        let gaps = gamma_limsup_trend(&mu, &f, &[16, 64]).unwrap();
        assert_eq!(gaps.len(), 2);
        assert!(gaps[1] < gaps[0], "{gaps:?}");
    }

    #[test]
    fn multistart_beats_constructed_candidates() {
        use crate::limit::piecewise_constant_approx;
        use crate::optimize::multistart;

        let n = 8;
        let f = FourierSeries::constant(1.0);
        let datum = BoundaryDatum::new(f.clone()).unwrap();
        let opts = MinimizeOptions {
            restarts: 2,
            seed: 3,
            max_iters: 6000,
            ..MinimizeOptions::defaults_for(n)
        };
        let (_, trace) = multistart(n, &datum, &opts).unwrap();
        let found = trace.final_row().total;

        // Candidate 1: regular n-gons at a few radii.
        for r in [0.5, 0.7, 0.9] {
            let pts: Vec<Point> = (0..n)
                .map(|k| {
                    let t = 2.0 * PI * k as f64 / n as f64;
                    Point::new(r * t.cos(), r * t.sin())
                })
                .collect();
            let cand = renormalized_energy(&PointConfig::new(pts).unwrap(), &datum)
                .unwrap()
                .total;
            assert!(found <= cand + 1e-9, "ring r={r}: {found} vs {cand}");
        }

        // Candidate 2: the recovery sequence of a gridded approximation of
        // the limiting boundary measure.
        let mu = limiting_boundary_measure(&f).unwrap();
        let gridded = piecewise_constant_approx(&mu, 0.45).unwrap();
        let cand_cfg = recovery_sequence(&gridded, n).unwrap();
        let cand = renormalized_energy(&cand_cfg, &datum).unwrap().total;
        assert!(found <= cand + 1e-9, "recovery candidate: {found} vs {cand}");
    }
}
