//! Property tests for the core invariants: spectral identities, symmetry of
//! the energy, mass bookkeeping of the measure machinery.

use disloc::energy::{renormalized_energy, BoundaryDatum, PointConfig};
use disloc::{
    pairing, piecewise_constant_approx, recovery_sequence, solve_neumann, FourierSeries,
    LimitMeasure, Point,
};
use proptest::prelude::*;

fn small_series() -> impl Strategy<Value = FourierSeries> {
    (
        proptest::collection::vec(-1.0..1.0f64, 1..6),
        proptest::collection::vec(-1.0..1.0f64, 1..6),
    )
        .prop_map(|(cos, sin)| FourierSeries::new(0.0, cos, sin).unwrap())
}

/// Distinct interior points with a floor on separation and radius, so the
/// energy stays well conditioned.
fn admissible_config() -> impl Strategy<Value = PointConfig> {
    proptest::collection::vec((-0.8..0.8f64, -0.8..0.8f64), 1..5).prop_filter_map(
        "separated interior points",
        |raw| {
            let pts: Vec<Point> = raw
                .into_iter()
                .map(|(x, y)| Point::new(x, y))
                .filter(|p| p.norm() < 0.8)
                .collect();
            if pts.is_empty() {
                return None;
            }
            for i in 0..pts.len() {
                for j in (i + 1)..pts.len() {
                    if pts[i].dist(pts[j]) < 0.05 {
                        return None;
                    }
                }
            }
            PointConfig::new(pts).ok()
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pairing_is_symmetric_and_bilinear(u in small_series(), v in small_series(), a in -3.0..3.0f64) {
        prop_assert!((pairing(&u, &v) - pairing(&v, &u)).abs() < 1e-12);
        prop_assert!((pairing(&u.scale(a), &v) - a * pairing(&u, &v)).abs() < 1e-12);
        prop_assert!(
            (pairing(&u.add(&v), &v) - pairing(&u, &v) - pairing(&v, &v)).abs() < 1e-12
        );
    }

    #[test]
    fn neumann_solver_is_linear_and_satisfies_green(g1 in small_series(), g2 in small_series()) {
        let w1 = solve_neumann(&g1).unwrap();
        let w2 = solve_neumann(&g2).unwrap();
        let ws = solve_neumann(&g1.add(&g2)).unwrap();
        for k in 1..=ws.trace().order() {
            prop_assert!(
                (ws.trace().cos_coeff(k) - w1.trace().cos_coeff(k) - w2.trace().cos_coeff(k)).abs()
                    < 1e-13
            );
            prop_assert!(
                (ws.trace().sin_coeff(k) - w1.trace().sin_coeff(k) - w2.trace().sin_coeff(k)).abs()
                    < 1e-13
            );
        }
        prop_assert!((2.0 * w1.dirichlet_energy() - pairing(&g1, w1.trace())).abs() < 1e-12);
    }

    #[test]
    fn energy_is_rotation_equivariant(config in admissible_config(), angle in 0.0..6.28f64) {
        let datum = BoundaryDatum::uniform();
        let e0 = renormalized_energy(&config, &datum).unwrap();
        let e1 = renormalized_energy(&config.rotated(angle), &datum).unwrap();
        prop_assert!((e0.w_term - e1.w_term).abs() < 1e-10);
        prop_assert!((e0.f_pairing - e1.f_pairing).abs() < 1e-10);
        prop_assert!((e0.phi_pairing - e1.phi_pairing).abs() < 1e-10);
        prop_assert!((e0.log_term - e1.log_term).abs() < 1e-10);
        prop_assert!((e0.total - e1.total).abs() < 1e-10);
    }

    #[test]
    fn energy_is_permutation_invariant(config in admissible_config()) {
        let datum = BoundaryDatum::uniform();
        let e0 = renormalized_energy(&config, &datum).unwrap();
        let mut rev: Vec<Point> = config.points().to_vec();
        rev.reverse();
        let e1 = renormalized_energy(&PointConfig::new(rev).unwrap(), &datum).unwrap();
        prop_assert!((e0.total - e1.total).abs() < 1e-11);
    }

    #[test]
    fn piecewise_approx_conserves_mass(rho in 0.2..0.95f64, h in 0.08..0.4f64) {
        let mu = LimitMeasure::ring(rho).unwrap();
        let approx = piecewise_constant_approx(&mu, h).unwrap();
        prop_assert!((approx.total_mass() - 1.0).abs() < 1e-12);
        if let LimitMeasure::Grid { h, cells } = &approx {
            for c in cells {
                let x0 = c.ix as f64 * h;
                let y0 = c.iy as f64 * h;
                let far = x0.abs().max((x0 + h).abs()).hypot(y0.abs().max((y0 + h).abs()));
                prop_assert!(far < 1.0);
            }
        }
    }

    #[test]
    fn recovery_sequences_hit_the_requested_count(n in 16usize..200, half in 0.15..0.6f64) {
        let mu = LimitMeasure::uniform_square(half, 4).unwrap();
        let config = recovery_sequence(&mu, n).unwrap();
        prop_assert_eq!(config.n(), n);
        prop_assert!(config.min_separation() > 0.0);
        prop_assert!(config.max_radius() < 1.0);
    }
}
