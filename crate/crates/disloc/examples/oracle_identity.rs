//! Cross-check the spectral four-term energy against the slow quadrature
//! evaluation of the original self/interaction decomposition.
//!
//! Run with: cargo run --release --example oracle_identity

use disloc::oracle::{identity_check, interaction_energy, self_energy};
use disloc::{BoundaryDatum, FourierSeries, Point, PointConfig};

fn main() {
    let uniform = BoundaryDatum::uniform();

    let a = Point::new(0.6, 0.0);
    println!(
        "self energy at (0.6, 0) under f = 1: {:.8}  (closed form {:.8})",
        self_energy(a, &uniform, 1).unwrap(),
        -std::f64::consts::PI * (1.0 - 0.36f64).ln()
    );

    let b = Point::new(-0.5, 0.2);
    println!(
        "interaction energy of (0.6,0) and (-0.5,0.2): {:.8}",
        interaction_energy(a, b, &uniform, 2).unwrap()
    );

    let pair = PointConfig::new(vec![Point::new(0.5, 0.0), Point::new(-0.5, 0.0)]).unwrap();
    println!(
        "identity gap for the antipodal pair: {:.3e}",
        identity_check(&pair, &uniform).unwrap()
    );

    let datum = BoundaryDatum::new(FourierSeries::new(1.0, vec![0.5], vec![]).unwrap()).unwrap();
    let triple = PointConfig::new(vec![
        Point::new(0.55, 0.1),
        Point::new(-0.3, 0.45),
        Point::new(-0.1, -0.5),
    ])
    .unwrap();
    println!(
        "identity gap for a 3-point configuration under f = 1 + 0.5 cos t: {:.3e}",
        identity_check(&triple, &datum).unwrap()
    );
}
