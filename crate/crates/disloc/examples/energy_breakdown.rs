//! Evaluate the four-term renormalized energy for explicit configurations
//! and compare the single-dislocation and antipodal-pair cases against their
//! closed forms.
//!
//! Run with: cargo run --release --example energy_breakdown

use disloc::{renormalized_energy, BoundaryDatum, FourierSeries, Point, PointConfig};
use std::f64::consts::PI;

fn report(label: &str, points: Vec<Point>, datum: &BoundaryDatum) {
    let config = PointConfig::new(points).unwrap();
    let e = renormalized_energy(&config, datum).unwrap();
    println!("{label}");
    println!("  w_term      = {:+.12}", e.w_term);
    println!("  f_pairing   = {:+.12}", e.f_pairing);
    println!("  phi_pairing = {:+.12}", e.phi_pairing);
    println!("  log_term    = {:+.12}", e.log_term);
    println!("  total       = {:+.12}", e.total);
}

fn main() {
    let uniform = BoundaryDatum::uniform();

    report("single dislocation at the center (total 0):", vec![Point::new(0.0, 0.0)], &uniform);

    let r: f64 = 0.6;
    report(
        &format!(
            "single dislocation at radius {r} (closed form {:+.12}):",
            -PI * (1.0 - r * r).ln()
        ),
        vec![Point::new(r, 0.0)],
        &uniform,
    );

    let r: f64 = 0.5;
    report(
        &format!(
            "antipodal pair at radius {r} (closed form {:+.12}):",
            -0.5 * PI * ((1.0 - r.powi(4)).ln() + (2.0 * r).ln())
        ),
        vec![Point::new(r, 0.0), Point::new(-r, 0.0)],
        &uniform,
    );

    // A non-uniform strain pulls the dislocations toward its bulge.
    let f = FourierSeries::new(1.0, vec![0.5], vec![]).unwrap();
    let datum = BoundaryDatum::new(f).unwrap();
    report(
        "same pair under f = 1 + 0.5 cos t:",
        vec![Point::new(r, 0.0), Point::new(-r, 0.0)],
        &datum,
    );
}
