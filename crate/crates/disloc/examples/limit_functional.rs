//! The continuum energy on limit measures: the zero-energy law on the
//! limiting boundary measure, ring and uniform-disk closed forms, and the
//! agreement of the weak-identity route with direct quadrature.
//!
//! Run with: cargo run --release --example limit_functional

use disloc::{
    limit_energy, limit_energy_quadrature, limiting_boundary_measure, FourierSeries, LimitMeasure,
};
use std::f64::consts::PI;

fn main() {
    let uniform = FourierSeries::constant(1.0);
    let skewed = FourierSeries::new(1.0, vec![0.5], vec![]).unwrap();

    println!("zero-energy law on mu = f/(2 pi) dH^1:");
    for (label, f) in [("f = 1", &uniform), ("f = 1 + 0.5 cos t", &skewed)] {
        let mu = limiting_boundary_measure(f).unwrap();
        println!("  {label:>18}: F = {:.3e}", limit_energy(&mu, f).unwrap());
    }

    println!("\nring measures under f = 1 (closed form -pi log rho):");
    for rho in [0.3, 0.5, 0.8] {
        let mu = LimitMeasure::ring(rho).unwrap();
        println!(
            "  rho = {rho}: weak {:.10}  quadrature {:.10}  closed form {:.10}",
            limit_energy(&mu, &uniform).unwrap(),
            limit_energy_quadrature(&mu, &uniform).unwrap(),
            -PI * rho.ln()
        );
    }

    let disk = LimitMeasure::uniform_disk(1.0).unwrap();
    println!("\nuniform disk under f = 1 (closed form pi/4 = {:.10}):", PI / 4.0);
    println!(
        "  weak {:.10}  quadrature {:.10}",
        limit_energy(&disk, &uniform).unwrap(),
        limit_energy_quadrature(&disk, &uniform).unwrap()
    );

    let square = LimitMeasure::uniform_square(0.3, 4).unwrap();
    println!("\nuniform square blob [-0.3, 0.3]^2 under f = 1:");
    println!(
        "  weak {:.8}  quadrature {:.8}",
        limit_energy(&square, &uniform).unwrap(),
        limit_energy_quadrature(&square, &uniform).unwrap()
    );

    // A mismatched pair costs energy: uniform boundary measure against a
    // skewed datum.
    let mu = limiting_boundary_measure(&uniform).unwrap();
    println!(
        "\nuniform boundary measure against f = 1 + 0.5 cos t: F = {:.10} (pi/8 = {:.10})",
        limit_energy(&mu, &skewed).unwrap(),
        PI / 8.0
    );
}
