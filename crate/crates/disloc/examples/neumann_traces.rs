//! The spectral building blocks: boundary traces of logarithmic potentials
//! and the harmonic Neumann solver, with the Green identity as a check.
//!
//! Run with: cargo run --release --example neumann_traces

use disloc::{
    log_trace_coeffs, normal_derivative_log_coeffs, pairing, solve_neumann, FourierSeries, Point,
};

fn main() {
    let a = Point::new(0.5, 0.3);
    let k = 12;
    let trace = log_trace_coeffs(a, k).unwrap();
    let nd = normal_derivative_log_coeffs(a, k).unwrap();
    println!("traces of log|x - a| on the unit circle for a = ({}, {}):", a.x, a.y);
    println!("  mode  trace_cos      trace_sin      dnu_cos        dnu_sin");
    for i in 1..=6 {
        println!(
            "  {i:4}  {:+.10}  {:+.10}  {:+.10}  {:+.10}",
            trace.cos_coeff(i),
            trace.sin_coeff(i),
            nd.cos_coeff(i),
            nd.sin_coeff(i)
        );
    }
    println!("  circle integral of the normal derivative = {:.12} (2 pi)", nd.circle_integral());

    // Neumann problem with the compatible datum g = f - dnu(log|x - a|).
    let f = FourierSeries::constant(1.0);
    let g = f.sub(&nd);
    let w = solve_neumann(&g).unwrap();
    println!("\nharmonic correction for f = 1:");
    println!("  Dirichlet energy        = {:.12}", w.dirichlet_energy());
    println!("  Green identity <g, w>/2 = {:.12}", 0.5 * pairing(&g, w.trace()));
    println!("  value at the center     = {:+.3e} (zero-mean normalization)", w.value_at(Point::new(0.0, 0.0)));
}
