//! Upscaling sweep: as n grows, minimizers concentrate at the boundary, the
//! empirical measure approaches the limiting boundary measure in Wasserstein
//! distance, and the rescaled energy vanishes.
//!
//! Run with: cargo run --release --example boundary_concentration

use disloc::diagnostics::upscale_experiment;
use disloc::{FourierSeries, MinimizeOptions};

fn main() {
    let f = FourierSeries::constant(1.0);
    let opts = MinimizeOptions {
        restarts: 2,
        seed: 42,
        grad_tol: -1.0, // per-n default
        ..MinimizeOptions::defaults_for(32)
    };
    let n_list = [8usize, 16, 32];
    println!("minimizing for n in {n_list:?} under f = 1 (a minute or two)...\n");
    let report = upscale_experiment(&f, &n_list, &opts).unwrap();
    println!("   n      energy   mean_bdist    max_bdist          W1   angular_disc");
    for r in &report.records {
        println!(
            "{:4}  {:+.6}     {:.6}     {:.6}    {:.6}       {:.6}",
            r.n, r.energy, r.mean_bdist, r.max_bdist, r.w1, r.angular_disc
        );
    }
    println!("\nthe energy magnitude, the distance to the boundary, and the");
    println!("Wasserstein-1 distance to the uniform boundary measure all shrink with n.");
}
