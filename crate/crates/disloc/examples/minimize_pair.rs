//! Minimize the two-dislocation energy by seeded multistart descent and
//! compare with the closed-form antipodal minimizer at radius 5^{-1/4}.
//!
//! Run with: cargo run --release --example minimize_pair

use disloc::{multistart, BoundaryDatum, MinimizeOptions, Point};
use std::f64::consts::PI;

fn main() {
    let datum = BoundaryDatum::uniform();
    let opts = MinimizeOptions {
        seed: 7,
        ..MinimizeOptions::defaults_for(2)
    };
    let (config, trace) = multistart(2, &datum, &opts).unwrap();

    println!("final configuration:");
    for p in config.points() {
        println!("  ({:+.8}, {:+.8})   radius {:.8}", p.x, p.y, p.norm());
    }
    let r_star = 5f64.powf(-0.25);
    let e_star = -0.5 * PI * (8f64.ln() - 1.25 * 5f64.ln());
    let last = trace.final_row();
    println!("predicted radius  5^(-1/4) = {r_star:.8}");
    println!("final energy      {:+.10}", last.total);
    println!("predicted energy  {e_star:+.10}");
    println!(
        "stopped after {} accepted steps with gradient sup-norm {:.2e} ({:?})",
        last.iter, last.grad_norm, trace.stop
    );
    let opposite = Point::new(-config.points()[1].x, -config.points()[1].y);
    println!(
        "antipodal defect: |a1 + a2| = {:.2e}",
        config.points()[0].dist(opposite)
    );
}
