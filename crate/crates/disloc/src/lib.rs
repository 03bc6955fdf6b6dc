//! Renormalized energy of screw dislocations in the unit disk.
//!
//! The crate evaluates the rescaled renormalized energy of `n` dislocations
//! under a prescribed boundary strain through an exact spectral formulation,
//! cross-checks it against a slow quadrature oracle, minimizes it with a
//! barrier-aware multistart descent, evaluates the continuum limit functional
//! on limit measures, and runs the upscaling experiments that exhibit
//! boundary concentration of minimizers.
//!
//! See the `examples/` directory for one runnable example per capability and
//! the `disloc` binary for the file-driven command-line interface.

pub mod cli;
pub mod diagnostics;
pub mod disk;
pub mod energy;
mod error;
pub mod limit;
pub mod optimize;
pub mod oracle;
pub(crate) mod quad;
pub(crate) mod transport;

pub use disk::{
    adaptive_order, dist_to_boundary, log_trace_coeffs, normal_derivative_log_coeffs, pairing,
    solve_neumann, Domain, FourierSeries, NeumannSolution, Point,
};
pub use energy::{
    gradient, log_interaction, phi_normal_derivative, phi_trace, renormalized_energy,
    BoundaryDatum, EnergyBreakdown, PointConfig,
};
pub use error::{Error, Result};
pub use limit::{
    hminus1_distance, limit_energy, limit_energy_quadrature, limiting_boundary_measure,
    newtonian_potential, piecewise_constant_approx, recovery_sequence, GridCell, LimitMeasure,
    PotentialField,
};
pub use optimize::{minimize, multistart, MinimizeOptions, MinimizeTrace, StopReason, TraceRow};
