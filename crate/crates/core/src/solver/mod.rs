//! Ground states of the limiting problem and critical points of the penalized
//! problem, plus eps continuation.

mod continuation;
mod descent;
mod limiting;
mod options;
mod penalized;

pub use continuation::{continuation_sweep, continuation_sweep_from, Sweep, SweepStep};
pub use limiting::{nehari_scale, rescale_limiting, solve_limiting};
pub use options::{SolveOptions, SolveResult, TraceRecord};
pub use penalized::{auto_init, rescaled_grid, solve_penalized, warm_start, Init};
