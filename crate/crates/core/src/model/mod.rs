//! Problem data (potential, regions, exponents), the energy functionals, the
//! penalized nonlinearity, penalization potentials and barrier functions.

mod functional;
mod params;
mod penalization;

pub use functional::{
    euler_lagrange_residual, limiting_energy, limiting_residual, original_energy, penalized_G, penalized_energy,
    penalized_g, Instance, LimitingParts, LimitingProblem,
};
pub use params::{
    validate_params, HlsConstants, PotentialKind, PotentialSpec, ProblemParams, Regime, RegimeReason, RegionSpec,
    VanishingZero,
};
pub use penalization::{
    build_barrier, build_penalization, hardy_quotient, hardy_ratio, measure_nu, Barrier, PenaltyCase, Penalization,
    RadialWeight,
};
