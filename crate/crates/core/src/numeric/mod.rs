//! Steady states, dose-response curves and empirical verdicts.

mod solver;
mod sweep;
mod verdict;

pub use solver::{find_steady_state, SolverContext, SolverOptions, SteadyState};
pub use sweep::{
    check_well_defined, check_well_defined_detailed, dose_response, sample_compatibility_class, shifted, sweep_states,
    DoseResponseCurve, GridError, LambdaGrid, WellDefinedness, DEFAULT_SEED,
};
pub use verdict::{empirical_verdict, log_log_slope, EmpiricalVerdict, VerdictKind, VerdictOptions};
