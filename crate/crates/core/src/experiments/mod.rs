//! Experiments that turn particle runs and mean-field solves into error
//! tables, rate fits and validation reports.
//!
//! Every experiment is a pure function of its configuration and seed.

mod checks;
mod decay;
mod exit;
mod mollify;
mod output;
mod strong;
mod table;
mod weak;

pub use checks::{
    decay_fit, growth_factor, mixed_derivative_series, representation_check_suite, CheckConfig, CheckKind,
    CheckReport, CheckRow,
};
pub use decay::{ergodic_decay_experiment, invariant_measure, DecayConfig, DecayResult, DecayTarget};
pub use exit::{exceedance_non_increasing, exit_time_experiment, ExitConfig, ExitRow};
pub use mollify::{fejer_w1_errors, mollification_errors, stress_set, MollifyRow};
pub use output::{run_id, ResultsDir};
pub use strong::{iid_sobolev_expectation, strong_error_experiment, StrongErrorConfig, StrongErrorReport};
pub use table::{line_fit, rate_fit, ErrorRow, ErrorTable, FitAxis, FitResult};
pub use weak::{level_seed, replicas_at, weak_error_experiment, WeakErrorConfig, WeakErrorReport};
