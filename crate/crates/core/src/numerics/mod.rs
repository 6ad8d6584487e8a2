//! Double-precision evaluation, integration and the numerical checks.

pub mod checks;
pub mod eval;
pub mod export;
pub mod integrate;

pub use checks::{
    backlund_solution_check, scalar_residual_check, path_commutation_check, BacklundReport, ScalarResidualProbe,
    ScalarResiduals,
};
pub use eval::{Evaluator, Scratch};
pub use export::{format_f64, parse_f64, read_csv, read_json, to_csv, to_json, FloatFormat, Table};
pub use integrate::{
    integrate, integrate_field, relative_drift, CompiledField, Guards, Method, Options, Sample, Trajectory,
};
