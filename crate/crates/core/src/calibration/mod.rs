//! Parameter estimation for the settling and dispersion models.

mod dispersion;
mod nelder_mead;
mod settling;

pub use dispersion::{
    e_disp, fit_dispersion, profile_error, sample_state, validate_data, DispersionEvaluation, DispersionFit,
    DispersionFitOptions, DispersionMode, EvaluationRecord, SteadyDataPoint,
};
pub use nelder_mead::{nelder_mead, NelderMeadResult, ObjectiveSpec};
pub use settling::{fit_settling, sse_batch, SettlingFit, SETTLING_NAMES};
