use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("field is in {found} space, operation needs {expected} space")]
    SpaceMismatch {
        expected: &'static str,
        found: &'static str,
    },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dilated lattice leaves the box: needs |x| up to {reach:.6}, box half-width is {half_width:.6}")]
    DilationOutsideBox { reach: f64, half_width: f64 },

    #[error("operation undefined for the zero field")]
    ZeroField,

    #[error("non-finite sample encountered after t = {last_good_time}")]
    BlowUp { last_good_time: f64 },

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("scattering state not converged: Cauchy gap {gap:.3e} exceeds tolerance {tol:.3e}; run to a longer final time")]
    NotConverged { gap: f64, tol: f64 },

    #[error("time-frequency lattice misses {fraction:.3e} of the energy ({axis} direction)")]
    Coverage { axis: &'static str, fraction: f64 },

    #[error("fit failed: {0}")]
    Fit(String),
}

pub type Result<T> = std::result::Result<T, Error>;
