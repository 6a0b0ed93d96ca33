use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid quench spec: {0}")]
    InvalidSpec(String),

    #[error("coupling g = {0} lies outside the normal phase [0, 1]")]
    InvalidCoupling(f64),

    #[error("invalid integrator config: {0}")]
    InvalidConfig(String),

    /// The hyperbolic normalization drifted past the configured threshold,
    /// which means the step is too coarse for this quench.
    #[error("|u|^2 - |v|^2 - 1 drifted to {drift:e} at omega*t = {omega_t} (tolerance {tolerance:e})")]
    ConstraintViolation {
        drift: f64,
        omega_t: f64,
        tolerance: f64,
    },

    #[error("adaptive step collapsed to {step:e} at omega*t = {omega_t}")]
    StepUnderflow { step: f64, omega_t: f64 },

    #[error("outside the domain of validity: {0}")]
    Domain(String),

    #[error("root finding did not converge: {0}")]
    ConvergenceFailure(String),

    #[error("dispersion must be positive, got sigma = {0}")]
    InvalidDispersion(f64),

    #[error("disorder model rejected: {0}")]
    InvalidModel(String),

    #[error("delta = {delta} is outside the support of the disorder channel")]
    OutOfSupport { delta: f64 },

    #[error("invalid averaging scheme: {0}")]
    InvalidScheme(String),

    #[error("need at least 3 points inside the fit window, found {0}")]
    InsufficientData(usize),

    #[error("energy {energy:e} at omega*tau = {omega_tau} is not positive, log undefined")]
    NonPositiveEnergy { omega_tau: f64, energy: f64 },

    #[error("realization delta = {delta}, omega*tau = {omega_tau}: {source}")]
    Realization {
        delta: f64,
        omega_tau: f64,
        #[source]
        source: Box<Error>,
    },
}
