use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid trap specification: `{field}` must be positive and finite (got {value})")]
    InvalidSpec { field: &'static str, value: f64 },

    #[error("infeasible parameters: {reason} (argument = {argument})")]
    InfeasibleParameters { reason: String, argument: f64 },

    #[error("infeasible duration: tau_f = {tau_f} is below the bang-bang minimum tau_min = {tau_min}")]
    InfeasibleDuration { tau_f: f64, tau_min: f64 },

    #[error("unsupported duration: tau_f = {tau_f} exceeds the longest supported duration {tau_max}")]
    UnsupportedDuration { tau_f: f64, tau_max: f64 },

    #[error("c1 = {c1} exceeds c1_max = {c1_max}: second junction discriminant is negative")]
    C1TooLarge { c1: f64, c1_max: f64 },

    #[error("duration is not monotone in c1 on the bracket [{lo}, {hi}]: T(lo) = {t_lo}, T(hi) = {t_hi}, target {target}")]
    MonotonicityViolation {
        lo: f64,
        hi: f64,
        t_lo: f64,
        t_hi: f64,
        target: f64,
    },

    #[error("Ermakov singularity: scaling factor reached {b} at tau = {tau}")]
    Singularity { tau: f64, b: f64 },

    #[error("Ermakov integration diverged (NaN) at tau = {tau}")]
    Divergence { tau: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("grid error: {0}")]
    Grid(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("probability leak {probability:.3e} at the grid edge exceeds threshold {threshold:.1e} at tau = {tau}")]
    Leak {
        tau: f64,
        probability: f64,
        threshold: f64,
    },

    #[error("norm drift {drift:.3e} exceeds the unitarity tolerance")]
    Unitarity { drift: f64 },

    #[error("range error: {0}")]
    Range(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Exit status used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InfeasibleParameters { .. }
            | Error::InfeasibleDuration { .. }
            | Error::UnsupportedDuration { .. }
            | Error::C1TooLarge { .. } => 2,
            Error::Leak { .. } | Error::Unitarity { .. } => 3,
            _ => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidSpec { .. } => "invalid-spec",
            Error::InfeasibleParameters { .. } => "infeasible-parameters",
            Error::InfeasibleDuration { .. } => "infeasible-duration",
            Error::UnsupportedDuration { .. } => "unsupported-duration",
            Error::C1TooLarge { .. } => "c1-too-large",
            Error::MonotonicityViolation { .. } => "monotonicity-violation",
            Error::Singularity { .. } => "singularity",
            Error::Divergence { .. } => "divergence",
            Error::Domain(_) => "domain",
            Error::Grid(_) => "grid",
            Error::Contract(_) => "contract",
            Error::Leak { .. } => "leak",
            Error::Unitarity { .. } => "unitarity",
            Error::Range(_) => "range",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Config(e.to_string())
    }
}
