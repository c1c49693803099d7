use thiserror::Error;

/// Errors produced by the wave, operator and stability computations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("modulus k = {0} outside the admissible range {1}")]
    Domain(f64, &'static str),

    #[error("complete elliptic integral K(k) diverges at k = 1")]
    Divergent,

    #[error("degenerate wave family at k = {0}")]
    DegenerateFamily(f64),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("change of variables is not invertible (monotonicity margin {margin:.3e})")]
    NotInvertible { margin: f64 },

    #[error("eigensolver did not converge after {iterations} iterations ({context})")]
    NoConvergence {
        iterations: usize,
        context: &'static str,
    },

    #[error("right-hand side has a kernel component {component:.3e} above tolerance {tolerance:.1e}")]
    KernelComponent { component: f64, tolerance: f64 },

    #[error("operator signature mismatch: {0}")]
    Signature(String),

    #[error("Wronskian {0:.3e} is numerically zero")]
    DegenerateWronskian(f64),

    #[error("cross-validation failed: {method_a} = {a:.12e}, {method_b} = {b:.12e} (relative discrepancy {discrepancy:.3e})")]
    CrossValidation {
        method_a: &'static str,
        a: f64,
        method_b: &'static str,
        b: f64,
        discrepancy: f64,
    },

    #[error("shift-invert matrix singular for every tried shift")]
    SingularShift,

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("refusing to write an empty record set to {0}")]
    EmptyRecords(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("config: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Stable snake_case name of the variant, used in machine-readable diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(..) => "domain",
            Error::Divergent => "divergent",
            Error::DegenerateFamily(_) => "degenerate_family",
            Error::Parameter(_) => "parameter",
            Error::NotInvertible { .. } => "not_invertible",
            Error::NoConvergence { .. } => "no_convergence",
            Error::KernelComponent { .. } => "kernel_component",
            Error::Signature(_) => "signature",
            Error::DegenerateWronskian(_) => "degenerate_wronskian",
            Error::CrossValidation { .. } => "cross_validation",
            Error::SingularShift => "singular_shift",
            Error::Hypothesis(_) => "hypothesis",
            Error::Dimension(_) => "dimension",
            Error::Verification(_) => "verification",
            Error::EmptyRecords(_) => "empty_records",
            Error::Io { .. } => "io",
            Error::Csv { .. } => "csv",
            Error::Json(_) => "json",
            Error::Config(_) => "config",
        }
    }
}
