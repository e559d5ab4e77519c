use thiserror::Error;

pub type Result<T> = std::result::Result<T, DesignError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DesignError {
    #[error("invalid factorial spec: {0}")]
    InvalidSpec(String),

    #[error("invalid treatment {treatment:?}: {reason}")]
    InvalidTreatment { treatment: Vec<usize>, reason: String },

    #[error("degenerate pair: both members are {0:?}")]
    DegeneratePair(Vec<usize>),

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("length mismatch: expected {expected}, got {actual} ({what})")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("invalid design measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid exact design: {0}")]
    InvalidDesign(String),

    #[error("information matrix is singular (pivot {pivot:.3e} at column {column})")]
    SingularInformation { column: usize, pivot: f64 },

    #[error("multiplicative algorithm did not converge after {iterations} iterations (gap {gap:.3e})")]
    NonConvergence { iterations: usize, gap: f64 },

    #[error("cannot step down: every candidate deletion from a {slides}-slide design is singular")]
    CannotStepDown { slides: usize },

    #[error("construction failed: {0}")]
    ConstructionFailure(String),

    #[error("dye effect confounds the treatment effects (dye-adjusted information is singular)")]
    DyeConfounded,

    #[error("incomplete variance profile: {0}")]
    IncompleteProfile(String),
}

impl DesignError {
    /// True for failures of the numerical pipeline as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            DesignError::SingularInformation { .. }
                | DesignError::NonConvergence { .. }
                | DesignError::CannotStepDown { .. }
                | DesignError::ConstructionFailure(_)
                | DesignError::DyeConfounded
        )
    }
}
