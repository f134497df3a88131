use num_complex::Complex64;
use thiserror::Error;

/// Every failure the library can report.
///
/// Variants map onto two CLI exit classes: configuration errors (exit 2)
/// and numerical failures (exit 3). See [`StabilityError::is_config_error`].
#[derive(Debug, Clone, Error, PartialEq)]
pub enum StabilityError {
    #[error("AlphaOutOfRange: alpha = {0} is not in (1/2, 1]")]
    AlphaOutOfRange(f64),

    #[error("NonMonotoneShear: U' changes sign or vanishes near z = {0}")]
    NonMonotoneShear(f64),

    #[error("DegenerateShear: |U'({0})| is below the evaluation threshold")]
    DegenerateShear(f64),

    #[error("BranchViolation: Im(c) = {0} must be strictly positive")]
    BranchViolation(f64),

    #[error("NotFriedlander: the equilibrium carries no Friedlander parameter alpha")]
    NotFriedlander,

    #[error("NonContractive: successive Neumann terms stopped shrinking (ratio {ratio:.3e}) at term {term}")]
    NonContractive { ratio: f64, term: usize },

    #[error("ToleranceNotReached: {what} after {iterations} iterations (last estimate {last:.3e})")]
    ToleranceNotReached {
        what: &'static str,
        iterations: usize,
        last: f64,
    },

    #[error("ZeroOnContour: |f| = {modulus:.3e} at c = {at} on the contour")]
    ZeroOnContour { at: Complex64, modulus: f64 },

    #[error("RefinementExhausted: phase step {max_phase_step:.3} rad remains after {samples} samples")]
    RefinementExhausted { max_phase_step: f64, samples: usize },

    #[error("NoZeroFound: no dispersion zero in the searched region")]
    NoZeroFound,

    #[error("NotAZero: |dispersion| = {0:.3e} at the supplied phase speed")]
    NotAZero(f64),

    #[error("NoGrowth: dominant growth estimate {0:.3e} shows no exponential instability")]
    NoGrowth(f64),

    #[error("CflViolation: dt = {dt:.3e} exceeds the CFL limit {limit:.3e}")]
    CflViolation { dt: f64, limit: f64 },

    #[error("NoBlowupWithinBudget: threshold {threshold:.3e} not reached by t = {t_final:.3e}")]
    NoBlowupWithinBudget { threshold: f64, t_final: f64 },

    #[error("IncompatibleEps: eps = {eps} is not 1/(l M) for an integer l with M = {m_scale}")]
    IncompatibleEps { eps: f64, m_scale: f64 },

    #[error("InvalidArgument: {0}")]
    InvalidArgument(String),

    #[error("Config: {0}")]
    Config(String),

    #[error("Io: {0}")]
    Io(String),
}

impl StabilityError {
    /// True for errors caused by bad input rather than a numerical breakdown.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            StabilityError::AlphaOutOfRange(_)
                | StabilityError::InvalidArgument(_)
                | StabilityError::Config(_)
                | StabilityError::NotFriedlander
                | StabilityError::IncompatibleEps { .. }
        )
    }
}

impl From<std::io::Error> for StabilityError {
    fn from(e: std::io::Error) -> Self {
        StabilityError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, StabilityError>;
