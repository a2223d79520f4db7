use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Two objects that must share a dimension do not.
    DimensionMismatch { expected: usize, found: usize },
    /// An argument is outside the domain of the operation.
    InvalidInput(String),
    /// A singular kernel was evaluated on the diagonal.
    CoincidentPoints,
    /// The operation is not defined for this kernel.
    UnsupportedKernel(&'static str),
    /// Minimal pairwise distance fell below the collision threshold.
    Collision { time: f64, min_distance: f64 },
    /// A trajectory left the representable range.
    BlowUp { time: f64 },
    /// An iteration did not reach its tolerance.
    IterationLimit { iterations: usize, deviations: Vec<f64> },
    /// Step-halving validation exceeded the requested local error.
    StepValidation { estimated: f64, tolerance: f64 },
    /// A wave function or density matrix is not normalised.
    Normalization { norm: f64 },
    /// A tensor state would exceed the amplitude budget.
    MemoryGuard { amplitudes: usize, limit: usize },
    /// A matrix expected to be Hermitian is not.
    NotHermitian { defect: f64 },
    /// A dual candidate is not 1-Lipschitz on the supports.
    LipschitzViolation { first: usize, second: usize, quotient: f64 },
    /// Finite differences need a point with neighbours on both sides.
    NeedsInteriorPoint { time: f64 },
}

impl Error {
    /// True for failures of the numerics themselves (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Collision { .. }
                | Error::BlowUp { .. }
                | Error::IterationLimit { .. }
                | Error::StepValidation { .. }
        )
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::CoincidentPoints => f.write_str("singular kernel evaluated at coincident points"),
            Error::UnsupportedKernel(what) => write!(f, "unsupported kernel: {what}"),
            Error::Collision { time, min_distance } => {
                write!(f, "collision at t = {time}: minimal pairwise distance {min_distance:e}")
            }
            Error::BlowUp { time } => write!(f, "solution blew up at t = {time}"),
            Error::IterationLimit { iterations, deviations } => write!(
                f,
                "no convergence after {iterations} iterations (last deviation {:e})",
                deviations.last().copied().unwrap_or(f64::NAN)
            ),
            Error::StepValidation { estimated, tolerance } => {
                write!(f, "step-halving error estimate {estimated:e} exceeds tolerance {tolerance:e}")
            }
            Error::Normalization { norm } => write!(f, "state is not normalised (norm {norm})"),
            Error::MemoryGuard { amplitudes, limit } => {
                write!(f, "{amplitudes} amplitudes exceed the limit of {limit}")
            }
            Error::NotHermitian { defect } => write!(f, "matrix is not Hermitian (defect {defect:e})"),
            Error::LipschitzViolation { first, second, quotient } => write!(
                f,
                "candidate is not 1-Lipschitz: quotient {quotient} between support points {first} and {second}"
            ),
            Error::NeedsInteriorPoint { time } => {
                write!(f, "t = {time} is not an interior point of the time grid")
            }
        }
    }
}

impl core::error::Error for Error {}
