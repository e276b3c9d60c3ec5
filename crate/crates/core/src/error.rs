use core::fmt;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Vector norm below 1e-12; cannot be normalized.
    ZeroVector,
    /// Operand dimensions disagree.
    DimensionMismatch { expected: usize, found: usize },
    /// Norm deviates from 1 by more than the silent-renormalization window.
    NotNormalized { norm: f64 },
    /// Operator is not Hermitian within tolerance.
    NotHermitian { max_deviation: f64 },
    /// A parameter violates its documented constraint.
    InvalidParam(&'static str),
    /// An expectation value carried an imaginary part above the residue threshold.
    ImaginaryResidue { component: usize, residue: f64 },
    /// Polar coordinates are undefined: one of the radii is below the pole threshold.
    PolarSingularity { r1: f64, r2: f64 },
    /// The integrator produced NaN or infinity.
    NonFinite { t: f64 },
    /// Initial radius lies outside the neighborhood r1 < sqrt(3)/2.
    OutOfNeighborhood { r1: f64 },
    /// The vector field vanishes at every supplied sample.
    DegenerateSample,
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::ZeroVector => f.write_str("vector has zero norm"),
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::NotNormalized { norm } => write!(f, "state norm {norm} is not 1"),
            Error::NotHermitian { max_deviation } => {
                write!(f, "operator is not Hermitian (max deviation {max_deviation:e})")
            }
            Error::InvalidParam(what) => write!(f, "invalid parameter: {what}"),
            Error::ImaginaryResidue { component, residue } => {
                write!(f, "expectation value {component} has imaginary residue {residue:e}")
            }
            Error::PolarSingularity { r1, r2 } => {
                write!(f, "polar coordinates singular at r1={r1:e}, r2={r2:e}")
            }
            Error::NonFinite { t } => write!(f, "non-finite state at t={t}"),
            Error::OutOfNeighborhood { r1 } => {
                write!(f, "r1={r1} lies outside the neighborhood r1 < sqrt(3)/2")
            }
            Error::DegenerateSample => f.write_str("vector field vanishes at every sample"),
        }
    }
}

impl core::error::Error for Error {}
