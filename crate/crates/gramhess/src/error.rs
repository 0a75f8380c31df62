use core::fmt;

/// Errors reported by the library.
///
/// Contract violations (dimension mismatches, non-symmetric input where
/// symmetry is required, …) and domain failures (singular Gramian,
/// off-manifold points) are kept apart so callers can map them to
/// different exit paths.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A vector or matrix does not have the expected dimension.
    DimensionMismatch { expected: usize, actual: usize },
    /// A scalar parameter is outside its admissible range.
    InvalidParameter(&'static str),
    /// The Gramian determinant fell below the scale-aware singularity
    /// guard; the point is outside the regular region of the constraints.
    SingularGramian { det: f64, tol: f64 },
    /// A point failed the on-manifold invariants by `defect`.
    OffManifold { defect: f64 },
    /// A supposed tangent vector has a non-negligible component along a
    /// constraint gradient.
    NotTangent { index: usize, dot: f64 },
    /// The supplied basis vectors are linearly dependent.
    DependentBasis,
    /// A matrix that must be symmetric is not, by `defect`.
    NotSymmetric { defect: f64 },
    /// A matrix that must be antisymmetric is not, by `defect`.
    NotAntisymmetric { defect: f64 },
    /// A quaternion that must have unit norm does not (no silent
    /// normalization is performed).
    NotUnitQuaternion { norm_sq: f64 },
    /// The critical-set polynomial has no real positive roots at `alpha`.
    NoPositiveRoots { alpha: f64 },
    /// A point that must be critical for the cost has residual `residual`.
    NotCriticalPoint { residual: f64 },
    /// Two routes that must agree numerically did not.
    OracleMismatch { expected: f64, actual: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { expected, actual } => {
                write!(f, "dimension mismatch: expected {expected}, got {actual}")
            }
            Error::InvalidParameter(what) => write!(f, "invalid parameter: {what}"),
            Error::SingularGramian { det, tol } => {
                write!(f, "singular Gramian: det {det:e} below guard {tol:e}")
            }
            Error::OffManifold { defect } => {
                write!(f, "point is off the manifold (defect {defect:e})")
            }
            Error::NotTangent { index, dot } => {
                write!(f, "basis vector {index} is not tangent (residual {dot:e})")
            }
            Error::DependentBasis => write!(f, "basis vectors are linearly dependent"),
            Error::NotSymmetric { defect } => {
                write!(f, "matrix is not symmetric (defect {defect:e})")
            }
            Error::NotAntisymmetric { defect } => {
                write!(f, "matrix is not antisymmetric (defect {defect:e})")
            }
            Error::NotUnitQuaternion { norm_sq } => {
                write!(f, "quaternion is not unit (|q|^2 = {norm_sq})")
            }
            Error::NoPositiveRoots { alpha } => {
                write!(f, "no real positive roots at alpha = {alpha}")
            }
            Error::NotCriticalPoint { residual } => {
                write!(f, "point is not critical (residual {residual:e})")
            }
            Error::OracleMismatch { expected, actual } => {
                write!(f, "cross-check failed: expected {expected}, got {actual}")
            }
        }
    }
}

impl core::error::Error for Error {}
