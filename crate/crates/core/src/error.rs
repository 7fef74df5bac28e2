//! Error type shared by all numerical operations.

use alloc::string::String;

/// Errors reported by construction, decomposition, and quadrature routines.
///
/// Gate failures of the perturbation bounds are *not* errors; they are
/// recorded as precondition flags inside [`crate::bounds::BoundReport`].
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Matrix entries must be finite.
    NonFiniteEntry { row: usize, col: usize },
    /// The input was not exactly symmetric.
    NotSymmetric { row: usize, col: usize },
    /// A dimension was zero or two operands disagreed on size.
    DimensionMismatch { expected: usize, got: usize },
    /// Jacobi sweeps hit the iteration cap before the off-diagonal norm
    /// fell below the convergence threshold.
    EigenNonConvergence { off_diagonal_norm: f64 },
    /// An index set was empty or referenced an index outside `1..=n`.
    InvalidIndexSet { index: usize, n: usize },
    /// Eigenvalues handed to `singular_order` were not sorted descending.
    NotDescending { position: usize },
    /// An eigenvector basis failed the orthonormality tolerance.
    NotOrthonormal { residual: f64 },
    /// `p` (or `k`) was outside the range the operation supports.
    InvalidRank { p: usize, n: usize },
    /// A functional was evaluated at an eigenvalue where it is not finite.
    NonFiniteFunctional { eigenvalue: f64 },
    /// The gap needed to place a contour edge was zero.
    DegenerateGap { p: usize },
    /// The contour construction preconditions (sign pattern, split
    /// validity) were not met.
    InvalidSplit(String),
    /// The evaluation point is too close to the spectrum.
    NearEigenvalue { distance: f64, limit: f64 },
    /// Quadrature hit its node cap before successive refinements agreed.
    QuadratureNoConvergence { nodes: usize, last_delta: f64 },
    /// A contour integral of a real functional produced an imaginary part
    /// beyond the accepted residue, typically because an eigenvalue sits too
    /// close to the contour.
    ExcessImaginaryResidue { residue: f64, limit: f64 },
    /// The contour clears the spectrum by less than the required margin.
    ClearanceViolation { min_distance: f64, required: f64 },
    /// The hypotheses of the closed-form integral estimate (`0 < a <= T`)
    /// were violated.
    InvalidIntegralParams { a: f64, t: f64 },
    /// Matrix text parse failure with a line number.
    Parse { line: usize, message: String },
}

impl core::fmt::Display for Error {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Error::NonFiniteEntry { row, col } => {
                write!(f, "non-finite entry at ({row}, {col})")
            }
            Error::NotSymmetric { row, col } => {
                write!(f, "entries ({row}, {col}) and ({col}, {row}) differ")
            }
            Error::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Error::EigenNonConvergence { off_diagonal_norm } => write!(
                f,
                "eigensolver did not converge; residual off-diagonal norm {off_diagonal_norm:e}"
            ),
            Error::InvalidIndexSet { index, n } => {
                write!(f, "index {index} outside 1..={n} (or empty set)")
            }
            Error::NotDescending { position } => {
                write!(f, "eigenvalues not sorted descending at position {position}")
            }
            Error::NotOrthonormal { residual } => {
                write!(f, "eigenvector basis off orthonormal by {residual:e}")
            }
            Error::InvalidRank { p, n } => write!(f, "rank {p} out of range for n = {n}"),
            Error::NonFiniteFunctional { eigenvalue } => {
                write!(f, "functional not finite at eigenvalue {eigenvalue}")
            }
            Error::DegenerateGap { p } => write!(f, "eigenvalue gap at p = {p} is zero"),
            Error::InvalidSplit(msg) => write!(f, "invalid positive/negative split: {msg}"),
            Error::NearEigenvalue { distance, limit } => write!(
                f,
                "evaluation point within {distance:e} of the spectrum (limit {limit:e})"
            ),
            Error::QuadratureNoConvergence { nodes, last_delta } => write!(
                f,
                "quadrature not converged after {nodes} nodes (last delta {last_delta:e})"
            ),
            Error::ExcessImaginaryResidue { residue, limit } => write!(
                f,
                "imaginary residue {residue:e} exceeds accepted {limit:e}"
            ),
            Error::ClearanceViolation {
                min_distance,
                required,
            } => write!(
                f,
                "contour clearance {min_distance:e} below required {required:e}"
            ),
            Error::InvalidIntegralParams { a, t } => {
                write!(f, "integral estimate requires 0 < a <= T, got a = {a}, T = {t}")
            }
            Error::Parse { line, message } => write!(f, "parse error on line {line}: {message}"),
        }
    }
}

impl core::error::Error for Error {}
