//! Crate-wide error type with an exit-code family per variant.

use thiserror::Error;

/// Coarse classification used for process exit codes and FFI status codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorFamily {
    /// Bad input: malformed config, invalid geometry, unsupported request.
    Validation,
    /// The algorithm ran but could not reach its target accuracy.
    Numerical,
    /// A documented precondition of an operation was violated.
    Precondition,
}

impl ErrorFamily {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorFamily::Validation => 2,
            ErrorFamily::Numerical => 3,
            ErrorFamily::Precondition => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ErrorFamily::Validation => "validation",
            ErrorFamily::Numerical => "numerical",
            ErrorFamily::Precondition => "precondition",
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    // ---- validation ----
    #[error("invalid region: {0}")]
    InvalidRegion(String),
    #[error("invalid contour: {0}")]
    InvalidContour(String),
    #[error("invalid domain spec: {0}")]
    InvalidDomain(String),
    #[error("invalid polynomial or rational data: {0}")]
    InvalidFunction(String),
    #[error("invalid moebius map: coefficient matrix is singular")]
    InvalidMoebius,
    #[error("invalid tolerance {value}: allowed range [{min}, {max}]")]
    InvalidTolerance { value: f64, min: f64, max: f64 },
    #[error("config error: {0}")]
    Config(String),
    #[error("unsupported domain: {0}")]
    UnsupportedDomain(String),
    #[error("empty region: no sample points at the requested resolution")]
    EmptyRegion,
    #[error("too few samples: {got} provided, at least {need} required")]
    TooFewSamples { got: usize, need: usize },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    // ---- numerical ----
    #[error("root finding did not converge within the iteration cap")]
    NoConvergenceRoots,
    #[error("newton iteration did not converge: residual {residual:.3e} after {iterations} steps")]
    NoConvergenceNewton { residual: f64, iterations: usize },
    #[error("least-squares system ill-conditioned: cond = {cond:.3e}")]
    IllConditioned { cond: f64 },
    #[error("degree cap {cap} exceeded: best certified error {best_error:.3e}")]
    DegreeCapExceeded { cap: usize, best_error: f64 },
    #[error("jacobian singular or near-singular: cond = {cond:.3e}")]
    SingularJacobian { cond: f64 },
    #[error("winding quadrature inconclusive: residual {residual:.3e} (raise node count)")]
    QuadratureInconclusive { residual: f64 },
    #[error("ode step size underflow at path position {position:.6e}")]
    StepUnderflow { position: f64 },
    #[error("non-finite value from evaluator at z = {at}")]
    NonFiniteValue { at: num_complex::Complex64 },

    // ---- precondition ----
    #[error("point lies on the contour")]
    PointOnContour,
    #[error("pole of the integrand lies on the contour")]
    PoleOnContour,
    #[error("target function is non-finite on a fit sample at z = {at}")]
    TargetNonFinite { at: num_complex::Complex64 },
    #[error("function has a zero or pole on the compact set at z = {at}")]
    ZeroOnCompact { at: num_complex::Complex64 },
    #[error("nonzero winding {winding} around hole {hole} but no puncture available there")]
    WindingMismatch { winding: i32, hole: usize },
    #[error("function is constant; operation undefined")]
    ConstantFunction,
    #[error("zero of f' or pole of f within {dist:.3e} of the region boundary")]
    BoundaryDegeneracy { dist: f64 },
    #[error("function is not locally univalent on the region")]
    NotLocallyUnivalent,
    #[error("pieces overlap or touch")]
    OverlappingPieces,
    #[error("complement of the compact set is not connected")]
    ComplementNotConnected,
    #[error("solutions were computed along different paths")]
    PathMismatch,
    #[error("frame degenerate: wronskian magnitude {wronskian:.3e} below 1e-12")]
    DegenerateFrame { wronskian: f64 },
    #[error("grid has fewer than {need} interior cells ({got})")]
    InsufficientInterior { got: usize, need: usize },
    #[error("point outside the unit disk where the hyperbolic density is defined")]
    OutsideDisk,
    #[error("map leaves the target geometry at z = {at}")]
    RangeEscape { at: num_complex::Complex64 },
    #[error("critical point of the map at z = {at}")]
    CriticalPoint { at: num_complex::Complex64 },
    #[error("target density not positive at z = {at}")]
    NonPositiveTarget { at: num_complex::Complex64 },
    #[error("translation stride {stride} too small: regions overlap")]
    Overlap { stride: f64 },
    #[error("probe image lies on the mapped boundary; cannot certify injectivity")]
    ProbeOnBoundary,
    #[error("stage images are not pairwise separable with the required gap")]
    StagesNotSeparable,
}

impl Error {
    pub fn family(&self) -> ErrorFamily {
        use Error::*;
        match self {
            InvalidRegion(_) | InvalidContour(_) | InvalidDomain(_) | InvalidFunction(_)
            | InvalidMoebius | InvalidTolerance { .. } | Config(_) | UnsupportedDomain(_)
            | EmptyRegion | TooFewSamples { .. } | Io(_) => ErrorFamily::Validation,

            NoConvergenceRoots
            | NoConvergenceNewton { .. }
            | IllConditioned { .. }
            | DegreeCapExceeded { .. }
            | SingularJacobian { .. }
            | QuadratureInconclusive { .. }
            | StepUnderflow { .. }
            | NonFiniteValue { .. } => ErrorFamily::Numerical,

            PointOnContour | PoleOnContour | TargetNonFinite { .. } | ZeroOnCompact { .. }
            | WindingMismatch { .. } | ConstantFunction | BoundaryDegeneracy { .. }
            | NotLocallyUnivalent | OverlappingPieces | ComplementNotConnected | PathMismatch
            | DegenerateFrame { .. } | InsufficientInterior { .. } | OutsideDisk
            | RangeEscape { .. } | CriticalPoint { .. } | NonPositiveTarget { .. }
            | Overlap { .. } | ProbeOnBoundary | StagesNotSeparable => ErrorFamily::Precondition,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
