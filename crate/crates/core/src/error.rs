use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("g comes within {min:.3e} of zero (grid resolution {resolution:.3e})")]
    NearZeroCrossing { min: f64, resolution: f64 },

    #[error("unreliable winding number: raw value {raw:.6} (residual {residual:.3e})")]
    UnreliableWinding { raw: f64, residual: f64 },

    #[error("degenerate parametrization: jacobian vanishes at sample {index}")]
    DegenerateParametrization { index: usize },

    #[error("theta_0 vanishes at component {component}, sample {index} (|lambda_0| = {modulus:.3e})")]
    ThetaDivision { component: usize, index: usize, modulus: f64 },

    #[error("not an embedding: samples {a:?} and {b:?} (component, index) are {distance:.3e} apart")]
    NotAnEmbedding { a: (usize, usize), b: (usize, usize), distance: f64 },

    #[error("ambiguous DN response on component {component}: sup {sup:.3e}")]
    AmbiguousResponse { component: usize, sup: f64 },

    #[error("xi = {xi} too close to the boundary image: distance {distance:.3e} < {threshold:.3e}")]
    XiTooClose { xi: Complex64, distance: f64, threshold: f64 },

    #[error("line {which} vanishes near the boundary image (distance {distance:.3e})")]
    LineTooClose { which: &'static str, distance: f64 },

    #[error("xi = {xi} unresolved by the boundary grid: estimated moment error {estimate:.3e}")]
    Unresolved { xi: Complex64, estimate: f64 },

    #[error("ill-conditioned nodes (condition {0:.3e}); choose another node grid")]
    IllConditioned(f64),

    #[error("no fiber size up to {p_max} fits the moments; residuals by p: {residuals:?}")]
    EstimateFailed { p_max: usize, residuals: Vec<f64> },

    #[error("root iteration did not converge after {iterations} steps (residual {residual:.3e})")]
    RootFailure { iterations: usize, residual: f64 },

    #[error("branch collision near xi = {xi} after {halvings} step halvings")]
    BranchCollision { xi: Complex64, halvings: usize },

    #[error("ill-posed fiber: rank {rank} of {cols} unknowns")]
    IllPosedFiber { rank: usize, cols: usize },

    #[error("not a {p}-shock trace: residual {residual:.3e}")]
    NotShockTrace { p: usize, residual: f64 },

    #[error("degenerate shock polynomial: discriminant vanishes to truncation order")]
    DegenerateDiscriminant,

    #[error("G is affine in xi_0 to truncation order")]
    AffineInput,

    #[error("truncation order {order} below required {required}")]
    TruncationTooLow { order: usize, required: usize },

    #[error("not affine-decomposable: fit residual {0:.3e}")]
    NotAffineDecomposable(f64),

    #[error("unknown scenario '{0}'")]
    UnknownScenario(String),

    #[error("not implemented for {0}")]
    NotImplemented(String),

    #[error("point {0} is not in the exterior of the domain")]
    Placement(Complex64),

    #[error("offset {eps:.3e} below grid resolution {resolution:.3e}")]
    Resolution { eps: f64, resolution: f64 },

    #[error("scenario invariant violated: {0}")]
    Scenario(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
