use crate::lattice::Variant;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("lattice size must be at least {min}, got {size}")]
    SizeTooSmall { size: usize, min: usize },
    #[error("{name} must be positive and finite, got {value}")]
    NonPositiveCoupling { name: &'static str, value: f64 },
    #[error("{name} must be finite, got {value}")]
    NonFinite { name: &'static str, value: f64 },
    #[error("operation requires {expected}, got {actual} model")]
    WrongVariant {
        expected: &'static str,
        actual: Variant,
    },
    #[error("e^(N*phi) overflows double range: |phi|*N = {exponent}")]
    FluxOverflow { exponent: f64 },

    #[error("matrix dimension {size} exceeds the eigensolver limit {limit}")]
    MatrixTooLarge { size: usize, limit: usize },
    #[error("matrix contains non-finite entries")]
    NonFiniteMatrix,
    #[error("QR iteration did not converge after {iterations} sweeps (active block ends at row {row})")]
    NoConvergence { iterations: usize, row: usize },

    #[error("Newton refinement did not converge after {iterations} steps (|R| = {residual:e})")]
    NewtonNoConvergence { iterations: usize, residual: f64 },
    #[error("near-degenerate root: |R'(k)| = {derivative:e} at k = {k_re}{k_im:+}i")]
    NearDegenerateRoot {
        k_re: f64,
        k_im: f64,
        derivative: f64,
    },

    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("spectrum is empty")]
    EmptySpectrum,
    #[error("level n = {level} is excluded for N = {size} (must lie in 1..=N, not N/2 or N)")]
    ExcludedLevel { level: usize, size: usize },
    #[error("defect coupling J must be nonzero")]
    ZeroDefect,
    #[error("critical couplings are only defined for N divisible by 4, got {0}")]
    SizeNotMultipleOfFour(usize),
    #[error("bracket [{lo}, {hi}] has the same classification at both ends")]
    InvalidBracket { lo: f64, hi: f64 },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("vector is identically zero")]
    ZeroVector,
    #[error("left and right vectors differ in length ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },
    #[error("left/right overlap sum vanishes")]
    ZeroOverlap,
    #[error("mode index {mode} out of range 1..={size}")]
    ModeOutOfRange { mode: usize, size: usize },
    #[error("only {found} envelope points above the amplitude floor, need {required}")]
    InsufficientPoints { found: usize, required: usize },
}
