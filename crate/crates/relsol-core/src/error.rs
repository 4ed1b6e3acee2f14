//! Error type shared by every module of the crate.

/// Everything that can go wrong in grid construction, solvers,
/// eigen-iterations, evolution, and persistence.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("grid size must be a positive even integer, got {n}")]
    GridSize { n: usize },

    #[error("grid length must be positive and finite, got {length}")]
    GridLength { length: f64 },

    #[error("fields live on different grids: (L={left_length}, N={left_n}) vs (L={right_length}, N={right_n})")]
    GridMismatch {
        left_length: f64,
        left_n: usize,
        right_length: f64,
        right_n: usize,
    },

    #[error("value vector has {actual} samples but the grid has {expected} points")]
    FieldLength { expected: usize, actual: usize },

    #[error("multiplier symbol is not finite at xi = {xi}")]
    NonFiniteSymbol { xi: f64 },

    #[error("symbol bound `{bound}` violated at xi = {xi} (c = {c}, delta = {delta}, margin = {margin:.3e})")]
    SymbolBound {
        bound: &'static str,
        xi: f64,
        c: f64,
        delta: f64,
        margin: f64,
    },

    #[error("{name} = {value} violates the constraint {constraint}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        constraint: String,
    },

    #[error("domain too small for the requested decay: boundary amplitude is {ratio:.3e} of the peak (tolerance {tol:.1e}); enlarge L")]
    BoundaryDecay { ratio: f64, tol: f64 },

    #[error("fixed-point iteration did not converge after {iterations} steps; last stabilizing quotients {quotient_trace:?}")]
    PetviashviliDiverged {
        iterations: usize,
        quotient_trace: Vec<f64>,
    },

    #[error("mass is not monotone across the multiplier bracket [{mu_lo}, {mu_hi}] (masses {mass_lo:.6e}, {mass_hi:.6e}); try the gradient-flow solver")]
    MassNotMonotone {
        mu_lo: f64,
        mu_hi: f64,
        mass_lo: f64,
        mass_hi: f64,
    },

    #[error("mass target {target} is not enclosed by the multiplier bracket [{mu_lo}, {mu_hi}] (masses [{mass_lo:.6e}, {mass_hi:.6e}]); widen mu_bracket or try the gradient-flow solver")]
    MassBracket {
        target: f64,
        mu_lo: f64,
        mu_hi: f64,
        mass_lo: f64,
        mass_hi: f64,
    },

    #[error("iterate left the admissible kinetic ball: |sqrtHc u| = {norm:.6e} > {bound:.6e}")]
    KineticBall { norm: f64, bound: f64 },

    #[error("flow stagnated: residual {residual:.3e} above tolerance {tol:.1e} after {iterations} iterations")]
    FlowStagnation {
        residual: f64,
        tol: f64,
        iterations: usize,
    },

    #[error("converged profile left the euler-lagrange residual {residual:.3e} above tolerance {tol:.1e}; refine the grid or loosen tol_residual")]
    ResidualAboveTolerance { residual: f64, tol: f64 },

    #[error("eigenvalue iteration did not converge after {iterations} steps; Ritz history tail {history:?}")]
    EigNonConvergence { iterations: usize, history: Vec<f64> },

    #[error("correlation peak is degenerate (|G|max = {peak:.3e} against norm scale {scale:.3e}); modulation parameters are undefined")]
    DegeneratePeak { peak: f64, scale: f64 },

    #[error("spectral tail carries a fraction {fraction:.3e} of the energy (tolerance {tol:.1e}); field is not resolved well enough to resample")]
    SpectralTail { fraction: f64, tol: f64 },

    #[error("snapshot payload of {bytes} bytes is not 16 * N = {expected} (N = {n} complex samples)")]
    SnapshotLength {
        bytes: usize,
        expected: usize,
        n: usize,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
