use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Consecutive tangents point in (nearly) opposite directions: the rod has
    /// kinked and the current step must be rejected.
    #[error("anti-parallel tangents (t_prev . t_next = {dot:.6e})")]
    AntiParallelTangents { dot: f64 },

    #[error("size mismatch for {what}: expected {expected}, found {found}")]
    SizeMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("degenerate centerline: {0}")]
    DegenerateCenterline(String),

    #[error("degenerate segment (zero length)")]
    DegenerateSegment,

    #[error("degenerate triangle (zero area)")]
    DegenerateTriangle,

    #[error("degenerate spline: {0}")]
    DegenerateSpline(String),

    #[error("mesh is not watertight: {0}")]
    NotWatertight(String),

    #[error("step {step} diverged: max displacement {max_displacement:.3e} m exceeds {limit:.3e} m")]
    StepDiverged {
        step: u64,
        max_displacement: f64,
        limit: f64,
    },

    #[error("coil stuck at t = {time:.4} s: front node advanced {advance:.3e} m over the window, expected at least {expected:.3e} m")]
    CoilStuck {
        time: f64,
        advance: f64,
        expected: f64,
    },

    #[error("point {index} at {point:?} lies outside the lattice")]
    OutOfBounds { index: usize, point: [f64; 3] },

    #[error("lattice mismatch: {0}")]
    LatticeMismatch(String),

    #[error("neck not defined: {0}")]
    NeckNotDefined(String),

    #[error("bin {bin} holds {count} samples, at least {min} required")]
    InsufficientSamples { bin: usize, count: usize, min: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("mesh format error: {0}")]
    MeshFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
