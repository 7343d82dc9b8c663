use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("bandwidth must lie in (0,1), got {0}")]
    Bandwidth(f64),

    #[error("sample must contain at least one point")]
    EmptySample,

    #[error("sample value outside [0,1]: {0}")]
    SampleRange(f64),

    #[error("evaluation grid must be sorted and contained in [0,1]")]
    Grid,

    #[error("bandwidth rule gives b = {b} outside (0,1) for n = {n}; increase n or decrease c")]
    BandwidthRule { b: f64, n: usize },

    #[error("sawtooth density needs b <= 1/400 so that at least one bump fits, got b = {0}")]
    SawtoothBandwidth(f64),

    #[error("derivative of order {order} is not defined for this density at x = {x}")]
    Derivative { order: usize, x: f64 },

    #[error("quadrature node count must be odd and >= 3, got {0}")]
    QuadratureNodes(usize),

    #[error("quadrature gate failed: refining changed the result by {delta:.3e} (tolerance {tol:.3e})")]
    QuadratureGate { delta: f64, tol: f64 },

    #[error("slope fit needs at least two strictly positive points with a non-degenerate abscissa")]
    SlopeFit,

    #[error("invalid experiment configuration: {0}")]
    Config(String),

    #[error("cannot parse density spec '{0}': expected uniform | linear | cosine:a=<v> | sawtooth:beta=<v>,L=<v>")]
    DensitySpec(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("cannot parse report: {0}")]
    Report(String),
}

pub type Result<T> = std::result::Result<T, Error>;
