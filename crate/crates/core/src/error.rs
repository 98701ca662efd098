use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("rejected input: {0}")]
    RejectedInput(String),

    #[error("unknown nuclide label '{0}'")]
    UnknownNuclide(String),

    #[error("quadrature did not converge: achieved {achieved:.3e}, required {required:.3e} ({context})")]
    QuadratureNonConvergence {
        achieved: f64,
        required: f64,
        context: String,
    },

    #[error("Legendre truncation not converged at l_max={l_max}: residual {residual:.3e}")]
    LegendreTruncation { l_max: usize, residual: f64 },

    #[error("input density not normalized: |integral - 1| = {deviation:.3e}")]
    Unnormalized { deviation: f64 },

    #[error("density invalid: clipped probability mass {clipped:.3e} exceeds 1e-4")]
    ExcessiveClipping { clipped: f64 },

    #[error("no solution: {0}")]
    NoSolution(String),

    #[error("degenerate fit input: {0}")]
    DegenerateFit(String),

    #[error("fit did not converge: {0}")]
    FitNonConvergence(String),

    #[error("dataset error: {0}")]
    Dataset(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
