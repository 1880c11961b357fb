//! Error type shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong while building operators or propagators.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A caller-supplied parameter is outside its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A matrix expected to be Hermitian is not, within tolerance.
    #[error("matrix is not Hermitian: residual {residual:.3e} exceeds {tol:.3e}")]
    NotHermitian { residual: f64, tol: f64 },

    /// The Jacobi eigensolver hit its sweep cap before converging.
    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {offdiag:.3e})")]
    EigenNoConvergence { sweeps: usize, offdiag: f64 },

    /// Two operands have incompatible dimensions.
    #[error("dimension mismatch: {a} vs {b}")]
    DimensionMismatch { a: usize, b: usize },

    /// Integrator step size violates the stability bound and no override was requested.
    #[error("step size {dt:.3e} exceeds the stability bound {bound:.3e}; set allow_coarse to force")]
    StepTooLarge { dt: f64, bound: f64 },

    /// The drive-renormalization self-consistency equation has no root in [0, 1].
    #[error("self-consistency equation has no root in [0,1]: {0}")]
    XiRootNotFound(String),

    /// Bessel-series argument outside the guarded range.
    #[error("Bessel series argument {x:.3} outside guarded range |x| <= {max:.0}")]
    BesselDomain { x: f64, max: f64 },

    /// The spectral-sum closed form produced an arccos argument outside [-1, 1]
    /// beyond the clamping tolerance, signalling a broken normalization.
    #[error("arccos argument {value:.6} outside [-1,1] beyond clamp tolerance")]
    ArccosDomain { value: f64 },

    /// A block propagator was called with the wrong block kind.
    #[error("wrong block kind: expected {expected}, got {got}")]
    WrongBlockKind {
        expected: &'static str,
        got: &'static str,
    },

    /// The pi-rotation timescale is undefined (zero drive exactly on resonance).
    #[error("pi-rotation timescale undefined: B1 = 0 and omega = Q")]
    UndefinedTimescale,

    /// Generic numerical failure with context.
    #[error("numerical failure: {0}")]
    Numerical(String),
}
