use thiserror::Error;

pub type Result<T> = std::result::Result<T, Spin7Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Spin7Error {
    #[error("form degree mismatch: {left} vs {right}")]
    DegreeMismatch { left: usize, right: usize },

    #[error("degenerate 4-form: {0}")]
    Degenerate(String),

    #[error("matrix is not skew-symmetric (defect {0:e})")]
    NotSkew(f64),

    #[error("singular frame change (|det R| = {0:e})")]
    Singular(f64),

    #[error("point is off the unit sphere (f^2 + |X|^2 - 1 = {0:e})")]
    OffSphere(f64),

    #[error("spinor component must be imaginary (X_0 = {0:e})")]
    NotImaginary(f64),

    #[error("inadmissible 4-form: {0}")]
    Inadmissible(String),

    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("incompatible lattices: {0}")]
    IncompatibleLattice(String),

    #[error("sample time {t} is not before the centre time {t0}")]
    NotBeforeCentre { t: f64, t0: f64 },

    #[error("run observer failed: {0}")]
    Observer(String),

    #[error("non-finite value detected at step {step} (last good step {last_good_step})")]
    NonFinite { step: u64, last_good_step: u64 },
}
