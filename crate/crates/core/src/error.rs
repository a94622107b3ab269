use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// Requested time lies outside `[0, T]`.
    TimeOutOfDomain { t: f64, horizon: f64 },
    /// A supplied or evaluated matrix failed the hermiticity check.
    NonHermitianSample { t: f64, residual: f64 },
    /// Two adjacent levels came closer than the gap floor.
    DegenerateSpectrum { t: f64, gap: f64, floor: f64 },
    /// Adjacent frames disagree too much to pair levels unambiguously.
    LevelTrackingLost { t: f64, level: usize },
    InsufficientGrid { needed: usize, found: usize },
    /// Step-halving disagreed with the coarse run by more than allowed.
    StepTooCoarse { estimate: f64, allowed: f64 },
    NonNormalizedInput { norm: f64 },
    GridMismatch,
    /// The coupling is too small on most of the grid to carry a phase.
    PhaseUndefined { n: usize, m: usize },
    /// The eigensolver returned vectors that do not satisfy `Hv = Ev`.
    EigenResidual { t: f64, residual: f64 },
    ShapeMismatch { expected: usize, found: usize },
    SingularMatrix,
    NonFinite,
    InvalidParameter(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::TimeOutOfDomain { t, horizon } => {
                write!(f, "time {t} outside the domain [0, {horizon}]")
            }
            Error::NonHermitianSample { t, residual } => {
                write!(f, "matrix at t = {t} is not Hermitian (residual {residual:e})")
            }
            Error::DegenerateSpectrum { t, gap, floor } => write!(
                f,
                "degenerate spectrum at t = {t}: gap {gap:e} below floor {floor:e}"
            ),
            Error::LevelTrackingLost { t, level } => {
                write!(f, "lost track of level {level} at t = {t}")
            }
            Error::InsufficientGrid { needed, found } => {
                write!(f, "grid has {found} points, need at least {needed}")
            }
            Error::StepTooCoarse { estimate, allowed } => write!(
                f,
                "step too coarse: refinement error estimate {estimate:e} exceeds {allowed:e}"
            ),
            Error::NonNormalizedInput { norm } => {
                write!(f, "initial state is not normalized (norm {norm})")
            }
            Error::GridMismatch => f.write_str("time grids do not match"),
            Error::PhaseUndefined { n, m } => {
                write!(f, "coupling phase undefined for pair ({n}, {m})")
            }
            Error::EigenResidual { t, residual } => {
                write!(f, "eigendecomposition at t = {t} has residual {residual:e}")
            }
            Error::ShapeMismatch { expected, found } => {
                write!(f, "shape mismatch: expected {expected}, found {found}")
            }
            Error::SingularMatrix => f.write_str("singular matrix"),
            Error::NonFinite => f.write_str("non-finite value encountered"),
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
        }
    }
}

impl core::error::Error for Error {}

impl Error {
    /// True for failures caused by the numerics rather than by bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::DegenerateSpectrum { .. }
                | Error::LevelTrackingLost { .. }
                | Error::StepTooCoarse { .. }
                | Error::EigenResidual { .. }
                | Error::SingularMatrix
                | Error::NonFinite
                | Error::PhaseUndefined { .. }
        )
    }
}
