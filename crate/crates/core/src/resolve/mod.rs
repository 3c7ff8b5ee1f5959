//! Desingularization of the wild quotient chart: Tjurina modification,
//! elimination to a hypersurface, point blow-ups, and divisor bookkeeping.

mod chart;
mod fp;
mod ops;
mod points;
mod state;

#[cfg(test)]
mod tests;

use thiserror::Error;

use crate::arith::FfError;
use crate::poly::PolyError;
use crate::wildquot::WildQuotError;

pub use chart::{
    is_snc_at, special_fiber_singular_points, AffineChart, Center, ChartMap, DivisorRecord,
    FiberEq, LocalCurve, SncDiagnosis, MAX_AMBIENT,
};
pub use fp::FpPoly;
pub use ops::{blowup, eliminate_linear, tjurina_transform, BlowupOutcome};
pub use state::{
    dual_graph, resolve, resolve_example, DivisorInfo, LogStep, PointId, ResolutionState,
    StepKind, DEFAULT_BLOWUP_CAP,
};

#[derive(Debug, Error)]
pub enum ResolveError {
    #[error("no generator is linear in a variable with constant coefficient")]
    NoEliminableGenerator,
    #[error("chart {0} is not a hypersurface")]
    NotHypersurface(String),
    #[error("point {0} is not on the special fiber")]
    PointNotOnSurface(String),
    #[error("unsupported center: {0}")]
    UnsupportedCenter(String),
    #[error("extension degree {0} exceeds the supported maximum")]
    KMaxTooLarge(usize),
    #[error("ambient dimension {0} is too large for point enumeration")]
    AmbientTooLarge(usize),
    #[error("singular point: {0}")]
    SingularPoint(String),
    #[error("blow-up cap exceeded\n{0}")]
    IterationCap(String),
    #[error("resolution is not finished: {0}")]
    NonTerminal(String),
    #[error("factorization failed: {0}")]
    Factorization(String),
    #[error("coefficient {0} is not p-integral")]
    NotIntegral(String),
    #[error("{0}")]
    Invalid(String),
    #[error("replay diverged at step {0}")]
    ReplayMismatch(usize),
    #[error(transparent)]
    Ff(#[from] FfError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    WildQuot(#[from] WildQuotError),
}
