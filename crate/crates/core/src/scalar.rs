//! Floating-point abstraction shared by every model computation.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive};

/// Real scalar the game is evaluated over: `f32` or `f64`.
///
/// The associated tolerances are the precision-dependent knobs used by the
/// solvers and comparisons. The `f64` values are the reference ones; the `f32`
/// values are scaled to what single precision can actually resolve.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Absolute tolerance below which two branch values count as tied.
    const TIE_TOL: Self;
    /// Absolute bracket width at which bisection stops.
    const BISECTION_TOL: Self;
    /// Two allocations closer than this are the same strategy.
    const DISTINCT_TOL: Self;
    /// Distance at which a listed strategy is taken to be the continuous optimum.
    const OPTIMUM_MATCH_TOL: Self;

    /// Converts an `f64` literal into this scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    const TIE_TOL: f64 = 1e-12;
    const BISECTION_TOL: f64 = 1e-10;
    const DISTINCT_TOL: f64 = 1e-12;
    const OPTIMUM_MATCH_TOL: f64 = 1e-9;
}

impl Scalar for f32 {
    const TIE_TOL: f32 = 1e-6;
    const BISECTION_TOL: f32 = 1e-5;
    const DISTINCT_TOL: f32 = 1e-6;
    const OPTIMUM_MATCH_TOL: f32 = 1e-4;
}

/// Maximum number of bisection halvings before giving up on the tolerance.
pub const MAX_BISECTION_ITERATIONS: usize = 200;
