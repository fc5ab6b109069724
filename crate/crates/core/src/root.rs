//! Bracketing root finder for strictly decreasing scalar functions.

use crate::scalar::{Scalar, MAX_BISECTION_ITERATIONS};

/// Locates the sign change of a strictly decreasing `f` inside `[lo, hi]`.
///
/// Requires `f(lo) > 0 > f(hi)`; the caller handles the corner cases where
/// `f` keeps one sign over the whole interval. Stops when the bracket is no
/// wider than `tol` or after [`MAX_BISECTION_ITERATIONS`] halvings, and
/// returns the bracket midpoint.
pub(crate) fn bisect_decreasing<T, F>(f: F, mut lo: T, mut hi: T, tol: T) -> T
where
    T: Scalar,
    F: Fn(T) -> T,
{
    let half = T::lit(0.5);
    for _ in 0..MAX_BISECTION_ITERATIONS {
        if hi - lo <= tol {
            break;
        }
        let mid = lo + (hi - lo) * half;
        // bracket can no longer shrink in this precision
        if mid <= lo || mid >= hi {
            break;
        }
        let value = f(mid);
        if value == T::zero() {
            return mid;
        }
        if value > T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo + (hi - lo) * half
}
