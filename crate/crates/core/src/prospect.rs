//! Prelec probability weighting and the defender who minimizes perceived,
//! rather than true, expected loss.

use crate::error::{GameError, Result};
use crate::game::{solve_equalization, DefenseAllocation, SecurityGame};
use crate::scalar::Scalar;

/// Single-parameter Prelec weighting `w(p) = exp(-(-ln p)^alpha)`.
///
/// For `alpha < 1` small probabilities are overweighted and large ones
/// underweighted, with the crossover at the fixed point `p = 1/e`.
/// `alpha = 1` is the identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrelecWeight<T> {
    alpha: T,
}

impl<T: Scalar> PrelecWeight<T> {
    pub fn new(alpha: T) -> Result<Self> {
        if alpha > T::zero() && alpha <= T::one() {
            Ok(PrelecWeight { alpha })
        } else {
            Err(GameError::domain(format!("Prelec alpha must lie in (0, 1], got {alpha}")))
        }
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn weight(&self, p: T) -> Result<T> {
        if !(p > T::zero() && p <= T::one()) {
            return Err(GameError::domain(format!("probability must lie in (0, 1], got {p}")));
        }
        Ok(self.weight_unchecked(p))
    }

    /// Like [`weight`](Self::weight) but clamps `p > 1` to one (logging a
    /// warning), which happens for attack curves with scale above one.
    pub fn weight_clamped(&self, p: T) -> Result<T> {
        if p > T::one() {
            log::warn!("attack probability {p} exceeds 1; clamped before Prelec weighting");
            return Ok(T::one());
        }
        self.weight(p)
    }

    #[inline]
    fn weight_unchecked(&self, p: T) -> T {
        (-(-p.ln()).max(T::zero()).powf(self.alpha)).exp()
    }
}

/// `exp(-(-ln p)^alpha)`.
pub fn prelec<T: Scalar>(p: T, alpha: T) -> Result<T> {
    PrelecWeight::new(alpha)?.weight(p)
}

/// `(w(p1(r)), A w(p2(R - r)))`.
fn weighted_branches<T: Scalar>(game: &SecurityGame<T>, w: &PrelecWeight<T>, r: T) -> Result<(T, T)> {
    Ok((
        w.weight_clamped(game.site1_probability(r))?,
        game.loss() * w.weight_clamped(game.site2_probability(r))?,
    ))
}

/// Perceived loss `max{w(p1(r)), A w(p2(R - r))}`.
pub fn perceived_loss<T: Scalar>(game: &SecurityGame<T>, alpha: T, alloc: &DefenseAllocation<T>) -> Result<T> {
    let w = PrelecWeight::new(alpha)?;
    game.expected_loss(alloc)?;
    let (l1, l2) = weighted_branches(game, &w, alloc.site1)?;
    Ok(l1.max(l2))
}

/// `D(r) = w(p1(r)) - A w(p2(R - r))`, strictly decreasing in `r`.
pub fn perceived_difference<T: Scalar>(game: &SecurityGame<T>, alpha: T, r: T) -> Result<T> {
    let w = PrelecWeight::new(alpha)?;
    game.difference_function(r)?;
    let (l1, l2) = weighted_branches(game, &w, r)?;
    Ok(l1 - l2)
}

/// The unique minimizer of the perceived loss over `[0, R]`.
pub fn behavioral_optimal<T: Scalar>(game: &SecurityGame<T>, alpha: T) -> Result<DefenseAllocation<T>> {
    let w = PrelecWeight::new(alpha)?;
    // weights of feasible points cannot fail once alpha is valid and p > 0
    let diff = |r: T| {
        let (l1, l2) = weighted_branches(game, &w, r).unwrap_or((T::nan(), T::nan()));
        l1 - l2
    };
    Ok(DefenseAllocation::new(solve_equalization(diff, game.budget())))
}

/// Where the behavioral optimum `r_hat` falls relative to the rational `r*`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TheoremCase {
    /// Site 2's perceived loss dominates everywhere: `r_hat = 0 <= r*`.
    CornerLow,
    /// Site 1's perceived loss dominates everywhere: `r_hat = R >= r*`.
    CornerHigh,
    /// `A = 1`: `r_hat = r*`.
    Equal,
    /// `p1(r*) < 1/e` and `A < 1`: `r_hat > r*`.
    HatGreater,
    /// `p1(r*) < 1/e` and `A > 1`: `r_hat < r*`.
    HatLess,
    /// `p1(r*) >= 1/e` with `A != 1`, or `r*` at a corner; no prediction.
    Unclassified,
}

impl TheoremCase {
    /// Whether `(r_hat, r_star)` agrees with the case's prediction, or `None`
    /// when the case makes none. `tol` is the allowed slack for equality.
    pub fn consistent_with<T: Scalar>(&self, r_hat: T, r_star: T, tol: T) -> Option<bool> {
        match self {
            TheoremCase::CornerLow => Some(r_hat <= r_star + tol),
            TheoremCase::CornerHigh => Some(r_hat + tol >= r_star),
            TheoremCase::Equal => Some((r_hat - r_star).abs() <= tol),
            TheoremCase::HatGreater => Some(r_hat > r_star),
            TheoremCase::HatLess => Some(r_hat < r_star),
            TheoremCase::Unclassified => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            TheoremCase::CornerLow => "corner_low",
            TheoremCase::CornerHigh => "corner_high",
            TheoremCase::Equal => "equal",
            TheoremCase::HatGreater => "hat_greater",
            TheoremCase::HatLess => "hat_less",
            TheoremCase::Unclassified => "unclassified",
        }
    }
}

/// Classifies `(game, alpha)` for `alpha` in `(0, 1)`.
pub fn theorem_case<T: Scalar>(game: &SecurityGame<T>, alpha: T) -> Result<TheoremCase> {
    if !(alpha > T::zero() && alpha < T::one()) {
        return Err(GameError::domain(format!(
            "classification needs a behavioral alpha in (0, 1), got {alpha}"
        )));
    }
    let w = PrelecWeight::new(alpha)?;
    let (l1, l2) = weighted_branches(game, &w, T::zero())?;
    if l1 <= l2 {
        return Ok(TheoremCase::CornerLow);
    }
    let (l1, l2) = weighted_branches(game, &w, game.budget())?;
    if l1 >= l2 {
        return Ok(TheoremCase::CornerHigh);
    }
    if !game.has_interior_optimum() {
        return Ok(TheoremCase::Unclassified);
    }
    let a = game.loss();
    if (a - T::one()).abs() <= T::TIE_TOL {
        return Ok(TheoremCase::Equal);
    }
    let p1_star = game.site1_probability(game.optimal_allocation().site1);
    if p1_star < T::one() / T::E() {
        Ok(if a < T::one() { TheoremCase::HatGreater } else { TheoremCase::HatLess })
    } else {
        Ok(TheoremCase::Unclassified)
    }
}
