//! The two-site sequential game: attack curves, expected loss, the attacker's
//! best response and the rational defender's optimal split of the budget.
//!
//! Site 1 receives `r` and site 2 receives `R - r`. Site 1's loss is
//! normalized to one, site 2's loss is `A`. All logarithms are natural.

use std::fmt;
use std::sync::Arc;

use crate::error::{GameError, Result};
use crate::root::bisect_decreasing;
use crate::scalar::Scalar;

/// Number of grid points used to sample user-supplied curves on `[0, R]`.
const CURVE_CHECK_POINTS: usize = 256;

/// Probability that an attack on a site succeeds, as a function of the
/// investment placed on that site.
#[derive(Clone)]
pub enum ProbabilityCurve<T> {
    /// `p(x) = scale * exp(-x)`.
    ExponentialDecay { scale: T },
    /// Caller-supplied curve. Must be positive, strictly decreasing and
    /// strictly convex on `[0, R]`; this is checked on a grid when the game is
    /// built.
    Custom {
        name: String,
        eval: Arc<dyn Fn(T) -> T + Send + Sync>,
    },
}

impl<T: Scalar> ProbabilityCurve<T> {
    pub fn exponential() -> Self {
        ProbabilityCurve::ExponentialDecay { scale: T::one() }
    }

    pub fn scaled_exponential(scale: T) -> Self {
        ProbabilityCurve::ExponentialDecay { scale }
    }

    pub fn custom(name: impl Into<String>, eval: impl Fn(T) -> T + Send + Sync + 'static) -> Self {
        ProbabilityCurve::Custom {
            name: name.into(),
            eval: Arc::new(eval),
        }
    }

    #[inline]
    pub fn eval(&self, investment: T) -> T {
        match self {
            ProbabilityCurve::ExponentialDecay { scale } => *scale * (-investment).exp(),
            ProbabilityCurve::Custom { eval, .. } => eval(investment),
        }
    }

    /// `exp(-x)` with unit scale, the family the closed forms and bounds need.
    pub fn is_unit_exponential(&self) -> bool {
        matches!(self, ProbabilityCurve::ExponentialDecay { scale } if *scale == T::one())
    }

    /// Checks the curve on `[0, budget]`, returning non-fatal warnings.
    fn validate(&self, site: u8, budget: T) -> Result<Vec<String>> {
        let mut warnings = Vec::new();
        match self {
            ProbabilityCurve::ExponentialDecay { scale } => {
                if !(scale.is_finite() && *scale > T::zero()) {
                    return Err(GameError::domain(format!(
                        "site {site} curve scale must be positive and finite, got {scale}"
                    )));
                }
                if *scale > T::one() {
                    warnings.push(format!(
                        "site {site} curve scale {scale} exceeds 1; p(0) is not a probability"
                    ));
                }
            }
            ProbabilityCurve::Custom { name, eval } => {
                let n = CURVE_CHECK_POINTS;
                let step = budget / T::from_usize(n - 1).unwrap();
                let values: Vec<T> = (0..n)
                    .map(|i| eval(T::from_usize(i).unwrap() * step))
                    .collect();
                if let Some(i) = values.iter().position(|v| !(v.is_finite() && *v > T::zero())) {
                    return Err(GameError::domain(format!(
                        "site {site} curve `{name}` is not positive and finite at x = {}",
                        T::from_usize(i).unwrap() * step
                    )));
                }
                if let Some(i) = values.windows(2).position(|w| w[1] >= w[0]) {
                    return Err(GameError::domain(format!(
                        "site {site} curve `{name}` is not strictly decreasing near x = {}",
                        T::from_usize(i).unwrap() * step
                    )));
                }
                if let Some(i) = values
                    .windows(3)
                    .position(|w| w[0] - w[1] - (w[1] - w[2]) <= T::zero())
                {
                    return Err(GameError::domain(format!(
                        "site {site} curve `{name}` is not strictly convex near x = {}",
                        T::from_usize(i + 1).unwrap() * step
                    )));
                }
                if values[0] > T::one() {
                    warnings.push(format!(
                        "site {site} curve `{name}` has p(0) = {} > 1",
                        values[0]
                    ));
                }
            }
        }
        Ok(warnings)
    }
}

impl<T: fmt::Debug> fmt::Debug for ProbabilityCurve<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProbabilityCurve::ExponentialDecay { scale } => {
                f.debug_struct("ExponentialDecay").field("scale", scale).finish()
            }
            ProbabilityCurve::Custom { name, .. } => {
                f.debug_struct("Custom").field("name", name).finish_non_exhaustive()
            }
        }
    }
}

/// A feasible split `(r, R - r)` of the budget. Only the site-1 share is
/// stored; the site-2 share is derived from the owning game's budget.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct DefenseAllocation<T> {
    pub site1: T,
}

impl<T: Scalar> DefenseAllocation<T> {
    pub fn new(site1: T) -> Self {
        DefenseAllocation { site1 }
    }

    pub fn site2(&self, budget: T) -> T {
        budget - self.site1
    }
}

/// Which site a rational attacker hits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AttackTarget {
    Site1,
    Site2,
    Indifferent,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttackOutcome<T> {
    pub target: AttackTarget,
    /// The attacker's utility, equal to the defender's expected loss.
    pub utility: T,
}

/// Two-site game with budget `R`, site-2 loss `A` and one attack curve per site.
#[derive(Debug, Clone)]
pub struct SecurityGame<T> {
    budget: T,
    loss: T,
    p1: ProbabilityCurve<T>,
    p2: ProbabilityCurve<T>,
    warnings: Vec<String>,
}

impl<T: Scalar> SecurityGame<T> {
    pub fn new(budget: T, loss: T, p1: ProbabilityCurve<T>, p2: ProbabilityCurve<T>) -> Result<Self> {
        if !(budget.is_finite() && budget > T::zero()) {
            return Err(GameError::domain(format!("budget R must be positive and finite, got {budget}")));
        }
        if !(loss.is_finite() && loss > T::zero()) {
            return Err(GameError::domain(format!("loss A must be positive and finite, got {loss}")));
        }
        let mut warnings = p1.validate(1, budget)?;
        warnings.extend(p2.validate(2, budget)?);
        for w in &warnings {
            log::warn!("{w}");
        }
        Ok(SecurityGame { budget, loss, p1, p2, warnings })
    }

    /// The game with `p1(r) = exp(-r)` and `p2(R - r) = exp(-(R - r))`.
    pub fn exponential(budget: T, loss: T) -> Result<Self> {
        Self::new(budget, loss, ProbabilityCurve::exponential(), ProbabilityCurve::exponential())
    }

    /// Same curves and budget, different site-2 loss.
    pub fn with_loss(&self, loss: T) -> Result<Self> {
        Self::new(self.budget, loss, self.p1.clone(), self.p2.clone())
    }

    pub fn budget(&self) -> T {
        self.budget
    }

    pub fn loss(&self) -> T {
        self.loss
    }

    pub fn site1_curve(&self) -> &ProbabilityCurve<T> {
        &self.p1
    }

    pub fn site2_curve(&self) -> &ProbabilityCurve<T> {
        &self.p2
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn has_unit_exponential_curves(&self) -> bool {
        self.p1.is_unit_exponential() && self.p2.is_unit_exponential()
    }

    /// Builds a feasible allocation, rejecting `r` outside `[0, R]`.
    pub fn allocation(&self, site1: T) -> Result<DefenseAllocation<T>> {
        self.check_investment(site1)?;
        Ok(DefenseAllocation::new(site1))
    }

    fn check_investment(&self, r: T) -> Result<()> {
        if r.is_nan() {
            return Err(GameError::domain("site-1 investment is NaN"));
        }
        if r < T::zero() {
            return Err(GameError::domain(format!(
                "site-1 investment {r} violates lower bound 0"
            )));
        }
        if r > self.budget {
            return Err(GameError::domain(format!(
                "site-1 investment {r} violates upper bound R = {}",
                self.budget
            )));
        }
        Ok(())
    }

    /// `p1(r)`, the success probability of an attack on site 1.
    #[inline]
    pub fn site1_probability(&self, r: T) -> T {
        self.p1.eval(r)
    }

    /// `p2(R - r)`, the success probability of an attack on site 2.
    #[inline]
    pub fn site2_probability(&self, r: T) -> T {
        self.p2.eval(self.budget - r)
    }

    /// `(p1(r), A * p2(R - r))`: the defender's loss if site 1 or site 2 is hit.
    #[inline]
    pub fn branch_losses(&self, r: T) -> (T, T) {
        (self.site1_probability(r), self.loss * self.site2_probability(r))
    }

    /// Loss for `r` without the feasibility check; callers guarantee `r` is in range.
    #[inline]
    pub(crate) fn loss_at(&self, r: T) -> T {
        let (l1, l2) = self.branch_losses(r);
        l1.max(l2)
    }

    /// Defender's expected loss `max{p1(r), A p2(R - r)}`, which is also the
    /// attacker's utility.
    pub fn expected_loss(&self, alloc: &DefenseAllocation<T>) -> Result<T> {
        self.check_investment(alloc.site1)?;
        Ok(self.loss_at(alloc.site1))
    }

    pub fn attacker_target(&self, alloc: &DefenseAllocation<T>) -> Result<AttackOutcome<T>> {
        self.check_investment(alloc.site1)?;
        let (l1, l2) = self.branch_losses(alloc.site1);
        let target = if l1 > l2 + T::TIE_TOL {
            AttackTarget::Site1
        } else if l2 > l1 + T::TIE_TOL {
            AttackTarget::Site2
        } else {
            AttackTarget::Indifferent
        };
        Ok(AttackOutcome { target, utility: l1.max(l2) })
    }

    /// `E(r) = p1(r) - A p2(R - r)`, strictly decreasing in `r`.
    pub fn difference_function(&self, r: T) -> Result<T> {
        self.check_investment(r)?;
        Ok(self.difference_at(r))
    }

    #[inline]
    fn difference_at(&self, r: T) -> T {
        let (l1, l2) = self.branch_losses(r);
        l1 - l2
    }

    /// The unique minimizer of the expected loss over `[0, R]`.
    ///
    /// Site 2 dominating everywhere gives `r* = 0`, site 1 dominating
    /// everywhere gives `r* = R`; otherwise the root of `E` is bracketed and
    /// bisected to [`Scalar::BISECTION_TOL`].
    pub fn optimal_allocation(&self) -> DefenseAllocation<T> {
        let r = solve_equalization(|r| self.difference_at(r), self.budget);
        DefenseAllocation::new(r)
    }

    /// `r* = (R - ln A) / 2`, valid for unit exponential curves when
    /// `e^-R < A < e^R`.
    pub fn optimal_allocation_closed_form(&self) -> Result<DefenseAllocation<T>> {
        if !self.has_unit_exponential_curves() {
            return Err(GameError::precondition(
                "closed-form optimum needs p(x) = exp(-x) on both sites; use optimal_allocation",
            ));
        }
        let ln_a = self.loss.ln();
        if ln_a.is_nan() || ln_a.abs() >= self.budget {
            return Err(GameError::precondition(format!(
                "closed-form optimum needs e^-R < A < e^R (R = {}, A = {}); use optimal_allocation",
                self.budget, self.loss
            )));
        }
        Ok(DefenseAllocation::new((self.budget - ln_a) * T::lit(0.5)))
    }

    /// True when `E(0) > 0 > E(R)`, i.e. the optimum equalizes both branches.
    pub fn has_interior_optimum(&self) -> bool {
        self.difference_at(T::zero()) > T::zero() && self.difference_at(self.budget) < T::zero()
    }
}

/// Corner analysis followed by bisection for a strictly decreasing
/// difference function on `[0, budget]`.
pub(crate) fn solve_equalization<T: Scalar>(diff: impl Fn(T) -> T, budget: T) -> T {
    if diff(T::zero()) <= T::zero() {
        return T::zero();
    }
    if diff(budget) >= T::zero() {
        return budget;
    }
    bisect_decreasing(diff, T::zero(), budget, T::BISECTION_TOL)
}

/// Finite ordered menu of allocations the defender chooses from.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategySpace<T> {
    allocations: Vec<DefenseAllocation<T>>,
    labels: Vec<String>,
}

impl<T: Scalar> StrategySpace<T> {
    /// Builds a space from site-1 investments, labelled `r1..rn`.
    pub fn new(budget: T, site1: impl IntoIterator<Item = T>) -> Result<Self> {
        let allocations: Vec<_> = site1.into_iter().map(DefenseAllocation::new).collect();
        let labels = (1..=allocations.len()).map(|i| format!("r{i}")).collect();
        Self::with_labels(budget, allocations, labels)
    }

    pub fn with_labels(
        budget: T,
        allocations: Vec<DefenseAllocation<T>>,
        labels: Vec<String>,
    ) -> Result<Self> {
        if allocations.is_empty() {
            return Err(GameError::domain("strategy space is empty"));
        }
        if labels.len() != allocations.len() {
            return Err(GameError::domain(format!(
                "{} labels given for {} strategies",
                labels.len(),
                allocations.len()
            )));
        }
        for (alloc, label) in allocations.iter().zip(&labels) {
            let r = alloc.site1;
            if !(r >= T::zero() && r <= budget) {
                return Err(GameError::domain(format!(
                    "strategy {label} invests {r} on site 1, outside [0, {budget}]"
                )));
            }
        }
        for i in 0..allocations.len() {
            for j in (i + 1)..allocations.len() {
                if (allocations[i].site1 - allocations[j].site1).abs() <= T::DISTINCT_TOL {
                    return Err(GameError::domain(format!(
                        "strategies {} and {} coincide at r = {}",
                        labels[i], labels[j], allocations[i].site1
                    )));
                }
            }
        }
        Ok(StrategySpace { allocations, labels })
    }

    pub fn len(&self) -> usize {
        self.allocations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.allocations.is_empty()
    }

    pub fn allocations(&self) -> &[DefenseAllocation<T>] {
        &self.allocations
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn iter(&self) -> impl Iterator<Item = &DefenseAllocation<T>> {
        self.allocations.iter()
    }

    /// Expected loss of every strategy, in order.
    pub fn losses(&self, game: &SecurityGame<T>) -> Result<Vec<T>> {
        self.allocations.iter().map(|a| game.expected_loss(a)).collect()
    }

    /// Index of the strategy within [`Scalar::OPTIMUM_MATCH_TOL`] of `r`.
    pub fn position_of(&self, r: T) -> Option<usize> {
        self.allocations
            .iter()
            .position(|a| (a.site1 - r).abs() <= T::OPTIMUM_MATCH_TOL)
    }

    /// Copy of the space with strategy `index` moved to `site1`.
    pub(crate) fn with_replaced(&self, budget: T, index: usize, site1: T) -> Result<Self> {
        let mut allocations = self.allocations.clone();
        allocations[index] = DefenseAllocation::new(site1);
        Self::with_labels(budget, allocations, self.labels.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn game(r: f64, a: f64) -> SecurityGame<f64> {
        SecurityGame::exponential(r, a).unwrap()
    }

    #[test]
    fn expected_loss_examples() {
        let g = game(10.0, 1.0);
        assert_eq!(g.expected_loss(&DefenseAllocation::new(10.0)).unwrap(), 1.0);
        let l = g.expected_loss(&DefenseAllocation::new(5.0)).unwrap();
        assert!((l - (-5.0f64).exp()).abs() < 1e-15);
        let g2 = game(10.0, 2.0);
        let l2 = g2.expected_loss(&DefenseAllocation::new(5.0)).unwrap();
        assert!((l2 - 2.0 * (-5.0f64).exp()).abs() < 1e-15);
        assert!((l2 - 1.3476e-2).abs() < 1e-6);
    }

    #[test]
    fn infeasible_allocation_names_bound() {
        let g = game(10.0, 1.0);
        let err = g.expected_loss(&DefenseAllocation::new(-0.5)).unwrap_err();
        assert!(err.to_string().contains("lower bound"));
        let err = g.expected_loss(&DefenseAllocation::new(10.5)).unwrap_err();
        assert!(err.to_string().contains("upper bound"));
        assert!(g.difference_function(11.0).is_err());
        assert!(g.allocation(f64::NAN).is_err());
    }

    #[test]
    fn attacker_target_examples() {
        let g = game(10.0, 1.0);
        let out = g.attacker_target(&DefenseAllocation::new(5.0)).unwrap();
        assert_eq!(out.target, AttackTarget::Indifferent);
        assert!((out.utility - (-5.0f64).exp()).abs() < 1e-15);
        assert_eq!(g.attacker_target(&DefenseAllocation::new(2.0)).unwrap().target, AttackTarget::Site1);
        assert_eq!(g.attacker_target(&DefenseAllocation::new(9.0)).unwrap().target, AttackTarget::Site2);
    }

    #[test]
    fn difference_function_examples() {
        let g = game(10.0, 1.0);
        assert_eq!(g.difference_function(5.0).unwrap(), 0.0);
        let d0 = g.difference_function(0.0).unwrap();
        assert!((d0 - 0.9999546).abs() < 1e-7);
        let d10 = g.difference_function(10.0).unwrap();
        assert!((d10 + 0.9999546).abs() < 1e-7);
    }

    #[test]
    fn optimal_allocation_examples() {
        assert!((game(10.0, 1.0).optimal_allocation().site1 - 5.0).abs() < 1e-9);
        let g = game(10.0, 2f64.exp());
        assert!((g.optimal_allocation().site1 - 4.0).abs() < 1e-9);
        // site 2 dominates everywhere
        assert_eq!(game(1.0, 5f64.exp()).optimal_allocation().site1, 0.0);
        // site 1 dominates everywhere
        assert_eq!(game(1.0, (-5f64).exp()).optimal_allocation().site1, 1.0);
    }

    #[test]
    fn closed_form_examples() {
        let cf = |a: f64| game(10.0, a).optimal_allocation_closed_form().unwrap().site1;
        assert_eq!(cf(1.0), 5.0);
        assert!((cf(2f64.exp()) - 4.0).abs() < 1e-12);
        assert!((cf(0.5) - 5.346_573_590_279_973).abs() < 1e-12);
    }

    #[test]
    fn closed_form_preconditions() {
        let err = game(1.0, 5f64.exp()).optimal_allocation_closed_form().unwrap_err();
        assert!(matches!(err, GameError::Precondition(_)));
        let g = SecurityGame::new(
            10.0,
            1.0,
            ProbabilityCurve::scaled_exponential(0.5f64.exp()),
            ProbabilityCurve::exponential(),
        )
        .unwrap();
        assert!(matches!(g.optimal_allocation_closed_form(), Err(GameError::Precondition(_))));
    }

    #[test]
    fn scale_above_one_is_a_warning() {
        let g = SecurityGame::new(
            10.0,
            1.0,
            ProbabilityCurve::scaled_exponential(0.5f64.exp()),
            ProbabilityCurve::exponential(),
        )
        .unwrap();
        assert_eq!(g.warnings().len(), 1);
        // optimum equalizes exp(0.5 - r) with exp(-(10 - r)): r = 5.25
        assert!((g.optimal_allocation().site1 - 5.25).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_games_and_curves() {
        assert!(SecurityGame::<f64>::exponential(0.0, 1.0).is_err());
        assert!(SecurityGame::<f64>::exponential(10.0, -1.0).is_err());
        let increasing = ProbabilityCurve::custom("increasing", |x: f64| 0.1 + 0.01 * x);
        assert!(SecurityGame::new(10.0, 1.0, increasing, ProbabilityCurve::exponential()).is_err());
        let linear = ProbabilityCurve::custom("linear", |x: f64| 1.0 - 0.05 * x);
        let err = SecurityGame::new(10.0, 1.0, ProbabilityCurve::exponential(), linear).unwrap_err();
        assert!(err.to_string().contains("convex"));
    }

    #[test]
    fn custom_curve_optimum() {
        let hyperbolic = ProbabilityCurve::custom("1/(1+x)", |x: f64| 1.0 / (1.0 + x));
        let g = SecurityGame::new(4.0, 1.0, hyperbolic.clone(), hyperbolic).unwrap();
        assert!(g.warnings().is_empty());
        assert!((g.optimal_allocation().site1 - 2.0).abs() < 1e-9);
    }

    #[test]
    fn strategy_space_invariants() {
        assert!(StrategySpace::<f64>::new(10.0, []).is_err());
        assert!(StrategySpace::new(10.0, [1.0, 11.0]).is_err());
        let err = StrategySpace::new(10.0, [1.0, 1.0 + 1e-13]).unwrap_err();
        assert!(err.to_string().contains("coincide"));
        let s = StrategySpace::new(10.0, [10.0, 5.35, 5.0]).unwrap();
        assert_eq!(s.labels(), ["r1", "r2", "r3"]);
        assert_eq!(s.position_of(5.0), Some(2));
        assert_eq!(s.position_of(4.0), None);
    }

    #[test]
    fn single_precision_game() {
        let g = SecurityGame::<f32>::exponential(10.0, 1.0).unwrap();
        assert!((g.optimal_allocation().site1 - 5.0).abs() < 1e-4);
    }
}
