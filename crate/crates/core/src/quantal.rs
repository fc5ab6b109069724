//! Logit quantal responses and the sensitivities of the defender's response
//! with respect to the rationality level and the site-2 loss.

use std::cmp::Ordering;

use crate::error::{GameError, Result};
use crate::game::{DefenseAllocation, SecurityGame, StrategySpace};
use crate::scalar::Scalar;

/// Rationality levels of the defender and the attacker. Zero is uniform
/// random play; the infinite limit is handled by [`pne_limit`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantalParams<T> {
    pub lambda_d: T,
    pub lambda_a: T,
}

impl<T: Scalar> QuantalParams<T> {
    pub fn new(lambda_d: T, lambda_a: T) -> Result<Self> {
        check_lambda(lambda_d, "lambda_d")?;
        check_lambda(lambda_a, "lambda_a")?;
        Ok(QuantalParams { lambda_d, lambda_a })
    }
}

fn check_lambda<T: Scalar>(lambda: T, name: &str) -> Result<()> {
    if lambda.is_finite() && lambda >= T::zero() {
        Ok(())
    } else {
        Err(GameError::domain(format!("{name} must be finite and >= 0, got {lambda}")))
    }
}

/// Probability vector over a strategy space (or over the two attack targets),
/// together with the payoffs it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseDistribution<T> {
    probabilities: Vec<T>,
    losses: Vec<T>,
}

impl<T: Scalar> ResponseDistribution<T> {
    pub fn probabilities(&self) -> &[T] {
        &self.probabilities
    }

    /// Per-entry losses (defender) or utilities (attacker).
    pub fn losses(&self) -> &[T] {
        &self.losses
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    pub fn get(&self, index: usize) -> T {
        self.probabilities[index]
    }

    /// Probability-weighted payoff `sum sigma_i * L_i`.
    pub fn expected_loss(&self) -> T {
        self.probabilities
            .iter()
            .zip(&self.losses)
            .fold(T::zero(), |acc, (&p, &l)| acc + p * l)
    }

    pub fn into_probabilities(self) -> Vec<T> {
        self.probabilities
    }
}

/// `exp(-lambda * (L_i - min L))`, normalized. Shifting by the minimum keeps
/// the largest weight at exactly one, so nothing overflows.
fn logit_minimizing<T: Scalar>(losses: &[T], lambda: T) -> Vec<T> {
    let min = losses.iter().copied().fold(T::infinity(), T::min);
    let weights: Vec<T> = losses.iter().map(|&l| (-lambda * (l - min)).exp()).collect();
    let total = weights.iter().copied().fold(T::zero(), |a, b| a + b);
    weights.into_iter().map(|w| w / total).collect()
}

/// Defender's logit response `sigma(r) ∝ exp(-lambda_d * L(r))` over `space`.
pub fn defender_response<T: Scalar>(
    game: &SecurityGame<T>,
    space: &StrategySpace<T>,
    lambda_d: T,
) -> Result<ResponseDistribution<T>> {
    check_lambda(lambda_d, "lambda_d")?;
    let losses = space.losses(game)?;
    Ok(ResponseDistribution {
        probabilities: logit_minimizing(&losses, lambda_d),
        losses,
    })
}

/// Sign convention for the attacker's logit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AttackerSign {
    /// `sigma ∝ exp(+lambda_a * u)`: the attacker favours higher utility.
    #[default]
    Maximizer,
    /// `sigma ∝ exp(-lambda_a * u)`: the attacker favours lower utility.
    Verbatim,
}

/// Attacker's logit response over `(Site1, Site2)` after observing `alloc`.
/// Utilities are `u1 = p1(r)` and `u2 = A p2(R - r)`.
pub fn attacker_response<T: Scalar>(
    game: &SecurityGame<T>,
    alloc: &DefenseAllocation<T>,
    lambda_a: T,
    sign: AttackerSign,
) -> Result<ResponseDistribution<T>> {
    check_lambda(lambda_a, "lambda_a")?;
    game.expected_loss(alloc)?;
    let (u1, u2) = game.branch_losses(alloc.site1);
    let utilities = vec![u1, u2];
    let probabilities = match sign {
        AttackerSign::Verbatim => logit_minimizing(&utilities, lambda_a),
        AttackerSign::Maximizer => logit_minimizing(&[-u1, -u2], lambda_a),
    };
    Ok(ResponseDistribution { probabilities, losses: utilities })
}

/// `d sigma(r_k) / d lambda_d = sigma_k * sum_j sigma_j (L_j - L_k)` for every
/// strategy `k`. Non-negative at every loss-minimizing strategy.
pub fn sigma_lambda_derivative<T: Scalar>(
    game: &SecurityGame<T>,
    space: &StrategySpace<T>,
    lambda_d: T,
) -> Result<Vec<T>> {
    let dist = defender_response(game, space, lambda_d)?;
    // Centering on the minimum keeps every term of the mean non-negative, so
    // the argmin entry cannot round below zero.
    let min = dist.losses.iter().copied().fold(T::infinity(), T::min);
    let excess = dist
        .probabilities
        .iter()
        .zip(&dist.losses)
        .fold(T::zero(), |acc, (&s, &l)| acc + s * (l - min));
    Ok(dist
        .probabilities
        .iter()
        .zip(&dist.losses)
        .map(|(&s, &l)| s * (excess - (l - min)))
        .collect())
}

/// Support of the `lambda -> infinity` limit of the defender's response: the
/// indices attaining the minimum loss (ties within [`Scalar::TIE_TOL`]).
pub fn pne_limit<T: Scalar>(game: &SecurityGame<T>, space: &StrategySpace<T>) -> Result<Vec<usize>> {
    let losses = space.losses(game)?;
    let min = losses.iter().copied().fold(T::infinity(), T::min);
    Ok(losses
        .iter()
        .enumerate()
        .filter(|(_, &l)| l <= min + T::TIE_TOL)
        .map(|(i, _)| i)
        .collect())
}

/// How the non-optimal strategies of a space sit relative to the
/// equalization point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossCase {
    /// The space holds only the optimum.
    OptimumOnly,
    /// Every other strategy has `p1(r) > A p2(R - r)` (site 1 is attacked).
    SiteOneDominant,
    /// Every other strategy has `p1(r) < A p2(R - r)` (site 2 is attacked).
    SiteTwoDominant,
    /// Both kinds occur.
    Mixed,
}

/// Branch classification of a space against the continuous optimum.
#[derive(Debug, Clone, PartialEq)]
pub struct LossClassification<T> {
    pub optimum_index: usize,
    pub optimum: T,
    pub site1_dominant: Vec<usize>,
    pub site2_dominant: Vec<usize>,
}

impl<T: Scalar> LossClassification<T> {
    pub fn case(&self) -> LossCase {
        match (self.site1_dominant.is_empty(), self.site2_dominant.is_empty()) {
            (true, true) => LossCase::OptimumOnly,
            (false, true) => LossCase::SiteOneDominant,
            (true, false) => LossCase::SiteTwoDominant,
            (false, false) => LossCase::Mixed,
        }
    }

    /// Fails unless the space is case i (or holds only the optimum), naming
    /// the first strategy on the wrong branch.
    pub fn require_site_one_dominant(&self, space: &StrategySpace<T>) -> Result<()> {
        match self.site2_dominant.first() {
            None => Ok(()),
            Some(&i) => Err(GameError::precondition(format!(
                "strategy {} has p1(r) < A p2(R - r); case i needs p1 > A p2 for every non-optimal strategy",
                space.labels()[i]
            ))),
        }
    }

    /// Fails unless the space is case ii (or holds only the optimum).
    pub fn require_site_two_dominant(&self, space: &StrategySpace<T>) -> Result<()> {
        match self.site1_dominant.first() {
            None => Ok(()),
            Some(&i) => Err(GameError::precondition(format!(
                "strategy {} has p1(r) > A p2(R - r); case ii needs p1 < A p2 for every non-optimal strategy",
                space.labels()[i]
            ))),
        }
    }
}

/// Continuous interior optimum, preferring the closed form when it applies.
fn interior_optimum<T: Scalar>(game: &SecurityGame<T>) -> Result<T> {
    if !game.has_interior_optimum() {
        return Err(GameError::precondition(format!(
            "game (R = {}, A = {}) has a corner optimum; the loss analysis needs p1(0) > A p2(R) and p1(R) < A p2(0)",
            game.budget(),
            game.loss()
        )));
    }
    match game.optimal_allocation_closed_form() {
        Ok(a) => Ok(a.site1),
        Err(_) => Ok(game.optimal_allocation().site1),
    }
}

/// Locates the continuous optimum inside `space` and sorts the remaining
/// strategies by which branch of the loss is active.
pub fn classify_loss_case<T: Scalar>(
    game: &SecurityGame<T>,
    space: &StrategySpace<T>,
) -> Result<LossClassification<T>> {
    let optimum = interior_optimum(game)?;
    let optimum_index = space.position_of(optimum).ok_or_else(|| {
        GameError::precondition(format!(
            "strategy space does not contain the optimum r* = {optimum}"
        ))
    })?;
    let mut site1_dominant = Vec::new();
    let mut site2_dominant = Vec::new();
    for (i, alloc) in space.iter().enumerate() {
        if i == optimum_index {
            continue;
        }
        let (l1, l2) = game.branch_losses(alloc.site1);
        if l1 > l2 + T::TIE_TOL {
            site1_dominant.push(i);
        } else if l2 > l1 + T::TIE_TOL {
            site2_dominant.push(i);
        } else {
            return Err(GameError::precondition(format!(
                "strategy {} equalizes both branches, so the loss is not differentiable in A there",
                space.labels()[i]
            )));
        }
    }
    Ok(LossClassification { optimum_index, optimum, site1_dominant, site2_dominant })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SensitivityMethod {
    #[default]
    ClosedForm,
    FiniteDifference,
}

/// `d sigma(r*) / dA`, where the optimal strategy tracks `r*(A)` and every
/// other strategy stays put.
///
/// The closed form differentiates each strategy's active branch:
/// `dL*/dA = p2(R - r*) / 2` at the optimum (unit exponential curves),
/// `0` for strategies where site 1 is attacked and `p2(R - r)` where site 2
/// is attacked, combined as `-lambda * sigma* * (dL*/dA - sum_j sigma_j dL_j/dA)`.
/// This covers cases i, ii and the mixed case iii with a single expression.
pub fn sigma_loss_sensitivity<T: Scalar>(
    game: &SecurityGame<T>,
    space: &StrategySpace<T>,
    lambda_d: T,
    method: SensitivityMethod,
) -> Result<T> {
    check_lambda(lambda_d, "lambda_d")?;
    let class = classify_loss_case(game, space)?;
    let k = class.optimum_index;
    if space.len() == 1 {
        return Ok(T::zero());
    }
    match method {
        SensitivityMethod::ClosedForm => {
            if !game.has_unit_exponential_curves() {
                return Err(GameError::precondition(
                    "closed-form loss sensitivity needs p(x) = exp(-x) on both sites; use finite differences",
                ));
            }
            let sigma = defender_response(game, space, lambda_d)?;
            let mut slopes = vec![T::zero(); space.len()];
            slopes[k] = game.site2_probability(class.optimum) * T::lit(0.5);
            for &j in &class.site2_dominant {
                slopes[j] = game.site2_probability(space.allocations()[j].site1);
            }
            let mean_slope = sigma
                .probabilities
                .iter()
                .zip(&slopes)
                .fold(T::zero(), |acc, (&s, &d)| acc + s * d);
            Ok(-lambda_d * sigma.get(k) * (slopes[k] - mean_slope))
        }
        SensitivityMethod::FiniteDifference => {
            let a = game.loss();
            let h = T::lit(1e-5) * (T::one() + a.abs());
            let sigma_at = |loss: T| -> Result<T> {
                let g = game.with_loss(loss)?;
                let opt = interior_optimum(&g)?;
                let moved = space.with_replaced(g.budget(), k, opt)?;
                Ok(defender_response(&g, &moved, lambda_d)?.get(k))
            };
            Ok((sigma_at(a + h)? - sigma_at(a - h)?) / (h + h))
        }
    }
}

/// `sigma(r*)` at two loss values, each evaluated on the space `builder`
/// produces for that loss.
#[derive(Debug, Clone, PartialEq)]
pub struct LossComparison<T> {
    pub loss_low: T,
    pub loss_high: T,
    pub sigma_low: T,
    pub sigma_high: T,
    pub case_low: LossCase,
    pub case_high: LossCase,
}

impl<T: Scalar> LossComparison<T> {
    /// Ordering of `sigma(r*)` at the lower loss relative to the higher one.
    pub fn ordering(&self) -> Ordering {
        self.sigma_low
            .partial_cmp(&self.sigma_high)
            .unwrap_or(Ordering::Equal)
    }

    /// Checks the case-i claim: both spaces are site-1 dominant and
    /// `sigma(r*)` is strictly larger at the lower loss.
    pub fn expect_case_i_decrease(&self) -> Result<()> {
        for (loss, case) in [(self.loss_low, self.case_low), (self.loss_high, self.case_high)] {
            if !matches!(case, LossCase::SiteOneDominant | LossCase::OptimumOnly) {
                return Err(GameError::precondition(format!(
                    "space at A = {loss} is {case:?}, not site-1 dominant"
                )));
            }
        }
        if self.sigma_low > self.sigma_high {
            Ok(())
        } else {
            Err(GameError::Violation(format!(
                "sigma(r*) = {} at A = {} is not above {} at A = {}",
                self.sigma_low, self.loss_low, self.sigma_high, self.loss_high
            )))
        }
    }
}

/// Compares `sigma(r*)` between losses `loss_low < loss_high`, rebuilding the
/// game and the space for each loss.
///
/// The branch case of each space is reported rather than enforced; call
/// [`LossComparison::expect_case_i_decrease`] to assert the case-i ordering.
pub fn compare_sigma_across_losses<T, F>(
    template: &SecurityGame<T>,
    builder: F,
    loss_low: T,
    loss_high: T,
    lambda_d: T,
) -> Result<LossComparison<T>>
where
    T: Scalar,
    F: Fn(T) -> Result<StrategySpace<T>>,
{
    if loss_low.partial_cmp(&loss_high) != Some(Ordering::Less) {
        return Err(GameError::domain(format!(
            "losses must satisfy A1 < A2, got {loss_low} and {loss_high}"
        )));
    }
    let eval = |loss: T| -> Result<(T, LossCase)> {
        let game = template.with_loss(loss)?;
        let space = builder(loss)?;
        let class = classify_loss_case(&game, &space)?;
        let sigma = defender_response(&game, &space, lambda_d)?.get(class.optimum_index);
        Ok((sigma, class.case()))
    };
    let (sigma_low, case_low) = eval(loss_low)?;
    let (sigma_high, case_high) = eval(loss_high)?;
    Ok(LossComparison { loss_low, loss_high, sigma_low, sigma_high, case_low, case_high })
}
