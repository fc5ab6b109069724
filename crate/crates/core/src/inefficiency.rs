//! Inefficiency ratios of the behavioral defender against the rational one,
//! and their upper bounds for unit exponential attack curves.

use crate::error::{GameError, Result};
use crate::game::{SecurityGame, StrategySpace};
use crate::prospect::{behavioral_optimal, PrelecWeight};
use crate::quantal::{defender_response, pne_limit};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct InefficiencyReport<T> {
    /// `numerator / denominator`.
    pub value: T,
    /// Proven upper bound, when the curves are in the family it is proven for.
    pub bound: Option<T>,
    /// Behavioral expected loss (true, not perceived).
    pub numerator: T,
    /// Rational optimum `L(r*)` over the whole interval `[0, R]`.
    pub denominator: T,
    /// Number of strategies played with positive probability.
    pub qre_support_size: usize,
}

impl<T: Scalar> InefficiencyReport<T> {
    /// `value <= bound`, or `None` when no bound applies.
    pub fn within_bound(&self) -> Option<bool> {
        self.bound.map(|b| self.value <= b)
    }
}

fn rational_optimum_loss<T: Scalar>(game: &SecurityGame<T>) -> Result<T> {
    game.expected_loss(&game.optimal_allocation())
}

fn require_unit_exponential<T: Scalar>(game: &SecurityGame<T>) -> Result<()> {
    if game.has_unit_exponential_curves() {
        Ok(())
    } else {
        Err(GameError::precondition(
            "inefficiency bounds are proven only for p1(r) = exp(-r), p2(R - r) = exp(-(R - r))",
        ))
    }
}

/// `max{A, 1/A} * |X| * e^R`.
pub fn poqa_bound<T: Scalar>(game: &SecurityGame<T>, space: &StrategySpace<T>) -> Result<T> {
    require_unit_exponential(game)?;
    Ok(poqa_bound_value(game.loss(), space.len(), game.budget()))
}

/// The PoQA bound formula without the curve check.
pub fn poqa_bound_value<T: Scalar>(loss: T, support: usize, budget: T) -> T {
    loss.max(loss.recip()) * T::from_usize(support).unwrap() * budget.exp()
}

/// `max{A, 1/A} * e^R`.
pub fn pobw_bound<T: Scalar>(game: &SecurityGame<T>) -> Result<T> {
    require_unit_exponential(game)?;
    Ok(pobw_bound_value(game.loss(), game.budget()))
}

pub fn pobw_bound_value<T: Scalar>(loss: T, budget: T) -> T {
    loss.max(loss.recip()) * budget.exp()
}

/// Price of quantal anarchy at finite `lambda_d`:
/// `sum_r sigma(r) L(r) / L(r*)`, where every strategy is in the QRE support.
pub fn poqa<T: Scalar>(game: &SecurityGame<T>, space: &StrategySpace<T>, lambda_d: T) -> Result<InefficiencyReport<T>> {
    let sigma = defender_response(game, space, lambda_d)?;
    let numerator = sigma.expected_loss();
    let denominator = rational_optimum_loss(game)?;
    Ok(InefficiencyReport {
        value: numerator / denominator,
        bound: poqa_bound(game, space).ok(),
        numerator,
        denominator,
        qre_support_size: space.len(),
    })
}

/// Price of quantal anarchy in the `lambda -> infinity` limit, where the
/// response is uniform over the loss-minimizing strategies.
pub fn poqa_pne_limit<T: Scalar>(game: &SecurityGame<T>, space: &StrategySpace<T>) -> Result<InefficiencyReport<T>> {
    let support = pne_limit(game, space)?;
    let losses = space.losses(game)?;
    let share = T::from_usize(support.len()).unwrap().recip();
    let numerator = support.iter().fold(T::zero(), |acc, &i| acc + share * losses[i]);
    let denominator = rational_optimum_loss(game)?;
    let bound = if game.has_unit_exponential_curves() {
        Some(poqa_bound_value(game.loss(), support.len(), game.budget()))
    } else {
        None
    };
    Ok(InefficiencyReport {
        value: numerator / denominator,
        bound,
        numerator,
        denominator,
        qre_support_size: support.len(),
    })
}

/// Price of behavioral probability weighting: true loss at the perceived
/// optimum over the true loss at the rational optimum.
pub fn pobw<T: Scalar>(game: &SecurityGame<T>, alpha: T) -> Result<InefficiencyReport<T>> {
    PrelecWeight::new(alpha)?;
    let r_hat = behavioral_optimal(game, alpha)?;
    let numerator = game.expected_loss(&r_hat)?;
    let denominator = rational_optimum_loss(game)?;
    Ok(InefficiencyReport {
        value: numerator / denominator,
        bound: pobw_bound(game).ok(),
        numerator,
        denominator,
        qre_support_size: 1,
    })
}
