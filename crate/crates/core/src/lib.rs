//! Two-site sequential defender-attacker security game with a boundedly
//! rational defender.
//!
//! The defender splits a budget `R` between two sites (`r` on site 1,
//! `R - r` on site 2); an attacker observes the split and hits the site with
//! the larger loss. This crate evaluates that game under two behavioral
//! models:
//!
//! * [`quantal`]: the defender picks from a finite menu of allocations with
//!   logit (quantal response) probabilities controlled by a rationality level
//!   `lambda`;
//! * [`prospect`]: the defender distorts attack probabilities with a Prelec
//!   weighting function before optimizing.
//!
//! [`inefficiency`] measures what each model costs relative to a rational
//! defender, and [`experiments`] provides the reference strategy spaces,
//! parameter sweeps and tabular output.
//!
//! All model code is generic over [`Scalar`] (`f32` or `f64`). The `*64`
//! aliases below are what the experiment harness uses.

pub mod error;
pub mod experiments;
pub mod game;
pub mod inefficiency;
pub mod prospect;
pub mod quantal;
mod root;
pub mod scalar;

pub use error::{GameError, Result};
pub use game::{AttackOutcome, AttackTarget, DefenseAllocation, ProbabilityCurve, SecurityGame, StrategySpace};
pub use inefficiency::{pobw, pobw_bound, poqa, poqa_bound, poqa_pne_limit, InefficiencyReport};
pub use prospect::{behavioral_optimal, perceived_loss, prelec, theorem_case, PrelecWeight, TheoremCase};
pub use quantal::{
    attacker_response, compare_sigma_across_losses, defender_response, pne_limit, sigma_lambda_derivative,
    sigma_loss_sensitivity, AttackerSign, LossCase, QuantalParams, ResponseDistribution, SensitivityMethod,
};
pub use scalar::Scalar;

pub type SecurityGame64 = SecurityGame<f64>;
pub type SecurityGame32 = SecurityGame<f32>;
pub type StrategySpace64 = StrategySpace<f64>;
pub type StrategySpace32 = StrategySpace<f32>;
pub type DefenseAllocation64 = DefenseAllocation<f64>;
pub type DefenseAllocation32 = DefenseAllocation<f32>;
pub type ResponseDistribution64 = ResponseDistribution<f64>;
pub type InefficiencyReport64 = InefficiencyReport<f64>;
