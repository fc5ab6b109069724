//! The three reference five-strategy menus, all with budget `R = 10`.
//!
//! Spaces A and B place their third strategy at the rational optimum
//! `((10 - ln A) / 2, (10 + ln A) / 2)` for the given loss; space C is fixed.
//! In space A every other strategy leaves site 1 as the attacked site, in
//! space B every other strategy leaves site 2 attacked, and space C mixes
//! both.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{GameError, Result};
use crate::game::StrategySpace;

/// Budget shared by the reference spaces.
pub const REFERENCE_BUDGET: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BuiltinSpace {
    A,
    B,
    C,
}

impl BuiltinSpace {
    pub const ALL: [BuiltinSpace; 3] = [BuiltinSpace::A, BuiltinSpace::B, BuiltinSpace::C];

    /// Position of `r3`, the strategy built to be optimal.
    pub const OPTIMAL_INDEX: usize = 2;

    /// Whether the menu is rebuilt when the loss changes.
    pub fn depends_on_loss(&self) -> bool {
        !matches!(self, BuiltinSpace::C)
    }

    /// Site-1 investments for loss `loss`.
    pub fn site1_investments(&self, loss: f64) -> Result<[f64; 5]> {
        let r3 = || -> Result<f64> {
            let ln_a = loss.ln();
            if !(loss > 0.0 && ln_a.abs() < REFERENCE_BUDGET) {
                return Err(GameError::precondition(format!(
                    "space {self} needs e^-10 < A < e^10 so r3 is feasible, got A = {loss}"
                )));
            }
            Ok((REFERENCE_BUDGET - ln_a) / 2.0)
        };
        Ok(match self {
            BuiltinSpace::A => [4.0, 2.0, r3()?, 3.5, 0.0],
            BuiltinSpace::B => [7.0, 5.4, r3()?, 6.5, 10.0],
            BuiltinSpace::C => [10.0, 5.35, 5.0, 4.8, 0.0],
        })
    }

    pub fn build(&self, loss: f64) -> Result<StrategySpace<f64>> {
        StrategySpace::new(REFERENCE_BUDGET, self.site1_investments(loss)?)
    }
}

impl fmt::Display for BuiltinSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            BuiltinSpace::A => "A",
            BuiltinSpace::B => "B",
            BuiltinSpace::C => "C",
        };
        f.write_str(name)
    }
}

impl FromStr for BuiltinSpace {
    type Err = GameError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "A" | "a" => Ok(BuiltinSpace::A),
            "B" | "b" => Ok(BuiltinSpace::B),
            "C" | "c" => Ok(BuiltinSpace::C),
            other => Err(GameError::config("space", format!("unknown space `{other}`, expected A, B or C"))),
        }
    }
}

/// Reference space `name` for site-2 loss `loss`.
pub fn builtin_space(name: BuiltinSpace, loss: f64) -> Result<StrategySpace<f64>> {
    name.build(loss)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::SecurityGame;

    #[test]
    fn table_rows() {
        let c = builtin_space(BuiltinSpace::C, 1.0).unwrap();
        let r: Vec<f64> = c.iter().map(|a| a.site1).collect();
        assert_eq!(r, [10.0, 5.35, 5.0, 4.8, 0.0]);
        let a = builtin_space(BuiltinSpace::A, 1.0).unwrap();
        assert_eq!(a.allocations()[2].site1, 5.0);
        assert_eq!(a.allocations()[2].site2(10.0), 5.0);
        let b = builtin_space(BuiltinSpace::B, 2f64.exp()).unwrap();
        assert!((b.allocations()[2].site1 - 4.0).abs() < 1e-12);
        assert!((b.allocations()[2].site2(10.0) - 6.0).abs() < 1e-12);
    }

    #[test]
    fn r3_is_the_closed_form_optimum() {
        for a in [1e-4, 0.3, 0.5, 1.0, 1.5, 7.0, 1e4] {
            let game = SecurityGame::exponential(REFERENCE_BUDGET, a).unwrap();
            let star = game.optimal_allocation_closed_form().unwrap().site1;
            for space in [BuiltinSpace::A, BuiltinSpace::B] {
                let r3 = space.site1_investments(a).unwrap()[BuiltinSpace::OPTIMAL_INDEX];
                assert!((r3 - star).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn infeasible_loss_rejected() {
        assert!(matches!(builtin_space(BuiltinSpace::A, 30000.0), Err(GameError::Precondition(_))));
        assert!(matches!(builtin_space(BuiltinSpace::B, 0.0), Err(GameError::Precondition(_))));
        assert!(builtin_space(BuiltinSpace::C, 30000.0).is_ok());
        // r3 lands on r1 of space A
        assert!(builtin_space(BuiltinSpace::A, 2f64.exp()).is_err());
    }

    #[test]
    fn parses_names() {
        assert_eq!("b".parse::<BuiltinSpace>().unwrap(), BuiltinSpace::B);
        assert!("D".parse::<BuiltinSpace>().is_err());
    }
}
