//! Outcome types shared by the closed-form solvers and the brute-force oracle.

use std::fmt;

use crate::params::{Regime, Strategy};

/// Which developer the deployer adopts in period 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Winner {
    Incumbent,
    Entrant,
}

impl fmt::Display for Winner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Winner::Incumbent => "incumbent",
            Winner::Entrant => "entrant",
        })
    }
}

/// What happens in a single period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodOutcome {
    /// Deployer fine-tuning effort (product quality).
    pub effort: f64,
    /// User engagement; equals `effort` at the users' optimum.
    pub engagement: f64,
    /// Per-unit fee the deployer actually pays, net of any subsidy.
    pub fee_paid: f64,
    /// Openness level the deployer's cost depends on in this period.
    pub openness: f64,
}

impl PeriodOutcome {
    pub fn new(effort: f64, fee_paid: f64, openness: f64) -> Self {
        Self { effort, engagement: effort, fee_paid, openness }
    }
}

/// Subgame-perfect outcome of the two-period game.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Equilibrium {
    pub regime: Regime,
    pub strategy: Strategy,
    pub period1: PeriodOutcome,
    pub period2: PeriodOutcome,
    pub winner2: Winner,
    /// Incumbent's period-2 fee.
    pub w2: f64,
    /// Entrant's period-2 fee.
    pub w2_entrant: f64,
    pub eta2: f64,
    pub eta2_entrant: f64,
}

impl Equilibrium {
    /// Incumbent's license revenue over both periods.
    pub fn incumbent_profit(&self) -> f64 {
        let first = self.strategy.w1 * self.period1.engagement;
        match self.winner2 {
            Winner::Incumbent => first + self.w2 * self.period2.engagement,
            Winner::Entrant => first,
        }
    }

    pub fn entrant_profit(&self) -> f64 {
        match self.winner2 {
            Winner::Incumbent => 0.0,
            Winner::Entrant => self.w2_entrant * self.period2.engagement,
        }
    }
}

/// Outcome when the incumbent and the deployer merge and the entrant is foreclosed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratedOutcome {
    pub eta1v: f64,
    pub eta2v: f64,
    pub q1v: f64,
    pub q2v: f64,
    /// Integrated firm's two-period profit.
    pub profit: f64,
    /// Two-period consumer surplus.
    pub consumer: f64,
    pub social: f64,
}
