//! Closed-form best responses, winning thresholds, scenario profits and the
//! equilibrium of the two-period game.
//!
//! Every formula is written against the margin base `T = theta + s`, so the
//! same code path serves the baseline game (`s = 0`) and the subsidized game.
//! [`solve_baseline`] insists on `s = 0`; the subsidized entry point lives in
//! [`crate::extensions`].

use thiserror::Error;

pub use crate::outcome::{Equilibrium, PeriodOutcome, Winner};
use crate::params::{ensure_valid, Fee, ModelParams, ParamError, Regime, Strategy};
use crate::tol;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error("regime {regime} from thresholds disagrees with the scenario-profit argmax {argmax} (profits {profits:?})")]
    ArgmaxMismatch { regime: Regime, argmax: Regime, profits: [f64; 3] },
    #[error("low-fee winning threshold {eta_low} exceeds the openness cap {cap}")]
    ThresholdAboveCap { eta_low: f64, cap: f64 },
}

/// Deployer's best period-2 profit under one developer, with the effort behind it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Period2Offer {
    pub profit: f64,
    pub effort: f64,
}

/// Deployer's period-1 effort: the maximizer of `(T - w1) Q - c Q^2 / (1 + eta1)`.
pub fn q1_star(params: &ModelParams, strategy: &Strategy) -> f64 {
    let margin = (params.margin_base() - strategy.w1).max(0.0);
    (1.0 + strategy.eta1) * margin / (2.0 * params.c)
}

/// Deployer's optimum when staying with the incumbent, whose cost discount
/// grows with period-1 engagement `alpha1`.
pub fn period2_profit_incumbent(params: &ModelParams, alpha1: f64, w2: f64, eta2: f64) -> Period2Offer {
    let margin = (params.margin_base() - w2).max(0.0);
    let scale = (1.0 + params.k * alpha1) * (1.0 + eta2);
    Period2Offer {
        profit: scale * margin * margin / (4.0 * params.c),
        effort: scale * margin / (2.0 * params.c),
    }
}

/// Deployer's optimum when switching to the entrant, whose cost discount
/// comes from the incumbent's period-1 openness spilling over.
pub fn period2_profit_entrant(params: &ModelParams, eta1: f64, eta2_entrant: f64, w2_entrant: f64) -> Period2Offer {
    let margin = (params.margin_base() - w2_entrant).max(0.0);
    let scale = (1.0 + eta1) * (1.0 + eta2_entrant);
    Period2Offer {
        profit: scale * margin * margin / (4.0 * params.c),
        effort: scale * margin / (2.0 * params.c),
    }
}

/// Winning condition: `2c(1+eta1) / (2c + k(1+eta1)(T - w1)) <= 1`.
///
/// Ties go to the incumbent. A relative band of [`tol::TIE_REL`] absorbs
/// rounding when `eta1` is a computed threshold.
pub fn incumbent_wins(params: &ModelParams, strategy: &Strategy) -> bool {
    let spill = 2.0 * params.c * (1.0 + strategy.eta1);
    let flywheel = 2.0 * params.c + params.k * (1.0 + strategy.eta1) * (params.margin_base() - strategy.w1);
    spill <= flywheel * (1.0 + tol::TIE_REL)
}

fn winning_threshold(params: &ModelParams, fee: f64) -> Result<f64, ParamError> {
    let pull = params.k * (params.margin_base() - fee);
    let denom = 2.0 * params.c - pull;
    if !(denom > 0.0) {
        return Err(ParamError::ThresholdDomain(denom));
    }
    Ok(pull / denom)
}

/// Largest period-1 openness at which the incumbent still wins after charging `w_high`.
/// Returned raw (not clamped to the cap).
pub fn eta_bar_high(params: &ModelParams) -> Result<f64, ParamError> {
    winning_threshold(params, params.w_high)
}

/// Same as [`eta_bar_high`] for `w_low`.
pub fn eta_bar_low(params: &ModelParams) -> Result<f64, ParamError> {
    winning_threshold(params, params.w_low)
}

/// Incumbent two-period profit when it cedes period 2.
pub fn profit_if_losing(params: &ModelParams, strategy: &Strategy) -> f64 {
    strategy.w1 * q1_star(params, strategy)
}

/// Incumbent two-period profit when it wins period 2 at `w_low` with
/// both developers fully open in period 2:
/// `[2c(1+eta1)(T-w1)w1 + (1+eta)(T-w_L)w_L (2c + k(1+eta1)(T-w1))] / (4c^2)`.
pub fn profit_if_winning(params: &ModelParams, strategy: &Strategy) -> f64 {
    let c = params.c;
    let t = params.margin_base();
    let m1 = t - strategy.w1;
    let ml = t - params.w_low;
    let first = 2.0 * c * (1.0 + strategy.eta1) * m1 * strategy.w1;
    let second = (1.0 + params.eta_cap) * ml * params.w_low * (2.0 * c + params.k * (1.0 + strategy.eta1) * m1);
    (first + second) / (4.0 * c * c)
}

/// Incumbent total profit under the three candidate scenarios.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioProfits {
    /// Harvest: `(w_H, eta_cap)`, lose period 2.
    pub pi_s0: f64,
    /// Defend: `(w_H, eta_H)`, win period 2.
    pub pi_s1: f64,
    /// Dominate: `(w_L, eta_L)`, win period 2.
    pub pi_s2: f64,
}

impl ScenarioProfits {
    pub fn get(&self, regime: Regime) -> f64 {
        match regime {
            Regime::Harvest => self.pi_s0,
            Regime::Defend => self.pi_s1,
            Regime::Dominate => self.pi_s2,
        }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.pi_s0, self.pi_s1, self.pi_s2]
    }

    /// Best scenario; exact ties resolve in the order Harvest, Defend, Dominate.
    pub fn argmax(&self) -> Regime {
        let mut best = Regime::Harvest;
        for r in [Regime::Defend, Regime::Dominate] {
            if self.get(r) > self.get(best) {
                best = r;
            }
        }
        best
    }

    fn max(&self) -> f64 {
        self.pi_s0.max(self.pi_s1).max(self.pi_s2)
    }
}

/// First-period strategy the incumbent plays in a scenario.
///
/// Winning thresholds are clamped into `[0, eta_cap]` here.
pub fn scenario_strategy(params: &ModelParams, regime: Regime) -> Result<Strategy, ParamError> {
    let cap = params.eta_cap;
    Ok(match regime {
        Regime::Harvest => Strategy::from_fee(params, Fee::High, cap),
        Regime::Defend => Strategy::from_fee(params, Fee::High, eta_bar_high(params)?.clamp(0.0, cap)),
        Regime::Dominate => Strategy::from_fee(params, Fee::Low, eta_bar_low(params)?.clamp(0.0, cap)),
    })
}

pub fn scenario_profits(params: &ModelParams) -> Result<ScenarioProfits, ParamError> {
    let harvest = scenario_strategy(params, Regime::Harvest)?;
    let defend = scenario_strategy(params, Regime::Defend)?;
    let dominate = scenario_strategy(params, Regime::Dominate)?;
    Ok(ScenarioProfits {
        pi_s0: profit_if_losing(params, &harvest),
        pi_s1: profit_if_winning(params, &defend),
        pi_s2: profit_if_winning(params, &dominate),
    })
}

/// Flywheel thresholds separating the scenarios.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeThresholds {
    /// Harvest for `k <= k_bar_1`.
    pub k_bar_1: f64,
    /// Dominate for `k > k_bar_2`.
    pub k_bar_2: f64,
    /// `pi_S1 >= pi_S2` iff `k <= k_bar_12`.
    pub k_bar_12: f64,
    /// `pi_S1 >= pi_S0` iff `k >= k_bar_13`.
    pub k_bar_13: f64,
    /// `pi_S2 >= pi_S0` iff `k >= k_bar_23`.
    pub k_bar_23: f64,
    /// Cap level at which the ordering of the pairwise thresholds flips;
    /// `None` when singular (`T = w_H + w_L` or `w_H = w_L`).
    pub eta_prime: Option<f64>,
}

impl RegimeThresholds {
    pub fn is_finite(&self) -> bool {
        !(self.k_bar_1.is_nan() || self.k_bar_2.is_nan())
    }

    /// Regime for a flywheel strength; boundaries belong to the lower-`k` regime.
    pub fn regime_at(&self, k: f64) -> Regime {
        if k <= self.k_bar_1 {
            Regime::Harvest
        } else if k <= self.k_bar_2 {
            Regime::Defend
        } else {
            Regime::Dominate
        }
    }
}

pub fn regime_thresholds(params: &ModelParams) -> RegimeThresholds {
    let c = params.c;
    let t = params.margin_base();
    let (wh, wl, eta) = (params.w_high, params.w_low, params.eta_cap);
    let k_bar_12 = if wh == wl {
        f64::INFINITY
    } else {
        2.0 * c * (t - wl - wh) / ((t - wl) * (t - wh + wl + eta * wl))
    };
    let (k_bar_13, k_bar_23) = if wh == 0.0 {
        (f64::INFINITY, f64::INFINITY)
    } else {
        let k13 = 2.0 * c * (eta * (t - wh) * wh - (1.0 + eta) * t * wl + (1.0 + eta) * wl * wl)
            / ((1.0 + eta) * (t - wh) * (t - wh) * wh);
        let k23 = 2.0 * c * (1.0 / (t - wl) - (2.0 + eta) * wl / ((1.0 + eta) * (t - wh) * wh));
        (k13, k23)
    };
    let singular = (t - wh - wl) == 0.0 || wh == wl;
    let eta_prime = (!singular).then(|| ((t - wh) * (t - wh) + wl * (wh - wl)) / ((t - wh - wl) * (wh - wl)));
    RegimeThresholds {
        k_bar_1: k_bar_13.min(k_bar_23),
        k_bar_2: k_bar_12.max(k_bar_23),
        k_bar_12,
        k_bar_13,
        k_bar_23,
        eta_prime,
    }
}

/// Equilibrium path induced by playing a given scenario, using the closed-form
/// efforts (period-2 fees at `w_L`, period-2 openness at the cap).
pub fn scenario_equilibrium(params: &ModelParams, regime: Regime) -> Result<Equilibrium, ParamError> {
    let c = params.c;
    let t = params.margin_base();
    let eta = params.eta_cap;
    let (wh, wl, k) = (params.w_high, params.w_low, params.k);
    let strategy = scenario_strategy(params, regime)?;
    let (q1, q2, winner) = match regime {
        Regime::Harvest => (
            (1.0 + eta) * (t - wh) / (2.0 * c),
            (1.0 + eta) * (1.0 + eta) * (t - wl) / (2.0 * c),
            Winner::Entrant,
        ),
        Regime::Defend => {
            let d = 2.0 * c - k * (t - wh);
            ((t - wh) / d, (1.0 + eta) * (t - wl) / d, Winner::Incumbent)
        }
        Regime::Dominate => {
            let d = 2.0 * c - k * (t - wl);
            ((t - wl) / d, (1.0 + eta) * (t - wl) / d, Winner::Incumbent)
        }
    };
    let period2_openness = match winner {
        Winner::Incumbent => eta,
        Winner::Entrant => eta,
    };
    Ok(Equilibrium {
        regime,
        strategy,
        period1: PeriodOutcome::new(q1, strategy.w1 - params.s, strategy.eta1),
        period2: PeriodOutcome::new(q2, wl - params.s, period2_openness),
        winner2: winner,
        w2: wl,
        w2_entrant: wl,
        eta2: eta,
        eta2_entrant: eta,
    })
}

/// Solves the game at the parameters' own subsidy level.
pub(crate) fn solve_game(params: &ModelParams) -> Result<Equilibrium, SolveError> {
    ensure_valid(params)?;
    let eta_low = eta_bar_low(params)?;
    if eta_low > params.eta_cap * (1.0 + tol::TIE_REL) + tol::TIE_REL {
        return Err(SolveError::ThresholdAboveCap { eta_low, cap: params.eta_cap });
    }
    let thresholds = regime_thresholds(params);
    let profits = scenario_profits(params)?;
    let argmax = profits.argmax();
    let regime = if thresholds.is_finite() { thresholds.regime_at(params.k) } else { argmax };

    let best = profits.max();
    if profits.get(regime) < best - tol::EQ_ABS * best.abs().max(1.0) {
        return Err(SolveError::ArgmaxMismatch { regime, argmax, profits: profits.as_array() });
    }
    Ok(scenario_equilibrium(params, regime)?)
}

/// Equilibrium of the baseline (unsubsidized) game.
pub fn solve_baseline(params: &ModelParams) -> Result<Equilibrium, SolveError> {
    if params.s != 0.0 {
        return Err(ParamError::SubsidyInBaseline(params.s).into());
    }
    solve_game(params)
}
