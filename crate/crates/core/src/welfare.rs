//! Welfare decomposition of an equilibrium and the full-openness mandate.

use thiserror::Error;

use crate::closed_form::{regime_thresholds, scenario_equilibrium, scenario_profits, solve_baseline, SolveError};
use crate::outcome::{Equilibrium, Winner};
use crate::params::{ensure_valid, k_max, ModelParams, ParamError, Regime};
use crate::roots::{self, ScanResult};
use crate::tol;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WelfareError {
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error("{component} in the {regime} regime: table row gives {table}, rebuild from efforts gives {rebuilt}")]
    CrossValidation { component: &'static str, regime: Regime, table: f64, rebuilt: f64 },
}

/// Payoffs of every party over both periods.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WelfareBreakdown {
    pub dev1: f64,
    pub dev2: f64,
    pub deployer: f64,
    pub consumer: f64,
    /// Sum of the four components above.
    pub social: f64,
}

impl WelfareBreakdown {
    pub fn new(dev1: f64, dev2: f64, deployer: f64, consumer: f64) -> Self {
        Self { dev1, dev2, deployer, consumer, social: dev1 + dev2 + deployer + consumer }
    }

    /// Incumbent plus deployer, the value-chain profit an integrated firm would keep.
    pub fn chain_profit(&self) -> f64 {
        self.dev1 + self.deployer
    }

    /// Component-wise `self - other`.
    pub fn minus(&self, other: &WelfareBreakdown) -> WelfareBreakdown {
        WelfareBreakdown {
            dev1: self.dev1 - other.dev1,
            dev2: self.dev2 - other.dev2,
            deployer: self.deployer - other.deployer,
            consumer: self.consumer - other.consumer,
            social: self.social - other.social,
        }
    }

    pub fn components(&self) -> [(&'static str, f64); 4] {
        [("dev1", self.dev1), ("dev2", self.dev2), ("deployer", self.deployer), ("consumer", self.consumer)]
    }
}

/// Closed-form welfare row for a scenario, written against `T = theta + s`.
pub fn table_row(params: &ModelParams, regime: Regime) -> Result<WelfareBreakdown, ParamError> {
    let c = params.c;
    let t = params.margin_base();
    let (wh, wl, eta, k) = (params.w_high, params.w_low, params.eta_cap, params.k);
    let mh2 = (t - wh) * (t - wh);
    let ml2 = (t - wl) * (t - wl);
    let open2 = (1.0 + eta) * (1.0 + eta);
    let dev1 = scenario_profits(params)?.get(regime);
    let row = match regime {
        Regime::Harvest => WelfareBreakdown::new(
            dev1,
            open2 * (t - wl) * wl / (2.0 * c),
            (1.0 + eta) * (mh2 + (1.0 + eta) * ml2) / (4.0 * c),
            open2 * (mh2 + open2 * ml2) / (8.0 * c * c),
        ),
        Regime::Defend => {
            let d = 2.0 * c - k * (t - wh);
            WelfareBreakdown::new(dev1, 0.0, (mh2 + (1.0 + eta) * ml2) / (2.0 * d), (mh2 + open2 * ml2) / (2.0 * d * d))
        }
        Regime::Dominate => {
            let d = 2.0 * c - k * (t - wl);
            WelfareBreakdown::new(dev1, 0.0, (2.0 + eta) * ml2 / (2.0 * d), (1.0 + open2) * ml2 / (2.0 * d * d))
        }
    };
    Ok(row)
}

/// Welfare recomputed from an equilibrium's efforts: fee revenue, deployer
/// margin minus fine-tuning cost, and `Q^2 / 2` consumer surplus per period.
pub fn rebuild(params: &ModelParams, eq: &Equilibrium) -> WelfareBreakdown {
    let c = params.c;
    let t = params.margin_base();
    let q1 = eq.period1.effort;
    let q2 = eq.period2.effort;
    let (w2, cost2) = match eq.winner2 {
        Winner::Incumbent => (eq.w2, (1.0 + params.k * eq.period1.engagement) * (1.0 + eq.eta2)),
        Winner::Entrant => (eq.w2_entrant, (1.0 + eq.strategy.eta1) * (1.0 + eq.eta2_entrant)),
    };
    let deployer =
        (t - eq.strategy.w1) * q1 - c * q1 * q1 / (1.0 + eq.strategy.eta1) + (t - w2) * q2 - c * q2 * q2 / cost2;
    let consumer = 0.5 * (eq.period1.engagement.powi(2) + eq.period2.engagement.powi(2));
    WelfareBreakdown::new(eq.incumbent_profit(), eq.entrant_profit(), deployer, consumer)
}

/// Table row for the equilibrium's regime, checked component by component
/// against [`rebuild`].
pub fn welfare_of(params: &ModelParams, eq: &Equilibrium) -> Result<WelfareBreakdown, WelfareError> {
    let table = table_row(params, eq.regime)?;
    let rebuilt = rebuild(params, eq);
    for ((component, a), (_, b)) in table.components().into_iter().zip(rebuilt.components()) {
        if !tol::close_rel(a, b, tol::REBUILD_REL) {
            return Err(WelfareError::CrossValidation { component, regime: eq.regime, table: a, rebuilt: b });
        }
    }
    Ok(table)
}

pub fn welfare_baseline(params: &ModelParams) -> Result<WelfareBreakdown, WelfareError> {
    let eq = solve_baseline(params)?;
    welfare_of(params, &eq)
}

/// Outcome when the incumbent must set `eta1 = eta_cap`: it then keeps the high
/// fee and cedes period 2.
pub fn mandate_equilibrium(params: &ModelParams) -> Result<Equilibrium, WelfareError> {
    if params.s != 0.0 {
        return Err(ParamError::SubsidyInBaseline(params.s).into());
    }
    ensure_valid(params)?;
    Ok(scenario_equilibrium(params, Regime::Harvest)?)
}

pub fn welfare_mandate(params: &ModelParams) -> Result<WelfareBreakdown, WelfareError> {
    let eq = mandate_equilibrium(params)?;
    welfare_of(params, &eq)
}

/// Flywheel strength at which a full-openness mandate starts to lower social welfare.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TrapThreshold {
    Threshold {
        k_bar: f64,
        /// `|SW_baseline - SW_mandate|` at `k_bar`.
        residual: f64,
        sign_changes: usize,
    },
    /// Baseline welfare never rises above mandate welfare on `(k_bar_1, k_max]`.
    NoTrap { sign_changes: usize },
}

const TRAP_SCAN_POINTS: usize = 2001;

/// Locates the crossing of baseline and mandate social welfare on
/// `(k_bar_1, k_max]`. The `k` field of `params` is ignored.
pub fn openness_trap_threshold(params: &ModelParams) -> Result<TrapThreshold, WelfareError> {
    let base = params.with_k(0.0);
    if base.s != 0.0 {
        return Err(ParamError::SubsidyInBaseline(base.s).into());
    }
    ensure_valid(&base)?;
    let upper = k_max(&base)?;
    let k_bar_1 = regime_thresholds(&base).k_bar_1.max(0.0);
    if !(k_bar_1 < upper) {
        return Ok(TrapThreshold::NoTrap { sign_changes: 0 });
    }
    let mandate = welfare_mandate(&base)?.social;
    let gap = |k: f64| -> Result<f64, WelfareError> { Ok(welfare_baseline(&base.with_k(k))?.social - mandate) };

    let lo = k_bar_1 + (upper - k_bar_1) * 1e-12;
    gap(lo)?;
    gap(upper)?;
    let gap_f = |k: f64| gap(k).unwrap_or(f64::NAN);
    Ok(match roots::last_upward_crossing(gap_f, lo, upper, TRAP_SCAN_POINTS) {
        ScanResult::Crossing(c) => TrapThreshold::Threshold {
            k_bar: c.root,
            residual: gap(c.root)?.abs(),
            sign_changes: c.sign_changes,
        },
        ScanResult::OnlyDownward { sign_changes } => TrapThreshold::NoTrap { sign_changes },
        ScanResult::AlwaysPositive | ScanResult::NeverPositive => TrapThreshold::NoTrap { sign_changes: 0 },
    })
}
