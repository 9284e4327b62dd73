//! Vertical integration of the incumbent with the deployer, and the game
//! with a per-unit adoption subsidy paid to the deployer.

use std::fmt;

use thiserror::Error;

use crate::closed_form::{eta_bar_high, eta_bar_low, regime_thresholds, solve_baseline, solve_game, SolveError};
use crate::outcome::{Equilibrium, IntegratedOutcome};
use crate::params::{ensure_valid, k_max, ModelParams, ParamError};
use crate::roots::{self, ScanResult};
use crate::tol;
use crate::welfare::{mandate_equilibrium, welfare_of, WelfareBreakdown, WelfareError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExtensionError {
    #[error(transparent)]
    Welfare(#[from] WelfareError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error("integrated {quantity}: closed form {closed} disagrees with rebuild {rebuilt}")]
    IntegratedMismatch { quantity: &'static str, closed: f64, rebuilt: f64 },
    #[error("subsidy comparison needs s > 0 (got {0})")]
    NoSubsidy(f64),
}

/// Integrated firm's optimum. Fees are internal transfers and the subsidy is
/// ignored, so only `theta`, `c`, `eta_cap` and `k` matter.
pub fn solve_integrated(params: &ModelParams) -> Result<IntegratedOutcome, ExtensionError> {
    ensure_valid(params)?;
    let (theta, c, eta, k) = (params.theta, params.c, params.eta_cap, params.k);
    let open = 1.0 + eta;
    let q1v = open * theta / (2.0 * c);
    let q2v = open * (2.0 * c + k * theta * open) * theta / (4.0 * c * c);

    let rebuilt_profit =
        theta * q1v - c * q1v * q1v / open + theta * q2v - c * q2v * q2v / ((1.0 + k * q1v) * open);
    let closed_profit = open * (4.0 * c + open * k * theta) * theta * theta / (8.0 * c * c);
    let rebuilt_consumer = 0.5 * (q1v * q1v + q2v * q2v);
    let lift = 2.0 * c + k * theta * open;
    let closed_consumer = open * open * theta * theta * (4.0 * c * c + lift * lift) / (32.0 * c.powi(4));

    for (quantity, closed, rebuilt) in
        [("profit", closed_profit, rebuilt_profit), ("consumer surplus", closed_consumer, rebuilt_consumer)]
    {
        if !tol::close_rel(closed, rebuilt, tol::REBUILD_REL) {
            return Err(ExtensionError::IntegratedMismatch { quantity, closed, rebuilt });
        }
    }
    Ok(IntegratedOutcome {
        eta1v: eta,
        eta2v: eta,
        q1v,
        q2v,
        profit: closed_profit,
        consumer: closed_consumer,
        social: closed_profit + closed_consumer,
    })
}

/// Integration booked as a welfare breakdown: the merged firm's profit sits in
/// `dev1`, the entrant is foreclosed and the deployer no longer exists separately.
pub fn integrated_welfare(outcome: &IntegratedOutcome) -> WelfareBreakdown {
    WelfareBreakdown::new(outcome.profit, 0.0, 0.0, outcome.consumer)
}

/// Where integration starts to beat the decentralized chain on one measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IntegrationThreshold {
    /// Integration is better for `k` above `k` (last upward crossing on the scan).
    Crossing { k: f64, sign_changes: usize },
    AlwaysBeneficial,
    NeverBeneficial,
}

impl IntegrationThreshold {
    /// Whether integration improves the measure at flywheel strength `k`,
    /// reading the threshold as a single crossing.
    pub fn beneficial_at(&self, k: f64) -> bool {
        match *self {
            IntegrationThreshold::Crossing { k: root, .. } => k > root,
            IntegrationThreshold::AlwaysBeneficial => true,
            IntegrationThreshold::NeverBeneficial => false,
        }
    }
}

impl fmt::Display for IntegrationThreshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IntegrationThreshold::Crossing { k, sign_changes } => {
                write!(f, "{k}")?;
                if *sign_changes > 1 {
                    write!(f, " ({sign_changes} sign changes on the scan)")?;
                }
                Ok(())
            }
            IntegrationThreshold::AlwaysBeneficial => f.write_str("always beneficial"),
            IntegrationThreshold::NeverBeneficial => f.write_str("never beneficial"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationThresholds {
    /// Value-chain profit (incumbent plus deployer).
    pub chain: IntegrationThreshold,
    pub consumer: IntegrationThreshold,
    pub social: IntegrationThreshold,
}

const INTEGRATION_SCAN_POINTS: usize = 2001;

fn integration_gaps(params: &ModelParams) -> Result<[f64; 3], ExtensionError> {
    let integrated = solve_integrated(params)?;
    let eq = solve_baseline(params)?;
    let decentral = welfare_of(params, &eq)?;
    Ok([
        integrated.profit - decentral.chain_profit(),
        integrated.consumer - decentral.consumer,
        integrated.social - decentral.social,
    ])
}

/// Crossings of the integrated and decentralized measures over `[0, k_max]`.
/// The decentralized side is the unsubsidized game; `params.k` and `params.s`
/// are ignored.
pub fn integration_thresholds(params: &ModelParams) -> Result<IntegrationThresholds, ExtensionError> {
    let base = params.with_subsidy(0.0).with_k(0.0);
    ensure_valid(&base)?;
    let upper = k_max(&base)?;
    integration_gaps(&base)?;
    integration_gaps(&base.with_k(upper))?;

    let locate = |index: usize| {
        let gap = |k: f64| integration_gaps(&base.with_k(k)).map(|g| g[index]).unwrap_or(f64::NAN);
        match roots::last_upward_crossing(gap, 0.0, upper, INTEGRATION_SCAN_POINTS) {
            ScanResult::Crossing(c) => IntegrationThreshold::Crossing { k: c.root, sign_changes: c.sign_changes },
            ScanResult::AlwaysPositive => IntegrationThreshold::AlwaysBeneficial,
            ScanResult::NeverPositive | ScanResult::OnlyDownward { .. } => IntegrationThreshold::NeverBeneficial,
        }
    };
    Ok(IntegrationThresholds { chain: locate(0), consumer: locate(1), social: locate(2) })
}

/// Equilibrium of the subsidized game together with its welfare accounting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubsidizedEquilibrium {
    pub equilibrium: Equilibrium,
    /// Private welfare: the four parties, government outlay not netted out.
    pub welfare: WelfareBreakdown,
    /// Government outlay `s * (alpha1 + alpha2)`.
    pub subsidy_spend: f64,
    pub k_bar_1g: f64,
    pub k_bar_2g: f64,
    pub eta_bar_hg: f64,
    pub eta_bar_lg: f64,
}

impl SubsidizedEquilibrium {
    pub fn social_net_of_subsidy(&self) -> f64 {
        self.welfare.social - self.subsidy_spend
    }
}

/// Solves the game at the parameters' subsidy level (`s = 0` reproduces the baseline).
pub fn solve_subsidized(params: &ModelParams) -> Result<SubsidizedEquilibrium, ExtensionError> {
    let equilibrium = solve_game(params)?;
    let welfare = welfare_of(params, &equilibrium)?;
    let thresholds = regime_thresholds(params);
    Ok(SubsidizedEquilibrium {
        equilibrium,
        welfare,
        subsidy_spend: params.s * (equilibrium.period1.engagement + equilibrium.period2.engagement),
        k_bar_1g: thresholds.k_bar_1,
        k_bar_2g: thresholds.k_bar_2,
        eta_bar_hg: eta_bar_high(params)?,
        eta_bar_lg: eta_bar_low(params)?,
    })
}

/// Where a flywheel strength sits relative to the baseline and subsidized
/// regime boundaries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubsidyInterval {
    /// `k <= k_bar_1`: Harvest with and without the subsidy.
    AtMostKBar1,
    /// `k_bar_1 < k < k_bar_1g`: the subsidy moves the incumbent back to Harvest.
    DefendToHarvest,
    /// `k_bar_2 < k < k_bar_2g`: the subsidy moves the incumbent back to Defend.
    DominateToDefend,
    Elsewhere,
}

impl SubsidyInterval {
    pub fn classify(k: f64, k_bar_1: f64, k_bar_2: f64, k_bar_1g: f64, k_bar_2g: f64) -> Self {
        if k <= k_bar_1 {
            SubsidyInterval::AtMostKBar1
        } else if k < k_bar_1g {
            SubsidyInterval::DefendToHarvest
        } else if k_bar_2 < k && k < k_bar_2g {
            SubsidyInterval::DominateToDefend
        } else {
            SubsidyInterval::Elsewhere
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SubsidyInterval::AtMostKBar1 => "k <= k_bar_1",
            SubsidyInterval::DefendToHarvest => "k_bar_1 < k < k_bar_1g",
            SubsidyInterval::DominateToDefend => "k_bar_2 < k < k_bar_2g",
            SubsidyInterval::Elsewhere => "elsewhere",
        }
    }
}

impl fmt::Display for SubsidyInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Counterfactual {
    Mandate(Equilibrium),
    Subsidy(SubsidizedEquilibrium),
    Integration(IntegratedOutcome),
}

/// Baseline versus one policy intervention at the same parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicyComparison {
    pub baseline: Equilibrium,
    pub baseline_welfare: WelfareBreakdown,
    pub counterfactual: Counterfactual,
    pub counterfactual_welfare: WelfareBreakdown,
    /// `counterfactual_welfare - baseline_welfare`.
    pub delta: WelfareBreakdown,
    /// Set only for subsidy comparisons.
    pub interval: Option<SubsidyInterval>,
}

fn compare(
    base: &ModelParams,
    counterfactual: Counterfactual,
    counterfactual_welfare: WelfareBreakdown,
    interval: Option<SubsidyInterval>,
) -> Result<PolicyComparison, ExtensionError> {
    let baseline = solve_baseline(base)?;
    let baseline_welfare = welfare_of(base, &baseline)?;
    Ok(PolicyComparison {
        baseline,
        baseline_welfare,
        counterfactual,
        counterfactual_welfare,
        delta: counterfactual_welfare.minus(&baseline_welfare),
        interval,
    })
}

/// Full-openness mandate against the baseline (subsidy set to zero).
pub fn mandate_comparison(params: &ModelParams) -> Result<PolicyComparison, ExtensionError> {
    let base = params.with_subsidy(0.0);
    let eq = mandate_equilibrium(&base)?;
    let w = welfare_of(&base, &eq)?;
    compare(&base, Counterfactual::Mandate(eq), w, None)
}

/// Integration against the baseline (subsidy set to zero).
pub fn integration_comparison(params: &ModelParams) -> Result<PolicyComparison, ExtensionError> {
    let base = params.with_subsidy(0.0);
    let outcome = solve_integrated(&base)?;
    compare(&base, Counterfactual::Integration(outcome), integrated_welfare(&outcome), None)
}

/// Subsidized game at `params.s` against the same parameters with `s = 0`.
pub fn subsidy_comparison(params: &ModelParams) -> Result<PolicyComparison, ExtensionError> {
    if !(params.s > 0.0) {
        return Err(ExtensionError::NoSubsidy(params.s));
    }
    let base = params.with_subsidy(0.0);
    let subsidized = solve_subsidized(params)?;
    let th = regime_thresholds(&base);
    let interval = SubsidyInterval::classify(params.k, th.k_bar_1, th.k_bar_2, subsidized.k_bar_1g, subsidized.k_bar_2g);
    compare(&base, Counterfactual::Subsidy(subsidized), subsidized.welfare, Some(interval))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::Regime;

    fn set_a(k: f64) -> ModelParams {
        ModelParams::reference_baseline(k)
    }

    fn set_b(k: f64) -> ModelParams {
        ModelParams::reference_subsidy(k)
    }

    #[test]
    fn integrated_reference_values() {
        let out = solve_integrated(&set_a(0.2)).unwrap();
        assert_eq!(out.q1v, 6.25);
        assert!((out.q2v - 14.0625).abs() < 1e-12);
        assert!((out.profit - 2.5 * 6.5 * 25.0 / 8.0).abs() < 1e-12);
        assert_eq!(out.eta1v, 1.5);
        assert_eq!(out.eta2v, 1.5);
        assert_eq!(out.social, out.profit + out.consumer);
    }

    #[test]
    fn integrated_ignores_fees_and_subsidy() {
        let a = solve_integrated(&set_b(0.2)).unwrap();
        let b = solve_integrated(&set_b(0.2).with_subsidy(0.0)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn integrated_efforts_equal_without_flywheel() {
        let out = solve_integrated(&set_a(0.0)).unwrap();
        assert_eq!(out.q1v, out.q2v);
    }

    #[test]
    fn integrated_first_period_effort_dominates() {
        for i in 0..=40 {
            let p = set_a(4.0 / 15.0 * i as f64 / 40.0);
            let q1v = solve_integrated(&p).unwrap().q1v;
            assert!(q1v > solve_baseline(&p).unwrap().period1.effort);
        }
    }

    #[test]
    fn entrant_path_beats_integrated_second_period_at_zero_flywheel() {
        let p = set_a(0.0);
        assert!((1.0 + p.eta_cap) * (p.theta - p.w_low) > p.theta);
        assert!(solve_baseline(&p).unwrap().period2.effort > solve_integrated(&p).unwrap().q2v);
    }

    #[test]
    fn integration_thresholds_set_a() {
        let th = integration_thresholds(&set_a(0.0)).unwrap();
        let IntegrationThreshold::Crossing { k: k_dv, .. } = th.chain else { panic!("{th:?}") };
        let IntegrationThreshold::Crossing { k: k_cv, .. } = th.consumer else { panic!("{th:?}") };
        let IntegrationThreshold::Crossing { k: k_sv, .. } = th.social else { panic!("{th:?}") };
        assert!((k_dv - 0.124).abs() < 1e-3, "{k_dv}");
        assert!((k_cv - 0.172).abs() < 1e-3, "{k_cv}");
        // chain profit is flat on Harvest and integrated profit linear in k
        assert!((k_dv - 12.109375 / 97.65625).abs() < 1e-12);
        let k_bar_1 = regime_thresholds(&set_a(0.0)).k_bar_1;
        assert!(k_dv < k_bar_1 && k_cv < k_bar_1 && k_sv < k_bar_1);
    }

    #[test]
    fn set_b_thresholds_shift_up() {
        let base = regime_thresholds(&set_b(0.0).with_subsidy(0.0));
        let sub = solve_subsidized(&set_b(0.1)).unwrap();
        assert!((base.k_bar_1 - 0.04992).abs() < 1e-5);
        assert!((base.k_bar_2 - 0.179894).abs() < 1e-6);
        assert!((sub.k_bar_1g - 0.065778).abs() < 1e-6);
        assert!((sub.k_bar_2g - 0.187234).abs() < 1e-6);
        assert!(sub.k_bar_1g > base.k_bar_1 && sub.k_bar_2g > base.k_bar_2);
    }

    #[test]
    fn subsidized_high_threshold() {
        let sub = solve_subsidized(&set_b(0.2)).unwrap();
        assert!((sub.eta_bar_hg - 0.6 / 1.4).abs() < 1e-12);
        let plain = eta_bar_high(&set_b(0.2).with_subsidy(0.0)).unwrap();
        assert!(sub.eta_bar_hg > plain);
        assert!(sub.eta_bar_lg > eta_bar_low(&set_b(0.2).with_subsidy(0.0)).unwrap());
    }

    #[test]
    fn zero_subsidy_reduces_to_baseline() {
        for k in [0.0, 0.1, 0.2, 0.25] {
            let p = set_a(k);
            let sub = solve_subsidized(&p).unwrap();
            assert_eq!(sub.equilibrium, solve_baseline(&p).unwrap());
            assert_eq!(sub.subsidy_spend, 0.0);
            assert_eq!(sub.k_bar_1g, regime_thresholds(&p).k_bar_1);
        }
    }

    #[test]
    fn subsidy_delays_regime_change() {
        let cmp = subsidy_comparison(&set_b(0.06)).unwrap();
        assert_eq!(cmp.interval, Some(SubsidyInterval::DefendToHarvest));
        assert_eq!(cmp.baseline.regime, Regime::Defend);
        let Counterfactual::Subsidy(sub) = cmp.counterfactual else { panic!() };
        assert_eq!(sub.equilibrium.regime, Regime::Harvest);
        for (name, d) in cmp.delta.components() {
            assert!(d > 1e-9, "{name} delta {d}");
        }

        let cmp = subsidy_comparison(&set_b(0.185)).unwrap();
        assert_eq!(cmp.interval, Some(SubsidyInterval::DominateToDefend));
        let Counterfactual::Subsidy(sub) = cmp.counterfactual else { panic!() };
        assert!(sub.equilibrium.period1.effort < cmp.baseline.period1.effort);
        assert!(sub.equilibrium.period2.effort < cmp.baseline.period2.effort);
        assert!(cmp.delta.social < 0.0);
    }

    #[test]
    fn subsidy_in_harvest_weakly_helps_everyone() {
        let cmp = subsidy_comparison(&set_b(0.03)).unwrap();
        assert_eq!(cmp.interval, Some(SubsidyInterval::AtMostKBar1));
        for (_, d) in cmp.delta.components() {
            assert!(d >= 0.0);
        }
    }

    #[test]
    fn subsidy_comparison_requires_subsidy() {
        assert!(matches!(subsidy_comparison(&set_a(0.1)), Err(ExtensionError::NoSubsidy(_))));
    }

    #[test]
    fn spend_is_reported_separately() {
        let sub = solve_subsidized(&set_b(0.1)).unwrap();
        let eq = sub.equilibrium;
        assert!((sub.subsidy_spend - 0.5 * (eq.period1.effort + eq.period2.effort)).abs() < 1e-12);
        assert!((sub.social_net_of_subsidy() - (sub.welfare.social - sub.subsidy_spend)).abs() < 1e-12);
    }

    #[test]
    fn mandate_and_integration_comparisons() {
        let m = mandate_comparison(&set_a(0.26)).unwrap();
        assert!(m.delta.social < 0.0);
        let i = integration_comparison(&set_a(0.2)).unwrap();
        assert_eq!(i.counterfactual_welfare.dev2, 0.0);
        assert_eq!(i.counterfactual_welfare.chain_profit(), i.counterfactual_welfare.dev1);
    }
}
