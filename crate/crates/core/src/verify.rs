//! Oracle-equivalence and invariant suite behind the `verify` command.

use std::fmt;

use thiserror::Error;

use crate::closed_form::{
    eta_bar_high, period2_profit_entrant, period2_profit_incumbent, q1_star, regime_thresholds, scenario_equilibrium,
    scenario_profits, solve_baseline, solve_game,
};
use crate::extensions::{solve_integrated, solve_subsidized};
use crate::oracle::{oracle_solve_game, oracle_solve_integrated, OracleConfig, OracleError};
use crate::params::{ensure_valid, k_max, Fee, ModelParams, ParamError, Regime, Strategy};
use crate::tol;
use crate::welfare::{openness_trap_threshold, welfare_of, TrapThreshold};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VerifyError {
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub oracle: OracleConfig,
    /// Allowed relative gap between closed-form and oracle incumbent profit.
    pub oracle_rel_tol: f64,
    /// Points of the `k` grid over `[0, k_max]`.
    pub k_points: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { oracle: OracleConfig::default(), oracle_rel_tol: tol::PROFIT_REL, k_points: 200 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: &'static str, passed: bool, detail: impl Into<String>) -> Self {
        Self { name, passed, detail: detail.into() }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct VerifyReport {
    pub checks: Vec<CheckOutcome>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail)?;
        }
        let failed = self.failed().count();
        write!(f, "{} checks, {} failed", self.checks.len(), failed)
    }
}

fn k_grid(upper: f64, points: usize) -> Vec<f64> {
    let points = points.max(2);
    (0..points).map(|i| if i + 1 == points { upper } else { upper * i as f64 / (points - 1) as f64 }).collect()
}

fn check_regime_path(params: &ModelParams, ks: &[f64]) -> CheckOutcome {
    let mut previous: Option<Regime> = None;
    let mut changes = 0;
    for &k in ks {
        let p = params.with_k(k);
        let eq = match solve_game(&p) {
            Ok(eq) => eq,
            Err(e) => return CheckOutcome::new("regime_argmax_consistency", false, format!("k = {k}: {e}")),
        };
        let profits = match scenario_profits(&p) {
            Ok(sp) => sp,
            Err(e) => return CheckOutcome::new("regime_argmax_consistency", false, format!("k = {k}: {e}")),
        };
        let best = profits.as_array().into_iter().fold(f64::NEG_INFINITY, f64::max);
        if profits.get(eq.regime) < best - tol::EQ_ABS {
            return CheckOutcome::new("regime_argmax_consistency", false, format!("k = {k}: {} is not the argmax", eq.regime));
        }
        if let Some(prev) = previous {
            if prev != eq.regime {
                changes += 1;
                if eq.regime < prev {
                    return CheckOutcome::new(
                        "regime_argmax_consistency",
                        false,
                        format!("k = {k}: regime moved back from {prev} to {}", eq.regime),
                    );
                }
            }
        }
        previous = Some(eq.regime);
    }
    CheckOutcome::new(
        "regime_argmax_consistency",
        changes <= 2,
        format!("{} k values, {changes} regime changes", ks.len()),
    )
}

/// Two scenarios whose closed-form profits coincide are both optimal; the
/// oracle's numeric noise may pick either.
pub fn scenarios_tie(params: &ModelParams, a: Regime, b: Regime) -> bool {
    scenario_profits(params).map_or(false, |sp| {
        let (x, y) = (sp.get(a), sp.get(b));
        (x - y).abs() <= tol::EQ_ABS * x.abs().max(y.abs()).max(1.0)
    })
}

fn check_oracle_game(params: &ModelParams, ks: &[f64], opts: &VerifyOptions) -> Result<Vec<CheckOutcome>, VerifyError> {
    let step = opts.oracle.eta_step(params.eta_cap);
    let mut worst = 0.0f64;
    let mut mismatch: Option<String> = None;
    let mut high_fee_wins = 0;
    for &k in ks {
        let p = params.with_k(k);
        let closed = match solve_game(&p) {
            Ok(eq) => eq,
            Err(e) => {
                mismatch.get_or_insert(format!("k = {k}: closed form failed: {e}"));
                continue;
            }
        };
        let oracle = oracle_solve_game(&p, &opts.oracle)?;
        high_fee_wins += oracle.high_fee_wins;
        let o = oracle.equilibrium;
        let rel = tol::rel_diff(closed.incumbent_profit(), oracle.incumbent_profit);
        worst = worst.max(rel);
        let agree = o.regime == closed.regime
            && o.winner2 == closed.winner2
            && o.strategy.w1 == closed.strategy.w1
            && (o.strategy.eta1 - closed.strategy.eta1).abs() <= step;
        if !agree && !scenarios_tie(&p, closed.regime, o.regime) {
            mismatch.get_or_insert(format!(
                "k = {k}: closed form {} ({}, {}), oracle {} ({}, {})",
                closed.regime, closed.strategy.w1, closed.strategy.eta1, o.regime, o.strategy.w1, o.strategy.eta1
            ));
        }
    }
    Ok(vec![
        CheckOutcome::new(
            "oracle_strategy_agreement",
            mismatch.is_none(),
            mismatch.unwrap_or_else(|| format!("{} k values agree on regime, winner and strategy", ks.len())),
        ),
        CheckOutcome::new(
            "oracle_profit_agreement",
            worst <= opts.oracle_rel_tol,
            format!("max relative gap {worst:.3e} (tolerance {:.3e})", opts.oracle_rel_tol),
        ),
        CheckOutcome::new(
            "high_fee_period2_never_wins",
            high_fee_wins == 0,
            format!("{high_fee_wins} grid nodes where w_H kept the deployer"),
        ),
    ])
}

fn check_boundary(params: &ModelParams) -> CheckOutcome {
    let eta_h = match eta_bar_high(params) {
        Ok(v) => v,
        Err(e) => return CheckOutcome::new("winning_boundary_exactness", false, e.to_string()),
    };
    if eta_h > params.eta_cap {
        return CheckOutcome::new("winning_boundary_exactness", true, "threshold above the cap, nothing to check");
    }
    let s = Strategy::from_fee(params, Fee::High, eta_h);
    let alpha1 = q1_star(params, &s);
    let inc = period2_profit_incumbent(params, alpha1, params.w_low, params.eta_cap).profit;
    let ent = period2_profit_entrant(params, eta_h, params.eta_cap, params.w_low).profit;
    let gap = (inc - ent).abs();
    CheckOutcome::new(
        "winning_boundary_exactness",
        gap <= tol::EQ_ABS * inc.abs().max(1.0),
        format!("|incumbent - entrant| = {gap:.3e} at eta_H = {eta_h}"),
    )
}

fn check_welfare_rows(params: &ModelParams, ks: &[f64]) -> CheckOutcome {
    for &k in ks {
        let p = params.with_k(k);
        for regime in Regime::ALL {
            let result = scenario_equilibrium(&p, regime)
                .map_err(|e| e.to_string())
                .and_then(|eq| welfare_of(&p, &eq).map_err(|e| e.to_string()));
            if let Err(e) = result {
                return CheckOutcome::new("welfare_table_rebuild", false, format!("k = {k}: {e}"));
            }
        }
    }
    CheckOutcome::new("welfare_table_rebuild", true, format!("{} rows match their rebuild", 3 * ks.len()))
}

fn check_integrated(params: &ModelParams, opts: &VerifyOptions) -> Result<CheckOutcome, VerifyError> {
    let base = params.with_subsidy(0.0);
    let closed = match solve_integrated(&base) {
        Ok(v) => v,
        Err(e) => return Ok(CheckOutcome::new("integrated_oracle_agreement", false, e.to_string())),
    };
    let oracle = oracle_solve_integrated(&base, &opts.oracle)?;
    let gaps = [
        tol::rel_diff(closed.q1v, oracle.q1v),
        tol::rel_diff(closed.q2v, oracle.q2v),
        tol::rel_diff(closed.profit, oracle.profit),
    ];
    let worst = gaps.into_iter().fold(0.0, f64::max);
    let open = oracle.eta1v == params.eta_cap && oracle.eta2v == params.eta_cap;
    Ok(CheckOutcome::new(
        "integrated_oracle_agreement",
        open && worst <= tol::ORACLE_REL,
        format!("openness ({}, {}), max relative gap {worst:.3e}", oracle.eta1v, oracle.eta2v),
    ))
}

fn check_trap(params: &ModelParams) -> CheckOutcome {
    match openness_trap_threshold(params) {
        Ok(TrapThreshold::Threshold { k_bar, residual, .. }) => CheckOutcome::new(
            "openness_trap_root",
            residual < 1e-8,
            format!("k_bar = {k_bar}, residual {residual:.3e}"),
        ),
        Ok(TrapThreshold::NoTrap { sign_changes }) => {
            CheckOutcome::new("openness_trap_root", true, format!("no trap ({sign_changes} sign changes)"))
        }
        Err(e) => CheckOutcome::new("openness_trap_root", false, e.to_string()),
    }
}

fn check_subsidy(params: &ModelParams) -> Vec<CheckOutcome> {
    let base = params.with_subsidy(0.0);
    let limit = (|| -> Result<f64, String> {
        let baseline = solve_baseline(&base).map_err(|e| e.to_string())?;
        let bw = welfare_of(&base, &baseline).map_err(|e| e.to_string())?;
        let tiny = solve_subsidized(&params.with_subsidy(1e-8)).map_err(|e| e.to_string())?;
        let te = tiny.equilibrium;
        if te.regime != baseline.regime || te.winner2 != baseline.winner2 {
            return Err(format!("regime {} vs {}", te.regime, baseline.regime));
        }
        let pairs = [
            (te.strategy.eta1, baseline.strategy.eta1),
            (te.strategy.w1, baseline.strategy.w1),
            (te.period1.effort, baseline.period1.effort),
            (te.period2.effort, baseline.period2.effort),
            (tiny.welfare.dev1, bw.dev1),
            (tiny.welfare.dev2, bw.dev2),
            (tiny.welfare.deployer, bw.deployer),
            (tiny.welfare.consumer, bw.consumer),
        ];
        Ok(pairs.into_iter().map(|(a, b)| tol::rel_diff(a, b)).fold(0.0, f64::max))
    })();
    let limit_check = match limit {
        Ok(gap) => CheckOutcome::new("subsidy_zero_limit", gap <= tol::ORACLE_REL, format!("max relative gap {gap:.3e}")),
        Err(e) => CheckOutcome::new("subsidy_zero_limit", false, e),
    };
    let before = regime_thresholds(&base);
    let after = regime_thresholds(params);
    let shift = CheckOutcome::new(
        "subsidy_threshold_shift",
        after.k_bar_1 > before.k_bar_1 && after.k_bar_2 > before.k_bar_2,
        format!(
            "k_bar_1 {} -> {}, k_bar_2 {} -> {}",
            before.k_bar_1, after.k_bar_1, before.k_bar_2, after.k_bar_2
        ),
    );
    vec![limit_check, shift]
}

/// Runs the full suite for one parameter file. Invalid parameters are an
/// error rather than a failed check.
pub fn run_verification(params: &ModelParams, opts: &VerifyOptions) -> Result<VerifyReport, VerifyError> {
    ensure_valid(params)?;
    opts.oracle.validate()?;
    let ks = k_grid(k_max(&params.with_k(0.0))?, opts.k_points);

    let mut checks = vec![check_regime_path(params, &ks)];
    checks.extend(check_oracle_game(params, &ks, opts)?);
    checks.push(check_boundary(params));
    checks.push(check_welfare_rows(params, &ks));
    checks.push(check_integrated(params, opts)?);
    if params.s == 0.0 {
        checks.push(check_trap(params));
    } else {
        checks.extend(check_subsidy(params));
    }
    Ok(VerifyReport { checks })
}
