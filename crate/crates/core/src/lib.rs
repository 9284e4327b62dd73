//! Equilibria, welfare and policy counterfactuals for a two-period game in
//! which a foundation-model incumbent picks a license fee and an openness
//! level, a deployer fine-tunes on top of it, and an entrant waits to take
//! over in the second period.
//!
//! Closed forms live in [`closed_form`], [`welfare`] and [`extensions`]; the
//! independent brute-force search in [`oracle`] checks them.

pub mod closed_form;
pub mod config;
pub mod extensions;
pub mod oracle;
pub mod outcome;
pub mod params;
pub mod roots;
pub mod sweep;
pub mod tol;
pub mod verify;
pub mod welfare;

pub use closed_form::{
    eta_bar_high, eta_bar_low, incumbent_wins, period2_profit_entrant, period2_profit_incumbent, q1_star,
    regime_thresholds, scenario_profits, solve_baseline, RegimeThresholds, ScenarioProfits, SolveError,
};
pub use extensions::{
    integration_thresholds, solve_integrated, solve_subsidized, subsidy_comparison, Counterfactual, PolicyComparison,
    SubsidizedEquilibrium, SubsidyInterval,
};
pub use oracle::{oracle_best_effort, oracle_solve_game, oracle_solve_integrated, OracleConfig};
pub use outcome::{Equilibrium, IntegratedOutcome, PeriodOutcome, Winner};
pub use params::{k_max, validate, Fee, ModelParams, ParamError, Regime, Strategy, ValidationReport};
pub use welfare::{openness_trap_threshold, welfare_baseline, welfare_mandate, TrapThreshold, WelfareBreakdown};
