//! Brute-force game solver used to check the closed forms.
//!
//! Efforts come from golden-section search, first-period strategies from an
//! exhaustive grid over `{w_H, w_L} x [0, eta_cap]`, and the period-2 subgame
//! from comparing the deployer's numerically optimized profits. Nothing here
//! calls into `closed_form`, `welfare` or `extensions`.

use rayon::prelude::*;
use thiserror::Error;

use crate::outcome::{Equilibrium, IntegratedOutcome, PeriodOutcome, Winner};
use crate::params::{ensure_valid, ModelParams, ParamError, Regime, Strategy};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("oracle config: {0}")]
    Config(String),
    #[error("cost denominator must be positive (got {0})")]
    NonPositiveDenominator(f64),
    #[error(transparent)]
    Param(#[from] ParamError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    /// Samples of `eta1` on `[0, eta_cap]`, endpoints included.
    pub eta_grid_points: usize,
    /// Bracket width at which golden-section search stops.
    pub effort_search: f64,
    /// Sweep density used when scanning `k` for threshold bisection.
    pub k_grid_points: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self { eta_grid_points: 10001, effort_search: 1e-10, k_grid_points: 200 }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<(), OracleError> {
        if self.eta_grid_points < 3 {
            return Err(OracleError::Config(format!("eta_grid_points must be >= 3 (got {})", self.eta_grid_points)));
        }
        if !(self.effort_search > 0.0) {
            return Err(OracleError::Config(format!("effort_search must be positive (got {})", self.effort_search)));
        }
        if self.k_grid_points < 2 {
            return Err(OracleError::Config(format!("k_grid_points must be >= 2 (got {})", self.k_grid_points)));
        }
        Ok(())
    }

    /// Spacing of the `eta1` grid for a given cap.
    pub fn eta_step(&self, eta_cap: f64) -> f64 {
        eta_cap / (self.eta_grid_points - 1) as f64
    }

    fn eta_at(&self, eta_cap: f64, i: usize) -> f64 {
        if i + 1 == self.eta_grid_points {
            eta_cap
        } else {
            eta_cap * i as f64 / (self.eta_grid_points - 1) as f64
        }
    }
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Maximizes a concave `f` on `[0, inf)`: doubles an upper bracket until `f`
/// turns down, then golden-section search. Returns `(argmax, max)`.
fn golden_max(f: impl Fn(f64) -> f64, tol: f64) -> (f64, f64) {
    let mut hi = 1.0;
    while f(2.0 * hi) > f(hi) && hi < 1e300 {
        hi *= 2.0;
    }
    let (mut a, mut b) = (0.0, 2.0 * hi);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..500 {
        if b - a <= tol {
            break;
        }
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        }
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    let f0 = f(0.0);
    if f0 >= fx {
        (0.0, f0)
    } else {
        (x, fx)
    }
}

/// Numeric maximizer of `margin * Q - c * Q^2 / cost_denominator` over `Q >= 0`.
pub fn oracle_best_effort(margin: f64, c: f64, cost_denominator: f64, config: &OracleConfig) -> Result<f64, OracleError> {
    if !(cost_denominator > 0.0) {
        return Err(OracleError::NonPositiveDenominator(cost_denominator));
    }
    if margin <= 0.0 {
        return Ok(0.0);
    }
    Ok(effort_and_value(margin, c, cost_denominator, config.effort_search).0)
}

fn effort_and_value(margin: f64, c: f64, cost_denominator: f64, tol: f64) -> (f64, f64) {
    if margin <= 0.0 {
        return (0.0, 0.0);
    }
    golden_max(|q| margin * q - c * q * q / cost_denominator, tol)
}

/// Everything the oracle learns about one first-period strategy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrategyEvaluation {
    pub strategy: Strategy,
    pub q1: f64,
    pub winner: Winner,
    /// Fee the incumbent would charge in period 2 (its best winning fee, or `w_L` when it cannot win).
    pub w2: f64,
    pub q2: f64,
    /// Deployer's best period-2 profit with the entrant.
    pub deployer_entrant: f64,
    /// Deployer's best period-2 profit with the incumbent at `w_H` and at `w_L`.
    pub deployer_incumbent: [f64; 2],
    pub incumbent_profit: f64,
    pub entrant_profit: f64,
    /// The incumbent keeps the deployer while charging `w_H` in period 2.
    pub high_fee_deviation_won: bool,
}

/// Plays out one first-period strategy by backward induction with numeric best responses.
pub fn oracle_evaluate_strategy(params: &ModelParams, strategy: Strategy, config: &OracleConfig) -> StrategyEvaluation {
    let t = params.margin_base();
    let c = params.c;
    let tol = config.effort_search;
    let eta = params.eta_cap;
    let (q1, _) = effort_and_value(t - strategy.w1, c, 1.0 + strategy.eta1, tol);

    let entrant_cost = (1.0 + strategy.eta1) * (1.0 + eta);
    let (q_entrant, deployer_entrant) = effort_and_value(t - params.w_low, c, entrant_cost, tol);

    let incumbent_cost = (1.0 + params.k * q1) * (1.0 + eta);
    let fees = [params.w_high, params.w_low];
    let offers = fees.map(|w2| effort_and_value(t - w2, c, incumbent_cost, tol));
    let deployer_incumbent = offers.map(|(_, v)| v);

    let mut best: Option<(f64, f64)> = None;
    for (w2, (q2, value)) in fees.into_iter().zip(offers) {
        if value >= deployer_entrant && best.map_or(true, |(bw, bq)| w2 * q2 > bw * bq) {
            best = Some((w2, q2));
        }
    }
    let first = strategy.w1 * q1;
    let (winner, w2, q2, incumbent_profit, entrant_profit) = match best {
        Some((w2, q2)) => (Winner::Incumbent, w2, q2, first + w2 * q2, 0.0),
        None => (Winner::Entrant, params.w_low, q_entrant, first, params.w_low * q_entrant),
    };
    StrategyEvaluation {
        strategy,
        q1,
        winner,
        w2,
        q2,
        deployer_entrant,
        deployer_incumbent,
        incumbent_profit,
        entrant_profit,
        high_fee_deviation_won: winner == Winner::Incumbent && w2 == params.w_high && params.w_high != params.w_low,
    }
}

/// Result of the exhaustive strategy search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleSolution {
    pub equilibrium: Equilibrium,
    pub incumbent_profit: f64,
    /// Grid nodes at which the incumbent kept the deployer while charging `w_H` in period 2.
    pub high_fee_wins: usize,
}

const FLIP_BISECTIONS: usize = 80;

fn refine_flip(params: &ModelParams, w1: f64, win_eta: f64, lose_eta: f64, config: &OracleConfig) -> StrategyEvaluation {
    let (mut lo, mut hi) = (win_eta, lose_eta);
    let mut best = oracle_evaluate_strategy(params, Strategy::new(w1, lo), config);
    for _ in 0..FLIP_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let eval = oracle_evaluate_strategy(params, Strategy::new(w1, mid), config);
        if eval.winner == Winner::Incumbent {
            lo = mid;
            best = eval;
        } else {
            hi = mid;
        }
    }
    best
}

/// Searches every `(w1, eta1)` on the grid, refines each win/lose boundary by
/// bisection, and returns the incumbent's best strategy.
///
/// Candidates are ranked in the order `w_H` before `w_L`, higher `eta1` first;
/// only a strictly larger profit displaces an earlier candidate.
pub fn oracle_solve_game(params: &ModelParams, config: &OracleConfig) -> Result<OracleSolution, OracleError> {
    config.validate()?;
    ensure_valid(params)?;
    let n = config.eta_grid_points;
    let mut fees = vec![params.w_high];
    if params.w_low != params.w_high {
        fees.push(params.w_low);
    }

    let mut candidates = Vec::new();
    let mut high_fee_wins = 0;
    for &w1 in &fees {
        let grid: Vec<StrategyEvaluation> = (0..n)
            .into_par_iter()
            .rev()
            .map(|i| oracle_evaluate_strategy(params, Strategy::new(w1, config.eta_at(params.eta_cap, i)), config))
            .collect();
        high_fee_wins += grid.iter().filter(|e| e.high_fee_deviation_won).count();
        // grid runs from eta_cap down to 0; a flip is a loss followed by a win
        let mut refined = Vec::new();
        for pair in grid.windows(2) {
            let (upper, lower) = (&pair[0], &pair[1]);
            if upper.winner == Winner::Entrant && lower.winner == Winner::Incumbent {
                refined.push(refine_flip(params, w1, lower.strategy.eta1, upper.strategy.eta1, config));
            }
        }
        let mut all: Vec<StrategyEvaluation> = grid.into_iter().chain(refined).collect();
        all.sort_by(|a, b| b.strategy.eta1.total_cmp(&a.strategy.eta1));
        candidates.extend(all);
    }

    let mut best = candidates[0];
    for cand in &candidates[1..] {
        if cand.incumbent_profit > best.incumbent_profit {
            best = *cand;
        }
    }

    let regime = match best.winner {
        Winner::Entrant => Regime::Harvest,
        Winner::Incumbent if best.strategy.w1 == params.w_high => Regime::Defend,
        Winner::Incumbent => Regime::Dominate,
    };
    let equilibrium = Equilibrium {
        regime,
        strategy: best.strategy,
        period1: PeriodOutcome::new(best.q1, best.strategy.w1 - params.s, best.strategy.eta1),
        period2: PeriodOutcome::new(best.q2, best.w2 - params.s, params.eta_cap),
        winner2: best.winner,
        w2: best.w2,
        w2_entrant: params.w_low,
        eta2: params.eta_cap,
        eta2_entrant: params.eta_cap,
    };
    Ok(OracleSolution { equilibrium, incumbent_profit: best.incumbent_profit, high_fee_wins })
}

fn grid_max(config: &OracleConfig, eta_cap: f64, f: impl Fn(f64) -> f64 + Sync) -> (f64, f64) {
    (0..config.eta_grid_points)
        .into_par_iter()
        .map(|i| {
            let eta = config.eta_at(eta_cap, i);
            (eta, f(eta))
        })
        .reduce(|| (f64::NAN, f64::NEG_INFINITY), |a, b| if b.1 > a.1 || (b.1 == a.1 && b.0 > a.0) { b } else { a })
}

/// Integrated firm searched numerically, period by period as in the
/// decentralized game: openness on the grid and effort by golden section in
/// period 1, then the same in period 2 given the realized `Q1`.
pub fn oracle_solve_integrated(params: &ModelParams, config: &OracleConfig) -> Result<IntegratedOutcome, OracleError> {
    config.validate()?;
    ensure_valid(params)?;
    let (theta, c, k, cap) = (params.theta, params.c, params.k, params.eta_cap);
    let tol = config.effort_search;

    let (eta1v, profit1) = grid_max(config, cap, |eta1| effort_and_value(theta, c, 1.0 + eta1, tol).1);
    let (q1v, _) = effort_and_value(theta, c, 1.0 + eta1v, tol);
    let flywheel = 1.0 + k * q1v;
    let (eta2v, profit2) = grid_max(config, cap, |eta2| effort_and_value(theta, c, flywheel * (1.0 + eta2), tol).1);
    let (q2v, _) = effort_and_value(theta, c, flywheel * (1.0 + eta2v), tol);
    let profit = profit1 + profit2;
    let consumer = 0.5 * (q1v * q1v + q2v * q2v);
    Ok(IntegratedOutcome { eta1v, eta2v, q1v, q2v, profit, consumer, social: profit + consumer })
}
