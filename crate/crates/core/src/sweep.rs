//! Parameter sweeps rendered as CSV.

use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use crate::closed_form::solve_baseline;
use crate::extensions::{solve_integrated, solve_subsidized};
use crate::params::{validate, ModelParams};
use crate::welfare::{mandate_equilibrium, welfare_of, WelfareBreakdown};
use crate::outcome::Equilibrium;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SweepError {
    #[error("invalid sweep: {0}")]
    Plan(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    K,
    S,
}

impl SweepParam {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepParam::K => "k",
            SweepParam::S => "s",
        }
    }
}

impl FromStr for SweepParam {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "k" => Ok(SweepParam::K),
            "s" => Ok(SweepParam::S),
            other => Err(format!("cannot sweep `{other}` (expected k or s)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Baseline,
    Mandate,
    Integration,
    Subsidy,
}

impl Scenario {
    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::Baseline => "baseline",
            Scenario::Mandate => "mandate",
            Scenario::Integration => "integration",
            Scenario::Subsidy => "subsidy",
        }
    }
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "baseline" => Ok(Scenario::Baseline),
            "mandate" => Ok(Scenario::Mandate),
            "integration" => Ok(Scenario::Integration),
            "subsidy" => Ok(Scenario::Subsidy),
            other => Err(format!("unknown scenario `{other}` (expected baseline, mandate, integration or subsidy)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPlan {
    pub parameter: SweepParam,
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
    pub scenario: Scenario,
}

impl SweepPlan {
    pub fn validate(&self) -> Result<(), SweepError> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo < self.hi) {
            return Err(SweepError::Plan(format!("need finite lo < hi (got {} and {})", self.lo, self.hi)));
        }
        if self.steps < 2 {
            return Err(SweepError::Plan(format!("steps must be >= 2 (got {})", self.steps)));
        }
        if self.parameter == SweepParam::S && self.scenario != Scenario::Subsidy {
            return Err(SweepError::Plan("sweeping s requires the subsidy scenario".into()));
        }
        Ok(())
    }

    /// `lo + (hi - lo) * i / (steps - 1)`, with the last node pinned to `hi`.
    pub fn grid(&self) -> Vec<f64> {
        (0..self.steps)
            .map(|i| {
                if i + 1 == self.steps {
                    self.hi
                } else {
                    self.lo + (self.hi - self.lo) * i as f64 / (self.steps - 1) as f64
                }
            })
            .collect()
    }

    pub fn header(&self) -> Vec<&'static str> {
        let mut cols = vec![self.parameter.as_str()];
        cols.extend(BASE_COLUMNS);
        cols.extend(match self.scenario {
            Scenario::Baseline => &[][..],
            Scenario::Mandate => &MANDATE_COLUMNS[..],
            Scenario::Integration => &INTEGRATION_COLUMNS[..],
            Scenario::Subsidy => &SUBSIDY_COLUMNS[..],
        });
        cols.push("status");
        cols
    }
}

const BASE_COLUMNS: [&str; 10] = [
    "regime",
    "w1",
    "eta1",
    "Q1",
    "Q2",
    "pi_dev1",
    "pi_dev2",
    "profit_deployer",
    "consumer_surplus",
    "social_welfare",
];

const MANDATE_COLUMNS: [&str; 7] = [
    "Q1_mandate",
    "Q2_mandate",
    "pi_dev1_mandate",
    "pi_dev2_mandate",
    "profit_deployer_mandate",
    "consumer_surplus_mandate",
    "social_welfare_mandate",
];

const INTEGRATION_COLUMNS: [&str; 7] = [
    "eta1v",
    "Q1v",
    "Q2v",
    "profit_integrated",
    "consumer_integrated",
    "social_integrated",
    "chain_profit",
];

const SUBSIDY_COLUMNS: [&str; 12] = [
    "regime_subsidy",
    "w1_subsidy",
    "eta1_subsidy",
    "Q1_subsidy",
    "Q2_subsidy",
    "pi_dev1_subsidy",
    "pi_dev2_subsidy",
    "profit_deployer_subsidy",
    "consumer_surplus_subsidy",
    "social_welfare_subsidy",
    "subsidy_spend",
    "social_net_subsidy",
];

/// Formats like C's `%.12g`.
pub fn format_g12(x: f64) -> String {
    const PRECISION: i32 = 12;
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.*e}", (PRECISION - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= PRECISION {
        let mantissa = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (PRECISION - 1 - exp) as usize;
        strip_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn push_equilibrium(cells: &mut Vec<String>, eq: &Equilibrium, w: &WelfareBreakdown) {
    cells.push(eq.regime.as_str().to_string());
    for v in [eq.strategy.w1, eq.strategy.eta1, eq.period1.effort, eq.period2.effort] {
        cells.push(format_g12(v));
    }
    push_welfare(cells, w);
}

fn push_welfare(cells: &mut Vec<String>, w: &WelfareBreakdown) {
    for v in [w.dev1, w.dev2, w.deployer, w.consumer, w.social] {
        cells.push(format_g12(v));
    }
}

fn point_params(base: &ModelParams, plan: &SweepPlan, x: f64) -> (ModelParams, ModelParams) {
    let point = match plan.parameter {
        SweepParam::K => base.with_k(x),
        SweepParam::S => base.with_subsidy(x),
    };
    let unsubsidized = point.with_subsidy(0.0);
    let game = if plan.scenario == Scenario::Subsidy { point } else { unsubsidized };
    (unsubsidized, game)
}

fn status(unsubsidized: &ModelParams, game: &ModelParams) -> String {
    let mut codes: Vec<&'static str> = Vec::new();
    for report in [validate(unsubsidized), validate(game)] {
        for v in &report.violations {
            if !codes.contains(&v.code()) {
                codes.push(v.code());
            }
        }
    }
    if codes.is_empty() {
        "ok".into()
    } else {
        codes.join(";")
    }
}

fn row_values(unsubsidized: &ModelParams, game: &ModelParams, scenario: Scenario) -> Result<Vec<String>, String> {
    let mut cells = Vec::new();
    let eq = solve_baseline(unsubsidized).map_err(|e| e.to_string())?;
    let w = welfare_of(unsubsidized, &eq).map_err(|e| e.to_string())?;
    push_equilibrium(&mut cells, &eq, &w);
    match scenario {
        Scenario::Baseline => {}
        Scenario::Mandate => {
            let m = mandate_equilibrium(unsubsidized).map_err(|e| e.to_string())?;
            let mw = welfare_of(unsubsidized, &m).map_err(|e| e.to_string())?;
            cells.push(format_g12(m.period1.effort));
            cells.push(format_g12(m.period2.effort));
            push_welfare(&mut cells, &mw);
        }
        Scenario::Integration => {
            let v = solve_integrated(unsubsidized).map_err(|e| e.to_string())?;
            for x in [v.eta1v, v.q1v, v.q2v, v.profit, v.consumer, v.social, w.chain_profit()] {
                cells.push(format_g12(x));
            }
        }
        Scenario::Subsidy => {
            let sub = solve_subsidized(game).map_err(|e| e.to_string())?;
            push_equilibrium(&mut cells, &sub.equilibrium, &sub.welfare);
            cells.push(format_g12(sub.subsidy_spend));
            cells.push(format_g12(sub.social_net_of_subsidy()));
        }
    }
    Ok(cells)
}

fn render_row(base: &ModelParams, plan: &SweepPlan, x: f64, width: usize) -> String {
    let (unsubsidized, game) = point_params(base, plan, x);
    let mut status = status(&unsubsidized, &game);
    let values = if status == "ok" {
        match row_values(&unsubsidized, &game, plan.scenario) {
            Ok(v) => v,
            Err(_) => {
                status = "solver_error".into();
                vec![String::new(); width]
            }
        }
    } else {
        vec![String::new(); width]
    };
    let mut line = format_g12(x);
    for v in values {
        line.push(',');
        line.push_str(&v);
    }
    let _ = write!(line, ",{status}");
    line
}

/// Evaluates every grid point (concurrently) and returns the CSV text,
/// header first, rows in grid order, LF line endings.
pub fn sweep_csv(base: &ModelParams, plan: &SweepPlan) -> Result<String, SweepError> {
    plan.validate()?;
    let header = plan.header();
    let width = header.len() - 2;
    let rows: Vec<String> = plan.grid().into_par_iter().map(|x| render_row(base, plan, x, width)).collect();
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row);
        out.push('\n');
    }
    Ok(out)
}
