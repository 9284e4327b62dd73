//! Numeric tolerances shared by solvers, cross-checks and the verifier.

/// Absolute tolerance for equality assertions between closed forms.
pub const EQ_ABS: f64 = 1e-9;

/// Relative tolerance for closed-form versus oracle agreement on efforts.
pub const ORACLE_REL: f64 = 1e-6;

/// Relative tolerance when a welfare table row is checked against its rebuild.
pub const REBUILD_REL: f64 = 1e-6;

/// Relative tolerance on incumbent total profit, closed form versus oracle.
pub const PROFIT_REL: f64 = 1e-5;

/// Relative band inside which the deployer's period-2 comparison counts as a tie.
pub const TIE_REL: f64 = 1e-12;

/// `|a - b| <= rel * max(|a|, |b|, 1)`.
pub fn close_rel(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

/// Plain relative difference, with the scale floored at 1.
pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}
