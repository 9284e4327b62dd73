//! Exogenous parameters of the value-chain game and their admissibility rules.

use std::fmt;

use thiserror::Error;

/// Every exogenous symbol of the game.
///
/// All quantities are plain dimensionless reals. A value of this type is not
/// guaranteed to be admissible; call [`validate`] (solvers do this for you).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Revenue per unit of user engagement.
    pub theta: f64,
    /// Fine-tuning cost scalar.
    pub c: f64,
    /// High per-unit license fee.
    pub w_high: f64,
    /// Low per-unit license fee.
    pub w_low: f64,
    /// Openness cap.
    pub eta_cap: f64,
    /// Data-flywheel strength.
    pub k: f64,
    /// Per-unit adoption subsidy paid to the deployer (zero in the baseline game).
    pub s: f64,
}

impl ModelParams {
    pub fn new(theta: f64, c: f64, w_high: f64, w_low: f64, eta_cap: f64, k: f64, s: f64) -> Self {
        Self { theta, c, w_high, w_low, eta_cap, k, s }
    }

    /// Reference set A: all three regimes appear as `k` rises.
    pub fn reference_baseline(k: f64) -> Self {
        Self::new(5.0, 1.0, 2.5, 0.5, 1.5, k, 0.0)
    }

    /// Reference set B: a subsidized set with a higher low fee.
    pub fn reference_subsidy(k: f64) -> Self {
        Self::new(5.0, 1.0, 2.5, 0.8, 1.5, k, 0.5)
    }

    pub fn with_k(self, k: f64) -> Self {
        Self { k, ..self }
    }

    pub fn with_subsidy(self, s: f64) -> Self {
        Self { s, ..self }
    }

    /// Deployer's gross margin base `theta + s`; every margin in the game is
    /// this minus the fee charged.
    pub fn margin_base(&self) -> f64 {
        self.theta + self.s
    }

    /// Fee level for a [`Fee`] choice.
    pub fn fee(&self, fee: Fee) -> f64 {
        match fee {
            Fee::High => self.w_high,
            Fee::Low => self.w_low,
        }
    }

    fn fields(&self) -> [(&'static str, f64); 7] {
        [
            ("theta", self.theta),
            ("c", self.c),
            ("w_high", self.w_high),
            ("w_low", self.w_low),
            ("eta_cap", self.eta_cap),
            ("k", self.k),
            ("s", self.s),
        ]
    }
}

/// Binary fee menu available to the incumbent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Fee {
    High,
    Low,
}

/// The incumbent's first-period strategic posture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Regime {
    /// High fee, full openness, cede period 2.
    Harvest,
    /// High fee, openness restricted to the high-fee winning threshold.
    Defend,
    /// Low fee, openness at the low-fee winning threshold.
    Dominate,
}

impl Regime {
    pub const ALL: [Regime; 3] = [Regime::Harvest, Regime::Defend, Regime::Dominate];

    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Harvest => "Harvest",
            Regime::Defend => "Defend",
            Regime::Dominate => "Dominate",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Incumbent first-period action pair `(w1, eta1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Strategy {
    pub w1: f64,
    pub eta1: f64,
}

impl Strategy {
    pub fn new(w1: f64, eta1: f64) -> Self {
        Self { w1, eta1 }
    }

    /// Builds a strategy from a fee choice, so `w1` is always on the menu.
    pub fn from_fee(params: &ModelParams, fee: Fee, eta1: f64) -> Self {
        Self { w1: params.fee(fee), eta1 }
    }

    /// Checks the fee is on the binary menu and openness is within the cap.
    pub fn check(&self, params: &ModelParams) -> Result<(), ParamError> {
        if self.w1 != params.w_high && self.w1 != params.w_low {
            return Err(ParamError::FeeNotOnMenu(self.w1));
        }
        if !(0.0..=params.eta_cap).contains(&self.eta1) {
            return Err(ParamError::OpennessOutOfRange { eta1: self.eta1, cap: params.eta_cap });
        }
        Ok(())
    }
}

/// One violated standing assumption.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NonFinite(&'static str),
    ThetaNotPositive,
    CostNotPositive,
    EtaCapNotPositive,
    LowFeeNegative,
    LowFeeAboveHighFee,
    HighFeeAboveHalfTheta,
    KNegative,
    SubsidyOutOfRange,
    KAboveMax { k: f64, k_max: f64 },
    /// `theta - w_high + s <= 0`, so the flywheel bound is undefined.
    KMaxUndefined,
}

impl Violation {
    /// Stable short identifier, used in CSV status columns.
    pub fn code(&self) -> &'static str {
        match self {
            Violation::NonFinite(_) => "non_finite",
            Violation::ThetaNotPositive => "theta_not_positive",
            Violation::CostNotPositive => "c_not_positive",
            Violation::EtaCapNotPositive => "eta_cap_not_positive",
            Violation::LowFeeNegative => "w_low_negative",
            Violation::LowFeeAboveHighFee => "w_low_above_w_high",
            Violation::HighFeeAboveHalfTheta => "w_high_above_half_theta",
            Violation::KNegative => "k_negative",
            Violation::SubsidyOutOfRange => "s_out_of_range",
            Violation::KAboveMax { .. } => "k_above_k_max",
            Violation::KMaxUndefined => "k_max_undefined",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonFinite(name) => write!(f, "{name} is not a finite number"),
            Violation::ThetaNotPositive => f.write_str("theta must be positive"),
            Violation::CostNotPositive => f.write_str("c must be positive"),
            Violation::EtaCapNotPositive => f.write_str("eta_cap must be positive"),
            Violation::LowFeeNegative => f.write_str("w_low is negative"),
            Violation::LowFeeAboveHighFee => f.write_str("w_low exceeds w_high"),
            Violation::HighFeeAboveHalfTheta => f.write_str("w_high exceeds theta/2"),
            Violation::KNegative => f.write_str("k is negative"),
            Violation::SubsidyOutOfRange => f.write_str("s outside [0, w_low]"),
            Violation::KAboveMax { k, k_max } => write!(f, "k exceeds k_max ({k} > {k_max})"),
            Violation::KMaxUndefined => f.write_str("k_max undefined: theta - w_high + s <= 0"),
        }
    }
}

/// Result of [`validate`]: every violated invariant, in a fixed order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, code: &str) -> bool {
        self.violations.iter().any(|v| v.code() == code)
    }

    /// `;`-joined violation codes, `ok` when empty.
    pub fn status(&self) -> String {
        if self.is_valid() {
            "ok".to_string()
        } else {
            self.violations.iter().map(Violation::code).collect::<Vec<_>>().join(";")
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            return f.write_str("all invariants hold");
        }
        let msgs: Vec<String> = self.violations.iter().map(ToString::to_string).collect();
        f.write_str(&msgs.join("; "))
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamError {
    #[error("invalid parameters: {0}")]
    Invalid(ValidationReport),
    #[error("k_max undefined: theta - w_high + s = {0} is not positive")]
    KMaxUndefined(f64),
    #[error("the baseline game requires s = 0 (got s = {0})")]
    SubsidyInBaseline(f64),
    #[error("fee {0} is neither w_high nor w_low")]
    FeeNotOnMenu(f64),
    #[error("openness {eta1} outside [0, {cap}]")]
    OpennessOutOfRange { eta1: f64, cap: f64 },
    #[error("threshold denominator {0} is not positive")]
    ThresholdDomain(f64),
}

/// Upper bound on the flywheel strength at the parameters' subsidy level.
///
/// `min{ 2c*eta / ((1+eta)(T - w_L)), 2c(2T - w_H - w_L)(w_H - w_L) / ((T - w_H)^2 (T - w_L)) }`
/// with `T = theta + s`. The first argument keeps the low-fee winning
/// threshold under the cap; the second makes a high period-2 fee always lose.
pub fn k_max(params: &ModelParams) -> Result<f64, ParamError> {
    let t = params.margin_base();
    let high_margin = t - params.w_high;
    if !(high_margin > 0.0) {
        return Err(ParamError::KMaxUndefined(high_margin));
    }
    let low_margin = t - params.w_low;
    let c = params.c;
    let eta = params.eta_cap;
    let cap_bound = 2.0 * c * eta / ((1.0 + eta) * low_margin);
    let fee_bound = 2.0 * c * (2.0 * t - params.w_high - params.w_low) * (params.w_high - params.w_low)
        / (high_margin * high_margin * low_margin);
    Ok(cap_bound.min(fee_bound))
}

/// Checks every standing assumption. Never fails; an empty report means valid.
pub fn validate(params: &ModelParams) -> ValidationReport {
    let mut violations = Vec::new();
    for (name, value) in params.fields() {
        if !value.is_finite() {
            violations.push(Violation::NonFinite(name));
        }
    }
    if !violations.is_empty() {
        return ValidationReport { violations };
    }
    let p = params;
    if p.theta <= 0.0 {
        violations.push(Violation::ThetaNotPositive);
    }
    if p.c <= 0.0 {
        violations.push(Violation::CostNotPositive);
    }
    if p.eta_cap <= 0.0 {
        violations.push(Violation::EtaCapNotPositive);
    }
    if p.w_low < 0.0 {
        violations.push(Violation::LowFeeNegative);
    }
    if p.w_low > p.w_high {
        violations.push(Violation::LowFeeAboveHighFee);
    }
    if p.w_high > p.theta / 2.0 {
        violations.push(Violation::HighFeeAboveHalfTheta);
    }
    if p.k < 0.0 {
        violations.push(Violation::KNegative);
    }
    if p.s < 0.0 || p.s > p.w_low {
        violations.push(Violation::SubsidyOutOfRange);
    }
    match k_max(p) {
        Ok(bound) => {
            if p.k > bound {
                violations.push(Violation::KAboveMax { k: p.k, k_max: bound });
            }
        }
        Err(_) => violations.push(Violation::KMaxUndefined),
    }
    ValidationReport { violations }
}

/// Fail-fast form of [`validate`] used by solver entry points.
pub fn ensure_valid(params: &ModelParams) -> Result<(), ParamError> {
    let report = validate(params);
    if report.is_valid() {
        Ok(())
    } else {
        Err(ParamError::Invalid(report))
    }
}
