#![allow(dead_code)]

use fm_openness::params::{k_max, validate, ModelParams};
use rand::Rng;

pub fn set_a(k: f64) -> ModelParams {
    ModelParams::reference_baseline(k)
}

pub fn set_b(k: f64) -> ModelParams {
    ModelParams::reference_subsidy(k)
}

/// Draws a valid unsubsidized parameter set with `k` uniform on `[0, k_max)`.
pub fn random_params(rng: &mut impl Rng) -> ModelParams {
    random_params_with_subsidy(rng, false)
}

/// As [`random_params`], optionally with `s` uniform on `[0, w_low]`.
pub fn random_params_with_subsidy(rng: &mut impl Rng, subsidized: bool) -> ModelParams {
    loop {
        let theta = rng.gen_range(1.0..10.0);
        let c = rng.gen_range(0.2..3.0);
        let w_high = theta / 2.0 * rng.gen_range(0.05..1.0);
        let w_low = w_high * rng.gen_range(0.0..0.95);
        let eta_cap = rng.gen_range(0.1..4.0);
        let s = if subsidized { w_low * rng.gen_range(0.0..1.0) } else { 0.0 };
        let mut p = ModelParams::new(theta, c, w_high, w_low, eta_cap, 0.0, s);
        p.k = k_max(&p).expect("positive high margin") * rng.gen_range(0.0..1.0);
        if validate(&p).is_valid() {
            return p;
        }
    }
}

pub fn rel_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}
