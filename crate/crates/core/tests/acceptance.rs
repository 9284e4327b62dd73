//! End-to-end acceptance suite. Runs without the libtest harness so every
//! criterion prints its PASS/FAIL line even when the run succeeds.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use fm_openness::closed_form::{eta_bar_high, eta_bar_low, regime_thresholds, scenario_equilibrium, scenario_profits, solve_baseline};
use fm_openness::extensions::{
    integration_comparison, integration_thresholds, solve_integrated, solve_subsidized, subsidy_comparison,
    IntegrationThreshold,
};
use fm_openness::oracle::{oracle_solve_game, oracle_solve_integrated, OracleConfig};
use fm_openness::params::{k_max, ModelParams, Regime};
use fm_openness::sweep::{sweep_csv, Scenario, SweepParam, SweepPlan};
use fm_openness::verify::scenarios_tie;
use fm_openness::welfare::{
    mandate_equilibrium, openness_trap_threshold, rebuild, table_row, welfare_baseline, welfare_mandate, TrapThreshold,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{random_params, random_params_with_subsidy, rel_gap, set_a, set_b};

type Verdict = Result<String, String>;

const SWEEP_POINTS: usize = 200;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn sweep_ks(p: &ModelParams) -> Vec<f64> {
    let hi = k_max(p).unwrap();
    (0..SWEEP_POINTS).map(|i| hi * i as f64 / (SWEEP_POINTS - 1) as f64).collect()
}

fn argmax_regime(p: &ModelParams) -> Regime {
    scenario_profits(p).unwrap().argmax()
}

/// Locates the `k` where the scenario-profit argmax changes inside `[lo, hi]`.
fn refine_switch(base: &ModelParams, mut lo: f64, mut hi: f64) -> f64 {
    let left = argmax_regime(&base.with_k(lo));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if argmax_regime(&base.with_k(mid)) == left {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn regime_reproduction() -> Verdict {
    let base = set_a(0.0);
    let hi = k_max(&base).unwrap();
    let plan = SweepPlan { parameter: SweepParam::K, lo: 0.0, hi, steps: SWEEP_POINTS, scenario: Scenario::Baseline };
    let start = Instant::now();
    let csv = sweep_csv(&base, &plan).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed().as_secs_f64();

    let rows: Vec<(f64, String, f64)> = csv
        .lines()
        .skip(1)
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            (f[0].parse().unwrap(), f[1].to_string(), f[3].parse().unwrap())
        })
        .collect();
    ensure(rows.len() == SWEEP_POINTS, || format!("{} rows", rows.len()))?;

    let mut order: Vec<&str> = Vec::new();
    let mut switches = Vec::new();
    for (i, (_, regime, _)) in rows.iter().enumerate() {
        if order.last() != Some(&regime.as_str()) {
            order.push(regime);
            if i > 0 {
                switches.push(i);
            }
        }
    }
    ensure(order == ["Harvest", "Defend", "Dominate"], || format!("regime order {order:?}"))?;

    let th = regime_thresholds(&base);
    let mut worst = 0.0f64;
    for (&i, expected) in switches.iter().zip([th.k_bar_1, th.k_bar_2]) {
        let located = refine_switch(&base, rows[i - 1].0, rows[i].0);
        worst = worst.max((located - expected).abs());
    }
    ensure(worst <= 1e-6, || format!("breakpoint gap {worst:.3e}"))?;

    let eta: Vec<f64> = rows.iter().map(|r| r.2).collect();
    let (min_at, &min_eta) = eta.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap();
    let falls = eta[..=min_at].windows(2).all(|w| w[1] <= w[0]) && eta[0] > min_eta;
    let rises = eta[min_at..].windows(2).all(|w| w[1] >= w[0]) && *eta.last().unwrap() > min_eta;
    ensure(eta[0] == base.eta_cap && falls && rises, || "eta1 path is not max, drop, rise".into())?;
    ensure(elapsed < 1.0, || format!("sweep took {elapsed:.3} s"))?;

    Ok(format!(
        "Harvest -> Defend -> Dominate, breakpoints {:.9} and {:.9} within {worst:.1e}, eta1 {:.4} -> {min_eta:.4} -> {:.4}, sweep {elapsed:.3} s",
        th.k_bar_1,
        th.k_bar_2,
        eta[0],
        eta.last().unwrap()
    ))
}

fn compare_with_oracle(p: &ModelParams, config: &OracleConfig) -> Result<f64, String> {
    let closed = solve_baseline(p).map_err(|e| e.to_string())?;
    let oracle = oracle_solve_game(p, config).map_err(|e| e.to_string())?;
    let o = &oracle.equilibrium;
    let step = config.eta_step(p.eta_cap);
    let same = o.regime == closed.regime
        && o.winner2 == closed.winner2
        && o.strategy.w1 == closed.strategy.w1
        && (o.strategy.eta1 - closed.strategy.eta1).abs() <= step;
    ensure(same || scenarios_tie(p, closed.regime, o.regime), || {
        format!("{p:?}: closed form {} eta1 {}, oracle {} eta1 {}", closed.regime, closed.strategy.eta1, o.regime, o.strategy.eta1)
    })?;
    ensure(oracle.high_fee_wins == 0, || format!("{p:?}: high fee won period 2"))?;
    Ok(rel_gap(closed.incumbent_profit(), oracle.incumbent_profit))
}

fn oracle_equivalence() -> Verdict {
    let config = OracleConfig::default();
    let start = Instant::now();
    let base = set_a(0.0);
    let mut worst = 0.0f64;
    for k in sweep_ks(&base) {
        worst = worst.max(compare_with_oracle(&base.with_k(k), &config)?);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..100 {
        worst = worst.max(compare_with_oracle(&random_params(&mut rng), &config)?);
    }
    let elapsed = start.elapsed().as_secs_f64();
    ensure(worst <= 1e-5, || format!("profit gap {worst:.3e}"))?;
    ensure(elapsed < 60.0, || format!("took {elapsed:.1} s"))?;
    Ok(format!("{SWEEP_POINTS} sweep points and 100 random sets agree, max profit gap {worst:.2e}, {elapsed:.1} s"))
}

fn openness_trap() -> Verdict {
    let base = set_a(0.0);
    let k_bar_1 = regime_thresholds(&base).k_bar_1;
    let hi = k_max(&base).unwrap();
    let TrapThreshold::Threshold { k_bar, residual, .. } = openness_trap_threshold(&base).map_err(|e| e.to_string())? else {
        return Err("no crossing found".into());
    };
    ensure(k_bar > k_bar_1 && k_bar <= hi, || format!("root {k_bar} outside ({k_bar_1}, {hi}]"))?;
    ensure(residual < 1e-8, || format!("residual {residual:.3e}"))?;
    for i in 1..=10 {
        let p = base.with_k(k_bar + i as f64 * (hi - k_bar) / 10.0);
        let before = welfare_baseline(&p).map_err(|e| e.to_string())?;
        let after = welfare_mandate(&p).map_err(|e| e.to_string())?;
        ensure(
            after.deployer < before.deployer && after.consumer < before.consumer && after.social < before.social,
            || format!("k = {}: mandate does not lower all of deployer, consumer, social", p.k),
        )?;
    }
    Ok(format!("k_bar = {k_bar:.12} (residual {residual:.1e}), mandate hurts at 10 samples above it"))
}

fn welfare_rows() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    let mut rows = 0;
    for i in 0..1000 {
        let p = random_params_with_subsidy(&mut rng, i % 2 == 1);
        for regime in Regime::ALL {
            let eq = scenario_equilibrium(&p, regime).map_err(|e| e.to_string())?;
            let table = table_row(&p, regime).map_err(|e| e.to_string())?;
            let rebuilt = rebuild(&p, &eq);
            for ((name, a), (_, b)) in table.components().into_iter().zip(rebuilt.components()) {
                let gap = rel_gap(a, b);
                ensure(gap <= 1e-6, || format!("{p:?} {regime} {name}: {a} vs {b}"))?;
                worst = worst.max(gap);
            }
            rows += 1;
        }
        if p.s == 0.0 {
            let mandate = welfare_mandate(&p).map_err(|e| e.to_string())?;
            let rebuilt = rebuild(&p, &mandate_equilibrium(&p).map_err(|e| e.to_string())?);
            for ((name, a), (_, b)) in mandate.components().into_iter().zip(rebuilt.components()) {
                let gap = rel_gap(a, b);
                ensure(gap <= 1e-6, || format!("{p:?} mandate {name}: {a} vs {b}"))?;
                worst = worst.max(gap);
            }
            rows += 1;
        }
    }
    Ok(format!("{rows} rows over 1000 random sets, max relative gap {worst:.2e}"))
}

fn vertical_integration() -> Verdict {
    let base = set_a(0.0);
    let q1v = solve_integrated(&base.with_k(0.2)).map_err(|e| e.to_string())?.q1v;
    ensure(q1v == 6.25, || format!("Q1v = {q1v}"))?;

    let config = OracleConfig::default();
    let hi = k_max(&base).unwrap();
    let mut worst = 0.0f64;
    for k in [0.0, 0.1, 0.2, hi] {
        let p = base.with_k(k);
        let closed = solve_integrated(&p).map_err(|e| e.to_string())?;
        let oracle = oracle_solve_integrated(&p, &config).map_err(|e| e.to_string())?;
        ensure(oracle.eta1v == p.eta_cap && oracle.eta2v == p.eta_cap, || format!("k = {k}: oracle openness below cap"))?;
        for (a, b) in [(closed.q1v, oracle.q1v), (closed.q2v, oracle.q2v), (closed.profit, oracle.profit)] {
            worst = worst.max(rel_gap(a, b));
        }
    }
    ensure(worst <= 1e-6, || format!("integrated oracle gap {worst:.3e}"))?;

    let th = integration_thresholds(&base).map_err(|e| e.to_string())?;
    let (IntegrationThreshold::Crossing { k: k_dv, .. }, IntegrationThreshold::Crossing { k: k_cv, .. }) = (th.chain, th.consumer)
    else {
        return Err(format!("thresholds: chain {}, consumer {}", th.chain, th.consumer));
    };
    let (lo, hi_t) = (k_dv.min(k_cv), k_dv.max(k_cv));
    let mut counts = [0usize; 3];
    for k in sweep_ks(&base) {
        if (k - k_dv).abs() < 1e-9 || (k - k_cv).abs() < 1e-9 {
            continue;
        }
        let delta = integration_comparison(&base.with_k(k)).map_err(|e| e.to_string())?.delta;
        let (chain, consumer) = (delta.chain_profit() > 0.0, delta.consumer > 0.0);
        let (region, ok) = if k < lo {
            (0, !chain && !consumer)
        } else if k > hi_t {
            (2, chain && consumer)
        } else {
            (1, chain != consumer)
        };
        ensure(ok, || format!("k = {k}: chain gain {}, consumer gain {}", delta.chain_profit(), delta.consumer))?;
        counts[region] += 1;
    }
    ensure(counts.iter().all(|&n| n > 0), || format!("empty region in {counts:?}"))?;
    Ok(format!(
        "Q1v = 6.25, oracle gap {worst:.1e}, k_dv = {k_dv:.9}, k_cv = {k_cv:.9}, lose-lose/mixed/win-win points {counts:?}"
    ))
}

fn subsidy_shift() -> Verdict {
    let b = set_b(0.0);
    let unsub = regime_thresholds(&b.with_subsidy(0.0));
    let sub = solve_subsidized(&b).map_err(|e| e.to_string())?;
    ensure(sub.k_bar_1g > unsub.k_bar_1 && sub.k_bar_2g > unsub.k_bar_2, || {
        format!("k_bar_1 {} -> {}, k_bar_2 {} -> {}", unsub.k_bar_1, sub.k_bar_1g, unsub.k_bar_2, sub.k_bar_2g)
    })?;
    let interior = |lo: f64, hi: f64| (1..=5).map(move |i| lo + i as f64 * (hi - lo) / 6.0);
    for k in interior(unsub.k_bar_1, sub.k_bar_1g) {
        let cmp = subsidy_comparison(&b.with_k(k)).map_err(|e| e.to_string())?;
        for (name, d) in cmp.delta.components() {
            ensure(d > 1e-9, || format!("k = {k}: {name} changes by {d:.3e}"))?;
        }
    }
    for k in interior(unsub.k_bar_2, sub.k_bar_2g) {
        let p = b.with_k(k);
        let base_eq = solve_baseline(&p.with_subsidy(0.0)).map_err(|e| e.to_string())?;
        let sub_eq = solve_subsidized(&p).map_err(|e| e.to_string())?;
        let cmp = subsidy_comparison(&p).map_err(|e| e.to_string())?;
        let dq1 = sub_eq.equilibrium.period1.effort - base_eq.period1.effort;
        let dq2 = sub_eq.equilibrium.period2.effort - base_eq.period2.effort;
        ensure(dq1 < -1e-9 && dq2 < -1e-9 && cmp.delta.social < -1e-9, || {
            format!("k = {k}: dQ1 {dq1:.3e}, dQ2 {dq2:.3e}, dSW {:.3e}", cmp.delta.social)
        })?;
    }
    Ok(format!(
        "k_bar_1 {:.6} -> {:.6}, k_bar_2 {:.6} -> {:.6}; gains and losses strict at 5 points each",
        unsub.k_bar_1, sub.k_bar_1g, unsub.k_bar_2, sub.k_bar_2g
    ))
}

fn limit_consistency() -> Verdict {
    let mut worst = 0.0f64;
    let mut cases = Vec::new();
    for base in [set_a(0.0), set_b(0.0).with_subsidy(0.0)] {
        let hi = k_max(&base).unwrap();
        cases.extend((0..=20).map(|i| base.with_k(hi * i as f64 / 20.0)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    cases.extend((0..100).map(|_| random_params(&mut rng)));
    for p in &mut cases {
        p.k = p.k.min(k_max(&p.with_subsidy(1e-8)).unwrap());
    }
    for p in &cases {
        let base_eq = solve_baseline(p).map_err(|e| e.to_string())?;
        let base_w = welfare_baseline(p).map_err(|e| e.to_string())?;
        let th = regime_thresholds(p);
        let tiny = solve_subsidized(&p.with_subsidy(1e-8)).map_err(|e| e.to_string())?;
        let eq = &tiny.equilibrium;
        let tied = eq.regime != base_eq.regime && scenarios_tie(p, eq.regime, base_eq.regime);
        if tied {
            continue;
        }
        ensure(eq.regime == base_eq.regime && eq.winner2 == base_eq.winner2, || {
            format!("{p:?}: regime {} vs {}", eq.regime, base_eq.regime)
        })?;
        let mut pairs = vec![
            (eq.strategy.w1, base_eq.strategy.w1),
            (eq.strategy.eta1, base_eq.strategy.eta1),
            (eq.period1.effort, base_eq.period1.effort),
            (eq.period2.effort, base_eq.period2.effort),
            (eq.incumbent_profit(), base_eq.incumbent_profit()),
        ];
        pairs.extend(tiny.welfare.components().into_iter().zip(base_w.components()).map(|((_, a), (_, b))| (a, b)));
        if th.is_finite() {
            pairs.extend([(tiny.k_bar_1g, th.k_bar_1), (tiny.k_bar_2g, th.k_bar_2)]);
        }
        for (a, b) in pairs {
            let gap = rel_gap(a, b);
            ensure(gap <= 1e-6, || format!("{p:?}: {a} vs {b}"))?;
            worst = worst.max(gap);
        }
    }

    let zero = set_a(0.0);
    let (eta_h, eta_l) = (eta_bar_high(&zero).map_err(|e| e.to_string())?, eta_bar_low(&zero).map_err(|e| e.to_string())?);
    ensure(eta_h == 0.0 && eta_l == 0.0, || format!("k = 0 thresholds {eta_h}, {eta_l}"))?;
    let v = solve_integrated(&zero).map_err(|e| e.to_string())?;
    ensure(v.q1v == v.q2v, || format!("k = 0 integrated efforts {} and {}", v.q1v, v.q2v))?;
    Ok(format!("{} cases match at s = 1e-8 (max gap {worst:.1e}); k = 0 gives eta thresholds 0 and Q1v = Q2v = {}", cases.len(), v.q1v))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Verdict); 7] = [
        ("regime reproduction", regime_reproduction),
        ("oracle equivalence", oracle_equivalence),
        ("openness trap", openness_trap),
        ("welfare table cross-validation", welfare_rows),
        ("vertical integration", vertical_integration),
        ("subsidy regime shift", subsidy_shift),
        ("limit consistency", limit_consistency),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("PASS criterion {} ({name}): {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL criterion {} ({name}): {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
