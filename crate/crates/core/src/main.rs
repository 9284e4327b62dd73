use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use fm_openness::closed_form::{eta_bar_high, eta_bar_low, regime_thresholds, scenario_profits};
use fm_openness::config::{load_config, ConfigError};
use fm_openness::extensions::{
    integration_comparison, integration_thresholds, mandate_comparison, solve_subsidized, subsidy_comparison,
    Counterfactual, PolicyComparison,
};
use fm_openness::oracle::OracleConfig;
use fm_openness::params::{ensure_valid, k_max, ModelParams};
use fm_openness::sweep::{format_g12, sweep_csv, Scenario, SweepParam, SweepPlan};
use fm_openness::verify::{run_verification, VerifyOptions};
use fm_openness::welfare::{openness_trap_threshold, TrapThreshold, WelfareBreakdown};
use fm_openness::{tol, Equilibrium};

#[derive(Parser)]
#[command(name = "fm-openness", version, about = "Openness, fees and flywheels in a two-period foundation-model value chain")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the game at one parameter set and print the equilibrium and welfare.
    Solve {
        #[arg(long)]
        config: PathBuf,
    },
    /// Sweep k (or s) over a grid and write one CSV row per point.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "k")]
        param: SweepParam,
        #[arg(long)]
        lo: f64,
        #[arg(long)]
        hi: f64,
        #[arg(long)]
        steps: usize,
        #[arg(long, default_value = "baseline")]
        scenario: Scenario,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare the baseline with one policy intervention.
    Policy {
        policy: Policy,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check closed forms against the brute-force oracle and the model invariants.
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = tol::PROFIT_REL)]
        oracle_rel_tol: f64,
        #[arg(long, default_value_t = 200)]
        k_points: usize,
        #[arg(long, default_value_t = OracleConfig::default().eta_grid_points)]
        eta_grid_points: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Policy {
    Mandate,
    Integration,
    Subsidy,
}

enum Failure {
    Verification(String),
    Io(String),
    Invalid(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Verification(_) => 1,
            Failure::Io(_) => 2,
            Failure::Invalid(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Verification(m) | Failure::Io(m) | Failure::Invalid(m) => m,
        }
    }
}

fn invalid(e: impl std::fmt::Display) -> Failure {
    Failure::Invalid(e.to_string())
}

fn read_params(path: &Path) -> Result<ModelParams, Failure> {
    load_config(path).map_err(|e| match e {
        ConfigError::Io { .. } => Failure::Io(e.to_string()),
        other => Failure::Invalid(other.to_string()),
    })
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display())))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(|e| Failure::Io(format!("stdout: {e}")))
        }
    }
}

fn g(x: f64) -> String {
    format_g12(x)
}

fn write_equilibrium(out: &mut String, eq: &Equilibrium) {
    let _ = writeln!(out, "regime: {}", eq.regime);
    let _ = writeln!(out, "strategy: w1 = {}, eta1 = {}", g(eq.strategy.w1), g(eq.strategy.eta1));
    let _ = writeln!(out, "efforts: Q1 = {}, Q2 = {}", g(eq.period1.effort), g(eq.period2.effort));
    let _ = writeln!(
        out,
        "period 2: winner = {}, w2 = {}, eta2 = {}",
        eq.winner2,
        g(eq.w2),
        g(eq.eta2)
    );
}

fn write_welfare(out: &mut String, label: &str, w: &WelfareBreakdown) {
    let _ = writeln!(
        out,
        "{label}: dev1 = {}, dev2 = {}, deployer = {}, consumer = {}, social = {}",
        g(w.dev1),
        g(w.dev2),
        g(w.deployer),
        g(w.consumer),
        g(w.social)
    );
}

fn solve_report(params: &ModelParams) -> Result<String, Failure> {
    ensure_valid(params).map_err(invalid)?;
    let sub = solve_subsidized(params).map_err(invalid)?;
    let th = regime_thresholds(params);
    let profits = scenario_profits(params).map_err(invalid)?;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "parameters: theta = {}, c = {}, w_high = {}, w_low = {}, eta_cap = {}, k = {}, s = {}",
        g(params.theta),
        g(params.c),
        g(params.w_high),
        g(params.w_low),
        g(params.eta_cap),
        g(params.k),
        g(params.s)
    );
    let _ = writeln!(out, "k_max: {}", g(k_max(params).map_err(invalid)?));
    write_equilibrium(&mut out, &sub.equilibrium);
    let _ = writeln!(
        out,
        "openness thresholds: eta_H = {}, eta_L = {}",
        g(eta_bar_high(params).map_err(invalid)?),
        g(eta_bar_low(params).map_err(invalid)?)
    );
    let _ = writeln!(
        out,
        "k thresholds: k_bar_1 = {}, k_bar_2 = {}, k_bar_12 = {}, k_bar_13 = {}, k_bar_23 = {}",
        g(th.k_bar_1),
        g(th.k_bar_2),
        g(th.k_bar_12),
        g(th.k_bar_13),
        g(th.k_bar_23)
    );
    let _ = writeln!(out, "eta_prime: {}", th.eta_prime.map_or("undefined".to_string(), g));
    let _ = writeln!(
        out,
        "scenario profits: Harvest = {}, Defend = {}, Dominate = {}",
        g(profits.pi_s0),
        g(profits.pi_s1),
        g(profits.pi_s2)
    );
    write_welfare(&mut out, "welfare", &sub.welfare);
    if params.s > 0.0 {
        let _ = writeln!(
            out,
            "subsidy: spend = {}, social net of spend = {}",
            g(sub.subsidy_spend),
            g(sub.social_net_of_subsidy())
        );
    }
    Ok(out)
}

fn policy_report(policy: Policy, params: &ModelParams) -> Result<String, Failure> {
    let cmp: PolicyComparison = match policy {
        Policy::Mandate => mandate_comparison(params),
        Policy::Integration => integration_comparison(params),
        Policy::Subsidy => subsidy_comparison(params),
    }
    .map_err(invalid)?;
    let mut out = String::new();
    let _ = writeln!(out, "baseline");
    write_equilibrium(&mut out, &cmp.baseline);
    match &cmp.counterfactual {
        Counterfactual::Mandate(eq) => {
            let _ = writeln!(out, "\nmandate (eta1 = eta_cap)");
            write_equilibrium(&mut out, eq);
        }
        Counterfactual::Subsidy(sub) => {
            let _ = writeln!(out, "\nsubsidy (s = {})", g(params.s));
            write_equilibrium(&mut out, &sub.equilibrium);
            let _ = writeln!(
                out,
                "thresholds: eta_Hg = {}, eta_Lg = {}, k_bar_1g = {}, k_bar_2g = {}",
                g(sub.eta_bar_hg),
                g(sub.eta_bar_lg),
                g(sub.k_bar_1g),
                g(sub.k_bar_2g)
            );
            let _ = writeln!(
                out,
                "subsidy spend = {}, social net of spend = {}",
                g(sub.subsidy_spend),
                g(sub.social_net_of_subsidy())
            );
        }
        Counterfactual::Integration(v) => {
            let _ = writeln!(out, "\nintegration");
            let _ = writeln!(
                out,
                "openness: eta1v = {}, eta2v = {}; efforts: Q1v = {}, Q2v = {}",
                g(v.eta1v),
                g(v.eta2v),
                g(v.q1v),
                g(v.q2v)
            );
        }
    }
    let _ = writeln!(out);
    write_welfare(&mut out, "baseline welfare", &cmp.baseline_welfare);
    write_welfare(&mut out, "counterfactual welfare", &cmp.counterfactual_welfare);
    write_welfare(&mut out, "delta", &cmp.delta);
    if let Some(interval) = cmp.interval {
        let _ = writeln!(out, "interval: {interval}");
    }
    match policy {
        Policy::Mandate => {
            let trap = openness_trap_threshold(&params.with_subsidy(0.0)).map_err(invalid)?;
            let _ = match trap {
                TrapThreshold::Threshold { k_bar, residual, .. } => {
                    writeln!(out, "openness trap: k_bar = {} (residual {residual:.3e})", g(k_bar))
                }
                TrapThreshold::NoTrap { .. } => writeln!(out, "openness trap: none on (k_bar_1, k_max]"),
            };
        }
        Policy::Integration => {
            let th = integration_thresholds(params).map_err(invalid)?;
            let _ = writeln!(out, "integration thresholds: chain profit {}, consumer {}, social {}", th.chain, th.consumer, th.social);
        }
        Policy::Subsidy => {}
    }
    Ok(out)
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Solve { config } => {
            let params = read_params(&config)?;
            emit(None, &solve_report(&params)?)
        }
        Command::Sweep { config, param, lo, hi, steps, scenario, out } => {
            let params = read_params(&config)?;
            let plan = SweepPlan { parameter: param, lo, hi, steps, scenario };
            let csv = sweep_csv(&params, &plan).map_err(invalid)?;
            emit(out.as_deref(), &csv)
        }
        Command::Policy { policy, config, out } => {
            let params = read_params(&config)?;
            emit(out.as_deref(), &policy_report(policy, &params)?)
        }
        Command::Verify { config, oracle_rel_tol, k_points, eta_grid_points, out } => {
            let params = read_params(&config)?;
            let opts = VerifyOptions {
                oracle: OracleConfig { eta_grid_points, ..OracleConfig::default() },
                oracle_rel_tol,
                k_points,
            };
            let report = run_verification(&params, &opts).map_err(invalid)?;
            emit(out.as_deref(), &format!("{report}\n"))?;
            if report.all_passed() {
                Ok(())
            } else {
                let names: Vec<&str> = report.failed().map(|c| c.name).collect();
                Err(Failure::Verification(format!("verification failed: {}", names.join(", "))))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            ExitCode::from(failure.code())
        }
    }
}
