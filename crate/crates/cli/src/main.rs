//! Command line front end for the bubble switching game.
//!
//! Four subcommands: `simulate` plays one seeded session, `sweep-theta`
//! tabulates the closed-form operating points over a leakage range,
//! `sprt-trace` replays a forced outcome sequence through the referee,
//! and `verify` runs the protocol self-checks.
//!
//! Exit codes: 0 on success, 1 when a verification check fails, 2 for
//! usage or parameter errors. Stochastic commands require an explicit
//! `--seed`; nothing is seeded from the clock.

use bubbles_core::game::{run_session, GameConfig, MeasurementPolicy, OracleMode};
use bubbles_core::protocol::verification::run_verification;
use bubbles_core::protocol::{predict, FriendRecord, Measurement, Observer, PredictionMode};
use bubbles_core::sprt::{min_runs_to_accept_wigner, Decision, MinRuns, SprtState};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::error::Error;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "bubble-game",
    about = "Simulator and referee for the bubble switching game",
    disable_version_flag = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Play one seeded session and print the referee's decision.
    Simulate(SimulateArgs),
    /// Tabulate per-θ operating points (CSV or JSON).
    SweepTheta(SweepArgs),
    /// Replay an explicit M_W outcome sequence through the referee.
    SprtTrace(TraceArgs),
    /// Run the protocol self-checks on a θ grid.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Leakage parameter in [0, 1].
    #[arg(long)]
    theta: f64,
    /// Referee error bound (0, 0.5).
    #[arg(long, default_value_t = 1e-3)]
    epsilon: f64,
    #[arg(long, value_enum, default_value_t = PolicyArg::AlwaysMw)]
    policy: PolicyArg,
    #[arg(long, value_enum, default_value_t = ModeArg::AsPublished)]
    mode: ModeArg,
    #[arg(long, value_enum, default_value_t = OracleArg::BubbleRelative)]
    oracle: OracleArg,
    /// Session seed; the full run is a pure function of the flags.
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 10_000)]
    max_rounds: u64,
    /// Write the full session report (canonical JSON) to this path.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, default_value_t = 0.0)]
    from: f64,
    #[arg(long, default_value_t = 1.0)]
    to: f64,
    /// Number of θ samples, endpoints included.
    #[arg(long, default_value_t = 11)]
    steps: usize,
    /// Error bound; repeat the flag for several values.
    #[arg(long = "epsilon")]
    epsilons: Vec<f64>,
    #[arg(long, value_enum, default_value_t = OutFormat::Csv)]
    out: OutFormat,
}

#[derive(Args)]
struct TraceArgs {
    #[arg(long)]
    theta: f64,
    #[arg(long, default_value_t = 1e-3)]
    epsilon: f64,
    /// Comma-separated outcome tokens: 0 for ω₀, 1 for ω₁.
    #[arg(long)]
    sequence: String,
}

#[derive(Args)]
struct VerifyArgs {
    /// Number of θ grid points over [0, 1].
    #[arg(long, default_value_t = 101)]
    grid: usize,
    /// Tolerance for the closed-form comparisons.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    AlwaysMf,
    AlwaysMw,
    Random,
}

impl From<PolicyArg> for MeasurementPolicy {
    fn from(arg: PolicyArg) -> Self {
        match arg {
            PolicyArg::AlwaysMf => MeasurementPolicy::AlwaysMf,
            PolicyArg::AlwaysMw => MeasurementPolicy::AlwaysMw,
            PolicyArg::Random => MeasurementPolicy::RandomUniform,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    AsPublished,
    StateDerived,
}

impl From<ModeArg> for PredictionMode {
    fn from(arg: ModeArg) -> Self {
        match arg {
            ModeArg::AsPublished => PredictionMode::AsPublished,
            ModeArg::StateDerived => PredictionMode::StateDerived,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleArg {
    BubbleRelative,
    WignerGlobal,
}

impl From<OracleArg> for OracleMode {
    fn from(arg: OracleArg) -> Self {
        match arg {
            OracleArg::BubbleRelative => OracleMode::BubbleRelative,
            OracleArg::WignerGlobal => OracleMode::WignerGlobal,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::SweepTheta(args) => cmd_sweep_theta(args),
        Command::SprtTrace(args) => cmd_sprt_trace(args),
        Command::Verify(args) => cmd_verify(args),
    };
    match result {
        Ok(code) => code,
        Err(error) => {
            eprintln!("error: {error}");
            ExitCode::from(2)
        }
    }
}

fn cmd_simulate(args: SimulateArgs) -> Result<ExitCode, Box<dyn Error>> {
    let mut config = GameConfig::new(args.theta, args.epsilon, args.seed)?;
    config.measurement_policy = args.policy.into();
    config.prediction_mode = args.mode.into();
    config.oracle_mode = args.oracle.into();
    config.max_rounds = args.max_rounds;
    config.validate()?;

    let report = run_session(&config)?;
    match report.decision {
        Decision::Continue => println!("undecided after {} rounds", report.rounds_used),
        decision => println!("{decision} at round {}", report.rounds_used),
    }
    println!("ledger root {}", report.ledger_root);
    if let Some(path) = args.report {
        std::fs::write(&path, report.to_canonical_json()?)?;
    }
    Ok(ExitCode::SUCCESS)
}

/// One operating-point row: the published probability of ω₀ under M_W
/// for both players, the friend's record-conditioned state-derived
/// value (record φ₀), Wigner's published probability of φ₀ under M_F,
/// and the crossing count for an all-ω₀ run.
#[derive(Serialize)]
#[allow(non_snake_case)]
struct SweepRow {
    theta: f64,
    epsilon: f64,
    n0: serde_json::Value,
    pW_w0_pub: f64,
    pF_w0_pub: f64,
    pF_w0_derived: f64,
    pW_f0_MF: f64,
}

fn cmd_sweep_theta(args: SweepArgs) -> Result<ExitCode, Box<dyn Error>> {
    if !(0.0..=1.0).contains(&args.from) || !(0.0..=1.0).contains(&args.to) {
        return Err("--from and --to must lie in [0, 1]".into());
    }
    if args.from > args.to {
        return Err("--from must not exceed --to".into());
    }
    if args.steps == 0 {
        return Err("--steps must be at least 1".into());
    }
    if args.steps == 1 && args.from != args.to {
        return Err("--steps 1 needs --from equal to --to".into());
    }
    let epsilons = if args.epsilons.is_empty() {
        vec![1e-3]
    } else {
        args.epsilons.clone()
    };

    let mut rows = Vec::with_capacity(args.steps * epsilons.len());
    for i in 0..args.steps {
        let theta = if args.steps == 1 {
            args.from
        } else {
            args.from + (args.to - args.from) * i as f64 / (args.steps - 1) as f64
        };
        let wigner_mw = predict(Observer::Wigner, Measurement::Mw, theta, PredictionMode::AsPublished, None)?;
        let friend_mw = predict(
            Observer::Friend,
            Measurement::Mw,
            theta,
            PredictionMode::AsPublished,
            Some(FriendRecord::Phi0),
        )?;
        let friend_mw_derived = predict(
            Observer::Friend,
            Measurement::Mw,
            theta,
            PredictionMode::StateDerived,
            Some(FriendRecord::Phi0),
        )?;
        let wigner_mf = predict(Observer::Wigner, Measurement::Mf, theta, PredictionMode::AsPublished, None)?;
        for &epsilon in &epsilons {
            let n0 = match min_runs_to_accept_wigner(theta, epsilon)? {
                MinRuns::Finite(n) => serde_json::Value::from(n),
                MinRuns::Diverges => serde_json::Value::from("diverges"),
            };
            rows.push(SweepRow {
                theta,
                epsilon,
                n0,
                pW_w0_pub: wigner_mw.probability(0).expect("two outcomes"),
                pF_w0_pub: friend_mw.probability(0).expect("two outcomes"),
                pF_w0_derived: friend_mw_derived.probability(0).expect("two outcomes"),
                pW_f0_MF: wigner_mf.probability(0).expect("two outcomes"),
            });
        }
    }

    match args.out {
        OutFormat::Csv => {
            println!("theta,epsilon,n0,pW_w0_pub,pF_w0_pub,pF_w0_derived,pW_f0_MF");
            for row in &rows {
                let n0 = match &row.n0 {
                    serde_json::Value::String(s) => s.clone(),
                    value => value.to_string(),
                };
                println!(
                    "{},{},{},{},{},{},{}",
                    row.theta,
                    row.epsilon,
                    n0,
                    row.pW_w0_pub,
                    row.pF_w0_pub,
                    row.pF_w0_derived,
                    row.pW_f0_MF
                );
            }
        }
        OutFormat::Json => println!("{}", serde_json::to_string(&rows)?),
    }
    Ok(ExitCode::SUCCESS)
}

fn format_llr(value: f64) -> String {
    if value == f64::INFINITY {
        "inf".to_owned()
    } else if value == f64::NEG_INFINITY {
        "-inf".to_owned()
    } else {
        value.to_string()
    }
}

fn cmd_sprt_trace(args: TraceArgs) -> Result<ExitCode, Box<dyn Error>> {
    let tokens: Vec<usize> = if args.sequence.is_empty() {
        Vec::new()
    } else {
        args.sequence
            .split(',')
            .map(|token| match token.trim() {
                "0" => Ok(0),
                "1" => Ok(1),
                other => Err(format!("invalid outcome token `{other}` (expected 0 or 1)")),
            })
            .collect::<Result<_, _>>()?
    };

    let wigner = predict(
        Observer::Wigner,
        Measurement::Mw,
        args.theta,
        PredictionMode::AsPublished,
        None,
    )?;
    let friend = predict(
        Observer::Friend,
        Measurement::Mw,
        args.theta,
        PredictionMode::AsPublished,
        Some(FriendRecord::Phi0),
    )?;

    let mut state = SprtState::new(args.epsilon)?;
    println!("step,outcome,n0,n1,llr,decision");
    for (step, &token) in tokens.iter().enumerate() {
        state = state.observe(
            token,
            wigner.probability(token).expect("two outcomes"),
            friend.probability(token).expect("two outcomes"),
        )?;
        let (n0, n1) = state.counts();
        println!(
            "{},{},{},{},{},{}",
            step + 1,
            token,
            n0,
            n1,
            format_llr(state.log_likelihood()),
            state.decision()
        );
        if state.is_decided() {
            break;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode, Box<dyn Error>> {
    let report = run_verification(args.grid, args.tol)?;
    for check in &report.checks {
        let status = if check.passed() { "pass" } else { "fail" };
        println!(
            "{status} {} max_deviation {:.3e} tolerance {:.1e}",
            check.name, check.max_deviation, check.tolerance
        );
    }
    if report.passed() {
        println!("all {} checks passed on {} grid points", report.checks.len(), report.grid_points);
        Ok(ExitCode::SUCCESS)
    } else {
        let failed = report.checks.iter().filter(|c| !c.passed()).count();
        println!("{failed} of {} checks failed", report.checks.len());
        Ok(ExitCode::from(1))
    }
}
