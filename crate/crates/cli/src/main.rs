//! Command-line front end: scenario config parsing, preset listing, run
//! execution, causality cross-check mode, and structured report emission.
//!
//! Exit codes: 0 = ran with no violations, 2 = ran and violations were
//! detected (or the cross-check disagreed), 1 = usage or config error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use bridgesim_core::config::{scenario_digest, ScenarioConfigFile};
use bridgesim_core::engine::{run_scenario, RunResult, Scenario};
use bridgesim_core::presets::{all_presets, build_preset};
use bridgesim_core::report::{build_report, emit_report};
use bridgesim_core::surface::total_area;

mod oracle;

#[derive(Parser)]
#[command(
    name = "bridgesim",
    about = "Deterministic cross-chain bridge security simulator",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a scenario from a config file or a shipped preset.
    Run(RunArgs),
    /// List the shipped incident presets.
    Presets,
    /// Compute the attack-surface report for a config without simulating.
    Surface(SurfaceArgs),
    /// Run the exhaustive causality oracle alongside the monitor and report
    /// agreement.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Scenario config file (JSON).
    #[arg(long, conflicts_with_all = ["preset", "all_presets"])]
    config: Option<PathBuf>,
    /// Shipped preset name (see `presets`).
    #[arg(long, conflicts_with = "all_presets")]
    preset: Option<String>,
    /// Run every shipped preset; reports go to `<name>.json` under --out-dir.
    #[arg(long)]
    all_presets: bool,
    /// Seed override; falls back to BRIDGESIM_SEED, then the config value.
    #[arg(long)]
    seed: Option<u64>,
    /// Horizon override in ticks.
    #[arg(long)]
    horizon: Option<u64>,
    /// Report output path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output directory for --all-presets.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct SurfaceArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::Run(args) => run_cmd(args),
        Command::Presets => {
            for preset in all_presets() {
                println!("{:<20} {}", preset.name, preset.citation);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Surface(args) => surface_cmd(args),
        Command::Verify(args) => verify_cmd(args),
    }
}

fn load_config_scenario(path: &PathBuf) -> Result<Scenario, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let config = ScenarioConfigFile::parse(&text).map_err(|e| e.to_string())?;
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().to_string())
        .unwrap_or_else(|| "scenario".to_string());
    config.to_scenario(&stem).map_err(|e| e.to_string())
}

fn env_seed() -> Option<u64> {
    std::env::var("BRIDGESIM_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
}

fn apply_overrides(scenario: &mut Scenario, seed: Option<u64>, horizon: Option<u64>) {
    if let Some(seed) = seed.or_else(env_seed) {
        scenario.seed = seed;
    }
    if let Some(horizon) = horizon {
        scenario.horizon = horizon;
    }
}

fn execute(scenario: &Scenario, out: Option<&PathBuf>) -> Result<RunResult, String> {
    let result = run_scenario(scenario).map_err(|e| e.to_string())?;
    let report = build_report(scenario, &result);
    if let Some(path) = out {
        emit_report(&report, path).map_err(|e| e.to_string())?;
        println!("report written to {}", path.display());
    }
    Ok(result)
}

fn summarize(result: &RunResult) {
    println!(
        "scenario {}: {} violation(s), halted={}",
        result.scenario,
        result.violations.len(),
        result.halted
    );
    for v in &result.violations {
        println!(
            "  [{:?}] {:?}/{:?} at tick {} ({})",
            v.classification, v.prior, v.sub_rule, v.detected_at, v.detail
        );
    }
    for (token, amount) in &result.loss {
        println!("  loss {token}: {amount}");
    }
    if let Some(latency) = result.detection_latency {
        println!("  detection latency: {latency} tick(s)");
    }
}

fn run_cmd(args: RunArgs) -> Result<ExitCode, String> {
    if args.all_presets {
        let mut any_violation = false;
        std::fs::create_dir_all(&args.out_dir)
            .map_err(|e| format!("cannot create {}: {e}", args.out_dir.display()))?;
        // deterministic report order: the shipped preset list order
        for preset in all_presets() {
            let mut scenario = preset.scenario;
            apply_overrides(&mut scenario, args.seed, args.horizon);
            let out = args.out_dir.join(format!("{}.json", preset.name));
            let result = execute(&scenario, Some(&out))?;
            summarize(&result);
            any_violation |= !result.violations.is_empty();
        }
        return Ok(if any_violation {
            ExitCode::from(2)
        } else {
            ExitCode::SUCCESS
        });
    }

    let mut scenario = match (&args.config, &args.preset) {
        (Some(path), None) => load_config_scenario(path)?,
        (None, Some(name)) => build_preset(name).map_err(|e| e.to_string())?.scenario,
        _ => return Err("pass exactly one of --config or --preset".to_string()),
    };
    apply_overrides(&mut scenario, args.seed, args.horizon);
    let result = execute(&scenario, args.out.as_ref())?;
    summarize(&result);
    Ok(if result.violations.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}

fn surface_cmd(args: SurfaceArgs) -> Result<ExitCode, String> {
    let scenario = load_config_scenario(&args.config)?;
    let catalog = scenario
        .vector_catalog
        .clone()
        .unwrap_or_else(bridgesim_core::surface::shipped_catalog);
    let report = total_area(&scenario.bridge, &catalog).map_err(|e| e.to_string())?;
    let mut json = serde_json::to_string_pretty(&report).map_err(|e| e.to_string())?;
    json.push('\n');
    match args.out {
        Some(path) => {
            std::fs::write(&path, &json).map_err(|e| e.to_string())?;
            println!("surface report written to {}", path.display());
        }
        None => print!("{json}"),
    }
    println!(
        "areas: source={} offchain={} destination={} other={} total={}",
        report.source.area,
        report.offchain.area,
        report.destination.area,
        report.other.area,
        report.area_total
    );
    Ok(ExitCode::SUCCESS)
}

fn verify_cmd(args: VerifyArgs) -> Result<ExitCode, String> {
    let mut scenario = match (&args.config, &args.preset) {
        (Some(path), None) => load_config_scenario(path)?,
        (None, Some(name)) => build_preset(name).map_err(|e| e.to_string())?.scenario,
        _ => return Err("pass exactly one of --config or --preset".to_string()),
    };
    apply_overrides(&mut scenario, args.seed, None);

    let outcome = oracle::cross_check(&scenario)?;
    println!(
        "cross-check over {} event instance(s): monitor={} oracle={}",
        outcome.instances, outcome.monitor_verdict, outcome.oracle_verdict
    );
    println!("digest: {}", scenario_digest(&scenario));
    if outcome.agree {
        println!("verdicts agree");
        Ok(ExitCode::SUCCESS)
    } else {
        println!("verdicts DISAGREE");
        Ok(ExitCode::from(2))
    }
}
