use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use nmr_collision_cli::config::{parse_list, SweepConfig};
use nmr_collision_cli::error::{CliError, Result};
use nmr_collision_cli::output::{emit_csv, emit_svg};
use nmr_collision_cli::sweep::run_sweep;

/// Sweeps the two-collision trace-distance witness over collision strength
/// and environment correlation, writing a CSV table and an SVG plot.
#[derive(Debug, Parser)]
#[command(name = "nmr-collision", version)]
struct Args {
    /// Config file of `key = value` lines; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    eta_min: Option<f64>,
    #[arg(long)]
    eta_max: Option<f64>,
    #[arg(long)]
    eta_steps: Option<usize>,
    /// Comma-separated correlation values, e.g. `0,0.15,0.25`.
    #[arg(long, allow_hyphen_values = true)]
    q: Option<String>,
    /// map | circuit | pulse | tomography
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    delta_r: Option<f64>,
    #[arg(long)]
    shots: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// CSV output path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// SVG output path; defaults to the CSV path with an `.svg` extension.
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Skip the SVG plot.
    #[arg(long)]
    no_svg: bool,
    /// delta-d | difference
    #[arg(long)]
    threshold_rule: Option<String>,
    /// classical | entangled
    #[arg(long)]
    flavor: Option<String>,
}

fn build_config(args: &Args) -> Result<SweepConfig> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::Io {
                path: path.clone(),
                source: e,
            })?;
            SweepConfig::parse(&text)?
        }
        None => SweepConfig::default(),
    };
    if let Some(v) = args.eta_min {
        cfg.eta_min = v;
    }
    if let Some(v) = args.eta_max {
        cfg.eta_max = v;
    }
    if let Some(v) = args.eta_steps {
        cfg.eta_steps = v;
    }
    if let Some(v) = &args.q {
        cfg.q_values = parse_list(v)?;
    }
    if let Some(v) = &args.mode {
        cfg.set("mode", v)?;
    }
    if let Some(v) = args.delta_r {
        cfg.delta_r = v;
    }
    if let Some(v) = args.shots {
        cfg.shots = v;
    }
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(v) = &args.out {
        cfg.output_path = v.clone();
    }
    if let Some(v) = &args.threshold_rule {
        cfg.set("threshold_rule", v)?;
    }
    if let Some(v) = &args.flavor {
        cfg.set("env_flavor", v)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(args: Args) -> Result<()> {
    let cfg = build_config(&args)?;
    let result = run_sweep(&cfg)?;
    emit_csv(&result, &cfg.output_path)?;
    if !args.no_svg {
        let svg = args
            .svg
            .clone()
            .unwrap_or_else(|| cfg.output_path.with_extension("svg"));
        emit_svg(&result, &svg)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => e.exit(),
    };
    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("nmr-collision: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
