//! `jost2d`: spectra, Jost functions, energy expansions and cross sections of
//! two-dimensional central potentials.

// Validation is written as `!(x > 0.0)` so that NaN fails it.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{CliError, CliResult};
use config::{RunConfig, DEFAULT_CONFIG};

#[derive(Parser)]
#[command(name = "jost2d", version, about)]
struct Cli {
    /// Key/value config file; the shipped default is used when absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Refuse energies outside the analyticity domain of the k-scaled systems.
    #[arg(long, global = true)]
    strict_domain: bool,
    /// Relative tolerance of the ODE integration.
    #[arg(long, global = true)]
    tol: Option<String>,
    /// Contour rotation: auto, real, zero-im-kr or an angle in radians.
    #[arg(long, global = true, allow_hyphen_values = true)]
    theta: Option<String>,
    /// Nominal end of the radial contour.
    #[arg(long, global = true)]
    rmax: Option<String>,
    /// Override any config key, e.g. --set expand.order=6.
    #[arg(
        long = "set",
        global = true,
        value_name = "SECTION.KEY=VALUE",
        allow_hyphen_values = true
    )]
    set: Vec<String>,
    /// Output file; '-' for stdout.
    #[arg(short, long, global = true)]
    output: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Bound states and resonances as a CSV table.
    Spectrum,
    /// Energy-expansion coefficients as JSON.
    Expand,
    /// f_in, f_out and S at one energy.
    Eval,
    /// Partial and total cross sections on an energy grid.
    Xsection,
    /// Continuous phase shift and the Levinson count.
    Phaseshift,
    /// Scattering length and effective radius.
    Effrange,
    /// Fit expansion coefficients to cross-section or phase-shift data.
    Fit,
    /// Check the Riccati-Bessel functions.
    RiccatiSelftest,
    /// Print the effective configuration.
    Config,
}

fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let text = match &cli.config {
        Some(path) => std::fs::read_to_string(path).map_err(|e| {
            CliError::Input(format!("cannot read config '{}': {e}", path.display()))
        })?,
        None => DEFAULT_CONFIG.to_string(),
    };
    let mut cfg = RunConfig::parse(&text)?;
    let mut overrides: Vec<String> = Vec::new();
    if cli.strict_domain {
        overrides.push("solver.strict_domain=true".into());
    }
    if let Some(t) = &cli.tol {
        overrides.push(format!("solver.tol={t}"));
    }
    if let Some(t) = &cli.theta {
        overrides.push(format!("solver.theta={t}"));
    }
    if let Some(r) = &cli.rmax {
        overrides.push(format!("solver.r_max={r}"));
    }
    overrides.extend(cli.set.iter().cloned());
    if let Some(o) = &cli.output {
        overrides.push(format!("output.path={o}"));
    }
    for o in &overrides {
        cfg.apply_override(o)?;
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> CliResult {
    let cfg = load_config(cli)?;
    // Buffer everything so a failed run leaves no partial output file.
    let mut buf: Vec<u8> = Vec::new();
    let result = match cli.command {
        Command::Spectrum => commands::spectrum(&cfg, &mut buf),
        Command::Expand => commands::expand_cmd(&cfg, &mut buf),
        Command::Eval => commands::eval(&cfg, &mut buf),
        Command::Xsection => commands::xsection(&cfg, &mut buf),
        Command::Phaseshift => commands::phaseshift(&cfg, &mut buf),
        Command::Effrange => commands::effrange(&cfg, &mut buf),
        Command::Fit => commands::fit(&cfg, &mut buf),
        Command::RiccatiSelftest => commands::riccati_selftest(&cfg, &mut buf),
        Command::Config => buf
            .write_all(cfg.to_text().as_bytes())
            .map_err(CliError::from),
    };
    // A failed self-test still reports its table.
    if result.is_ok() || matches!(result, Err(CliError::Check(_))) {
        match cfg.text("output", "path") {
            "-" => std::io::stdout().write_all(&buf)?,
            path => std::fs::write(path, &buf)
                .map_err(|e| CliError::Input(format!("cannot write '{path}': {e}")))?,
        }
    }
    result
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("jost2d: error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
