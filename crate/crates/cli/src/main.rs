//! `multipolar`: command-line access to the rate, Wightman-tensor, hydrogen
//! and vacuum-excitation calculations.
//!
//! Data go to stdout (or `--out`), diagnostics to stderr. Exit status is 0
//! on success, 2 for invalid input or configuration and 3 when a numerical
//! routine fails to converge.

mod commands;
mod config;
mod error;
mod output;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use multipolar::{ChargeConvention, UnitSystem};
use serde_json::json;

use commands::{
    BoostCheckRequest, LogRange, PairingSet, Transition, VepChoice, VepRequest, WightmanMethod,
};
use config::{
    load_config, parse_convention, AtomOverrides, FlagOverrides, OutputFormat, RunConfig,
    CONFIG_ENV,
};
use error::CliError;
use output::{emit, RunHeader};

#[derive(Parser, Debug)]
#[command(
    name = "multipolar",
    version,
    about = "Multipolar light-matter coupling numerics"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalArgs {
    /// `key = value` configuration file; flags override its values.
    #[arg(long, global = true, env = CONFIG_ENV)]
    config: Option<PathBuf>,

    /// Charge convention: `hl` (e² = 4π/137.036) or `paper` (e² = 1/137).
    #[arg(long, global = true, value_parser = parse_convention)]
    convention: Option<ChargeConvention>,

    /// Transition energy ħΩ in eV.
    #[arg(long = "omega-ev", global = true)]
    omega_ev: Option<f64>,

    /// Bohr radius in eV⁻¹.
    #[arg(long, global = true)]
    a0: Option<f64>,

    /// Centre-of-mass rest energy in eV.
    #[arg(long = "mass-ev", global = true)]
    mass_ev: Option<f64>,

    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output format; each command has its own default.
    #[arg(long, global = true)]
    format: Option<OutputFormat>,

    /// Write the artifact to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Spontaneous emission rates with a Gaussian centre-of-mass spread.
    Rates {
        #[arg(long, default_value = "1s:2pz")]
        transition: Transition,
        /// σ_P/(Mc); comma-separated for several values.
        #[arg(long = "sigma-p", value_delimiter = ',', default_value = "0")]
        sigma_p: Vec<f64>,
    },
    /// Vacuum excitation probability for Gaussian switching.
    Vep {
        /// A single switching time in eV⁻¹.
        #[arg(long = "T")]
        t: Option<f64>,
        /// `lo:hi:n`, logarithmically spaced, in eV⁻¹.
        #[arg(long = "T-range")]
        t_range: Option<LogRange>,
        #[arg(long, default_value = "1s:2pz")]
        transition: Transition,
        #[arg(long, value_enum, default_value = "auto")]
        method: VepChoice,
        /// Observer speed along z (units of c).
        #[arg(long = "v", default_value_t = 0.0)]
        v: f64,
        /// Monte Carlo samples for the boosted estimate.
        #[arg(long, default_value_t = 200_000)]
        samples: u64,
    },
    /// Electromagnetic vacuum two-point tensors.
    Wightman {
        /// First event as `t,x,y,z`.
        #[arg(long, value_parser = commands::parse_vector::<4>, allow_hyphen_values = true)]
        x: [f64; 4],
        /// Second event as `t,x,y,z`.
        #[arg(long, value_parser = commands::parse_vector::<4>, allow_hyphen_values = true)]
        xp: [f64; 4],
        /// EE, BB, EB, BE or all.
        #[arg(long, default_value = "all")]
        pairing: PairingSet,
        #[arg(long, value_enum, default_value = "closed")]
        method: WightmanMethod,
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// Hydrogen matrix elements and form factors.
    Hydrogen {
        #[command(subcommand)]
        which: HydrogenCommand,
    },
    /// Compares the boosted-observer excitation probability with the rest frame.
    BoostCheck {
        #[arg(long = "v")]
        v: f64,
        #[arg(long = "T")]
        t: f64,
        #[arg(long, default_value_t = 2_000_000)]
        samples: u64,
        /// Random points for the pointwise integrand comparison.
        #[arg(long, default_value_t = 1000)]
        points: usize,
    },
}

#[derive(Subcommand, Debug)]
enum HydrogenCommand {
    /// ⟨a|r|b⟩.
    MatrixElement {
        #[arg(long, default_value = "1s:2pz")]
        transition: Transition,
    },
    /// f_ab(k) at one or more wavevectors.
    FormFactor {
        #[arg(long, default_value = "1s:2pz")]
        transition: Transition,
        /// Wavevector `kx,ky,kz` in eV; repeatable.
        #[arg(long = "k", required = true, value_parser = commands::parse_vector::<3>, allow_hyphen_values = true)]
        k: Vec<[f64; 3]>,
    },
}

fn effective_config(g: &GlobalArgs) -> Result<RunConfig, CliError> {
    let mut config = match &g.config {
        Some(path) => load_config(path)?,
        None => RunConfig::default(),
    };
    config.apply(&FlagOverrides {
        convention: g.convention,
        atom: AtomOverrides {
            a0: g.a0,
            mass_ev: g.mass_ev,
            omega_ev: g.omega_ev,
            ..Default::default()
        },
        seed: g.seed,
        output_format: g.format,
    });
    Ok(config)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut config = effective_config(&cli.global)?;
    if config.convention.is_none() {
        // the excitation calculations default to the reference-curve constants
        let default = match cli.command {
            Command::Vep { .. } | Command::BoostCheck { .. } => ChargeConvention::PaperGaussianLike,
            _ => ChargeConvention::HeavisideLorentz,
        };
        config.convention = Some(default);
    }
    let params = config.atom_parameters()?;
    let units = UnitSystem::natural(config.convention());
    let seed = config.seed;

    macro_rules! finish {
        ($name:expr, $args:expr, $default:expr, $records:expr) => {{
            let records = $records;
            let header = RunHeader::new($name, $args, &config, params);
            let format = config.output_format.unwrap_or($default);
            write_out(&cli.global.out, format, &header, &records)
        }};
    }

    match &cli.command {
        Command::Rates {
            transition,
            sigma_p,
        } => finish!(
            "rates",
            json!({ "transition": transition.to_string(), "sigma_p_over_mc": sigma_p }),
            OutputFormat::Json,
            commands::rates(*transition, sigma_p, &params, &units)?
        ),
        Command::Vep {
            t,
            t_range,
            transition,
            method,
            v,
            samples,
        } => {
            let req = VepRequest {
                times: VepRequest::times_from(*t, *t_range)?,
                transition: *transition,
                method: *method,
                v: *v,
                samples: *samples,
                seed,
            };
            let resolved = req.resolved_method();
            eprintln!(
                "vep: {} switching times, method {:?}",
                req.times.len(),
                resolved
            );
            let boosted = resolved == VepChoice::Boosted;
            finish!(
                "vep",
                json!({
                    "transition": transition.to_string(),
                    "method": resolved,
                    "v": v,
                    "samples": if boosted { Some(*samples) } else { None },
                    "T": req.times,
                }),
                OutputFormat::Csv,
                commands::vep(&req, &params, &units)?
            )
        }
        Command::Wightman {
            x,
            xp,
            pairing,
            method,
            epsilon,
        } => finish!(
            "wightman",
            json!({ "x": x, "xp": xp, "pairing": pairing.0, "method": method, "epsilon": epsilon }),
            OutputFormat::Json,
            commands::wightman(&pairing.0, *x, *xp, *method, *epsilon)?
        ),
        Command::Hydrogen {
            which: HydrogenCommand::MatrixElement { transition },
        } => finish!(
            "hydrogen matrix-element",
            json!({ "transition": transition.to_string() }),
            OutputFormat::Json,
            commands::matrix_element(*transition, &params)?
        ),
        Command::Hydrogen {
            which: HydrogenCommand::FormFactor { transition, k },
        } => finish!(
            "hydrogen form-factor",
            json!({ "transition": transition.to_string(), "k": k }),
            OutputFormat::Json,
            commands::form_factors(*transition, k, &params)?
        ),
        Command::BoostCheck {
            v,
            t,
            samples,
            points,
        } => {
            let req = BoostCheckRequest {
                t: *t,
                v: *v,
                samples: *samples,
                seed,
                points: *points,
                max_sigmas: config.tolerance("boost_sigmas"),
                pointwise_tolerance: config.tolerance("pointwise"),
            };
            eprintln!("boost-check: {samples} Monte Carlo samples at v = {v}, T = {t}");
            finish!(
                "boost-check",
                json!({ "v": v, "T": t, "samples": samples, "points": points }),
                OutputFormat::Json,
                commands::boost_check(&req, &params, &units)?
            )
        }
    }
}

fn write_out<R: serde::Serialize>(
    path: &Option<PathBuf>,
    format: OutputFormat,
    header: &RunHeader,
    records: &[R],
) -> Result<(), CliError> {
    match path {
        Some(p) => {
            let file =
                File::create(p).map_err(|e| CliError::Output(format!("{}: {e}", p.display())))?;
            let mut w = BufWriter::new(file);
            emit(&mut w, format, header, records)
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            emit(&mut lock, format, header, records)?;
            lock.flush().map_err(|e| CliError::Output(e.to_string()))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
