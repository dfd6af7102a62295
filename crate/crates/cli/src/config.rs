use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use multipolar::{AtomParameters, ChargeConvention};
use serde::Serialize;

use crate::error::CliError;

/// Environment variable naming the config file used when `--config` is absent.
pub const CONFIG_ENV: &str = "MULTIPOLAR_CONFIG";

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            other => Err(format!(
                "unknown output format '{other}' (expected json or csv)"
            )),
        }
    }
}

pub fn parse_convention(s: &str) -> Result<ChargeConvention, String> {
    match s.trim().to_ascii_lowercase().as_str() {
        "hl" | "heaviside-lorentz" | "heaviside_lorentz" => Ok(ChargeConvention::HeavisideLorentz),
        "paper" | "gaussian" => Ok(ChargeConvention::PaperGaussianLike),
        other => Err(format!(
            "unknown convention '{other}' (expected hl or paper)"
        )),
    }
}

/// Overrides of the atomic constants. Unset fields fall back to the
/// parameter set that goes with the chosen convention.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct AtomOverrides {
    pub a0: Option<f64>,
    pub mass_ev: Option<f64>,
    pub reduced_mass_ev: Option<f64>,
    pub omega_ev: Option<f64>,
    pub delta_m_over_m: Option<f64>,
}

impl AtomOverrides {
    fn merge(&mut self, other: &AtomOverrides) {
        self.a0 = other.a0.or(self.a0);
        self.mass_ev = other.mass_ev.or(self.mass_ev);
        self.reduced_mass_ev = other.reduced_mass_ev.or(self.reduced_mass_ev);
        self.omega_ev = other.omega_ev.or(self.omega_ev);
        self.delta_m_over_m = other.delta_m_over_m.or(self.delta_m_over_m);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    /// Unset means the default of the command being run.
    pub convention: Option<ChargeConvention>,
    pub atom: AtomOverrides,
    pub tolerances: BTreeMap<String, f64>,
    pub seed: u64,
    pub output_format: Option<OutputFormat>,
    /// File the configuration was read from, if any.
    pub source: Option<PathBuf>,
}

/// Tolerance names understood by the commands, with their defaults.
pub const TOLERANCES: [(&str, f64); 2] = [
    // maximum |z| of the boosted Monte Carlo estimate against the rest value
    ("boost_sigmas", 3.0),
    // pointwise boosted-vs-rest integrand agreement
    ("pointwise", 1e-10),
];

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            convention: None,
            atom: AtomOverrides::default(),
            tolerances: TOLERANCES
                .iter()
                .map(|(k, v)| (k.to_string(), *v))
                .collect(),
            seed: DEFAULT_SEED,
            output_format: None,
            source: None,
        }
    }
}

impl RunConfig {
    pub fn tolerance(&self, name: &str) -> f64 {
        self.tolerances[name]
    }

    pub fn convention(&self) -> ChargeConvention {
        self.convention
            .unwrap_or(ChargeConvention::HeavisideLorentz)
    }

    /// The atomic parameters after overrides, validated.
    pub fn atom_parameters(&self) -> Result<AtomParameters, CliError> {
        let base = AtomParameters::for_convention(self.convention());
        let o = &self.atom;
        let params = AtomParameters {
            a0: o.a0.unwrap_or(base.a0),
            mass: o.mass_ev.unwrap_or(base.mass),
            reduced_mass: o.reduced_mass_ev.unwrap_or(base.reduced_mass),
            omega: o.omega_ev.unwrap_or(base.omega),
            delta_m_over_m: o.delta_m_over_m.unwrap_or(base.delta_m_over_m),
        };
        params.validate()?;
        Ok(params)
    }

    /// Applies command-line values on top of the file values.
    pub fn apply(&mut self, flags: &FlagOverrides) {
        if flags.convention.is_some() {
            self.convention = flags.convention;
        }
        self.atom.merge(&flags.atom);
        if let Some(s) = flags.seed {
            self.seed = s;
        }
        if let Some(f) = flags.output_format {
            self.output_format = Some(f);
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct FlagOverrides {
    pub convention: Option<ChargeConvention>,
    pub atom: AtomOverrides,
    pub seed: Option<u64>,
    pub output_format: Option<OutputFormat>,
}

pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config file {}: {e}", path.display())))?;
    let mut config = parse_config(&text).map_err(|e| match e {
        CliError::Config { line, message, .. } => CliError::Config {
            path: Some(path.to_path_buf()),
            line,
            message,
        },
        other => other,
    })?;
    config.source = Some(path.to_path_buf());
    Ok(config)
}

pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let mut config = RunConfig::default();
    for (index, raw) in text.lines().enumerate() {
        let line = index + 1;
        let err = |message: String| CliError::Config {
            path: None,
            line,
            message,
        };
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| err(format!("expected `key = value`, got `{content}`")))?;
        let (key, value) = (key.trim(), value.trim());
        if value.is_empty() {
            return Err(err(format!("missing value for `{key}`")));
        }
        let real = || {
            value
                .parse::<f64>()
                .map_err(|_| err(format!("`{key}` needs a number, got `{value}`")))
        };
        match key {
            "convention" => config.convention = Some(parse_convention(value).map_err(err)?),
            "seed" => {
                config.seed = value.parse().map_err(|_| {
                    err(format!(
                        "`seed` needs a non-negative integer, got `{value}`"
                    ))
                })?
            }
            "output_format" => config.output_format = Some(value.parse().map_err(err)?),
            "a0" => config.atom.a0 = Some(real()?),
            "mass_ev" => config.atom.mass_ev = Some(real()?),
            "reduced_mass_ev" => config.atom.reduced_mass_ev = Some(real()?),
            "omega_ev" => config.atom.omega_ev = Some(real()?),
            "delta_m_over_m" => config.atom.delta_m_over_m = Some(real()?),
            k if k.starts_with("tolerance.") => {
                let name = &k["tolerance.".len()..];
                if !TOLERANCES.iter().any(|(n, _)| *n == name) {
                    let known: Vec<&str> = TOLERANCES.iter().map(|(n, _)| *n).collect();
                    return Err(err(format!(
                        "unknown tolerance `{name}` (known: {})",
                        known.join(", ")
                    )));
                }
                let v = real()?;
                if !(v > 0.0 && v.is_finite()) {
                    return Err(err(format!("tolerance `{name}` must be positive, got {v}")));
                }
                config.tolerances.insert(name.to_string(), v);
            }
            other => return Err(err(format!("unknown key `{other}`"))),
        }
    }
    Ok(config)
}
