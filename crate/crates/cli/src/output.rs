use std::io::Write;

use multipolar::units::HBAR_EV_S;
use multipolar::{AtomParameters, UnitSystem};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{OutputFormat, RunConfig};
use crate::error::CliError;

/// Everything needed to repeat a run: the effective configuration, the
/// constants derived from it and the command with its settings.
#[derive(Debug, Serialize)]
pub struct RunHeader {
    pub program: &'static str,
    pub version: &'static str,
    pub command: String,
    pub arguments: Value,
    pub convention: &'static str,
    pub e_squared: f64,
    pub hbar_ev_s: f64,
    pub atom: AtomParameters,
    pub seed: u64,
    pub tolerances: Value,
    pub config: Value,
}

impl RunHeader {
    pub fn new(command: &str, arguments: Value, config: &RunConfig, atom: AtomParameters) -> Self {
        let units = UnitSystem::natural(config.convention());
        RunHeader {
            program: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            arguments,
            convention: config.convention().label(),
            e_squared: units.e_squared(),
            hbar_ev_s: HBAR_EV_S,
            atom,
            seed: config.seed,
            tolerances: json!(config.tolerances),
            config: json!({
                "source": config.source.as_ref().map(|p| p.display().to_string()),
                "atom_overrides": config.atom,
                "output_format": config.output_format,
            }),
        }
    }
}

/// Writes the header and records in the requested format.
///
/// JSON output is a single object `{"header": …, "results": […]}`. CSV output
/// starts with one `# `-prefixed line holding the header as compact JSON,
/// followed by a header row and one row per record.
pub fn emit<R: Serialize, W: Write>(
    out: &mut W,
    format: OutputFormat,
    header: &RunHeader,
    records: &[R],
) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Output(e.to_string());
    match format {
        OutputFormat::Json => {
            let doc = json!({ "header": header, "results": records });
            serde_json::to_writer_pretty(&mut *out, &doc)
                .map_err(|e| CliError::Output(e.to_string()))?;
            writeln!(out).map_err(io)?;
        }
        OutputFormat::Csv => {
            let line =
                serde_json::to_string(header).map_err(|e| CliError::Output(e.to_string()))?;
            write!(out, "# {line}\r\n").map_err(io)?;
            let mut w = csv::WriterBuilder::new()
                .terminator(csv::Terminator::CRLF)
                .from_writer(&mut *out);
            for r in records {
                w.serialize(r)
                    .map_err(|e| CliError::Output(e.to_string()))?;
            }
            w.flush().map_err(io)?;
        }
    }
    out.flush().map_err(io)
}
