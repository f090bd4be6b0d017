use std::io::Write;

use serde::Serialize;
use serde_json::Value;

use crate::args::Format;
use crate::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct Seeds {
    pub master_seed: u64,
    pub streams: &'static str,
}

impl Seeds {
    pub fn single(master_seed: u64) -> Self {
        Self { master_seed, streams: "chacha8, stream 0" }
    }

    pub fn per_replication(master_seed: u64) -> Self {
        Self { master_seed, streams: "chacha8, stream = cell << 32 | replication" }
    }
}

/// What a subcommand produced, rendered later in the requested format.
pub struct Report {
    pub command: &'static str,
    pub config: Value,
    pub results: Value,
    pub seeds: Option<Seeds>,
    pub warnings: Vec<String>,
    pub csv: Vec<u8>,
    pub text: String,
    /// Emitted verbatim whatever the format.
    pub raw: Option<Vec<u8>>,
}

impl Report {
    pub fn new(command: &'static str, config: impl Serialize, results: impl Serialize) -> Result<Self, CliError> {
        Ok(Self {
            command,
            config: serde_json::to_value(config).map_err(darwin::DarwinError::from)?,
            results: serde_json::to_value(results).map_err(darwin::DarwinError::from)?,
            seeds: None,
            warnings: Vec::new(),
            csv: Vec::new(),
            text: String::new(),
            raw: None,
        })
    }

    pub fn render(&self, format: Format, wall_time: Option<f64>) -> Result<Vec<u8>, CliError> {
        if let Some(raw) = &self.raw {
            return Ok(raw.clone());
        }
        match format {
            Format::Json => {
                #[derive(Serialize)]
                struct Envelope<'a> {
                    command: &'a str,
                    config: &'a Value,
                    results: &'a Value,
                    seeds: &'a Option<Seeds>,
                    warnings: &'a [String],
                    #[serde(skip_serializing_if = "Option::is_none")]
                    wall_time_s: Option<f64>,
                }
                let env = Envelope {
                    command: self.command,
                    config: &self.config,
                    results: &self.results,
                    seeds: &self.seeds,
                    warnings: &self.warnings,
                    wall_time_s: wall_time,
                };
                let mut out = serde_json::to_vec_pretty(&env).map_err(darwin::DarwinError::from)?;
                out.push(b'\n');
                Ok(out)
            }
            Format::Csv => Ok(self.csv.clone()),
            Format::Text => {
                let mut out = self.text.clone();
                for w in &self.warnings {
                    out.push_str(&format!("warning: {w}\n"));
                }
                Ok(out.into_bytes())
            }
        }
    }
}

/// CSV table built from string cells.
pub struct Table {
    w: csv::Writer<Vec<u8>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Result<Self, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header).map_err(darwin::DarwinError::from)?;
        Ok(Self { w })
    }

    pub fn row<I, S>(&mut self, cells: I) -> Result<(), CliError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.w.write_record(cells).map_err(darwin::DarwinError::from)?;
        Ok(())
    }

    pub fn finish(self) -> Result<Vec<u8>, CliError> {
        self.w.into_inner().map_err(|e| CliError::Data(e.to_string()))
    }
}

pub fn f4(x: f64) -> String {
    let s = format!("{x:.4}");
    if s == "-0.0000" { "0.0000".into() } else { s }
}

pub fn write_out(bytes: &[u8], path: Option<&std::path::Path>) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|e| CliError::Data(format!("{}: {e}", p.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes).and_then(|_| stdout.flush()).map_err(|e| CliError::Data(e.to_string()))
        }
    }
}
