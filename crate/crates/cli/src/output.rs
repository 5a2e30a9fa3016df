//! Self-describing output artifacts and error reporting.

use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::ValueEnum;
use regsat_core::Error;
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Provenance block written at the top of every artifact.
pub fn header(command: &str, config: Value, seed: Option<u64>) -> Value {
    json!({
        "tool": "regsat",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "config": config,
        "seed": seed,
    })
}

pub struct Sink {
    out: Box<dyn Write>,
}

impl Sink {
    pub fn open(path: Option<&PathBuf>) -> Result<Self, Error> {
        let out: Box<dyn Write> = match path {
            Some(p) => Box::new(io::BufWriter::new(File::create(p)?)),
            None => Box::new(io::BufWriter::new(io::stdout())),
        };
        Ok(Sink { out })
    }

    pub fn text(&mut self, s: &str) -> Result<(), Error> {
        self.out.write_all(s.as_bytes())?;
        self.out.flush()?;
        Ok(())
    }

    /// `{"header": .., "results": ..}`.
    pub fn json(&mut self, header: Value, results: Value) -> Result<(), Error> {
        let doc = json!({ "header": header, "results": results });
        let mut s = serde_json::to_string_pretty(&doc).map_err(io::Error::from)?;
        s.push('\n');
        self.text(&s)
    }

    /// CSV preceded by the header as a `#` comment line.
    pub fn csv(&mut self, header: Value, columns: &str, rows: &[String]) -> Result<(), Error> {
        let mut s = format!("# {header}\n{columns}\n");
        for r in rows {
            s.push_str(r);
            s.push('\n');
        }
        self.text(&s)
    }
}

/// Process exit code for each error class; 2 is left to usage errors.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidParameter { .. } => 3,
        Error::Integrality(_) => 4,
        Error::DegenerateSaddle(_) | Error::NoConvergence { .. } => 5,
        Error::NonMonotone(_) | Error::Bracket(_) => 6,
        Error::CapExceeded(_) | Error::RetryBudget(_) => 7,
        Error::Parse { .. } => 8,
        Error::Io(_) => 9,
    }
}

pub fn error_json(e: &Error) -> Value {
    json!({ "error": { "kind": e.kind(), "message": e.to_string(), "exit_code": exit_code(e) } })
}
