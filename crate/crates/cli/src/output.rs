//! File writing, input loading and content hashing.

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

/// Input text together with where it came from.
pub struct Input {
    pub origin: String,
    pub text: String,
}

impl Input {
    /// Read `path`, or fall back to the bundled text when no path is given.
    pub fn load(path: Option<&Path>, bundled_name: &str, bundled: &str) -> Result<Self, CliError> {
        match path {
            Some(p) => fs::read_to_string(p)
                .map(|text| Self {
                    origin: p.display().to_string(),
                    text,
                })
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display()))),
            None => Ok(Self {
                origin: format!("<bundled {bundled_name}>"),
                text: bundled.to_owned(),
            }),
        }
    }

    pub fn record(&self) -> InputRecord {
        InputRecord {
            source: self.origin.clone(),
            sha256: sha256_hex(self.text.as_bytes()),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct InputRecord {
    pub source: String,
    pub sha256: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Output directory, created on first use.
pub struct OutDir(PathBuf);

impl OutDir {
    pub fn create(path: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(path).map_err(|e| {
            CliError::Config(format!(
                "cannot create output directory {}: {e}",
                path.display()
            ))
        })?;
        Ok(Self(path.to_owned()))
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.0.join(name)
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).expect("output types serialize");
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    pub fn write_csv<I, R>(&self, name: &str, header: &[&str], rows: I) -> Result<(), CliError>
    where
        I: IntoIterator<Item = R>,
        R: IntoIterator<Item = f64>,
    {
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| CliError::Config(format!("cannot encode {name}: {e}"));
        w.write_record(header).map_err(csv_err)?;
        for row in rows {
            w.write_record(row.into_iter().map(|v| v.to_string()))
                .map_err(csv_err)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| CliError::Config(format!("cannot encode {name}: {e}")))?;
        self.write(name, &bytes)
    }

    pub fn write(&self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.path(name);
        fs::write(&path, bytes)
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
    }
}

/// Row-major nested arrays.
pub fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}
