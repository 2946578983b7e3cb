//! Output files. Every file starts with `#` lines naming the tool version,
//! the config hash and the seed.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

#[derive(Clone, Debug)]
pub struct Provenance {
    pub version: &'static str,
    pub config_hash: String,
    pub seed: u64,
}

impl Provenance {
    pub fn header(&self) -> String {
        format!(
            "# hypersym {}\n# config-sha256: {}\n# seed: {}\n",
            self.version, self.config_hash, self.seed
        )
    }
}

/// A `key: value` text report built section by section.
#[derive(Default)]
pub struct TextReport {
    body: String,
}

impl TextReport {
    pub fn section(&mut self, name: &str) {
        if !self.body.is_empty() {
            self.body.push('\n');
        }
        self.body.push_str(&format!("[{name}]\n"));
    }

    pub fn line(&mut self, key: &str, value: impl std::fmt::Display) {
        self.body.push_str(&format!("{key}: {value}\n"));
    }

    pub fn write(&self, dir: &Path, name: &str, prov: &Provenance) -> io::Result<PathBuf> {
        let path = dir.join(name);
        let mut f = fs::File::create(&path)?;
        f.write_all(prov.header().as_bytes())?;
        f.write_all(self.body.as_bytes())?;
        Ok(path)
    }
}

pub fn write_csv(
    dir: &Path,
    name: &str,
    prov: &Provenance,
    headers: &[&str],
    rows: &[Vec<String>],
) -> io::Result<PathBuf> {
    let path = dir.join(name);
    let mut f = fs::File::create(&path)?;
    f.write_all(prov.header().as_bytes())?;
    let mut w = csv::Writer::from_writer(f);
    w.write_record(headers)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(path)
}

/// Fixed-width scientific formatting used in every table.
pub fn num(x: f64) -> String {
    format!("{x:.10e}")
}
