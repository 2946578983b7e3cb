//! Run configuration files.
//!
//! ```text
//! system = la.sys          # paths are relative to the config file
//! chart = la.chart
//! seed = 7
//!
//! [params]                 # overrides for the system's [params]
//! a = 2i
//!
//! [analyze]
//! point = 0, 0, 0, 0, 0, 1
//! tsh_samples = 200
//! probe_points = 64
//!
//! [cones]
//! query = 1, 0, 0, 0, 0, 0 # repeatable
//!
//! [model]
//! a = 2i                   # or: mu = 0.5
//! kappas = 16, 64, 256
//! n = 257
//! t_end = 1
//! dt = 0.001               # optional, default is the RK4 limit
//! lambda = 1
//! init = gaussian          # or: random
//! ```

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use sha2::{Digest, Sha256};

use hypersym::text::{split_list, DocLine, Document};
use hypersym::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Init {
    Gaussian,
    Random,
}

#[derive(Clone, Debug)]
pub struct ModelBlock {
    pub a: Option<Complex64>,
    pub kappas: Vec<f64>,
    pub n: usize,
    pub t_end: Option<f64>,
    pub dt: Option<f64>,
    pub lambda: f64,
    pub init: Init,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub system: Option<PathBuf>,
    pub chart: Option<PathBuf>,
    pub overrides: HashMap<String, Complex64>,
    pub seed: u64,
    pub point: Option<Vec<f64>>,
    pub tsh_samples: usize,
    pub probe_points: usize,
    pub queries: Vec<Vec<f64>>,
    pub model: ModelBlock,
    /// SHA-256 of the config text and the files it references.
    pub hash: String,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))
}

fn parse_reals(line: &DocLine) -> Result<Vec<f64>> {
    let (v, col) = line.value();
    split_list(v)
        .into_iter()
        .map(|(item, c)| {
            item.parse::<f64>()
                .map_err(|_| line.err(col + c - 1, format!("expected a real number, found '{item}'")))
        })
        .collect()
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = read(path)?;
        let doc = Document::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let file = |key: &str| -> Result<Option<PathBuf>> {
            match doc.get(None, key) {
                None => Ok(None),
                Some(l) => {
                    let p = base.join(l.value().0);
                    if !p.is_file() {
                        return Err(Error::Config(format!("{key} file {} does not exist", p.display())));
                    }
                    Ok(Some(p))
                }
            }
        };
        let system = file("system")?;
        let chart = file("chart")?;
        let seed = match doc.get(None, "seed") {
            Some(l) => l.parse_usize()? as u64,
            None => 0,
        };
        let mut overrides = HashMap::new();
        for (line, key, _) in doc.pairs(Some("params")) {
            overrides.insert(key.to_string(), line.parse_complex(&HashMap::new())?);
        }
        let point = doc.get(Some("analyze"), "point").map(parse_reals).transpose()?;
        let usize_or = |sec: &str, key: &str, default: usize| -> Result<usize> {
            doc.get(Some(sec), key).map(|l| l.parse_usize()).unwrap_or(Ok(default))
        };
        let tsh_samples = usize_or("analyze", "tsh_samples", 200)?;
        let probe_points = usize_or("analyze", "probe_points", 64)?;
        let queries = doc
            .pairs(Some("cones"))
            .filter(|(_, k, _)| *k == "query")
            .map(|(l, _, _)| parse_reals(l))
            .collect::<Result<Vec<_>>>()?;

        let m = Some("model");
        let a = match (doc.get(m, "a"), doc.get(m, "mu")) {
            (Some(l), _) => Some(l.parse_complex(&HashMap::new())?),
            (None, Some(l)) => Some(Complex64::new(0.0, l.parse_f64()?)),
            (None, None) => overrides.get("a").copied(),
        };
        let kappas = doc.get(m, "kappas").map(parse_reals).transpose()?.unwrap_or_default();
        let opt_f64 = |key: &str| doc.get(m, key).map(|l| l.parse_f64()).transpose();
        let init = match doc.get(m, "init") {
            None => Init::Gaussian,
            Some(l) => match l.value().0 {
                "gaussian" => Init::Gaussian,
                "random" => Init::Random,
                other => return Err(l.err(l.value().1, format!("unknown init '{other}' (gaussian or random)"))),
            },
        };
        let model = ModelBlock {
            a,
            kappas,
            n: usize_or("model", "n", 257)?,
            t_end: opt_f64("t_end")?,
            dt: opt_f64("dt")?,
            lambda: opt_f64("lambda")?.unwrap_or(1.0),
            init,
        };

        let mut hasher = Sha256::new();
        hasher.update(text.as_bytes());
        for p in [&system, &chart].into_iter().flatten() {
            hasher.update([0u8]);
            hasher.update(read(p)?.as_bytes());
        }
        let hash = hasher.finalize().iter().map(|b| format!("{b:02x}")).collect();

        Ok(RunConfig {
            system,
            chart,
            overrides,
            seed,
            point,
            tsh_samples,
            probe_points,
            queries,
            model,
            hash,
        })
    }

    pub fn require_system(&self) -> Result<&Path> {
        self.system
            .as_deref()
            .ok_or_else(|| Error::Config("config does not name a system file".into()))
    }

    pub fn model_a(&self) -> Result<Complex64> {
        self.model
            .a
            .ok_or_else(|| Error::Config("config gives neither [model] a nor mu".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load(text: &str) -> Result<RunConfig> {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.cfg");
        std::fs::write(&p, text).unwrap();
        RunConfig::load(&p)
    }

    #[test]
    fn model_block() {
        let c = load("seed = 9\n[model]\nmu = 0.5\nkappas = 1, 4\ninit = random\n").unwrap();
        assert_eq!(c.seed, 9);
        assert_eq!(c.model_a().unwrap(), Complex64::new(0.0, 0.5));
        assert_eq!(c.model.kappas, vec![1.0, 4.0]);
        assert_eq!(c.model.n, 257);
        assert_eq!(c.model.init, Init::Random);
        assert!(c.system.is_none());
    }

    #[test]
    fn params_a_is_the_model_fallback() {
        let c = load("[params]\na = 2i\n").unwrap();
        assert_eq!(c.model_a().unwrap(), Complex64::new(0.0, 2.0));
    }

    #[test]
    fn hash_tracks_content() {
        let a = load("seed = 1\n").unwrap().hash;
        let b = load("seed = 2\n").unwrap().hash;
        assert_eq!(a.len(), 64);
        assert_ne!(a, b);
        assert_eq!(a, load("seed = 1\n").unwrap().hash);
    }

    #[test]
    fn bad_values() {
        assert!(load("[model]\ninit = sine\n").is_err());
        assert!(load("[analyze]\npoint = 0, x\n").is_err());
        assert!(load("system = missing.sys\n").is_err());
    }
}
