//! Settings file shared by all subcommands.
//!
//! The file is flat TOML. Every key is optional and every key has a matching
//! command-line flag, which wins when both are given. Relative paths are
//! resolved against the directory holding the file.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use mvlang::phylo::Linkage;
use mvlang::selection::validate_grid_threshold;
use serde::{Deserialize, Deserializer};

use crate::error::CliError;

/// Explained-variance threshold, or a request to pick one by stability sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Threshold {
    Fixed(f64),
    Sweep,
}

impl FromStr for Threshold {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("sweep") {
            return Ok(Threshold::Sweep);
        }
        let v: f64 = s
            .parse()
            .map_err(|_| format!("expected a number or \"sweep\", got {s:?}"))?;
        validate_grid_threshold(v).map_err(|e| e.to_string())?;
        Ok(Threshold::Fixed(v))
    }
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Threshold::Fixed(v) => write!(f, "{v}"),
            Threshold::Sweep => f.write_str("sweep"),
        }
    }
}

impl<'de> Deserialize<'de> for Threshold {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Number(v) => validate_grid_threshold(v)
                .map(|_| Threshold::Fixed(v))
                .map_err(serde::de::Error::custom),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub view_x: Option<PathBuf>,
    pub view_y: Option<PathBuf>,
    pub threshold_x: Option<Threshold>,
    pub threshold_y: Option<Threshold>,
    pub retention_cutoff: Option<f64>,
    pub ridge: Option<f64>,
    pub standardize: Option<bool>,
    pub linkage: Option<Linkage>,
    pub k_max: Option<usize>,
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub space: Option<PathBuf>,
    pub meta: Option<PathBuf>,
    pub reference: Option<PathBuf>,
    pub thresholds: Option<Vec<f64>>,
    pub sizes: Option<Vec<usize>>,
    pub replicates: Option<usize>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Config, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let mut config: Config =
            toml::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [
            &mut config.view_x,
            &mut config.view_y,
            &mut config.out_dir,
            &mut config.model,
            &mut config.space,
            &mut config.meta,
            &mut config.reference,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        config.validate()?;
        Ok(config)
    }

    /// Input files must exist; output locations are only created on write.
    fn validate(&self) -> Result<(), CliError> {
        let inputs = [
            ("view_x", &self.view_x),
            ("view_y", &self.view_y),
            ("space", &self.space),
            ("meta", &self.meta),
            ("reference", &self.reference),
        ];
        for (key, path) in inputs {
            if let Some(p) = path {
                if !p.is_file() {
                    return Err(CliError::Input(format!("{key}: {} does not exist", p.display())));
                }
            }
        }
        for &t in self.thresholds.iter().flatten() {
            validate_grid_threshold(t)?;
        }
        Ok(())
    }
}

/// Flag value, else config value, else a usage error naming both.
pub fn require<T>(flag: Option<T>, config: Option<T>, name: &str) -> Result<T, CliError> {
    flag.or(config).ok_or_else(|| {
        CliError::Usage(format!(
            "missing --{} (or `{}` in the config file)",
            name.replace('_', "-"),
            name
        ))
    })
}
