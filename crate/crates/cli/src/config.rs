//! Resolved run settings, embedded verbatim in every report.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use ordsym::generators::{generate, ProcessSpec};
use ordsym::{
    custom_partition, gaussian_partition, reflection_partition, reversal_partition, Bandwidth,
    HacKernel, Partition, TestConfig,
};
use serde::{Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};
use crate::ingest::{ingest_csv, ColumnSelector, Transform};

/// Symmetry hypothesis chosen on the command line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PartitionSelector {
    Reversal,
    Reflection,
    Gaussian,
    /// Path to a custom partition file; listed patterns only unless
    /// singleton completion is requested.
    File {
        path: String,
        complete: bool,
    },
}

impl PartitionSelector {
    pub fn build(&self, d: usize) -> Result<Partition> {
        Ok(match self {
            PartitionSelector::Reversal => reversal_partition(d)?,
            PartitionSelector::Reflection => reflection_partition(d)?,
            PartitionSelector::Gaussian => gaussian_partition(d)?,
            PartitionSelector::File { path, complete } => {
                let p = Path::new(path);
                if !p.exists() {
                    return Err(CliError::FileNotFound(p.to_path_buf()));
                }
                let text = std::fs::read_to_string(p).map_err(CliError::io(path.as_str()))?;
                custom_partition(d, &text, *complete, path)?
            }
        })
    }

    pub fn with_completion(self, complete: bool) -> Self {
        match self {
            PartitionSelector::File { path, .. } => PartitionSelector::File { path, complete },
            other => other,
        }
    }
}

impl FromStr for PartitionSelector {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(path) = s.strip_prefix("file:") {
            return Ok(PartitionSelector::File {
                path: path.to_string(),
                complete: false,
            });
        }
        match s.to_ascii_lowercase().as_str() {
            "reversal" => Ok(PartitionSelector::Reversal),
            "reflection" => Ok(PartitionSelector::Reflection),
            "gaussian" => Ok(PartitionSelector::Gaussian),
            other => Err(CliError::InvalidArgument(format!(
                "unknown partition '{other}' (expected reversal, reflection, gaussian or file:<path>)"
            ))),
        }
    }
}

impl fmt::Display for PartitionSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PartitionSelector::Reversal => f.write_str("reversal"),
            PartitionSelector::Reflection => f.write_str("reflection"),
            PartitionSelector::Gaussian => f.write_str("gaussian"),
            PartitionSelector::File { path, .. } => write!(f, "file:{path}"),
        }
    }
}

impl Serialize for PartitionSelector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Where the series comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum SeriesSource {
    /// CSV path, or `-` for stdin.
    File {
        path: String,
        column: Option<ColumnSelector>,
    },
    Process {
        spec: ProcessSpec,
        n: usize,
    },
}

/// Identity of the analysed data: a digest of the values rather than a
/// path, so file and stdin input produce the same report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InputDigest {
    pub values: usize,
    pub sha256: String,
}

impl InputDigest {
    pub fn of(series: &[f64]) -> Self {
        let mut hasher = Sha256::new();
        for v in series {
            hasher.update(v.to_le_bytes());
        }
        let digest = hasher.finalize();
        InputDigest {
            values: series.len(),
            sha256: digest.iter().map(|b| format!("{b:02x}")).collect(),
        }
    }
}

/// Everything needed to rerun a command. Thread count is deliberately
/// absent: it never changes results.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<InputDigest>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub column: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub process: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    pub d: usize,
    pub partition: PartitionSelector,
    pub alpha: f64,
    pub mc_samples: usize,
    pub kernel: HacKernel,
    pub bandwidth: String,
    pub demean: bool,
    pub seed: u64,
    pub transform: Transform,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub block_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replicates: Option<usize>,
}

impl RunConfig {
    pub fn new(command: &str) -> Self {
        let t = TestConfig::default();
        RunConfig {
            command: command.to_string(),
            input: None,
            column: None,
            process: None,
            n: None,
            d: 3,
            partition: PartitionSelector::Reversal,
            alpha: t.alpha,
            mc_samples: t.mc_samples,
            kernel: t.kernel,
            bandwidth: "auto".into(),
            demean: t.demean,
            seed: t.seed,
            transform: Transform::None,
            block_size: None,
            replicates: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(CliError::InvalidArgument(format!(
                "alpha {} outside (0, 1)",
                self.alpha
            )));
        }
        if self.d < 2 {
            return Err(CliError::InvalidArgument(format!(
                "d = {} must be >= 2",
                self.d
            )));
        }
        if self.mc_samples < 1000 {
            return Err(CliError::InvalidArgument(format!(
                "mc-samples {} is below the floor of 1000",
                self.mc_samples
            )));
        }
        if let Some(b) = self.block_size {
            if b < self.d + 1 {
                return Err(CliError::InvalidArgument(format!(
                    "block size {b} must be at least d + 1 = {}",
                    self.d + 1
                )));
            }
        }
        self.bandwidth.parse::<Bandwidth>()?;
        Ok(())
    }

    pub fn test_config(&self) -> Result<TestConfig> {
        let cfg = TestConfig {
            alpha: self.alpha,
            mc_samples: self.mc_samples,
            kernel: self.kernel,
            bandwidth: self.bandwidth.parse()?,
            demean: self.demean,
            seed: self.seed,
            ..TestConfig::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Loads the series, applies the transform and records the source.
    pub fn load(&mut self, source: &SeriesSource) -> Result<Vec<f64>> {
        let raw = match source {
            SeriesSource::File { path, column } => {
                self.column = column.as_ref().map(|c| c.to_string());
                let x = ingest_csv(path, column.as_ref())?;
                self.input = Some(InputDigest::of(&x));
                x
            }
            SeriesSource::Process { spec, n } => {
                self.process = Some(spec.to_string());
                self.n = Some(*n);
                generate(spec, *n, self.seed)?
            }
        };
        self.transform.apply(&raw)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selectors_parse() {
        assert_eq!(
            "gaussian".parse::<PartitionSelector>().unwrap(),
            PartitionSelector::Gaussian
        );
        assert_eq!(
            "file:groups.txt"
                .parse::<PartitionSelector>()
                .unwrap()
                .to_string(),
            "file:groups.txt"
        );
        assert!("mirror".parse::<PartitionSelector>().is_err());
    }

    #[test]
    fn validation() {
        let mut c = RunConfig::new("test");
        assert!(c.validate().is_ok());
        c.alpha = 1.0;
        assert!(c.validate().is_err());
        c.alpha = 0.05;
        c.mc_samples = 500;
        assert!(c.validate().is_err());
        c.mc_samples = 2000;
        c.block_size = Some(3);
        assert!(c.validate().is_err());
        c.block_size = None;
        c.bandwidth = "0.5".into();
        assert!(c.validate().is_err());
    }

    #[test]
    fn digest_depends_on_values_only() {
        let a = InputDigest::of(&[1.0, 2.0]);
        assert_eq!(a, InputDigest::of(&[1.0, 2.0]));
        assert_ne!(a, InputDigest::of(&[2.0, 1.0]));
        assert_eq!(a.sha256.len(), 64);
    }
}
