//! Declarative run configuration (TOML) and the header stamped on outputs.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::dataset::SourceKind;
use super::synth::Generator;
use crate::error::{Error, Result};
use crate::leverage::{ProbabilityScheme, SchemeKind};
use crate::recovery::{TrialProtocol, DEFAULT_SWEEP_CAP};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DataSpec {
    File {
        path: PathBuf,
        format: SourceKind,
        /// Declared shape for ratings triplets.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rows: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cols: Option<usize>,
    },
    Synthetic {
        rows: usize,
        cols: usize,
        rank: usize,
        #[serde(default = "default_generator")]
        generator: Generator,
    },
}

fn default_generator() -> Generator {
    Generator::Incoherent
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeName {
    Uniform,
    Leveraged,
    Relaxed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SchemeSpec {
    pub kind: SchemeName,
    pub constant: f64,
    pub log_factor: bool,
    pub floor: f64,
}

impl Default for SchemeSpec {
    fn default() -> Self {
        Self {
            kind: SchemeName::Relaxed,
            constant: 3.0,
            log_factor: false,
            floor: 0.0,
        }
    }
}

impl SchemeSpec {
    pub fn scheme(&self) -> ProbabilityScheme {
        ProbabilityScheme {
            kind: match self.kind {
                SchemeName::Uniform => SchemeKind::Uniform,
                SchemeName::Leveraged => SchemeKind::Leveraged,
                SchemeName::Relaxed => SchemeKind::Relaxed,
            },
            constant: self.constant,
            log_factor: self.log_factor,
            floor: self.floor,
        }
    }
}

/// Desk-scale verification runs on synthetic instances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySpec {
    pub rows: usize,
    pub cols: usize,
    pub rank: usize,
    pub generator: Generator,
    pub lemma_seeds: usize,
    /// Per-round constant of the lemma suite; absent means theory grade.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c0: Option<f64>,
    pub perturbation_constant: f64,
    pub perturbations_per_seed: usize,
    pub certificate_seeds: usize,
    pub certificate_c0: f64,
    pub lemma6_grid: usize,
    pub lemma6_pairs: usize,
}

impl Default for VerifySpec {
    fn default() -> Self {
        Self {
            rows: 20,
            cols: 15,
            rank: 2,
            generator: Generator::Incoherent,
            lemma_seeds: 100,
            c0: None,
            perturbation_constant: 3.0,
            perturbations_per_seed: 5,
            certificate_seeds: 50,
            certificate_c0: 1.0,
            lemma6_grid: 200,
            lemma6_pairs: 100_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    /// Output directory; not part of the config hash.
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<DataSpec>,
    /// Truncation ranks of an experiment; empty means the synthetic rank.
    #[serde(default)]
    pub ranks: Vec<usize>,
    #[serde(default = "default_sweep_cap")]
    pub sweep_cap: u32,
    #[serde(default)]
    pub scheme: SchemeSpec,
    #[serde(default)]
    pub protocol: TrialProtocol,
    #[serde(default)]
    pub verify: VerifySpec,
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

fn default_sweep_cap() -> u32 {
    DEFAULT_SWEEP_CAP
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            out: default_out(),
            data: None,
            ranks: Vec::new(),
            sweep_cap: DEFAULT_SWEEP_CAP,
            scheme: SchemeSpec::default(),
            protocol: TrialProtocol::default(),
            verify: VerifySpec::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn data(&self) -> Result<&DataSpec> {
        self.data
            .as_ref()
            .ok_or_else(|| Error::Config("no [data] section and no --data flag".into()))
    }

    /// Ranks to run: the configured list, else the synthetic rank.
    pub fn experiment_ranks(&self) -> Result<Vec<usize>> {
        if !self.ranks.is_empty() {
            return Ok(self.ranks.clone());
        }
        match self.data()? {
            DataSpec::Synthetic { rank, .. } => Ok(vec![*rank]),
            DataSpec::File { .. } => Err(Error::Config("file data needs `ranks` or --rank".into())),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.protocol.validate()?;
        if self.sweep_cap == 0 {
            return Err(Error::Config("sweep_cap must be at least 1".into()));
        }
        if self.ranks.contains(&0) {
            return Err(Error::Config("ranks must be positive".into()));
        }
        Ok(())
    }

    /// SHA-256 of the canonical TOML form: output directory blanked and the
    /// ranks that will actually run spelled out.
    pub fn hash(&self) -> Result<String> {
        let canonical = RunConfig {
            out: PathBuf::new(),
            ranks: self.experiment_ranks().unwrap_or_else(|_| self.ranks.clone()),
            ..self.clone()
        }
        .to_toml()?;
        let digest = Sha256::digest(canonical.as_bytes());
        Ok(digest.iter().take(8).map(|b| format!("{b:02x}")).collect())
    }

    /// `# config_hash=<hex> seed=<seed>`, the first line of every output.
    pub fn header(&self) -> Result<String> {
        Ok(format!("# config_hash={} seed={}", self.hash()?, self.seed))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::SolverConfig;

    const EXAMPLE: &str = r#"
seed = 7
out = "runs/a"
ranks = [5]

[data]
source = "synthetic"
rows = 100
cols = 80
rank = 5
generator = { kind = "spiked", rows = 1, cols = 1, factor = 10.0 }

[protocol]
trials = 10
success_min = 9
epsilon = 1e-3
error_mode = "rel"

[protocol.solver]
max_iterations = 500
"#;

    #[test]
    fn parses_and_round_trips() {
        let c = RunConfig::from_toml(EXAMPLE).unwrap();
        assert_eq!(c.protocol.success_threshold, 9);
        assert_eq!(c.protocol.solver.max_iterations, 500);
        assert_eq!(c.protocol.solver.tolerance, SolverConfig::default().tolerance);
        assert_eq!(c.experiment_ranks().unwrap(), vec![5]);
        let again = RunConfig::from_toml(&c.to_toml().unwrap()).unwrap();
        assert_eq!(again, c);
        assert_eq!(again.hash().unwrap(), c.hash().unwrap());
    }

    #[test]
    fn hash_ignores_out_only() {
        let c = RunConfig::from_toml(EXAMPLE).unwrap();
        let moved = RunConfig { out: "elsewhere".into(), ..c.clone() };
        assert_eq!(moved.hash().unwrap(), c.hash().unwrap());
        let reseeded = RunConfig { seed: 8, ..c.clone() };
        assert_ne!(reseeded.hash().unwrap(), c.hash().unwrap());
        assert!(c.header().unwrap().ends_with(" seed=7"));
    }

    #[test]
    fn unknown_keys_are_config_errors() {
        assert!(matches!(RunConfig::from_toml("seed = 1\nbogus = 2\n"), Err(Error::Config(_))));
        assert!(matches!(RunConfig::from_toml("seed = 1\n[protocol]\ntrails = 3\n"), Err(Error::Config(_))));
        let file = RunConfig::from_toml("seed = 1\n[data]\nsource = \"file\"\npath = \"u.data\"\nformat = \"triplets\"\n").unwrap();
        assert!(file.experiment_ranks().is_err());
    }
}
