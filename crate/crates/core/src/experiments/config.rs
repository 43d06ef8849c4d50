//! Input files. Systems and potentials are TOML; experiment configs are JSON
//! and may reference the other two by path (relative to the config file) or
//! inline them.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::estimators::DEFAULT_K_EXPONENT;
use crate::sft::{Alphabet, Sft, Word};
use crate::thermo::PotentialSpec;

/// An SFT given by its alphabet size and forbidden words.
///
/// ```toml
/// alphabet = 2
/// forbidden = ["11"]
/// ```
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    pub alphabet: usize,
    #[serde(default)]
    pub forbidden: Vec<String>,
}

impl SystemSpec {
    pub fn golden_mean() -> Self {
        SystemSpec {
            alphabet: 2,
            forbidden: vec!["11".into()],
        }
    }

    pub fn build(&self) -> Result<Sft, Error> {
        let words = self
            .forbidden
            .iter()
            .map(|w| w.parse::<Word>())
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Sft::from_forbidden_words(
            Alphabet::new(self.alphabet)?,
            &words,
        )?)
    }
}

fn read_to_string(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn parse_toml<T: DeserializeOwned>(path: &Path) -> Result<T, Error> {
    toml::from_str(&read_to_string(path)?).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

pub fn read_system(path: &Path) -> Result<SystemSpec, Error> {
    parse_toml(path)
}

/// A potential file:
///
/// ```toml
/// range = 2
/// default = 0.0
/// [values]
/// "01" = 0.3
/// ```
pub fn read_potential(path: &Path) -> Result<PotentialSpec, Error> {
    parse_toml(path)
}

/// Either a path to a TOML file or the table itself.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Source<T> {
    Path(PathBuf),
    Inline(T),
}

fn default_potential() -> Source<PotentialSpec> {
    Source::Inline(PotentialSpec::zero())
}

fn default_k_exponent() -> f64 {
    DEFAULT_K_EXPONENT
}

fn default_survival_length() -> usize {
    400
}

fn default_lemma_n() -> Vec<usize> {
    vec![3, 4, 5, 6]
}

fn default_fuzz_cases() -> usize {
    10_000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub system: Source<SystemSpec>,
    #[serde(default = "default_potential")]
    pub potential: Source<PotentialSpec>,
    pub n: Vec<usize>,
    pub alpha: Vec<f64>,
    pub trials: usize,
    pub master_seed: u64,
    #[serde(default = "default_k_exponent")]
    pub k_exponent: f64,
    /// Overrides the default tolerance of the typical set.
    #[serde(default)]
    pub delta: Option<f64>,
    /// Length `L` of the survival curves.
    #[serde(
        rename = "L",
        alias = "survival_length",
        default = "default_survival_length"
    )]
    pub survival_length: usize,
    /// Block lengths of the exact-enumeration cells in the lemma suite.
    #[serde(default = "default_lemma_n")]
    pub lemma_n: Vec<usize>,
    /// Fuzz cases per combinatorial check in the lemma suite.
    #[serde(default = "default_fuzz_cases")]
    pub fuzz_cases: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// Directory that relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn new(
        system: SystemSpec,
        potential: PotentialSpec,
        n: Vec<usize>,
        alpha: Vec<f64>,
        trials: usize,
        master_seed: u64,
    ) -> Self {
        ExperimentConfig {
            system: Source::Inline(system),
            potential: Source::Inline(potential),
            n,
            alpha,
            trials,
            master_seed,
            k_exponent: DEFAULT_K_EXPONENT,
            delta: None,
            survival_length: default_survival_length(),
            lemma_n: default_lemma_n(),
            fuzz_cases: default_fuzz_cases(),
            out: None,
            base_dir: PathBuf::from("."),
        }
    }

    pub fn from_path(path: &Path) -> Result<Self, Error> {
        let mut c: ExperimentConfig =
            serde_json::from_str(&read_to_string(path)?).map_err(|e| Error::Parse {
                path: path.display().to_string(),
                message: e.to_string(),
            })?;
        c.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), Error> {
        let bad = |m: &str| Err(Error::Invalid(m.to_string()));
        if self.trials == 0 {
            return bad("trials must be at least 1");
        }
        if self.n.is_empty() || self.n.contains(&0) {
            return bad("n must be a non-empty list of positive block lengths");
        }
        if self.alpha.is_empty() || self.alpha.iter().any(|&a| !(a > 0.0 && a <= 1.0)) {
            return bad("alpha must be a non-empty list of values in (0, 1]");
        }
        if !(self.k_exponent >= 1.0 && self.k_exponent.is_finite()) {
            return bad("k_exponent must be at least 1");
        }
        if self.delta.is_some_and(|d| !(d > 0.0 && d.is_finite())) {
            return bad("delta must be positive");
        }
        if self.survival_length == 0 {
            return bad("L must be at least 1");
        }
        Ok(())
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn system_spec(&self) -> Result<SystemSpec, Error> {
        match &self.system {
            Source::Path(p) => read_system(&self.resolve(p)),
            Source::Inline(s) => Ok(s.clone()),
        }
    }

    pub fn potential_spec(&self) -> Result<PotentialSpec, Error> {
        match &self.potential {
            Source::Path(p) => read_potential(&self.resolve(p)),
            Source::Inline(s) => Ok(s.clone()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_paths_and_inline_tables() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(
            dir.path().join("x.toml"),
            "alphabet = 2\nforbidden = [\"11\"]\n",
        )
        .unwrap();
        fs::write(
            dir.path().join("f.toml"),
            "range = 2\ndefault = 0.0\n[values]\n\"01\" = 0.3\n",
        )
        .unwrap();
        let cfg = dir.path().join("c.json");
        fs::write(
            &cfg,
            r#"{"system": "x.toml", "potential": "f.toml", "n": [6], "alpha": [0.9], "trials": 3, "master_seed": 7, "L": 50}"#,
        )
        .unwrap();
        let c = ExperimentConfig::from_path(&cfg).unwrap();
        assert_eq!(c.system_spec().unwrap(), SystemSpec::golden_mean());
        assert_eq!(c.potential_spec().unwrap().values["01"], 0.3);
        assert_eq!(c.survival_length, 50);
        assert_eq!(c.k_exponent, DEFAULT_K_EXPONENT);

        fs::write(
            &cfg,
            r#"{"system": {"alphabet": 3}, "n": [2], "alpha": [1.0], "trials": 1, "master_seed": 0}"#,
        )
        .unwrap();
        let c = ExperimentConfig::from_path(&cfg).unwrap();
        assert_eq!(c.system_spec().unwrap().build().unwrap().size(), 3);
        assert_eq!(c.potential_spec().unwrap(), PotentialSpec::zero());
    }

    #[test]
    fn rejects_bad_values() {
        let mut c = ExperimentConfig::new(
            SystemSpec::golden_mean(),
            PotentialSpec::zero(),
            vec![4],
            vec![0.9],
            1,
            0,
        );
        assert!(c.validate().is_ok());
        c.trials = 0;
        assert!(c.validate().is_err());
        c.trials = 1;
        c.alpha = vec![0.0];
        assert!(c.validate().is_err());
        c.alpha = vec![1.2];
        assert!(c.validate().is_err());
    }

    #[test]
    fn unknown_fields_are_errors() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("c.json");
        fs::write(
            &cfg,
            r#"{"system": {"alphabet": 2}, "n": [2], "alpha": [1.0], "trials": 1, "master_seed": 0, "bogus": 1}"#,
        )
        .unwrap();
        assert!(matches!(
            ExperimentConfig::from_path(&cfg),
            Err(Error::Parse { .. })
        ));
    }
}
