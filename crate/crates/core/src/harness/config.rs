//! Flat `key = value` experiment configuration.
//!
//! Keys: `dataset`, `n`, `k` (sets both bounds), `k_min`, `k_max`,
//! `source`, `mechanisms` (comma-separated), `runs`,
//! `deviations_per_agent`, `instances`, `seed`, `regret`,
//! `regret_instances`, `optimize`, `maximin`, `swap_rank_p`,
//! `aceei_epsilon`, `aceei_tabu_iters`, `out_dir`. Lines starting with `#`
//! are comments.

use std::path::{Path, PathBuf};

use crate::aceei::AceeiParams;
use crate::data::{DatasetKind, DatasetSpec};
use crate::error::{Error, Result};
use crate::mechanisms::{Mechanism, MechanismKind};

use super::deviation::DEFAULT_SWAP_RANK_P;

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub dataset: DatasetSpec,
    pub mechanisms: Vec<MechanismKind>,
    pub runs: usize,
    pub deviations_per_agent: usize,
    /// Generated instances; file datasets always have one.
    pub instances: usize,
    pub seed: u64,
    pub regret: bool,
    /// Instances on which regret is estimated, starting from the first.
    pub regret_instances: usize,
    pub optimize: bool,
    pub maximin: bool,
    pub swap_rank_p: f64,
    pub aceei: AceeiParams,
    pub out_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(dataset: DatasetSpec, mechanisms: Vec<MechanismKind>) -> Self {
        Self {
            dataset,
            mechanisms,
            runs: 8,
            deviations_per_agent: 25,
            instances: 20,
            seed: 0,
            regret: false,
            regret_instances: 1,
            optimize: true,
            maximin: false,
            swap_rank_p: DEFAULT_SWAP_RANK_P,
            aceei: AceeiParams::default(),
            out_dir: None,
        }
    }

    pub fn mechanism(&self, kind: MechanismKind) -> Mechanism {
        Mechanism {
            kind,
            aceei: self.aceei,
        }
    }

    pub fn instance_count(&self) -> usize {
        if self.dataset.kind.is_generator() {
            self.instances
        } else {
            1
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.mechanisms.is_empty() {
            return Err(Error::Config("no mechanisms given".into()));
        }
        for (name, v) in [
            ("runs", self.runs),
            ("deviations_per_agent", self.deviations_per_agent),
            ("instances", self.instances),
        ] {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be positive")));
            }
        }
        if !(self.swap_rank_p > 0.0 && self.swap_rank_p <= 1.0) {
            return Err(Error::Config("swap_rank_p must lie in (0, 1]".into()));
        }
        if !self.dataset.kind.is_generator() && self.dataset.source.is_none() {
            return Err(Error::Config("file datasets need `source`".into()));
        }
        Ok(())
    }

    /// Parses config text; relative `source` and `out_dir` paths resolve
    /// against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut dataset = DatasetSpec::generator(DatasetKind::RSim, 0, 0, 0);
        let mut cfg = Self::new(dataset.clone(), Vec::new());
        let mut saw_dataset = false;
        for (no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", no + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            let bad = |what: &str| Error::Config(format!("line {}: bad {what} `{value}`", no + 1));
            let count = || value.parse::<usize>().map_err(|_| bad(key));
            let flag = || match value.to_ascii_lowercase().as_str() {
                "true" | "yes" | "1" => Ok(true),
                "false" | "no" | "0" => Ok(false),
                _ => Err(bad(key)),
            };
            match key {
                "dataset" => {
                    dataset.kind = value.parse()?;
                    saw_dataset = true;
                }
                "n" => dataset.n = count()?,
                "k" => {
                    dataset.k_min = count()?;
                    dataset.k_max = dataset.k_min;
                }
                "k_min" => dataset.k_min = count()?,
                "k_max" => dataset.k_max = count()?,
                "source" => dataset.source = Some(base.join(value)),
                "mechanisms" => {
                    cfg.mechanisms = value
                        .split(',')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(str::parse)
                        .collect::<Result<_>>()?
                }
                "runs" => cfg.runs = count()?,
                "deviations_per_agent" => cfg.deviations_per_agent = count()?,
                "instances" => cfg.instances = count()?,
                "seed" => cfg.seed = value.parse().map_err(|_| bad(key))?,
                "regret" => cfg.regret = flag()?,
                "regret_instances" => cfg.regret_instances = count()?,
                "optimize" => cfg.optimize = flag()?,
                "maximin" => cfg.maximin = flag()?,
                "swap_rank_p" => cfg.swap_rank_p = value.parse().map_err(|_| bad(key))?,
                "aceei_epsilon" => cfg.aceei.epsilon = value.parse().map_err(|_| bad(key))?,
                "aceei_tabu_iters" => cfg.aceei.tabu_iters = count()?,
                "out_dir" => cfg.out_dir = Some(base.join(value)),
                other => return Err(Error::Config(format!("line {}: unknown key `{other}`", no + 1))),
            }
        }
        if !saw_dataset {
            return Err(Error::Config("missing `dataset`".into()));
        }
        cfg.dataset = dataset;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_config() {
        let text = "# R-sim\ndataset = r_sim\nn = 20\nk = 5\nmechanisms = rsd, hbs,opop,aceei\nseed = 42\nregret = yes\nout_dir = out\n";
        let cfg = ExperimentConfig::parse(text, Path::new("/tmp")).unwrap();
        assert_eq!(cfg.dataset, DatasetSpec::generator(DatasetKind::RSim, 20, 5, 5));
        assert_eq!(cfg.mechanisms, MechanismKind::ALL.to_vec());
        assert_eq!(cfg.runs, 8);
        assert_eq!(cfg.deviations_per_agent, 25);
        assert_eq!(cfg.seed, 42);
        assert!(cfg.regret);
        assert_eq!(cfg.out_dir, Some(PathBuf::from("/tmp/out")));
    }

    #[test]
    fn rejects_empty_mechanisms_and_unknown_keys() {
        let empty = "dataset = r_sca\nn = 20\nk = 5\nmechanisms =\n";
        assert!(matches!(ExperimentConfig::parse(empty, Path::new(".")), Err(Error::Config(_))));
        let unknown = "dataset = r_sca\nmechanisms = rsd\ncolour = red\n";
        assert!(matches!(ExperimentConfig::parse(unknown, Path::new(".")), Err(Error::Config(_))));
        let no_source = "dataset = rank\nmechanisms = rsd\n";
        assert!(matches!(ExperimentConfig::parse(no_source, Path::new(".")), Err(Error::Config(_))));
    }
}
