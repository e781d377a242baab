//! Experiment orchestration and CSV reporting.

use std::fmt::{self, Write as _};
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mechanisms::MechanismKind;
use crate::metrics::{cosine_similarity, MetricsReport};
use crate::model::{Game, Partition};
use crate::optimizer::max_welfare;

use super::config::ExperimentConfig;
use super::regret::{mechanism_seed, regret_estimate, run_order, RegretConfig, RegretEstimate};
use super::seed::{rng_for, INSTANCE};
use super::stats::{spearman, MeanCi};

#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub mechanism: MechanismKind,
    pub instance: usize,
    pub run: usize,
    pub partition: Partition,
    pub metrics: MetricsReport,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Optimum {
    /// Normalized welfare of the optimal partition, divided by `n`.
    Value(f64),
    CapacityExceeded,
    Skipped,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegretRecord {
    pub mechanism: MechanismKind,
    pub instance: usize,
    pub estimate: RegretEstimate,
}

#[derive(Clone, Debug)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub instances: Vec<Game>,
    pub similarity: Vec<f64>,
    pub zero_similarity_pairs: usize,
    pub runs: Vec<RunRecord>,
    pub optimum: Vec<Optimum>,
    pub regret: Vec<RegretRecord>,
}

/// Builds the instances of a config; generated instances use independent
/// seeded streams.
pub fn build_instances(config: &ExperimentConfig) -> Result<Vec<Game>> {
    (0..config.instance_count())
        .map(|idx| config.dataset.instance(&mut rng_for(config.seed, &[INSTANCE, idx as u64])))
        .collect()
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let instances = build_instances(config)?;
    run_on_instances(config, instances)
}

/// Runs a config on given instances (which must share the config's bounds).
pub fn run_on_instances(config: &ExperimentConfig, instances: Vec<Game>) -> Result<ExperimentReport> {
    config.validate()?;
    let mut jobs = Vec::new();
    for instance in 0..instances.len() {
        for run in 0..config.runs {
            for &kind in &config.mechanisms {
                jobs.push((instance, run, kind));
            }
        }
    }
    let runs: Vec<RunRecord> = jobs
        .par_iter()
        .map(|&(instance, run, kind)| {
            let game = &instances[instance];
            let mechanism = config.mechanism(kind);
            let order = run_order(game.n(), config.seed, run);
            let partition = mechanism.run(game, &order, mechanism_seed(config.seed, run, &mechanism))?;
            let metrics = MetricsReport::compute(game, &partition, &order, config.maximin)?;
            Ok(RunRecord {
                mechanism: kind,
                instance,
                run,
                partition,
                metrics,
            })
        })
        .collect::<Result<_>>()?;

    let optimum = instances
        .par_iter()
        .map(|game| {
            if !config.optimize {
                return Ok(Optimum::Skipped);
            }
            let (normalized, _) = game.normalize_lenient();
            match max_welfare(&normalized) {
                Ok((_, value)) => Ok(Optimum::Value(value / game.n() as f64)),
                Err(Error::CapacityExceeded { .. }) => Ok(Optimum::CapacityExceeded),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_>>()?;

    let similarities: Vec<_> = instances.iter().map(cosine_similarity).collect();
    let zero_similarity_pairs = similarities.iter().map(|s| s.zero_pairs.len()).sum();

    let mut regret = Vec::new();
    if config.regret {
        let rc = RegretConfig {
            runs: config.runs,
            deviations_per_agent: config.deviations_per_agent,
            swap_rank_p: config.swap_rank_p,
            seed: config.seed,
        };
        for &kind in &config.mechanisms {
            for (instance, game) in instances.iter().enumerate().take(config.regret_instances) {
                let estimate = regret_estimate(game, &config.mechanism(kind), &rc)?;
                regret.push(RegretRecord {
                    mechanism: kind,
                    instance,
                    estimate,
                });
            }
        }
    }

    Ok(ExperimentReport {
        config: config.clone(),
        similarity: similarities.iter().map(|s| s.mean).collect(),
        zero_similarity_pairs,
        instances,
        runs,
        optimum,
        regret,
    })
}

fn fmt_ci(ci: &MeanCi) -> String {
    format!("{},{},{}", ci.mean, ci.half_width, ci.count)
}

impl ExperimentReport {
    fn records(&self, kind: MechanismKind) -> impl Iterator<Item = &RunRecord> {
        self.runs.iter().filter(move |r| r.mechanism == kind)
    }

    fn summarize(&self, kind: MechanismKind, f: impl Fn(&MetricsReport) -> f64) -> MeanCi {
        let samples: Vec<f64> = self.records(kind).map(|r| f(&r.metrics)).collect();
        MeanCi::from_samples(&samples)
    }

    pub fn welfare(&self, kind: MechanismKind) -> MeanCi {
        self.summarize(kind, |m| m.social_welfare)
    }

    pub fn bounded_envy(&self, kind: MechanismKind) -> MeanCi {
        self.summarize(kind, |m| m.bounded_envy_fraction)
    }

    pub fn envy_free(&self, kind: MechanismKind) -> MeanCi {
        self.summarize(kind, |m| m.envy_free_fraction)
    }

    pub fn proportional(&self, kind: MechanismKind) -> MeanCi {
        self.summarize(kind, |m| m.proportional_fraction)
    }

    /// `None` when any instance could not be optimized.
    pub fn max_welfare(&self) -> Option<MeanCi> {
        let values: Option<Vec<f64>> = self
            .optimum
            .iter()
            .map(|o| match o {
                Optimum::Value(v) => Some(*v),
                _ => None,
            })
            .collect();
        values.map(|v| MeanCi::from_samples(&v))
    }

    pub fn similarity(&self) -> MeanCi {
        MeanCi::from_samples(&self.similarity)
    }

    /// Per-run regret maxima pooled over the regret instances.
    pub fn regret(&self, kind: MechanismKind) -> Option<MeanCi> {
        let samples: Vec<f64> = self
            .regret
            .iter()
            .filter(|r| r.mechanism == kind)
            .flat_map(|r| r.estimate.per_run.iter().copied())
            .collect();
        (!samples.is_empty()).then(|| MeanCi::from_samples(&samples))
    }

    /// Spearman correlation of serial index and utility fraction over all
    /// per-agent records of a mechanism.
    pub fn serial_index_correlation(&self, kind: MechanismKind) -> f64 {
        let (x, y): (Vec<f64>, Vec<f64>) = self
            .records(kind)
            .flat_map(|r| r.metrics.per_agent.iter())
            .map(|a| (a.serial_index as f64, a.utility_fraction))
            .unzip();
        spearman(&x, &y)
    }

    /// Mean utility fraction at each serial index, pooled over instances
    /// and runs.
    pub fn serial_curve(&self, kind: MechanismKind) -> Vec<MeanCi> {
        let mut by_index: Vec<Vec<f64>> = Vec::new();
        for a in self.records(kind).flat_map(|r| r.metrics.per_agent.iter()) {
            if by_index.len() <= a.serial_index {
                by_index.resize_with(a.serial_index + 1, Vec::new);
            }
            by_index[a.serial_index].push(a.utility_fraction);
        }
        by_index.iter().map(|v| MeanCi::from_samples(v)).collect()
    }

    /// Spearman correlation of serial index and the mean of [`Self::serial_curve`].
    pub fn serial_curve_correlation(&self, kind: MechanismKind) -> f64 {
        let (x, y): (Vec<f64>, Vec<f64>) = self
            .serial_curve(kind)
            .iter()
            .enumerate()
            .map(|(i, ci)| (i as f64, ci.mean))
            .unzip();
        spearman(&x, &y)
    }

    pub fn serial_curve_csv(&self) -> String {
        let mut out = String::from("mechanism,serial_index,mean_utility_fraction,ci_half_width,count\n");
        for &kind in &self.config.mechanisms {
            for (i, ci) in self.serial_curve(kind).iter().enumerate() {
                let _ = writeln!(out, "{kind},{i},{}", fmt_ci(ci));
            }
        }
        out
    }

    pub fn welfare_csv(&self) -> String {
        let mut out = String::from("mechanism,mean,ci_half_width,count\n");
        for &kind in &self.config.mechanisms {
            let _ = writeln!(out, "{kind},{}", fmt_ci(&self.welfare(kind)));
        }
        match (self.max_welfare(), self.optimum.first()) {
            (Some(ci), _) => {
                let _ = writeln!(out, "max_welfare,{}", fmt_ci(&ci));
            }
            (None, Some(Optimum::Skipped)) | (None, None) => {}
            (None, _) => out.push_str("max_welfare,n/a,n/a,n/a\n"),
        }
        out
    }

    pub fn envy_csv(&self) -> String {
        let mut out = String::from(
            "mechanism,bounded_envy_mean,bounded_envy_ci_half_width,envy_free_mean,proportional_mean,count\n",
        );
        for &kind in &self.config.mechanisms {
            let b = self.bounded_envy(kind);
            let _ = writeln!(
                out,
                "{kind},{},{},{},{},{}",
                b.mean,
                b.half_width,
                self.envy_free(kind).mean,
                self.proportional(kind).mean,
                b.count
            );
        }
        out
    }

    pub fn regret_csv(&self) -> String {
        let mut out = String::from("mechanism,mean,ci_half_width,count,max_raw_gain\n");
        for &kind in &self.config.mechanisms {
            if let Some(ci) = self.regret(kind) {
                let max_raw = self
                    .regret
                    .iter()
                    .filter(|r| r.mechanism == kind)
                    .map(|r| r.estimate.max_raw_gain)
                    .fold(f64::NEG_INFINITY, f64::max);
                let _ = writeln!(out, "{kind},{},{max_raw}", fmt_ci(&ci));
            }
        }
        out
    }

    pub fn serial_index_csv(&self) -> String {
        let mut out = String::from("mechanism,instance,run,agent,serial_index,utility_fraction\n");
        for r in &self.runs {
            for a in &r.metrics.per_agent {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    r.mechanism, r.instance, r.run, a.agent, a.serial_index, a.utility_fraction
                );
            }
        }
        out
    }

    pub fn popularity_csv(&self) -> String {
        let mut out =
            String::from("mechanism,instance,run,agent,mean_rank_received,mean_teammate_rank,utility_fraction\n");
        for r in &self.runs {
            for a in &r.metrics.per_agent {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    r.mechanism, r.instance, r.run, a.agent, a.mean_rank_received, a.mean_teammate_rank, a.utility_fraction
                );
            }
        }
        out
    }

    pub fn similarity_csv(&self) -> String {
        let d = &self.config.dataset;
        let s = self.similarity();
        format!(
            "dataset,similarity,ci_half_width,n,k_min,k_max,instances,zero_pairs\n{},{},{},{},{},{},{},{}\n",
            d.kind.name(),
            s.mean,
            s.half_width,
            self.instances.first().map_or(d.n, Game::n),
            self.instances.first().map_or(d.k_min, Game::k_min),
            self.instances.first().map_or(d.k_max, Game::k_max),
            s.count,
            self.zero_similarity_pairs
        )
    }

    pub fn runs_csv(&self) -> String {
        let mut out = format!("mechanism,instance,run,{}\n", MetricsReport::CSV_HEADER);
        for r in &self.runs {
            let _ = writeln!(out, "{},{},{},{}", r.mechanism, r.instance, r.run, r.metrics.csv_row());
        }
        out
    }

    /// Writes every table into `dir`; the regret table only when regret
    /// was estimated.
    pub fn write_csv(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("welfare.csv"), self.welfare_csv())?;
        fs::write(dir.join("envy.csv"), self.envy_csv())?;
        if !self.regret.is_empty() {
            fs::write(dir.join("regret.csv"), self.regret_csv())?;
        }
        fs::write(dir.join("serial_index.csv"), self.serial_index_csv())?;
        fs::write(dir.join("serial_curve.csv"), self.serial_curve_csv())?;
        fs::write(dir.join("popularity.csv"), self.popularity_csv())?;
        fs::write(dir.join("similarity.csv"), self.similarity_csv())?;
        fs::write(dir.join("runs.csv"), self.runs_csv())?;
        Ok(())
    }
}

impl fmt::Display for ExperimentReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pm = |ci: &MeanCi| format!("{:.3} ± {:.3}", ci.mean, ci.half_width);
        let d = &self.config.dataset;
        writeln!(
            f,
            "dataset {} ({} instances, {} runs)",
            d.kind.name(),
            self.instances.len(),
            self.config.runs
        )?;
        writeln!(f, "similarity {}", pm(&self.similarity()))?;
        for &kind in &self.config.mechanisms {
            write!(
                f,
                "{kind:>6}: welfare {}  bounded envy {}",
                pm(&self.welfare(kind)),
                pm(&self.bounded_envy(kind))
            )?;
            if let Some(r) = self.regret(kind) {
                write!(f, "  regret {}", pm(&r))?;
            }
            writeln!(f)?;
        }
        match self.max_welfare() {
            Some(ci) => writeln!(f, "max welfare {}", pm(&ci)),
            None if self.optimum.contains(&Optimum::CapacityExceeded) => writeln!(f, "max welfare n/a"),
            None => Ok(()),
        }
    }
}
