//! Empirical regret of truthful reporting.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mechanisms::Mechanism;
use crate::model::{Game, Partition, SerialOrder};

use super::deviation::{gen_deviations, DEFAULT_SWAP_RANK_P};
use super::seed::{derive_seed, rng_for, DEVIATION, MECHANISM, ORDER};
use super::stats::MeanCi;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegretConfig {
    pub runs: usize,
    pub deviations_per_agent: usize,
    pub swap_rank_p: f64,
    pub seed: u64,
}

impl Default for RegretConfig {
    fn default() -> Self {
        Self {
            runs: 8,
            deviations_per_agent: 25,
            swap_rank_p: DEFAULT_SWAP_RANK_P,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegretEstimate {
    /// Per run: the largest normalized gain over agents and misreports,
    /// floored at 0.
    pub per_run: Vec<f64>,
    pub summary: MeanCi,
    /// Largest gain seen before flooring.
    pub max_raw_gain: f64,
    pub evaluations: usize,
}

/// Order used for run `run`; shared by every mechanism and dataset.
pub fn run_order(n: usize, seed: u64, run: usize) -> SerialOrder {
    SerialOrder::random(n, &mut rng_for(seed, &[ORDER, run as u64]))
}

/// Internal seed of `mechanism` for run `run`.
pub fn mechanism_seed(seed: u64, run: usize, mechanism: &Mechanism) -> u64 {
    derive_seed(seed, &[MECHANISM, run as u64, mechanism.kind as u64])
}

fn own_value(row: &[f64], p: &Partition, agent: usize) -> f64 {
    p.team_of(agent)
        .map(|team| team.iter().filter(|&&j| j != agent).map(|&j| row[j]).sum())
        .unwrap_or(0.0)
}

/// Gain of `agent` (on its true row, over its true row total) from reporting
/// `report` instead of the truth, all else fixed.
pub fn deviation_gain(
    game: &Game,
    mechanism: &Mechanism,
    order: &SerialOrder,
    mech_seed: u64,
    truthful: &Partition,
    agent: usize,
    report: &[f64],
) -> Result<f64> {
    let total = game.row_total(agent);
    if total <= 0.0 {
        return Ok(0.0);
    }
    let reported = game.with_row(agent, report)?;
    let deviated = mechanism.run(&reported, order, mech_seed)?;
    let row = game.row(agent);
    Ok((own_value(row, &deviated, agent) - own_value(row, truthful, agent)) / total)
}

/// Mean over runs of the maximum gain any single agent obtains from one of
/// its generated misreports.
pub fn regret_estimate(game: &Game, mechanism: &Mechanism, config: &RegretConfig) -> Result<RegretEstimate> {
    if config.runs == 0 {
        return Err(Error::Config("runs must be positive".into()));
    }
    let n = game.n();
    let mut per_run = Vec::with_capacity(config.runs);
    let mut max_raw_gain = f64::NEG_INFINITY;
    let mut evaluations = 0;
    for run in 0..config.runs {
        let order = run_order(n, config.seed, run);
        let mech_seed = mechanism_seed(config.seed, run, mechanism);
        let truthful = mechanism.run(game, &order, mech_seed)?;
        let mut jobs = Vec::new();
        for agent in 0..n {
            let mut rng = rng_for(config.seed, &[DEVIATION, run as u64, agent as u64]);
            match gen_deviations(game.row(agent), agent, config.deviations_per_agent, config.swap_rank_p, &mut rng) {
                Ok(devs) => jobs.extend(devs.into_iter().map(|d| (agent, d.deviated_row))),
                Err(Error::CannotDeviate(_)) => {}
                Err(e) => return Err(e),
            }
        }
        let gains: Vec<f64> = jobs
            .par_iter()
            .map(|(agent, row)| deviation_gain(game, mechanism, &order, mech_seed, &truthful, *agent, row))
            .collect::<Result<_>>()?;
        evaluations += gains.len();
        let best = gains.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        max_raw_gain = max_raw_gain.max(best);
        per_run.push(best.max(0.0));
    }
    Ok(RegretEstimate {
        summary: MeanCi::from_samples(&per_run),
        per_run,
        max_raw_gain,
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::mechanisms::MechanismKind;

    #[test]
    fn planted_misreport_gain_on_serpentine_draft() {
        let g = fixtures::incentive_truth();
        let hbs = Mechanism::new(MechanismKind::Hbs);
        let order = SerialOrder::new(vec![0, 3, 1, 2, 4, 5]).unwrap();
        let truthful = hbs.run(&g, &order, 0).unwrap();
        let gain = deviation_gain(&g, &hbs, &order, 0, &truthful, 0, &fixtures::incentive_report()).unwrap();
        let total = g.row_total(0);
        assert!((gain - (9.9 - 5.2) / total).abs() < 1e-12);
    }

    #[test]
    fn gains_use_the_true_row() {
        let g = fixtures::incentive_truth();
        let hbs = Mechanism::new(MechanismKind::Hbs);
        let order = SerialOrder::new(vec![0, 3, 1, 2, 4, 5]).unwrap();
        let truthful = hbs.run(&g, &order, 0).unwrap();
        let report = fixtures::incentive_report();
        let deviated = hbs.run(&g.with_row(0, &report).unwrap(), &order, 0).unwrap();
        assert_ne!(deviated, truthful);
        let true_gain = own_value(g.row(0), &deviated, 0) - own_value(g.row(0), &truthful, 0);
        let reported_gain = own_value(&report, &deviated, 0) - own_value(&report, &truthful, 0);
        assert_ne!(true_gain, reported_gain);
        let gain = deviation_gain(&g, &hbs, &order, 0, &truthful, 0, &report).unwrap();
        assert_eq!(gain, true_gain / g.row_total(0));
    }

    #[test]
    fn estimate_is_reproducible() {
        let g = fixtures::incentive_truth();
        let cfg = RegretConfig {
            runs: 3,
            deviations_per_agent: 5,
            seed: 4,
            ..RegretConfig::default()
        };
        let hbs = Mechanism::new(MechanismKind::Hbs);
        let a = regret_estimate(&g, &hbs, &cfg).unwrap();
        let b = regret_estimate(&g, &hbs, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.per_run.len(), 3);
        assert!(a.per_run.iter().all(|&r| r >= 0.0));
    }
}
