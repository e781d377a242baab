//! Random misreports built by swapping values within a preference row.

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};

/// Default success probability of the rank distribution for the first
/// element of each swap.
pub const DEFAULT_SWAP_RANK_P: f64 = 0.5;

#[derive(Clone, Debug, PartialEq)]
pub struct DeviationReport {
    pub agent: usize,
    pub original_row: Vec<f64>,
    pub deviated_row: Vec<f64>,
    /// Exchanged positions, applied in order.
    pub swaps: Vec<(usize, usize)>,
}

fn distinct_off_diagonal(row: &[f64], agent: usize) -> usize {
    let mut values: Vec<f64> = row.iter().enumerate().filter(|&(j, _)| j != agent).map(|(_, &v)| v).collect();
    values.sort_by(f64::total_cmp);
    values.dedup();
    values.len()
}

/// Rank `r` in `1..=m` with probability proportional to `(1-p)^(r-1)`.
fn truncated_geometric<R: Rng + ?Sized>(m: usize, p: f64, rng: &mut R) -> usize {
    let q = 1.0 - p;
    let weights: Vec<f64> = (0..m).map(|r| q.powi(r as i32)).collect();
    let total: f64 = weights.iter().sum();
    let mut u = rng.random_range(0.0..total);
    for (r, w) in weights.iter().enumerate() {
        if u < *w {
            return r + 1;
        }
        u -= w;
    }
    m
}

/// One misreport of `row` (agent `agent`'s row): `1 + Poisson(1)` swaps.
/// Each swap takes the agent at a geometrically drawn preference rank
/// (better ranks likelier) and a uniform partner among the other positions.
pub fn gen_deviation<R: Rng + ?Sized>(row: &[f64], agent: usize, rank_p: f64, rng: &mut R) -> Result<DeviationReport> {
    if distinct_off_diagonal(row, agent) < 2 {
        return Err(Error::CannotDeviate(format!("agent {agent} has fewer than two distinct values")));
    }
    let extra: f64 = Poisson::new(1.0).expect("positive rate").sample(rng);
    let count = 1 + extra as usize;
    let mut deviated = row.to_vec();
    let mut swaps = Vec::with_capacity(count);
    let positions: Vec<usize> = (0..row.len()).filter(|&j| j != agent).collect();
    for _ in 0..count {
        let mut ranked = positions.clone();
        ranked.sort_by(|&a, &b| deviated[b].total_cmp(&deviated[a]).then(a.cmp(&b)));
        let r = truncated_geometric(ranked.len(), rank_p, rng);
        let first = ranked[r - 1];
        let others: Vec<usize> = positions.iter().copied().filter(|&j| j != first).collect();
        let second = others[rng.random_range(0..others.len())];
        deviated.swap(first, second);
        swaps.push((first, second));
    }
    Ok(DeviationReport {
        agent,
        original_row: row.to_vec(),
        deviated_row: deviated,
        swaps,
    })
}

/// Up to `count` misreports distinct from the truth and from each other.
/// Fewer are returned when the row admits fewer distinct permutations
/// within the attempt budget.
pub fn gen_deviations<R: Rng + ?Sized>(
    row: &[f64],
    agent: usize,
    count: usize,
    rank_p: f64,
    rng: &mut R,
) -> Result<Vec<DeviationReport>> {
    let mut out: Vec<DeviationReport> = Vec::with_capacity(count);
    let attempts = 200 * count.max(1);
    for _ in 0..attempts {
        if out.len() == count {
            break;
        }
        let d = gen_deviation(row, agent, rank_p, rng)?;
        let fresh = d.deviated_row != row && out.iter().all(|o| o.deviated_row != d.deviated_row);
        if fresh {
            out.push(d);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sorted(mut v: Vec<f64>) -> Vec<f64> {
        v.sort_by(f64::total_cmp);
        v
    }

    #[test]
    fn preserves_multiset_and_diagonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let row = [3.0, 0.0, 1.0, 4.0, 1.5, 9.0];
        for _ in 0..500 {
            let d = gen_deviation(&row, 1, DEFAULT_SWAP_RANK_P, &mut rng).unwrap();
            assert!(!d.swaps.is_empty());
            assert_eq!(d.deviated_row[1], 0.0);
            assert_eq!(sorted(d.deviated_row.clone()), sorted(row.to_vec()));
            let mut replay = row.to_vec();
            for &(a, b) in &d.swaps {
                replay.swap(a, b);
            }
            assert_eq!(replay, d.deviated_row);
        }
    }

    #[test]
    fn equal_row_cannot_deviate() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        assert!(matches!(
            gen_deviation(&[0.0, 2.0, 2.0, 2.0], 0, 0.5, &mut rng),
            Err(Error::CannotDeviate(_))
        ));
    }

    #[test]
    fn unique_deviations() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let row: Vec<f64> = (0..20).map(|j| j as f64).collect();
        let devs = gen_deviations(&row, 0, 25, 0.5, &mut rng).unwrap();
        assert_eq!(devs.len(), 25);
        for (a, d) in devs.iter().enumerate() {
            assert_ne!(d.deviated_row, row);
            assert!(devs[..a].iter().all(|e| e.deviated_row != d.deviated_row));
        }
        // Three values admit only five distinct misreports.
        let small = gen_deviations(&[0.0, 1.0, 2.0, 3.0], 0, 25, 0.5, &mut rng).unwrap();
        assert_eq!(small.len(), 5);
    }

    #[test]
    fn better_ranks_are_likelier() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut hits = [0usize; 5];
        for _ in 0..20_000 {
            hits[truncated_geometric(5, 0.5, &mut rng) - 1] += 1;
        }
        assert!(hits.windows(2).all(|w| w[0] > w[1]));
        // P(1) = 0.5 / (1 - 0.5^5).
        let p1 = hits[0] as f64 / 20_000.0;
        assert!((p1 - 0.5 / (1.0 - 0.03125)).abs() < 0.02);
    }
}
