//! Exact welfare-maximizing partition.
//!
//! Memoized search over states (assigned agents, unused scheduled sizes).
//! Each step forms the team containing the lowest unassigned agent, so every
//! partition with the scheduled size multiset is reached exactly once.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::metrics::social_welfare;
use crate::model::{choose, size_counts, Game, Partition};

/// Default cap on the estimated number of search transitions.
pub const DEFAULT_TRANSITION_LIMIT: u128 = 300_000_000;

/// Maximum of the raw welfare over partitions whose sizes match the game's
/// size schedule. Ties go to the first optimum in canonical order.
pub fn max_welfare(game: &Game) -> Result<(Partition, f64)> {
    max_welfare_with_limit(game, DEFAULT_TRANSITION_LIMIT)
}

pub fn max_welfare_with_limit(game: &Game, limit: u128) -> Result<(Partition, f64)> {
    let n = game.n();
    let sizes = size_counts(&game.schedule());
    let estimate = transition_estimate(n, &sizes);
    if n > 64 || estimate > limit {
        return Err(Error::CapacityExceeded {
            what: "optimizer transitions",
            count: estimate,
            limit,
        });
    }
    let mut weight = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            weight[i * n + j] = game.utility(i, j) + game.utility(j, i);
        }
    }
    // Ascending sizes; the search tries smaller teams first.
    let mut sizes = sizes;
    sizes.reverse();
    let mut search = Search {
        n,
        weight,
        sizes: sizes.iter().map(|&(s, _)| s).collect(),
        memo: HashMap::new(),
    };
    let counts: Vec<usize> = sizes.iter().map(|&(_, c)| c).collect();
    search.best(0, &counts);

    let mut teams = Vec::new();
    let mut mask = 0u64;
    let mut counts = counts;
    while mask.count_ones() as usize != n {
        let (_, team) = search.memo[&(mask, encode(&counts))];
        let members: Vec<usize> = (0..n).filter(|&a| team >> a & 1 == 1).collect();
        let slot = search.sizes.iter().position(|&s| s == members.len()).expect("scheduled size");
        counts[slot] -= 1;
        mask |= team;
        teams.push(members);
    }
    let partition = Partition::new(teams);
    let value = social_welfare(game, &partition, false)?;
    Ok((partition, value))
}

struct Search {
    n: usize,
    weight: Vec<f64>,
    sizes: Vec<usize>,
    memo: HashMap<(u64, u64), (f64, u64)>,
}

impl Search {
    fn best(&mut self, mask: u64, counts: &[usize]) -> f64 {
        if mask.count_ones() as usize == self.n {
            return 0.0;
        }
        let key = (mask, encode(counts));
        if let Some(&(v, _)) = self.memo.get(&key) {
            return v;
        }
        let first = (0..self.n).find(|&a| mask >> a & 1 == 0).expect("unassigned agent");
        let pool: Vec<usize> = (first + 1..self.n).filter(|&a| mask >> a & 1 == 0).collect();
        let mut best: Option<(f64, u64)> = None;
        let mut next_counts = counts.to_vec();
        for slot in 0..self.sizes.len() {
            if counts[slot] == 0 || self.sizes[slot] - 1 > pool.len() {
                continue;
            }
            next_counts[slot] -= 1;
            let mut options = Vec::new();
            choose(&pool, 0, self.sizes[slot] - 1, &mut vec![first], &mut |team| {
                options.push((team_mask(team), self.team_weight(team)));
            });
            for (team, w) in options {
                let value = w + self.best(mask | team, &next_counts);
                if best.is_none_or(|(b, _)| value > b) {
                    best = Some((value, team));
                }
            }
            next_counts[slot] += 1;
        }
        let (value, team) = best.expect("schedule covers the remaining agents");
        self.memo.insert(key, (value, team));
        value
    }

    fn team_weight(&self, team: &[usize]) -> f64 {
        let mut w = 0.0;
        for (x, &i) in team.iter().enumerate() {
            for &j in &team[x + 1..] {
                w += self.weight[i * self.n + j];
            }
        }
        w
    }
}

fn team_mask(team: &[usize]) -> u64 {
    team.iter().fold(0, |m, &a| m | 1 << a)
}

fn encode(counts: &[usize]) -> u64 {
    counts.iter().fold(0, |code, &c| code << 8 | c as u64)
}

/// Upper estimate of the transitions: for each reachable assigned count `m`,
/// the sets of that size containing agent 0 times the teams the next step
/// may form.
fn transition_estimate(n: usize, sizes: &[(usize, usize)]) -> u128 {
    let mut reachable = vec![false; n + 1];
    let mut stack = vec![(0usize, sizes.iter().map(|&(_, c)| c).collect::<Vec<_>>())];
    let mut seen = std::collections::HashSet::new();
    while let Some((m, counts)) = stack.pop() {
        if !seen.insert((m, counts.clone())) {
            continue;
        }
        reachable[m] = true;
        for (slot, &(s, _)) in sizes.iter().enumerate() {
            if counts[slot] > 0 {
                let mut next = counts.clone();
                next[slot] -= 1;
                stack.push((m + s, next));
            }
        }
    }
    let mut total: u128 = 0;
    for m in (0..n).filter(|&m| reachable[m]) {
        let states = if m == 0 { 1 } else { binom(n - 1, m - 1) };
        let moves: u128 = sizes
            .iter()
            .filter(|&&(s, _)| s <= n - m)
            .map(|&(s, _)| binom(n - m - 1, s - 1))
            .sum();
        total = total.saturating_add(states.saturating_mul(moves));
    }
    total
}

fn binom(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::{for_each_partition, SizeRule};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn cycle_game_ties_return_canonical_first() {
        let (p, v) = max_welfare(&fixtures::cycle4()).unwrap();
        assert_eq!(p.teams(), &[vec![0, 1], vec![2, 3]]);
        assert_eq!(v, 4.0);
    }

    #[test]
    fn zero_game() {
        let g = Game::from_flat(9, vec![0.0; 81], 3, 3).unwrap();
        let (p, v) = max_welfare(&g).unwrap();
        assert_eq!(v, 0.0);
        assert_eq!(p.sizes(), vec![3, 3, 3]);
    }

    #[test]
    fn matches_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [6, 8, 9] {
            for _ in 0..100 {
                let k_min = rng.random_range(2..=4);
                let k_max = rng.random_range(k_min..=k_min + 1);
                let flat: Vec<f64> = (0..n * n).map(|_| rng.random_range(0.0..10.0)).collect();
                let Ok(g) = Game::from_flat(n, flat, k_min, k_max) else {
                    continue;
                };
                let (p, v) = max_welfare(&g).unwrap();
                let mut best = f64::NEG_INFINITY;
                for_each_partition(n, &SizeRule::schedule_of(&g), |teams| {
                    let w = social_welfare(&g, &Partition::new(teams.to_vec()), false).unwrap();
                    best = best.max(w);
                });
                assert!((v - best).abs() < 1e-9, "n={n} {v} vs {best}");
                assert_eq!(p.sizes(), g.schedule());
            }
        }
    }

    #[test]
    fn capacity_guard_trips_at_32() {
        let g = Game::from_flat(32, vec![1.0; 1024], 5, 6).unwrap();
        assert!(matches!(max_welfare(&g), Err(Error::CapacityExceeded { .. })));
    }

    #[test]
    fn estimate_for_twenty_in_fives_is_moderate() {
        assert!(transition_estimate(20, &[(5, 4)]) < 20_000_000);
    }
}
