//! Budget-constrained demand: the best affordable bundle of other agents
//! whose size plus the demanding agent is a legal team size.

use crate::model::Game;

/// Exact demand solver with reusable buffers.
///
/// Candidates are searched in preference order (value descending, then
/// index). Among bundles of equal value the one listed first in that order
/// wins, comparing member lists lexicographically with a prefix first.
#[derive(Default)]
pub struct DemandSolver {
    items: Vec<Item>,
    prefix: Vec<f64>,
    allowed: Vec<bool>,
    chosen: Vec<usize>,
    best: Vec<usize>,
    best_value: f64,
    found: bool,
    max_count: usize,
    budget: f64,
}

#[derive(Clone, Copy)]
struct Item {
    agent: usize,
    value: f64,
    price: f64,
}

impl DemandSolver {
    pub fn new() -> Self {
        Self::default()
    }

    /// Demand of `i` among `remaining`, with `prices` aligned to
    /// `remaining`. Returns `None` when no legal bundle is affordable;
    /// otherwise the bundle sorted by agent index.
    pub fn solve(
        &mut self,
        game: &Game,
        i: usize,
        remaining: &[usize],
        prices: &[f64],
        budget: f64,
        legal_sizes: &[usize],
    ) -> Option<Vec<usize>> {
        debug_assert_eq!(remaining.len(), prices.len());
        let row = game.row(i);
        self.items.clear();
        self.items.extend(
            remaining
                .iter()
                .zip(prices)
                .filter(|(&j, _)| j != i)
                .map(|(&j, &price)| Item { agent: j, value: row[j], price }),
        );
        self.items
            .sort_by(|a, b| b.value.total_cmp(&a.value).then(a.agent.cmp(&b.agent)));

        self.allowed.clear();
        self.allowed.resize(self.items.len() + 1, false);
        self.max_count = 0;
        for &s in legal_sizes {
            if s >= 1 && s - 1 <= self.items.len() {
                self.allowed[s - 1] = true;
                self.max_count = self.max_count.max(s - 1);
            }
        }
        self.prefix.clear();
        self.prefix.push(0.0);
        for p in 0..self.items.len() {
            let next = self.prefix[p] + self.items[p].value;
            self.prefix.push(next);
        }

        self.budget = budget;
        self.found = false;
        self.best_value = f64::NEG_INFINITY;
        self.best.clear();
        self.chosen.clear();
        self.search(0, 0.0, 0.0);
        if !self.found {
            return None;
        }
        let mut bundle: Vec<usize> = self.best.iter().map(|&p| self.items[p].agent).collect();
        bundle.sort_unstable();
        Some(bundle)
    }

    fn search(&mut self, pos: usize, value: f64, cost: f64) {
        let count = self.chosen.len();
        if self.allowed[count] && (!self.found || value > self.best_value) {
            self.found = true;
            self.best_value = value;
            self.best.clone_from(&self.chosen);
        }
        if count == self.max_count || pos == self.items.len() {
            return;
        }
        // Best completion ignoring the budget: the next highest values.
        let end = (pos + self.max_count - count).min(self.items.len());
        let bound = value + (self.prefix[end] - self.prefix[pos]);
        if self.found && bound <= self.best_value {
            return;
        }
        let item = self.items[pos];
        if cost + item.price <= self.budget {
            self.chosen.push(pos);
            self.search(pos + 1, value + item.value, cost + item.price);
            self.chosen.pop();
        }
        self.search(pos + 1, value, cost);
    }
}

/// Demand as a plain set: empty when nothing legal is affordable.
pub fn demand(
    game: &Game,
    i: usize,
    remaining: &[usize],
    prices: &[f64],
    budget: f64,
    legal_sizes: &[usize],
) -> Vec<usize> {
    DemandSolver::new()
        .solve(game, i, remaining, prices, budget, legal_sizes)
        .unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Exhaustive oracle with the same tie rule, stated directly.
    fn brute(game: &Game, i: usize, remaining: &[usize], prices: &[f64], budget: f64, legal: &[usize]) -> Option<Vec<usize>> {
        let row = game.row(i);
        let mut cands: Vec<(usize, f64)> = remaining
            .iter()
            .zip(prices)
            .filter(|(&j, _)| j != i)
            .map(|(&j, &p)| (j, p))
            .collect();
        cands.sort_by(|a, b| row[b.0].total_cmp(&row[a.0]).then(a.0.cmp(&b.0)));
        let m = cands.len();
        let mut best: Option<(f64, Vec<usize>)> = None;
        for mask in 0u32..(1 << m) {
            let size = mask.count_ones() as usize + 1;
            if !legal.contains(&size) {
                continue;
            }
            let picked: Vec<usize> = (0..m).filter(|&b| mask >> b & 1 == 1).collect();
            let cost: f64 = picked.iter().map(|&b| cands[b].1).sum();
            if cost > budget {
                continue;
            }
            let value: f64 = picked.iter().map(|&b| row[cands[b].0]).sum();
            let better = match &best {
                None => true,
                Some((bv, bp)) => value > *bv || (value == *bv && picked < *bp),
            };
            if better {
                best = Some((value, picked));
            }
        }
        best.map(|(_, picked)| {
            let mut agents: Vec<usize> = picked.iter().map(|&b| cands[b].0).collect();
            agents.sort_unstable();
            agents
        })
    }

    #[test]
    fn zero_prices_give_top_agents() {
        let g = fixtures::envy_table();
        let all: Vec<usize> = (0..6).collect();
        assert_eq!(demand(&g, 0, &all, &[0.0; 6], 1.0, &[3]), vec![4, 5]);
        // Ties among B, C, D, E for agent F at value 0..4 resolve by index.
        let flat = Game::from_flat(6, vec![1.0; 36], 3, 3).unwrap();
        assert_eq!(demand(&flat, 3, &all, &[0.0; 6], 1.0, &[3]), vec![0, 1]);
    }

    #[test]
    fn cycle_game_demands_value_two_neighbor() {
        let g = fixtures::cycle4();
        let all: Vec<usize> = (0..4).collect();
        for i in 0..4 {
            assert_eq!(demand(&g, i, &all, &[0.9; 4], 1.0, &[2]), vec![(i + 1) % 4]);
        }
    }

    #[test]
    fn unaffordable_is_empty() {
        let g = fixtures::envy_table();
        let all: Vec<usize> = (0..6).collect();
        assert!(demand(&g, 0, &all, &[1.5; 6], 1.0, &[3]).is_empty());
        assert_eq!(DemandSolver::new().solve(&g, 0, &all, &[1.5; 6], 1.0, &[3]), None);
    }

    #[test]
    fn matches_enumeration_up_to_12() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut solver = DemandSolver::new();
        for case in 0..3000 {
            let n = rng.random_range(3..=12);
            // Small integer values make ties common.
            let flat: Vec<f64> = (0..n * n).map(|_| rng.random_range(0..5) as f64).collect();
            let k_min = rng.random_range(1..=n.min(4));
            let k_max = rng.random_range(k_min..=n.min(6));
            let Ok(g) = Game::from_flat(n, flat, k_min, k_max) else {
                continue;
            };
            let remaining: Vec<usize> = (0..n).filter(|_| rng.random_bool(0.85)).collect();
            if remaining.len() < 2 {
                continue;
            }
            let i = remaining[rng.random_range(0..remaining.len())];
            let prices: Vec<f64> = remaining.iter().map(|_| rng.random_range(0.0..0.6)).collect();
            let budget = rng.random_range(0.5..1.5);
            let legal: Vec<usize> = (k_min..=k_max).filter(|_| rng.random_bool(0.7)).collect();
            let got = solver.solve(&g, i, &remaining, &prices, budget, &legal);
            let want = brute(&g, i, &remaining, &prices, budget, &legal);
            assert_eq!(got, want, "case {case}: n={n} i={i} legal={legal:?}");
        }
    }
}
