//! Approximate competitive equilibrium from near-equal incomes for team
//! formation (A-CEEI-TF).
//!
//! Each agent gets a budget in `[1, b̄)`; agents are priced, and at each
//! round a tabu search looks for prices that nearly clear the market among
//! the unassigned agents before the next agent in order takes its demanded
//! bundle.

mod demand;
mod market;
mod search;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use demand::{demand, DemandSolver};
pub use market::{clearing_error, demand_profile, excess, price_update, truncate, DemandProfile, PriceState};
pub use search::{relaxed_error, Evaluated, SearchContext};

use crate::error::Result;
use crate::mechanisms::check_order;
use crate::model::{size_counts, Game, Partition, SerialOrder};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AceeiParams {
    pub epsilon: f64,
    pub tabu_iters: usize,
}

impl Default for AceeiParams {
    fn default() -> Self {
        Self {
            epsilon: 0.01,
            tabu_iters: 20,
        }
    }
}

/// Upper budget bound `b̄ = 1 + 1/(2n)`.
pub fn budget_cap(n: usize) -> f64 {
    1.0 + 1.0 / (2.0 * n as f64)
}

/// Distinct budgets drawn uniformly from `[1, b̄)`.
pub fn assign_budgets<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let cap = budget_cap(n);
    let mut budgets: Vec<f64> = Vec::with_capacity(n);
    while budgets.len() < n {
        let b = rng.random_range(1.0..cap);
        if !budgets.contains(&b) {
            budgets.push(b);
        }
    }
    budgets
}

/// Distinct team sizes still present in a size schedule, ascending.
pub fn legal_sizes(schedule: &[usize]) -> Vec<usize> {
    let mut sizes: Vec<usize> = size_counts(schedule).into_iter().map(|(s, _)| s).collect();
    sizes.sort_unstable();
    sizes
}

/// Starting price of every agent: the smallest budget spread over the most
/// teammates any agent may demand.
pub fn initial_price(budgets: &[f64], k_max: usize) -> f64 {
    min_budget(budgets) / (k_max.max(2) - 1) as f64
}

/// Price scale `σ` for the search steps: one hundredth of the smallest
/// budget, so steps are relative to a budget of 100.
pub fn price_scale(budgets: &[f64]) -> f64 {
    min_budget(budgets) / 100.0
}

fn min_budget(budgets: &[f64]) -> f64 {
    budgets.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Tabu search for prices over `remaining`, starting from `start` (aligned
/// with `remaining`). Returns the best state visited.
#[allow(clippy::too_many_arguments)]
pub fn price_search(
    game: &Game,
    remaining: &[usize],
    budgets: &[f64],
    legal_sizes: &[usize],
    start: Vec<f64>,
    params: &AceeiParams,
) -> Evaluated {
    let ctx = SearchContext {
        game,
        remaining,
        budgets,
        legal_sizes,
        epsilon: params.epsilon,
        cap: budget_cap(game.n()),
        scale: price_scale(budgets),
        iterations: params.tabu_iters,
    };
    ctx.search(start)
}

/// Full mechanism. Budgets are drawn from `seed`.
pub fn aceei_tf(game: &Game, order: &SerialOrder, seed: u64, params: &AceeiParams) -> Result<Partition> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let budgets = assign_budgets(game.n(), &mut rng);
    aceei_tf_with_budgets(game, order, &budgets, params)
}

pub fn aceei_tf_with_budgets(
    game: &Game,
    order: &SerialOrder,
    budgets: &[f64],
    params: &AceeiParams,
) -> Result<Partition> {
    check_order(game, order)?;
    let n = game.n();
    let mut schedule = game.schedule();
    let mut prices = vec![initial_price(budgets, game.k_max()); n];
    let mut assigned = vec![false; n];
    let mut teams = Vec::with_capacity(schedule.len());
    let mut solver = DemandSolver::new();

    for &agent in order.agents() {
        if assigned[agent] {
            continue;
        }
        let remaining: Vec<usize> = (0..n).filter(|&j| !assigned[j]).collect();
        let bundle = if schedule.len() == 1 {
            remaining.iter().copied().filter(|&j| j != agent).collect()
        } else {
            let legal = legal_sizes(&schedule);
            let start = remaining.iter().map(|&j| prices[j]).collect();
            let found = price_search(game, &remaining, budgets, &legal, start, params);
            for (&j, &p) in remaining.iter().zip(&found.prices) {
                prices[j] = p;
            }
            match solver.solve(game, agent, &remaining, &found.prices, budgets[agent], &legal) {
                Some(b) => b,
                None => {
                    let free = vec![0.0; remaining.len()];
                    solver
                        .solve(game, agent, &remaining, &free, f64::INFINITY, &legal)
                        .expect("a legal size always fits the remaining agents")
                }
            }
        };
        let size = bundle.len() + 1;
        let slot = schedule.iter().position(|&s| s == size).expect("bundle has a scheduled size");
        schedule.remove(slot);
        assigned[agent] = true;
        for &j in &bundle {
            assigned[j] = true;
        }
        let mut team = bundle;
        team.push(agent);
        teams.push(team);
    }
    Ok(Partition::new(teams))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::validate_partition;

    #[test]
    fn budgets_in_range_and_distinct() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let b = assign_budgets(20, &mut rng);
        assert!(b.iter().all(|&x| (1.0..1.025).contains(&x)));
        let mut sorted = b.clone();
        sorted.sort_by(f64::total_cmp);
        sorted.dedup();
        assert_eq!(sorted.len(), 20);
        let again = assign_budgets(20, &mut ChaCha8Rng::seed_from_u64(3));
        assert_eq!(b, again);
        for n in 2..40 {
            let b = assign_budgets(n, &mut rng);
            let max = b.iter().copied().fold(0.0, f64::max);
            assert!(max / min_budget(&b) < 1.0 + 1.0 / n as f64);
        }
    }

    #[test]
    fn legal_sizes_from_schedule() {
        assert_eq!(legal_sizes(&[5, 4, 4, 4]), vec![4, 5]);
        assert_eq!(legal_sizes(&[3, 3]), vec![3]);
    }

    #[test]
    fn grand_coalition() {
        let g = fixtures::envy_table().with_bounds(6, 6).unwrap();
        let p = aceei_tf(&g, &SerialOrder::identity(6), 1, &AceeiParams::default()).unwrap();
        assert_eq!(p.teams(), &[vec![0, 1, 2, 3, 4, 5]]);
    }

    #[test]
    fn cycle_game_always_pairs() {
        let g = fixtures::cycle4();
        for seed in 0..100 {
            let order = SerialOrder::random(4, &mut ChaCha8Rng::seed_from_u64(seed + 1000));
            let p = aceei_tf(&g, &order, seed, &AceeiParams::default()).unwrap();
            assert!(validate_partition(&g, &p));
            assert_eq!(p.sizes(), vec![2, 2]);
        }
    }

    #[test]
    fn deterministic() {
        let g = fixtures::opop_inefficient();
        let order = SerialOrder::new(vec![3, 1, 4, 0, 5, 2]).unwrap();
        let a = aceei_tf(&g, &order, 9, &AceeiParams::default()).unwrap();
        let b = aceei_tf(&g, &order, 9, &AceeiParams::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn search_keeps_zero_error_start() {
        // Mutual favorites at zero prices clear the market.
        let g = Game::new(
            vec![
                vec![0.0, 3.0, 1.0, 0.0],
                vec![3.0, 0.0, 0.0, 1.0],
                vec![1.0, 0.0, 0.0, 3.0],
                vec![0.0, 1.0, 3.0, 0.0],
            ],
            2,
            2,
        )
        .unwrap();
        let budgets = [1.0, 1.05, 1.1, 1.12];
        let remaining = [0, 1, 2, 3];
        let start = vec![0.0, 0.2, 0.4, 0.6];
        let found = price_search(&g, &remaining, &budgets, &[2], start.clone(), &AceeiParams::default());
        assert_eq!(found.error, 0.0);
        assert_eq!(found.prices, start);
    }

    #[test]
    fn search_two_agents_converges() {
        let g = Game::new(vec![vec![0.0, 1.0], vec![2.0, 0.0]], 2, 2).unwrap();
        let budgets = [1.0, 1.1];
        // Both unaffordable at the start; the search must lower prices.
        let found = price_search(&g, &[0, 1], &budgets, &[2], vec![1.2, 1.2], &AceeiParams::default());
        assert_eq!(found.error, 0.0);
    }

    #[test]
    fn search_never_worse_than_start() {
        let g = fixtures::opop_inefficient();
        let budgets = assign_budgets(6, &mut ChaCha8Rng::seed_from_u64(5));
        let remaining: Vec<usize> = (0..6).collect();
        let params = AceeiParams::default();
        let ctx = SearchContext {
            game: &g,
            remaining: &remaining,
            budgets: &budgets,
            legal_sizes: &[3],
            epsilon: params.epsilon,
            cap: budget_cap(6),
            scale: price_scale(&budgets),
            iterations: params.tabu_iters,
        };
        for start in [vec![0.5; 6], vec![0.0; 6], vec![1.0; 6]] {
            let initial = ctx.evaluate(start.clone(), &mut DemandSolver::new()).error;
            assert!(ctx.search(start).error <= initial);
        }
    }
}
