//! Tabu search over price vectors minimizing the relaxed clearing error.

use std::collections::HashSet;

use crate::model::Game;

use super::demand::DemandSolver;
use super::market::{excess, truncate, DemandProfile};

/// Gradient step multipliers of the price scale.
const GRADIENT_STEPS: [f64; 5] = [10.0, 5.0, 1.0, 0.5, 0.1];
/// Unilateral raise multipliers of the price scale.
const RAISE_STEPS: [f64; 5] = [1.0, 0.5, 0.1, 0.05, 0.001];

/// Inputs shared by every evaluation within one search.
pub struct SearchContext<'a> {
    pub game: &'a Game,
    pub remaining: &'a [usize],
    /// Indexed by agent.
    pub budgets: &'a [f64],
    pub legal_sizes: &'a [usize],
    pub epsilon: f64,
    pub cap: f64,
    /// Price scale factor `σ`.
    pub scale: f64,
    pub iterations: usize,
}

#[derive(Clone, Debug)]
pub struct Evaluated {
    pub prices: Vec<f64>,
    pub profile: DemandProfile,
    pub z: Vec<f64>,
    /// [`relaxed_error`] of `z`.
    pub error: f64,
}

/// Which coordinate a neighbor changed relative to the incumbent.
#[derive(Clone, Copy)]
enum Change {
    Many,
    Raised(usize),
}

impl SearchContext<'_> {
    pub fn evaluate(&self, prices: Vec<f64>, solver: &mut DemandSolver) -> Evaluated {
        let demands = self
            .remaining
            .iter()
            .map(|&i| solver.solve(self.game, i, self.remaining, &prices, self.budgets[i], self.legal_sizes))
            .collect();
        self.finish(prices, demands)
    }

    /// Raising the price of a coordinate only affects agents demanding it.
    fn evaluate_from(&self, base: &Evaluated, prices: Vec<f64>, change: Change, solver: &mut DemandSolver) -> Evaluated {
        let Change::Raised(pos) = change else {
            return self.evaluate(prices, solver);
        };
        let agent = self.remaining[pos];
        let demands = self
            .remaining
            .iter()
            .zip(&base.profile.demands)
            .map(|(&i, d)| match d {
                Some(bundle) if bundle.contains(&agent) => {
                    solver.solve(self.game, i, self.remaining, &prices, self.budgets[i], self.legal_sizes)
                }
                _ => d.clone(),
            })
            .collect();
        self.finish(prices, demands)
    }

    fn finish(&self, prices: Vec<f64>, demands: Vec<Option<Vec<usize>>>) -> Evaluated {
        let profile = DemandProfile::from_demands(self.remaining.to_vec(), demands);
        let z = excess(&profile, &prices, self.epsilon, self.cap);
        let error = relaxed_error(&prices, &z);
        Evaluated {
            prices,
            profile,
            z,
            error,
        }
    }

    fn neighbors(&self, current: &Evaluated) -> Vec<(Vec<f64>, Change)> {
        let p = &current.prices;
        let norm = current.z.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut out = Vec::with_capacity(GRADIENT_STEPS.len() + RAISE_STEPS.len() * p.len());
        if norm > 0.0 {
            for step in GRADIENT_STEPS {
                let s = step * self.scale / norm;
                let moved = p.iter().zip(&current.z).map(|(&pj, &zj)| truncate(pj + s * zj, self.cap)).collect();
                out.push((moved, Change::Many));
            }
        }
        for (j, &zj) in current.z.iter().enumerate() {
            if zj <= 0.0 {
                let mut moved = p.clone();
                moved[j] = 0.0;
                out.push((moved, Change::Many));
            } else {
                for step in RAISE_STEPS {
                    let mut moved = p.clone();
                    moved[j] = truncate(p[j] + step * self.scale, self.cap);
                    out.push((moved, Change::Raised(j)));
                }
            }
        }
        out
    }

    /// Runs the tabu search from `start` and returns the best state visited.
    pub fn search(&self, start: Vec<f64>) -> Evaluated {
        let mut solver = DemandSolver::new();
        let start: Vec<f64> = start.into_iter().map(|p| truncate(p, self.cap)).collect();
        let mut current = self.evaluate(start, &mut solver);
        let mut tabu: HashSet<Vec<i64>> = HashSet::new();
        tabu.insert(tabu_key(&current.prices));
        let mut best = current.clone();
        for _ in 0..self.iterations {
            if best.error == 0.0 {
                break;
            }
            let mut next: Option<Evaluated> = None;
            let mut seen = HashSet::new();
            for (prices, change) in self.neighbors(&current) {
                let key = tabu_key(&prices);
                if tabu.contains(&key) || !seen.insert(key) {
                    continue;
                }
                let candidate = self.evaluate_from(&current, prices, change, &mut solver);
                if next.as_ref().is_none_or(|n| candidate.error < n.error) {
                    next = Some(candidate);
                }
            }
            let Some(next) = next else {
                break;
            };
            tabu.insert(tabu_key(&next.prices));
            if next.error < best.error {
                best = next.clone();
            }
            current = next;
        }
        best
    }
}

/// L2 norm of `z`, where zero-priced agents contribute only excess demand.
pub fn relaxed_error(prices: &[f64], z: &[f64]) -> f64 {
    prices
        .iter()
        .zip(z)
        .map(|(&p, &zj)| if p == 0.0 { zj.max(0.0) } else { zj })
        .map(|v| v * v)
        .sum::<f64>()
        .sqrt()
}

/// Price vector rounded to 12 decimal digits.
fn tabu_key(prices: &[f64]) -> Vec<i64> {
    prices.iter().map(|&p| (p * 1e12).round() as i64).collect()
}
