//! Demand profiles, the clearing error `z` and the admissible price update.

use crate::model::Game;

use super::demand::DemandSolver;

/// Prices over the remaining agents, held in the auxiliary space
/// `[-1, 1 + cap]`; effective prices are the truncation to `[0, cap]`.
#[derive(Clone, Debug, PartialEq)]
pub struct PriceState {
    pub remaining: Vec<usize>,
    pub aux: Vec<f64>,
    pub epsilon: f64,
    /// Upper budget bound `b̄`.
    pub cap: f64,
}

impl PriceState {
    pub fn new(remaining: Vec<usize>, aux: Vec<f64>, epsilon: f64, cap: f64) -> Self {
        assert_eq!(remaining.len(), aux.len());
        Self {
            remaining,
            aux,
            epsilon,
            cap,
        }
    }

    pub fn prices(&self) -> Vec<f64> {
        self.aux.iter().map(|&p| truncate(p, self.cap)).collect()
    }
}

pub fn truncate(p: f64, cap: f64) -> f64 {
    p.clamp(0.0, cap)
}

/// Demands of the remaining agents and their excess-demand statistics,
/// all aligned with `remaining`.
#[derive(Clone, Debug, PartialEq)]
pub struct DemandProfile {
    pub remaining: Vec<usize>,
    /// Demanded agents per remaining agent; `None` if nothing was affordable.
    pub demands: Vec<Option<Vec<usize>>>,
    /// Agents demanding `j` whom `j` does not demand.
    pub over: Vec<usize>,
    /// Whether nobody demands `j`.
    pub under: Vec<bool>,
}

impl DemandProfile {
    /// Derives the statistics from per-agent demands.
    pub fn from_demands(remaining: Vec<usize>, demands: Vec<Option<Vec<usize>>>) -> Self {
        let m = remaining.len();
        let pos = position_map(&remaining);
        let mut demanded_by = vec![Vec::new(); m];
        for (a, d) in demands.iter().enumerate() {
            for &j in d.iter().flatten() {
                demanded_by[pos[j]].push(remaining[a]);
            }
        }
        let over = (0..m)
            .map(|b| {
                let own = demands[b].as_deref().unwrap_or(&[]);
                demanded_by[b].iter().filter(|i| !own.contains(i)).count()
            })
            .collect();
        let under = demanded_by.iter().map(|v| v.is_empty()).collect();
        Self {
            remaining,
            demands,
            over,
            under,
        }
    }

    fn demand_of(&self, a: usize) -> &[usize] {
        self.demands[a].as_deref().unwrap_or(&[])
    }

    /// Every demand is reciprocated, and every agent either demands a
    /// nonempty bundle or is priced at zero, demands nothing and is not
    /// demanded.
    pub fn relaxed_clearing(&self, prices: &[f64]) -> bool {
        let pos = position_map(&self.remaining);
        (0..self.remaining.len()).all(|a| {
            let me = self.remaining[a];
            let own = self.demand_of(a);
            let reciprocal = own.iter().all(|&j| self.demand_of(pos[j]).contains(&me));
            let placed = !own.is_empty() || (prices[a] == 0.0 && self.under[a]);
            reciprocal && placed && self.over[a] == 0
        })
    }

    /// Every agent demands a nonempty bundle and all demanded teams agree.
    pub fn exact_clearing(&self) -> bool {
        let pos = position_map(&self.remaining);
        (0..self.remaining.len()).all(|a| {
            let me = self.remaining[a];
            let own = self.demand_of(a);
            if own.is_empty() {
                return false;
            }
            let mut team = own.to_vec();
            team.push(me);
            team.sort_unstable();
            own.iter().all(|&j| {
                let mut other = self.demand_of(pos[j]).to_vec();
                other.push(j);
                other.sort_unstable();
                other == team
            })
        })
    }
}

fn position_map(remaining: &[usize]) -> Vec<usize> {
    let size = remaining.iter().max().map_or(0, |&m| m + 1);
    let mut pos = vec![usize::MAX; size];
    for (a, &j) in remaining.iter().enumerate() {
        pos[j] = a;
    }
    pos
}

/// `z_j = (1 + ε - (ε / b̄) p_j) D_j - U_j`.
pub fn excess(profile: &DemandProfile, prices: &[f64], epsilon: f64, cap: f64) -> Vec<f64> {
    profile
        .over
        .iter()
        .zip(&profile.under)
        .zip(prices)
        .map(|((&d, &u), &p)| (1.0 + epsilon - epsilon / cap * p) * d as f64 - if u { 1.0 } else { 0.0 })
        .collect()
}

/// Demands at the given prices (aligned with `remaining`).
pub fn demand_profile(
    game: &Game,
    remaining: &[usize],
    prices: &[f64],
    budgets: &[f64],
    legal_sizes: &[usize],
    solver: &mut DemandSolver,
) -> DemandProfile {
    let demands = remaining
        .iter()
        .map(|&i| solver.solve(game, i, remaining, prices, budgets[i], legal_sizes))
        .collect();
    DemandProfile::from_demands(remaining.to_vec(), demands)
}

/// Demand profile and clearing error at the truncated prices of `state`.
/// `budgets` is indexed by agent.
pub fn clearing_error(
    game: &Game,
    state: &PriceState,
    budgets: &[f64],
    legal_sizes: &[usize],
) -> (DemandProfile, Vec<f64>) {
    let prices = state.prices();
    let profile = demand_profile(game, &state.remaining, &prices, budgets, legal_sizes, &mut DemandSolver::new());
    let z = excess(&profile, &prices, state.epsilon, state.cap);
    (profile, z)
}

/// `f(p̃)_j = t(p̃)_j + z_j / |N'|` with `z` evaluated at `t(p̃)`.
pub fn price_update(state: &PriceState, profile: &DemandProfile) -> PriceState {
    let prices = state.prices();
    let z = excess(profile, &prices, state.epsilon, state.cap);
    let m = state.remaining.len() as f64;
    let aux = prices.iter().zip(&z).map(|(&p, &zj)| p + zj / m).collect();
    PriceState {
        aux,
        ..state.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile(demands: Vec<Option<Vec<usize>>>) -> DemandProfile {
        DemandProfile::from_demands((0..demands.len()).collect(), demands)
    }

    #[test]
    fn reciprocal_demands_have_zero_error() {
        let p = profile(vec![Some(vec![1]), Some(vec![0]), Some(vec![3]), Some(vec![2])]);
        assert_eq!(p.over, vec![0; 4]);
        assert_eq!(p.under, vec![false; 4]);
        assert_eq!(excess(&p, &[0.3; 4], 0.01, 1.125), vec![0.0; 4]);
        assert!(p.exact_clearing());
        assert!(p.relaxed_clearing(&[0.3; 4]));
    }

    #[test]
    fn undemanded_agent_has_minus_one() {
        let p = profile(vec![Some(vec![1]), Some(vec![0]), None, Some(vec![0])]);
        let z = excess(&p, &[0.5; 4], 0.01, 1.125);
        assert_eq!(z[2], -1.0);
        assert_eq!(p.over[0], 1);
        assert!(!p.under[0]);
        assert_eq!(z[3], -1.0);
    }

    #[test]
    fn update_hand_evaluation() {
        // p = 0.5, D = 2, U = 0, |N'| = 4, ε = 0.01, b̄ = 1.025.
        let p = profile(vec![Some(vec![1]), Some(vec![3]), Some(vec![1]), Some(vec![1])]);
        assert_eq!(p.over[1], 2);
        let state = PriceState::new(vec![0, 1, 2, 3], vec![0.5; 4], 0.01, 1.025);
        let next = price_update(&state, &p);
        let expected = 0.5 + ((1.01 - (0.01 / 1.025) * 0.5) * 2.0) / 4.0;
        assert!((next.aux[1] - expected).abs() < 1e-15);
        // U = 1, D = 0 drops the price by 1/|N'|.
        assert_eq!(p.over[0], 0);
        assert!(p.under[0]);
        assert!((next.aux[0] - (0.5 - 0.25)).abs() < 1e-15);
    }

    #[test]
    fn fixed_point_when_statistics_vanish() {
        let p = profile(vec![Some(vec![1]), Some(vec![0])]);
        let state = PriceState::new(vec![0, 1], vec![0.7, 0.2], 0.01, 1.25);
        assert_eq!(price_update(&state, &p), state);
    }

    #[test]
    fn over_and_under_are_exclusive() {
        let p = profile(vec![Some(vec![2]), Some(vec![2]), None, Some(vec![0])]);
        for j in 0..4 {
            assert!(p.over[j] == 0 || !p.under[j]);
        }
    }
}
