//! Welfare, fairness and similarity measures for a partition.
//!
//! Envy compares teammate sets only: agent `i` envies `j` when
//! `u_i(team(j) \ {j}) > u_i(team(i) \ {i})`. Ties never count as envy.

use crate::error::{Error, Result};
use crate::model::{check_partition, count_partitions, for_each_partition, Game, Partition, SerialOrder, SizeRule};

/// Guard on the number of partitions the maximin enumeration may visit.
pub const MAXIMIN_PARTITION_LIMIT: u128 = 10_000_000;

/// Sum over teams of `u_i(j)` for ordered teammate pairs. The normalized
/// form divides by `n`.
pub fn social_welfare(game: &Game, p: &Partition, normalized: bool) -> Result<f64> {
    check_partition(game, p)?;
    let raw: f64 = p
        .teams()
        .iter()
        .map(|team| team.iter().map(|&i| game.value_of(i, team)).sum::<f64>())
        .sum();
    Ok(if normalized { raw / game.n() as f64 } else { raw })
}

/// Precomputed team membership and teammate values.
struct View<'a> {
    game: &'a Game,
    teams: &'a [Vec<usize>],
    team_of: Vec<usize>,
}

impl<'a> View<'a> {
    fn new(game: &'a Game, p: &'a Partition) -> Self {
        let team_of = p
            .assignment(game.n())
            .into_iter()
            .map(|t| t.unwrap_or(usize::MAX))
            .collect();
        Self {
            game,
            teams: p.teams(),
            team_of,
        }
    }

    fn team(&self, i: usize) -> &[usize] {
        match self.team_of.get(i) {
            Some(&t) if t != usize::MAX => &self.teams[t],
            _ => &[],
        }
    }

    fn own_value(&self, i: usize) -> f64 {
        self.game.value_of(i, self.team(i))
    }

    /// `u_i(team(j) \ {j})`.
    fn swapped_value(&self, i: usize, j: usize) -> f64 {
        let row = self.game.row(i);
        self.team(j).iter().filter(|&&m| m != j && m != i).map(|&m| row[m]).sum()
    }

    fn envies(&self, i: usize, j: usize) -> bool {
        i != j && self.swapped_value(i, j) > self.own_value(i)
    }

    fn envy_free(&self, i: usize) -> bool {
        (0..self.game.n()).all(|j| !self.envies(i, j))
    }

    fn bounded(&self, i: usize) -> bool {
        let own = self.own_value(i);
        let row = self.game.row(i);
        let own_team = self.team_of[i];
        (0..self.game.n())
            .filter(|&j| self.team_of[j] != own_team)
            .all(|j| {
                let value = self.swapped_value(i, j);
                if value <= own {
                    return true;
                }
                let best_single = self
                    .team(j)
                    .iter()
                    .filter(|&&r| r != j)
                    .map(|&r| row[r])
                    .fold(f64::NEG_INFINITY, f64::max);
                best_single.is_finite() && value - best_single <= own
            })
    }

    fn proportional(&self, i: usize) -> bool {
        self.own_value(i) >= self.game.row_total(i) / self.teams.len() as f64
    }
}

/// Whether `i` strictly prefers `j`'s teammates (with `i` in `j`'s place)
/// to its own.
pub fn envies(game: &Game, p: &Partition, i: usize, j: usize) -> bool {
    View::new(game, p).envies(i, j)
}

pub fn envy_free(game: &Game, p: &Partition, i: usize) -> bool {
    View::new(game, p).envy_free(i)
}

/// Every team `i` envies stops being preferred after removing one of its
/// members (other than the agent `i` would replace).
pub fn envy_bounded_by_single(game: &Game, p: &Partition, i: usize) -> bool {
    View::new(game, p).bounded(i)
}

pub fn proportional(game: &Game, p: &Partition, i: usize) -> bool {
    View::new(game, p).proportional(i)
}

/// Maximin share of every agent, by exhaustive enumeration of partitions
/// with sizes in `[k_min, k_max]`.
///
/// For a partition, agent `i`'s worst case is the least valuable team it
/// could end up in by swapping places with one agent: its own team if the
/// swap partner is itself or a teammate, otherwise another team `S` minus
/// its member `j`. The share is the best such worst case over partitions.
pub fn maximin_shares(game: &Game) -> Result<Vec<f64>> {
    let n = game.n();
    let rule = SizeRule::interval_of(game);
    let count = count_partitions(n, &rule);
    if count > MAXIMIN_PARTITION_LIMIT {
        return Err(Error::CapacityExceeded {
            what: "maximin partitions",
            count,
            limit: MAXIMIN_PARTITION_LIMIT,
        });
    }
    let mut shares = vec![f64::NEG_INFINITY; n];
    for_each_partition(n, &rule, |teams| {
        for i in 0..n {
            let row = game.row(i);
            let mut worst = f64::INFINITY;
            for team in teams {
                let value: f64 = team.iter().filter(|&&j| j != i).map(|&j| row[j]).sum();
                let landed = if team.contains(&i) {
                    value
                } else {
                    let top = team.iter().map(|&j| row[j]).fold(0.0, f64::max);
                    value - top
                };
                worst = worst.min(landed);
            }
            if worst > shares[i] {
                shares[i] = worst;
            }
        }
    });
    Ok(shares)
}

pub fn maximin_share(game: &Game, i: usize) -> Result<f64> {
    Ok(maximin_shares(game)?[i])
}

/// Fraction of agents whose own team is worth at least their maximin share.
pub fn maximin_guarantee_satisfied(game: &Game, p: &Partition) -> Result<f64> {
    check_partition(game, p)?;
    let shares = maximin_shares(game)?;
    Ok(fraction_with_shares(game, p, &shares))
}

fn fraction_with_shares(game: &Game, p: &Partition, shares: &[f64]) -> f64 {
    let view = View::new(game, p);
    let ok = (0..game.n()).filter(|&i| view.own_value(i) >= shares[i]).count();
    ok as f64 / game.n() as f64
}

/// Mean pairwise cosine similarity of preference rows.
#[derive(Clone, Debug, PartialEq)]
pub struct Similarity {
    pub mean: f64,
    /// Pairs whose reduced rows had zero norm; each contributed 0.
    pub zero_pairs: Vec<(usize, usize)>,
}

/// For each unordered pair `(i, j)`, compares rows `i` and `j` over the
/// columns other than `i` and `j`.
pub fn cosine_similarity(game: &Game) -> Similarity {
    let n = game.n();
    let mut total = 0.0;
    let mut zero_pairs = Vec::new();
    for i in 0..n {
        let a = game.row(i);
        for j in i + 1..n {
            let b = game.row(j);
            let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
            for k in (0..n).filter(|&k| k != i && k != j) {
                dot += a[k] * b[k];
                na += a[k] * a[k];
                nb += b[k] * b[k];
            }
            if na == 0.0 || nb == 0.0 {
                zero_pairs.push((i, j));
            } else {
                total += dot / (na.sqrt() * nb.sqrt());
            }
        }
    }
    let pairs = (n * n - n) as f64 / 2.0;
    Similarity {
        mean: if pairs > 0.0 { total / pairs } else { 0.0 },
        zero_pairs,
    }
}

/// Rank of each other agent in `i`'s preferences, 1 = best. Tied values
/// share their average rank. The entry for `i` itself is 0.
pub fn preference_ranks(game: &Game, i: usize) -> Vec<f64> {
    let n = game.n();
    let row = game.row(i);
    let mut others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
    others.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(a.cmp(&b)));
    let mut ranks = vec![0.0; n];
    let mut start = 0;
    while start < others.len() {
        let mut end = start + 1;
        while end < others.len() && row[others[end]] == row[others[start]] {
            end += 1;
        }
        let avg = (start + 1 + end) as f64 / 2.0;
        for &j in &others[start..end] {
            ranks[j] = avg;
        }
        start = end;
    }
    ranks
}

#[derive(Clone, Debug, PartialEq)]
pub struct AgentOutcome {
    pub agent: usize,
    pub team_value: f64,
    /// Own-team value over the agent's total value for everyone.
    pub utility_fraction: f64,
    pub serial_index: usize,
    /// Mean rank of the agent's teammates in its own preferences.
    pub mean_teammate_rank: f64,
    /// Mean rank other agents give this agent.
    pub mean_rank_received: f64,
}

pub fn per_agent_outcomes(game: &Game, p: &Partition, order: &SerialOrder) -> Result<Vec<AgentOutcome>> {
    check_partition(game, p)?;
    let n = game.n();
    let ranks: Vec<Vec<f64>> = (0..n).map(|i| preference_ranks(game, i)).collect();
    let view = View::new(game, p);
    Ok((0..n)
        .map(|i| {
            let team_value = view.own_value(i);
            let total = game.row_total(i);
            let mates: Vec<usize> = view.team(i).iter().copied().filter(|&j| j != i).collect();
            let mean_teammate_rank = if mates.is_empty() {
                f64::NAN
            } else {
                mates.iter().map(|&j| ranks[i][j]).sum::<f64>() / mates.len() as f64
            };
            let mean_rank_received =
                (0..n).filter(|&k| k != i).map(|k| ranks[k][i]).sum::<f64>() / (n - 1) as f64;
            AgentOutcome {
                agent: i,
                team_value,
                utility_fraction: if total > 0.0 { team_value / total } else { 0.0 },
                serial_index: order.position(i),
                mean_teammate_rank,
                mean_rank_received,
            }
        })
        .collect())
}

/// Outcome summary of one mechanism run.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricsReport {
    /// Welfare of the row-normalized game divided by `n`.
    pub social_welfare: f64,
    pub raw_welfare: f64,
    pub envy_free_fraction: f64,
    pub bounded_envy_fraction: f64,
    pub proportional_fraction: f64,
    pub maximin_satisfied_fraction: Option<f64>,
    pub per_agent: Vec<AgentOutcome>,
}

impl MetricsReport {
    pub const CSV_HEADER: &'static str = "social_welfare,raw_welfare,envy_free_fraction,bounded_envy_fraction,proportional_fraction,maximin_satisfied_fraction";
    pub const AGENT_CSV_HEADER: &'static str =
        "agent,team_value,utility_fraction,serial_index,mean_teammate_rank,mean_rank_received";

    /// Fairness and per-agent figures use `game` as given; welfare is
    /// reported both raw and on the normalized game. The maximin fraction is
    /// computed only when `with_maximin` is set and the instance is small
    /// enough.
    pub fn compute(game: &Game, p: &Partition, order: &SerialOrder, with_maximin: bool) -> Result<Self> {
        check_partition(game, p)?;
        let n = game.n();
        let (normalized, _) = game.normalize_lenient();
        let view = View::new(game, p);
        let frac = |pred: &dyn Fn(usize) -> bool| (0..n).filter(|&i| pred(i)).count() as f64 / n as f64;
        let maximin_satisfied_fraction = if with_maximin {
            match maximin_shares(game) {
                Ok(shares) => Some(fraction_with_shares(game, p, &shares)),
                Err(Error::CapacityExceeded { .. }) => None,
                Err(e) => return Err(e),
            }
        } else {
            None
        };
        Ok(Self {
            social_welfare: social_welfare(&normalized, p, true)?,
            raw_welfare: social_welfare(game, p, false)?,
            envy_free_fraction: frac(&|i| view.envy_free(i)),
            bounded_envy_fraction: frac(&|i| view.bounded(i)),
            proportional_fraction: frac(&|i| view.proportional(i)),
            maximin_satisfied_fraction,
            per_agent: per_agent_outcomes(game, p, order)?,
        })
    }

    /// One CSV row in [`MetricsReport::CSV_HEADER`] order; a missing maximin
    /// fraction is an empty field.
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.social_welfare,
            self.raw_welfare,
            self.envy_free_fraction,
            self.bounded_envy_fraction,
            self.proportional_fraction,
            self.maximin_satisfied_fraction.map(|f| f.to_string()).unwrap_or_default()
        )
    }
}

impl AgentOutcome {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.agent,
            self.team_value,
            self.utility_fraction,
            self.serial_index,
            self.mean_teammate_rank,
            self.mean_rank_received
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn p(teams: &[&[usize]]) -> Partition {
        Partition::new(teams.iter().map(|t| t.to_vec()).collect())
    }

    #[test]
    fn welfare_examples() {
        let zero = Game::from_flat(6, vec![0.0; 36], 3, 3).unwrap();
        assert_eq!(social_welfare(&zero, &p(&[&[0, 1, 2], &[3, 4, 5]]), false).unwrap(), 0.0);

        let g = fixtures::maximin_table();
        // {A,B,E},{C,D,F}: A 1+3, B 2+3, E 0+2, C 1+3, D 2+1, F 2+2.
        assert_eq!(social_welfare(&g, &p(&[&[0, 1, 4], &[2, 3, 5]]), false).unwrap(), 22.0);

        let grand = g.with_bounds(6, 6).unwrap();
        let total: f64 = (0..6).map(|i| grand.row_total(i)).sum();
        assert_eq!(social_welfare(&grand, &p(&[&[0, 1, 2, 3, 4, 5]]), false).unwrap(), total);

        assert!(matches!(
            social_welfare(&g, &p(&[&[0, 1], &[2, 3, 4, 5]]), false),
            Err(Error::InvalidPartition(_))
        ));
    }

    #[test]
    fn envy_examples() {
        let g = fixtures::envy_table();
        let part = p(&[&[0, 1, 2], &[3, 4, 5]]);
        for i in 0..6 {
            for j in [0, 1, 2] {
                if i < 3 && i != j {
                    assert!(!envies(&g, &part, i, j));
                }
            }
        }
        // B's own teammates {A, C} are worth 12, the most B can get.
        assert!((0..6).filter(|&j| j != 1).all(|j| !envies(&g, &part, 1, j)));

        let uniform = Game::from_flat(6, vec![1.0; 36], 3, 3).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                if i != j {
                    assert!(!envies(&uniform, &part, i, j));
                }
            }
        }
    }

    #[test]
    fn envy_table_admits_no_bounded_partition() {
        let g = fixtures::envy_table();
        let mut partitions = 0;
        for_each_partition(6, &SizeRule::Interval(3, 3), |teams| {
            partitions += 1;
            let part = Partition::new(teams.to_vec());
            assert!((0..6).any(|i| !envy_bounded_by_single(&g, &part, i)), "{teams:?}");
        });
        assert_eq!(partitions, 10);
    }

    #[test]
    fn bounded_envy_trivial_cases() {
        let g = fixtures::envy_table();
        let grand = g.with_bounds(6, 6).unwrap();
        let all = p(&[&[0, 1, 2, 3, 4, 5]]);
        assert!((0..6).all(|i| envy_bounded_by_single(&grand, &all, i)));
        assert!((0..6).all(|i| proportional(&grand, &all, i)));
    }

    #[test]
    fn proportional_uniform_arithmetic() {
        // Uniform values, n = 20, teams of 5: own share 4/19 < 1/4.
        let g = Game::from_flat(20, vec![1.0; 400], 5, 5).unwrap();
        let part = Partition::new((0..4).map(|t| (5 * t..5 * t + 5).collect()).collect());
        assert!((0..20).all(|i| !proportional(&g, &part, i)));
        // Pairs in n = 4: own share 1/3 < 1/2.
        let g = Game::from_flat(4, vec![1.0; 16], 2, 2).unwrap();
        assert!(!proportional(&g, &p(&[&[0, 1], &[2, 3]]), 0));
    }

    #[test]
    fn maximin_table_shares_and_guarantee() {
        let g = fixtures::maximin_table();
        assert_eq!(maximin_shares(&g).unwrap(), vec![3.0; 6]);
        let mut partitions = 0;
        for_each_partition(6, &SizeRule::Interval(3, 3), |teams| {
            partitions += 1;
            let part = Partition::new(teams.to_vec());
            let own_min = (0..6)
                .map(|i| game_value(&g, &part, i))
                .fold(f64::INFINITY, f64::min);
            assert!(own_min <= 2.0);
            assert!(maximin_guarantee_satisfied(&g, &part).unwrap() < 1.0);
            assert!((0..6).any(|i| !proportional(&g, &part, i)));
        });
        assert_eq!(partitions, 10);
    }

    fn game_value(g: &Game, part: &Partition, i: usize) -> f64 {
        g.value_of(i, part.team_of(i).unwrap())
    }

    #[test]
    fn maximin_pairs_and_grand_coalition() {
        let g = fixtures::maximin_table();
        let pairs = g.with_bounds(2, 2).unwrap();
        let shares = maximin_shares(&pairs).unwrap();
        for i in 0..6 {
            let min = (0..6).filter(|&j| j != i).map(|j| g.utility(i, j)).fold(f64::INFINITY, f64::min);
            assert_eq!(shares[i], min);
        }
        let pairing = p(&[&[0, 3], &[1, 5], &[2, 4]]);
        assert_eq!(maximin_guarantee_satisfied(&pairs, &pairing).unwrap(), 1.0);

        let grand = g.with_bounds(6, 6).unwrap();
        let shares = maximin_shares(&grand).unwrap();
        for i in 0..6 {
            assert_eq!(shares[i], g.row_total(i));
        }
        assert_eq!(maximin_guarantee_satisfied(&grand, &p(&[&[0, 1, 2, 3, 4, 5]])).unwrap(), 1.0);
    }

    #[test]
    fn maximin_capacity_guard() {
        let g = Game::from_flat(24, vec![1.0; 24 * 24], 4, 6).unwrap();
        assert!(matches!(maximin_shares(&g), Err(Error::CapacityExceeded { .. })));
    }

    #[test]
    fn cosine_examples() {
        let same = Game::from_flat(4, vec![1.0; 16], 2, 2).unwrap();
        assert!((cosine_similarity(&same).mean - 1.0).abs() < 1e-12);

        // Agents 0 and 1 value disjoint others over columns {2, 3}.
        let g = Game::new(
            vec![
                vec![0.0, 1.0, 1.0, 0.0],
                vec![1.0, 0.0, 0.0, 1.0],
                vec![1.0, 1.0, 0.0, 1.0],
                vec![1.0, 1.0, 1.0, 0.0],
            ],
            2,
            2,
        )
        .unwrap();
        let s = cosine_similarity(&g);
        // Pair (0,1): [1,0] vs [0,1] -> 0. Pair (0,2) over {1,3}: [1,0],[1,1] -> 1/sqrt2.
        // Pair (0,3) over {1,2}: [1,1],[1,1] -> 1. Pair (1,2) over {0,3}: [1,1],[1,1] -> 1.
        // Pair (1,3) over {0,2}: [1,0],[1,1] -> 1/sqrt2. Pair (2,3) over {0,1}: 1.
        let expected = (0.0 + 2.0 * std::f64::consts::FRAC_1_SQRT_2 + 3.0) / 6.0;
        assert!((s.mean - expected).abs() < 1e-12);
        assert!(s.zero_pairs.is_empty());
    }

    #[test]
    fn cosine_zero_pairs_contribute_zero() {
        let g = Game::new(
            vec![
                vec![0.0, 0.0, 0.0],
                vec![1.0, 0.0, 1.0],
                vec![1.0, 1.0, 0.0],
            ],
            3,
            3,
        )
        .unwrap();
        let s = cosine_similarity(&g);
        assert_eq!(s.zero_pairs, vec![(0, 1), (0, 2)]);
        // Pair (1,2) over {0}: [1] vs [1] -> 1.
        assert!((s.mean - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn per_agent_examples() {
        let g = fixtures::envy_table();
        let part = p(&[&[0, 1, 2], &[3, 4, 5]]);
        let out = per_agent_outcomes(&g, &part, &SerialOrder::identity(6)).unwrap();
        assert!((out[0].utility_fraction - 1.0 / 15.0).abs() < 1e-15);
        assert_eq!(out[0].serial_index, 0);
        // A ranks F(8) E(4) D(2) C(1) B(0): teammates B=5, C=4.
        assert_eq!(out[0].mean_teammate_rank, 4.5);
        // Everyone else ranks A first.
        assert_eq!(out[0].mean_rank_received, 1.0);

        let uniform = Game::from_flat(6, vec![1.0; 36], 3, 3).unwrap();
        let out = per_agent_outcomes(&uniform, &part, &SerialOrder::identity(6)).unwrap();
        for o in &out {
            assert!((o.utility_fraction - 2.0 / 5.0).abs() < 1e-15);
            assert_eq!(o.mean_teammate_rank, 3.0);
        }
    }

    #[test]
    fn ranks_average_ties() {
        let g = Game::new(
            vec![
                vec![0.0, 2.0, 1.0, 1.0],
                vec![1.0; 4],
                vec![1.0; 4],
                vec![1.0; 4],
            ],
            2,
            2,
        )
        .unwrap();
        assert_eq!(preference_ranks(&g, 0), vec![0.0, 1.0, 2.5, 2.5]);
    }

    #[test]
    fn report_csv_row_has_header_arity() {
        let g = fixtures::maximin_table();
        let part = p(&[&[0, 1, 4], &[2, 3, 5]]);
        let r = MetricsReport::compute(&g, &part, &SerialOrder::identity(6), true).unwrap();
        assert_eq!(
            r.csv_row().split(',').count(),
            MetricsReport::CSV_HEADER.split(',').count()
        );
        assert!(r.envy_free_fraction <= r.bounded_envy_fraction);
        assert_eq!(r.raw_welfare, 22.0);
        assert!((r.social_welfare - social_welfare(&g.normalize().unwrap(), &part, true).unwrap()).abs() < 1e-15);
    }
}
