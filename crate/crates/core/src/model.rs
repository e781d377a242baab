//! Problem instances, team-size constraints and partitions.
//!
//! Agents are `0..n`. A [`Game`] stores the dense utility matrix where
//! `utility(i, j)` is the value agent `i` places on having `j` as a
//! teammate; the diagonal is always zero.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};

/// Whether `n` agents can be split into teams with sizes in `[k_min, k_max]`.
///
/// Uses the integer-division test: `k_min | n`, `k_max | n`, or
/// `n / k_min > n / k_max`.
pub fn feasible(n: usize, k_min: usize, k_max: usize) -> Result<bool> {
    check_bounds(n, k_min, k_max)?;
    Ok(n.is_multiple_of(k_min) || n.is_multiple_of(k_max) || n / k_min > n / k_max)
}

fn check_bounds(n: usize, k_min: usize, k_max: usize) -> Result<()> {
    if k_min < 1 || k_min > k_max || k_max > n {
        return Err(Error::InvalidBounds { n, k_min, k_max });
    }
    Ok(())
}

/// Feasibility of a leftover group of `m` agents, where `m` may be zero or
/// smaller than `k_min`. An empty remainder is feasible.
pub fn remainder_feasible(m: usize, k_min: usize, k_max: usize) -> bool {
    if m == 0 {
        return true;
    }
    if k_min == 0 || k_min > k_max || m < k_min {
        return false;
    }
    // Some team count t with t * k_min <= m <= t * k_max.
    let t_min = m.div_ceil(k_max);
    let t_max = m / k_min;
    t_min <= t_max
}

/// Descending list of team sizes used by every mechanism.
///
/// Greedily takes as many `k_max` teams as possible such that the rest can
/// still be covered with sizes in `[k_min, k_max - 1]`, then recurses on
/// the rest with the next smaller maximum.
pub fn team_size_schedule(n: usize, k_min: usize, k_max: usize) -> Result<Vec<usize>> {
    if !feasible(n, k_min, k_max)? {
        return Err(Error::InvalidBounds { n, k_min, k_max });
    }
    let schedule = greedy_schedule(n, k_min, k_max)
        .ok_or(Error::InvalidBounds { n, k_min, k_max })?;
    debug_assert_eq!(schedule.iter().sum::<usize>(), n);
    Ok(schedule)
}

fn greedy_schedule(m: usize, lo: usize, hi: usize) -> Option<Vec<usize>> {
    if m == 0 {
        return Some(Vec::new());
    }
    if hi < lo || hi == 0 {
        return None;
    }
    for t in (0..=m / hi).rev() {
        let rest = m - t * hi;
        if rest == 0 {
            return Some(vec![hi; t]);
        }
        if hi > lo && remainder_feasible(rest, lo, hi - 1) {
            let mut out = vec![hi; t];
            out.extend(greedy_schedule(rest, lo, hi - 1)?);
            return Some(out);
        }
    }
    None
}

/// An additively separable team formation instance.
#[derive(Clone, Debug, PartialEq)]
pub struct Game {
    n: usize,
    utilities: Vec<f64>,
    k_min: usize,
    k_max: usize,
}

impl Game {
    /// Builds a game from a square utility matrix. The diagonal is forced to 0.
    pub fn new(rows: Vec<Vec<f64>>, k_min: usize, k_max: usize) -> Result<Self> {
        let n = rows.len();
        let mut flat = Vec::with_capacity(n * n);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidUtilities(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            flat.extend(row);
        }
        Self::from_flat(n, flat, k_min, k_max)
    }

    /// Builds a game from a row-major `n * n` utility buffer.
    pub fn from_flat(n: usize, mut utilities: Vec<f64>, k_min: usize, k_max: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidUtilities(format!("need at least 2 agents, got {n}")));
        }
        if utilities.len() != n * n {
            return Err(Error::InvalidUtilities(format!(
                "expected {} entries, got {}",
                n * n,
                utilities.len()
            )));
        }
        for i in 0..n {
            utilities[i * n + i] = 0.0;
        }
        if let Some(pos) = utilities.iter().position(|u| !u.is_finite() || *u < 0.0) {
            return Err(Error::InvalidUtilities(format!(
                "u[{}][{}] = {} is not a nonnegative number",
                pos / n,
                pos % n,
                utilities[pos]
            )));
        }
        if !feasible(n, k_min, k_max)? {
            return Err(Error::InvalidBounds { n, k_min, k_max });
        }
        Ok(Self {
            n,
            utilities,
            k_min,
            k_max,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k_min(&self) -> usize {
        self.k_min
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    #[inline]
    pub fn utility(&self, i: usize, j: usize) -> f64 {
        self.utilities[i * self.n + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.utilities[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.utilities.chunks_exact(self.n)
    }

    /// `u_i(S)`: the value of `members` to agent `i`, ignoring `i` itself.
    pub fn value_of(&self, i: usize, members: &[usize]) -> f64 {
        let row = self.row(i);
        members.iter().filter(|&&j| j != i).map(|&j| row[j]).sum()
    }

    /// Total value agent `i` places on all other agents.
    pub fn row_total(&self, i: usize) -> f64 {
        self.row(i).iter().sum()
    }

    pub fn schedule(&self) -> Vec<usize> {
        team_size_schedule(self.n, self.k_min, self.k_max).expect("game bounds are feasible")
    }

    /// Copy of this game with agent `i`'s row replaced (diagonal forced to 0).
    pub fn with_row(&self, i: usize, row: &[f64]) -> Result<Self> {
        if row.len() != self.n {
            return Err(Error::InvalidUtilities(format!(
                "replacement row has {} entries, expected {}",
                row.len(),
                self.n
            )));
        }
        let mut utilities = self.utilities.clone();
        utilities[i * self.n..(i + 1) * self.n].copy_from_slice(row);
        Self::from_flat(self.n, utilities, self.k_min, self.k_max)
    }

    /// Copy with different team-size bounds.
    pub fn with_bounds(&self, k_min: usize, k_max: usize) -> Result<Self> {
        Self::from_flat(self.n, self.utilities.clone(), k_min, k_max)
    }

    /// Scales each row to sum to one. Fails if any row is all zeros.
    pub fn normalize(&self) -> Result<Self> {
        let (game, degenerate) = self.normalize_lenient();
        if degenerate.is_empty() {
            Ok(game)
        } else {
            Err(Error::DegeneratePreferences { agents: degenerate })
        }
    }

    /// Like [`Game::normalize`], but all-zero rows are left as zeros and
    /// reported instead of rejected.
    pub fn normalize_lenient(&self) -> (Self, Vec<usize>) {
        let mut utilities = self.utilities.clone();
        let mut degenerate = Vec::new();
        for (i, row) in utilities.chunks_exact_mut(self.n).enumerate() {
            let total: f64 = row.iter().sum();
            if total > 0.0 {
                row.iter_mut().for_each(|u| *u /= total);
            } else {
                degenerate.push(i);
            }
        }
        let game = Self {
            n: self.n,
            utilities,
            k_min: self.k_min,
            k_max: self.k_max,
        };
        (game, degenerate)
    }
}

/// A set of teams. Members within a team are sorted and teams are ordered by
/// their smallest member, so equal partitions compare equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Partition {
    teams: Vec<Vec<usize>>,
}

impl Partition {
    pub fn new(mut teams: Vec<Vec<usize>>) -> Self {
        for team in &mut teams {
            team.sort_unstable();
        }
        teams.sort_by(|a, b| a.first().cmp(&b.first()).then_with(|| a.cmp(b)));
        Self { teams }
    }

    pub fn teams(&self) -> &[Vec<usize>] {
        &self.teams
    }

    pub fn len(&self) -> usize {
        self.teams.len()
    }

    pub fn is_empty(&self) -> bool {
        self.teams.is_empty()
    }

    /// Index of each agent's team, `None` for agents not covered.
    pub fn assignment(&self, n: usize) -> Vec<Option<usize>> {
        let mut out = vec![None; n];
        for (t, team) in self.teams.iter().enumerate() {
            for &a in team {
                if a < n {
                    out[a] = Some(t);
                }
            }
        }
        out
    }

    pub fn team_of(&self, agent: usize) -> Option<&[usize]> {
        self.teams
            .iter()
            .find(|team| team.contains(&agent))
            .map(Vec::as_slice)
    }

    /// Sizes in descending order.
    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes: Vec<usize> = self.teams.iter().map(Vec::len).collect();
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        sizes
    }
}

/// Disjoint cover of all agents with every team size in `[k_min, k_max]`.
pub fn validate_partition(game: &Game, p: &Partition) -> bool {
    check_partition(game, p).is_ok()
}

pub(crate) fn check_partition(game: &Game, p: &Partition) -> Result<()> {
    let n = game.n();
    let mut seen = vec![false; n];
    for team in p.teams() {
        if team.len() < game.k_min() || team.len() > game.k_max() {
            return Err(Error::InvalidPartition(format!(
                "team {team:?} has size {} outside [{}, {}]",
                team.len(),
                game.k_min(),
                game.k_max()
            )));
        }
        for &a in team {
            if a >= n {
                return Err(Error::InvalidPartition(format!("agent {a} out of range")));
            }
            if std::mem::replace(&mut seen[a], true) {
                return Err(Error::InvalidPartition(format!("agent {a} appears twice")));
            }
        }
    }
    if let Some(a) = seen.iter().position(|s| !s) {
        return Err(Error::InvalidPartition(format!("agent {a} is not assigned")));
    }
    Ok(())
}

/// A permutation of the agents; position 0 acts first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SerialOrder {
    order: Vec<usize>,
    position: Vec<usize>,
}

impl SerialOrder {
    pub fn new(order: Vec<usize>) -> Result<Self> {
        let n = order.len();
        let mut position = vec![usize::MAX; n];
        for (pos, &a) in order.iter().enumerate() {
            if a >= n || position[a] != usize::MAX {
                return Err(Error::InvalidOrder(format!(
                    "{order:?} is not a permutation of 0..{n}"
                )));
            }
            position[a] = pos;
        }
        Ok(Self { order, position })
    }

    pub fn identity(n: usize) -> Self {
        Self::new((0..n).collect()).expect("identity is a permutation")
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        Self::new(order).expect("shuffle is a permutation")
    }

    pub fn agents(&self) -> &[usize] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Serial index of `agent` (0 = first).
    pub fn position(&self, agent: usize) -> usize {
        self.position[agent]
    }
}

/// Rule restricting which team sizes a partition may use.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SizeRule {
    /// Any sizes in `[lo, hi]`.
    Interval(usize, usize),
    /// Exactly this multiset of sizes.
    Multiset(Vec<usize>),
}

impl SizeRule {
    pub fn schedule_of(game: &Game) -> Self {
        SizeRule::Multiset(game.schedule())
    }

    pub fn interval_of(game: &Game) -> Self {
        SizeRule::Interval(game.k_min(), game.k_max())
    }
}

/// Number of partitions of `n` agents allowed by `rule`, saturating.
pub fn count_partitions(n: usize, rule: &SizeRule) -> u128 {
    let binom = binomial_table(n);
    match rule {
        SizeRule::Interval(lo, hi) => {
            let mut count = vec![0u128; n + 1];
            count[0] = 1;
            for m in 1..=n {
                let mut total = 0u128;
                for s in *lo.max(&1)..=(*hi).min(m) {
                    total = total.saturating_add(binom[m - 1][s - 1].saturating_mul(count[m - s]));
                }
                count[m] = total;
            }
            count[n]
        }
        SizeRule::Multiset(sizes) => {
            if sizes.iter().sum::<usize>() != n {
                return 0;
            }
            let mut counts = size_counts(sizes);
            let mut memo = HashMap::new();
            count_multiset(n, &mut counts, &binom, &mut memo)
        }
    }
}

fn count_multiset(
    m: usize,
    counts: &mut Vec<(usize, usize)>,
    binom: &[Vec<u128>],
    memo: &mut HashMap<Vec<(usize, usize)>, u128>,
) -> u128 {
    if m == 0 {
        return 1;
    }
    if let Some(&c) = memo.get(counts.as_slice()) {
        return c;
    }
    let mut total = 0u128;
    for idx in 0..counts.len() {
        let (s, c) = counts[idx];
        if c == 0 || s > m {
            continue;
        }
        counts[idx].1 -= 1;
        let sub = count_multiset(m - s, counts, binom, memo);
        counts[idx].1 += 1;
        total = total.saturating_add(binom[m - 1][s - 1].saturating_mul(sub));
    }
    memo.insert(counts.clone(), total);
    total
}

pub(crate) fn size_counts(sizes: &[usize]) -> Vec<(usize, usize)> {
    let mut sorted = sizes.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let mut out: Vec<(usize, usize)> = Vec::new();
    for s in sorted {
        match out.last_mut() {
            Some((size, count)) if *size == s => *count += 1,
            _ => out.push((s, 1)),
        }
    }
    out
}

fn binomial_table(n: usize) -> Vec<Vec<u128>> {
    let mut t = vec![vec![0u128; n + 1]; n + 1];
    for m in 0..=n {
        t[m][0] = 1;
        for k in 1..=m {
            t[m][k] = t[m - 1][k - 1].saturating_add(if k < m { t[m - 1][k] } else { 0 });
        }
    }
    t
}

/// Visits every partition of `0..n` allowed by `rule` exactly once.
///
/// Teams are built by placing the lowest unassigned agent first, so each
/// partition is produced in canonical form (teams ordered by smallest
/// member, members ascending).
pub fn for_each_partition<F: FnMut(&[Vec<usize>])>(n: usize, rule: &SizeRule, mut visit: F) {
    let mut teams: Vec<Vec<usize>> = Vec::new();
    let mut free = vec![true; n];
    match rule {
        SizeRule::Interval(lo, hi) => {
            let mut sizes: Vec<(usize, usize)> = ((*lo).max(1)..=*hi).rev().map(|s| (s, usize::MAX)).collect();
            enumerate(n, n, &mut free, &mut teams, &mut sizes, Some((*lo, *hi)), &mut visit);
        }
        SizeRule::Multiset(sizes) => {
            if sizes.iter().sum::<usize>() != n {
                return;
            }
            let mut counts = size_counts(sizes);
            enumerate(n, n, &mut free, &mut teams, &mut counts, None, &mut visit);
        }
    }
}

fn enumerate<F: FnMut(&[Vec<usize>])>(
    n: usize,
    remaining: usize,
    free: &mut [bool],
    teams: &mut Vec<Vec<usize>>,
    sizes: &mut [(usize, usize)],
    interval: Option<(usize, usize)>,
    visit: &mut F,
) {
    let Some(first) = free.iter().position(|&f| f) else {
        visit(teams);
        return;
    };
    // Smaller sizes first.
    for idx in (0..sizes.len()).rev() {
        let (s, c) = sizes[idx];
        if c == 0 || s > remaining {
            continue;
        }
        if let Some((lo, hi)) = interval {
            if !remainder_feasible(remaining - s, lo, hi) {
                continue;
            }
        }
        if c != usize::MAX {
            sizes[idx].1 -= 1;
        }
        free[first] = false;
        let candidates: Vec<usize> = (first + 1..n).filter(|&a| free[a]).collect();
        let mut team = vec![first];
        choose(&candidates, 0, s - 1, &mut team, &mut |team| {
            for &a in &team[1..] {
                free[a] = false;
            }
            teams.push(team.to_vec());
            enumerate(n, remaining - s, free, teams, sizes, interval, visit);
            teams.pop();
            for &a in &team[1..] {
                free[a] = true;
            }
        });
        free[first] = true;
        sizes[idx].1 = c;
    }
}

/// Calls `f` with `prefix` extended by every `k`-combination of
/// `pool[start..]`, in lexicographic order.
pub(crate) fn choose<F: FnMut(&[usize])>(
    pool: &[usize],
    start: usize,
    k: usize,
    prefix: &mut Vec<usize>,
    f: &mut F,
) {
    if k == 0 {
        f(prefix);
        return;
    }
    if pool.len() < start + k {
        return;
    }
    for idx in start..=pool.len() - k {
        prefix.push(pool[idx]);
        choose(pool, idx + 1, k - 1, prefix, f);
        prefix.pop();
    }
}
