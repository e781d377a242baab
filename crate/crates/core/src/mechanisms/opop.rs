use crate::error::Result;
use crate::model::{Game, Partition, SerialOrder};

use super::{check_order, favorite};

/// Value to unassigned agent `i` of joining a partial team with `vacancies`
/// open slots: the current members' value plus the mean value of the other
/// unassigned agents for each slot left after `i` joins.
pub fn incomplete_team_value(game: &Game, i: usize, members: &[usize], vacancies: usize, unassigned: &[usize]) -> f64 {
    let row = game.row(i);
    let current: f64 = members.iter().map(|&j| row[j]).sum();
    if vacancies <= 1 {
        return current;
    }
    let (sum, count) = unassigned
        .iter()
        .filter(|&&j| j != i)
        .fold((0.0, 0usize), |(s, c), &j| (s + row[j], c + 1));
    let mean = if count == 0 { 0.0 } else { sum / count as f64 };
    current + (vacancies - 1) as f64 * mean
}

/// One-player-one-pick draft.
///
/// The first `T` agents in order captain the scheduled teams. Walking the
/// full order once: an unassigned agent joins its favorite incomplete team
/// and then, if a slot remains, picks its favorite unassigned agent; an
/// assigned agent (captain or earlier pick) whose team has a vacancy picks
/// once. Every agent acts at most once.
pub fn opop_draft(game: &Game, order: &SerialOrder) -> Result<Partition> {
    check_order(game, order)?;
    let n = game.n();
    let schedule = game.schedule();
    let t_count = schedule.len();
    let mut teams: Vec<Vec<usize>> = order.agents()[..t_count].iter().map(|&c| vec![c]).collect();
    let mut team_of: Vec<Option<usize>> = vec![None; n];
    for (t, team) in teams.iter().enumerate() {
        team_of[team[0]] = Some(t);
    }
    let mut unassigned: Vec<usize> = order.agents()[t_count..].to_vec();
    unassigned.sort_unstable();

    for &agent in order.agents() {
        let t = match team_of[agent] {
            Some(t) => t,
            None => {
                let mut best: Option<(usize, f64)> = None;
                for (t, team) in teams.iter().enumerate() {
                    let vacancies = schedule[t] - team.len();
                    if vacancies == 0 {
                        continue;
                    }
                    let value = incomplete_team_value(game, agent, team, vacancies, &unassigned);
                    if best.is_none_or(|(_, v)| value > v) {
                        best = Some((t, value));
                    }
                }
                let (t, _) = best.expect("vacancies match the unassigned count");
                teams[t].push(agent);
                team_of[agent] = Some(t);
                unassigned.retain(|&j| j != agent);
                t
            }
        };
        if teams[t].len() < schedule[t] {
            if let Some(pick) = favorite(game, agent, unassigned.iter().copied()) {
                teams[t].push(pick);
                team_of[pick] = Some(t);
                unassigned.retain(|&j| j != pick);
            }
        }
    }
    Ok(Partition::new(teams))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn inefficient_trace() {
        let p = opop_draft(&fixtures::opop_inefficient(), &SerialOrder::identity(6)).unwrap();
        assert_eq!(p.teams(), &[vec![0, 2, 5], vec![1, 3, 4]]);
    }

    #[test]
    fn team_value_examples() {
        // i = 0 values C(2) at 4 and the unassigned agents 3, 4 at 2 and 6.
        let g = Game::new(
            vec![
                vec![0.0, 0.0, 4.0, 2.0, 6.0],
                vec![0.0; 5],
                vec![0.0; 5],
                vec![0.0; 5],
                vec![0.0; 5],
            ],
            1,
            5,
        )
        .unwrap();
        assert_eq!(incomplete_team_value(&g, 0, &[2], 2, &[0, 3, 4]), 8.0);
        assert_eq!(incomplete_team_value(&g, 0, &[2], 1, &[0, 3, 4]), 4.0);

        let flat = Game::from_flat(6, vec![3.0; 36], 3, 3).unwrap();
        assert_eq!(
            incomplete_team_value(&flat, 2, &[0], 2, &[2, 3, 4]),
            incomplete_team_value(&flat, 2, &[1], 2, &[2, 3, 4])
        );
    }
}
