use crate::error::Result;
use crate::model::{Game, Partition, SerialOrder};

use super::check_order;

/// Random serial dictatorship under a fixed order.
///
/// The `t`-th dictator receives the `t`-th entry of the descending size
/// schedule and takes its top `size - 1` unassigned agents.
pub fn rsd(game: &Game, order: &SerialOrder) -> Result<Partition> {
    check_order(game, order)?;
    let n = game.n();
    let schedule = game.schedule();
    let mut assigned = vec![false; n];
    let mut teams = Vec::with_capacity(schedule.len());
    for &dictator in order.agents() {
        if assigned[dictator] {
            continue;
        }
        let size = schedule[teams.len()];
        assigned[dictator] = true;
        let row = game.row(dictator);
        let mut pool: Vec<usize> = (0..n).filter(|&j| !assigned[j]).collect();
        pool.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(a.cmp(&b)));
        let mut team = vec![dictator];
        for &j in pool.iter().take(size - 1) {
            assigned[j] = true;
            team.push(j);
        }
        teams.push(team);
    }
    Ok(Partition::new(teams))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn cycle_game_first_dictator_takes_favorite() {
        let p = rsd(&fixtures::cycle4(), &SerialOrder::identity(4)).unwrap();
        assert_eq!(p.teams(), &[vec![0, 1], vec![2, 3]]);
    }

    #[test]
    fn grand_coalition_and_uniform_ties() {
        let g = fixtures::envy_table().with_bounds(6, 6).unwrap();
        let order = SerialOrder::new(vec![4, 2, 0, 1, 5, 3]).unwrap();
        assert_eq!(rsd(&g, &order).unwrap().teams(), &[vec![0, 1, 2, 3, 4, 5]]);

        let uniform = Game::from_flat(7, vec![1.0; 49], 3, 4).unwrap();
        let order = SerialOrder::new(vec![5, 6, 4, 3, 2, 1, 0]).unwrap();
        let p = rsd(&uniform, &order).unwrap();
        assert_eq!(p.team_of(5).unwrap(), &[0, 1, 2, 5]);
    }

    #[test]
    fn later_dictators_never_get_larger_teams() {
        let g = Game::from_flat(17, (0..289).map(|x| (x * 37 % 11) as f64).collect(), 4, 5).unwrap();
        let order = SerialOrder::new((0..17).rev().collect()).unwrap();
        let p = rsd(&g, &order).unwrap();
        let mut by_turn: Vec<&Vec<usize>> = p.teams().iter().collect();
        by_turn.sort_by_key(|t| t.iter().map(|&a| order.position(a)).min());
        assert!(by_turn.windows(2).all(|w| w[0].len() >= w[1].len()));
    }
}
