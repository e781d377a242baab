use crate::error::Result;
use crate::model::{Game, Partition, SerialOrder};

use super::{check_order, favorite};

/// Serpentine captain draft. The first `T` agents in order captain the `T`
/// scheduled teams; captains pick in order `1..T`, then `T..1`, alternating,
/// skipping full teams.
pub fn hbs_draft(game: &Game, order: &SerialOrder) -> Result<Partition> {
    check_order(game, order)?;
    let schedule = game.schedule();
    let t_count = schedule.len();
    let captains = &order.agents()[..t_count];
    let mut teams: Vec<Vec<usize>> = captains.iter().map(|&c| vec![c]).collect();
    let mut unassigned: Vec<usize> = order.agents()[t_count..].to_vec();
    unassigned.sort_unstable();
    let mut forward = true;
    while !unassigned.is_empty() {
        for step in 0..t_count {
            let t = if forward { step } else { t_count - 1 - step };
            if teams[t].len() >= schedule[t] || unassigned.is_empty() {
                continue;
            }
            let pick = favorite(game, captains[t], unassigned.iter().copied()).expect("nonempty pool");
            unassigned.retain(|&j| j != pick);
            teams[t].push(pick);
        }
        forward = !forward;
    }
    Ok(Partition::new(teams))
}
