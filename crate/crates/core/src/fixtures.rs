//! Small hand-built games with known outcomes. Agents `A..F` are `0..5`.

use crate::model::Game;

fn game(rows: [[f64; 6]; 6], k: usize) -> Game {
    Game::new(rows.iter().map(|r| r.to_vec()).collect(), k, k).expect("fixture is valid")
}

/// Every 3+3 partition leaves someone below a maximin share of 3.
pub fn maximin_table() -> Game {
    game(
        [
            [0.0, 1.0, 0.0, 2.0, 3.0, 2.0],
            [2.0, 0.0, 1.0, 0.0, 3.0, 2.0],
            [2.0, 2.0, 0.0, 1.0, 0.0, 3.0],
            [1.0, 2.0, 2.0, 0.0, 2.0, 1.0],
            [0.0, 2.0, 3.0, 1.0, 0.0, 2.0],
            [2.0, 1.0, 2.0, 2.0, 1.0, 0.0],
        ],
        3,
    )
}

/// No 3+3 partition has envy bounded by a single agent for everyone.
pub fn envy_table() -> Game {
    game(
        [
            [0.0, 0.0, 1.0, 2.0, 4.0, 8.0],
            [8.0, 0.0, 4.0, 2.0, 1.0, 0.0],
            [8.0, 0.0, 0.0, 4.0, 2.0, 1.0],
            [8.0, 1.0, 0.0, 0.0, 4.0, 2.0],
            [8.0, 2.0, 1.0, 0.0, 0.0, 4.0],
            [8.0, 4.0, 2.0, 1.0, 0.0, 0.0],
        ],
        3,
    )
}

/// Serpentine draft under `A..F` yields a Pareto-dominated partition.
pub fn hbs_inefficient() -> Game {
    game(
        [
            [0.0, 1.0, 8.0, 0.0, 6.0, 4.0],
            [1.0, 0.0, 10.0, 0.0, 5.0, 3.0],
            [0.0, 8.0, 0.0, 5.0, 4.0, 2.0],
            [0.0, 8.0, 5.0, 0.0, 4.0, 2.0],
            [8.0, 0.0, 5.0, 4.0, 0.0, 2.0],
            [8.0, 0.0, 5.0, 4.0, 2.0, 0.0],
        ],
        3,
    )
}

/// One-pick-one-pass draft under `A..F` yields a Pareto-dominated partition.
pub fn opop_inefficient() -> Game {
    game(
        [
            [0.0, 2.0, 10.0, 9.0, 6.0, 0.0],
            [0.0, 0.0, 10.0, 9.0, 2.0, 6.0],
            [0.0, 10.0, 0.0, 2.0, 6.0, 9.0],
            [10.0, 0.0, 2.0, 0.0, 6.0, 9.0],
            [10.0, 0.0, 2.0, 6.0, 0.0, 9.0],
            [0.0, 10.0, 2.0, 6.0, 9.0, 0.0],
        ],
        3,
    )
}

/// Instance on which agent `A` gains by reporting [`incentive_report`].
pub fn incentive_truth() -> Game {
    game(
        [
            [0.0, 5.0, 4.9, 7.0, 0.2, 0.0],
            [0.0, 0.0, 1.1, 1.6, 1.2, 1.3],
            [0.0, 1.1, 0.0, 1.6, 1.2, 1.3],
            [0.0, 1.1, 1.6, 0.0, 1.2, 1.3],
            [0.0, 1.1, 1.6, 1.2, 0.0, 1.3],
            [0.0, 1.1, 1.6, 1.2, 1.3, 0.0],
        ],
        3,
    )
}

/// Misreport of agent `A` for [`incentive_truth`].
pub fn incentive_report() -> [f64; 6] {
    [0.0, 5.0, 6.0, 7.0, 0.2, 0.0]
}

/// Four agents in a preference cycle, teams of two.
pub fn cycle4() -> Game {
    Game::new(
        vec![
            vec![0.0, 2.0, 1.0, 0.0],
            vec![0.0, 0.0, 2.0, 1.0],
            vec![1.0, 0.0, 0.0, 2.0],
            vec![2.0, 1.0, 0.0, 0.0],
        ],
        2,
        2,
    )
    .expect("fixture is valid")
}
