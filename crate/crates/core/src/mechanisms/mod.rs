//! Draft-style mechanisms and the common mechanism selector.
//!
//! Ties always go to the smallest agent index, or for sets of agents to the
//! lexicographically smallest set.

mod hbs;
mod opop;
mod rsd;

use std::fmt;
use std::str::FromStr;

pub use hbs::hbs_draft;
pub use opop::{incomplete_team_value, opop_draft};
pub use rsd::rsd;

use crate::aceei::{aceei_tf, AceeiParams};
use crate::error::{Error, Result};
use crate::model::{Game, Partition, SerialOrder};

/// Agent from `candidates` that `picker` values most; smallest index on ties.
pub(crate) fn favorite(game: &Game, picker: usize, candidates: impl IntoIterator<Item = usize>) -> Option<usize> {
    let row = game.row(picker);
    let mut best: Option<usize> = None;
    for j in candidates {
        best = match best {
            Some(b) if row[j] < row[b] || (row[j] == row[b] && j > b) => Some(b),
            _ => Some(j),
        };
    }
    best
}

pub(crate) fn check_order(game: &Game, order: &SerialOrder) -> Result<()> {
    if order.len() != game.n() {
        return Err(Error::InvalidOrder(format!(
            "order has {} agents, game has {}",
            order.len(),
            game.n()
        )));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MechanismKind {
    Rsd,
    Hbs,
    Opop,
    Aceei,
}

impl MechanismKind {
    pub const ALL: [MechanismKind; 4] = [Self::Rsd, Self::Hbs, Self::Opop, Self::Aceei];

    pub fn name(self) -> &'static str {
        match self {
            Self::Rsd => "rsd",
            Self::Hbs => "hbs",
            Self::Opop => "opop",
            Self::Aceei => "aceei",
        }
    }
}

impl fmt::Display for MechanismKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MechanismKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "rsd" => Ok(Self::Rsd),
            "hbs" => Ok(Self::Hbs),
            "opop" => Ok(Self::Opop),
            "aceei" | "aceei-tf" | "aceei_tf" => Ok(Self::Aceei),
            other => Err(Error::Config(format!("unknown mechanism `{other}`"))),
        }
    }
}

/// A mechanism together with its parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mechanism {
    pub kind: MechanismKind,
    pub aceei: AceeiParams,
}

impl Mechanism {
    pub fn new(kind: MechanismKind) -> Self {
        Self {
            kind,
            aceei: AceeiParams::default(),
        }
    }

    /// Runs on reported preferences. `seed` drives internal randomness
    /// (A-CEEI-TF budgets) and is ignored by the drafts.
    pub fn run(&self, game: &Game, order: &SerialOrder, seed: u64) -> Result<Partition> {
        match self.kind {
            MechanismKind::Rsd => rsd(game, order),
            MechanismKind::Hbs => hbs_draft(game, order),
            MechanismKind::Opop => opop_draft(game, order),
            MechanismKind::Aceei => aceei_tf(game, order, seed, &self.aceei),
        }
    }
}

impl From<MechanismKind> for Mechanism {
    fn from(kind: MechanismKind) -> Self {
        Self::new(kind)
    }
}
