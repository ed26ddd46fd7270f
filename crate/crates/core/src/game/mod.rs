//! Game representations and the strategy objects that live on them.
//!
//! Normal-form games are dense payoff matrices. Extensive-form games are
//! stored as index arrays in topological order (a parent always precedes its
//! children) with information sets referencing their member nodes, so every
//! tree quantity can be computed with one forward and one backward sweep.

mod efg;
mod json;
mod nfg;
mod strategy;
mod traverse;

pub use efg::{EfgBuilder, ExtensiveFormGame, Infoset, Node, NodeKind, Sequence};
pub use nfg::NormalFormGame;
pub(crate) use nfg::check_mixed;
pub use strategy::{BehavioralStrategy, RealizationPlan};
pub use traverse::{CounterfactualValues, Reach, Response};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The two strategic players. The leader is the rational player and the
/// follower is the one modelled by a quantal response.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Player {
    Leader,
    Follower,
}

impl Player {
    pub const BOTH: [Player; 2] = [Player::Leader, Player::Follower];

    pub fn index(self) -> usize {
        match self {
            Player::Leader => 0,
            Player::Follower => 1,
        }
    }

    pub fn opponent(self) -> Player {
        match self {
            Player::Leader => Player::Follower,
            Player::Follower => Player::Leader,
        }
    }
}

/// Either kind of game. Strategies for both kinds are [`BehavioralStrategy`]
/// values; a normal-form mixed strategy is the single-infoset case.
#[derive(Clone, Debug, PartialEq)]
pub enum Game {
    Normal(NormalFormGame),
    Extensive(ExtensiveFormGame),
}

impl Game {
    pub fn is_zero_sum(&self) -> bool {
        match self {
            Game::Normal(g) => g.is_zero_sum(),
            Game::Extensive(g) => g.is_zero_sum(),
        }
    }

    /// Number of actions at each of `player`'s information sets.
    pub fn action_counts(&self, player: Player) -> Vec<usize> {
        match self {
            Game::Normal(g) => match player {
                Player::Leader => vec![g.rows()],
                Player::Follower => vec![g.cols()],
            },
            Game::Extensive(g) => g.action_counts(player),
        }
    }

    pub fn uniform_strategy(&self, player: Player) -> BehavioralStrategy {
        BehavioralStrategy::uniform(&self.action_counts(player))
    }

    pub fn check_strategy(&self, player: Player, strategy: &BehavioralStrategy) -> Result<()> {
        strategy.check(&self.action_counts(player))
    }

    /// Expected utility of `(leader, follower)` for both players.
    pub fn expected_utility(
        &self,
        leader: &BehavioralStrategy,
        follower: &BehavioralStrategy,
    ) -> Result<[f64; 2]> {
        self.check_strategy(Player::Leader, leader)?;
        self.check_strategy(Player::Follower, follower)?;
        Ok(self.expected_utility_unchecked(leader, follower))
    }

    pub(crate) fn expected_utility_unchecked(
        &self,
        leader: &BehavioralStrategy,
        follower: &BehavioralStrategy,
    ) -> [f64; 2] {
        match self {
            Game::Normal(g) => g.expected_utility_unchecked(leader.infoset(0), follower.infoset(0)),
            Game::Extensive(g) => g.expected_utility_unchecked(leader, follower),
        }
    }

    /// Largest absolute payoff, used to scale tolerances.
    pub fn payoff_scale(&self) -> f64 {
        match self {
            Game::Normal(g) => g.payoff_scale(),
            Game::Extensive(g) => g.payoff_scale(),
        }
    }

    pub fn as_normal(&self) -> Option<&NormalFormGame> {
        match self {
            Game::Normal(g) => Some(g),
            Game::Extensive(_) => None,
        }
    }

    pub fn as_extensive(&self) -> Option<&ExtensiveFormGame> {
        match self {
            Game::Extensive(g) => Some(g),
            Game::Normal(_) => None,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        match self {
            Game::Normal(g) => g.to_json(),
            Game::Extensive(g) => g.to_json(),
        }
    }

    /// Parses either game JSON format, telling them apart by their fields.
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        if value.get("leader_payoffs").is_some() {
            Ok(Game::Normal(NormalFormGame::from_json(text)?))
        } else if value.get("nodes").is_some() {
            Ok(Game::Extensive(ExtensiveFormGame::from_json(text)?))
        } else {
            Err(Error::InvalidGame(
                "expected either `leader_payoffs` or `nodes`".into(),
            ))
        }
    }
}

impl From<NormalFormGame> for Game {
    fn from(g: NormalFormGame) -> Self {
        Game::Normal(g)
    }
}

impl From<ExtensiveFormGame> for Game {
    fn from(g: ExtensiveFormGame) -> Self {
        Game::Extensive(g)
    }
}
