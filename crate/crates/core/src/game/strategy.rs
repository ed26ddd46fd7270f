use serde::{Deserialize, Serialize};

use super::{ExtensiveFormGame, Player, Sequence};
use crate::error::{Error, Result};

/// Tolerance on a distribution summing to one.
pub const DISTRIBUTION_TOLERANCE: f64 = 1e-9;

pub(crate) fn check_distribution(p: &[f64]) -> std::result::Result<(), String> {
    if p.is_empty() {
        return Err("empty distribution".into());
    }
    if let Some(v) = p.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
        return Err(format!("probability {v} is not a nonnegative number"));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > DISTRIBUTION_TOLERANCE {
        return Err(format!("probabilities sum to {s}"));
    }
    Ok(())
}

/// One distribution over actions per information set of a single player.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BehavioralStrategy {
    probs: Vec<Vec<f64>>,
}

impl BehavioralStrategy {
    pub fn new(probs: Vec<Vec<f64>>) -> Self {
        Self { probs }
    }

    /// Normal-form mixed strategy (a single information set).
    pub fn mixed(probs: Vec<f64>) -> Self {
        Self { probs: vec![probs] }
    }

    pub fn uniform(action_counts: &[usize]) -> Self {
        Self {
            probs: action_counts
                .iter()
                .map(|&n| vec![1.0 / n as f64; n])
                .collect(),
        }
    }

    pub fn num_infosets(&self) -> usize {
        self.probs.len()
    }

    pub fn infoset(&self, i: usize) -> &[f64] {
        &self.probs[i]
    }

    pub fn infoset_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.probs[i]
    }

    pub fn probs(&self) -> &[Vec<f64>] {
        &self.probs
    }

    pub fn into_probs(self) -> Vec<Vec<f64>> {
        self.probs
    }

    /// Probabilities of all infosets concatenated in index order.
    pub fn flatten(&self) -> Vec<f64> {
        self.probs.iter().flatten().copied().collect()
    }

    pub fn check(&self, action_counts: &[usize]) -> Result<()> {
        if self.probs.len() != action_counts.len() {
            return Err(Error::Domain(format!(
                "strategy covers {} infosets, player has {}",
                self.probs.len(),
                action_counts.len()
            )));
        }
        for (i, (p, &n)) in self.probs.iter().zip(action_counts).enumerate() {
            if p.len() != n {
                return Err(Error::Domain(format!(
                    "infoset {i}: {} probabilities for {n} actions",
                    p.len()
                )));
            }
            check_distribution(p).map_err(|e| Error::Domain(format!("infoset {i}: {e}")))?;
        }
        Ok(())
    }

    /// Largest absolute difference to `other` over all entries.
    pub fn max_abs_diff(&self, other: &BehavioralStrategy) -> f64 {
        self.probs
            .iter()
            .flatten()
            .zip(other.probs.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Pointwise mixture `alpha * self + (1 - alpha) * other`.
    pub fn pointwise_mix(&self, other: &BehavioralStrategy, alpha: f64) -> BehavioralStrategy {
        BehavioralStrategy {
            probs: self
                .probs
                .iter()
                .zip(&other.probs)
                .map(|(a, b)| {
                    a.iter()
                        .zip(b)
                        .map(|(x, y)| alpha * x + (1.0 - alpha) * y)
                        .collect()
                })
                .collect(),
        }
    }
}

/// Sequence-form representation of one player's strategy: the probability
/// mass the player puts on each of her action sequences. The empty
/// sequence always has weight one.
#[derive(Clone, Debug, PartialEq)]
pub struct RealizationPlan {
    player: Player,
    /// `weights[I][a]` is the mass on `seq(I) a`.
    weights: Vec<Vec<f64>>,
}

impl RealizationPlan {
    pub fn from_strategy(
        game: &ExtensiveFormGame,
        player: Player,
        strategy: &BehavioralStrategy,
    ) -> Result<Self> {
        strategy.check(&game.action_counts(player))?;
        let mut weights: Vec<Vec<f64>> = game.action_counts(player).iter().map(|&n| vec![0.0; n]).collect();
        for &i in game.sequence_order(player) {
            let info = game.infoset(player, i);
            let base = match info.parent_sequence {
                None => 1.0,
                Some(s) => weights[s.infoset][s.action],
            };
            for (w, p) in weights[i].iter_mut().zip(strategy.infoset(i)) {
                *w = base * p;
            }
        }
        Ok(Self { player, weights })
    }

    pub fn new(player: Player, weights: Vec<Vec<f64>>) -> Self {
        Self { player, weights }
    }

    pub fn player(&self) -> Player {
        self.player
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    /// Mass on a sequence; `None` is the empty sequence.
    pub fn weight(&self, seq: Option<Sequence>) -> f64 {
        match seq {
            None => 1.0,
            Some(s) => self.weights[s.infoset][s.action],
        }
    }

    /// Mass flowing into infoset `i` (the weight of its parent sequence).
    pub fn infoset_reach(&self, game: &ExtensiveFormGame, i: usize) -> f64 {
        self.weight(game.infoset(self.player, i).parent_sequence)
    }

    /// Checks bounds and flow conservation within `tol`.
    pub fn check(&self, game: &ExtensiveFormGame, tol: f64) -> Result<()> {
        let counts = game.action_counts(self.player);
        if self.weights.len() != counts.len()
            || self.weights.iter().zip(&counts).any(|(w, &n)| w.len() != n)
        {
            return Err(Error::Domain("realization plan shape does not match the game".into()));
        }
        for (i, w) in self.weights.iter().enumerate() {
            if w.iter().any(|v| !(*v >= -tol && *v <= 1.0 + tol)) {
                return Err(Error::Domain(format!("infoset {i}: weight outside [0, 1]")));
            }
            let inflow = self.infoset_reach(game, i);
            let outflow: f64 = w.iter().sum();
            if (inflow - outflow).abs() > tol {
                return Err(Error::Domain(format!(
                    "infoset {i}: flow {outflow} does not match parent mass {inflow}"
                )));
            }
        }
        Ok(())
    }

    /// Converts back to behavioral form. Infosets the plan never reaches get
    /// a uniform distribution; their indices are returned alongside.
    pub fn to_strategy(&self) -> (BehavioralStrategy, Vec<usize>) {
        let mut fallback = Vec::new();
        let probs = self
            .weights
            .iter()
            .enumerate()
            .map(|(i, w)| {
                let total: f64 = w.iter().sum();
                if total > 0.0 {
                    w.iter().map(|v| v / total).collect()
                } else {
                    fallback.push(i);
                    vec![1.0 / w.len() as f64; w.len()]
                }
            })
            .collect();
        (BehavioralStrategy::new(probs), fallback)
    }

    /// Convex combination `alpha * self + (1 - alpha) * other`.
    pub fn mix(&self, other: &RealizationPlan, alpha: f64) -> RealizationPlan {
        RealizationPlan {
            player: self.player,
            weights: self
                .weights
                .iter()
                .zip(&other.weights)
                .map(|(a, b)| a.iter().zip(b).map(|(x, y)| alpha * x + (1.0 - alpha) * y).collect())
                .collect(),
        }
    }
}
