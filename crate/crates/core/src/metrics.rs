//! Evaluation of leader strategies: utility against the quantal and the
//! best-responding follower, gain and exploitability relative to the game
//! value, and sweeps over the follower's rationality.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{BehavioralStrategy, Game, Player};
use crate::quantal::{
    best_response_unchecked, leader_favoring_unchecked, quantal_response_unchecked, QuantalModel,
};
use crate::regret::{solve_nash, RegretConfig};

/// Value of a zero-sum game bracketed by the two sides of a self-play run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameValue {
    /// Midpoint of `lower` and `upper`.
    pub value: f64,
    /// What the leader's average guarantees against any follower.
    pub lower: f64,
    /// What the follower's average concedes at most.
    pub upper: f64,
    /// Largest epsilon-best-response certificate of the two averages.
    pub gap: f64,
    pub iterations: usize,
}

/// Iteration cap and tolerance of the reference self-play run.
pub fn default_value_config() -> RegretConfig {
    RegretConfig::new(200_000).with_tolerance(1e-6)
}

/// Game value from a self-play run; zero-sum games only.
pub fn game_value(game: &Game, config: &RegretConfig) -> Result<GameValue> {
    require_zero_sum(game, "game value")?;
    let report = solve_nash(game, config)?;
    let follower = report.follower.as_ref().expect("self-play returns both averages");
    let lower = best_response_unchecked(game, &report.strategy, Player::Follower).profile_value[0];
    let upper = best_response_unchecked(game, follower, Player::Leader).value;
    Ok(GameValue {
        value: 0.5 * (lower + upper),
        lower,
        upper,
        gap: report.certificate,
        iterations: report.iterations,
    })
}

fn require_zero_sum(game: &Game, what: &'static str) -> Result<()> {
    if game.is_zero_sum() {
        Ok(())
    } else {
        Err(Error::NotZeroSum(what))
    }
}

/// Largest amount either player gains by deviating from the profile.
pub fn nash_gap(game: &Game, leader: &BehavioralStrategy, follower: &BehavioralStrategy) -> Result<f64> {
    game.check_strategy(Player::Leader, leader)?;
    game.check_strategy(Player::Follower, follower)?;
    Ok(nash_gap_unchecked(game, leader, follower))
}

pub(crate) fn nash_gap_unchecked(game: &Game, leader: &BehavioralStrategy, follower: &BehavioralStrategy) -> f64 {
    let current = game.expected_utility_unchecked(leader, follower);
    let el = best_response_unchecked(game, follower, Player::Leader).value - current[0];
    let ef = best_response_unchecked(game, leader, Player::Follower).value - current[1];
    el.max(ef)
}

pub fn eu_vs_qr(game: &Game, leader: &BehavioralStrategy, model: &QuantalModel) -> Result<f64> {
    let follower = crate::quantal::quantal_response(game, leader, model)?;
    Ok(game.expected_utility_unchecked(leader, &follower)[0])
}

pub(crate) fn eu_vs_qr_unchecked(game: &Game, leader: &BehavioralStrategy, model: &QuantalModel) -> f64 {
    let follower = quantal_response_unchecked(game, leader, model);
    game.expected_utility_unchecked(leader, &follower)[0]
}

/// How much a rational opponent of `player` takes beyond the game value.
/// `game_value` is the leader's value.
pub fn exploitability(game: &Game, strategy: &BehavioralStrategy, player: Player, game_value: f64) -> Result<f64> {
    require_zero_sum(game, "exploitability")?;
    game.check_strategy(player, strategy)?;
    let br = best_response_unchecked(game, strategy, player.opponent());
    Ok(match player {
        Player::Leader => game_value - br.profile_value[0],
        Player::Follower => br.profile_value[0] - game_value,
    })
}

/// Leader utility against the quantal response, above the game value.
pub fn gain(game: &Game, strategy: &BehavioralStrategy, model: &QuantalModel, game_value: f64) -> Result<f64> {
    require_zero_sum(game, "gain")?;
    Ok(eu_vs_qr(game, strategy, model)? - game_value)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneralSumEvaluation {
    pub eu_vs_qr: f64,
    /// Against a best response that breaks ties in the leader's favor.
    pub eu_vs_br: f64,
}

pub fn evaluate_general_sum(
    game: &Game,
    leader: &BehavioralStrategy,
    model: &QuantalModel,
) -> Result<GeneralSumEvaluation> {
    let eu_vs_qr = eu_vs_qr(game, leader, model)?;
    let eu_vs_br = leader_favoring_unchecked(game, leader).profile_value[0];
    Ok(GeneralSumEvaluation { eu_vs_qr, eu_vs_br })
}

/// Every metric of one leader strategy. Gain and exploitability are only
/// defined for zero-sum games with a known value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub eu_vs_qr: f64,
    pub eu_vs_br: f64,
    pub gain: Option<f64>,
    pub exploitability: Option<f64>,
}

pub fn evaluate(
    game: &Game,
    leader: &BehavioralStrategy,
    model: &QuantalModel,
    game_value: Option<f64>,
) -> Result<Evaluation> {
    game.check_strategy(Player::Leader, leader)?;
    model.check_action_counts(&game.action_counts(Player::Follower))?;
    Ok(evaluate_unchecked(game, leader, |g, l| eu_vs_qr_unchecked(g, l, model), game_value))
}

fn evaluate_unchecked(
    game: &Game,
    leader: &BehavioralStrategy,
    vs_qr: impl Fn(&Game, &BehavioralStrategy) -> f64,
    game_value: Option<f64>,
) -> Evaluation {
    let eu_vs_qr = vs_qr(game, leader);
    if game.is_zero_sum() {
        let eu_vs_br = best_response_unchecked(game, leader, Player::Follower).profile_value[0];
        Evaluation {
            eu_vs_qr,
            eu_vs_br,
            gain: game_value.map(|v| eu_vs_qr - v),
            exploitability: game_value.map(|v| v - eu_vs_br),
        }
    } else {
        let eu_vs_br = leader_favoring_unchecked(game, leader).profile_value[0];
        Evaluation { eu_vs_qr, eu_vs_br, gain: None, exploitability: None }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub strategy: String,
    pub lambda: f64,
    pub evaluation: Evaluation,
}

/// Evaluates each named strategy against logit followers of every given
/// rationality. `lambda = 0` is the uniformly random follower.
pub fn lambda_sweep(
    game: &Game,
    strategies: &[(String, BehavioralStrategy)],
    lambdas: &[f64],
    game_value: Option<f64>,
) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::with_capacity(strategies.len() * lambdas.len());
    for (name, s) in strategies {
        game.check_strategy(Player::Leader, s)?;
        for &lambda in lambdas {
            let evaluation = if lambda == 0.0 {
                let uniform = game.uniform_strategy(Player::Follower);
                evaluate_unchecked(game, s, |g, l| g.expected_utility_unchecked(l, &uniform)[0], game_value)
            } else {
                evaluate(game, s, &QuantalModel::logit(lambda)?, game_value)?
            };
            rows.push(SweepRow { strategy: name.clone(), lambda, evaluation });
        }
    }
    Ok(rows)
}
