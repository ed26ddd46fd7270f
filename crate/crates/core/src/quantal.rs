//! Response oracles: canonical quantal responses (logit, ordering-based or
//! a custom generator), the counterfactual quantal response for trees,
//! exact best responses and epsilon-best-response certificates.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::game::{BehavioralStrategy, ExtensiveFormGame, Game, NormalFormGame, Player};

/// Relative tolerance under which two action values count as tied.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Strictly positive, increasing function mapping an action value to an
/// unnormalized response weight.
#[derive(Clone)]
pub struct Generator {
    name: String,
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl Generator {
    pub fn new(name: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self { name: name.into(), f: Arc::new(f) }
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.f)(x)
    }
}

impl fmt::Debug for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Generator({})", self.name)
    }
}

/// How the bounded-rational follower turns action values into a
/// distribution.
#[derive(Clone, Debug)]
pub enum QuantalModel {
    /// `q(x) = exp(lambda * x)`.
    Logit { lambda: f64 },
    /// Probabilities assigned by rank of the action value. `None` uses the
    /// default 0.5 / 0.3 / rest-uniform weights for the action count.
    OrderingBased { weights: Option<Vec<f64>> },
    Custom(Generator),
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum ModelJson {
    Logit {
        lambda: f64,
    },
    OrderingBased {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        weights: Option<Vec<f64>>,
    },
}

impl Serialize for QuantalModel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            QuantalModel::Logit { lambda } => ModelJson::Logit { lambda: *lambda }.serialize(s),
            QuantalModel::OrderingBased { weights } => {
                ModelJson::OrderingBased { weights: weights.clone() }.serialize(s)
            }
            QuantalModel::Custom(g) => Err(serde::ser::Error::custom(format!(
                "custom generator `{}` cannot be serialized",
                g.name
            ))),
        }
    }
}

impl<'de> Deserialize<'de> for QuantalModel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let m = match ModelJson::deserialize(d)? {
            ModelJson::Logit { lambda } => QuantalModel::Logit { lambda },
            ModelJson::OrderingBased { weights } => QuantalModel::OrderingBased { weights },
        };
        m.validate().map_err(serde::de::Error::custom)?;
        Ok(m)
    }
}

/// Default rank weights: 0.5 for the best action, 0.3 for the second and
/// 0.2 shared by the rest. With two actions the first two weights are
/// renormalized.
pub fn default_ordering_weights(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![1.0],
        2 => vec![0.625, 0.375],
        _ => {
            let mut w = vec![0.5, 0.3];
            w.extend(std::iter::repeat(0.2 / (n - 2) as f64).take(n - 2));
            w
        }
    }
}

impl QuantalModel {
    pub fn logit(lambda: f64) -> Result<Self> {
        let m = QuantalModel::Logit { lambda };
        m.validate()?;
        Ok(m)
    }

    pub fn ordering_based() -> Self {
        QuantalModel::OrderingBased { weights: None }
    }

    pub fn ordering_with_weights(weights: Vec<f64>) -> Result<Self> {
        let m = QuantalModel::OrderingBased { weights: Some(weights) };
        m.validate()?;
        Ok(m)
    }

    pub fn custom(generator: Generator) -> Result<Self> {
        let m = QuantalModel::Custom(generator);
        m.validate()?;
        Ok(m)
    }

    /// The logit rationality parameter, if this is a logit model.
    pub fn lambda(&self) -> Option<f64> {
        match self {
            QuantalModel::Logit { lambda } => Some(*lambda),
            _ => None,
        }
    }

    /// Logit model with the rationality scaled by `factor`; other models
    /// are returned unchanged.
    pub fn scaled(&self, factor: f64) -> QuantalModel {
        match self {
            QuantalModel::Logit { lambda } => QuantalModel::Logit { lambda: lambda * factor },
            other => other.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            QuantalModel::Logit { lambda } => {
                if !(lambda.is_finite() && *lambda > 0.0) {
                    return Err(Error::InvalidModel(format!("lambda must be positive, got {lambda}")));
                }
            }
            QuantalModel::OrderingBased { weights: Some(w) } => {
                if w.is_empty() || w.iter().any(|x| !(*x >= 0.0)) {
                    return Err(Error::InvalidModel("ordering weights must be nonnegative".into()));
                }
                if w.windows(2).any(|p| p[1] > p[0]) {
                    return Err(Error::InvalidModel("ordering weights must be descending".into()));
                }
                let s: f64 = w.iter().sum();
                if (s - 1.0).abs() > 1e-9 {
                    return Err(Error::InvalidModel(format!("ordering weights sum to {s}")));
                }
            }
            QuantalModel::OrderingBased { weights: None } => {}
            QuantalModel::Custom(g) => {
                let mut prev = 0.0;
                for k in -400..=400 {
                    let x = k as f64 * 0.25;
                    let q = g.eval(x);
                    if !(q > 0.0 && q.is_finite()) {
                        return Err(Error::InvalidModel(format!(
                            "generator `{}` is not strictly positive at {x}",
                            g.name
                        )));
                    }
                    if q < prev {
                        return Err(Error::InvalidModel(format!(
                            "generator `{}` decreases at {x}",
                            g.name
                        )));
                    }
                    prev = q;
                }
            }
        }
        Ok(())
    }

    /// Checks that the model can respond at infosets with these action
    /// counts (explicit ordering weights fix the action count).
    pub fn check_action_counts(&self, counts: &[usize]) -> Result<()> {
        if let QuantalModel::OrderingBased { weights: Some(w) } = self {
            if let Some(n) = counts.iter().find(|&&n| n != w.len()) {
                return Err(Error::InvalidModel(format!(
                    "{} ordering weights for an infoset with {n} actions",
                    w.len()
                )));
            }
        }
        Ok(())
    }

    /// Response distribution over actions with the given values.
    pub fn respond(&self, values: &[f64]) -> Vec<f64> {
        match self {
            QuantalModel::Logit { lambda } => softmax(values, *lambda),
            QuantalModel::OrderingBased { weights } => {
                let w = match weights {
                    Some(w) if w.len() == values.len() => w.clone(),
                    _ => default_ordering_weights(values.len()),
                };
                rank_response(values, &w)
            }
            QuantalModel::Custom(g) => {
                let q: Vec<f64> = values.iter().map(|&v| g.eval(v)).collect();
                let s: f64 = q.iter().sum();
                q.into_iter().map(|x| x / s).collect()
            }
        }
    }
}

/// `exp(lambda * v)` normalized, computed with the maximum subtracted.
pub fn softmax(values: &[f64], lambda: f64) -> Vec<f64> {
    let m = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = values.iter().map(|v| (lambda * (v - m)).exp()).collect();
    let s: f64 = out.iter().sum();
    for o in &mut out {
        *o /= s;
    }
    out
}

/// Softmax-weighted average of `values`.
pub fn softmax_value(values: &[f64], lambda: f64) -> f64 {
    softmax(values, lambda).iter().zip(values).map(|(p, v)| p * v).sum()
}

fn tied(a: f64, b: f64) -> bool {
    (a - b).abs() <= TIE_TOLERANCE * a.abs().max(b.abs()).max(1.0)
}

/// Assigns `weights[k]` to the action ranked k-th by value; tied actions
/// share the average weight of the ranks they occupy.
fn rank_response(values: &[f64], weights: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    let mut out = vec![0.0; values.len()];
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && tied(values[idx[start]], values[idx[end]]) {
            end += 1;
        }
        let share = weights[start..end].iter().sum::<f64>() / (end - start) as f64;
        for &i in &idx[start..end] {
            out[i] = share;
        }
        start = end;
    }
    out
}

/// Principal branch of the Lambert W function for `x >= 0`, by 50 Newton
/// steps on `w e^w = x`.
pub fn lambert_w(x: f64) -> f64 {
    let mut w = if x < 1.0 { x } else { x.ln().max(0.5) };
    for _ in 0..50 {
        let e = w.exp();
        w -= (w * e - x) / (e * (w + 1.0));
    }
    w
}

/// Upper bound on `max(A) - softmax_lambda(A)` for `n >= 2` values with a
/// positive maximum: `W(1/e)/lambda + (n-2)/(lambda e)`.
pub fn softmax_gap_bound(n: usize, lambda: f64) -> f64 {
    let e = std::f64::consts::E;
    lambert_w(1.0 / e) / lambda + n.saturating_sub(2) as f64 / (lambda * e)
}

/// Canonical quantal response of the follower in a normal-form game.
pub fn nfg_quantal_response(
    game: &NormalFormGame,
    leader: &[f64],
    model: &QuantalModel,
) -> Result<Vec<f64>> {
    crate::game::check_mixed(leader, game.rows(), "leader")?;
    model.check_action_counts(&[game.cols()])?;
    Ok(model.respond(&game.follower_col_values(leader)))
}

/// Counterfactual quantal response: at every follower infoset, deepest
/// first, the model is applied to the follower's counterfactual action
/// values given the leader strategy and the follower's own play below.
pub fn clqr(
    game: &ExtensiveFormGame,
    leader: &BehavioralStrategy,
    model: &QuantalModel,
) -> Result<BehavioralStrategy> {
    leader.check(&game.action_counts(Player::Leader))?;
    model.check_action_counts(&game.action_counts(Player::Follower))?;
    Ok(clqr_unchecked(game, leader, model))
}

pub(crate) fn clqr_unchecked(
    game: &ExtensiveFormGame,
    leader: &BehavioralStrategy,
    model: &QuantalModel,
) -> BehavioralStrategy {
    game.respond(leader, Player::Follower, |_, v, _| model.respond(v))
        .strategy
}

/// Quantal response of the follower in either kind of game.
pub fn quantal_response(
    game: &Game,
    leader: &BehavioralStrategy,
    model: &QuantalModel,
) -> Result<BehavioralStrategy> {
    game.check_strategy(Player::Leader, leader)?;
    model.check_action_counts(&game.action_counts(Player::Follower))?;
    Ok(quantal_response_unchecked(game, leader, model))
}

pub(crate) fn quantal_response_unchecked(
    game: &Game,
    leader: &BehavioralStrategy,
    model: &QuantalModel,
) -> BehavioralStrategy {
    match game {
        Game::Normal(g) => {
            BehavioralStrategy::mixed(model.respond(&g.follower_col_values(leader.infoset(0))))
        }
        Game::Extensive(g) => clqr_unchecked(g, leader, model),
    }
}

/// Uniformly random follower, the zero-rationality limit of the logit model.
pub fn uniform_response(game: &Game) -> BehavioralStrategy {
    game.uniform_strategy(Player::Follower)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BestResponse {
    pub strategy: BehavioralStrategy,
    /// Utility of the responding player.
    pub value: f64,
    /// Utilities of (leader, follower) under the resulting profile.
    pub profile_value: [f64; 2],
}

fn argmax_lowest(values: &[f64]) -> usize {
    let m = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    values.iter().position(|&v| tied(v, m) || v >= m).unwrap_or(0)
}

fn one_hot(n: usize, k: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[k] = 1.0;
    v
}

/// Picks, among actions tied for the best responder value, the one that is
/// best for the other player.
fn favoring_choice(own: &[f64], other: &[f64]) -> usize {
    let m = own.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut best: Option<usize> = None;
    for (a, &v) in own.iter().enumerate() {
        if tied(v, m) || v >= m {
            match best {
                Some(b) if other[a] <= other[b] => {}
                _ => best = Some(a),
            }
        }
    }
    best.unwrap_or(0)
}

/// Exact pure best response of `player` to the opponent's strategy; ties go
/// to the lowest action index.
pub fn best_response(game: &Game, opponent: &BehavioralStrategy, player: Player) -> Result<BestResponse> {
    game.check_strategy(player.opponent(), opponent)?;
    Ok(best_response_unchecked(game, opponent, player))
}

pub(crate) fn best_response_unchecked(
    game: &Game,
    opponent: &BehavioralStrategy,
    player: Player,
) -> BestResponse {
    match game {
        Game::Normal(g) => {
            let values = match player {
                Player::Leader => g.leader_row_values(opponent.infoset(0)),
                Player::Follower => g.follower_col_values(opponent.infoset(0)),
            };
            let k = argmax_lowest(&values);
            let pure = one_hot(values.len(), k);
            let profile_value = match player {
                Player::Leader => g.expected_utility_unchecked(&pure, opponent.infoset(0)),
                Player::Follower => g.expected_utility_unchecked(opponent.infoset(0), &pure),
            };
            BestResponse {
                strategy: BehavioralStrategy::mixed(pure),
                value: profile_value[player.index()],
                profile_value,
            }
        }
        Game::Extensive(g) => {
            let r = g.respond(opponent, player, |_, v, _| one_hot(v.len(), argmax_lowest(v)));
            BestResponse { value: r.value[player.index()], profile_value: r.value, strategy: r.strategy }
        }
    }
}

/// Follower best response that breaks ties in the leader's favor.
pub fn leader_favoring_best_response(game: &Game, leader: &BehavioralStrategy) -> Result<BestResponse> {
    game.check_strategy(Player::Leader, leader)?;
    Ok(leader_favoring_unchecked(game, leader))
}

pub(crate) fn leader_favoring_unchecked(game: &Game, leader: &BehavioralStrategy) -> BestResponse {
    match game {
        Game::Normal(g) => {
            let x = leader.infoset(0);
            let k = favoring_choice(&g.follower_col_values(x), &g.leader_col_values(x));
            let pure = one_hot(g.cols(), k);
            let profile_value = g.expected_utility_unchecked(x, &pure);
            BestResponse { strategy: BehavioralStrategy::mixed(pure), value: profile_value[1], profile_value }
        }
        Game::Extensive(g) => {
            let r = g.respond(leader, Player::Follower, |_, own, other| {
                one_hot(own.len(), favoring_choice(own, other))
            });
            BestResponse { value: r.value[1], profile_value: r.value, strategy: r.strategy }
        }
    }
}

/// How much `player` could gain by deviating from the profile:
/// best-response value minus current value.
pub fn epsilon_br_certificate(
    game: &Game,
    leader: &BehavioralStrategy,
    follower: &BehavioralStrategy,
    player: Player,
) -> Result<f64> {
    let current = game.expected_utility(leader, follower)?[player.index()];
    let opponent = match player {
        Player::Leader => follower,
        Player::Follower => leader,
    };
    Ok(best_response_unchecked(game, opponent, player).value - current)
}
