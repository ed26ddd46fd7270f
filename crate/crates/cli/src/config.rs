//! Experiment configuration read from JSON.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use quantal_core::zoo::{self, GamutFamily, ReductionVariant};
use quantal_core::{GaConfig, Game, QuantalModel, RegretConfig};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub games: Vec<GameSpec>,
    #[serde(default)]
    pub algorithms: Vec<AlgorithmSpec>,
    /// Opponent model used for evaluation (and, scaled by
    /// `lambda_multiplier`, for training).
    #[serde(default = "default_model")]
    pub model: QuantalModel,
    /// Base seed for the stochastic solvers.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub value: ValueSettings,
    /// Opponent rationalities evaluated by `sweep-lambda`.
    #[serde(default = "default_lambdas")]
    pub lambdas: Vec<f64>,
    /// Mixing probabilities (and combination weights) of `p-profile`.
    #[serde(default = "default_p_grid")]
    pub p_grid: Vec<f64>,
    /// Iterations of every regret run made by `p-profile`.
    #[serde(default = "default_profile_iterations")]
    pub profile_iterations: usize,
    /// Record a trace row every this many iterations; 0 disables traces.
    #[serde(default)]
    pub trace_every: usize,
    /// Training opponents use the evaluation rationality times this factor.
    #[serde(default = "one")]
    pub lambda_multiplier: f64,
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

fn default_model() -> QuantalModel {
    QuantalModel::Logit { lambda: 1.0 }
}

fn default_lambdas() -> Vec<f64> {
    vec![0.0, 1.0, 10.0]
}

fn default_p_grid() -> Vec<f64> {
    (0..=10).map(|k| k as f64 / 10.0).collect()
}

fn default_profile_iterations() -> usize {
    1000
}

fn one() -> f64 {
    1.0
}

/// Reference self-play run that fixes the game value of zero-sum games.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValueSettings {
    #[serde(default = "default_value_iterations")]
    pub iterations: usize,
    #[serde(default = "default_value_tolerance")]
    pub tolerance: f64,
}

fn default_value_iterations() -> usize {
    200_000
}

fn default_value_tolerance() -> f64 {
    1e-6
}

impl Default for ValueSettings {
    fn default() -> Self {
        Self { iterations: default_value_iterations(), tolerance: default_value_tolerance() }
    }
}

impl ValueSettings {
    pub fn regret_config(&self) -> RegretConfig {
        RegretConfig::new(self.iterations).with_tolerance(self.tolerance)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum GameSpec {
    RandomNfg {
        rows: usize,
        cols: usize,
        #[serde(default = "yes")]
        zero_sum: bool,
        seeds: Vec<u64>,
    },
    /// Either a numbered parameter set (1 to 4) or explicit parameters.
    RandomEfg {
        #[serde(default)]
        set: Option<usize>,
        #[serde(default)]
        branching: Option<usize>,
        #[serde(default)]
        observations: Option<usize>,
        #[serde(default)]
        length: Option<usize>,
        seeds: Vec<u64>,
    },
    Gamut {
        game: GamutFamily,
        actions: usize,
        seeds: Vec<u64>,
    },
    OneCardPoker {
        deck_size: usize,
    },
    Leduc {},
    Goofspiel {
        k: usize,
    },
    PartitionReduction {
        items: Vec<f64>,
        #[serde(default = "zero_sum_variant")]
        variant: ReductionVariant,
    },
    /// Fixed games by name: badqne, game1, game2, game3, matching_pennies,
    /// rock_paper_scissors, coordination, symmetric_commitment.
    Classic {
        name: String,
    },
    /// A game previously written by `generate` (or any game JSON).
    File {
        path: PathBuf,
    },
}

fn yes() -> bool {
    true
}

fn zero_sum_variant() -> ReductionVariant {
    ReductionVariant::ZeroSum
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum AlgorithmSpec {
    /// Regret-matching+ self-play (CFR+ on trees).
    #[serde(alias = "cfr", alias = "cfr_plus", alias = "rm_plus")]
    Nash {
        #[serde(default = "default_iterations")]
        iterations: usize,
        #[serde(default)]
        tolerance: f64,
    },
    /// Regret matching against the quantal response (RM-QR / CFR-QR).
    #[serde(alias = "cfr_qr", alias = "rm_qr")]
    Qne {
        #[serde(default = "default_iterations")]
        iterations: usize,
        #[serde(default)]
        tolerance: f64,
    },
    CfrBr {
        #[serde(default = "default_iterations")]
        iterations: usize,
    },
    /// Best mixture of the Nash and QNE strategies, each computed with
    /// `iterations`.
    Comb {
        #[serde(default = "default_iterations")]
        iterations: usize,
        #[serde(default = "default_sweep")]
        sweep_size: usize,
    },
    /// Restricted response: `phase1_iterations` tune the mixing probability,
    /// then a clean run of `phase2_iterations`. Both default to `iterations`.
    Rqr {
        #[serde(default = "default_iterations")]
        iterations: usize,
        #[serde(default)]
        phase1_iterations: Option<usize>,
        #[serde(default)]
        phase2_iterations: Option<usize>,
        #[serde(default)]
        fixed_p: Option<f64>,
    },
    Ga {
        #[serde(flatten)]
        config: GaConfig,
    },
    /// Gradient ascent over the Nash set of zero-sum matrix games.
    BestNe {
        #[serde(flatten)]
        config: GaConfig,
    },
    /// Re-evaluates strategies written by an earlier `solve`.
    Load {
        dir: PathBuf,
        source: String,
    },
}

fn default_iterations() -> usize {
    10_000
}

fn default_sweep() -> usize {
    11
}

impl AlgorithmSpec {
    /// Name used in result rows and artifact file names.
    pub fn label(&self) -> String {
        match self {
            AlgorithmSpec::Nash { .. } => "nash".into(),
            AlgorithmSpec::Qne { .. } => "qne".into(),
            AlgorithmSpec::CfrBr { .. } => "cfr_br".into(),
            AlgorithmSpec::Comb { .. } => "comb".into(),
            AlgorithmSpec::Rqr { .. } => "rqr".into(),
            AlgorithmSpec::Ga { .. } => "ga".into(),
            AlgorithmSpec::BestNe { .. } => "best_ne".into(),
            AlgorithmSpec::Load { source, .. } => format!("load_{source}"),
        }
    }
}

/// One concrete game of an experiment.
#[derive(Clone, Debug)]
pub struct GameInstance {
    pub id: String,
    pub family: String,
    pub seed: Option<u64>,
    pub game: Arc<Game>,
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let config: Self =
            serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        Ok(config)
    }

    /// Checks everything that does not require building games.
    pub fn validate(&self, need_algorithms: bool) -> Result<()> {
        if self.games.is_empty() {
            bail!("config lists no games");
        }
        if need_algorithms && self.algorithms.is_empty() {
            bail!("config lists no algorithms");
        }
        for spec in &self.games {
            let seeds = match spec {
                GameSpec::RandomNfg { seeds, .. } | GameSpec::RandomEfg { seeds, .. } | GameSpec::Gamut { seeds, .. } => {
                    seeds
                }
                _ => continue,
            };
            if seeds.is_empty() {
                bail!("game family entry has an empty seed list");
            }
            if seeds.iter().collect::<BTreeSet<_>>().len() != seeds.len() {
                bail!("seed list {seeds:?} has duplicates");
            }
        }
        if !(self.lambda_multiplier > 0.0 && self.lambda_multiplier.is_finite()) {
            bail!("lambda_multiplier must be positive");
        }
        if self.lambdas.iter().any(|l| !(*l >= 0.0 && l.is_finite())) {
            bail!("lambdas must be nonnegative");
        }
        if self.p_grid.iter().any(|p| !(0.0..=1.0).contains(p)) {
            bail!("p_grid values must lie in [0, 1]");
        }
        if self.profile_iterations == 0 {
            bail!("profile_iterations must be at least 1");
        }
        if self.value.iterations == 0 {
            bail!("value.iterations must be at least 1");
        }
        let labels: Vec<String> = self.algorithms.iter().map(AlgorithmSpec::label).collect();
        if labels.iter().collect::<BTreeSet<_>>().len() != labels.len() {
            bail!("algorithm list {labels:?} repeats an algorithm");
        }
        self.model.validate()?;
        Ok(())
    }

    /// Builds every game in config order.
    pub fn instances(&self) -> Result<Vec<GameInstance>> {
        let mut out = Vec::new();
        for spec in &self.games {
            spec.expand(&mut out)?;
        }
        let ids: BTreeSet<&str> = out.iter().map(|g| g.id.as_str()).collect();
        if ids.len() != out.len() {
            bail!("two configured games share an identifier");
        }
        Ok(out)
    }

    /// Training model: the evaluation model with its rationality scaled.
    pub fn training_model(&self) -> QuantalModel {
        if self.lambda_multiplier == 1.0 {
            self.model.clone()
        } else {
            self.model.scaled(self.lambda_multiplier)
        }
    }
}

fn instance(id: String, family: &str, seed: Option<u64>, game: impl Into<Game>) -> GameInstance {
    GameInstance { id, family: family.into(), seed, game: Arc::new(game.into()) }
}

fn item_label(items: &[f64]) -> String {
    items.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join("-")
}

impl GameSpec {
    fn expand(&self, out: &mut Vec<GameInstance>) -> Result<()> {
        match self {
            GameSpec::RandomNfg { rows, cols, zero_sum, seeds } => {
                let kind = if *zero_sum { "zs" } else { "gs" };
                for &s in seeds {
                    let g = zoo::random_nfg(*rows, *cols, s, *zero_sum)?;
                    out.push(instance(format!("random_nfg_{rows}x{cols}_{kind}_{s}"), "random_nfg", Some(s), g));
                }
            }
            GameSpec::RandomEfg { set, branching, observations, length, seeds } => {
                let (b, o, l, tag) = match (set, branching, observations, length) {
                    (Some(k), None, None, None) => {
                        let p = zoo::EFG_SETS
                            .get(k.wrapping_sub(1))
                            .with_context(|| format!("random EFG set {k} does not exist (1 to 4)"))?;
                        (p.branching, p.observations, p.length, format!("set{k}"))
                    }
                    (None, Some(b), Some(o), Some(l)) => (*b, *o, *l, format!("b{b}o{o}l{l}")),
                    _ => bail!("random_efg needs either `set` or all of `branching`, `observations`, `length`"),
                };
                for &s in seeds {
                    let g = zoo::random_efg(b, o, l, s)?;
                    out.push(instance(format!("random_efg_{tag}_{s}"), "random_efg", Some(s), g));
                }
            }
            GameSpec::Gamut { game, actions, seeds } => {
                for &s in seeds {
                    let g = zoo::gamut_style(*game, *actions, s)?;
                    out.push(instance(format!("{}_{actions}_{s}", game.name()), game.name(), Some(s), g));
                }
            }
            GameSpec::OneCardPoker { deck_size } => {
                let g = zoo::one_card_poker(*deck_size)?;
                out.push(instance(format!("one_card_poker_{deck_size}"), "one_card_poker", None, g));
            }
            GameSpec::Leduc {} => out.push(instance("leduc".into(), "leduc", None, zoo::leduc_holdem()?)),
            GameSpec::Goofspiel { k } => {
                out.push(instance(format!("goofspiel_{k}"), "goofspiel", None, zoo::goofspiel(*k)?));
            }
            GameSpec::PartitionReduction { items, variant } => {
                let g = zoo::partition_reduction_game(items, *variant)?;
                let v = match variant {
                    ReductionVariant::ZeroSum => "zs",
                    ReductionVariant::GeneralSum => "gs",
                };
                out.push(instance(
                    format!("partition_reduction_{v}_{}", item_label(items)),
                    "partition_reduction",
                    None,
                    g,
                ));
            }
            GameSpec::Classic { name } => {
                let g = match name.as_str() {
                    "badqne" => zoo::badqne(),
                    "game1" => zoo::game1(),
                    "game2" => zoo::game2(),
                    "game3" => zoo::game3(0.0, 1.0, 2.0),
                    "matching_pennies" => zoo::matching_pennies(),
                    "rock_paper_scissors" => zoo::rock_paper_scissors(),
                    "coordination" => zoo::coordination(),
                    "symmetric_commitment" => zoo::symmetric_commitment(),
                    other => bail!("unknown classic game `{other}`"),
                };
                out.push(instance(name.clone(), "classic", None, g));
            }
            GameSpec::File { path } => {
                let text =
                    std::fs::read_to_string(path).with_context(|| format!("reading game {}", path.display()))?;
                let g = Game::from_json(&text).with_context(|| format!("loading game {}", path.display()))?;
                let id = path
                    .file_stem()
                    .and_then(|s| s.to_str())
                    .with_context(|| format!("game file {} has no usable name", path.display()))?
                    .to_string();
                out.push(GameInstance { id, family: "file".into(), seed: None, game: Arc::new(g) });
            }
        }
        Ok(())
    }
}
