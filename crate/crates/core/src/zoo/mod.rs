//! Seeded constructors for every benchmark domain.

mod classic;
mod gamut;
mod goofspiel;
mod poker;
mod random;
mod reduction;

pub use classic::*;
pub use gamut::{gamut_style, war_of_attrition_valuations, GamutFamily};
pub use goofspiel::goofspiel;
pub use poker::{leduc_holdem, one_card_poker};
pub use random::{random_efg, random_efg_set, random_nfg, EfgParams, EFG_SETS};
pub use reduction::{partition_reduction_game, reduction_rationality, ReductionVariant};

use crate::error::Result;
use crate::game::{Game, Player};
use crate::metrics::eu_vs_qr;
use crate::qse::{solve_qse_ga, GaConfig};
use crate::quantal::QuantalModel;
use crate::regret::{solve_nash, RegretConfig};

/// True when gradient ascent gains no more than `tol` over the Nash
/// strategy against the quantal response, i.e. the game cannot tell the
/// two apart. Gains are compared directly; the game value cancels.
pub fn discard_degenerate(
    game: &Game,
    model: &QuantalModel,
    tol: f64,
    nash: &RegretConfig,
    ga: &GaConfig,
) -> Result<bool> {
    let ne = solve_nash(game, nash)?.strategy;
    let best = solve_qse_ga(game, model, ga, Some(&ne))?.strategy;
    let diff = eu_vs_qr(game, &best, model)? - eu_vs_qr(game, &ne, model)?;
    debug_assert_eq!(best.num_infosets(), game.action_counts(Player::Leader).len());
    Ok(diff.abs() <= tol)
}
