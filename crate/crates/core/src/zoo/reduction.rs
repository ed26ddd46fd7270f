use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{EfgBuilder, ExtensiveFormGame, Player};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReductionVariant {
    /// Item subgames use the 2x3 game with two mirror-image optimal
    /// commitments.
    ZeroSum,
    /// Item subgames use the 2x2 coordination game.
    GeneralSum,
}

/// Tree whose optimal commitment against a quantal follower reveals
/// whether `items` can be split into two halves of equal sum.
///
/// A uniform chance move picks one of `2n` subtrees, two per item. In both
/// subtrees of item `i` the leader acts in the same infoset with actions
/// `X` and `Y`. In the first subtree her action is followed by a follower
/// decision of the item's own matrix subgame. In the second it is followed
/// by the follower's single partition infoset, shared by all items, with
/// actions `a1` and `a2`: the leader earns `x_i` for (`X`, `a1`) or
/// (`Y`, `a2`) and nothing otherwise, zero-sum. Playing `X` with the
/// probability that is optimal in the matrix subgame places the item in
/// the first half.
///
/// Counterfactual values are scaled by the chance probability `1 / 2n`;
/// [`reduction_rationality`] gives the logit parameter that undoes this.
pub fn partition_reduction_game(items: &[f64], variant: ReductionVariant) -> Result<ExtensiveFormGame> {
    if items.is_empty() || items.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
        return Err(Error::InvalidGame("partition items must be positive".into()));
    }
    let n = items.len();
    let mut b = EfgBuilder::new(variant == ReductionVariant::ZeroSum);
    let labels = (0..n).flat_map(|i| [format!("matrix{i}"), format!("partition{i}")]).collect();
    let root = b.chance_labeled(None, vec![1.0 / (2 * n) as f64; 2 * n], labels);
    for (i, &x) in items.iter().enumerate() {
        let key = format!("L{i}");
        let l = b.decision(Some((root, 2 * i)), Player::Leader, &key, &["X", "Y"]);
        for r in 0..2 {
            match variant {
                ReductionVariant::ZeroSum => {
                    let f = b.decision(Some((l, r)), Player::Follower, &format!("G{i}"), &["A", "B", "C"]);
                    for c in 0..3 {
                        let u = if c == r + 1 { 10.0 } else { 0.0 };
                        b.terminal(Some((f, c)), [u, -u]);
                    }
                }
                ReductionVariant::GeneralSum => {
                    let f = b.decision(Some((l, r)), Player::Follower, &format!("G{i}"), &["A", "B"]);
                    for c in 0..2 {
                        let u = if c == r { 1.0 } else { 0.0 };
                        b.terminal(Some((f, c)), [u, u]);
                    }
                }
            }
        }
        let l = b.decision(Some((root, 2 * i + 1)), Player::Leader, &key, &["X", "Y"]);
        for r in 0..2 {
            let f = b.decision(Some((l, r)), Player::Follower, "P", &["a1", "a2"]);
            for c in 0..2 {
                let u = if c == r { x } else { 0.0 };
                b.terminal(Some((f, c)), [u, -u]);
            }
        }
    }
    b.build()
}

/// Logit rationality under which every follower infoset of the reduction
/// game with `n_items` items responds as a rationality-1 follower would to
/// unscaled values.
pub fn reduction_rationality(n_items: usize) -> f64 {
    2.0 * n_items as f64
}
