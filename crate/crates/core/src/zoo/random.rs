use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{EfgBuilder, ExtensiveFormGame, NormalFormGame, Player};

/// Matrix game with integer payoffs drawn uniformly from -9..=10. The
/// leader matrix is drawn first (row-major); a general-sum follower matrix
/// is drawn after it.
pub fn random_nfg(rows: usize, cols: usize, seed: u64, zero_sum: bool) -> Result<NormalFormGame> {
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidGame("random game needs at least one action per player".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| -> Vec<Vec<f64>> {
        (0..rows).map(|_| (0..cols).map(|_| rng.gen_range(-9..=10) as f64).collect()).collect()
    };
    let leader = draw(&mut rng);
    if zero_sum {
        NormalFormGame::zero_sum(leader)
    } else {
        let follower = draw(&mut rng);
        NormalFormGame::general_sum(leader, follower)
    }
}

/// Shape of a random tree: branching factor, number of distinct
/// observations of an opponent move, and moves per player.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EfgParams {
    pub branching: usize,
    pub observations: usize,
    pub length: usize,
}

/// The four benchmark sets of random trees.
pub const EFG_SETS: [EfgParams; 4] = [
    EfgParams { branching: 3, observations: 2, length: 1 },
    EfgParams { branching: 3, observations: 2, length: 2 },
    EfgParams { branching: 5, observations: 3, length: 2 },
    EfgParams { branching: 5, observations: 3, length: 3 },
];

/// Random zero-sum tree of depth `2 * length` where the players alternate,
/// the leader first. A player sees her own moves and, of each opponent
/// move, only its index modulo `observations`. The leader's utility starts
/// at 0 and moves by +1 or -1 along every edge.
pub fn random_efg(branching: usize, observations: usize, length: usize, seed: u64) -> Result<ExtensiveFormGame> {
    if branching == 0 || observations == 0 {
        return Err(Error::InvalidGame("branching and observations must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = EfgBuilder::new(true);
    let actions: Vec<String> = (0..branching).map(|a| format!("a{a}")).collect();
    let mut views = [String::new(), String::new()];
    grow(&mut b, &mut rng, None, 0, 2 * length, 0, &mut views, &actions, observations);
    b.build()
}

#[allow(clippy::too_many_arguments)]
fn grow(
    b: &mut EfgBuilder,
    rng: &mut ChaCha8Rng,
    parent: Option<(usize, usize)>,
    depth: usize,
    max_depth: usize,
    value: i64,
    views: &mut [String; 2],
    actions: &[String],
    observations: usize,
) {
    if depth == max_depth {
        b.terminal(parent, [value as f64, -value as f64]);
        return;
    }
    let player = if depth % 2 == 0 { Player::Leader } else { Player::Follower };
    let (me, other) = (player.index(), player.opponent().index());
    let key = format!("{}:{}", if me == 0 { "L" } else { "F" }, views[me]);
    let node = b.decision(parent, player, &key, actions);
    for a in 0..actions.len() {
        let step = if rng.gen::<bool>() { 1 } else { -1 };
        let saved = views.clone();
        views[me].push_str(&format!("a{a}."));
        views[other].push_str(&format!("o{}.", a % observations));
        grow(b, rng, Some((node, a)), depth + 1, max_depth, value + step, views, actions, observations);
        *views = saved;
    }
}

/// Member `seed` of benchmark set `set` (1-based, 1..=4).
pub fn random_efg_set(set: usize, seed: u64) -> Result<ExtensiveFormGame> {
    let p = set
        .checked_sub(1)
        .and_then(|i| EFG_SETS.get(i))
        .ok_or_else(|| Error::InvalidGame(format!("unknown random tree set {set}")))?;
    random_efg(p.branching, p.observations, p.length, seed)
}
