use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::NormalFormGame;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GamutFamily {
    GrabTheDollar,
    MajorityVoting,
    TravelersDilemma,
    WarOfAttrition,
}

impl GamutFamily {
    pub const ALL: [GamutFamily; 4] = [
        GamutFamily::GrabTheDollar,
        GamutFamily::MajorityVoting,
        GamutFamily::TravelersDilemma,
        GamutFamily::WarOfAttrition,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GamutFamily::GrabTheDollar => "grab_the_dollar",
            GamutFamily::MajorityVoting => "majority_voting",
            GamutFamily::TravelersDilemma => "travelers_dilemma",
            GamutFamily::WarOfAttrition => "war_of_attrition",
        }
    }
}

/// Bonus and penalty of the traveler's dilemma.
pub const TRAVELERS_BONUS: f64 = 2.0;

/// General-sum matrix game of the given family with `n` actions per player.
///
/// * Grab the dollar: action `t` grabs at time `t`. The earlier grabber
///   gets a high payoff and the other a middle one; simultaneous grabs give
///   both the low payoff. Low, middle and high are seeded integers with
///   low < middle < high.
/// * Majority voting: action `k` votes for candidate `k`. Each player has
///   seeded integer values in 0..=10 per candidate. With two voters a split
///   vote is a tie, won by the lower-indexed candidate, so the winner is
///   always the smaller index.
/// * Traveler's dilemma: action `k` claims `k + 2`. Equal claims are paid
///   out; otherwise the lower claimant gets her claim plus the bonus and the
///   other the lower claim minus the bonus. Not seeded.
/// * War of attrition: action `t` concedes at time `t`. Both lose one unit
///   per elapsed step until the first concession; the other player then
///   gets her seeded valuation (in 1..=2n), and simultaneous concessions
///   split both valuations.
pub fn gamut_style(family: GamutFamily, n: usize, seed: u64) -> Result<NormalFormGame> {
    if n == 0 {
        return Err(Error::InvalidGame("need at least one action".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut leader = vec![vec![0.0; n]; n];
    let mut follower = vec![vec![0.0; n]; n];
    match family {
        GamutFamily::GrabTheDollar => {
            let low = rng.gen_range(0..=3) as f64;
            let mid = low + rng.gen_range(1..=3) as f64;
            let high = mid + rng.gen_range(1..=3) as f64;
            for i in 0..n {
                for j in 0..n {
                    let (l, f) = match i.cmp(&j) {
                        std::cmp::Ordering::Less => (high, mid),
                        std::cmp::Ordering::Greater => (mid, high),
                        std::cmp::Ordering::Equal => (low, low),
                    };
                    leader[i][j] = l;
                    follower[i][j] = f;
                }
            }
        }
        GamutFamily::MajorityVoting => {
            let lv: Vec<f64> = (0..n).map(|_| rng.gen_range(0..=10) as f64).collect();
            let fv: Vec<f64> = (0..n).map(|_| rng.gen_range(0..=10) as f64).collect();
            for i in 0..n {
                for j in 0..n {
                    let winner = i.min(j);
                    leader[i][j] = lv[winner];
                    follower[i][j] = fv[winner];
                }
            }
        }
        GamutFamily::TravelersDilemma => {
            for i in 0..n {
                for j in 0..n {
                    let (ci, cj) = ((i + 2) as f64, (j + 2) as f64);
                    let (l, f) = match i.cmp(&j) {
                        std::cmp::Ordering::Less => (ci + TRAVELERS_BONUS, ci - TRAVELERS_BONUS),
                        std::cmp::Ordering::Greater => (cj - TRAVELERS_BONUS, cj + TRAVELERS_BONUS),
                        std::cmp::Ordering::Equal => (ci, cj),
                    };
                    leader[i][j] = l;
                    follower[i][j] = f;
                }
            }
        }
        GamutFamily::WarOfAttrition => {
            let top = 2 * n as i64;
            let vl = rng.gen_range(1..=top) as f64;
            let vf = rng.gen_range(1..=top) as f64;
            for i in 0..n {
                for j in 0..n {
                    let elapsed = i.min(j) as f64;
                    let (l, f) = match i.cmp(&j) {
                        std::cmp::Ordering::Less => (0.0, vf),
                        std::cmp::Ordering::Greater => (vl, 0.0),
                        std::cmp::Ordering::Equal => (vl / 2.0, vf / 2.0),
                    };
                    leader[i][j] = l - elapsed;
                    follower[i][j] = f - elapsed;
                }
            }
        }
    }
    NormalFormGame::general_sum(leader, follower)
}

/// Valuations used by the war-of-attrition instance with this seed and
/// size, in (leader, follower) order.
pub fn war_of_attrition_valuations(n: usize, seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let top = 2 * n as i64;
    (rng.gen_range(1..=top) as f64, rng.gen_range(1..=top) as f64)
}
