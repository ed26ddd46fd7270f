use crate::error::{Error, Result};
use crate::game::{EfgBuilder, ExtensiveFormGame, Player};

/// Goofspiel with `k` cards per hand and point cards 1..=k revealed in
/// ascending order. Each round the leader bids first and the follower bids
/// without seeing that bid; both bids are revealed after the round. The
/// higher bid wins the point card, ties discard it. The leader's utility is
/// her point total minus the follower's.
pub fn goofspiel(k: usize) -> Result<ExtensiveFormGame> {
    if k == 0 {
        return Err(Error::InvalidGame("goofspiel needs at least one card".into()));
    }
    let mut b = EfgBuilder::new(true);
    let hand: Vec<usize> = (1..=k).collect();
    round(&mut b, None, 0, k, &hand, &hand, &mut String::new(), 0);
    b.build()
}

#[allow(clippy::too_many_arguments)]
fn round(
    b: &mut EfgBuilder,
    parent: Option<(usize, usize)>,
    turn: usize,
    k: usize,
    leader_hand: &[usize],
    follower_hand: &[usize],
    public: &mut String,
    score: i64,
) {
    if turn == k {
        b.terminal(parent, [score as f64, -score as f64]);
        return;
    }
    let point = (turn + 1) as i64;
    let labels = |h: &[usize]| h.iter().map(|c| format!("b{c}")).collect::<Vec<_>>();
    let l = b.decision(parent, Player::Leader, &format!("L:{public}"), &labels(leader_hand));
    for (i, &lb) in leader_hand.iter().enumerate() {
        let f = b.decision(Some((l, i)), Player::Follower, &format!("F:{public}"), &labels(follower_hand));
        for (j, &fb) in follower_hand.iter().enumerate() {
            let delta = match lb.cmp(&fb) {
                std::cmp::Ordering::Greater => point,
                std::cmp::Ordering::Less => -point,
                std::cmp::Ordering::Equal => 0,
            };
            let lh: Vec<usize> = leader_hand.iter().copied().filter(|&c| c != lb).collect();
            let fh: Vec<usize> = follower_hand.iter().copied().filter(|&c| c != fb).collect();
            let len = public.len();
            public.push_str(&format!("{lb}-{fb}."));
            round(b, Some((f, j)), turn + 1, k, &lh, &fh, public, score + delta);
            public.truncate(len);
        }
    }
}
