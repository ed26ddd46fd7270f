use crate::game::NormalFormGame;

fn zero_sum(rows: Vec<Vec<f64>>) -> NormalFormGame {
    NormalFormGame::zero_sum(rows).expect("fixed matrix is valid")
}

/// 2x3 game whose unique equilibrium does better against a logit follower
/// than the game's quantal equilibrium does.
pub fn badqne() -> NormalFormGame {
    zero_sum(vec![vec![-6.0, 9.0, 9.0], vec![3.0, 0.0, 2.0]])
}

/// 2x4 game with three local optima of the commitment objective.
pub fn game1() -> NormalFormGame {
    zero_sum(vec![vec![-4.0, -5.0, 8.0, -4.0], vec![-5.0, -4.0, -4.0, 8.0]])
}

/// 2x2 game where the optimal commitment uses the dominated row.
pub fn game2() -> NormalFormGame {
    zero_sum(vec![vec![-2.0, 8.0], vec![-2.2, -2.5]])
}

/// Zero-sum game where the follower's utilities are `[[b, a], [c, a]]`.
/// For `a < b < c` no strictly increasing canonical response satisfies the
/// pretty-good-response condition.
pub fn game3(a: f64, b: f64, c: f64) -> NormalFormGame {
    zero_sum(vec![vec![-b, -a], vec![-c, -a]])
}

pub fn matching_pennies() -> NormalFormGame {
    zero_sum(vec![vec![1.0, -1.0], vec![-1.0, 1.0]])
}

pub fn rock_paper_scissors() -> NormalFormGame {
    zero_sum(vec![vec![0.0, -1.0, 1.0], vec![1.0, 0.0, -1.0], vec![-1.0, 1.0, 0.0]])
}

/// Both players get 1 when they match and 0 otherwise.
pub fn coordination() -> NormalFormGame {
    let m = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
    NormalFormGame::general_sum(m.clone(), m).expect("fixed matrix is valid")
}

/// 2x3 zero-sum game with two mirror-image optimal commitments and a worse
/// uniform commitment; the building block of the partition reduction.
pub fn symmetric_commitment() -> NormalFormGame {
    zero_sum(vec![vec![0.0, 10.0, 0.0], vec![0.0, 0.0, 10.0]])
}
