use serde::{Deserialize, Serialize};

use super::{EfgBuilder, ExtensiveFormGame, Player};
use crate::error::{Error, Result};

/// Two-player normal-form game. Rows are leader actions, columns are
/// follower actions.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalFormGame {
    rows: usize,
    cols: usize,
    leader: Vec<f64>,
    follower: Vec<f64>,
    zero_sum: bool,
}

#[derive(Serialize, Deserialize)]
struct NfgJson {
    leader_payoffs: Vec<Vec<f64>>,
    follower_payoffs: Vec<Vec<f64>>,
    zero_sum: bool,
}

fn flatten(m: &[Vec<f64>], what: &str) -> Result<(usize, usize, Vec<f64>)> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidGame(format!("{what} matrix is empty")));
    }
    if m.iter().any(|r| r.len() != cols) {
        return Err(Error::InvalidGame(format!("{what} matrix is ragged")));
    }
    let data: Vec<f64> = m.iter().flatten().copied().collect();
    if data.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidGame(format!("{what} matrix has non-finite entries")));
    }
    Ok((rows, cols, data))
}

impl NormalFormGame {
    /// Zero-sum game given by the leader's payoffs.
    pub fn zero_sum(leader: Vec<Vec<f64>>) -> Result<Self> {
        let (rows, cols, leader) = flatten(&leader, "leader")?;
        let follower = leader.iter().map(|v| -v).collect();
        Ok(Self { rows, cols, leader, follower, zero_sum: true })
    }

    pub fn general_sum(leader: Vec<Vec<f64>>, follower: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(leader, follower, false)
    }

    /// Builds a game from both payoff matrices; with `zero_sum` set the
    /// follower matrix must be the exact negation of the leader matrix.
    pub fn new(leader: Vec<Vec<f64>>, follower: Vec<Vec<f64>>, zero_sum: bool) -> Result<Self> {
        let (rows, cols, leader) = flatten(&leader, "leader")?;
        let (frows, fcols, follower) = flatten(&follower, "follower")?;
        if (rows, cols) != (frows, fcols) {
            return Err(Error::InvalidGame(format!(
                "payoff shapes differ: {rows}x{cols} vs {frows}x{fcols}"
            )));
        }
        if zero_sum && leader.iter().zip(&follower).any(|(l, f)| *f != -*l) {
            return Err(Error::InvalidGame(
                "zero_sum is set but follower payoffs are not the negated leader payoffs".into(),
            ));
        }
        Ok(Self { rows, cols, leader, follower, zero_sum })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_zero_sum(&self) -> bool {
        self.zero_sum
    }

    pub fn leader_payoff(&self, row: usize, col: usize) -> f64 {
        self.leader[row * self.cols + col]
    }

    pub fn follower_payoff(&self, row: usize, col: usize) -> f64 {
        self.follower[row * self.cols + col]
    }

    pub fn payoff(&self, player: Player, row: usize, col: usize) -> f64 {
        match player {
            Player::Leader => self.leader_payoff(row, col),
            Player::Follower => self.follower_payoff(row, col),
        }
    }

    pub fn leader_matrix(&self) -> Vec<Vec<f64>> {
        self.leader.chunks(self.cols).map(<[f64]>::to_vec).collect()
    }

    pub fn follower_matrix(&self) -> Vec<Vec<f64>> {
        self.follower.chunks(self.cols).map(<[f64]>::to_vec).collect()
    }

    pub fn payoff_scale(&self) -> f64 {
        self.leader
            .iter()
            .chain(&self.follower)
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Leader utility of each row against the follower mix `follower`.
    pub fn leader_row_values(&self, follower: &[f64]) -> Vec<f64> {
        self.leader
            .chunks(self.cols)
            .map(|row| row.iter().zip(follower).map(|(u, p)| u * p).sum())
            .collect()
    }

    /// Follower utility of each column against the leader mix `leader`.
    pub fn follower_col_values(&self, leader: &[f64]) -> Vec<f64> {
        column_values(&self.follower, self.cols, leader)
    }

    /// Leader utility when the follower plays each column, given `leader`.
    pub fn leader_col_values(&self, leader: &[f64]) -> Vec<f64> {
        column_values(&self.leader, self.cols, leader)
    }

    /// Follower utility of each row when the follower mixes `follower`.
    pub fn follower_row_values(&self, follower: &[f64]) -> Vec<f64> {
        self.follower
            .chunks(self.cols)
            .map(|row| row.iter().zip(follower).map(|(u, p)| u * p).sum())
            .collect()
    }

    pub fn expected_utility(&self, leader: &[f64], follower: &[f64]) -> Result<[f64; 2]> {
        check_mixed(leader, self.rows, "leader")?;
        check_mixed(follower, self.cols, "follower")?;
        Ok(self.expected_utility_unchecked(leader, follower))
    }

    pub(crate) fn expected_utility_unchecked(&self, leader: &[f64], follower: &[f64]) -> [f64; 2] {
        let mut out = [0.0; 2];
        for (r, &x) in leader.iter().enumerate() {
            if x == 0.0 {
                continue;
            }
            let base = r * self.cols;
            for (c, &y) in follower.iter().enumerate() {
                out[0] += x * y * self.leader[base + c];
                out[1] += x * y * self.follower[base + c];
            }
        }
        out
    }

    /// The same game as a two-level tree: the leader moves first and the
    /// follower acts in a single information set without observing it.
    pub fn to_extensive(&self) -> ExtensiveFormGame {
        let row_labels: Vec<String> = (0..self.rows).map(|r| format!("r{r}")).collect();
        let col_labels: Vec<String> = (0..self.cols).map(|c| format!("c{c}")).collect();
        let mut b = EfgBuilder::new(self.zero_sum);
        let root = b.decision(None, Player::Leader, "L", &row_labels);
        for r in 0..self.rows {
            let f = b.decision(Some((root, r)), Player::Follower, "F", &col_labels);
            for c in 0..self.cols {
                b.terminal(
                    Some((f, c)),
                    [self.leader_payoff(r, c), self.follower_payoff(r, c)],
                );
            }
        }
        b.build().expect("matrix games always form a valid tree")
    }

    pub fn to_json(&self) -> Result<String> {
        let j = NfgJson {
            leader_payoffs: self.leader_matrix(),
            follower_payoffs: self.follower_matrix(),
            zero_sum: self.zero_sum,
        };
        Ok(serde_json::to_string(&j)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let j: NfgJson = serde_json::from_str(text)?;
        Self::new(j.leader_payoffs, j.follower_payoffs, j.zero_sum)
    }
}

fn column_values(m: &[f64], cols: usize, weights: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; cols];
    for (row, &w) in m.chunks(cols).zip(weights) {
        if w == 0.0 {
            continue;
        }
        for (o, u) in out.iter_mut().zip(row) {
            *o += w * u;
        }
    }
    out
}

pub(crate) fn check_mixed(p: &[f64], n: usize, who: &str) -> Result<()> {
    if p.len() != n {
        return Err(Error::Domain(format!(
            "{who} strategy has {} entries, game has {n} actions",
            p.len()
        )));
    }
    super::strategy::check_distribution(p).map_err(|e| Error::Domain(format!("{who}: {e}")))
}
