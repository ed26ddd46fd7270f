#![allow(dead_code)]

use quantal_core::game::{ExtensiveFormGame, NodeKind, Player};
use quantal_core::BehavioralStrategy;
use rand::Rng;

pub fn random_mixed(n: usize, rng: &mut impl Rng) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / total).collect()
}

pub fn random_strategy(counts: &[usize], rng: &mut impl Rng) -> BehavioralStrategy {
    BehavioralStrategy::new(counts.iter().map(|&n| random_mixed(n, rng)).collect())
}

pub fn random_pure(counts: &[usize], rng: &mut impl Rng) -> BehavioralStrategy {
    BehavioralStrategy::new(
        counts
            .iter()
            .map(|&n| {
                let mut v = vec![0.0; n];
                v[rng.gen_range(0..n)] = 1.0;
                v
            })
            .collect(),
    )
}

/// One edge on a root-to-node path: who acted and with what probability.
#[derive(Clone, Copy, Debug)]
pub struct Edge {
    pub actor: Option<Player>,
    pub infoset: usize,
    pub action: usize,
    pub prob: f64,
}

/// Root-to-node edges found by following parent pointers.
pub fn path(
    game: &ExtensiveFormGame,
    node: usize,
    leader: &BehavioralStrategy,
    follower: &BehavioralStrategy,
) -> Vec<Edge> {
    let mut edges = Vec::new();
    let mut h = node;
    while let Some(p) = game.node(h).parent {
        let a = game.node(h).action.unwrap();
        let edge = match &game.node(p).kind {
            NodeKind::Chance { probs, .. } => Edge { actor: None, infoset: 0, action: a, prob: probs[a] },
            NodeKind::Decision { player, infoset } => {
                let s = if *player == Player::Leader { leader } else { follower };
                Edge { actor: Some(*player), infoset: *infoset, action: a, prob: s.infoset(*infoset)[a] }
            }
            NodeKind::Terminal { .. } => unreachable!("terminal nodes have no children"),
        };
        edges.push(edge);
        h = p;
    }
    edges.reverse();
    edges
}

pub fn utility(game: &ExtensiveFormGame, node: usize) -> [f64; 2] {
    match game.node(node).kind {
        NodeKind::Terminal { utility } => utility,
        _ => panic!("node {node} is not terminal"),
    }
}

/// Counterfactual action values by the double sum over (h, z) pairs:
/// for every terminal z and every decision of `player` on its path.
pub fn double_sum_values(
    game: &ExtensiveFormGame,
    leader: &BehavioralStrategy,
    follower: &BehavioralStrategy,
    player: Player,
) -> Vec<Vec<f64>> {
    let mut values: Vec<Vec<f64>> = game.action_counts(player).iter().map(|&n| vec![0.0; n]).collect();
    for z in 0..game.num_nodes() {
        if !game.node(z).is_terminal() {
            continue;
        }
        let u = utility(game, z)[player.index()];
        let edges = path(game, z, leader, follower);
        for (k, e) in edges.iter().enumerate() {
            if e.actor != Some(player) {
                continue;
            }
            let others: f64 = edges[..k].iter().filter(|x| x.actor != Some(player)).map(|x| x.prob).product();
            let below: f64 = edges[k + 1..].iter().map(|x| x.prob).product();
            values[e.infoset][e.action] += others * below * u;
        }
    }
    values
}

/// Solves a square linear system by Gaussian elimination with partial
/// pivoting; `None` when singular.
pub fn solve_linear(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

fn subsets(n: usize) -> Vec<Vec<usize>> {
    (1..1u32 << n).map(|m| (0..n).filter(|i| m & (1 << i) != 0).collect()).collect()
}

/// Value of a zero-sum matrix game for the row player by enumerating
/// equal-size support pairs (vertices of the maximin polytope).
pub fn support_enumeration_value(u: &[Vec<f64>]) -> f64 {
    let (m, n) = (u.len(), u[0].len());
    let mut best = f64::NEG_INFINITY;
    for rows in subsets(m) {
        for cols in subsets(n) {
            if rows.len() != cols.len() {
                continue;
            }
            let k = rows.len();
            // unknowns: x over `rows`, then v
            let mut a = Vec::with_capacity(k + 1);
            let mut b = Vec::with_capacity(k + 1);
            for &j in &cols {
                let mut r: Vec<f64> = rows.iter().map(|&i| u[i][j]).collect();
                r.push(-1.0);
                a.push(r);
                b.push(0.0);
            }
            let mut r = vec![1.0; k];
            r.push(0.0);
            a.push(r);
            b.push(1.0);
            let Some(sol) = solve_linear(a, b) else { continue };
            let v = sol[k];
            if sol[..k].iter().any(|&x| x < -1e-9) {
                continue;
            }
            let feasible = (0..n).all(|j| rows.iter().zip(&sol).map(|(&i, x)| x * u[i][j]).sum::<f64>() >= v - 1e-9);
            if feasible {
                best = best.max(v);
            }
        }
    }
    best
}
