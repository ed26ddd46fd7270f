//! JSON interchange format for extensive-form games:
//! `{players, zero_sum, nodes: [{id, parent, action, player, chance_probs?, utility?}],
//!   infosets: [{player, node_ids, actions, name?}]}`.
//!
//! `player` is `"leader"`, `"follower"`, `"chance"`, or absent/null for a
//! terminal. `action` is the label of the edge from the parent. Children of
//! a chance node are ordered by id and matched to `chance_probs` in that
//! order; children of a decision node are matched by label.

use serde::{Deserialize, Serialize};

use super::{ExtensiveFormGame, Infoset, Node, NodeKind, Player};
use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
struct EfgJson {
    players: Vec<Player>,
    #[serde(default)]
    zero_sum: bool,
    nodes: Vec<NodeJson>,
    infosets: Vec<InfosetJson>,
}

#[derive(Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Actor {
    Leader,
    Follower,
    Chance,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Utility {
    Pair([f64; 2]),
    Leader(f64),
}

#[derive(Serialize, Deserialize)]
struct NodeJson {
    id: usize,
    parent: Option<usize>,
    action: Option<String>,
    #[serde(default)]
    player: Option<Actor>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    chance_probs: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    utility: Option<Utility>,
}

#[derive(Serialize, Deserialize)]
struct InfosetJson {
    player: Player,
    node_ids: Vec<usize>,
    actions: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
}

impl ExtensiveFormGame {
    pub fn to_json(&self) -> Result<String> {
        let nodes = self
            .nodes()
            .iter()
            .enumerate()
            .map(|(id, n)| {
                let (player, chance_probs, utility) = match &n.kind {
                    NodeKind::Chance { probs, .. } => (Some(Actor::Chance), Some(probs.clone()), None),
                    NodeKind::Decision { player: Player::Leader, .. } => (Some(Actor::Leader), None, None),
                    NodeKind::Decision { player: Player::Follower, .. } => (Some(Actor::Follower), None, None),
                    NodeKind::Terminal { utility } => (None, None, Some(Utility::Pair(*utility))),
                };
                NodeJson {
                    id,
                    parent: n.parent,
                    action: self.incoming_label(id).map(str::to_string),
                    player,
                    chance_probs,
                    utility,
                }
            })
            .collect();
        let infosets = Player::BOTH
            .iter()
            .flat_map(|&p| self.infosets(p).iter())
            .map(|i| InfosetJson {
                player: i.player,
                node_ids: i.nodes.clone(),
                actions: i.actions.clone(),
                name: Some(i.name.clone()),
            })
            .collect();
        let j = EfgJson {
            players: Player::BOTH.to_vec(),
            zero_sum: self.is_zero_sum(),
            nodes,
            infosets,
        };
        Ok(serde_json::to_string(&j)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let j: EfgJson = serde_json::from_str(text)?;
        decode(j)
    }
}

fn decode(mut j: EfgJson) -> Result<ExtensiveFormGame> {
    let bad = |m: String| Error::InvalidGame(m);
    if j.players != Player::BOTH {
        return Err(bad("`players` must be [\"leader\", \"follower\"]".into()));
    }
    j.nodes.sort_by_key(|n| n.id);
    if j.nodes.iter().enumerate().any(|(i, n)| n.id != i) {
        return Err(bad("node ids must be exactly 0..n".into()));
    }
    let n = j.nodes.len();
    let mut membership: Vec<Option<(Player, usize)>> = vec![None; n];
    let mut infosets: [Vec<Infoset>; 2] = [Vec::new(), Vec::new()];
    for ij in &j.infosets {
        let idx = infosets[ij.player.index()].len();
        for &h in &ij.node_ids {
            let slot = membership
                .get_mut(h)
                .ok_or_else(|| bad(format!("infoset references unknown node {h}")))?;
            if slot.is_some() {
                return Err(bad(format!("node {h} belongs to two infosets")));
            }
            *slot = Some((ij.player, idx));
        }
        infosets[ij.player.index()].push(Infoset {
            player: ij.player,
            name: ij.name.clone().unwrap_or_else(|| format!("{:?}{idx}", ij.player)),
            nodes: ij.node_ids.clone(),
            actions: ij.actions.clone(),
            parent_sequence: None,
        });
    }

    let mut kinds = Vec::with_capacity(n);
    for (id, nj) in j.nodes.iter().enumerate() {
        let kind = match nj.player {
            Some(Actor::Chance) => {
                let probs = nj
                    .chance_probs
                    .clone()
                    .ok_or_else(|| bad(format!("chance node {id} lacks chance_probs")))?;
                NodeKind::Chance { probs, labels: Vec::new() }
            }
            Some(actor) => {
                let player = if actor == Actor::Leader { Player::Leader } else { Player::Follower };
                match membership[id] {
                    Some((p, infoset)) if p == player => NodeKind::Decision { player, infoset },
                    _ => return Err(bad(format!("decision node {id} is not in one of its player's infosets"))),
                }
            }
            None => {
                let utility = match &nj.utility {
                    Some(Utility::Pair(u)) => *u,
                    Some(Utility::Leader(u)) if j.zero_sum => [*u, -*u],
                    Some(Utility::Leader(_)) => {
                        return Err(bad(format!("terminal {id}: general-sum games need [leader, follower] utilities")))
                    }
                    None => return Err(bad(format!("node {id} has neither a player nor a utility"))),
                };
                NodeKind::Terminal { utility }
            }
        };
        if !matches!(kind, NodeKind::Decision { .. }) && membership[id].is_some() {
            return Err(bad(format!("node {id} is in an infoset but is not a decision node")));
        }
        kinds.push(kind);
    }

    let mut children: Vec<Vec<Option<usize>>> = kinds
        .iter()
        .map(|k| match k {
            NodeKind::Chance { probs, .. } => Vec::with_capacity(probs.len()),
            NodeKind::Decision { player, infoset } => {
                vec![None; infosets[player.index()][*infoset].actions.len()]
            }
            NodeKind::Terminal { .. } => Vec::new(),
        })
        .collect();
    let mut incoming = vec![None; n];
    for (id, nj) in j.nodes.iter().enumerate() {
        let Some(p) = nj.parent else {
            if id != 0 {
                return Err(bad(format!("node {id} has no parent; node 0 must be the only root")));
            }
            continue;
        };
        if p >= id {
            return Err(bad(format!("node {id} must come after its parent {p}")));
        }
        match &mut kinds[p] {
            NodeKind::Chance { labels, .. } => {
                let a = children[p].len();
                children[p].push(Some(id));
                labels.push(nj.action.clone().unwrap_or_else(|| a.to_string()));
                incoming[id] = Some(a);
            }
            NodeKind::Decision { player, infoset } => {
                let label = nj
                    .action
                    .as_deref()
                    .ok_or_else(|| bad(format!("node {id} lacks its action label")))?;
                let a = infosets[player.index()][*infoset]
                    .actions
                    .iter()
                    .position(|x| x == label)
                    .ok_or_else(|| bad(format!("node {id}: unknown action `{label}` at node {p}")))?;
                if children[p][a].replace(id).is_some() {
                    return Err(bad(format!("node {p} has two children for action `{label}`")));
                }
                incoming[id] = Some(a);
            }
            NodeKind::Terminal { .. } => return Err(bad(format!("node {id} has a terminal parent {p}"))),
        }
    }

    let mut nodes = Vec::with_capacity(n);
    for (id, kind) in kinds.into_iter().enumerate() {
        let ch = children[id]
            .iter()
            .enumerate()
            .map(|(a, c)| c.ok_or_else(|| bad(format!("node {id} is missing the child for action {a}"))))
            .collect::<Result<Vec<_>>>()?;
        nodes.push(Node {
            parent: j.nodes[id].parent,
            action: incoming[id],
            children: ch,
            depth: 0,
            kind,
        });
    }
    ExtensiveFormGame::from_parts(nodes, infosets, j.zero_sum)
}
