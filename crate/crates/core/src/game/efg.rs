use std::collections::HashMap;

use super::Player;
use crate::error::{Error, Result};

/// Tolerance on chance distributions summing to one.
pub const CHANCE_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub enum NodeKind {
    Chance { probs: Vec<f64>, labels: Vec<String> },
    Decision { player: Player, infoset: usize },
    Terminal { utility: [f64; 2] },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Node {
    pub parent: Option<usize>,
    /// Index of the action at `parent` that leads here.
    pub action: Option<usize>,
    pub children: Vec<usize>,
    pub depth: usize,
    pub kind: NodeKind,
}

impl Node {
    pub fn is_terminal(&self) -> bool {
        matches!(self.kind, NodeKind::Terminal { .. })
    }
}

/// A player's last own action on the way to a node: the infoset it was
/// taken in and the action index. `None` is the empty sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sequence {
    pub infoset: usize,
    pub action: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Infoset {
    pub player: Player,
    pub name: String,
    pub nodes: Vec<usize>,
    pub actions: Vec<String>,
    /// Sequence of own actions leading into this infoset (perfect recall
    /// makes it the same for every member node).
    pub parent_sequence: Option<Sequence>,
}

/// Perfect-recall two-player game tree with chance.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtensiveFormGame {
    nodes: Vec<Node>,
    infosets: [Vec<Infoset>; 2],
    /// Infoset indices per player, parents (in the sequence tree) first.
    order: [Vec<usize>; 2],
    zero_sum: bool,
}

impl ExtensiveFormGame {
    /// Validates raw parts and assembles a game. Node 0 is the root and
    /// every node's parent must have a smaller index.
    pub fn from_parts(
        nodes: Vec<Node>,
        infosets: [Vec<Infoset>; 2],
        zero_sum: bool,
    ) -> Result<Self> {
        let mut game = Self {
            nodes,
            infosets,
            order: [Vec::new(), Vec::new()],
            zero_sum,
        };
        game.validate()?;
        Ok(game)
    }

    fn validate(&mut self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidGame(m));
        let n = self.nodes.len();
        if n == 0 {
            return bad("the tree has no nodes".into());
        }
        if self.nodes[0].parent.is_some() {
            return bad("node 0 must be the root".into());
        }
        for id in 1..n {
            match self.nodes[id].parent {
                Some(p) if p < id => {}
                Some(p) => return bad(format!("node {id} has parent {p} that does not precede it")),
                None => return bad(format!("node {id} has no parent; only one root is allowed")),
            }
        }
        for id in 0..n {
            let node = &self.nodes[id];
            for (a, &c) in node.children.iter().enumerate() {
                if c >= n || self.nodes[c].parent != Some(id) || self.nodes[c].action != Some(a) {
                    return bad(format!("child {c} of node {id} is not linked back correctly"));
                }
            }
            match &node.kind {
                NodeKind::Terminal { utility } => {
                    if !node.children.is_empty() {
                        return bad(format!("terminal node {id} has children"));
                    }
                    if utility.iter().any(|u| !u.is_finite()) {
                        return bad(format!("terminal node {id} has a non-finite utility"));
                    }
                    if self.zero_sum && utility[1] != -utility[0] {
                        return bad(format!("terminal node {id} is not zero-sum"));
                    }
                }
                NodeKind::Chance { probs, labels } => {
                    if probs.len() != node.children.len() || labels.len() != probs.len() {
                        return bad(format!("chance node {id} has mismatched outcomes"));
                    }
                    if probs.is_empty() {
                        return bad(format!("chance node {id} has no outcomes"));
                    }
                    if probs.iter().any(|p| !(*p >= 0.0)) {
                        return bad(format!("chance node {id} has a negative probability"));
                    }
                    let s: f64 = probs.iter().sum();
                    if (s - 1.0).abs() > CHANCE_TOLERANCE {
                        return bad(format!("chance node {id} probabilities sum to {s}"));
                    }
                }
                NodeKind::Decision { player, infoset } => {
                    let Some(info) = self.infosets[player.index()].get(*infoset) else {
                        return bad(format!("node {id} references a missing infoset"));
                    };
                    if info.actions.is_empty() {
                        return bad(format!("infoset `{}` has no actions", info.name));
                    }
                    if info.actions.len() != node.children.len() {
                        return bad(format!(
                            "node {id} has {} children but its infoset `{}` has {} actions",
                            node.children.len(),
                            info.name,
                            info.actions.len()
                        ));
                    }
                    if !info.nodes.contains(&id) {
                        return bad(format!("node {id} is missing from its infoset `{}`", info.name));
                    }
                }
            }
        }
        for p in Player::BOTH {
            for (i, info) in self.infosets[p.index()].iter().enumerate() {
                if info.player != p {
                    return bad(format!("infoset `{}` is filed under the wrong player", info.name));
                }
                if info.nodes.is_empty() {
                    return bad(format!("infoset `{}` has no nodes", info.name));
                }
                for &h in &info.nodes {
                    match self.nodes.get(h).map(|nd| &nd.kind) {
                        Some(NodeKind::Decision { player, infoset }) if *player == p && *infoset == i => {}
                        _ => {
                            return bad(format!(
                                "infoset `{}` lists node {h}, which is not one of its decision nodes",
                                info.name
                            ))
                        }
                    }
                }
            }
        }

        // depths and perfect recall
        let mut own_seq: Vec<[Option<Sequence>; 2]> = vec![[None, None]; n];
        for id in 1..n {
            let p = self.nodes[id].parent.unwrap_or(0);
            let a = self.nodes[id].action.unwrap_or(0);
            self.nodes[id].depth = self.nodes[p].depth + 1;
            let mut s = own_seq[p];
            if let NodeKind::Decision { player, infoset } = self.nodes[p].kind {
                s[player.index()] = Some(Sequence { infoset, action: a });
            }
            own_seq[id] = s;
        }
        for p in Player::BOTH {
            let count = self.infosets[p.index()].len();
            for i in 0..count {
                let info = &self.infosets[p.index()][i];
                let first = own_seq[info.nodes[0]][p.index()];
                if info.nodes.iter().any(|&h| own_seq[h][p.index()] != first) {
                    return bad(format!(
                        "infoset `{}` violates perfect recall: members differ in the player's own history",
                        info.name
                    ));
                }
                self.infosets[p.index()][i].parent_sequence = first;
            }
            for i in 0..count {
                let mut cur = self.infosets[p.index()][i].parent_sequence;
                let mut steps = 0;
                while let Some(s) = cur {
                    steps += 1;
                    if s.infoset == i || steps > count {
                        return bad(format!(
                            "infoset `{}` is revisited on a single path",
                            self.infosets[p.index()][i].name
                        ));
                    }
                    cur = self.infosets[p.index()][s.infoset].parent_sequence;
                }
            }
            let mut order: Vec<usize> = (0..count).collect();
            let first_node: Vec<usize> = self.infosets[p.index()]
                .iter()
                .map(|info| info.nodes.iter().copied().min().unwrap_or(0))
                .collect();
            order.sort_by_key(|&i| first_node[i]);
            self.order[p.index()] = order;
        }
        Ok(())
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: usize) -> &Node {
        &self.nodes[id]
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_terminals(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_terminal()).count()
    }

    pub fn infosets(&self, player: Player) -> &[Infoset] {
        &self.infosets[player.index()]
    }

    pub fn infoset(&self, player: Player, index: usize) -> &Infoset {
        &self.infosets[player.index()][index]
    }

    /// `player`'s infosets ordered so that every infoset comes after the
    /// infoset of its parent sequence.
    pub fn sequence_order(&self, player: Player) -> &[usize] {
        &self.order[player.index()]
    }

    pub fn action_counts(&self, player: Player) -> Vec<usize> {
        self.infosets[player.index()]
            .iter()
            .map(|i| i.actions.len())
            .collect()
    }

    pub fn is_zero_sum(&self) -> bool {
        self.zero_sum
    }

    pub fn max_depth(&self) -> usize {
        self.nodes.iter().map(|n| n.depth).max().unwrap_or(0)
    }

    pub fn payoff_scale(&self) -> f64 {
        self.nodes
            .iter()
            .filter_map(|n| match n.kind {
                NodeKind::Terminal { utility } => Some(utility[0].abs().max(utility[1].abs())),
                _ => None,
            })
            .fold(0.0, f64::max)
    }

    /// Label of the action taken at `parent` to reach `node`.
    pub fn incoming_label(&self, node: usize) -> Option<&str> {
        let n = &self.nodes[node];
        let (p, a) = (n.parent?, n.action?);
        match &self.nodes[p].kind {
            NodeKind::Chance { labels, .. } => Some(labels[a].as_str()),
            NodeKind::Decision { player, infoset } => {
                Some(self.infosets[player.index()][*infoset].actions[a].as_str())
            }
            NodeKind::Terminal { .. } => None,
        }
    }
}

struct PendingNode {
    parent: Option<(usize, usize)>,
    children: Vec<Option<usize>>,
    kind: NodeKind,
}

/// Incremental tree construction. Nodes are created top-down so indices are
/// topologically ordered; infosets are identified by a per-player key.
/// Structural mistakes are reported by [`EfgBuilder::build`].
pub struct EfgBuilder {
    nodes: Vec<PendingNode>,
    keys: [HashMap<String, usize>; 2],
    infosets: [Vec<Infoset>; 2],
    zero_sum: bool,
    error: Option<String>,
}

impl EfgBuilder {
    pub fn new(zero_sum: bool) -> Self {
        Self {
            nodes: Vec::new(),
            keys: [HashMap::new(), HashMap::new()],
            infosets: [Vec::new(), Vec::new()],
            zero_sum,
            error: None,
        }
    }

    fn push(&mut self, parent: Option<(usize, usize)>, arity: usize, kind: NodeKind) -> usize {
        let id = self.nodes.len();
        match parent {
            None if id != 0 => self.fail(format!("node {id} has no parent")),
            Some((p, a)) => match self.nodes.get_mut(p).and_then(|n| n.children.get_mut(a)) {
                Some(slot @ None) => *slot = Some(id),
                Some(Some(_)) => self.fail(format!("action {a} of node {p} is already attached")),
                None => self.fail(format!("node {p} has no action {a}")),
            },
            None => {}
        }
        self.nodes.push(PendingNode { parent, children: vec![None; arity], kind });
        id
    }

    fn fail(&mut self, msg: String) {
        if self.error.is_none() {
            self.error = Some(msg);
        }
    }

    pub fn chance(&mut self, parent: Option<(usize, usize)>, probs: Vec<f64>) -> usize {
        let labels = (0..probs.len()).map(|i| i.to_string()).collect();
        self.chance_labeled(parent, probs, labels)
    }

    pub fn chance_labeled(
        &mut self,
        parent: Option<(usize, usize)>,
        probs: Vec<f64>,
        labels: Vec<String>,
    ) -> usize {
        let arity = probs.len();
        self.push(parent, arity, NodeKind::Chance { probs, labels })
    }

    /// Adds a decision node in the infoset named `key` of `player`. All
    /// nodes sharing a key must offer the same actions.
    pub fn decision<S: AsRef<str>>(
        &mut self,
        parent: Option<(usize, usize)>,
        player: Player,
        key: &str,
        actions: &[S],
    ) -> usize {
        let actions: Vec<String> = actions.iter().map(|a| a.as_ref().to_string()).collect();
        let id = self.nodes.len();
        let pi = player.index();
        let infoset = match self.keys[pi].get(key) {
            Some(&i) => {
                if self.infosets[pi][i].actions != actions {
                    self.fail(format!("infoset `{key}` declared with different actions"));
                }
                self.infosets[pi][i].nodes.push(id);
                i
            }
            None => {
                let i = self.infosets[pi].len();
                self.keys[pi].insert(key.to_string(), i);
                self.infosets[pi].push(Infoset {
                    player,
                    name: key.to_string(),
                    nodes: vec![id],
                    actions: actions.clone(),
                    parent_sequence: None,
                });
                i
            }
        };
        self.push(parent, actions.len(), NodeKind::Decision { player, infoset })
    }

    pub fn terminal(&mut self, parent: Option<(usize, usize)>, utility: [f64; 2]) -> usize {
        self.push(parent, 0, NodeKind::Terminal { utility })
    }

    pub fn build(self) -> Result<ExtensiveFormGame> {
        if let Some(e) = self.error {
            return Err(Error::InvalidGame(e));
        }
        let mut nodes = Vec::with_capacity(self.nodes.len());
        for (id, p) in self.nodes.into_iter().enumerate() {
            let children = p
                .children
                .iter()
                .enumerate()
                .map(|(a, c)| {
                    c.ok_or_else(|| Error::InvalidGame(format!("action {a} of node {id} leads nowhere")))
                })
                .collect::<Result<Vec<_>>>()?;
            nodes.push(Node {
                parent: p.parent.map(|x| x.0),
                action: p.parent.map(|x| x.1),
                children,
                depth: 0,
                kind: p.kind,
            });
        }
        ExtensiveFormGame::from_parts(nodes, self.infosets, self.zero_sum)
    }
}
