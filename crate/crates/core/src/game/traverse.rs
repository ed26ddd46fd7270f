use super::{BehavioralStrategy, ExtensiveFormGame, NodeKind, Player};
use crate::error::Result;

/// Per-node reach contributions of each player and of chance.
#[derive(Clone, Debug, PartialEq)]
pub struct Reach {
    pub leader: Vec<f64>,
    pub follower: Vec<f64>,
    pub chance: Vec<f64>,
}

impl Reach {
    pub fn player(&self, p: Player, h: usize) -> f64 {
        match p {
            Player::Leader => self.leader[h],
            Player::Follower => self.follower[h],
        }
    }

    /// Contribution of everyone except `p`, chance included.
    pub fn others(&self, p: Player, h: usize) -> f64 {
        self.player(p.opponent(), h) * self.chance[h]
    }

    pub fn total(&self, h: usize) -> f64 {
        self.leader[h] * self.follower[h] * self.chance[h]
    }
}

/// Counterfactual values of one player: `action[I][a]` is v(σ, I, a) and
/// `infoset[I]` is v(σ, I).
#[derive(Clone, Debug, PartialEq)]
pub struct CounterfactualValues {
    pub action: Vec<Vec<f64>>,
    pub infoset: Vec<f64>,
}

/// Result of [`ExtensiveFormGame::respond`]: the computed strategy and the
/// root utilities of both players under the resulting profile.
#[derive(Clone, Debug, PartialEq)]
pub struct Response {
    pub strategy: BehavioralStrategy,
    pub value: [f64; 2],
}

fn pick<'a>(
    p: Player,
    leader: &'a BehavioralStrategy,
    follower: &'a BehavioralStrategy,
) -> &'a BehavioralStrategy {
    match p {
        Player::Leader => leader,
        Player::Follower => follower,
    }
}

impl ExtensiveFormGame {
    fn check_profile(&self, leader: &BehavioralStrategy, follower: &BehavioralStrategy) -> Result<()> {
        leader.check(&self.action_counts(Player::Leader))?;
        follower.check(&self.action_counts(Player::Follower))
    }

    pub fn reach_probabilities(
        &self,
        leader: &BehavioralStrategy,
        follower: &BehavioralStrategy,
    ) -> Result<Reach> {
        self.check_profile(leader, follower)?;
        Ok(self.reach_unchecked(leader, follower))
    }

    pub(crate) fn reach_unchecked(
        &self,
        leader: &BehavioralStrategy,
        follower: &BehavioralStrategy,
    ) -> Reach {
        let n = self.num_nodes();
        let mut r = Reach {
            leader: vec![1.0; n],
            follower: vec![1.0; n],
            chance: vec![1.0; n],
        };
        for (h, node) in self.nodes().iter().enumerate() {
            for (a, &c) in node.children.iter().enumerate() {
                r.leader[c] = r.leader[h];
                r.follower[c] = r.follower[h];
                r.chance[c] = r.chance[h];
                match &node.kind {
                    NodeKind::Chance { probs, .. } => r.chance[c] *= probs[a],
                    NodeKind::Decision { player: Player::Leader, infoset } => {
                        r.leader[c] *= leader.infoset(*infoset)[a]
                    }
                    NodeKind::Decision { player: Player::Follower, infoset } => {
                        r.follower[c] *= follower.infoset(*infoset)[a]
                    }
                    NodeKind::Terminal { .. } => {}
                }
            }
        }
        r
    }

    /// Expected utility of both players conditional on reaching each node.
    pub(crate) fn node_values(
        &self,
        leader: &BehavioralStrategy,
        follower: &BehavioralStrategy,
    ) -> Vec<[f64; 2]> {
        let nodes = self.nodes();
        let mut v = vec![[0.0; 2]; nodes.len()];
        for h in (0..nodes.len()).rev() {
            let node = &nodes[h];
            v[h] = match &node.kind {
                NodeKind::Terminal { utility } => *utility,
                NodeKind::Chance { probs, .. } => weighted(&node.children, probs, &v),
                NodeKind::Decision { player, infoset } => {
                    weighted(&node.children, pick(*player, leader, follower).infoset(*infoset), &v)
                }
            };
        }
        v
    }

    pub fn expected_utility(
        &self,
        leader: &BehavioralStrategy,
        follower: &BehavioralStrategy,
    ) -> Result<[f64; 2]> {
        self.check_profile(leader, follower)?;
        Ok(self.expected_utility_unchecked(leader, follower))
    }

    pub(crate) fn expected_utility_unchecked(
        &self,
        leader: &BehavioralStrategy,
        follower: &BehavioralStrategy,
    ) -> [f64; 2] {
        self.node_values(leader, follower)[0]
    }

    pub fn counterfactual_values(
        &self,
        leader: &BehavioralStrategy,
        follower: &BehavioralStrategy,
        player: Player,
    ) -> Result<CounterfactualValues> {
        self.check_profile(leader, follower)?;
        Ok(self.counterfactual_values_unchecked(leader, follower, player))
    }

    pub(crate) fn counterfactual_values_unchecked(
        &self,
        leader: &BehavioralStrategy,
        follower: &BehavioralStrategy,
        player: Player,
    ) -> CounterfactualValues {
        let reach = self.reach_unchecked(leader, follower);
        let values = self.node_values(leader, follower);
        let own = pick(player, leader, follower);
        let pi = player.index();
        let mut action = Vec::with_capacity(self.infosets(player).len());
        let mut infoset = Vec::with_capacity(self.infosets(player).len());
        for (i, info) in self.infosets(player).iter().enumerate() {
            let mut va = vec![0.0; info.actions.len()];
            for &h in &info.nodes {
                let w = reach.others(player, h);
                if w == 0.0 {
                    continue;
                }
                for (slot, &c) in va.iter_mut().zip(&self.node(h).children) {
                    *slot += w * values[c][pi];
                }
            }
            infoset.push(va.iter().zip(own.infoset(i)).map(|(v, p)| v * p).sum());
            action.push(va);
        }
        CounterfactualValues { action, infoset }
    }

    /// Probability that `player`'s own actions lead to each of its
    /// infosets (the same for every member node under perfect recall).
    pub fn own_reach(&self, player: Player, strategy: &BehavioralStrategy) -> Vec<f64> {
        let mut reach = vec![1.0; self.infosets(player).len()];
        for &i in self.sequence_order(player) {
            if let Some(s) = self.infoset(player, i).parent_sequence {
                reach[i] = reach[s.infoset] * strategy.infoset(s.infoset)[s.action];
            }
        }
        reach
    }

    /// Builds a strategy for `responder` against the fixed strategy of the
    /// other player, deepest infosets first. At each infoset `rule` receives
    /// the responder's counterfactual action values (computed with the
    /// already-decided strategy below) and the other player's values for
    /// the same actions, and returns the distribution to play.
    pub fn respond<F>(&self, fixed: &BehavioralStrategy, responder: Player, rule: F) -> Response
    where
        F: FnMut(usize, &[f64], &[f64]) -> Vec<f64>,
    {
        let n = self.num_nodes();
        let mut outside = vec![1.0; n];
        for (h, node) in self.nodes().iter().enumerate() {
            for (a, &c) in node.children.iter().enumerate() {
                outside[c] = outside[h]
                    * match &node.kind {
                        NodeKind::Chance { probs, .. } => probs[a],
                        NodeKind::Decision { player, infoset } if *player != responder => {
                            fixed.infoset(*infoset)[a]
                        }
                        _ => 1.0,
                    };
            }
        }
        let mut sweep = ResponseSweep {
            game: self,
            fixed,
            responder,
            outside,
            values: vec![None; n],
            chosen: vec![None; self.infosets(responder).len()],
            rule,
        };
        let value = sweep.value(0);
        // infosets below unreachable-by-tree branches are still visited here
        for i in 0..sweep.chosen.len() {
            sweep.solve_infoset(i);
        }
        let strategy = BehavioralStrategy::new(
            sweep.chosen.into_iter().map(|p| p.unwrap_or_default()).collect(),
        );
        Response { strategy, value }
    }
}

fn weighted(children: &[usize], probs: &[f64], v: &[[f64; 2]]) -> [f64; 2] {
    let mut out = [0.0; 2];
    for (&c, &p) in children.iter().zip(probs) {
        out[0] += p * v[c][0];
        out[1] += p * v[c][1];
    }
    out
}

struct ResponseSweep<'a, F> {
    game: &'a ExtensiveFormGame,
    fixed: &'a BehavioralStrategy,
    responder: Player,
    outside: Vec<f64>,
    values: Vec<Option<[f64; 2]>>,
    chosen: Vec<Option<Vec<f64>>>,
    rule: F,
}

impl<F> ResponseSweep<'_, F>
where
    F: FnMut(usize, &[f64], &[f64]) -> Vec<f64>,
{
    fn value(&mut self, h: usize) -> [f64; 2] {
        if let Some(v) = self.values[h] {
            return v;
        }
        let game = self.game;
        let node = game.node(h);
        let v = match &node.kind {
            NodeKind::Terminal { utility } => *utility,
            NodeKind::Chance { probs, .. } => self.mix(&node.children, probs),
            NodeKind::Decision { player, infoset } if *player != self.responder => {
                let fixed = self.fixed;
                self.mix(&node.children, fixed.infoset(*infoset))
            }
            NodeKind::Decision { infoset, .. } => {
                self.solve_infoset(*infoset);
                let probs = self.chosen[*infoset].clone().unwrap_or_default();
                self.mix(&node.children, &probs)
            }
        };
        self.values[h] = Some(v);
        v
    }

    fn mix(&mut self, children: &[usize], probs: &[f64]) -> [f64; 2] {
        let mut out = [0.0; 2];
        for (&c, &p) in children.iter().zip(probs) {
            let v = self.value(c);
            out[0] += p * v[0];
            out[1] += p * v[1];
        }
        out
    }

    fn solve_infoset(&mut self, i: usize) {
        if self.chosen[i].is_some() {
            return;
        }
        let game = self.game;
        let info = game.infoset(self.responder, i);
        let r = self.responder.index();
        let mut own = vec![0.0; info.actions.len()];
        let mut other = vec![0.0; info.actions.len()];
        for &h in &info.nodes {
            let w = self.outside[h];
            for (a, &c) in game.node(h).children.iter().enumerate() {
                let v = self.value(c);
                own[a] += w * v[r];
                other[a] += w * v[1 - r];
            }
        }
        self.chosen[i] = Some((self.rule)(i, &own, &other));
    }
}
