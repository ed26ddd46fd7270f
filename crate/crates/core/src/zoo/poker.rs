use crate::error::{Error, Result};
use crate::game::{EfgBuilder, ExtensiveFormGame, Player};

fn deal(b: &mut EfgBuilder, parent: Option<(usize, usize)>, cards: &[usize]) -> usize {
    let p = 1.0 / cards.len() as f64;
    b.chance_labeled(parent, vec![p; cards.len()], cards.iter().map(|c| format!("c{c}")).collect())
}

fn showdown_sign(a: usize, b: usize) -> f64 {
    match a.cmp(&b) {
        std::cmp::Ordering::Greater => 1.0,
        std::cmp::Ordering::Less => -1.0,
        std::cmp::Ordering::Equal => 0.0,
    }
}

/// One-card poker with a deck of `deck_size` ranked cards: each player
/// antes 1 and is dealt one card, then a single betting round with a bet
/// size of 1 follows (check or bet; facing a bet, fold or call). With
/// three cards this is Kuhn poker.
pub fn one_card_poker(deck_size: usize) -> Result<ExtensiveFormGame> {
    if deck_size < 2 {
        return Err(Error::InvalidGame("one-card poker needs at least two cards".into()));
    }
    let mut b = EfgBuilder::new(true);
    let deck: Vec<usize> = (0..deck_size).collect();
    let root = deal(&mut b, None, &deck);
    for (i, &lc) in deck.iter().enumerate() {
        let rest: Vec<usize> = deck.iter().copied().filter(|&c| c != lc).collect();
        let second = deal(&mut b, Some((root, i)), &rest);
        for (j, &fc) in rest.iter().enumerate() {
            let win = showdown_sign(lc, fc);
            let l = b.decision(Some((second, j)), Player::Leader, &format!("L{lc}"), &["check", "bet"]);
            let f = b.decision(Some((l, 0)), Player::Follower, &format!("F{fc}:check"), &["check", "bet"]);
            b.terminal(Some((f, 0)), [win, -win]);
            let l2 = b.decision(Some((f, 1)), Player::Leader, &format!("L{lc}:check-bet"), &["fold", "call"]);
            b.terminal(Some((l2, 0)), [-1.0, 1.0]);
            b.terminal(Some((l2, 1)), [2.0 * win, -2.0 * win]);
            let f2 = b.decision(Some((l, 1)), Player::Follower, &format!("F{fc}:bet"), &["fold", "call"]);
            b.terminal(Some((f2, 0)), [1.0, -1.0]);
            b.terminal(Some((f2, 1)), [2.0 * win, -2.0 * win]);
        }
    }
    b.build()
}

/// Raise sizes of the two Leduc betting rounds.
const LEDUC_RAISES: [f64; 2] = [2.0, 4.0];
const LEDUC_MAX_RAISES: usize = 2;

struct Leduc<'a> {
    b: &'a mut EfgBuilder,
    cards: [usize; 2],
}

#[derive(Clone)]
struct BetState {
    round: usize,
    public: Option<usize>,
    history: String,
    round_actions: usize,
    raises: usize,
    contrib: [f64; 2],
    to_act: usize,
}

impl Leduc<'_> {
    fn node(&mut self, parent: (usize, usize), s: BetState) {
        let facing = s.contrib[0] != s.contrib[1];
        let mut actions = Vec::new();
        if facing {
            actions.push("fold");
        }
        actions.push("call");
        if s.raises < LEDUC_MAX_RAISES {
            actions.push("raise");
        }
        let player = if s.to_act == 0 { Player::Leader } else { Player::Follower };
        let public = s.public.map_or("-".to_string(), |c| format!("c{c}"));
        let key = format!("{}:c{}:{}:{}", if s.to_act == 0 { "L" } else { "F" }, self.cards[s.to_act], public, s.history);
        let id = self.b.decision(Some(parent), player, &key, &actions);
        for (a, act) in actions.iter().enumerate() {
            let mut n = s.clone();
            n.history.push(act.chars().next().unwrap());
            n.round_actions += 1;
            n.to_act = 1 - s.to_act;
            match *act {
                "fold" => {
                    let u = if s.to_act == 0 { -s.contrib[0] } else { s.contrib[1] };
                    self.b.terminal(Some((id, a)), [u, -u]);
                }
                "raise" => {
                    n.contrib[s.to_act] = s.contrib[1 - s.to_act] + LEDUC_RAISES[s.round];
                    n.raises += 1;
                    self.node((id, a), n);
                }
                _ => {
                    n.contrib[s.to_act] = s.contrib[1 - s.to_act];
                    if s.round_actions == 0 {
                        self.node((id, a), n);
                    } else if s.round == 0 {
                        self.next_round((id, a), n);
                    } else {
                        let u = n.contrib[0] * self.showdown(s.public.expect("second round has a public card"));
                        self.b.terminal(Some((id, a)), [u, -u]);
                    }
                }
            }
        }
    }

    fn next_round(&mut self, parent: (usize, usize), s: BetState) {
        let rest: Vec<usize> = (0..6).filter(|c| !self.cards.contains(c)).collect();
        let chance = deal(self.b, Some(parent), &rest);
        for (i, &c) in rest.iter().enumerate() {
            let n = BetState {
                round: 1,
                public: Some(c),
                history: format!("{}/", s.history),
                round_actions: 0,
                raises: 0,
                contrib: s.contrib,
                to_act: 0,
            };
            self.node((chance, i), n);
        }
    }

    /// +1 if the leader wins the showdown, -1 if she loses, 0 on a tie.
    fn showdown(&self, public: usize) -> f64 {
        let rank = |c: usize| c / 2;
        let [l, f] = self.cards.map(rank);
        let p = rank(public);
        match (l == p, f == p) {
            (true, false) => 1.0,
            (false, true) => -1.0,
            _ => showdown_sign(l, f),
        }
    }
}

/// Leduc hold'em: six cards in three ranks of two suits, each player antes
/// 1 and gets one private card; two betting rounds with raise sizes 2 and 4
/// and at most two raises per round, a public card dealt between them. The
/// leader acts first in both rounds. Folding is only offered when facing a
/// raise. A private card pairing the public card wins the showdown,
/// otherwise the higher rank wins and equal ranks split.
pub fn leduc_holdem() -> Result<ExtensiveFormGame> {
    let mut b = EfgBuilder::new(true);
    let deck: Vec<usize> = (0..6).collect();
    let root = deal(&mut b, None, &deck);
    for (i, &lc) in deck.iter().enumerate() {
        let rest: Vec<usize> = deck.iter().copied().filter(|&c| c != lc).collect();
        let second = deal(&mut b, Some((root, i)), &rest);
        for (j, &fc) in rest.iter().enumerate() {
            let start = BetState {
                round: 0,
                public: None,
                history: String::new(),
                round_actions: 0,
                raises: 0,
                contrib: [1.0, 1.0],
                to_act: 0,
            };
            Leduc { b: &mut b, cards: [lc, fc] }.node((second, j), start);
        }
    }
    b.build()
}
