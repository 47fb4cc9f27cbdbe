//! Finite multistage games with observed actions.
//!
//! A [`Game`] is an immutable tree. Every decision node carries one action
//! list per player (inactive players hold a single "wait" action) and its
//! children are the full product of those lists, ordered with the first
//! player's action most significant. Nodes are stored in depth-first
//! preorder; the decision nodes in that order are the histories `H` and fix
//! the coordinate order of every strategy.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::hyperreal::Rational;

pub type PlayerId = usize;
pub type NodeId = usize;

/// Default cap on `|S_i|` for eager strategy enumeration.
pub const DEFAULT_STRATEGY_CAP: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GameError {
    #[error("game must have at least one player")]
    NoPlayers,
    #[error("invalid game structure at {history}: {reason}")]
    Structure { history: String, reason: String },
    #[error("player {player} has {count} strategies, above the cap of {cap}")]
    SizeLimit { player: String, count: u128, cap: usize },
}

/// Recursive description used to build a [`Game`].
#[derive(Debug, Clone, PartialEq)]
pub enum Tree {
    Decision { actions: Vec<Vec<String>>, children: Vec<Tree> },
    Terminal { payoffs: Vec<Rational> },
}

/// A sequence of action profiles, each given as per-player action indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct History(pub Vec<Vec<usize>>);

impl History {
    pub fn root() -> Self {
        History(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_prefix_of(&self, other: &History) -> bool {
        self.0.len() <= other.0.len() && other.0[..self.0.len()] == self.0[..]
    }
}

#[derive(Debug, Clone)]
pub enum NodeKind {
    Decision {
        /// `actions[i]` is `A_i(h)`.
        actions: Vec<Vec<String>>,
        children: Vec<NodeId>,
        /// Position of this node in [`Game::histories`].
        index: usize,
    },
    Terminal {
        payoffs: Vec<Rational>,
    },
}

#[derive(Debug, Clone)]
pub struct Node {
    pub history: History,
    pub parent: Option<NodeId>,
    /// Decision-node indices of the strict prefixes, root first.
    pub prefixes: Vec<usize>,
    pub kind: NodeKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Strategy {
    pub owner: PlayerId,
    /// `choices[k]` indexes into `A_i(h_k)` for the `k`-th history.
    pub choices: Vec<usize>,
}

/// Per-player subsets `Q_i`, each a sorted list of strategy indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProductRestriction {
    pub sets: Vec<Vec<usize>>,
}

impl ProductRestriction {
    pub fn new(mut sets: Vec<Vec<usize>>) -> Self {
        for s in &mut sets {
            s.sort_unstable();
            s.dedup();
        }
        ProductRestriction { sets }
    }

    pub fn full(sizes: &[usize]) -> Self {
        ProductRestriction { sets: sizes.iter().map(|&n| (0..n).collect()).collect() }
    }

    pub fn contains(&self, player: PlayerId, strategy: usize) -> bool {
        self.sets[player].binary_search(&strategy).is_ok()
    }

    pub fn is_subset_of(&self, other: &ProductRestriction) -> bool {
        self.sets.iter().enumerate().all(|(i, s)| s.iter().all(|&x| other.contains(i, x)))
    }

    pub fn is_empty(&self) -> bool {
        self.sets.iter().any(Vec::is_empty)
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.sets.iter().map(Vec::len).collect()
    }
}

/// One behavioral-equivalence class (reduced strategy).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrategyClass {
    /// Lexicographically least member.
    pub representative: usize,
    pub members: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct Game {
    players: Vec<String>,
    nodes: Vec<Node>,
    histories: Vec<NodeId>,
    strategies: Vec<Vec<Strategy>>,
    lookup: Vec<HashMap<Vec<usize>, usize>>,
}

impl Game {
    pub fn new(players: Vec<String>, tree: Tree) -> Result<Game, GameError> {
        Game::with_cap(players, tree, DEFAULT_STRATEGY_CAP)
    }

    pub fn with_cap(players: Vec<String>, tree: Tree, cap: usize) -> Result<Game, GameError> {
        if players.is_empty() {
            return Err(GameError::NoPlayers);
        }
        let mut game = Game { players, nodes: Vec::new(), histories: Vec::new(), strategies: Vec::new(), lookup: Vec::new() };
        game.insert(tree, History::root(), None, Vec::new())?;
        game.enumerate(cap)?;
        Ok(game)
    }

    fn insert(&mut self, tree: Tree, history: History, parent: Option<NodeId>, prefixes: Vec<usize>) -> Result<NodeId, GameError> {
        let n = self.players.len();
        let id = self.nodes.len();
        let structure = |reason: String| GameError::Structure { history: format!("{history:?}"), reason };
        match tree {
            Tree::Terminal { payoffs } => {
                if payoffs.len() != n {
                    return Err(structure(format!("expected {n} payoffs, found {}", payoffs.len())));
                }
                self.nodes.push(Node { history, parent, prefixes, kind: NodeKind::Terminal { payoffs } });
            }
            Tree::Decision { actions, children } => {
                if actions.len() != n {
                    return Err(structure(format!("expected action lists for {n} players, found {}", actions.len())));
                }
                for (i, list) in actions.iter().enumerate() {
                    if list.is_empty() {
                        return Err(structure(format!("player {} has no actions", self.players[i])));
                    }
                    let mut sorted = list.clone();
                    sorted.sort();
                    sorted.dedup();
                    if sorted.len() != list.len() {
                        return Err(structure(format!("duplicate action for player {}", self.players[i])));
                    }
                }
                let expected: usize = actions.iter().map(Vec::len).product();
                if children.len() != expected {
                    return Err(structure(format!("expected {expected} children, found {}", children.len())));
                }
                let index = self.histories.len();
                self.histories.push(id);
                let radices: Vec<usize> = actions.iter().map(Vec::len).collect();
                self.nodes.push(Node {
                    history: history.clone(),
                    parent,
                    prefixes: prefixes.clone(),
                    kind: NodeKind::Decision { actions, children: Vec::new(), index },
                });
                let mut child_prefixes = prefixes;
                child_prefixes.push(index);
                let mut ids = Vec::with_capacity(children.len());
                for (k, child) in children.into_iter().enumerate() {
                    let mut path = history.0.clone();
                    path.push(decode_profile(k, &radices));
                    ids.push(self.insert(child, History(path), Some(id), child_prefixes.clone())?);
                }
                if let NodeKind::Decision { children, .. } = &mut self.nodes[id].kind {
                    *children = ids;
                }
            }
        }
        Ok(id)
    }

    fn enumerate(&mut self, cap: usize) -> Result<(), GameError> {
        for i in 0..self.players.len() {
            let radices: Vec<usize> = self.histories.iter().map(|&h| self.actions(h, i).len()).collect();
            let count = radices.iter().try_fold(1u128, |acc, &r| acc.checked_mul(r as u128)).unwrap_or(u128::MAX);
            if count > cap as u128 {
                return Err(GameError::SizeLimit { player: self.players[i].clone(), count, cap });
            }
            let count = count as usize;
            let mut list = Vec::with_capacity(count);
            let mut lookup = HashMap::with_capacity(count);
            for k in 0..count {
                let choices = decode_profile(k, &radices);
                lookup.insert(choices.clone(), k);
                list.push(Strategy { owner: i, choices });
            }
            self.strategies.push(list);
            self.lookup.push(lookup);
        }
        Ok(())
    }

    pub fn players(&self) -> &[String] {
        &self.players
    }

    pub fn num_players(&self) -> usize {
        self.players.len()
    }

    pub fn player_id(&self, name: &str) -> Option<PlayerId> {
        self.players.iter().position(|p| p == name)
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn root(&self) -> NodeId {
        0
    }

    /// Non-terminal histories `H` in preorder (node ids).
    pub fn histories(&self) -> &[NodeId] {
        &self.histories
    }

    pub fn is_static(&self) -> bool {
        self.histories.len() == 1
    }

    pub fn history_index(&self, node: NodeId) -> Option<usize> {
        match &self.nodes[node].kind {
            NodeKind::Decision { index, .. } => Some(*index),
            NodeKind::Terminal { .. } => None,
        }
    }

    pub fn find(&self, history: &History) -> Option<NodeId> {
        let mut node = self.root();
        for profile in &history.0 {
            let NodeKind::Decision { actions, children, .. } = &self.nodes[node].kind else {
                return None;
            };
            if profile.len() != actions.len() || profile.iter().zip(actions).any(|(&a, list)| a >= list.len()) {
                return None;
            }
            node = children[encode_profile(profile, actions)];
        }
        Some(node)
    }

    /// `A_i(h)`; empty for terminal nodes.
    pub fn actions(&self, node: NodeId, player: PlayerId) -> &[String] {
        match &self.nodes[node].kind {
            NodeKind::Decision { actions, .. } => &actions[player],
            NodeKind::Terminal { .. } => &[],
        }
    }

    pub fn is_active(&self, node: NodeId, player: PlayerId) -> bool {
        self.actions(node, player).len() >= 2
    }

    pub fn child(&self, node: NodeId, profile: &[usize]) -> NodeId {
        match &self.nodes[node].kind {
            NodeKind::Decision { actions, children, .. } => children[encode_profile(profile, actions)],
            NodeKind::Terminal { .. } => panic!("terminal history has no children"),
        }
    }

    pub fn payoffs(&self, node: NodeId) -> Option<&[Rational]> {
        match &self.nodes[node].kind {
            NodeKind::Terminal { payoffs } => Some(payoffs),
            NodeKind::Decision { .. } => None,
        }
    }

    pub fn terminals(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.nodes.len()).filter(|&id| matches!(self.nodes[id].kind, NodeKind::Terminal { .. }))
    }

    /// Human-readable history, `/(a,b)/(c,d)`; the root is `/`.
    pub fn history_label(&self, node: NodeId) -> String {
        let n = &self.nodes[node];
        if n.history.is_empty() {
            return "/".to_string();
        }
        let mut out = String::new();
        for (depth, profile) in n.history.0.iter().enumerate() {
            let at = self.histories[n.prefixes[depth]];
            let names: Vec<&str> = profile.iter().enumerate().map(|(i, &a)| self.actions(at, i)[a].as_str()).collect();
            out.push_str(&format!("/({})", names.join(",")));
        }
        out
    }

    /// `S_i`, materialized in canonical (lexicographic) order.
    pub fn strategies(&self, player: PlayerId) -> &[Strategy] {
        &self.strategies[player]
    }

    pub fn strategy(&self, player: PlayerId, index: usize) -> &Strategy {
        &self.strategies[player][index]
    }

    pub fn strategy_index(&self, strategy: &Strategy) -> Option<usize> {
        self.lookup[strategy.owner].get(&strategy.choices).copied()
    }

    /// Enumerates `S_i` under an explicit cap.
    pub fn enumerate_strategies(&self, player: PlayerId, cap: usize) -> Result<Vec<Strategy>, GameError> {
        let count = self.strategies[player].len();
        if count > cap {
            return Err(GameError::SizeLimit { player: self.players[player].clone(), count: count as u128, cap });
        }
        Ok(self.strategies[player].clone())
    }

    /// Canonical name: the actions chosen at the player's active histories,
    /// in preorder, joined by `.`; `-` if the player never moves.
    pub fn strategy_name(&self, strategy: &Strategy) -> String {
        let parts: Vec<&str> = self
            .histories
            .iter()
            .enumerate()
            .filter(|&(_, &h)| self.is_active(h, strategy.owner))
            .map(|(k, &h)| self.actions(h, strategy.owner)[strategy.choices[k]].as_str())
            .collect();
        if parts.is_empty() {
            "-".to_string()
        } else {
            parts.join(".")
        }
    }

    /// Path function ζ: follows the profile's choices from the root.
    pub fn path(&self, profile: &[&Strategy]) -> NodeId {
        let mut node = self.root();
        loop {
            match &self.nodes[node].kind {
                NodeKind::Terminal { .. } => return node,
                NodeKind::Decision { actions, children, index } => {
                    let choice: Vec<usize> = profile.iter().map(|s| s.choices[*index]).collect();
                    node = children[encode_profile(&choice, actions)];
                }
            }
        }
    }

    /// ζ on strategy indices.
    pub fn outcome(&self, profile: &[usize]) -> NodeId {
        let strategies: Vec<&Strategy> = profile.iter().enumerate().map(|(i, &s)| &self.strategies[i][s]).collect();
        self.path(&strategies)
    }

    /// `U_i(s) = u_i(ζ(s))`.
    pub fn payoff(&self, player: PlayerId, profile: &[usize]) -> &Rational {
        &self.payoffs(self.outcome(profile)).expect("path ends at a terminal")[player]
    }

    /// `s_i ∈ S_i(h)`: the strategy picks its own component of the realized
    /// profile at every strict prefix of `h`.
    pub fn allows(&self, strategy: &Strategy, node: NodeId) -> bool {
        let n = &self.nodes[node];
        n.prefixes.iter().zip(&n.history.0).all(|(&k, profile)| strategy.choices[k] == profile[strategy.owner])
    }

    /// `(S_i(h))_i` as index sets.
    pub fn strategies_allowing(&self, node: NodeId) -> ProductRestriction {
        ProductRestriction {
            sets: (0..self.num_players())
                .map(|i| (0..self.strategies[i].len()).filter(|&s| self.allows(&self.strategies[i][s], node)).collect())
                .collect(),
        }
    }

    /// `H_i(s_i)`: histories in `H` (by position) the strategy allows.
    pub fn allowed_histories(&self, strategy: &Strategy) -> Vec<usize> {
        (0..self.histories.len()).filter(|&k| self.allows(strategy, self.histories[k])).collect()
    }

    /// `s_i^h`: the strategy redirected toward `h` at its strict prefixes and
    /// unchanged elsewhere.
    pub fn replacement_strategy(&self, strategy: &Strategy, node: NodeId) -> Strategy {
        let n = &self.nodes[node];
        let mut choices = strategy.choices.clone();
        for (&k, profile) in n.prefixes.iter().zip(&n.history.0) {
            choices[k] = profile[strategy.owner];
        }
        Strategy { owner: strategy.owner, choices }
    }

    pub fn behaviorally_equivalent(&self, s: &Strategy, t: &Strategy) -> bool {
        assert_eq!(s.owner, t.owner, "behavioral equivalence compares strategies of one player");
        let hs = self.allowed_histories(s);
        hs == self.allowed_histories(t) && hs.iter().all(|&k| s.choices[k] == t.choices[k])
    }

    /// Partition of `S_i` into behavioral-equivalence classes, ordered by
    /// representative.
    pub fn reduce_strategies(&self, player: PlayerId) -> Vec<StrategyClass> {
        let mut keyed: HashMap<Vec<Option<usize>>, usize> = HashMap::new();
        let mut classes: Vec<StrategyClass> = Vec::new();
        for (idx, s) in self.strategies[player].iter().enumerate() {
            // Choices at allowed histories, None elsewhere: equal keys iff equivalent.
            let key: Vec<Option<usize>> = (0..self.histories.len())
                .map(|k| self.allows(s, self.histories[k]).then_some(s.choices[k]))
                .collect();
            match keyed.get(&key) {
                Some(&c) => classes[c].members.push(idx),
                None => {
                    keyed.insert(key, classes.len());
                    classes.push(StrategyClass { representative: idx, members: vec![idx] });
                }
            }
        }
        classes
    }
}

impl fmt::Display for History {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("/");
        }
        for profile in &self.0 {
            let parts: Vec<String> = profile.iter().map(usize::to_string).collect();
            write!(f, "/({})", parts.join(","))?;
        }
        Ok(())
    }
}

/// Which strategies a [`StrategicForm`] ranges over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StrategySpace {
    Full,
    /// One representative per behavioral-equivalence class.
    Reduced,
}

/// Tabulated normal form of a [`Game`] over full or reduced strategies.
///
/// Strategies are addressed by local indices `0..size(i)`. A co-player
/// profile of `i` is a mixed-radix index over the other players' local
/// indices, lowest player id most significant.
#[derive(Debug, Clone)]
pub struct StrategicForm<'g> {
    game: &'g Game,
    space: StrategySpace,
    members: Vec<Vec<usize>>,
    local: Vec<Vec<usize>>,
    payoff: Vec<Vec<Vec<Rational>>>,
    allow: Vec<Vec<Vec<bool>>>,
}

impl<'g> StrategicForm<'g> {
    pub fn new(game: &'g Game, space: StrategySpace) -> Self {
        let n = game.num_players();
        let mut members = Vec::with_capacity(n);
        let mut local = Vec::with_capacity(n);
        for i in 0..n {
            match space {
                StrategySpace::Full => {
                    let all: Vec<usize> = (0..game.strategies(i).len()).collect();
                    local.push(all.clone());
                    members.push(all);
                }
                StrategySpace::Reduced => {
                    let classes = game.reduce_strategies(i);
                    let mut map = vec![0; game.strategies(i).len()];
                    for (c, class) in classes.iter().enumerate() {
                        for &m in &class.members {
                            map[m] = c;
                        }
                    }
                    members.push(classes.iter().map(|c| c.representative).collect());
                    local.push(map);
                }
            }
        }
        let sizes: Vec<usize> = members.iter().map(Vec::len).collect();
        let total: usize = sizes.iter().product();
        let mut payoff: Vec<Vec<Vec<Rational>>> = (0..n)
            .map(|i| {
                let co: usize = (0..n).filter(|&j| j != i).map(|j| sizes[j]).product();
                vec![Vec::with_capacity(co); sizes[i]]
            })
            .collect();
        // Profiles in mixed-radix order visit each player's co-profiles in
        // increasing order for every fixed own strategy.
        for k in 0..total {
            let profile = decode_profile(k, &sizes);
            let global: Vec<usize> = profile.iter().enumerate().map(|(i, &s)| members[i][s]).collect();
            let payoffs = game.payoffs(game.outcome(&global)).expect("path ends at a terminal");
            for i in 0..n {
                payoff[i][profile[i]].push(payoffs[i].clone());
            }
        }
        let allow = (0..n)
            .map(|i| {
                game.histories()
                    .iter()
                    .map(|&h| members[i].iter().map(|&s| game.allows(game.strategy(i, s), h)).collect())
                    .collect()
            })
            .collect();
        StrategicForm { game, space, members, local, payoff, allow }
    }

    pub fn game(&self) -> &'g Game {
        self.game
    }

    pub fn space(&self) -> StrategySpace {
        self.space
    }

    pub fn num_players(&self) -> usize {
        self.members.len()
    }

    pub fn size(&self, player: PlayerId) -> usize {
        self.members[player].len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.members.iter().map(Vec::len).collect()
    }

    /// Game-level strategy index behind a local index.
    pub fn global(&self, player: PlayerId, local: usize) -> usize {
        self.members[player][local]
    }

    /// Local index of a game-level strategy (its class, when reduced).
    pub fn local(&self, player: PlayerId, global: usize) -> usize {
        self.local[player][global]
    }

    pub fn strategy(&self, player: PlayerId, local: usize) -> &'g Strategy {
        self.game.strategy(player, self.members[player][local])
    }

    pub fn strategy_name(&self, player: PlayerId, local: usize) -> String {
        self.game.strategy_name(self.strategy(player, local))
    }

    pub fn num_coprofiles(&self, player: PlayerId) -> usize {
        (0..self.num_players()).filter(|&j| j != player).map(|j| self.size(j)).product()
    }

    pub fn coprofile(&self, player: PlayerId, mut index: usize) -> Vec<usize> {
        let others: Vec<usize> = (0..self.num_players()).filter(|&j| j != player).collect();
        let mut out = vec![0; others.len()];
        for (slot, &j) in out.iter_mut().zip(&others).rev() {
            let r = self.size(j);
            *slot = index % r;
            index /= r;
        }
        out
    }

    pub fn coprofile_index(&self, player: PlayerId, others: &[usize]) -> usize {
        (0..self.num_players()).filter(|&j| j != player).zip(others).fold(0, |acc, (j, &s)| acc * self.size(j) + s)
    }

    /// Own strategy and co-profile merged into a full profile of local indices.
    pub fn profile(&self, player: PlayerId, own: usize, coprofile: usize) -> Vec<usize> {
        let mut out = self.coprofile(player, coprofile);
        out.insert(player, own);
        out
    }

    /// `U_i(s_i, s_-i)` on local indices.
    pub fn payoff(&self, player: PlayerId, own: usize, coprofile: usize) -> &Rational {
        &self.payoff[player][own][coprofile]
    }

    /// Payoff row of `s_i` against every co-profile.
    pub fn payoff_row(&self, player: PlayerId, own: usize) -> &[Rational] {
        &self.payoff[player][own]
    }

    /// Whether local strategy `own` allows the `k`-th history.
    pub fn allows(&self, player: PlayerId, own: usize, k: usize) -> bool {
        self.allow[player][k][own]
    }

    /// `S_i(h)` in local indices, for the `k`-th history.
    pub fn own_allowing(&self, player: PlayerId, k: usize) -> Vec<usize> {
        (0..self.size(player)).filter(|&s| self.allow[player][k][s]).collect()
    }

    /// `S_-i(h)` as sorted co-profile indices, for the `k`-th history.
    pub fn coprofiles_allowing(&self, player: PlayerId, k: usize) -> Vec<usize> {
        let sets: Vec<Vec<usize>> = (0..self.num_players()).map(|j| self.own_allowing(j, k)).collect();
        self.coprofiles_in(player, &ProductRestriction { sets })
    }

    /// `Q_-i` as sorted co-profile indices.
    pub fn coprofiles_in(&self, player: PlayerId, q: &ProductRestriction) -> Vec<usize> {
        let mut out = vec![0usize];
        for j in (0..self.num_players()).filter(|&j| j != player) {
            let r = self.size(j);
            let mut next = Vec::with_capacity(out.len() * q.sets[j].len());
            for &base in &out {
                for &s in &q.sets[j] {
                    next.push(base * r + s);
                }
            }
            out = next;
        }
        out
    }

    /// Local index of `s_i^h` for the `k`-th history.
    pub fn replacement(&self, player: PlayerId, own: usize, k: usize) -> usize {
        let replaced = self.game.replacement_strategy(self.strategy(player, own), self.game.histories()[k]);
        let global = self.game.strategy_index(&replaced).expect("replacement is a strategy");
        self.local[player][global]
    }

    pub fn full_restriction(&self) -> ProductRestriction {
        ProductRestriction::full(&self.sizes())
    }

    /// `H_i(s_i)` as history positions.
    pub fn allowed_histories(&self, player: PlayerId, own: usize) -> Vec<usize> {
        (0..self.game.histories().len()).filter(|&k| self.allow[player][k][own]).collect()
    }
}

/// Mixed-radix decoding with the first coordinate most significant.
pub fn decode_profile(mut k: usize, radices: &[usize]) -> Vec<usize> {
    let mut out = vec![0; radices.len()];
    for (slot, &r) in out.iter_mut().zip(radices).rev() {
        *slot = k % r;
        k /= r;
    }
    out
}

pub fn encode_profile(profile: &[usize], actions: &[Vec<String>]) -> usize {
    profile.iter().zip(actions).fold(0, |acc, (&a, list)| acc * list.len() + a)
}
