//! MCTS node store and selection mathematics shared by all tree planners:
//! plain UCB, virtual-loss UCB, top-m UCT, and guided scoring with a prior.
//!
//! The tree is a flat arena; selection and backpropagation run on the driver
//! thread while simulations operate on detached state copies.

use crate::Real;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum TreeError {
    #[error("guided scoring requires a prior value")]
    MissingPrior,
    #[error("tree is fully explored")]
    Exhausted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// Q/N + c·√(2·ln N_parent / N)
    Ucb1,
    /// Q/(N+N̂) + c·√(2·ln(N_parent+N̂_parent)/(N+N̂))
    UcbVirtual,
    /// mean of top-min(N,m) rewards + c·√(ln N_parent / N)
    UctTopM,
    /// (prior + Σ top-m rewards)/N, no exploration term
    Guided,
}

#[derive(Debug, Clone, Copy)]
pub struct SelectionPolicy<S> {
    pub variant: Variant,
    pub c: S,
    pub m: usize,
}

impl<S: Real> SelectionPolicy<S> {
    pub fn new(variant: Variant, c: S, m: usize) -> Self {
        assert!(c >= S::zero() && m >= 1);
        Self { variant, c, m }
    }
}

/// Bounded descending reward multiset; only the top `cap` values are kept.
#[derive(Debug, Clone, PartialEq)]
pub struct RewardRecord<S> {
    values: Vec<S>,
    cap: usize,
}

impl<S: Real> RewardRecord<S> {
    pub fn new(cap: usize) -> Self {
        Self {
            values: Vec::new(),
            cap: cap.max(1),
        }
    }

    pub fn insert(&mut self, v: S) {
        let pos = self.values.partition_point(|x| *x >= v);
        if pos >= self.cap {
            return;
        }
        self.values.insert(pos, v);
        self.values.truncate(self.cap);
    }

    pub fn sum(&self) -> S {
        self.values.iter().copied().sum()
    }

    pub fn top_sum(&self, m: usize) -> S {
        self.values.iter().take(m).copied().sum()
    }

    pub fn max(&self) -> S {
        self.values.first().copied().unwrap_or(S::zero())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }
}

/// Why a node is a leaf forever.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Terminal {
    No,
    /// Target graspable / goal arrangement reached.
    Success,
    /// Out of bounds or otherwise failed.
    Failure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub usize);

#[derive(Debug, Clone)]
pub struct SearchNode<St, A, S> {
    pub state: St,
    pub parent: Option<NodeId>,
    pub action_from_parent: Option<A>,
    pub depth: usize,
    pub visits: u32,
    pub virtual_visits: u32,
    pub rewards: RewardRecord<S>,
    pub children: Vec<NodeId>,
    pub untried: std::collections::VecDeque<A>,
    pub terminal: Terminal,
    pub exhausted: bool,
    /// Path-derived seed: stable across batch sizes.
    pub node_seed: u64,
    /// Number of untried actions popped so far (expansion ordinal source).
    pub popped: u32,
    /// Reward of the node's own state (used by max-mode backpropagation and
    /// terminal shortcuts).
    pub own_reward: S,
    /// Guided variant: max prior over this node's sampled action set.
    pub prior_max: S,
    /// Cumulative action cost from the root (rearrangement domains).
    pub cost: S,
}

pub struct Tree<St, A, S> {
    pub nodes: Vec<SearchNode<St, A, S>>,
    reward_cap: usize,
}

pub const ROOT: NodeId = NodeId(0);

impl<St, A: Clone, S: Real> Tree<St, A, S> {
    pub fn new(
        root_state: St,
        untried: Vec<A>,
        terminal: Terminal,
        node_seed: u64,
        own_reward: S,
        prior_max: S,
        reward_cap: usize,
        initial_visits: u32,
    ) -> Self {
        let root = SearchNode {
            state: root_state,
            parent: None,
            action_from_parent: None,
            depth: 0,
            visits: initial_visits,
            virtual_visits: 0,
            rewards: RewardRecord::new(reward_cap),
            children: Vec::new(),
            untried: untried.into(),
            terminal,
            exhausted: terminal != Terminal::No,
            node_seed,
            popped: 0,
            own_reward,
            prior_max,
            cost: S::zero(),
        };
        Self {
            nodes: vec![root],
            reward_cap,
        }
    }

    pub fn node(&self, id: NodeId) -> &SearchNode<St, A, S> {
        &self.nodes[id.0]
    }

    pub fn node_mut(&mut self, id: NodeId) -> &mut SearchNode<St, A, S> {
        &mut self.nodes[id.0]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Attach an expanded child. `initial_visits` is 1 for the guided
    /// variant (its accounting initializes N to one) and 0 otherwise.
    #[allow(clippy::too_many_arguments)]
    pub fn add_child(
        &mut self,
        parent: NodeId,
        action: A,
        state: St,
        untried: Vec<A>,
        terminal: Terminal,
        node_seed: u64,
        own_reward: S,
        prior_max: S,
        cost: S,
        initial_visits: u32,
    ) -> NodeId {
        let depth = self.nodes[parent.0].depth + 1;
        let id = NodeId(self.nodes.len());
        self.nodes.push(SearchNode {
            state,
            parent: Some(parent),
            action_from_parent: Some(action),
            depth,
            visits: initial_visits,
            virtual_visits: 0,
            rewards: RewardRecord::new(self.reward_cap),
            children: Vec::new(),
            untried: untried.into(),
            terminal,
            exhausted: terminal != Terminal::No,
            node_seed,
            popped: 0,
            own_reward,
            prior_max,
            cost,
        });
        self.nodes[parent.0].children.push(id);
        id
    }
}

/// Selection score of `child` under `policy`. Unvisited children (N = 0,
/// N̂ = 0) score +∞ so they are taken before any visited child.
pub fn score_child<St, A: Clone, S: Real>(
    policy: &SelectionPolicy<S>,
    parent: &SearchNode<St, A, S>,
    child: &SearchNode<St, A, S>,
    prior: Option<S>,
) -> Result<S, TreeError> {
    if policy.variant == Variant::Guided && prior.is_none() {
        return Err(TreeError::MissingPrior);
    }
    let n = S::from_u32(child.visits).unwrap();
    let n_hat = S::from_u32(child.virtual_visits).unwrap();
    if child.visits + child.virtual_visits == 0 {
        return Ok(S::infinity());
    }
    let np = S::from_u32(parent.visits).unwrap();
    let np_hat = S::from_u32(parent.virtual_visits).unwrap();
    let two = S::of(2.0);
    Ok(match policy.variant {
        Variant::Ucb1 => {
            child.rewards.sum() / n + policy.c * (two * np.ln() / n).sqrt()
        }
        Variant::UcbVirtual => {
            let denom = n + n_hat;
            child.rewards.sum() / denom + policy.c * (two * (np + np_hat).ln() / denom).sqrt()
        }
        Variant::UctTopM => {
            let k = (child.visits as usize).min(policy.m).max(1);
            let mean = child.rewards.top_sum(k) / S::from_usize(k).unwrap();
            mean + policy.c * (np.ln() / n).sqrt()
        }
        Variant::Guided => (prior.unwrap() + child.rewards.top_sum(policy.m)) / n,
    })
}

fn effectively_terminal<St, A, S>(node: &SearchNode<St, A, S>, depth_cap: usize) -> bool {
    node.terminal != Terminal::No || node.depth >= depth_cap
}

/// Descend by argmax child score until a node with untried actions (above
/// the depth cap), popping and returning its first untried action. Dead
/// subtrees are marked exhausted along the way.
pub fn select_leaf<St, A: Clone, S: Real>(
    tree: &mut Tree<St, A, S>,
    policy: &SelectionPolicy<S>,
    depth_cap: usize,
) -> Result<(NodeId, A), TreeError> {
    let mut current = ROOT;
    loop {
        let node = tree.node(current);
        if node.exhausted || effectively_terminal(node, depth_cap) {
            tree.node_mut(current).exhausted = true;
            match tree.node(current).parent {
                Some(p) => {
                    current = p;
                    continue;
                }
                None => return Err(TreeError::Exhausted),
            }
        }
        if !node.untried.is_empty() && node.depth < depth_cap {
            let action = tree.node_mut(current).untried.pop_front().unwrap();
            tree.node_mut(current).popped += 1;
            return Ok((current, action));
        }
        // Fully tried here: descend into the best viable child.
        let prior = node.prior_max;
        let mut best: Option<(S, NodeId)> = None;
        for &c in &node.children {
            let child = tree.node(c);
            if child.exhausted || effectively_terminal(child, depth_cap) {
                continue;
            }
            let s = score_child(policy, node, child, Some(prior))?;
            if best.as_ref().map_or(true, |(b, _)| s > *b) {
                best = Some((s, c));
            }
        }
        match best {
            Some((_, c)) => current = c,
            None => {
                // No viable children and nothing untried: dead subtree.
                tree.node_mut(current).exhausted = true;
                match tree.node(current).parent {
                    Some(p) => current = p,
                    None => return Err(TreeError::Exhausted),
                }
            }
        }
    }
}

/// Collect up to `batch_size` unique (node, action) pairs, inflating virtual
/// counts along each selected path, then reset every touched N̂ to zero.
/// May return fewer pairs when the tree runs out.
pub fn select_batch<St, A: Clone, S: Real>(
    tree: &mut Tree<St, A, S>,
    policy: &SelectionPolicy<S>,
    depth_cap: usize,
    batch_size: usize,
) -> Vec<(NodeId, A)> {
    let mut pairs = Vec::with_capacity(batch_size);
    let mut touched: Vec<NodeId> = Vec::new();
    for _ in 0..batch_size {
        match select_leaf(tree, policy, depth_cap) {
            Ok((id, action)) => {
                // Increment virtual counts of the node and its ancestors.
                let mut cur = Some(id);
                while let Some(c) = cur {
                    tree.node_mut(c).virtual_visits += 1;
                    touched.push(c);
                    cur = tree.node(c).parent;
                }
                pairs.push((id, action));
            }
            Err(TreeError::Exhausted) => break,
            Err(_) => unreachable!("selection policies are validated upstream"),
        }
    }
    for id in touched {
        tree.node_mut(id).virtual_visits = 0;
    }
    pairs
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackpropMode {
    /// VFT-style: running value maxed with each node's own reward.
    Max,
    /// Plain accumulation for the UCB variants.
    Sum,
}

/// Walk from `leaf` to the root, incrementing N and recording the running
/// value, discounted by `gamma` per level. In `Max` mode the running value
/// is first maxed with the node's own reward.
pub fn backpropagate<St, A: Clone, S: Real>(
    tree: &mut Tree<St, A, S>,
    leaf: NodeId,
    reward: S,
    mode: BackpropMode,
    gamma: S,
) {
    let mut r = reward;
    let mut cur = Some(leaf);
    while let Some(id) = cur {
        let node = tree.node_mut(id);
        node.visits += 1;
        if mode == BackpropMode::Max {
            r = r.max(node.own_reward);
        }
        node.rewards.insert(r);
        r = r * gamma;
        cur = tree.node(id).parent;
    }
}

/// Exploitation-only ranking of the root's children for the final action
/// choice; ties go to creation order. `None` when the root has no children.
pub fn best_root_child<St, A: Clone, S: Real>(
    tree: &Tree<St, A, S>,
    variant: Variant,
) -> Option<NodeId> {
    let root = tree.node(ROOT);
    let mut best: Option<(S, NodeId)> = None;
    for &c in &root.children {
        let child = tree.node(c);
        if child.visits == 0 {
            continue;
        }
        let n = S::from_u32(child.visits).unwrap();
        let value = match variant {
            // m = 1, C = 0: the single best return.
            Variant::UctTopM => child.rewards.max(),
            // Q_best = prior + best return, no denominator.
            Variant::Guided => root.prior_max + child.rewards.max(),
            // Eq. ucb with c = 0 (virtual counts are zero at rest).
            Variant::Ucb1 | Variant::UcbVirtual => child.rewards.sum() / n,
        };
        if best.as_ref().map_or(true, |(b, _)| value > *b) {
            best = Some((value, c));
        }
    }
    best.map(|(_, id)| id)
}

#[cfg(test)]
mod tests {
    use super::*;

    type T = Tree<u32, u32, f64>;

    fn blank_tree(untried: Vec<u32>) -> T {
        Tree::new(0, untried, Terminal::No, 1, 0.0, 0.0, 100, 0)
    }

    fn policy(variant: Variant, c: f64, m: usize) -> SelectionPolicy<f64> {
        SelectionPolicy::new(variant, c, m)
    }

    #[test]
    fn ucb1_hand_value() {
        let mut tree = blank_tree(vec![]);
        tree.node_mut(ROOT).visits = 8;
        let c = tree.add_child(ROOT, 1, 1, vec![], Terminal::No, 2, 0.0, 0.0, 0.0, 0);
        tree.node_mut(c).visits = 2;
        tree.node_mut(c).rewards.insert(0.6);
        tree.node_mut(c).rewards.insert(0.4);
        let s = score_child(&policy(Variant::Ucb1, 0.3, 1), tree.node(ROOT), tree.node(c), None)
            .unwrap();
        let expected = 0.5 + 0.3 * (2.0 * (8.0f64).ln() / 2.0).sqrt();
        assert!((s - expected).abs() < 1e-12);
        assert!((s - 0.9326080659802649).abs() < 1e-12);
    }

    #[test]
    fn ucb_virtual_hand_value() {
        let mut tree = blank_tree(vec![]);
        tree.node_mut(ROOT).visits = 8;
        tree.node_mut(ROOT).virtual_visits = 1;
        let c = tree.add_child(ROOT, 1, 1, vec![], Terminal::No, 2, 0.0, 0.0, 0.0, 0);
        tree.node_mut(c).visits = 2;
        tree.node_mut(c).virtual_visits = 1;
        tree.node_mut(c).rewards.insert(0.6);
        tree.node_mut(c).rewards.insert(0.4);
        let s = score_child(
            &policy(Variant::UcbVirtual, 0.3, 1),
            tree.node(ROOT),
            tree.node(c),
            None,
        )
        .unwrap();
        let expected = 1.0 / 3.0 + 0.3 * (2.0 * (9.0f64).ln() / 3.0).sqrt();
        assert!((s - expected).abs() < 1e-12);
    }

    #[test]
    fn unvisited_child_scores_infinity() {
        let mut tree = blank_tree(vec![]);
        tree.node_mut(ROOT).visits = 3;
        let c = tree.add_child(ROOT, 1, 1, vec![], Terminal::No, 2, 0.0, 0.0, 0.0, 0);
        let s = score_child(&policy(Variant::Ucb1, 0.3, 1), tree.node(ROOT), tree.node(c), None)
            .unwrap();
        assert!(s.is_infinite() && s > 0.0);
    }

    #[test]
    fn guided_needs_prior() {
        let mut tree = blank_tree(vec![]);
        tree.node_mut(ROOT).visits = 3;
        let c = tree.add_child(ROOT, 1, 1, vec![], Terminal::No, 2, 0.0, 0.0, 0.0, 1);
        tree.node_mut(c).rewards.insert(0.5);
        let r = score_child(&policy(Variant::Guided, 0.0, 3), tree.node(ROOT), tree.node(c), None);
        assert_eq!(r.unwrap_err(), TreeError::MissingPrior);
        let s = score_child(
            &policy(Variant::Guided, 0.0, 3),
            tree.node(ROOT),
            tree.node(c),
            Some(0.25),
        )
        .unwrap();
        assert!((s - 0.75).abs() < 1e-12, "N initialized to 1");
    }

    #[test]
    fn fresh_root_returns_first_untried() {
        let mut tree = blank_tree(vec![7, 8, 9]);
        let (id, a) = select_leaf(&mut tree, &policy(Variant::Ucb1, 0.3, 1), 7).unwrap();
        assert_eq!(id, ROOT);
        assert_eq!(a, 7);
        assert_eq!(tree.node(ROOT).untried.len(), 2);
    }

    #[test]
    fn pure_exploitation_descends_into_better_child() {
        let mut tree = blank_tree(vec![]);
        tree.node_mut(ROOT).visits = 2;
        let hi = tree.add_child(ROOT, 1, 1, vec![10], Terminal::No, 2, 0.0, 0.0, 0.0, 0);
        let lo = tree.add_child(ROOT, 2, 2, vec![20], Terminal::No, 3, 0.0, 0.0, 0.0, 0);
        tree.node_mut(hi).visits = 1;
        tree.node_mut(hi).rewards.insert(0.9);
        tree.node_mut(lo).visits = 1;
        tree.node_mut(lo).rewards.insert(0.1);
        let (id, a) = select_leaf(&mut tree, &policy(Variant::Ucb1, 0.0, 1), 7).unwrap();
        assert_eq!(id, hi);
        assert_eq!(a, 10);
    }

    #[test]
    fn selection_path_matches_brute_force_rescore() {
        // Three-level hand-built tree; walk must equal recomputing all
        // scores by hand at each level.
        let pol = policy(Variant::Ucb1, 0.5, 1);
        let mut tree = blank_tree(vec![]);
        tree.node_mut(ROOT).visits = 10;
        let a = tree.add_child(ROOT, 1, 1, vec![], Terminal::No, 2, 0.0, 0.0, 0.0, 0);
        let b = tree.add_child(ROOT, 2, 2, vec![], Terminal::No, 3, 0.0, 0.0, 0.0, 0);
        for (id, n, r) in [(a, 6u32, 0.5), (b, 4u32, 0.7)] {
            tree.node_mut(id).visits = n;
            for _ in 0..n {
                tree.node_mut(id).rewards.insert(r);
            }
        }
        let a1 = tree.add_child(a, 11, 3, vec![99], Terminal::No, 4, 0.0, 0.0, 0.0, 0);
        let a2 = tree.add_child(a, 12, 4, vec![98], Terminal::No, 5, 0.0, 0.0, 0.0, 0);
        for (id, n, r) in [(a1, 3u32, 0.55), (a2, 3u32, 0.45)] {
            tree.node_mut(id).visits = n;
            for _ in 0..n {
                tree.node_mut(id).rewards.insert(r);
            }
        }
        let score = |p: NodeId, c: NodeId| {
            score_child(&pol, tree.node(p), tree.node(c), None).unwrap()
        };
        let top = if score(ROOT, a) >= score(ROOT, b) { a } else { b };
        assert_eq!(top, a, "hand check: a has more visits but b is close");
        let second = if score(a, a1) >= score(a, a2) { a1 } else { a2 };
        let (sel, act) = select_leaf(&mut tree, &pol, 7).unwrap();
        assert_eq!(sel, second);
        assert_eq!(act, 99);
    }

    #[test]
    fn batch_of_one_equals_select_leaf() {
        let pol = policy(Variant::UcbVirtual, 0.3, 1);
        let mut t1 = blank_tree(vec![1, 2, 3]);
        let mut t2 = blank_tree(vec![1, 2, 3]);
        let pairs = select_batch(&mut t1, &pol, 7, 1);
        let single = select_leaf(&mut t2, &pol, 7).unwrap();
        assert_eq!(pairs, vec![single]);
    }

    #[test]
    fn batch_spreads_over_untried_actions() {
        let pol = policy(Variant::UcbVirtual, 0.3, 1);
        let mut tree = blank_tree(vec![1, 2, 3, 4, 5]);
        let pairs = select_batch(&mut tree, &pol, 7, 5);
        assert_eq!(pairs.len(), 5);
        let actions: Vec<u32> = pairs.iter().map(|p| p.1).collect();
        assert_eq!(actions, vec![1, 2, 3, 4, 5]);
        assert!(pairs.iter().all(|p| p.0 == ROOT));
        assert_eq!(tree.node(ROOT).virtual_visits, 0, "reset after batch");
    }

    #[test]
    fn batch_pairs_unique_and_virtual_counts_reset_on_random_trees() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let k = rng.gen_range(1..6);
            let mut tree = blank_tree((0..k).collect());
            // Grow a random 2-level tree.
            let grows = rng.gen_range(0..k as usize);
            let pol = policy(Variant::UcbVirtual, 0.3, 1);
            for _ in 0..grows {
                if let Ok((id, a)) = select_leaf(&mut tree, &pol, 7) {
                    let kid_untried: Vec<u32> = (0..rng.gen_range(0..4)).collect();
                    let kid = tree.add_child(
                        id, a, 0, kid_untried, Terminal::No, rng.gen(), 0.0, 0.0, 0.0, 0,
                    );
                    backpropagate(&mut tree, kid, rng.gen_range(0.0..1.0), BackpropMode::Sum, 0.8);
                }
            }
            let batch = rng.gen_range(1..9);
            let pairs = select_batch(&mut tree, &pol, 7, batch);
            let mut seen = std::collections::HashSet::new();
            for (id, a) in &pairs {
                assert!(seen.insert((*id, *a)), "duplicate pair ({id:?}, {a})");
            }
            for n in &tree.nodes {
                assert_eq!(n.virtual_visits, 0);
            }
        }
    }

    #[test]
    fn backprop_discounts_along_the_path() {
        let mut tree = blank_tree(vec![1]);
        let leaf = tree.add_child(ROOT, 1, 1, vec![], Terminal::No, 2, 0.0, 0.0, 0.0, 0);
        backpropagate(&mut tree, leaf, 1.0, BackpropMode::Max, 0.8);
        assert_eq!(tree.node(leaf).visits, 1);
        assert_eq!(tree.node(ROOT).visits, 1);
        assert!((tree.node(leaf).rewards.max() - 1.0).abs() < 1e-12);
        assert!((tree.node(ROOT).rewards.max() - 0.8).abs() < 1e-12, "parent receives 0.8");
    }

    #[test]
    fn backprop_zero_reward_only_bumps_visits() {
        let mut tree = blank_tree(vec![1]);
        let leaf = tree.add_child(ROOT, 1, 1, vec![], Terminal::No, 2, 0.0, 0.0, 0.0, 0);
        backpropagate(&mut tree, leaf, 0.0, BackpropMode::Max, 0.8);
        assert_eq!(tree.node(ROOT).visits, 1);
        assert_eq!(tree.node(ROOT).rewards.max(), 0.0);
    }

    #[test]
    fn backprop_max_mode_switches_to_intermediate_reward() {
        // Depth-3 chain where the middle node's own reward 0.9 exceeds the
        // discounted child value.
        let mut tree = blank_tree(vec![1]);
        let n1 = tree.add_child(ROOT, 1, 1, vec![2], Terminal::No, 2, 0.9, 0.0, 0.0, 0);
        let n2 = tree.add_child(n1, 2, 2, vec![3], Terminal::No, 3, 0.0, 0.0, 0.0, 0);
        let n3 = tree.add_child(n2, 3, 3, vec![], Terminal::No, 4, 0.0, 0.0, 0.0, 0);
        backpropagate(&mut tree, n3, 0.5, BackpropMode::Max, 0.8);
        // Hand trace: n3 gets 0.5; n2 gets 0.4; n1 gets max(0.32, 0.9) = 0.9;
        // root gets 0.72.
        assert!((tree.node(n3).rewards.max() - 0.5).abs() < 1e-12);
        assert!((tree.node(n2).rewards.max() - 0.4).abs() < 1e-12);
        assert!((tree.node(n1).rewards.max() - 0.9).abs() < 1e-12);
        assert!((tree.node(ROOT).rewards.max() - 0.72).abs() < 1e-12);
    }

    #[test]
    fn root_visits_equal_sum_of_child_visits_after_iterations() {
        // Single-expansion accounting for serial variants.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let pol = policy(Variant::Ucb1, 0.4, 1);
        let mut tree = blank_tree((0..4).collect());
        for _ in 0..30 {
            if let Ok((id, a)) = select_leaf(&mut tree, &pol, 4) {
                let kid_untried: Vec<u32> = (0..2).collect();
                let kid =
                    tree.add_child(id, a, 0, kid_untried, Terminal::No, rng.gen(), 0.0, 0.0, 0.0, 0);
                backpropagate(&mut tree, kid, rng.gen_range(0.0..1.0), BackpropMode::Sum, 0.8);
            }
        }
        let root = tree.node(ROOT);
        let child_sum: u32 = root.children.iter().map(|c| tree.node(*c).visits).sum();
        assert_eq!(child_sum, root.visits);
    }

    #[test]
    fn exhausted_tree_signals() {
        let mut tree = blank_tree(vec![1]);
        let pol = policy(Variant::Ucb1, 0.3, 1);
        let (id, a) = select_leaf(&mut tree, &pol, 7).unwrap();
        // Terminal child: nothing left to explore afterwards.
        tree.add_child(id, a, 1, vec![], Terminal::Success, 2, 1.0, 0.0, 0.0, 0);
        assert_eq!(select_leaf(&mut tree, &pol, 7).unwrap_err(), TreeError::Exhausted);
    }

    #[test]
    fn reward_record_caps_and_sorts() {
        let mut r: RewardRecord<f64> = RewardRecord::new(3);
        for v in [0.2, 0.9, 0.5, 0.7, 0.1] {
            r.insert(v);
        }
        assert_eq!(r.values(), &[0.9, 0.7, 0.5]);
        assert!((r.top_sum(2) - 1.6).abs() < 1e-12);
    }
}
