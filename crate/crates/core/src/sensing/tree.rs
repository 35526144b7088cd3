use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

use super::SensingModel;
use crate::ids::QueryId;
use crate::observation::Belief;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum LeafReason {
    /// The progress strategy is defined here.
    ProgressDefined,
    /// No enabled query splits this belief.
    Unrefinable,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Split {
    pub query: QueryId,
    /// Node where the query's formula holds.
    pub holds: usize,
    /// Node where it fails.
    pub fails: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NodeKind {
    Leaf(LeafReason),
    Internal(Vec<Split>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BrNode {
    pub belief: Belief,
    pub kind: NodeKind,
}

/// A belief revision tree, stored with equal beliefs merged: a belief that
/// appears under several splits is one node whose subtree is shared. The
/// tree proper is the unfolding from `root`.
#[derive(Clone, Debug)]
pub struct BrTree {
    nodes: Vec<BrNode>,
}

impl BrTree {
    pub fn root(&self) -> usize {
        0
    }

    pub fn nodes(&self) -> &[BrNode] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> &BrNode {
        &self.nodes[i]
    }

    /// Longest root-to-leaf path, in splits.
    pub fn depth(&self) -> usize {
        let mut depth: Vec<Option<usize>> = vec![None; self.nodes.len()];
        // Children always have smaller beliefs, so sorting by size gives a
        // valid bottom-up order.
        let mut order: Vec<usize> = (0..self.nodes.len()).collect();
        order.sort_by_key(|&i| self.nodes[i].belief.len());
        for i in order {
            depth[i] = Some(match &self.nodes[i].kind {
                NodeKind::Leaf(_) => 0,
                NodeKind::Internal(splits) => {
                    1 + splits
                        .iter()
                        .map(|s| depth[s.holds].unwrap().max(depth[s.fails].unwrap()))
                        .max()
                        .unwrap_or(0)
                }
            });
        }
        depth[0].unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("belief revision tree exceeds {0} nodes")]
pub struct TreeTooLarge(pub usize);

/// Builds the belief revision tree rooted at `root`: every node is split by
/// every enabled query that yields two nonempty parts, unless the progress
/// strategy is defined there or no query splits it.
pub fn build_brtree(
    root: &Belief,
    model: &SensingModel,
    progress_defined: &mut impl FnMut(&Belief) -> bool,
    max_nodes: Option<usize>,
) -> Result<BrTree, TreeTooLarge> {
    let mut nodes: Vec<BrNode> = Vec::new();
    let mut index: HashMap<Belief, usize> = HashMap::new();
    let mut stack = vec![0usize];
    nodes.push(BrNode { belief: root.clone(), kind: NodeKind::Internal(Vec::new()) });
    index.insert(root.clone(), 0);
    while let Some(i) = stack.pop() {
        let belief = nodes[i].belief.clone();
        if progress_defined(&belief) {
            nodes[i].kind = NodeKind::Leaf(LeafReason::ProgressDefined);
            continue;
        }
        let parts = model.splits(&belief);
        if parts.is_empty() {
            nodes[i].kind = NodeKind::Leaf(LeafReason::Unrefinable);
            continue;
        }
        let mut splits = Vec::with_capacity(parts.len());
        for (query, yes, no) in parts {
            let mut node_of = |b: Belief| -> Result<usize, TreeTooLarge> {
                if let Some(&j) = index.get(&b) {
                    return Ok(j);
                }
                if max_nodes.is_some_and(|m| nodes.len() >= m) {
                    return Err(TreeTooLarge(nodes.len()));
                }
                let j = nodes.len();
                index.insert(b.clone(), j);
                nodes.push(BrNode { belief: b, kind: NodeKind::Internal(Vec::new()) });
                stack.push(j);
                Ok(j)
            };
            let holds = node_of(yes)?;
            let fails = node_of(no)?;
            splits.push(Split { query, holds, fails });
        }
        nodes[i].kind = NodeKind::Internal(splits);
    }
    Ok(BrTree { nodes })
}

/// An active-sensing strategy: for each belief it covers, the query to ask
/// and the worst-case number of queries left before reaching a belief where
/// the progress strategy is defined.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SensingStrategy {
    root: Belief,
    ranks: HashMap<Belief, u32>,
    choices: HashMap<Belief, QueryId>,
}

impl SensingStrategy {
    pub(crate) fn from_parts(root: Belief, ranks: HashMap<Belief, u32>, choices: HashMap<Belief, QueryId>) -> Self {
        SensingStrategy { root, ranks, choices }
    }

    pub fn root(&self) -> &Belief {
        &self.root
    }

    /// Whether the root lies in the attractor of the progress-defined beliefs.
    pub fn solvable(&self) -> bool {
        self.ranks.contains_key(&self.root)
    }

    pub fn root_rank(&self) -> Option<u32> {
        self.rank(&self.root)
    }

    pub fn rank(&self, belief: &Belief) -> Option<u32> {
        self.ranks.get(belief).copied()
    }

    /// `f_S(belief)`.
    pub fn choice(&self, belief: &Belief) -> Option<QueryId> {
        self.choices.get(belief).copied()
    }

    /// Beliefs with a chosen query, with that query and their rank.
    pub fn entries(&self) -> impl Iterator<Item = (&Belief, QueryId, u32)> {
        self.choices.iter().map(|(b, &q)| (b, q, self.ranks[b]))
    }
}

/// Attractor of the progress-defined leaves: `X_0` is those leaves, and a
/// node enters `X_{i+1}` when some split sends both outcomes into `X_i`.
/// The first such split in query order is the node's choice and `i + 1` its
/// rank.
pub fn solve_sensing(tree: &BrTree) -> SensingStrategy {
    let nodes = tree.nodes();
    let mut rank: Vec<Option<u32>> = nodes
        .iter()
        .map(|n| matches!(n.kind, NodeKind::Leaf(LeafReason::ProgressDefined)).then_some(0))
        .collect();
    let mut choice: Vec<Option<QueryId>> = vec![None; nodes.len()];
    let mut round = 0;
    loop {
        round += 1;
        let previous = rank.clone();
        let mut changed = false;
        for (i, node) in nodes.iter().enumerate() {
            if previous[i].is_some() {
                continue;
            }
            let NodeKind::Internal(splits) = &node.kind else { continue };
            if let Some(s) = splits.iter().find(|s| previous[s.holds].is_some() && previous[s.fails].is_some()) {
                rank[i] = Some(round);
                choice[i] = Some(s.query);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let mut ranks = HashMap::new();
    let mut choices = HashMap::new();
    for (i, node) in nodes.iter().enumerate() {
        if let Some(r) = rank[i] {
            ranks.insert(node.belief.clone(), r);
        }
        if let Some(c) = choice[i] {
            choices.insert(node.belief.clone(), c);
        }
    }
    SensingStrategy::from_parts(nodes[tree.root()].belief.clone(), ranks, choices)
}
