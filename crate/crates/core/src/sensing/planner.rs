use std::collections::HashMap;

use super::{SensingModel, SensingStrategy};
use crate::ids::QueryId;
use crate::observation::Belief;

#[derive(Clone, Copy, Debug)]
enum Memo {
    Exact { rank: u32, choice: Option<QueryId> },
    /// The rank is at least this value; `u32::MAX` means unsolvable.
    AtLeast(u32),
}

/// Computes the same strategy as [`super::solve_sensing`] over the belief
/// revision tree, exploring only as much of the tree as the optimal rank
/// requires.
///
/// The rank of a belief is found by iterative deepening on the min-max
/// recursion `rank(B) = min_split 1 + max(rank(B1), rank(B2))`, trying
/// splits in query order, so the first split that meets the bound is the
/// one the attractor would pick. Results are memoized across calls; the
/// memo is only valid for one progress predicate.
pub struct SensingPlanner<'m> {
    model: &'m SensingModel,
    memo: HashMap<Belief, Memo>,
}

impl<'m> SensingPlanner<'m> {
    pub fn new(model: &'m SensingModel) -> Self {
        SensingPlanner { model, memo: HashMap::new() }
    }

    pub fn model(&self) -> &'m SensingModel {
        self.model
    }

    /// Solves the sensing problem at `root`.
    pub fn plan(&mut self, root: &Belief, progress_defined: &mut impl FnMut(&Belief) -> bool) -> SensingStrategy {
        let bound = root.len().saturating_sub(1) as u32;
        let mut ranks = HashMap::new();
        let mut choices = HashMap::new();
        if self.within(root, bound, progress_defined) {
            self.collect(root, &mut ranks, &mut choices);
        }
        SensingStrategy::from_parts(root.clone(), ranks, choices)
    }

    fn collect(&self, belief: &Belief, ranks: &mut HashMap<Belief, u32>, choices: &mut HashMap<Belief, QueryId>) {
        let Some(&Memo::Exact { rank, choice }) = self.memo.get(belief) else {
            unreachable!("collect follows solved beliefs only");
        };
        ranks.insert(belief.clone(), rank);
        if let Some(query) = choice {
            choices.insert(belief.clone(), query);
            let (yes, no) = belief.partition(|q| self.model.holds(q, query));
            self.collect(&yes, ranks, choices);
            self.collect(&no, ranks, choices);
        }
    }

    /// Whether `rank(belief) <= bound`. On success the memo holds the exact
    /// rank and choice.
    fn within(&mut self, belief: &Belief, bound: u32, progress_defined: &mut impl FnMut(&Belief) -> bool) -> bool {
        let floor = match self.memo.get(belief) {
            Some(&Memo::Exact { rank, .. }) => return rank <= bound,
            Some(&Memo::AtLeast(floor)) => floor,
            None => {
                if progress_defined(belief) {
                    self.memo.insert(belief.clone(), Memo::Exact { rank: 0, choice: None });
                    return true;
                }
                1
            }
        };
        if floor > bound {
            return false;
        }
        // Every split removes at least one state.
        let ceiling = belief.len().saturating_sub(1) as u32;
        let splits = dedup_splits(self.model.splits(belief));
        if splits.is_empty() || floor > ceiling {
            self.memo.insert(belief.clone(), Memo::AtLeast(u32::MAX));
            return false;
        }
        for depth in floor..=bound.min(ceiling) {
            for (query, yes, no) in &splits {
                if self.within(yes, depth - 1, progress_defined) && self.within(no, depth - 1, progress_defined) {
                    self.memo.insert(belief.clone(), Memo::Exact { rank: depth, choice: Some(*query) });
                    return true;
                }
            }
            let next = if depth >= ceiling { u32::MAX } else { depth + 1 };
            self.memo.insert(belief.clone(), Memo::AtLeast(next));
        }
        false
    }
}

/// Keeps the first query of each distinct partition.
fn dedup_splits(splits: Vec<(QueryId, Belief, Belief)>) -> Vec<(QueryId, Belief, Belief)> {
    let mut seen = std::collections::HashSet::new();
    splits
        .into_iter()
        .filter(|(_, yes, no)| {
            let key = if yes < no { (yes.clone(), no.clone()) } else { (no.clone(), yes.clone()) };
            seen.insert(key)
        })
        .collect()
}

/// A library of sensing decisions keyed by belief, filled from every
/// strategy computed during a run and consulted before planning.
#[derive(Clone, Debug, Default)]
pub struct StrategyCache {
    entries: HashMap<Belief, (QueryId, u32)>,
    hits: u64,
    misses: u64,
}

impl StrategyCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// The stored `(query, rank)` for `belief`, counting hits and misses.
    pub fn lookup(&mut self, belief: &Belief) -> Option<(QueryId, u32)> {
        let found = self.entries.get(belief).copied();
        if found.is_some() {
            self.hits += 1;
        } else {
            self.misses += 1;
        }
        found
    }

    /// Adds every decision of `strategy`; existing entries are kept.
    pub fn insert(&mut self, strategy: &SensingStrategy) {
        for (belief, query, rank) in strategy.entries() {
            self.entries.entry(belief.clone()).or_insert((query, rank));
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn hits(&self) -> u64 {
        self.hits
    }

    pub fn misses(&self) -> u64 {
        self.misses
    }
}
