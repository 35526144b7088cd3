//! The product of an arena with a specification automaton, and its solution
//! as a complete-information Büchi game.

mod solve;

pub use solve::{allow, solve_buchi, SolveResult, SolutionExport, SolutionRow};

use std::collections::{HashMap, VecDeque};

use crate::arena::{Arena, Player};
use crate::automata::Dba;
use crate::error::ModelError;
use crate::ids::{ActionId, AutStateId, QId, StateId};

/// A product state `(s, h)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProductState {
    pub arena: StateId,
    pub aut: AutStateId,
}

/// Turn-based Büchi game over the reachable part of `arena ⋉ dba`.
///
/// States are numbered in breadth-first order from the initial candidates,
/// with the true initial state first.
#[derive(Clone, Debug)]
pub struct ProductGame {
    states: Vec<ProductState>,
    owner: Vec<Player>,
    succ: Vec<Vec<(ActionId, QId)>>,
    accepting: Vec<bool>,
    initial: QId,
    initial_candidates: Vec<QId>,
    index: HashMap<ProductState, QId>,
    names: Vec<String>,
}

impl ProductGame {
    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> impl ExactSizeIterator<Item = QId> {
        (0..self.states.len()).map(QId::from_index)
    }

    pub fn state(&self, q: QId) -> ProductState {
        self.states[q.index()]
    }

    pub fn arena_state(&self, q: QId) -> StateId {
        self.states[q.index()].arena
    }

    pub fn lookup(&self, s: ProductState) -> Option<QId> {
        self.index.get(&s).copied()
    }

    pub fn owner(&self, q: QId) -> Player {
        self.owner[q.index()]
    }

    pub fn is_accepting(&self, q: QId) -> bool {
        self.accepting[q.index()]
    }

    pub fn initial(&self) -> QId {
        self.initial
    }

    /// Product images of the arena's initial candidates; see
    /// [`Arena::initial_candidates`].
    pub fn initial_candidates(&self) -> &[QId] {
        &self.initial_candidates
    }

    /// Transitions out of `q`, sorted by action.
    pub fn transitions(&self, q: QId) -> &[(ActionId, QId)] {
        &self.succ[q.index()]
    }

    pub fn successor(&self, q: QId, a: ActionId) -> Option<QId> {
        let out = &self.succ[q.index()];
        out.binary_search_by_key(&a, |&(b, _)| b).ok().map(|i| out[i].1)
    }

    pub fn enabled(&self, q: QId) -> impl Iterator<Item = ActionId> + '_ {
        self.succ[q.index()].iter().map(|&(a, _)| a)
    }

    /// `arena-state|automaton-state`.
    pub fn name(&self, q: QId) -> &str {
        &self.names[q.index()]
    }

    pub fn state_by_name(&self, name: &str) -> Option<QId> {
        self.names.iter().position(|n| n == name).map(QId::from_index)
    }

    /// Predecessor lists, used by the attractor computations.
    pub(crate) fn predecessors(&self) -> Vec<Vec<QId>> {
        let mut pred = vec![Vec::new(); self.states.len()];
        for (q, out) in self.succ.iter().enumerate() {
            for &(_, t) in out {
                pred[t.index()].push(QId::from_index(q));
            }
        }
        for p in &mut pred {
            p.dedup();
        }
        pred
    }
}

/// Builds the reachable product. A transition `δ(s, σ) = s'` lifts to
/// `T((s, h), σ) = (s', δ_φ(h, L(s')))`; the initial state is
/// `(s0, δ_φ(h0, L(s0)))` and accepting states are those whose automaton
/// component is accepting.
pub fn build_product(arena: &Arena, dba: &Dba) -> Result<ProductGame, ModelError> {
    if arena.ap_names() != dba.ap_names() {
        return Err(ModelError::Config("automaton propositions do not match the arena's".into()));
    }
    let mut game = ProductGame {
        states: Vec::new(),
        owner: Vec::new(),
        succ: Vec::new(),
        accepting: Vec::new(),
        initial: QId(0),
        initial_candidates: Vec::new(),
        index: HashMap::new(),
        names: Vec::new(),
    };
    let mut queue = VecDeque::new();
    let intern = |game: &mut ProductGame, queue: &mut VecDeque<QId>, ps: ProductState| -> QId {
        if let Some(&q) = game.index.get(&ps) {
            return q;
        }
        let q = QId::from_index(game.states.len());
        game.states.push(ps);
        game.owner.push(arena.owner(ps.arena));
        game.succ.push(Vec::new());
        game.accepting.push(dba.is_accepting(ps.aut));
        game.names.push(format!("{}|{}", arena.state(ps.arena).name, dba.name(ps.aut)));
        game.index.insert(ps, q);
        queue.push_back(q);
        q
    };

    for s in arena.initial_candidates() {
        let h = dba.step(dba.initial(), &arena.state(s).label)?;
        let q = intern(&mut game, &mut queue, ProductState { arena: s, aut: h });
        game.initial_candidates.push(q);
    }
    game.initial = game.initial_candidates[0];
    game.initial_candidates.sort_unstable();
    game.initial_candidates.dedup();

    while let Some(q) = queue.pop_front() {
        let ProductState { arena: s, aut: h } = game.states[q.index()];
        let mut out = Vec::with_capacity(arena.transitions(s).len());
        for &(a, t) in arena.transitions(s) {
            let h2 = dba.step(h, &arena.state(t).label)?;
            out.push((a, intern(&mut game, &mut queue, ProductState { arena: t, aut: h2 })));
        }
        game.succ[q.index()] = out;
    }
    Ok(game)
}
