//! Labeled turn-based transition systems.
//!
//! An [`Arena`] is the explicit-state model of system/environment interaction:
//! every state belongs to one player, actions are partitioned between the
//! players, the transition function is deterministic and every state has at
//! least one enabled action. States carry a label (the atomic propositions
//! true there), a valuation of the predicates and a mask of which predicates
//! the system can observe.

mod text;

pub use text::{parse_arena, parse_model, serialize_model, Model};

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::bitset::BitSet;
use crate::error::ModelError;
use crate::ids::{ActionId, PredId, PropId, StateId};

/// Name of the distinguished turn predicate. It is always `PredId(0)`.
pub const TURN_PREDICATE: &str = "t";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Player {
    System,
    Environment,
}

impl Player {
    pub fn keyword(self) -> &'static str {
        match self {
            Player::System => "sys",
            Player::Environment => "env",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Self> {
        match s {
            "sys" => Some(Player::System),
            "env" => Some(Player::Environment),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StateRecord {
    pub name: String,
    pub owner: Player,
    /// Sorted atomic propositions true at this state.
    pub label: Vec<PropId>,
    pub valuation: BitSet,
    pub observable: BitSet,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ActionRecord {
    pub name: String,
    pub owner: Player,
}

impl ActionRecord {
    /// `name@sys` or `name@env`.
    pub fn qualified(&self) -> String {
        format!("{}@{}", self.name, self.owner.keyword())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Arena {
    states: Vec<StateRecord>,
    actions: Vec<ActionRecord>,
    ap_names: Vec<String>,
    pred_names: Vec<String>,
    /// Global default observability split; per-state masks may override it.
    pred_hidden: Vec<bool>,
    initial: StateId,
    initial_known: bool,
    /// Outgoing transitions per state, sorted by action.
    succ: Vec<Vec<(ActionId, StateId)>>,
}

/// Unvalidated arena contents, checked by [`Arena::new`].
#[derive(Clone, Debug, Default)]
pub struct ArenaParts {
    pub states: Vec<StateRecord>,
    pub actions: Vec<ActionRecord>,
    pub ap_names: Vec<String>,
    /// Predicate names; index 0 must be the turn predicate.
    pub pred_names: Vec<String>,
    pub pred_hidden: Vec<bool>,
    pub initial: Option<StateId>,
    pub initial_known: bool,
    pub transitions: Vec<(StateId, ActionId, StateId)>,
}

impl Arena {
    /// Validates `parts` against every arena invariant.
    ///
    /// The turn predicate's value and observability are forced from the
    /// owner of each state.
    pub fn new(mut parts: ArenaParts) -> Result<Self, ModelError> {
        if parts.pred_names.first().map(String::as_str) != Some(TURN_PREDICATE) {
            return Err(ModelError::Config("predicate 0 must be the turn predicate `t`".into()));
        }
        if parts.pred_hidden.len() != parts.pred_names.len() {
            return Err(ModelError::Config("observability defaults do not cover every predicate".into()));
        }
        check_unique("atomic proposition", parts.ap_names.iter())?;
        check_unique("predicate", parts.pred_names.iter())?;
        check_unique("state", parts.states.iter().map(|s| &s.name))?;
        check_unique("action", parts.actions.iter().map(ActionRecord::qualified).collect::<Vec<_>>().iter())?;

        let initial = parts.initial.ok_or(ModelError::MissingInitial)?;
        if initial.index() >= parts.states.len() {
            return Err(ModelError::Undeclared { kind: "state", name: format!("#{}", initial.0) });
        }
        for state in &mut parts.states {
            state.valuation.set(0, state.owner == Player::System);
            state.observable.set(0, true);
            state.label.sort_unstable();
            state.label.dedup();
            if let Some(p) = state.label.iter().find(|p| p.index() >= parts.ap_names.len()) {
                return Err(ModelError::Undeclared { kind: "atomic proposition", name: format!("#{}", p.0) });
            }
        }

        let mut succ: Vec<Vec<(ActionId, StateId)>> = vec![Vec::new(); parts.states.len()];
        for &(src, action, dst) in &parts.transitions {
            let state = parts
                .states
                .get(src.index())
                .ok_or_else(|| ModelError::Undeclared { kind: "state", name: format!("#{}", src.0) })?;
            let record = parts
                .actions
                .get(action.index())
                .ok_or_else(|| ModelError::Undeclared { kind: "action", name: format!("#{}", action.0) })?;
            if dst.index() >= parts.states.len() {
                return Err(ModelError::Undeclared { kind: "state", name: format!("#{}", dst.0) });
            }
            if record.owner != state.owner {
                return Err(ModelError::OwnerMismatch { state: state.name.clone(), action: record.qualified() });
            }
            let out = &mut succ[src.index()];
            match out.iter().find(|(a, _)| *a == action) {
                Some(&(_, existing)) if existing != dst => {
                    return Err(ModelError::Nondeterministic {
                        state: state.name.clone(),
                        action: record.qualified(),
                    });
                }
                Some(_) => {}
                None => out.push((action, dst)),
            }
        }
        for (state, out) in parts.states.iter().zip(&mut succ) {
            if out.is_empty() {
                return Err(ModelError::NoEnabledAction(state.name.clone()));
            }
            out.sort_unstable();
        }

        Ok(Arena {
            states: parts.states,
            actions: parts.actions,
            ap_names: parts.ap_names,
            pred_names: parts.pred_names,
            pred_hidden: parts.pred_hidden,
            initial,
            initial_known: parts.initial_known,
            succ,
        })
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn state(&self, s: StateId) -> &StateRecord {
        &self.states[s.index()]
    }

    pub fn states(&self) -> &[StateRecord] {
        &self.states
    }

    pub fn action(&self, a: ActionId) -> &ActionRecord {
        &self.actions[a.index()]
    }

    pub fn actions(&self) -> &[ActionRecord] {
        &self.actions
    }

    pub fn ap_names(&self) -> &[String] {
        &self.ap_names
    }

    pub fn pred_names(&self) -> &[String] {
        &self.pred_names
    }

    pub fn pred_hidden_by_default(&self, p: PredId) -> bool {
        self.pred_hidden[p.index()]
    }

    pub fn turn_predicate(&self) -> PredId {
        PredId(0)
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    /// Whether the system knows the exact initial state. When false, every
    /// state observation-equivalent to the initial one is a candidate start.
    pub fn initial_known(&self) -> bool {
        self.initial_known
    }

    pub fn owner(&self, s: StateId) -> Player {
        self.states[s.index()].owner
    }

    pub fn state_id(&self, name: &str) -> Option<StateId> {
        self.states.iter().position(|s| s.name == name).map(StateId::from_index)
    }

    pub fn action_id(&self, name: &str, owner: Player) -> Option<ActionId> {
        self.actions
            .iter()
            .position(|a| a.name == name && a.owner == owner)
            .map(ActionId::from_index)
    }

    pub fn prop_id(&self, name: &str) -> Option<PropId> {
        self.ap_names.iter().position(|p| p == name).map(PropId::from_index)
    }

    pub fn pred_id(&self, name: &str) -> Option<PredId> {
        self.pred_names.iter().position(|p| p == name).map(PredId::from_index)
    }

    /// Transitions out of `s`, sorted by action.
    pub fn transitions(&self, s: StateId) -> &[(ActionId, StateId)] {
        &self.succ[s.index()]
    }

    /// Exactly the actions with a defined successor at `s`.
    pub fn enabled(&self, s: StateId) -> Vec<ActionId> {
        self.succ[s.index()].iter().map(|&(a, _)| a).collect()
    }

    pub fn successor(&self, s: StateId, a: ActionId) -> Option<StateId> {
        let out = &self.succ[s.index()];
        out.binary_search_by_key(&a, |&(b, _)| b).ok().map(|i| out[i].1)
    }

    pub fn holds(&self, s: StateId, p: PredId) -> bool {
        self.states[s.index()].valuation.get(p.index())
    }

    /// The observable part of a state: its mask and the masked valuation.
    /// Two states are observation-equivalent iff their keys are equal.
    pub fn observation_key(&self, s: StateId) -> (BitSet, BitSet) {
        let state = &self.states[s.index()];
        (state.observable.clone(), state.valuation.and(&state.observable))
    }

    /// States reachable from the initial state, in breadth-first order.
    pub fn reachable(&self) -> Vec<StateId> {
        let mut seen = vec![false; self.states.len()];
        let mut order = Vec::new();
        let mut queue = VecDeque::from([self.initial]);
        seen[self.initial.index()] = true;
        while let Some(s) = queue.pop_front() {
            order.push(s);
            for &(_, t) in &self.succ[s.index()] {
                if !seen[t.index()] {
                    seen[t.index()] = true;
                    queue.push_back(t);
                }
            }
        }
        order
    }

    /// Candidate initial states: the declared one, plus every state the
    /// system cannot tell apart from it when the start is not known.
    pub fn initial_candidates(&self) -> Vec<StateId> {
        if self.initial_known {
            return vec![self.initial];
        }
        let key = self.observation_key(self.initial);
        let mut out = vec![self.initial];
        out.extend(
            (0..self.states.len())
                .map(StateId::from_index)
                .filter(|&s| s != self.initial && self.observation_key(s) == key),
        );
        out
    }

    /// Relabels every table in sorted-name order. Two arenas describing the
    /// same system have equal canonical forms.
    pub fn canonicalize(&self) -> (Arena, Canonical) {
        let order = |names: Vec<(usize, String)>| -> Vec<usize> {
            let mut names = names;
            names.sort_by(|a, b| a.1.cmp(&b.1));
            let mut map = vec![0; names.len()];
            for (new, (old, _)) in names.iter().enumerate() {
                map[*old] = new;
            }
            map
        };
        let state_map = order(self.states.iter().map(|s| s.name.clone()).enumerate().collect());
        let action_map = {
            let mut idx: Vec<usize> = (0..self.actions.len()).collect();
            idx.sort_by(|&a, &b| self.actions[a].cmp(&self.actions[b]));
            let mut map = vec![0; idx.len()];
            for (new, old) in idx.into_iter().enumerate() {
                map[old] = new;
            }
            map
        };
        let prop_map = order(self.ap_names.iter().cloned().enumerate().collect());
        // The turn predicate keeps index 0.
        let pred_map = {
            let mut rest: Vec<(usize, String)> = self.pred_names.iter().cloned().enumerate().skip(1).collect();
            rest.sort_by(|a, b| a.1.cmp(&b.1));
            let mut map = vec![0; self.pred_names.len()];
            for (new, (old, _)) in rest.iter().enumerate() {
                map[*old] = new + 1;
            }
            map
        };

        let remap_bits = |bits: &BitSet| {
            let mut out = BitSet::new(self.pred_names.len());
            for i in bits.ones() {
                out.set(pred_map[i], true);
            }
            out
        };
        let mut states = vec![None; self.states.len()];
        for (old, s) in self.states.iter().enumerate() {
            let mut label: Vec<PropId> = s.label.iter().map(|p| PropId::from_index(prop_map[p.index()])).collect();
            label.sort_unstable();
            states[state_map[old]] = Some(StateRecord {
                name: s.name.clone(),
                owner: s.owner,
                label,
                valuation: remap_bits(&s.valuation),
                observable: remap_bits(&s.observable),
            });
        }
        let mut actions = vec![None; self.actions.len()];
        for (old, a) in self.actions.iter().enumerate() {
            actions[action_map[old]] = Some(a.clone());
        }
        let mut ap_names = vec![String::new(); self.ap_names.len()];
        for (old, n) in self.ap_names.iter().enumerate() {
            ap_names[prop_map[old]] = n.clone();
        }
        let mut pred_names = vec![String::new(); self.pred_names.len()];
        let mut pred_hidden = vec![false; self.pred_names.len()];
        for (old, n) in self.pred_names.iter().enumerate() {
            pred_names[pred_map[old]] = n.clone();
            pred_hidden[pred_map[old]] = self.pred_hidden[old];
        }
        let mut transitions = Vec::new();
        for (s, out) in self.succ.iter().enumerate() {
            for &(a, t) in out {
                transitions.push((
                    StateId::from_index(state_map[s]),
                    ActionId::from_index(action_map[a.index()]),
                    StateId::from_index(state_map[t.index()]),
                ));
            }
        }
        let arena = Arena::new(ArenaParts {
            states: states.into_iter().map(Option::unwrap).collect(),
            actions: actions.into_iter().map(Option::unwrap).collect(),
            ap_names,
            pred_names,
            pred_hidden,
            initial: Some(StateId::from_index(state_map[self.initial.index()])),
            initial_known: self.initial_known,
            transitions,
        })
        .expect("relabeling preserves validity");
        (arena, Canonical { pred_map })
    }
}

/// Index maps produced by [`Arena::canonicalize`] that other artifacts
/// referring to the arena need to follow.
#[derive(Clone, Debug)]
pub struct Canonical {
    pub pred_map: Vec<usize>,
}

fn check_unique<'a>(kind: &'static str, names: impl Iterator<Item = &'a String>) -> Result<(), ModelError> {
    let mut seen = std::collections::HashSet::new();
    for name in names {
        if !seen.insert(name) {
            return Err(ModelError::Duplicate { kind, name: name.clone() });
        }
    }
    Ok(())
}
