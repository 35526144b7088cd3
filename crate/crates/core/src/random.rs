//! Random arenas and specifications, for testing and benchmarking.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::arena::{ActionRecord, Arena, ArenaParts, Model, Player, StateRecord, TURN_PREDICATE};
use crate::automata::SpecPattern;
use crate::bitset::BitSet;
use crate::formula::Formula;
use crate::ids::{ActionId, PredId, PropId, StateId};
use crate::sensing::{Enablement, SensingAction};

#[derive(Clone, Debug)]
pub struct RandomParams {
    pub states: usize,
    pub sys_actions: usize,
    pub env_actions: usize,
    pub props: usize,
    pub observable_preds: usize,
    pub hidden_preds: usize,
    /// Chance that an action is enabled at a state of its owner.
    pub density: f64,
    /// Labels are a function of the observable predicates.
    pub observable_labels: bool,
    /// Every state gets a distinct valuation, when there are enough
    /// predicates.
    pub unique_valuations: bool,
    /// One sensor per hidden predicate, reading it.
    pub sense_hidden: bool,
    /// Sensors over random formulas, each enabled on a random subset.
    pub random_sensors: usize,
    pub initial_known: bool,
    /// Chain the states from `s0` so each one is reachable, ending in an
    /// absorbing state.
    pub connected: bool,
}

impl RandomParams {
    /// Complete-information games with every predicate observable.
    pub fn small(states: usize) -> Self {
        RandomParams {
            states,
            sys_actions: 3,
            env_actions: 3,
            props: 2,
            observable_preds: 0,
            hidden_preds: 0,
            density: 0.6,
            observable_labels: false,
            unique_valuations: false,
            sense_hidden: false,
            random_sensors: 0,
            initial_known: true,
            connected: true,
        }
    }
}

fn random_literal_formula(rng: &mut impl Rng, preds: &[PredId]) -> Formula<PredId> {
    let n = rng.gen_range(1..=2.min(preds.len()));
    let parts = preds
        .choose_multiple(rng, n)
        .map(|&p| if rng.gen_bool(0.5) { Formula::Var(p) } else { Formula::negate(Formula::Var(p)) })
        .collect();
    if rng.gen_bool(0.5) {
        Formula::and(parts)
    } else {
        Formula::or(parts)
    }
}

/// A random model satisfying every arena invariant.
pub fn random_model(rng: &mut impl Rng, p: &RandomParams) -> Model {
    let n = p.states.max(1);
    let mut pred_names = vec![TURN_PREDICATE.to_string()];
    let mut pred_hidden = vec![false];
    for i in 0..p.observable_preds {
        pred_names.push(format!("o{i}"));
        pred_hidden.push(false);
    }
    for i in 0..p.hidden_preds {
        pred_names.push(format!("h{i}"));
        pred_hidden.push(true);
    }
    let npred = pred_names.len();
    let free_preds = npred - 1;

    let owners: Vec<Player> =
        (0..n).map(|_| if rng.gen_bool(0.5) { Player::System } else { Player::Environment }).collect();
    // Distinct valuations over the non-turn predicates, when possible.
    let mut codes: Vec<u64> = if p.unique_valuations && free_preds < 63 && (1u64 << free_preds) >= n as u64 {
        let mut all: Vec<u64> = (0..1u64 << free_preds.min(20)).collect();
        all.shuffle(rng);
        all.truncate(n);
        all
    } else {
        (0..n).map(|_| rng.gen::<u64>()).collect()
    };
    codes.iter_mut().for_each(|c| *c &= if free_preds >= 64 { u64::MAX } else { (1u64 << free_preds) - 1 });

    // With observable labels, each observable valuation maps to a fixed label.
    let obs_mask: u64 = (1u64 << p.observable_preds) - 1;
    let mut label_of_obs = std::collections::HashMap::new();
    let states: Vec<StateRecord> = (0..n)
        .map(|i| {
            let mut valuation = BitSet::new(npred);
            for b in 0..free_preds {
                valuation.set(b + 1, codes[i] >> b & 1 == 1);
            }
            let mut observable = BitSet::new(npred);
            for (k, hidden) in pred_hidden.iter().enumerate() {
                observable.set(k, !hidden);
            }
            let draw = |rng: &mut dyn rand::RngCore| -> Vec<PropId> {
                (0..p.props).filter(|_| rng.gen_bool(0.5)).map(PropId::from_index).collect()
            };
            let label = if p.observable_labels {
                let key = (codes[i] & obs_mask, owners[i]);
                label_of_obs.entry(key).or_insert_with(|| draw(rng)).clone()
            } else {
                draw(rng)
            };
            StateRecord { name: format!("s{i}"), owner: owners[i], label, valuation, observable }
        })
        .collect();

    let mut actions = Vec::new();
    for i in 0..p.sys_actions.max(1) {
        actions.push(ActionRecord { name: format!("a{i}"), owner: Player::System });
    }
    for i in 0..p.env_actions.max(1) {
        actions.push(ActionRecord { name: format!("e{i}"), owner: Player::Environment });
    }
    let mut transitions = Vec::new();
    for (s, &owner) in owners.iter().enumerate() {
        let mine: Vec<usize> = (0..actions.len()).filter(|&a| actions[a].owner == owner).collect();
        let mut enabled: Vec<usize> = mine.iter().copied().filter(|_| rng.gen_bool(p.density)).collect();
        if enabled.is_empty() {
            enabled.push(*mine.choose(rng).unwrap());
        }
        for (k, a) in enabled.into_iter().enumerate() {
            let t = match (p.connected, k) {
                (true, _) if s + 1 == n && n > 1 => s,
                (true, 0) if s + 1 < n => s + 1,
                _ => rng.gen_range(0..n),
            };
            transitions.push((StateId::from_index(s), ActionId::from_index(a), StateId::from_index(t)));
        }
    }

    let mut sensors = Vec::new();
    if p.sense_hidden {
        for i in 0..p.hidden_preds {
            sensors.push(SensingAction {
                name: format!("read_h{i}"),
                formulas: vec![Formula::Var(PredId::from_index(1 + p.observable_preds + i))],
                enabled: Enablement::Everywhere,
            });
        }
    }
    let all_preds: Vec<PredId> = (1..npred).map(PredId::from_index).collect();
    if !all_preds.is_empty() {
        for i in 0..p.random_sensors {
            let formulas = (0..rng.gen_range(1..=2)).map(|_| random_literal_formula(rng, &all_preds)).collect();
            let enabled =
                if rng.gen_bool(0.5) { Enablement::Everywhere } else { Enablement::When(random_literal_formula(rng, &all_preds)) };
            sensors.push(SensingAction { name: format!("sense{i}"), formulas, enabled });
        }
    }

    let arena = Arena::new(ArenaParts {
        states,
        actions,
        ap_names: (0..p.props).map(|i| format!("p{i}")).collect(),
        pred_names,
        pred_hidden,
        initial: Some(StateId::from_index(if p.connected { 0 } else { rng.gen_range(0..n) })),
        initial_known: p.initial_known,
        transitions,
    })
    .expect("generator respects arena invariants");
    Model { arena, sensors }
}

/// A random recurrence-plus-safety pattern over `p0..p{props-1}`.
pub fn random_pattern(rng: &mut impl Rng, props: usize) -> SpecPattern {
    let names: Vec<String> = (0..props).map(|i| format!("p{i}")).collect();
    let mut order = names.clone();
    order.shuffle(rng);
    let safety = if props > 1 && rng.gen_bool(0.3) { vec![order.pop().unwrap()] } else { Vec::new() };
    let len = rng.gen_range(1..=order.len().clamp(1, 2));
    SpecPattern { safety, recurrence: vec![order.into_iter().take(len).collect()] }
}
