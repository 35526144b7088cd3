//! Sensing actions and active-sensing strategies.
//!
//! A sensing action reveals the truth value of one of its formulas at the
//! current state without changing the state. Applying it splits a belief
//! into the states where the formula holds and the rest ([`knows`]).
//! Belief revision trees record every such split, and the attractor of the
//! beliefs where the progress strategy is defined yields the sensing
//! strategy with the fewest queries under worst-case outcomes.

mod planner;
mod tree;

pub use planner::{SensingPlanner, StrategyCache};
pub use tree::{build_brtree, solve_sensing, BrNode, BrTree, LeafReason, NodeKind, SensingStrategy, Split, TreeTooLarge};

use thiserror::Error;

use crate::arena::Arena;
use crate::bitset::BitSet;
use crate::formula::Formula;
use crate::ids::{PredId, QId, QueryId, SensorId};
use crate::observation::Belief;
use crate::product::ProductGame;

/// Where a sensing action may be used.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Enablement {
    Everywhere,
    /// At states satisfying the formula.
    When(Formula<PredId>),
}

/// A state-preserving query. It carries no transition, so it cannot change
/// any predicate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SensingAction {
    pub name: String,
    pub formulas: Vec<Formula<PredId>>,
    pub enabled: Enablement,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SensingError {
    #[error("sensing action `{sensor}` is not enabled at state `{state}`")]
    NotEnabled { sensor: String, state: String },
}

/// Sensors with their formula values and enabledness tabulated per arena
/// state.
#[derive(Clone, Debug)]
pub struct SensingModel {
    sensors: Vec<SensingAction>,
    queries: Vec<(SensorId, usize)>,
    /// Per product state: its arena state.
    arena_state: Vec<u32>,
    /// Per arena state: bit per query.
    truth: Vec<BitSet>,
    /// Per arena state: bit per sensor.
    enabled: Vec<BitSet>,
    labels: Vec<String>,
}

impl SensingModel {
    pub fn new(arena: &Arena, game: &ProductGame, sensors: Vec<SensingAction>) -> Self {
        let queries: Vec<(SensorId, usize)> = sensors
            .iter()
            .enumerate()
            .flat_map(|(i, s)| (0..s.formulas.len()).map(move |k| (SensorId::from_index(i), k)))
            .collect();
        let pred_name = |p: &PredId| arena.pred_names()[p.index()].clone();
        let labels = queries
            .iter()
            .map(|&(s, k)| {
                let sensor = &sensors[s.index()];
                format!("{}: {}", sensor.name, sensor.formulas[k].display(pred_name))
            })
            .collect();
        let mut truth = Vec::with_capacity(arena.num_states());
        let mut enabled = Vec::with_capacity(arena.num_states());
        for s in 0..arena.num_states() {
            let valuation = &arena.states()[s].valuation;
            let value = |p: &PredId| valuation.get(p.index());
            let mut t = BitSet::new(queries.len());
            for (i, &(sensor, k)) in queries.iter().enumerate() {
                t.set(i, sensors[sensor.index()].formulas[k].eval(&value));
            }
            let mut e = BitSet::new(sensors.len());
            for (i, sensor) in sensors.iter().enumerate() {
                e.set(
                    i,
                    match &sensor.enabled {
                        Enablement::Everywhere => true,
                        Enablement::When(f) => f.eval(&value),
                    },
                );
            }
            truth.push(t);
            enabled.push(e);
        }
        let arena_state = game.states().map(|q| game.arena_state(q).0).collect();
        SensingModel { sensors, queries, arena_state, truth, enabled, labels }
    }

    /// A model without sensors.
    pub fn empty(arena: &Arena, game: &ProductGame) -> Self {
        Self::new(arena, game, Vec::new())
    }

    pub fn sensors(&self) -> &[SensingAction] {
        &self.sensors
    }

    pub fn num_queries(&self) -> usize {
        self.queries.len()
    }

    pub fn queries(&self) -> impl Iterator<Item = QueryId> {
        (0..self.queries.len()).map(QueryId::from_index)
    }

    /// The sensor and formula index behind a query.
    pub fn query(&self, id: QueryId) -> (SensorId, usize) {
        self.queries[id.index()]
    }

    /// `sensor: formula`, for traces.
    pub fn describe(&self, id: QueryId) -> &str {
        &self.labels[id.index()]
    }

    /// Truth value of a query's formula at `q`.
    pub fn holds(&self, q: QId, id: QueryId) -> bool {
        self.truth[self.arena_state[q.index()] as usize].get(id.index())
    }

    /// Whether `sensor ∈ Γ_q`.
    pub fn is_enabled(&self, q: QId, sensor: SensorId) -> bool {
        self.enabled[self.arena_state[q.index()] as usize].get(sensor.index())
    }

    /// Every split of `belief` by an enabled query into two nonempty parts,
    /// in query order: `(query, holds, fails)`.
    pub fn splits(&self, belief: &Belief) -> Vec<(QueryId, Belief, Belief)> {
        let enabled = enabled_at(self, belief);
        let mut out = Vec::new();
        for sensor in enabled {
            for id in self.queries().filter(|&id| self.query(id).0 == sensor) {
                let (yes, no) = belief.partition(|q| self.holds(q, id));
                if !yes.is_empty() && !no.is_empty() {
                    out.push((id, yes, no));
                }
            }
        }
        out
    }
}

/// Sensing actions enabled at every state of `belief`.
pub fn enabled_at(model: &SensingModel, belief: &Belief) -> Vec<SensorId> {
    (0..model.sensors.len())
        .map(SensorId::from_index)
        .filter(|&s| belief.iter().all(|q| model.is_enabled(q, s)))
        .collect()
}

/// `Knows(φ, a, B)`: the states of `belief` where the query's formula holds,
/// and the rest.
pub fn knows(model: &SensingModel, game: &ProductGame, query: QueryId, belief: &Belief) -> Result<(Belief, Belief), SensingError> {
    let (sensor, _) = model.query(query);
    if let Some(q) = belief.iter().find(|&q| !model.is_enabled(q, sensor)) {
        return Err(SensingError::NotEnabled {
            sensor: model.sensors[sensor.index()].name.clone(),
            state: game.name(q).to_string(),
        });
    }
    Ok(belief.partition(|q| model.holds(q, query)))
}
