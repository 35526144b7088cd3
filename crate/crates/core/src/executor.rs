//! The online planning loop.
//!
//! At a system turn the composite strategy is consulted on the current
//! belief. A sensing decision is answered from the simulated ground truth
//! and narrows the belief without using the turn; a physical decision is
//! sampled, applied to the ground truth and followed by a belief update on
//! the resulting observation. At an environment turn the environment policy
//! moves and the belief is updated on the observation alone.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::arena::Player;
use crate::ids::{ActionId, QId};
use crate::instance::Instance;
use crate::observation::{initial_belief, update_env, update_system, Belief, Contradiction};
use crate::sensing::knows;
use crate::strategy::{CompositeStrategy, Decision};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EnvPolicy {
    /// Uniform over the enabled environment actions.
    UniformRandom,
    /// An enabled action that changes no predicate other than the turn, if
    /// there is one; otherwise the lowest enabled action.
    Stationary,
    /// Environment action names played in order, wrapping around at the end.
    Scripted(Vec<String>),
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub seed: u64,
    pub max_steps: usize,
    pub env_policy: EnvPolicy,
    /// Cap on consecutive sensing actions within one system turn.
    pub sensing_budget_per_turn: Option<u32>,
    /// Record full beliefs in the trace, not only their size.
    pub record_beliefs: bool,
    /// Record decision latency in the trace. Off by default, since it makes
    /// traces differ between otherwise identical runs.
    pub record_latency: bool,
}

impl RunConfig {
    pub fn new(seed: u64, max_steps: usize) -> Self {
        RunConfig {
            seed,
            max_steps,
            env_policy: EnvPolicy::UniformRandom,
            sensing_budget_per_turn: None,
            record_beliefs: false,
            record_latency: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Progress,
    Sensing,
    Env,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceEvent {
    pub step: usize,
    pub phase: Phase,
    pub actor: Player,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub action: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sensor: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outcome: Option<bool>,
    pub truth: String,
    pub belief_size: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub belief: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub latency_us: Option<f64>,
    #[serde(skip)]
    pub truth_id: QId,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct RunStats {
    pub steps: usize,
    pub f_visits: usize,
    pub f_visit_steps: Vec<usize>,
    pub max_belief_size: usize,
    pub sensing_actions: usize,
    pub physical_actions: usize,
    pub env_moves: usize,
    pub cache_hits: u64,
    pub cache_misses: u64,
    pub decisions: usize,
    pub mean_latency_us: f64,
    /// Events whose ground truth lies outside the winning region.
    pub outside_win: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Termination {
    MaxSteps,
    DeadEnd { belief: Vec<String> },
    BudgetExhausted { belief: Vec<String> },
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub initial_belief_size: usize,
    pub trace: Vec<TraceEvent>,
    pub stats: RunStats,
    pub termination: Termination,
}

impl RunReport {
    /// `(step, belief size)`, starting with the initial belief at step 0.
    pub fn belief_series(&self) -> Vec<(usize, usize)> {
        std::iter::once((0, self.initial_belief_size))
            .chain(self.trace.iter().map(|e| (e.step, e.belief_size)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RunError {
    #[error("max_steps must be at least 1")]
    NoSteps,
    #[error("the initial state `{0}` is not in the winning region")]
    InitialNotWinning(String),
    #[error(transparent)]
    Contradiction(#[from] Contradiction),
    #[error("scripted environment action `{action}` is not enabled at `{state}`")]
    ScriptedActionDisabled { action: String, state: String },
}

/// Picks the environment's move at `q`.
pub fn env_policy_step(
    inst: &Instance,
    policy: &EnvPolicy,
    q: QId,
    script_pos: &mut usize,
    rng: &mut impl Rng,
) -> Result<ActionId, RunError> {
    let game = &inst.game;
    let moves = game.transitions(q);
    debug_assert_eq!(game.owner(q), Player::Environment);
    match policy {
        EnvPolicy::UniformRandom => Ok(moves[rng.gen_range(0..moves.len())].0),
        EnvPolicy::Stationary => {
            let here = &inst.arena.state(game.arena_state(q)).valuation;
            let turn = inst.arena.turn_predicate().index();
            let keeps = |t: QId| {
                let there = &inst.arena.state(game.arena_state(t)).valuation;
                (1..inst.arena.pred_names().len()).all(|p| p == turn || here.get(p) == there.get(p))
            };
            Ok(moves.iter().find(|&&(_, t)| keeps(t)).unwrap_or(&moves[0]).0)
        }
        EnvPolicy::Scripted(names) => {
            let name = &names[*script_pos % names.len()];
            *script_pos += 1;
            inst.arena
                .action_id(name, Player::Environment)
                .filter(|&a| game.successor(q, a).is_some())
                .ok_or_else(|| RunError::ScriptedActionDisabled { action: name.clone(), state: game.name(q).to_string() })
        }
    }
}

/// Runs the composite strategy against the environment policy.
pub fn run(inst: &Instance, cfg: &RunConfig) -> Result<RunReport, RunError> {
    if cfg.max_steps == 0 {
        return Err(RunError::NoSteps);
    }
    let game = &inst.game;
    let om = &inst.observations;
    let mut truth = game.initial();
    if !inst.solution.is_winning(truth) {
        return Err(RunError::InitialNotWinning(game.name(truth).to_string()));
    }
    if let EnvPolicy::Scripted(names) = &cfg.env_policy {
        if names.is_empty() {
            return Err(RunError::ScriptedActionDisabled { action: String::new(), state: game.name(truth).to_string() });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut strategy = CompositeStrategy::new(game, &inst.solution, &inst.sensing);
    let mut belief = initial_belief(game, om);
    let mut stats = RunStats { max_belief_size: belief.len(), ..RunStats::default() };
    let initial_belief_size = belief.len();
    let mut trace = Vec::with_capacity(cfg.max_steps);
    let mut script_pos = 0;
    let mut sensed_this_turn = 0u32;
    let mut total_latency = 0.0;
    let mut termination = Termination::MaxSteps;

    while trace.len() < cfg.max_steps {
        let step = trace.len() + 1;
        let event = |phase, actor, action: Option<String>, sensor, outcome, truth: QId, belief: &Belief, latency| TraceEvent {
            step,
            phase,
            actor,
            action,
            sensor,
            outcome,
            truth: game.name(truth).to_string(),
            belief_size: belief.len(),
            belief: cfg.record_beliefs.then(|| belief.names(game)),
            latency_us: if cfg.record_latency { latency } else { None },
            truth_id: truth,
        };
        let ev = match game.owner(truth) {
            Player::System => {
                let started = Instant::now();
                let decision = strategy.decide::<f64>(&belief);
                let latency = started.elapsed().as_secs_f64() * 1e6;
                total_latency += latency;
                stats.decisions += 1;
                match decision {
                    Decision::Physical(dist) => {
                        let a = dist.sample(&mut rng);
                        let next = game.successor(truth, a).expect("f_P only picks enabled actions");
                        belief = update_system(game, om, &belief, a, om.obs(next))?;
                        truth = next;
                        sensed_this_turn = 0;
                        stats.physical_actions += 1;
                        let name = inst.arena.action(a).qualified();
                        event(Phase::Progress, Player::System, Some(name), None, None, truth, &belief, Some(latency))
                    }
                    Decision::Sense { query, .. } => {
                        if cfg.sensing_budget_per_turn.is_some_and(|b| sensed_this_turn >= b) {
                            termination = Termination::BudgetExhausted { belief: belief.names(game) };
                            break;
                        }
                        let outcome = inst.sensing.holds(truth, query);
                        let (yes, no) = knows(&inst.sensing, game, query, &belief).expect("planner only picks enabled sensors");
                        belief = if outcome { yes } else { no };
                        sensed_this_turn += 1;
                        stats.sensing_actions += 1;
                        let sensor = inst.sensing.describe(query).to_string();
                        event(Phase::Sensing, Player::System, None, Some(sensor), Some(outcome), truth, &belief, Some(latency))
                    }
                    Decision::DeadEnd => {
                        termination = Termination::DeadEnd { belief: belief.names(game) };
                        break;
                    }
                }
            }
            Player::Environment => {
                let a = env_policy_step(inst, &cfg.env_policy, truth, &mut script_pos, &mut rng)?;
                let next = game.successor(truth, a).expect("policy picks enabled actions");
                belief = update_env(game, om, &belief, om.obs(next))?;
                truth = next;
                stats.env_moves += 1;
                let name = inst.arena.action(a).qualified();
                event(Phase::Env, Player::Environment, Some(name), None, None, truth, &belief, None)
            }
        };
        debug_assert!(belief.contains(truth), "ground truth left the belief");
        if game.is_accepting(truth) {
            stats.f_visits += 1;
            stats.f_visit_steps.push(step);
        }
        if !inst.solution.is_winning(truth) {
            stats.outside_win += 1;
        }
        stats.max_belief_size = stats.max_belief_size.max(belief.len());
        trace.push(ev);
    }
    stats.steps = trace.len();
    stats.cache_hits = strategy.cache().hits();
    stats.cache_misses = strategy.cache().misses();
    stats.mean_latency_us = if stats.decisions > 0 { total_latency / stats.decisions as f64 } else { 0.0 };
    Ok(RunReport { initial_belief_size, trace, stats, termination })
}
