//! Observations, beliefs and belief updates.
//!
//! Two product states are observation-equivalent when they expose the same
//! predicates and agree on the exposed values. The automaton component is
//! never exposed. The system sees its own actions but only the effect of
//! environment actions.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::arena::{Arena, Player};
use crate::bitset::BitSet;
use crate::ids::{ActionId, ObsId, QId};
use crate::product::ProductGame;

#[derive(Clone, Debug)]
pub struct ObservationModel {
    class_of: Vec<ObsId>,
    classes: Vec<Vec<QId>>,
}

impl ObservationModel {
    pub fn new(arena: &Arena, game: &ProductGame) -> Self {
        let mut ids: HashMap<(BitSet, BitSet), ObsId> = HashMap::new();
        let mut classes: Vec<Vec<QId>> = Vec::new();
        let mut keys: HashMap<_, (BitSet, BitSet)> = HashMap::new();
        let class_of = game
            .states()
            .map(|q| {
                let s = game.arena_state(q);
                let key = keys.entry(s).or_insert_with(|| arena.observation_key(s)).clone();
                let id = *ids.entry(key).or_insert_with(|| {
                    classes.push(Vec::new());
                    ObsId::from_index(classes.len() - 1)
                });
                classes[id.index()].push(q);
                id
            })
            .collect();
        ObservationModel { class_of, classes }
    }

    /// Every state in its own class.
    pub fn fully_observable(game: &ProductGame) -> Self {
        ObservationModel {
            class_of: game.states().map(|q| ObsId(q.0)).collect(),
            classes: game.states().map(|q| vec![q]).collect(),
        }
    }

    pub fn obs(&self, q: QId) -> ObsId {
        self.class_of[q.index()]
    }

    /// Members of a class, in increasing order.
    pub fn class(&self, o: ObsId) -> &[QId] {
        &self.classes[o.index()]
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }
}

/// A set of states the system considers possible, kept sorted and free of
/// duplicates so equal beliefs compare and hash equal.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Belief(Vec<QId>);

impl Belief {
    pub fn new(mut states: Vec<QId>) -> Self {
        states.sort_unstable();
        states.dedup();
        Belief(states)
    }

    pub fn singleton(q: QId) -> Self {
        Belief(vec![q])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, q: QId) -> bool {
        self.0.binary_search(&q).is_ok()
    }

    pub fn states(&self) -> &[QId] {
        &self.0
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = QId> + '_ {
        self.0.iter().copied()
    }

    pub fn is_subset(&self, other: &Belief) -> bool {
        self.0.iter().all(|&q| other.contains(q))
    }

    /// Splits into the states satisfying `pred` and the rest.
    pub fn partition(&self, mut pred: impl FnMut(QId) -> bool) -> (Belief, Belief) {
        let (yes, no): (Vec<QId>, Vec<QId>) = self.0.iter().partition(|&&q| pred(q));
        (Belief(yes), Belief(no))
    }

    /// State names, for traces.
    pub fn names(&self, game: &ProductGame) -> Vec<String> {
        self.0.iter().map(|&q| game.name(q).to_string()).collect()
    }
}

impl fmt::Debug for Belief {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.0.iter().map(|q| q.0)).finish()
    }
}

impl FromIterator<QId> for Belief {
    fn from_iter<I: IntoIterator<Item = QId>>(iter: I) -> Self {
        Belief::new(iter.into_iter().collect())
    }
}

/// The observation contradicts every state of the belief.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("observation {observation:?} is inconsistent with the belief {belief:?}")]
pub struct Contradiction {
    pub belief: Belief,
    pub observation: ObsId,
}

fn restrict(om: &ObservationModel, image: Vec<QId>, belief: &Belief, o: ObsId) -> Result<Belief, Contradiction> {
    let next = Belief::new(image.into_iter().filter(|&q| om.obs(q) == o).collect());
    if next.is_empty() {
        Err(Contradiction { belief: belief.clone(), observation: o })
    } else {
        Ok(next)
    }
}

/// Belief after the system plays `action` and observes class `o`.
pub fn update_system(
    game: &ProductGame,
    om: &ObservationModel,
    belief: &Belief,
    action: ActionId,
    o: ObsId,
) -> Result<Belief, Contradiction> {
    debug_assert!(belief.iter().all(|q| game.owner(q) == Player::System));
    let image = belief.iter().filter_map(|q| game.successor(q, action)).collect();
    restrict(om, image, belief, o)
}

/// Belief after an unobserved environment move that arrives in class `o`.
pub fn update_env(
    game: &ProductGame,
    om: &ObservationModel,
    belief: &Belief,
    o: ObsId,
) -> Result<Belief, Contradiction> {
    debug_assert!(belief.iter().all(|q| game.owner(q) == Player::Environment));
    let image = belief.iter().flat_map(|q| game.transitions(q).iter().map(|&(_, t)| t)).collect();
    restrict(om, image, belief, o)
}

/// The belief before any move: the initial candidates, all of which share
/// the initial state's observation.
pub fn initial_belief(game: &ProductGame, om: &ObservationModel) -> Belief {
    let o = om.obs(game.initial());
    Belief::new(game.initial_candidates().iter().copied().filter(|&q| om.obs(q) == o).collect())
}

/// A finite play `q0 a0 q1 ... qn`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlayPrefix {
    pub states: Vec<QId>,
    pub actions: Vec<ActionId>,
}

impl PlayPrefix {
    pub fn start(q: QId) -> Self {
        PlayPrefix { states: vec![q], actions: Vec::new() }
    }

    pub fn push(&mut self, a: ActionId, q: QId) {
        self.actions.push(a);
        self.states.push(q);
    }

    pub fn last(&self) -> QId {
        *self.states.last().expect("prefix has at least one state")
    }
}

/// Observation of an action: the action itself for the system, nothing for
/// the environment.
fn action_observation(game: &ProductGame, from: QId, a: ActionId) -> Option<ActionId> {
    (game.owner(from) == Player::System).then_some(a)
}

/// Belief by definition: the last states of every play prefix, from any
/// initial candidate, whose observation sequence equals that of `prefix`.
///
/// Enumerates the prefixes explicitly without merging them, so it is
/// exponential in the prefix length and meant as a test oracle.
pub fn alpha_oracle(game: &ProductGame, om: &ObservationModel, prefix: &PlayPrefix) -> Belief {
    let target: Vec<(Option<ActionId>, ObsId)> = prefix
        .actions
        .iter()
        .zip(prefix.states.windows(2))
        .map(|(&a, w)| (action_observation(game, w[0], a), om.obs(w[1])))
        .collect();
    let first = om.obs(prefix.states[0]);
    let mut plays: Vec<Vec<QId>> =
        game.initial_candidates().iter().filter(|&&q| om.obs(q) == first).map(|&q| vec![q]).collect();
    for &(seen_action, seen_obs) in &target {
        let mut extended = Vec::new();
        for play in &plays {
            let last = *play.last().unwrap();
            for &(a, t) in game.transitions(last) {
                if action_observation(game, last, a) == seen_action && om.obs(t) == seen_obs {
                    let mut longer = play.clone();
                    longer.push(t);
                    extended.push(longer);
                }
            }
        }
        plays = extended;
    }
    plays.iter().map(|p| *p.last().unwrap()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arena::parse_arena;
    use crate::automata::{compile_pattern, parse_pattern};
    use crate::product::build_product;

    /// Environment picks a hidden coin value, then the system moves.
    const COIN: &str = "\
ap p
pred h hidden
pred g
state start env {}
state heads sys {} h=1
state tails sys {}
state goal env {p} g=1
state trap env {}
init start known
trans start flip@env heads
trans start flop@env tails
trans heads a@sys goal
trans heads b@sys trap
trans tails a@sys trap
trans tails b@sys goal
trans goal back@env start
trans trap back@env trap
";

    fn coin() -> (Arena, ProductGame, ObservationModel) {
        let a = parse_arena(COIN).unwrap();
        let d = compile_pattern(&parse_pattern("GF p").unwrap(), a.ap_names()).unwrap();
        let g = build_product(&a, &d).unwrap();
        let om = ObservationModel::new(&a, &g);
        (a, g, om)
    }

    fn q(g: &ProductGame, arena_name: &str) -> QId {
        g.states().find(|&q| g.name(q).starts_with(&format!("{arena_name}|"))).unwrap()
    }

    #[test]
    fn hidden_predicates_merge_classes() {
        let (_, g, om) = coin();
        assert_eq!(om.obs(q(&g, "heads")), om.obs(q(&g, "tails")));
        assert_ne!(om.obs(q(&g, "heads")), om.obs(q(&g, "start")));
        for o in 0..om.num_classes() {
            let members = om.class(ObsId::from_index(o));
            assert!(members.iter().all(|&m| g.owner(m) == g.owner(members[0])));
        }
        let full = ObservationModel::fully_observable(&g);
        assert_eq!(full.num_classes(), g.num_states());
    }

    #[test]
    fn env_update_keeps_both_hypotheses() {
        let (_, g, om) = coin();
        let b0 = initial_belief(&g, &om);
        assert_eq!(b0, Belief::singleton(g.initial()));
        let heads = q(&g, "heads");
        let b1 = update_env(&g, &om, &b0, om.obs(heads)).unwrap();
        assert_eq!(b1, Belief::new(vec![heads, q(&g, "tails")]));
    }

    #[test]
    fn system_update_filters_by_observation() {
        let (a, g, om) = coin();
        let b = Belief::new(vec![q(&g, "heads"), q(&g, "tails")]);
        let act = a.action_id("a", Player::System).unwrap();
        let goal = q(&g, "goal");
        assert_eq!(update_system(&g, &om, &b, act, om.obs(goal)).unwrap(), Belief::singleton(goal));
        let heads = Belief::singleton(q(&g, "heads"));
        let err = update_system(&g, &om, &heads, act, om.obs(q(&g, "trap"))).unwrap_err();
        assert_eq!(err.belief, heads);
    }

    #[test]
    fn oracle_agrees_on_a_short_play() {
        let (a, g, om) = coin();
        let mut play = PlayPrefix::start(g.initial());
        let heads = q(&g, "heads");
        play.push(a.action_id("flip", Player::Environment).unwrap(), heads);
        let expected = Belief::new(vec![heads, q(&g, "tails")]);
        assert_eq!(alpha_oracle(&g, &om, &play), expected);
        let act = a.action_id("a", Player::System).unwrap();
        play.push(act, g.successor(heads, act).unwrap());
        assert_eq!(alpha_oracle(&g, &om, &play), Belief::singleton(play.last()));
    }
}
