//! Belief-based strategies: the randomized progress strategy `f_P` and the
//! composite strategy that falls back to active sensing where `f_P` is
//! undefined.

use std::marker::PhantomData;

use num_traits::{FromPrimitive, Num};
use rand::Rng;

use crate::ids::{ActionId, QueryId};
use crate::observation::Belief;
use crate::product::{allow, ProductGame, SolveResult};
use crate::sensing::{SensingModel, SensingPlanner, SensingStrategy, StrategyCache};

/// Uniform distribution over a nonempty set of actions, with probabilities
/// in `P`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActionDistribution<P = f64> {
    support: Vec<ActionId>,
    _scalar: PhantomData<P>,
}

impl<P: Num + FromPrimitive + Copy> ActionDistribution<P> {
    /// `None` for an empty support.
    pub fn uniform(mut support: Vec<ActionId>) -> Option<Self> {
        support.sort_unstable();
        support.dedup();
        (!support.is_empty()).then_some(ActionDistribution { support, _scalar: PhantomData })
    }

    /// Sorted, without duplicates.
    pub fn support(&self) -> &[ActionId] {
        &self.support
    }

    pub fn probability(&self, a: ActionId) -> P {
        if self.support.binary_search(&a).is_ok() {
            P::one() / P::from_usize(self.support.len()).expect("support size fits the scalar")
        } else {
            P::zero()
        }
    }

    pub fn sample(&self, rng: &mut impl Rng) -> ActionId {
        self.support[rng.gen_range(0..self.support.len())]
    }

    pub fn with_scalar<Q: Num + FromPrimitive + Copy>(&self) -> ActionDistribution<Q> {
        ActionDistribution { support: self.support.clone(), _scalar: PhantomData }
    }
}

/// `Progress(B)`: the union of `WS(q)` over `B`. `None` when some state of
/// `B` is outside the winning region.
pub fn progress_set(sr: &SolveResult, belief: &Belief) -> Option<Vec<ActionId>> {
    let mut out = belief.iter().map(|q| sr.strategy(q)).collect::<Option<Vec<_>>>()?;
    out.sort_unstable();
    out.dedup();
    Some(out)
}

/// `allow(B)`: actions that keep every state of `B` in the winning region.
pub fn allow_set(sr: &SolveResult, game: &ProductGame, belief: &Belief) -> Vec<ActionId> {
    let mut states = belief.iter();
    let Some(first) = states.next() else { return Vec::new() };
    let mut out = allow(sr, game, first);
    for q in states {
        if out.is_empty() {
            break;
        }
        let here = allow(sr, game, q);
        out.retain(|a| here.contains(a));
    }
    out
}

/// `f_P(B)`: uniform over `Progress(B)` when it is defined and contained in
/// `allow(B)`.
pub fn progress_strategy<P: Num + FromPrimitive + Copy>(
    sr: &SolveResult,
    game: &ProductGame,
    belief: &Belief,
) -> Option<ActionDistribution<P>> {
    let progress = progress_set(sr, belief)?;
    let allowed = allow_set(sr, game, belief);
    if progress.iter().all(|a| allowed.contains(a)) {
        ActionDistribution::uniform(progress)
    } else {
        None
    }
}

pub fn progress_defined(sr: &SolveResult, game: &ProductGame, belief: &Belief) -> bool {
    progress_strategy::<f64>(sr, game, belief).is_some()
}

#[derive(Clone, Debug, PartialEq)]
pub enum Decision<P = f64> {
    Physical(ActionDistribution<P>),
    /// Ask `query`; at most `rank` queries remain before `f_P` is defined.
    Sense { query: QueryId, rank: u32 },
    /// Neither `f_P` nor a sensing strategy is available.
    DeadEnd,
}

/// The composite strategy: `f_P` where it is defined, otherwise the sensing
/// strategy for the current belief, planned on demand and kept in a cache.
///
/// It sees beliefs only; ground truth never reaches it.
pub struct CompositeStrategy<'a> {
    game: &'a ProductGame,
    solution: &'a SolveResult,
    planner: SensingPlanner<'a>,
    cache: StrategyCache,
}

impl<'a> CompositeStrategy<'a> {
    pub fn new(game: &'a ProductGame, solution: &'a SolveResult, sensing: &'a SensingModel) -> Self {
        CompositeStrategy { game, solution, planner: SensingPlanner::new(sensing), cache: StrategyCache::new() }
    }

    pub fn cache(&self) -> &StrategyCache {
        &self.cache
    }

    /// `f(B)`.
    pub fn decide<P: Num + FromPrimitive + Copy>(&mut self, belief: &Belief) -> Decision<P> {
        if let Some(d) = progress_strategy(self.solution, self.game, belief) {
            return Decision::Physical(d);
        }
        if let Some((query, rank)) = self.cache.lookup(belief) {
            return Decision::Sense { query, rank };
        }
        let strategy = self.sensing_strategy(belief);
        match (strategy.choice(belief), strategy.root_rank()) {
            (Some(query), Some(rank)) => {
                self.cache.insert(&strategy);
                Decision::Sense { query, rank }
            }
            _ => Decision::DeadEnd,
        }
    }

    /// The sensing strategy rooted at `belief`, bypassing the cache.
    pub fn sensing_strategy(&mut self, belief: &Belief) -> SensingStrategy {
        let (sr, game) = (self.solution, self.game);
        self.planner.plan(belief, &mut |b| progress_defined(sr, game, b))
    }
}

#[cfg(test)]
mod tests {
    use num_rational::Rational64;

    use super::*;
    use crate::arena::{parse_model, Model};
    use crate::automata::{compile_pattern, parse_pattern};
    use crate::product::{build_product, solve_buchi};

    fn ids(v: &[u32]) -> Vec<ActionId> {
        v.iter().map(|&i| ActionId(i)).collect()
    }

    #[test]
    fn uniform_law() {
        let d = ActionDistribution::<Rational64>::uniform(ids(&[3, 1, 3])).unwrap();
        assert_eq!(d.support(), ids(&[1, 3]).as_slice());
        assert_eq!(d.probability(ActionId(1)), Rational64::new(1, 2));
        assert_eq!(d.probability(ActionId(2)), Rational64::from_integer(0));
        let total: Rational64 = d.support().iter().map(|&a| d.probability(a)).sum();
        assert_eq!(total, Rational64::from_integer(1));
        assert!(ActionDistribution::<f64>::uniform(Vec::new()).is_none());
    }

    /// Hidden bit `h` decides which of `a` and `b` is safe; the sensor reads it.
    const FORK: &str = "\
ap p
pred h hidden
state l sys {} h=1
state r sys {}
state good env {p}
state bad env {}
init l
trans l a@sys good
trans l b@sys bad
trans r a@sys bad
trans r b@sys good
trans good back@env l
trans good back2@env r
trans bad back@env bad
sense peek h
";

    fn fork(with_sensor: bool) -> (Model, ProductGame, SolveResult) {
        let text = if with_sensor { FORK.to_string() } else { FORK.replace("sense peek h\n", "") };
        let m = parse_model(&text).unwrap();
        let d = compile_pattern(&parse_pattern("GF p").unwrap(), m.arena.ap_names()).unwrap();
        let g = build_product(&m.arena, &d).unwrap();
        let sr = solve_buchi(&g);
        (m, g, sr)
    }

    fn named(g: &ProductGame, prefix: &str) -> crate::ids::QId {
        g.states().find(|&q| g.name(q).starts_with(prefix)).unwrap()
    }

    #[test]
    fn conflicting_demands_leave_f_p_undefined() {
        let (_, g, sr) = fork(true);
        let (l, r) = (named(&g, "l|"), named(&g, "r|"));
        let both = Belief::new(vec![l, r]);
        assert_eq!(progress_set(&sr, &both).unwrap().len(), 2);
        assert!(allow_set(&sr, &g, &both).is_empty());
        assert!(progress_strategy::<f64>(&sr, &g, &both).is_none());
        let single = progress_strategy::<f64>(&sr, &g, &Belief::singleton(l)).unwrap();
        assert_eq!(single.support(), &[sr.strategy(l).unwrap()]);
        let bad = named(&g, "bad|");
        assert!(progress_set(&sr, &Belief::new(vec![l, bad])).is_none());
    }

    #[test]
    fn composite_switches_to_sensing() {
        let (m, g, sr) = fork(true);
        let model = SensingModel::new(&m.arena, &g, m.sensors.clone());
        let mut f = CompositeStrategy::new(&g, &sr, &model);
        let both = Belief::new(vec![named(&g, "l|"), named(&g, "r|")]);
        assert_eq!(f.decide::<f64>(&both), Decision::Sense { query: QueryId(0), rank: 1 });
        assert_eq!(f.decide::<f64>(&both), Decision::Sense { query: QueryId(0), rank: 1 });
        assert_eq!(f.cache().hits(), 1);
        assert!(matches!(f.decide::<f64>(&Belief::singleton(named(&g, "l|"))), Decision::Physical(_)));
    }

    #[test]
    fn no_sensor_means_dead_end() {
        let (m, g, sr) = fork(false);
        let model = SensingModel::new(&m.arena, &g, m.sensors.clone());
        let mut f = CompositeStrategy::new(&g, &sr, &model);
        let both = Belief::new(vec![named(&g, "l|"), named(&g, "r|")]);
        assert_eq!(f.decide::<f64>(&both), Decision::DeadEnd);
    }
}
