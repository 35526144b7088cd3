//! Independent oracles and instance builders shared by the integration and
//! acceptance tests.
#![allow(dead_code)]

use beliefplan::arena::{parse_model, Arena, Model, Player};
use beliefplan::automata::{compile_pattern, parse_pattern, Dba};
use beliefplan::ids::QId;
use beliefplan::observation::{alpha_oracle, update_env, update_system, Belief, ObservationModel, PlayPrefix};
use beliefplan::product::{build_product, ProductGame};
use beliefplan::random::{random_model, random_pattern, RandomParams};
use beliefplan::sensing::SensingModel;
use beliefplan::Instance;
use rand::{Rng, SeedableRng};

/// Random complete-information game whose product has at most `max_q` states.
pub fn small_game(rng: &mut impl Rng, max_q: usize) -> (Arena, Dba, ProductGame) {
    loop {
        let n = rng.gen_range(1..=10);
        let mut p = RandomParams::small(n);
        p.sys_actions = rng.gen_range(1..=3);
        p.env_actions = rng.gen_range(1..=3);
        let m = random_model(rng, &p);
        let d = compile_pattern(&random_pattern(rng, p.props), m.arena.ap_names()).unwrap();
        let g = build_product(&m.arena, &d).unwrap();
        if g.num_states() <= max_q {
            return (m.arena, d, g);
        }
    }
}

/// Winning region by brute force: a state is winning iff some memoryless
/// system strategy makes every play from it visit F infinitely often,
/// i.e. no F-free cycle is reachable in the strategy-restricted graph.
pub fn brute_force_win(g: &ProductGame) -> Vec<bool> {
    let n = g.num_states();
    let sys: Vec<QId> = g.states().filter(|&q| g.owner(q) == Player::System).collect();
    let mut choice = vec![0usize; sys.len()];
    let mut win = vec![false; n];
    loop {
        let mut succ: Vec<Vec<QId>> = g.states().map(|q| g.transitions(q).iter().map(|&(_, t)| t).collect()).collect();
        for (i, &q) in sys.iter().enumerate() {
            succ[q.index()] = vec![g.transitions(q)[choice[i]].1];
        }
        let bad = states_reaching_f_free_cycle(g, &succ);
        for q in 0..n {
            win[q] |= !bad[q];
        }
        // Next strategy in mixed-radix order.
        let mut i = 0;
        loop {
            if i == sys.len() {
                return win;
            }
            choice[i] += 1;
            if choice[i] < g.transitions(sys[i]).len() {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}

fn states_reaching_f_free_cycle(g: &ProductGame, succ: &[Vec<QId>]) -> Vec<bool> {
    let n = g.num_states();
    // A non-F state lies on an F-free cycle iff it can reach itself through
    // non-F states only.
    let mut on_cycle = vec![false; n];
    for start in 0..n {
        if g.is_accepting(QId::from_index(start)) {
            continue;
        }
        let mut seen = vec![false; n];
        let mut stack: Vec<usize> = succ[start].iter().map(|t| t.index()).collect();
        while let Some(v) = stack.pop() {
            if g.is_accepting(QId::from_index(v)) || seen[v] {
                continue;
            }
            if v == start {
                on_cycle[start] = true;
                break;
            }
            seen[v] = true;
            stack.extend(succ[v].iter().map(|t| t.index()));
        }
    }
    let mut bad = on_cycle.clone();
    let mut changed = true;
    while changed {
        changed = false;
        for q in 0..n {
            if !bad[q] && succ[q].iter().any(|t| bad[t.index()]) {
                bad[q] = true;
                changed = true;
            }
        }
    }
    bad
}

/// Worst-case number of queries to reach a belief where `done` holds, by
/// plain recursion over every split. `None` when unreachable.
pub fn brute_force_sensing_rank(model: &SensingModel, b: &Belief, done: &dyn Fn(&Belief) -> bool) -> Option<u32> {
    if done(b) {
        return Some(0);
    }
    model
        .splits(b)
        .iter()
        .filter_map(|(_, yes, no)| {
            let y = brute_force_sensing_rank(model, yes, done)?;
            let n = brute_force_sensing_rank(model, no, done)?;
            Some(1 + y.max(n))
        })
        .min()
}

/// `n` indistinguishable system states, each with one safe action; hidden
/// bits identify the state and one sensor reads each bit. From the hub the
/// environment may send the play to any of them.
pub fn binary_search_family(n: usize) -> String {
    let bits = (usize::BITS - (n - 1).leading_zeros()).max(1) as usize;
    let mut text = String::from("ap p\n");
    for b in 0..bits {
        text += &format!("pred b{b} hidden\n");
    }
    for i in 0..n {
        let vals: String = (0..bits).filter(|b| i >> b & 1 == 1).map(|b| format!(" b{b}=1")).collect();
        text += &format!("state s{i} sys {{}}{vals}\n");
    }
    text += "state hub env {p}\nstate trap env {}\ninit hub known\n";
    for i in 0..n {
        for j in 0..n {
            let dst = if i == j { "hub" } else { "trap" };
            text += &format!("trans s{i} a{j}@sys {dst}\n");
        }
        text += &format!("trans hub e{i}@env s{i}\n");
    }
    text += "trans trap stay@env trap\n";
    for b in (0..bits).rev() {
        text += &format!("sense bit{b} b{b}\n");
    }
    text
}

pub fn instance(model_text: &str, spec: &str) -> Instance {
    Instance::from_texts(model_text, spec).unwrap()
}

/// Parameters for partially observable games in which sensing every hidden
/// predicate always pins the state down.
pub fn sensor_sufficient_params(states: usize) -> RandomParams {
    RandomParams {
        states,
        sys_actions: 3,
        env_actions: 2,
        props: 2,
        observable_preds: 2,
        hidden_preds: 3,
        density: 0.7,
        observable_labels: true,
        unique_valuations: true,
        sense_hidden: true,
        random_sensors: 0,
        initial_known: false,
        connected: true,
    }
}

pub fn model_with(rng: &mut impl Rng, p: &RandomParams) -> Model {
    random_model(rng, p)
}

pub fn parse(text: &str) -> Model {
    parse_model(text).unwrap()
}

/// Random partially observable game with at most 10 product states.
pub fn po_game(seed: u64) -> (ProductGame, ObservationModel) {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    loop {
        let p = RandomParams {
            states: rng.gen_range(2..=7),
            sys_actions: 2,
            env_actions: 2,
            props: 1,
            observable_preds: 1,
            hidden_preds: 2,
            density: 0.7,
            observable_labels: false,
            unique_valuations: false,
            sense_hidden: false,
            random_sensors: 0,
            initial_known: rng.gen_bool(0.3),
            connected: true,
        };
        let m = random_model(&mut rng, &p);
        let d = compile_pattern(&parse_pattern("GF p0").unwrap(), m.arena.ap_names()).unwrap();
        let g = build_product(&m.arena, &d).unwrap();
        if g.num_states() <= 10 {
            let om = ObservationModel::new(&m.arena, &g);
            return (g, om);
        }
    }
}

/// Walks every play prefix of length up to `depth` from `q0`, comparing the
/// iterated update with the definitional belief. Returns the number of
/// prefixes checked.
pub fn check_all(g: &ProductGame, om: &ObservationModel, play: &mut PlayPrefix, b: &Belief, depth: usize) -> Result<usize, String> {
    let expected = alpha_oracle(g, om, play);
    if &expected != b {
        return Err(format!("prefix {:?}: update {:?} oracle {:?}", play, b, expected));
    }
    if !b.contains(play.last()) {
        return Err("ground truth left the belief".into());
    }
    if depth == 0 {
        return Ok(1);
    }
    let mut checked = 1;
    let q = play.last();
    for &(a, t) in g.transitions(q) {
        let next = match g.owner(q) {
            Player::System => update_system(g, om, b, a, om.obs(t)),
            Player::Environment => update_env(g, om, b, om.obs(t)),
        }
        .map_err(|e| e.to_string())?;
        play.push(a, t);
        checked += check_all(g, om, play, &next, depth - 1)?;
        play.states.pop();
        play.actions.pop();
    }
    Ok(checked)
}
