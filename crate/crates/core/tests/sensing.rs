mod common;

use beliefplan::arena::Player;
use beliefplan::automata::{compile_pattern, parse_pattern};
use beliefplan::ids::QueryId;
use beliefplan::observation::Belief;
use beliefplan::product::{build_product, solve_buchi};
use beliefplan::random::{random_model, RandomParams};
use beliefplan::sensing::{build_brtree, enabled_at, knows, solve_sensing, NodeKind, SensingModel, SensingPlanner};
use beliefplan::strategy::progress_defined;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sensing_game(seed: u64) -> (beliefplan::arena::Model, beliefplan::product::ProductGame) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = RandomParams {
        states: rng.gen_range(2..=9),
        sys_actions: 2,
        env_actions: 2,
        props: 2,
        observable_preds: 1,
        hidden_preds: 3,
        density: 0.7,
        observable_labels: false,
        unique_valuations: false,
        sense_hidden: false,
        random_sensors: 4,
        initial_known: false,
        connected: true,
    };
    let m = random_model(&mut rng, &p);
    let d = compile_pattern(&parse_pattern("GF p0").unwrap(), m.arena.ap_names()).unwrap();
    let g = build_product(&m.arena, &d).unwrap();
    (m, g)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn knows_partitions_and_preserves_truth(seed in any::<u64>()) {
        let (m, g) = sensing_game(seed);
        let model = SensingModel::new(&m.arena, &g, m.sensors.clone());
        let b: Belief = g.states().collect();
        let enabled = enabled_at(&model, &b);
        for id in model.queries() {
            let (sensor, _) = model.query(id);
            match knows(&model, &g, id, &b) {
                Ok((yes, no)) => {
                    prop_assert!(enabled.contains(&sensor));
                    prop_assert_eq!(yes.len() + no.len(), b.len());
                    for q in b.iter() {
                        prop_assert!(yes.contains(q) != no.contains(q));
                        prop_assert_eq!(yes.contains(q), model.holds(q, id));
                    }
                }
                Err(_) => prop_assert!(!enabled.contains(&sensor)),
            }
        }
    }

    #[test]
    fn planner_matches_tree_attractor(seed in any::<u64>()) {
        let (m, g) = sensing_game(seed);
        let sr = solve_buchi(&g);
        let model = SensingModel::new(&m.arena, &g, m.sensors.clone());
        let mut planner = SensingPlanner::new(&model);
        let fp = |b: &Belief| progress_defined(&sr, &g, b);
        for owner in [Player::System, Player::Environment] {
            let root: Belief = g.states().filter(|&q| g.owner(q) == owner).collect();
            if root.is_empty() {
                continue;
            }
            let tree = build_brtree(&root, &model, &mut |b| fp(b), None).unwrap();
            let attractor = solve_sensing(&tree);
            let lazy = planner.plan(&root, &mut |b| fp(b));
            prop_assert_eq!(attractor.root_rank(), lazy.root_rank());
            prop_assert_eq!(attractor.choice(&root), lazy.choice(&root));
            prop_assert_eq!(attractor.root_rank(), common::brute_force_sensing_rank(&model, &root, &fp));
            // Every node on the lazy strategy agrees with the attractor.
            for (b, q, r) in lazy.entries() {
                prop_assert_eq!(attractor.choice(b), Some(q));
                prop_assert_eq!(attractor.rank(b), Some(r));
            }
            // Tree shape: children strictly smaller, splits are partitions.
            for node in tree.nodes() {
                if let NodeKind::Internal(splits) = &node.kind {
                    prop_assert!(!splits.is_empty());
                    for s in splits {
                        let (yes, no) = (&tree.node(s.holds).belief, &tree.node(s.fails).belief);
                        prop_assert!(!yes.is_empty() && !no.is_empty());
                        prop_assert_eq!(yes.len() + no.len(), node.belief.len());
                        prop_assert!(yes.is_subset(&node.belief) && no.is_subset(&node.belief));
                    }
                }
            }
            // Ranks strictly decrease along the chosen query for both outcomes.
            for (b, q, r) in attractor.entries() {
                let (yes, no) = knows(&model, &g, q, b).unwrap();
                prop_assert!(attractor.rank(&yes).unwrap() < r);
                prop_assert!(attractor.rank(&no).unwrap() < r);
            }
        }
    }
}

#[test]
fn binary_search_ranks_are_logarithmic() {
    for n in 2..=32usize {
        let inst = common::instance(&common::binary_search_family(n), "GF p");
        let sys: Belief = inst.game.states().filter(|&q| inst.game.owner(q) == Player::System).collect();
        assert_eq!(sys.len(), n);
        let mut planner = SensingPlanner::new(&inst.sensing);
        let s = planner.plan(&sys, &mut |b| progress_defined(&inst.solution, &inst.game, b));
        let expected = (n as f64).log2().ceil() as u32;
        assert_eq!(s.root_rank(), Some(expected), "n = {n}");
    }
}

#[test]
fn brtree_examples() {
    let inst = common::instance(&common::binary_search_family(2), "GF p");
    let sys: Belief = inst.game.states().filter(|&q| inst.game.owner(q) == Player::System).collect();
    let fp = |b: &Belief| progress_defined(&inst.solution, &inst.game, b);
    let tree = build_brtree(&sys, &inst.sensing, &mut |b| fp(b), None).unwrap();
    assert_eq!(tree.nodes().len(), 3);
    assert_eq!(tree.depth(), 1);
    let s = solve_sensing(&tree);
    assert_eq!((s.root_rank(), s.choice(&sys)), (Some(1), Some(QueryId(0))));

    // Without sensors the root is an unrefinable leaf.
    let text = common::binary_search_family(2).lines().filter(|l| !l.starts_with("sense")).collect::<Vec<_>>().join("\n");
    let inst = common::instance(&text, "GF p");
    let fp = |b: &Belief| progress_defined(&inst.solution, &inst.game, b);
    let tree = build_brtree(&sys, &inst.sensing, &mut |b| fp(b), None).unwrap();
    assert_eq!(tree.nodes().len(), 1);
    assert!(!solve_sensing(&tree).solvable());
}
