mod common;

use beliefplan::arena::{parse_model, serialize_model};
use beliefplan::automata::{parse_spec_document, Dba};
use beliefplan::random::{random_model, random_pattern, RandomParams};
use beliefplan::wumpus::{build_wumpus, WumpusConfig, WUMPUS_SPEC};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn serialized_models_parse_back_canonically(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = RandomParams {
            states: rng.gen_range(1..=8),
            observable_preds: rng.gen_range(0..=2),
            hidden_preds: rng.gen_range(0..=2),
            random_sensors: rng.gen_range(0..=3),
            initial_known: rng.gen_bool(0.5),
            ..RandomParams::small(1)
        };
        let m = random_model(&mut rng, &p);
        let text = serialize_model(&m);
        let back = parse_model(&text).unwrap();
        prop_assert_eq!(&back, &m.canonicalize());
        prop_assert_eq!(serialize_model(&back), text);
    }

    #[test]
    fn automaton_documents_round_trip(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let aps: Vec<String> = (0..3).map(|i| format!("p{i}")).collect();
        let pattern = random_pattern(&mut rng, 3);
        let d: Dba = parse_spec_document(&pattern.to_string(), &aps).unwrap();
        let back = parse_spec_document(&d.to_document(), &aps).unwrap();
        prop_assert_eq!(back, d);
    }
}

#[test]
fn wumpus_documents_replay_through_the_generic_pipeline() {
    let w = build_wumpus(&WumpusConfig::default()).unwrap();
    let text = serialize_model(&w.model);
    let m = parse_model(&text).unwrap();
    assert_eq!(m, w.model.canonicalize());
    let d = parse_spec_document(WUMPUS_SPEC, m.arena.ap_names()).unwrap();
    assert_eq!(d.num_states(), 5);
}
