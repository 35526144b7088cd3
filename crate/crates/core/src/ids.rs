//! Dense integer identifiers.

use serde::{Deserialize, Serialize};

macro_rules! dense_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        pub struct $name(pub u32);

        impl $name {
            #[inline]
            pub fn index(self) -> usize {
                self.0 as usize
            }

            #[inline]
            pub fn from_index(index: usize) -> Self {
                Self(u32::try_from(index).expect("id space exhausted"))
            }
        }
    };
}

dense_id!(
    /// A state of the arena.
    StateId
);
dense_id!(
    /// A physical action of either player.
    ActionId
);
dense_id!(
    /// A predicate of the state interpretation.
    PredId
);
dense_id!(
    /// An atomic proposition of the labeling.
    PropId
);
dense_id!(
    /// A state of a deterministic Büchi automaton.
    AutStateId
);
dense_id!(
    /// A state of the product game.
    QId
);
dense_id!(
    /// An observation-equivalence class.
    ObsId
);
dense_id!(
    /// A sensing action.
    SensorId
);
dense_id!(
    /// One (sensor, formula) pair, in sensor-major order.
    QueryId
);
