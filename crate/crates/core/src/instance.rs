use std::time::{Duration, Instant};

use crate::arena::{parse_model, Arena, Model};
use crate::automata::{parse_spec_document, Dba};
use crate::error::ModelError;
use crate::observation::ObservationModel;
use crate::product::{build_product, solve_buchi, ProductGame, SolveResult};
use crate::sensing::SensingModel;

/// Everything the executor needs, built from a model and a specification.
pub struct Instance {
    pub arena: Arena,
    pub dba: Dba,
    pub game: ProductGame,
    pub solution: SolveResult,
    pub observations: ObservationModel,
    pub sensing: SensingModel,
    pub build_time: Duration,
    pub solve_time: Duration,
}

impl Instance {
    pub fn new(model: Model, dba: Dba) -> Result<Self, ModelError> {
        let start = Instant::now();
        let game = build_product(&model.arena, &dba)?;
        let build_time = start.elapsed();
        let start = Instant::now();
        let solution = solve_buchi(&game);
        let solve_time = start.elapsed();
        let observations = ObservationModel::new(&model.arena, &game);
        let sensing = SensingModel::new(&model.arena, &game, model.sensors);
        Ok(Instance { arena: model.arena, dba, game, solution, observations, sensing, build_time, solve_time })
    }

    /// Parses a model document and a specification document.
    pub fn from_texts(model: &str, spec: &str) -> Result<Self, ModelError> {
        let model = parse_model(model)?;
        let dba = parse_spec_document(spec, model.arena.ap_names())?;
        Self::new(model, dba)
    }
}
