//! The Wumpus gridworld: a robot that must visit three goal cells in order,
//! forever, without meeting a wumpus that wanders a restricted region and
//! whose position the robot can only learn by smelling for stench.
//!
//! Cells are 1-based `(x, y)` with `N` increasing `y`. A state is the robot
//! cell, the wumpus cell and whose turn it is. Robot coordinates are
//! observable and wumpus coordinates hidden, both one-hot encoded.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::arena::{Arena, ArenaParts, Model, Player, StateRecord, TURN_PREDICATE};
use crate::automata::{compile_pattern, parse_pattern, Dba};
use crate::bitset::BitSet;
use crate::error::ModelError;
use crate::formula::Formula;
use crate::ids::{ActionId, PredId, PropId, StateId};
use crate::sensing::{Enablement, SensingAction};

/// The specification, as a pattern document.
pub const WUMPUS_SPEC: &str = "GF seq(R1, R2, R3) & G !col";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub x: u32,
    pub y: u32,
}

impl Cell {
    pub const fn new(x: u32, y: u32) -> Self {
        Cell { x, y }
    }

    pub fn chebyshev(self, other: Cell) -> u32 {
        self.x.abs_diff(other.x).max(self.y.abs_diff(other.y))
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}", self.x, self.y)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum WumpusStart {
    Known(Cell),
    /// Anywhere in the region; the robot starts with the whole region as its
    /// belief.
    AnywhereInRegion,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SmellPlacement {
    /// Every cell can be smelled from anywhere.
    AnyCell,
    /// Only cells within this Chebyshev distance of the robot.
    RobotNeighborhood(u32),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WumpusConfig {
    pub width: u32,
    pub height: u32,
    pub r1: Cell,
    pub r2: Cell,
    pub r3: Cell,
    pub region: Vec<Cell>,
    pub robot_start: Cell,
    pub wumpus_start: WumpusStart,
    pub smell: SmellPlacement,
    /// Lets the wumpus stay put. A wumpus cell without any move inside the
    /// region always gets `stay`.
    pub wumpus_can_stay: bool,
}

/// Cells left out of the default region: the three goals, the robot's start
/// and two refuges. No two goals are adjacent, so every cycle crosses the
/// region.
const DEFAULT_CUTOUT: [Cell; 6] =
    [Cell::new(2, 3), Cell::new(7, 5), Cell::new(5, 7), Cell::new(5, 3), Cell::new(5, 5), Cell::new(3, 3)];

impl Default for WumpusConfig {
    /// A 7×7 grid whose region is everything except six cells.
    fn default() -> Self {
        let region = grid(7, 7).filter(|c| !DEFAULT_CUTOUT.contains(c)).collect();
        WumpusConfig {
            width: 7,
            height: 7,
            r1: Cell::new(2, 3),
            r2: Cell::new(7, 5),
            r3: Cell::new(5, 7),
            region,
            robot_start: Cell::new(5, 3),
            wumpus_start: WumpusStart::AnywhereInRegion,
            smell: SmellPlacement::AnyCell,
            wumpus_can_stay: false,
        }
    }
}

fn grid(width: u32, height: u32) -> impl Iterator<Item = Cell> {
    (1..=height).flat_map(move |y| (1..=width).map(move |x| Cell::new(x, y)))
}

/// Whether a wumpus at `wumpus` makes `probe` smell.
pub fn stench(config: &WumpusConfig, wumpus: Cell, probe: Cell) -> bool {
    config.region.contains(&wumpus) && wumpus.chebyshev(probe) <= 1
}

const ROBOT_MOVES: [(&str, i64, i64); 8] =
    [("N", 0, 1), ("S", 0, -1), ("E", 1, 0), ("W", -1, 0), ("NE", 1, 1), ("NW", -1, 1), ("SE", 1, -1), ("SW", -1, -1)];
const WUMPUS_MOVES: [(&str, i64, i64); 4] = [("N", 0, 1), ("S", 0, -1), ("E", 1, 0), ("W", -1, 0)];

impl WumpusConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |m: String| Err(ModelError::Config(m));
        if self.width == 0 || self.height == 0 {
            return bad("grid must be nonempty".into());
        }
        let inside = |c: &Cell| (1..=self.width).contains(&c.x) && (1..=self.height).contains(&c.y);
        for (name, c) in [("R1", self.r1), ("R2", self.r2), ("R3", self.r3), ("robot start", self.robot_start)] {
            if !inside(&c) {
                return bad(format!("{name} {c} is outside the grid"));
            }
        }
        if self.r1 == self.r2 || self.r2 == self.r3 || self.r1 == self.r3 {
            return bad("R1, R2 and R3 must be distinct".into());
        }
        if self.region.is_empty() {
            return bad("region must be nonempty".into());
        }
        if let Some(c) = self.region.iter().find(|c| !inside(c)) {
            return bad(format!("region cell {c} is outside the grid"));
        }
        let mut sorted = self.region.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.region.len() {
            return bad("region cells must be distinct".into());
        }
        match self.wumpus_start {
            WumpusStart::Known(w) if !self.region.contains(&w) => bad(format!("wumpus start {w} is outside the region")),
            WumpusStart::Known(w) if w == self.robot_start => bad("robot and wumpus start on the same cell".into()),
            WumpusStart::AnywhereInRegion if self.region.contains(&self.robot_start) => {
                bad("the robot must start outside the region when the wumpus may be anywhere in it".into())
            }
            _ => Ok(()),
        }
    }
}

/// A generated instance: the model with its sensors and the specification.
pub struct Wumpus {
    pub model: Model,
    pub dba: Dba,
}

/// Builds the arena, sensors and specification automaton for `config`.
pub fn build_wumpus(config: &WumpusConfig) -> Result<Wumpus, ModelError> {
    config.validate()?;
    let (w, h) = (config.width, config.height);
    let mut region = config.region.clone();
    region.sort_unstable_by_key(|c| (c.y, c.x));

    let mut pred_names = vec![TURN_PREDICATE.to_string()];
    let mut pred_hidden = vec![false];
    let mut add_preds = |prefix: &str, n: u32, hidden: bool| -> u32 {
        let first = pred_names.len() as u32;
        for i in 1..=n {
            pred_names.push(format!("{prefix}{i}"));
            pred_hidden.push(hidden);
        }
        first
    };
    let rx = add_preds("rx", w, false);
    let ry = add_preds("ry", h, false);
    let wx = add_preds("wx", w, true);
    let wy = add_preds("wy", h, true);
    let npred = pred_names.len();
    let at = |base: u32, i: u32| PredId(base + i - 1);

    let ap_names: Vec<String> = ["R1", "R2", "R3", "col"].map(String::from).to_vec();
    let mut actions = Vec::new();
    for (name, _, _) in ROBOT_MOVES {
        actions.push(crate::arena::ActionRecord { name: name.into(), owner: Player::System });
    }
    for (name, _, _) in WUMPUS_MOVES {
        actions.push(crate::arena::ActionRecord { name: name.into(), owner: Player::Environment });
    }
    let stay = ActionId::from_index(actions.len());
    actions.push(crate::arena::ActionRecord { name: "stay".into(), owner: Player::Environment });

    let mut states = Vec::new();
    let mut index: HashMap<(Cell, Cell, Player), StateId> = HashMap::new();
    for &wc in &region {
        for rc in grid(w, h) {
            for owner in [Player::System, Player::Environment] {
                let mut valuation = BitSet::new(npred);
                for p in [at(rx, rc.x), at(ry, rc.y), at(wx, wc.x), at(wy, wc.y)] {
                    valuation.set(p.index(), true);
                }
                let mut observable = BitSet::new(npred);
                for (p, hidden) in pred_hidden.iter().enumerate() {
                    observable.set(p, !hidden);
                }
                let mut label = Vec::new();
                for (i, r) in [config.r1, config.r2, config.r3].into_iter().enumerate() {
                    if rc == r {
                        label.push(PropId::from_index(i));
                    }
                }
                if rc == wc {
                    label.push(PropId(3));
                }
                let turn = if owner == Player::System { "s" } else { "e" };
                index.insert((rc, wc, owner), StateId::from_index(states.len()));
                states.push(StateRecord { name: format!("r{rc}.w{wc}.{turn}"), owner, label, valuation, observable });
            }
        }
    }

    let step = |c: Cell, dx: i64, dy: i64| -> Option<Cell> {
        let (x, y) = (c.x as i64 + dx, c.y as i64 + dy);
        (x >= 1 && y >= 1 && x <= w as i64 && y <= h as i64).then(|| Cell::new(x as u32, y as u32))
    };
    let mut transitions = Vec::new();
    for &wc in &region {
        for rc in grid(w, h) {
            let src = index[&(rc, wc, Player::System)];
            for (i, &(_, dx, dy)) in ROBOT_MOVES.iter().enumerate() {
                if let Some(next) = step(rc, dx, dy) {
                    transitions.push((src, ActionId::from_index(i), index[&(next, wc, Player::Environment)]));
                }
            }
            let src = index[&(rc, wc, Player::Environment)];
            let mut moved = false;
            for (i, &(_, dx, dy)) in WUMPUS_MOVES.iter().enumerate() {
                if let Some(next) = step(wc, dx, dy).filter(|c| config.region.contains(c)) {
                    transitions.push((src, ActionId::from_index(ROBOT_MOVES.len() + i), index[&(rc, next, Player::System)]));
                    moved = true;
                }
            }
            if config.wumpus_can_stay || !moved {
                transitions.push((src, stay, index[&(rc, wc, Player::System)]));
            }
        }
    }

    let (initial_wumpus, initial_known) = match config.wumpus_start {
        WumpusStart::Known(c) => (c, true),
        WumpusStart::AnywhereInRegion => (region[0], false),
    };
    let arena = Arena::new(ArenaParts {
        states,
        actions,
        ap_names,
        pred_names,
        pred_hidden,
        initial: Some(index[&(config.robot_start, initial_wumpus, Player::System)]),
        initial_known,
        transitions,
    })?;

    let robot_at = |c: Cell| Formula::and(vec![Formula::Var(at(rx, c.x)), Formula::Var(at(ry, c.y))]);
    let wumpus_at = |c: Cell| Formula::and(vec![Formula::Var(at(wx, c.x)), Formula::Var(at(wy, c.y))]);
    let sensors = grid(w, h)
        .map(|probe| {
            let sources: Vec<_> = region.iter().filter(|&&c| stench(config, c, probe)).map(|&c| wumpus_at(c)).collect();
            let enabled = match config.smell {
                SmellPlacement::AnyCell => Enablement::Everywhere,
                SmellPlacement::RobotNeighborhood(r) => {
                    Enablement::When(Formula::or(grid(w, h).filter(|c| c.chebyshev(probe) <= r).map(robot_at).collect()))
                }
            };
            SensingAction { name: format!("smell_{probe}"), formulas: vec![Formula::or(sources)], enabled }
        })
        .collect();

    let dba = compile_pattern(&parse_pattern(WUMPUS_SPEC)?, arena.ap_names())?;
    Ok(Wumpus { model: Model { arena, sensors }, dba })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stench_is_a_chebyshev_ball() {
        let c = WumpusConfig::default();
        let p = Cell::new(4, 4);
        assert!(stench(&c, p, p));
        assert!(stench(&c, Cell::new(3, 5), p));
        assert!(!stench(&c, Cell::new(6, 4), p));
        // Cells outside the region never hold the wumpus.
        assert!(!stench(&c, Cell::new(5, 5), Cell::new(5, 5)));
    }

    #[test]
    fn default_region_has_43_cells() {
        let c = WumpusConfig::default();
        assert_eq!(c.region.len(), 43);
        c.validate().unwrap();
    }

    #[test]
    fn state_count_and_labels() {
        let c = WumpusConfig::default();
        let wump = build_wumpus(&c).unwrap();
        let a = &wump.model.arena;
        assert_eq!(a.num_states(), 49 * 43 * 2);
        let s = a.state_id("r4_4.w4_4.e").unwrap();
        assert_eq!(a.state(s).label, vec![PropId(3)]);
        let s = a.state_id("r2_3.w4_4.s").unwrap();
        assert_eq!(a.state(s).label, vec![PropId(0)]);
        assert_eq!(wump.model.sensors.len(), 49);
        assert_eq!(wump.dba.num_states(), 5);
        // A corner robot has three moves.
        assert_eq!(a.transitions(a.state_id("r1_1.w4_4.s").unwrap()).len(), 3);
    }

    #[test]
    fn rejects_bad_configs() {
        let mut c = WumpusConfig::default();
        c.r2 = c.r1;
        assert!(c.validate().is_err());
        let c = WumpusConfig { robot_start: Cell::new(4, 4), ..WumpusConfig::default() };
        assert!(c.validate().is_err());
        let mut c = WumpusConfig::default();
        c.region.push(Cell::new(9, 9));
        assert!(c.validate().is_err());
    }
}
