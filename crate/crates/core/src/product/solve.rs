use serde::{Deserialize, Serialize};

use super::ProductGame;
use crate::arena::{Arena, Player};
use crate::ids::{ActionId, QId};

/// Solution of the complete-information Büchi game.
///
/// `win` is the system's winning region, partitioned into ranks `W_0..W_m`.
/// `W_0` is the accepting core `F ∩ Win_1`; a state of rank `i > 0` was
/// added to the attractor of `W_0` in round `i`, so the system can force a
/// strictly lower rank in one move and every environment move lowers it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolveResult {
    win: Vec<bool>,
    rank: Vec<Option<u32>>,
    strategy: Vec<Option<ActionId>>,
    max_rank: u32,
}

impl SolveResult {
    pub fn is_winning(&self, q: QId) -> bool {
        self.win[q.index()]
    }

    pub fn winning_states(&self) -> impl Iterator<Item = QId> + '_ {
        self.win.iter().enumerate().filter(|(_, &w)| w).map(|(i, _)| QId::from_index(i))
    }

    pub fn num_winning(&self) -> usize {
        self.win.iter().filter(|&&w| w).count()
    }

    /// Rank of `q`; defined exactly on the winning region.
    pub fn rank(&self, q: QId) -> Option<u32> {
        self.rank[q.index()]
    }

    /// The sure-winning strategy `WS`; defined exactly on winning system states.
    pub fn strategy(&self, q: QId) -> Option<ActionId> {
        self.strategy[q.index()]
    }

    /// Largest rank `m`. Zero when the winning region is empty.
    pub fn max_rank(&self) -> u32 {
        self.max_rank
    }
}

/// Player-1 attractor of `target`, restricted to states where `allowed`
/// holds. Returns the attractor layer of each reached state (0 on
/// `target`); layer `i` holds the states added in round `i`.
fn attractor_layers(
    game: &ProductGame,
    pred: &[Vec<QId>],
    target: &[bool],
    allowed: &[bool],
) -> Vec<Option<u32>> {
    let n = game.num_states();
    let mut layer: Vec<Option<u32>> = vec![None; n];
    // Environment states need every move inside the attractor.
    let mut missing: Vec<usize> = game.states().map(|q| game.transitions(q).len()).collect();
    let mut frontier: Vec<QId> = game.states().filter(|q| target[q.index()] && allowed[q.index()]).collect();
    for q in &frontier {
        layer[q.index()] = Some(0);
    }
    let mut round = 0;
    while !frontier.is_empty() {
        round += 1;
        let mut next = Vec::new();
        for &q in &frontier {
            for &p in &pred[q.index()] {
                if layer[p.index()].is_some() || !allowed[p.index()] {
                    continue;
                }
                match game.owner(p) {
                    Player::System => {
                        layer[p.index()] = Some(round);
                        next.push(p);
                    }
                    Player::Environment => {
                        // A state can reach q under several actions.
                        let hits = game.transitions(p).iter().filter(|&&(_, t)| t == q).count();
                        missing[p.index()] -= hits;
                        if missing[p.index()] == 0 {
                            layer[p.index()] = Some(round);
                            next.push(p);
                        }
                    }
                }
            }
        }
        frontier = next;
    }
    layer
}

/// Can the system keep the play inside `set` for one more move from `q`?
fn controllable_predecessor(game: &ProductGame, set: &[bool], q: QId) -> bool {
    let mut succ = game.transitions(q).iter().map(|&(_, t)| set[t.index()]);
    match game.owner(q) {
        Player::System => succ.any(|x| x),
        Player::Environment => succ.all(|x| x),
    }
}

/// Solves the Büchi game by the nested fixpoint
/// `Win = νZ. Attr₁(F ∩ CPre₁(Z))`, then ranks the winning region by
/// attractor layers towards `W_0 = F ∩ Win` and extracts `WS`, breaking
/// ties by the lowest action id.
pub fn solve_buchi(game: &ProductGame) -> SolveResult {
    let n = game.num_states();
    let pred = game.predecessors();
    let everywhere = vec![true; n];
    let mut z = vec![true; n];
    loop {
        let core: Vec<bool> = game
            .states()
            .map(|q| z[q.index()] && game.is_accepting(q) && controllable_predecessor(game, &z, q))
            .collect();
        let layers = attractor_layers(game, &pred, &core, &everywhere);
        let next: Vec<bool> = layers.iter().map(Option::is_some).collect();
        if next == z {
            break;
        }
        z = next;
    }

    let w0: Vec<bool> = game.states().map(|q| z[q.index()] && game.is_accepting(q)).collect();
    let rank = attractor_layers(game, &pred, &w0, &everywhere);
    debug_assert!(rank.iter().zip(&z).all(|(r, &w)| r.is_some() == w));

    let strategy = game
        .states()
        .map(|q| {
            let r = rank[q.index()]?;
            if game.owner(q) != Player::System {
                return None;
            }
            game.transitions(q)
                .iter()
                .find(|&&(_, t)| match rank[t.index()] {
                    Some(rt) => r == 0 || rt < r,
                    None => false,
                })
                .map(|&(a, _)| a)
        })
        .collect();
    let max_rank = rank.iter().flatten().copied().max().unwrap_or(0);
    SolveResult { win: z, rank, strategy, max_rank }
}

/// `allow(q)`: enabled system actions whose successor is winning. Empty for
/// states outside the winning region.
pub fn allow(result: &SolveResult, game: &ProductGame, q: QId) -> Vec<ActionId> {
    if !result.is_winning(q) {
        return Vec::new();
    }
    game.transitions(q)
        .iter()
        .filter(|&&(_, t)| result.is_winning(t))
        .map(|&(a, _)| a)
        .collect()
}

/// Machine-readable solution document.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolutionExport {
    pub states: usize,
    pub winning: usize,
    pub max_rank: u32,
    pub initial: String,
    pub initial_winning: bool,
    pub rows: Vec<SolutionRow>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolutionRow {
    pub state: String,
    pub owner: Player,
    pub accepting: bool,
    pub rank: Option<u32>,
    pub action: Option<String>,
}

impl SolutionExport {
    pub fn new(arena: &Arena, game: &ProductGame, result: &SolveResult) -> Self {
        let rows = game
            .states()
            .map(|q| SolutionRow {
                state: game.name(q).to_string(),
                owner: game.owner(q),
                accepting: game.is_accepting(q),
                rank: result.rank(q),
                action: result.strategy(q).map(|a| arena.action(a).qualified()),
            })
            .collect();
        SolutionExport {
            states: game.num_states(),
            winning: result.num_winning(),
            max_rank: result.max_rank(),
            initial: game.name(game.initial()).to_string(),
            initial_winning: result.is_winning(game.initial()),
            rows,
        }
    }
}
