//! Line-oriented model documents.
//!
//! ```text
//! ap <name>...
//! pred <name> [hidden]
//! action <name>@sys|env
//! state <id> sys|env { prop... } [pred=0|1]... [hide:pred]... [show:pred]...
//! init <id> [known]
//! trans <src> <action>@sys|env <dst>
//! sense <name> <formula> [; <formula>]... [when <formula>]
//! ```
//!
//! `#` starts a comment. Declarations may appear in any order. `action`
//! lines are optional; they pin action numbering, which the canonical
//! serializer relies on.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::{ActionRecord, Arena, ArenaParts, Player, StateRecord, TURN_PREDICATE};
use crate::bitset::BitSet;
use crate::error::ModelError;
use crate::formula::{parse_formula, Formula};
use crate::ids::{ActionId, PredId, PropId, StateId};
use crate::sensing::{Enablement, SensingAction};

/// A parsed model document: the arena plus its declared sensing actions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Model {
    pub arena: Arena,
    pub sensors: Vec<SensingAction>,
}

impl Model {
    /// Canonical relabeling of the arena, with sensor formulas following the
    /// predicate renumbering.
    pub fn canonicalize(&self) -> Model {
        let (arena, canonical) = self.arena.canonicalize();
        let remap = |f: &Formula<PredId>| f.map(|p| PredId::from_index(canonical.pred_map[p.index()]));
        let sensors = self
            .sensors
            .iter()
            .map(|s| SensingAction {
                name: s.name.clone(),
                formulas: s.formulas.iter().map(remap).collect(),
                enabled: match &s.enabled {
                    Enablement::Everywhere => Enablement::Everywhere,
                    Enablement::When(f) => Enablement::When(remap(f)),
                },
            })
            .collect();
        Model { arena, sensors }
    }
}

pub fn parse_arena(text: &str) -> Result<Arena, ModelError> {
    parse_model(text).map(|m| m.arena)
}

#[derive(Clone, Copy)]
struct Pos {
    line: usize,
    column: usize,
}

struct Token<'a> {
    text: &'a str,
    column: usize,
}

/// Splits on whitespace, treating `{`, `}` and `,` as separators while
/// keeping braces as their own tokens.
fn tokenize(line: &str) -> Vec<Token<'_>> {
    let mut tokens = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        let separator = c.is_whitespace() || matches!(c, '{' | '}' | ',');
        if separator {
            if let Some(s) = start.take() {
                tokens.push(Token { text: &line[s..i], column: s + 1 });
            }
            if c == '{' || c == '}' {
                tokens.push(Token { text: &line[i..i + 1], column: i + 1 });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        tokens.push(Token { text: &line[s..], column: s + 1 });
    }
    tokens
}

struct StateDecl {
    name: String,
    owner: Player,
    pos: Pos,
    label: Vec<(String, Pos)>,
    values: Vec<(String, bool, Pos)>,
    overrides: Vec<(String, bool, Pos)>,
}

struct TransDecl {
    src: (String, Pos),
    action: (String, Player, Pos),
    dst: (String, Pos),
}

struct SenseDecl {
    name: String,
    pos: Pos,
    formulas: Vec<(Formula<String>, Pos)>,
    when: Option<(Formula<String>, Pos)>,
}

fn parse_bool(s: &str) -> Option<bool> {
    match s {
        "1" | "true" => Some(true),
        "0" | "false" => Some(false),
        _ => None,
    }
}

fn split_action(token: &str) -> Option<(&str, Player)> {
    let (name, owner) = token.rsplit_once('@')?;
    Some((name, Player::from_keyword(owner)?)).filter(|(n, _)| !n.is_empty())
}

pub fn parse_model(text: &str) -> Result<Model, ModelError> {
    let mut aps: Vec<(String, Pos)> = Vec::new();
    let mut preds: Vec<(String, bool, Pos)> = Vec::new();
    let mut action_decls: Vec<(String, Player, Pos)> = Vec::new();
    let mut states: Vec<StateDecl> = Vec::new();
    let mut init: Option<(String, bool, Pos)> = None;
    let mut trans: Vec<TransDecl> = Vec::new();
    let mut senses: Vec<SenseDecl> = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let line = raw.split('#').next().unwrap_or("");
        let tokens = tokenize(line);
        let Some(head) = tokens.first() else { continue };
        let at = |t: &Token| Pos { line: line_no, column: t.column };
        let err = |t: &Token, msg: String| ModelError::syntax(line_no, t.column, msg);
        match head.text {
            "ap" => {
                if tokens.len() < 2 {
                    return Err(err(head, "`ap` needs at least one name".into()));
                }
                aps.extend(tokens[1..].iter().map(|t| (t.text.to_string(), at(t))));
            }
            "pred" => {
                let (name, hidden) = match tokens.as_slice() {
                    [_, n] => (n, false),
                    [_, n, h] if h.text == "hidden" => (n, true),
                    _ => return Err(err(head, "expected `pred <name> [hidden]`".into())),
                };
                preds.push((name.text.to_string(), hidden, at(name)));
            }
            "action" => {
                for t in &tokens[1..] {
                    let (name, owner) = split_action(t.text)
                        .ok_or_else(|| err(t, format!("expected `<name>@sys|env`, found `{}`", t.text)))?;
                    action_decls.push((name.to_string(), owner, at(t)));
                }
            }
            "state" => {
                if tokens.len() < 3 {
                    return Err(err(head, "expected `state <id> sys|env { props }`".into()));
                }
                let owner = Player::from_keyword(tokens[2].text)
                    .ok_or_else(|| err(&tokens[2], format!("expected `sys` or `env`, found `{}`", tokens[2].text)))?;
                let mut decl = StateDecl {
                    name: tokens[1].text.to_string(),
                    owner,
                    pos: at(&tokens[1]),
                    label: Vec::new(),
                    values: Vec::new(),
                    overrides: Vec::new(),
                };
                let mut rest = &tokens[3..];
                if let Some(open) = rest.first().filter(|t| t.text == "{") {
                    let close = rest
                        .iter()
                        .position(|t| t.text == "}")
                        .ok_or_else(|| err(open, "unclosed `{`".into()))?;
                    decl.label = rest[1..close].iter().map(|t| (t.text.to_string(), at(t))).collect();
                    rest = &rest[close + 1..];
                }
                for t in rest {
                    if let Some(p) = t.text.strip_prefix("hide:") {
                        decl.overrides.push((p.to_string(), false, at(t)));
                    } else if let Some(p) = t.text.strip_prefix("show:") {
                        decl.overrides.push((p.to_string(), true, at(t)));
                    } else if let Some((p, v)) = t.text.split_once('=') {
                        let v = parse_bool(v).ok_or_else(|| err(t, format!("bad truth value in `{}`", t.text)))?;
                        decl.values.push((p.to_string(), v, at(t)));
                    } else {
                        return Err(err(t, format!("unexpected token `{}`", t.text)));
                    }
                }
                states.push(decl);
            }
            "init" => {
                let known = match tokens.as_slice() {
                    [_, _] => false,
                    [_, _, k] if k.text == "known" => true,
                    _ => return Err(err(head, "expected `init <id> [known]`".into())),
                };
                if init.is_some() {
                    return Err(err(head, "initial state declared twice".into()));
                }
                init = Some((tokens[1].text.to_string(), known, at(&tokens[1])));
            }
            "trans" => {
                let [_, src, act, dst] = tokens.as_slice() else {
                    return Err(err(head, "expected `trans <src> <action>@sys|env <dst>`".into()));
                };
                let (name, owner) = split_action(act.text)
                    .ok_or_else(|| err(act, format!("expected `<action>@sys|env`, found `{}`", act.text)))?;
                trans.push(TransDecl {
                    src: (src.text.to_string(), at(src)),
                    action: (name.to_string(), owner, at(act)),
                    dst: (dst.text.to_string(), at(dst)),
                });
            }
            "sense" => {
                let Some(name) = tokens.get(1) else {
                    return Err(err(head, "expected `sense <name> <formula>`".into()));
                };
                let body_start = name.column - 1 + name.text.len();
                let body = &line[body_start..];
                let (queries, when) = match body.find(" when ") {
                    Some(i) => (&body[..i], Some((&body[i + 6..], body_start + i + 6))),
                    None => (body, None),
                };
                let mut formulas = Vec::new();
                let mut offset = body_start;
                for part in queries.split(';') {
                    let f = parse_formula(part)
                        .map_err(|e| ModelError::syntax(line_no, offset + e.offset + 1, e.message))?;
                    formulas.push((f, Pos { line: line_no, column: offset + 1 }));
                    offset += part.len() + 1;
                }
                let when = when
                    .map(|(text, off)| {
                        parse_formula(text)
                            .map(|f| (f, Pos { line: line_no, column: off + 1 }))
                            .map_err(|e| ModelError::syntax(line_no, off + e.offset + 1, e.message))
                    })
                    .transpose()?;
                senses.push(SenseDecl { name: name.text.to_string(), pos: at(name), formulas, when });
            }
            other => return Err(err(head, format!("unknown declaration `{other}`"))),
        }
    }

    resolve(aps, preds, action_decls, states, init, trans, senses)
}

fn undeclared(kind: &'static str, name: &str, pos: Pos) -> ModelError {
    ModelError::Syntax {
        line: pos.line,
        column: pos.column,
        message: ModelError::Undeclared { kind, name: name.to_string() }.to_string(),
    }
}

fn duplicate(kind: &'static str, name: &str, pos: Pos) -> ModelError {
    ModelError::Syntax {
        line: pos.line,
        column: pos.column,
        message: ModelError::Duplicate { kind, name: name.to_string() }.to_string(),
    }
}

fn index_names<'a>(
    kind: &'static str,
    names: impl Iterator<Item = (&'a str, Pos)>,
) -> Result<HashMap<&'a str, usize>, ModelError> {
    let mut map = HashMap::new();
    for (name, pos) in names {
        let next = map.len();
        if map.insert(name, next).is_some() {
            return Err(duplicate(kind, name, pos));
        }
    }
    Ok(map)
}

#[allow(clippy::too_many_arguments)]
fn resolve(
    aps: Vec<(String, Pos)>,
    preds: Vec<(String, bool, Pos)>,
    action_decls: Vec<(String, Player, Pos)>,
    states: Vec<StateDecl>,
    init: Option<(String, bool, Pos)>,
    trans: Vec<TransDecl>,
    senses: Vec<SenseDecl>,
) -> Result<Model, ModelError> {
    let ap_index = index_names("atomic proposition", aps.iter().map(|(n, p)| (n.as_str(), *p)))?;

    let mut pred_names = vec![TURN_PREDICATE.to_string()];
    let mut pred_hidden = vec![false];
    for (name, hidden, pos) in &preds {
        if name == TURN_PREDICATE {
            if *hidden {
                return Err(ModelError::syntax(pos.line, pos.column, "the turn predicate `t` is always observable"));
            }
            continue;
        }
        if pred_names.contains(name) {
            return Err(duplicate("predicate", name, *pos));
        }
        pred_names.push(name.clone());
        pred_hidden.push(*hidden);
    }
    let pred_index: HashMap<String, usize> = pred_names.iter().enumerate().map(|(i, n)| (n.clone(), i)).collect();
    let npred = pred_names.len();

    let state_index = index_names("state", states.iter().map(|s| (s.name.as_str(), s.pos)))?;

    let mut actions: Vec<ActionRecord> = Vec::new();
    let mut action_index: HashMap<(String, Player), usize> = HashMap::new();
    for (name, owner, pos) in &action_decls {
        if action_index.insert((name.clone(), *owner), actions.len()).is_some() {
            return Err(duplicate("action", &format!("{name}@{}", owner.keyword()), *pos));
        }
        actions.push(ActionRecord { name: name.clone(), owner: *owner });
    }

    let mut records = Vec::with_capacity(states.len());
    for decl in &states {
        let mut label = Vec::new();
        for (p, pos) in &decl.label {
            let id = ap_index.get(p.as_str()).ok_or_else(|| undeclared("atomic proposition", p, *pos))?;
            label.push(PropId::from_index(*id));
        }
        let mut valuation = BitSet::new(npred);
        let mut observable = BitSet::new(npred);
        for (i, hidden) in pred_hidden.iter().enumerate() {
            observable.set(i, !hidden);
        }
        for (p, v, pos) in &decl.values {
            let id = *pred_index.get(p.as_str()).ok_or_else(|| undeclared("predicate", p, *pos))?;
            if id == 0 && *v != (decl.owner == Player::System) {
                return Err(ModelError::syntax(pos.line, pos.column, "turn predicate contradicts the state owner"));
            }
            valuation.set(id, *v);
        }
        for (p, show, pos) in &decl.overrides {
            let id = *pred_index.get(p.as_str()).ok_or_else(|| undeclared("predicate", p, *pos))?;
            if id == 0 && !show {
                return Err(ModelError::syntax(pos.line, pos.column, "the turn predicate `t` is always observable"));
            }
            observable.set(id, *show);
        }
        records.push(StateRecord { name: decl.name.clone(), owner: decl.owner, label, valuation, observable });
    }

    let mut transitions = Vec::with_capacity(trans.len());
    for t in &trans {
        let src = *state_index.get(t.src.0.as_str()).ok_or_else(|| undeclared("state", &t.src.0, t.src.1))?;
        let dst = *state_index.get(t.dst.0.as_str()).ok_or_else(|| undeclared("state", &t.dst.0, t.dst.1))?;
        let key = (t.action.0.clone(), t.action.1);
        let action = *action_index.entry(key).or_insert_with(|| {
            actions.push(ActionRecord { name: t.action.0.clone(), owner: t.action.1 });
            actions.len() - 1
        });
        transitions.push((StateId::from_index(src), ActionId::from_index(action), StateId::from_index(dst)));
    }

    let (init_name, initial_known, init_pos) = init.ok_or(ModelError::MissingInitial)?;
    let initial = *state_index.get(init_name.as_str()).ok_or_else(|| undeclared("state", &init_name, init_pos))?;

    let arena = Arena::new(ArenaParts {
        states: records,
        actions,
        ap_names: aps.into_iter().map(|(n, _)| n).collect(),
        pred_names,
        pred_hidden,
        initial: Some(StateId::from_index(initial)),
        initial_known,
        transitions,
    })?;

    let mut sensors = Vec::new();
    index_names("sensing action", senses.iter().map(|s| (s.name.as_str(), s.pos)))?;
    for s in senses {
        let resolve_formula = |f: &Formula<String>, pos: Pos| {
            f.try_map(&mut |name: &String| {
                pred_index.get(name.as_str()).map(|&i| PredId::from_index(i)).ok_or_else(|| undeclared("predicate", name, pos))
            })
        };
        let formulas = s
            .formulas
            .iter()
            .map(|(f, pos)| resolve_formula(f, *pos))
            .collect::<Result<Vec<_>, _>>()?;
        let enabled = match &s.when {
            Some((f, pos)) => Enablement::When(resolve_formula(f, *pos)?),
            None => Enablement::Everywhere,
        };
        sensors.push(SensingAction { name: s.name, formulas, enabled });
    }

    Ok(Model { arena, sensors })
}

/// Emits the canonical document for `model`: every table sorted by name,
/// transitions sorted by source and action, and only true predicate values
/// listed. `parse_model(serialize_model(m))` equals `m.canonicalize()`.
pub fn serialize_model(model: &Model) -> String {
    let model = model.canonicalize();
    let a = &model.arena;
    let mut out = String::new();
    if !a.ap_names().is_empty() {
        let _ = writeln!(out, "ap {}", a.ap_names().join(" "));
    }
    for (i, name) in a.pred_names().iter().enumerate().skip(1) {
        let hidden = if a.pred_hidden_by_default(PredId::from_index(i)) { " hidden" } else { "" };
        let _ = writeln!(out, "pred {name}{hidden}");
    }
    for action in a.actions() {
        let _ = writeln!(out, "action {}", action.qualified());
    }
    for s in a.states() {
        let label: Vec<&str> = s.label.iter().map(|p| a.ap_names()[p.index()].as_str()).collect();
        let _ = write!(out, "state {} {} {{{}}}", s.name, s.owner.keyword(), label.join(" "));
        for (i, name) in a.pred_names().iter().enumerate().skip(1) {
            if s.valuation.get(i) {
                let _ = write!(out, " {name}=1");
            }
        }
        for (i, name) in a.pred_names().iter().enumerate().skip(1) {
            let default_visible = !a.pred_hidden_by_default(PredId::from_index(i));
            match (default_visible, s.observable.get(i)) {
                (true, false) => {
                    let _ = write!(out, " hide:{name}");
                }
                (false, true) => {
                    let _ = write!(out, " show:{name}");
                }
                _ => {}
            }
        }
        out.push('\n');
    }
    let known = if a.initial_known() { " known" } else { "" };
    let _ = writeln!(out, "init {}{known}", a.state(a.initial()).name);
    for (i, s) in a.states().iter().enumerate() {
        for &(act, dst) in a.transitions(StateId::from_index(i)) {
            let _ = writeln!(out, "trans {} {} {}", s.name, a.action(act).qualified(), a.state(dst).name);
        }
    }
    let pred_name = |p: &PredId| a.pred_names()[p.index()].clone();
    for s in &model.sensors {
        let formulas: Vec<String> = s.formulas.iter().map(|f| f.display(pred_name).to_string()).collect();
        let _ = write!(out, "sense {} {}", s.name, formulas.join("; "));
        if let Enablement::When(f) = &s.enabled {
            let _ = write!(out, " when {}", f.display(pred_name));
        }
        out.push('\n');
    }
    out
}
