//! Deterministic Büchi automata over sets of atomic propositions.
//!
//! Specifications come either as a formula of the supported fragment,
//!
//! ```text
//! spec     := conjunct ('&' conjunct)*
//! conjunct := 'G' '!' prop | 'GF' prop | 'GF' 'seq(' prop (',' prop)* ')'
//! ```
//!
//! which [`compile_pattern`] turns into an automaton, or as an explicit
//! automaton document:
//!
//! ```text
//! dba-state <name> [init] [accept]
//! dba-edge <src> <dst> <guard>
//! ```

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::error::ModelError;
use crate::formula::{parse_formula, Formula};
use crate::ids::{AutStateId, PropId};

/// Largest number of distinct propositions a single state's guards may
/// mention; completeness is checked by enumerating their valuations.
const MAX_GUARD_VARIABLES: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dba {
    names: Vec<String>,
    initial: AutStateId,
    accepting: Vec<bool>,
    /// Ordered guarded edges per state.
    edges: Vec<Vec<(Formula<PropId>, AutStateId)>>,
    ap_names: Vec<String>,
}

/// Whether a sorted label contains `p`.
#[inline]
fn letter_has(letter: &[PropId], p: PropId) -> bool {
    letter.binary_search(&p).is_ok()
}

impl Dba {
    /// Builds an automaton and checks that every state's guards are mutually
    /// exclusive and exhaustive.
    pub fn new(
        names: Vec<String>,
        initial: AutStateId,
        accepting: Vec<bool>,
        edges: Vec<Vec<(Formula<PropId>, AutStateId)>>,
        ap_names: Vec<String>,
    ) -> Result<Self, ModelError> {
        let dba = Dba { names, initial, accepting, edges, ap_names };
        dba.validate()?;
        Ok(dba)
    }

    fn validate(&self) -> Result<(), ModelError> {
        let n = self.names.len();
        if n == 0 || self.initial.index() >= n || self.accepting.len() != n || self.edges.len() != n {
            return Err(ModelError::Config("malformed automaton tables".into()));
        }
        for (h, edges) in self.edges.iter().enumerate() {
            let fail = |message: String| ModelError::Automaton { state: self.names[h].clone(), message };
            let mut vars = BTreeSet::new();
            for (guard, target) in edges {
                if target.index() >= n {
                    return Err(fail(format!("edge to undeclared state #{}", target.0)));
                }
                guard.map(|&p| vars.insert(p));
            }
            if vars.iter().any(|p| p.index() >= self.ap_names.len()) {
                return Err(fail("guard mentions an undeclared proposition".into()));
            }
            if vars.len() > MAX_GUARD_VARIABLES {
                return Err(fail(format!("guards mention more than {MAX_GUARD_VARIABLES} propositions")));
            }
            let vars: Vec<PropId> = vars.into_iter().collect();
            for bits in 0u64..(1 << vars.len()) {
                let letter: Vec<PropId> =
                    vars.iter().enumerate().filter(|(i, _)| bits & (1 << i) != 0).map(|(_, &p)| p).collect();
                let matches = edges.iter().filter(|(g, _)| g.eval(&|&p| letter_has(&letter, p))).count();
                if matches != 1 {
                    let names: Vec<&str> = letter.iter().map(|p| self.ap_names[p.index()].as_str()).collect();
                    let what = if matches == 0 { "no guard matches" } else { "several guards match" };
                    return Err(fail(format!("{what} the letter {{{}}}", names.join(", "))));
                }
            }
        }
        Ok(())
    }

    pub fn num_states(&self) -> usize {
        self.names.len()
    }

    pub fn initial(&self) -> AutStateId {
        self.initial
    }

    pub fn is_accepting(&self, h: AutStateId) -> bool {
        self.accepting[h.index()]
    }

    pub fn name(&self, h: AutStateId) -> &str {
        &self.names[h.index()]
    }

    pub fn ap_names(&self) -> &[String] {
        &self.ap_names
    }

    pub fn edges(&self, h: AutStateId) -> &[(Formula<PropId>, AutStateId)] {
        &self.edges[h.index()]
    }

    /// The unique successor of `h` on `letter` (a sorted set of propositions).
    pub fn step(&self, h: AutStateId, letter: &[PropId]) -> Result<AutStateId, ModelError> {
        let mut found = None;
        for (guard, target) in &self.edges[h.index()] {
            if guard.eval(&|&p| letter_has(letter, p)) {
                if found.is_some() {
                    return Err(ModelError::Automaton {
                        state: self.name(h).to_string(),
                        message: "several guards match".into(),
                    });
                }
                found = Some(*target);
            }
        }
        found.ok_or_else(|| ModelError::Automaton { state: self.name(h).to_string(), message: "no guard matches".into() })
    }

    /// Whether the run on `prefix · cycle^ω` visits an accepting state
    /// infinitely often.
    pub fn accepts_lasso(&self, prefix: &[Vec<PropId>], cycle: &[Vec<PropId>]) -> Result<bool, ModelError> {
        assert!(!cycle.is_empty(), "lasso cycle must be nonempty");
        let mut h = self.initial;
        for letter in prefix {
            h = self.step(h, letter)?;
        }
        // Run the cycle until a (state, position) pair repeats; the states
        // visited since its first occurrence recur forever.
        let mut first_seen: HashMap<(AutStateId, usize), usize> = HashMap::new();
        let mut visited = Vec::new();
        let mut pos = 0;
        loop {
            if let Some(&start) = first_seen.get(&(h, pos)) {
                return Ok(visited[start..].iter().any(|&v| self.is_accepting(v)));
            }
            first_seen.insert((h, pos), visited.len());
            h = self.step(h, &cycle[pos])?;
            visited.push(h);
            pos = (pos + 1) % cycle.len();
        }
    }

    /// Explicit-automaton document for this automaton.
    pub fn to_document(&self) -> String {
        let mut out = String::new();
        for (i, name) in self.names.iter().enumerate() {
            let init = if i == self.initial.index() { " init" } else { "" };
            let acc = if self.accepting[i] { " accept" } else { "" };
            out.push_str(&format!("dba-state {name}{init}{acc}\n"));
        }
        for (i, edges) in self.edges.iter().enumerate() {
            for (guard, target) in edges {
                let g = guard.display(|p: &PropId| self.ap_names[p.index()].clone());
                out.push_str(&format!("dba-edge {} {} {}\n", self.names[i], self.names[target.index()], g));
            }
        }
        out
    }
}

/// Free function form of [`Dba::step`].
pub fn dba_step(d: &Dba, h: AutStateId, letter: &[PropId]) -> Result<AutStateId, ModelError> {
    d.step(h, letter)
}

/// A formula of the supported fragment: safety conjuncts `G !bad` and
/// (ordered) recurrence conjuncts `GF seq(p1, ..., pk)`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct SpecPattern {
    pub safety: Vec<String>,
    pub recurrence: Vec<Vec<String>>,
}

impl fmt::Display for SpecPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        for seq in &self.recurrence {
            parts.push(match seq.as_slice() {
                [p] => format!("GF {p}"),
                _ => format!("GF seq({})", seq.join(", ")),
            });
        }
        parts.extend(self.safety.iter().map(|b| format!("G !{b}")));
        f.write_str(&parts.join(" & "))
    }
}

pub fn parse_pattern(text: &str) -> Result<SpecPattern, ModelError> {
    let mut p = PatternParser { chars: text.char_indices().peekable(), text, line: 1, line_start: 0 };
    let mut spec = SpecPattern::default();
    loop {
        p.conjunct(&mut spec)?;
        p.skip_ws();
        match p.chars.peek() {
            None => break,
            Some(&(_, '&')) => {
                p.chars.next();
            }
            Some(&(i, c)) => return Err(p.error(i, format!("expected `&`, found `{c}`"))),
        }
    }
    Ok(spec)
}

struct PatternParser<'a> {
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
    text: &'a str,
    line: usize,
    line_start: usize,
}

impl PatternParser<'_> {
    fn error(&self, offset: usize, message: String) -> ModelError {
        ModelError::syntax(self.line, offset - self.line_start + 1, message)
    }

    fn end(&self) -> usize {
        self.text.len()
    }

    fn skip_ws(&mut self) {
        while let Some(&(i, c)) = self.chars.peek() {
            if c == '#' {
                while self.chars.peek().is_some_and(|&(_, c)| c != '\n') {
                    self.chars.next();
                }
            } else if c.is_whitespace() {
                if c == '\n' {
                    self.line += 1;
                    self.line_start = i + 1;
                }
                self.chars.next();
            } else {
                break;
            }
        }
    }

    fn word(&mut self) -> (usize, String) {
        self.skip_ws();
        let end = self.end();
        let start = self.chars.peek().map_or(end, |&(i, _)| i);
        let mut s = String::new();
        while let Some(&(_, c)) = self.chars.peek() {
            if crate::formula::is_ident_char(c) {
                s.push(c);
                self.chars.next();
            } else {
                break;
            }
        }
        (start, s)
    }

    fn expect(&mut self, want: char) -> Result<(), ModelError> {
        self.skip_ws();
        match self.chars.peek() {
            Some(&(_, c)) if c == want => {
                self.chars.next();
                Ok(())
            }
            Some(&(i, c)) => Err(self.error(i, format!("expected `{want}`, found `{c}`"))),
            None => Err(self.error(self.end(), format!("expected `{want}`, found end of input"))),
        }
    }

    fn prop(&mut self) -> Result<String, ModelError> {
        let (at, name) = self.word();
        if name.is_empty() {
            return Err(self.error(at, "expected a proposition".into()));
        }
        Ok(name)
    }

    fn conjunct(&mut self, spec: &mut SpecPattern) -> Result<(), ModelError> {
        let (at, op) = self.word();
        match op.as_str() {
            "G" => {
                self.expect('!')?;
                spec.safety.push(self.prop()?);
            }
            "GF" => {
                self.skip_ws();
                let save = self.chars.clone();
                let (_, w) = self.word();
                self.skip_ws();
                if w == "seq" && self.chars.peek().is_some_and(|&(_, c)| c == '(') {
                    self.chars.next();
                    let mut seq = vec![self.prop()?];
                    loop {
                        self.skip_ws();
                        match self.chars.next() {
                            Some((_, ',')) => seq.push(self.prop()?),
                            Some((_, ')')) => break,
                            Some((i, c)) => return Err(self.error(i, format!("expected `,` or `)`, found `{c}`"))),
                            None => return Err(self.error(self.end(), "unclosed `seq(`".into())),
                        }
                    }
                    spec.recurrence.push(seq);
                } else {
                    self.chars = save;
                    spec.recurrence.push(vec![self.prop()?]);
                }
            }
            "" => return Err(self.error(at, "expected `G` or `GF`".into())),
            other => return Err(self.error(at, format!("expected `G` or `GF`, found `{other}`"))),
        }
        Ok(())
    }
}

/// Compiles a fragment formula into an automaton over `ap_names`.
///
/// All recurrence conjuncts are chained into one milestone sequence
/// `m_0 .. m_{k-1}`; the automaton waits for the milestones in order,
/// consuming as many as each letter satisfies, and passes through the
/// accepting `done` state every time the sequence completes. `done` then
/// behaves like `wait0`. Any letter containing a safety-violating
/// proposition leads to an absorbing rejecting `sink`.
///
/// State count: `k + 1` waiting/done states, plus the sink when safety
/// conjuncts are present; a pure safety formula yields `live` and `sink`.
pub fn compile_pattern(pattern: &SpecPattern, ap_names: &[String]) -> Result<Dba, ModelError> {
    let resolve = |name: &String| {
        ap_names
            .iter()
            .position(|a| a == name)
            .map(PropId::from_index)
            .ok_or_else(|| ModelError::Undeclared { kind: "atomic proposition", name: name.clone() })
    };
    if pattern.safety.is_empty() && pattern.recurrence.is_empty() {
        return Err(ModelError::Config("empty specification".into()));
    }
    let bad: Vec<PropId> = pattern.safety.iter().map(resolve).collect::<Result<_, _>>()?;
    let milestones: Vec<PropId> = pattern.recurrence.iter().flatten().map(resolve).collect::<Result<_, _>>()?;
    let k = milestones.len();

    let violation = Formula::or(bad.iter().map(|&p| Formula::Var(p)).collect());
    let safe = |mut conds: Vec<Formula<PropId>>| {
        if !bad.is_empty() {
            conds.insert(0, Formula::negate(violation.clone()));
        }
        Formula::and(conds)
    };

    let mut names = Vec::new();
    let mut accepting = Vec::new();
    let mut edges = Vec::new();
    if k == 0 {
        names.extend(["live".to_string(), "sink".to_string()]);
        accepting.extend([true, false]);
        edges.push(vec![(violation.clone(), AutStateId(1)), (safe(vec![]), AutStateId(0))]);
        edges.push(vec![(Formula::True, AutStateId(1))]);
    } else {
        let done = AutStateId::from_index(k);
        let sink = AutStateId::from_index(k + 1);
        names.extend((0..k).map(|j| format!("wait{j}")));
        names.push("done".into());
        accepting.extend(std::iter::repeat_n(false, k));
        accepting.push(true);
        // `done` waits for the first milestone, like `wait0`.
        for j in (0..k).chain([0]) {
            let mut out = Vec::new();
            if !bad.is_empty() {
                out.push((violation.clone(), sink));
            }
            for m in 0..=(k - j) {
                let mut conds: Vec<Formula<PropId>> = milestones[j..j + m].iter().map(|&p| Formula::Var(p)).collect();
                let target = if j + m == k {
                    done
                } else {
                    conds.push(Formula::negate(Formula::Var(milestones[j + m])));
                    AutStateId::from_index(j + m)
                };
                out.push((safe(conds), target));
            }
            edges.push(out);
        }
        if !bad.is_empty() {
            names.push("sink".into());
            accepting.push(false);
            edges.push(vec![(Formula::True, sink)]);
        }
    }
    Dba::new(names, AutStateId(0), accepting, edges, ap_names.to_vec())
}

/// Reads a specification document: either an explicit automaton (any line
/// starting with `dba-`) or a fragment formula.
pub fn parse_spec_document(text: &str, ap_names: &[String]) -> Result<Dba, ModelError> {
    let explicit = text.lines().any(|l| l.trim_start().starts_with("dba-"));
    if !explicit {
        return compile_pattern(&parse_pattern(text)?, ap_names);
    }
    let mut names: Vec<String> = Vec::new();
    let mut initial = None;
    let mut accepting = Vec::new();
    let mut raw_edges: Vec<(usize, String, String, String, usize)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("");
        let trimmed = line.trim_start();
        if trimmed.is_empty() {
            continue;
        }
        let indent = line.len() - trimmed.len();
        let mut words = trimmed.split_whitespace();
        match words.next() {
            Some("dba-state") => {
                let name = words
                    .next()
                    .ok_or_else(|| ModelError::syntax(line_no, indent + 1, "expected `dba-state <name>`"))?;
                if names.iter().any(|n| n == name) {
                    return Err(ModelError::Duplicate { kind: "automaton state", name: name.into() });
                }
                let mut acc = false;
                for flag in words {
                    match flag {
                        "init" if initial.is_none() => initial = Some(AutStateId::from_index(names.len())),
                        "init" => return Err(ModelError::syntax(line_no, indent + 1, "initial state declared twice")),
                        "accept" => acc = true,
                        other => {
                            return Err(ModelError::syntax(line_no, indent + 1, format!("unknown flag `{other}`")))
                        }
                    }
                }
                names.push(name.to_string());
                accepting.push(acc);
            }
            Some("dba-edge") => {
                let (Some(src), Some(dst)) = (words.next(), words.next()) else {
                    return Err(ModelError::syntax(line_no, indent + 1, "expected `dba-edge <src> <dst> <guard>`"));
                };
                // Offset just past the third word.
                let guard_at = dst.as_ptr() as usize - trimmed.as_ptr() as usize + dst.len();
                let guard = trimmed[guard_at..].to_string();
                raw_edges.push((line_no, src.into(), dst.into(), guard, indent + guard_at));
            }
            Some(other) => {
                return Err(ModelError::syntax(line_no, indent + 1, format!("unknown declaration `{other}`")))
            }
            None => {}
        }
    }
    let initial = initial.ok_or(ModelError::MissingInitial)?;
    let mut edges = vec![Vec::new(); names.len()];
    let lookup = |n: &str| {
        names
            .iter()
            .position(|m| m == n)
            .ok_or_else(|| ModelError::Undeclared { kind: "automaton state", name: n.into() })
    };
    for (line_no, src, dst, guard, col) in raw_edges {
        let s = lookup(&src)?;
        let d = lookup(&dst)?;
        let g = parse_formula(&guard).map_err(|e| ModelError::syntax(line_no, col + e.offset + 1, e.message))?;
        let g = g.try_map(&mut |name: &String| {
            ap_names
                .iter()
                .position(|a| a == name)
                .map(PropId::from_index)
                .ok_or_else(|| ModelError::Undeclared { kind: "atomic proposition", name: name.clone() })
        })?;
        edges[s].push((g, AutStateId::from_index(d)));
    }
    Dba::new(names, initial, accepting, edges, ap_names.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn aps(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    fn letter(props: &[u32]) -> Vec<PropId> {
        props.iter().map(|&p| PropId(p)).collect()
    }

    #[test]
    fn recurrence_of_one_proposition() {
        let d = compile_pattern(&parse_pattern("GF p").unwrap(), &aps(&["p"])).unwrap();
        assert_eq!(d.num_states(), 2);
        assert_eq!(d.step(d.initial(), &letter(&[0])).map(|h| d.is_accepting(h)), Ok(true));
        assert_eq!(d.step(d.initial(), &letter(&[])).map(|h| d.is_accepting(h)), Ok(false));
        assert!(d.accepts_lasso(&[], &[letter(&[0])]).unwrap());
        assert!(!d.accepts_lasso(&[], &[letter(&[])]).unwrap());
        assert!(d.accepts_lasso(&[letter(&[])], &[letter(&[]), letter(&[0])]).unwrap());
    }

    #[test]
    fn pure_safety() {
        let d = compile_pattern(&parse_pattern("G !bad").unwrap(), &aps(&["bad"])).unwrap();
        assert_eq!(d.num_states(), 2);
        assert!(d.is_accepting(AutStateId(0)) && !d.is_accepting(AutStateId(1)));
        let sink = d.step(d.initial(), &letter(&[0])).unwrap();
        assert_eq!(sink, AutStateId(1));
        assert_eq!(d.step(sink, &letter(&[])), Ok(sink));
        assert!(d.accepts_lasso(&[], &[letter(&[])]).unwrap());
        assert!(!d.accepts_lasso(&[letter(&[0])], &[letter(&[])]).unwrap());
    }

    #[test]
    fn ordered_recurrence_with_safety() {
        let ap = aps(&["R1", "R2", "R3", "col"]);
        let p = parse_pattern("GF seq(R1, R2, R3) & G !col").unwrap();
        assert_eq!(p.recurrence, vec![aps(&["R1", "R2", "R3"])]);
        assert_eq!(p.safety, aps(&["col"]));
        let d = compile_pattern(&p, &ap).unwrap();
        // wait0..wait2, done, sink
        assert_eq!(d.num_states(), 5);
        let wait0 = d.initial();
        let wait1 = d.step(wait0, &letter(&[0])).unwrap();
        assert_eq!(d.name(wait1), "wait1");
        assert_eq!(d.name(d.step(wait1, &letter(&[1])).unwrap()), "wait2");
        assert_eq!(d.name(d.step(wait1, &letter(&[3])).unwrap()), "sink");
        assert_eq!(d.name(d.step(wait1, &letter(&[0])).unwrap()), "wait1");
        let cycle = [&[0][..], &[], &[1], &[], &[2], &[]].map(letter);
        assert!(d.accepts_lasso(&[], &cycle).unwrap());
        let skips_r2 = [&[0][..], &[2]].map(letter);
        assert!(!d.accepts_lasso(&[], &skips_r2).unwrap());
    }

    #[test]
    fn sink_absorbs() {
        let d = compile_pattern(&parse_pattern("GF a & G !b").unwrap(), &aps(&["a", "b"])).unwrap();
        let sink = d.step(d.initial(), &letter(&[1])).unwrap();
        for l in [letter(&[]), letter(&[0]), letter(&[0, 1])] {
            assert_eq!(d.step(sink, &l), Ok(sink));
        }
    }

    #[test]
    fn unresolved_proposition() {
        let err = compile_pattern(&parse_pattern("GF nope").unwrap(), &aps(&["p"])).unwrap_err();
        assert_eq!(err, ModelError::Undeclared { kind: "atomic proposition", name: "nope".into() });
    }

    #[test]
    fn pattern_syntax_errors() {
        assert!(matches!(parse_pattern("GF seq(a, b"), Err(ModelError::Syntax { .. })));
        assert!(matches!(parse_pattern("F a"), Err(ModelError::Syntax { line: 1, column: 1, .. })));
        assert!(matches!(parse_pattern("GF a &\n G bad"), Err(ModelError::Syntax { line: 2, column: 4, .. })));
        let p = parse_pattern("GF a & GF seq(b,c) & G !d # comment").unwrap();
        assert_eq!(parse_pattern(&p.to_string()).unwrap(), p);
    }

    #[test]
    fn explicit_documents() {
        let ap = aps(&["p"]);
        let doc = "dba-state a init\ndba-state b accept\ndba-edge a b p\ndba-edge a a !p\ndba-edge b b p\ndba-edge b a !p\n";
        let d = parse_spec_document(doc, &ap).unwrap();
        assert!(d.accepts_lasso(&[], &[letter(&[0])]).unwrap());
        let round = parse_spec_document(&d.to_document(), &ap).unwrap();
        assert_eq!(round, d);
        let incomplete = "dba-state a init\ndba-edge a a p\n";
        assert!(matches!(parse_spec_document(incomplete, &ap), Err(ModelError::Automaton { .. })));
        let overlapping = "dba-state a init\ndba-edge a a p\ndba-edge a a true\n";
        let err = parse_spec_document(overlapping, &ap).unwrap_err();
        assert!(err.to_string().contains("several guards"));
    }
}
