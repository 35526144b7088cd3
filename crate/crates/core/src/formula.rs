//! Propositional formulas over an arbitrary variable type.
//!
//! Automaton guards are formulas over atomic propositions, sensing queries
//! are formulas over predicates. Both share this representation and the
//! textual syntax
//!
//! ```text
//! or    := and ('|' and)*
//! and   := unary ('&' unary)*
//! unary := '!' unary | '(' or ')' | 'true' | 'false' | ident
//! ```

use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula<V> {
    True,
    False,
    Var(V),
    Not(Box<Formula<V>>),
    And(Vec<Formula<V>>),
    Or(Vec<Formula<V>>),
}

impl<V> Formula<V> {
    pub fn negate(f: Formula<V>) -> Self {
        Formula::Not(Box::new(f))
    }

    /// Conjunction that flattens trivial cases.
    pub fn and(mut parts: Vec<Formula<V>>) -> Self {
        match parts.len() {
            0 => Formula::True,
            1 => parts.pop().unwrap(),
            _ => Formula::And(parts),
        }
    }

    /// Disjunction that flattens trivial cases.
    pub fn or(mut parts: Vec<Formula<V>>) -> Self {
        match parts.len() {
            0 => Formula::False,
            1 => parts.pop().unwrap(),
            _ => Formula::Or(parts),
        }
    }

    pub fn eval(&self, value: &impl Fn(&V) -> bool) -> bool {
        match self {
            Formula::True => true,
            Formula::False => false,
            Formula::Var(v) => value(v),
            Formula::Not(f) => !f.eval(value),
            Formula::And(fs) => fs.iter().all(|f| f.eval(value)),
            Formula::Or(fs) => fs.iter().any(|f| f.eval(value)),
        }
    }

    pub fn try_map<W, E>(&self, f: &mut impl FnMut(&V) -> Result<W, E>) -> Result<Formula<W>, E> {
        Ok(match self {
            Formula::True => Formula::True,
            Formula::False => Formula::False,
            Formula::Var(v) => Formula::Var(f(v)?),
            Formula::Not(g) => Formula::Not(Box::new(g.try_map(f)?)),
            Formula::And(gs) => Formula::And(gs.iter().map(|g| g.try_map(f)).collect::<Result<_, _>>()?),
            Formula::Or(gs) => Formula::Or(gs.iter().map(|g| g.try_map(f)).collect::<Result<_, _>>()?),
        })
    }

    pub fn map<W>(&self, mut f: impl FnMut(&V) -> W) -> Formula<W> {
        self.try_map(&mut |v| Ok::<_, std::convert::Infallible>(f(v)))
            .unwrap_or_else(|e| match e {})
    }

    /// Renders the formula with `name` supplying variable text.
    pub fn display<'a, N>(&'a self, name: N) -> impl fmt::Display + 'a
    where
        N: Fn(&V) -> String + 'a,
    {
        Rendered { formula: self, name }
    }
}

struct Rendered<'a, V, N> {
    formula: &'a Formula<V>,
    name: N,
}

impl<V, N: Fn(&V) -> String> Rendered<'_, V, N> {
    fn write(&self, f: &mut fmt::Formatter<'_>, formula: &Formula<V>, nested: bool) -> fmt::Result {
        match formula {
            Formula::True => f.write_str("true"),
            Formula::False => f.write_str("false"),
            Formula::Var(v) => f.write_str(&(self.name)(v)),
            Formula::Not(g) => {
                f.write_str("!")?;
                self.write(f, g, true)
            }
            Formula::And(gs) | Formula::Or(gs) => {
                let op = if matches!(formula, Formula::And(_)) { " & " } else { " | " };
                if nested {
                    f.write_str("(")?;
                }
                for (i, g) in gs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(op)?;
                    }
                    self.write(f, g, true)?;
                }
                if nested {
                    f.write_str(")")?;
                }
                Ok(())
            }
        }
    }
}

impl<V, N: Fn(&V) -> String> fmt::Display for Rendered<'_, V, N> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(f, self.formula, false)
    }
}

impl fmt::Display for Formula<String> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.display(|v: &String| v.clone()).fmt(f)
    }
}

/// A parse failure at a byte offset of the input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormulaSyntaxError {
    pub offset: usize,
    pub message: String,
}

pub(crate) fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '.' | '-')
}

pub fn parse_formula(text: &str) -> Result<Formula<String>, FormulaSyntaxError> {
    let mut parser = Parser { text, pos: 0 };
    let f = parser.or()?;
    parser.skip_ws();
    if parser.pos != text.len() {
        return Err(parser.error("unexpected trailing input"));
    }
    Ok(f)
}

struct Parser<'a> {
    text: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, message: &str) -> FormulaSyntaxError {
        FormulaSyntaxError { offset: self.pos, message: message.to_string() }
    }

    fn skip_ws(&mut self) {
        let rest = &self.text[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.text[self.pos..].starts_with(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn or(&mut self) -> Result<Formula<String>, FormulaSyntaxError> {
        let mut parts = vec![self.and()?];
        while self.eat('|') {
            parts.push(self.and()?);
        }
        Ok(Formula::or(parts))
    }

    fn and(&mut self) -> Result<Formula<String>, FormulaSyntaxError> {
        let mut parts = vec![self.unary()?];
        while self.eat('&') {
            parts.push(self.unary()?);
        }
        Ok(Formula::and(parts))
    }

    fn unary(&mut self) -> Result<Formula<String>, FormulaSyntaxError> {
        if self.eat('!') {
            return Ok(Formula::negate(self.unary()?));
        }
        if self.eat('(') {
            let f = self.or()?;
            if !self.eat(')') {
                return Err(self.error("expected `)`"));
            }
            return Ok(f);
        }
        self.skip_ws();
        let rest = &self.text[self.pos..];
        let len = rest.find(|c: char| !is_ident_char(c)).unwrap_or(rest.len());
        if len == 0 {
            return Err(self.error("expected a name, `!`, or `(`"));
        }
        self.pos += len;
        Ok(match &rest[..len] {
            "true" => Formula::True,
            "false" => Formula::False,
            name => Formula::Var(name.to_string()),
        })
    }
}
