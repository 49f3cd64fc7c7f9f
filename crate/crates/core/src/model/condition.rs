//! Propositional context conditions.
//!
//! Text grammar (keywords are lowercase, labels are case-sensitive):
//!
//! ```text
//! expr   := term ('or' term)*
//! term   := factor ('and' factor)*
//! factor := 'not' factor | '(' expr ')' | LABEL | 'true'
//! ```
//!
//! [`Display`](std::fmt::Display) prints the canonical form. Parsing the
//! canonical form yields a structurally identical condition as long as no
//! `And`/`Or` node has a single child; [`Condition::all`] and
//! [`Condition::any`] collapse singletons.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

/// Expression tree over context labels.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Condition {
    True,
    Atom(String),
    Not(Box<Condition>),
    And(Vec<Condition>),
    Or(Vec<Condition>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("condition syntax error at column {column}: {message}")]
pub struct ConditionParseError {
    /// 1-based character column within the expression text.
    pub column: usize,
    pub message: String,
}

impl Condition {
    pub fn atom(name: impl Into<String>) -> Self {
        Condition::Atom(name.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(inner: Condition) -> Self {
        Condition::Not(Box::new(inner))
    }

    /// Conjunction; an empty list is `True` and a single item is returned as is.
    pub fn all(mut items: Vec<Condition>) -> Self {
        match items.len() {
            0 => Condition::True,
            1 => items.pop().unwrap(),
            _ => Condition::And(items),
        }
    }

    /// Disjunction; a single item is returned as is. An empty list is kept
    /// as an empty `Or`, which validation reports.
    pub fn any(mut items: Vec<Condition>) -> Self {
        match items.len() {
            1 => items.pop().unwrap(),
            _ => Condition::Or(items),
        }
    }

    pub fn is_true(&self) -> bool {
        matches!(self, Condition::True)
    }

    /// Every label referenced by an atom, in sorted order.
    pub fn atoms(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            Condition::True => {}
            Condition::Atom(name) => {
                out.insert(name.as_str());
            }
            Condition::Not(inner) => inner.collect_atoms(out),
            Condition::And(items) | Condition::Or(items) => {
                for item in items {
                    item.collect_atoms(out);
                }
            }
        }
    }

    /// Visits every `And`/`Or` node; used by validation to find empty connectives.
    pub(crate) fn connective_arities(&self, out: &mut Vec<(&'static str, usize)>) {
        match self {
            Condition::True | Condition::Atom(_) => {}
            Condition::Not(inner) => inner.connective_arities(out),
            Condition::And(items) => {
                out.push(("and", items.len()));
                items.iter().for_each(|c| c.connective_arities(out));
            }
            Condition::Or(items) => {
                out.push(("or", items.len()));
                items.iter().for_each(|c| c.connective_arities(out));
            }
        }
    }

    pub fn parse(text: &str) -> Result<Condition, ConditionParseError> {
        let tokens = tokenize(text)?;
        let mut parser = Parser { tokens, pos: 0, len: text.chars().count() };
        if parser.tokens.is_empty() {
            return Err(ConditionParseError { column: 1, message: "empty condition".into() });
        }
        let expr = parser.expr()?;
        if let Some(tok) = parser.peek() {
            return Err(ConditionParseError {
                column: tok.column,
                message: format!("unexpected {}", tok.kind.describe()),
            });
        }
        Ok(expr)
    }

    fn precedence(&self) -> u8 {
        match self {
            Condition::Or(_) => 0,
            Condition::And(_) => 1,
            _ => 2,
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Condition::True => f.write_str("true"),
            Condition::Atom(name) => f.write_str(name),
            Condition::Not(inner) => {
                if inner.precedence() < 2 {
                    write!(f, "not ({inner})")
                } else {
                    write!(f, "not {inner}")
                }
            }
            Condition::And(items) | Condition::Or(items) => {
                let own = self.precedence();
                let sep = if own == 0 { " or " } else { " and " };
                if items.len() < 2 {
                    // Not reachable through the parser; keep the output parseable.
                    f.write_str("(")?;
                }
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(sep)?;
                    }
                    // Same-kind children are parenthesised so nesting survives a round trip.
                    if item.precedence() <= own {
                        write!(f, "({item})")?;
                    } else {
                        write!(f, "{item}")?;
                    }
                }
                if items.len() < 2 {
                    f.write_str(")")?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum TokenKind {
    Ident(String),
    And,
    Or,
    Not,
    True,
    Open,
    Close,
}

impl TokenKind {
    fn describe(&self) -> String {
        match self {
            TokenKind::Ident(s) => format!("label `{s}`"),
            TokenKind::And => "`and`".into(),
            TokenKind::Or => "`or`".into(),
            TokenKind::Not => "`not`".into(),
            TokenKind::True => "`true`".into(),
            TokenKind::Open => "`(`".into(),
            TokenKind::Close => "`)`".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    kind: TokenKind,
    column: usize,
}

fn tokenize(text: &str) -> Result<Vec<Token>, ConditionParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let column = i + 1;
        if c.is_whitespace() {
            i += 1;
        } else if c == '(' {
            tokens.push(Token { kind: TokenKind::Open, column });
            i += 1;
        } else if c == ')' {
            tokens.push(Token { kind: TokenKind::Close, column });
            i += 1;
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            let kind = match word.as_str() {
                "and" => TokenKind::And,
                "or" => TokenKind::Or,
                "not" => TokenKind::Not,
                "true" => TokenKind::True,
                _ => TokenKind::Ident(word),
            };
            tokens.push(Token { kind, column });
        } else {
            return Err(ConditionParseError { column, message: format!("unexpected character {c:?}") });
        }
    }
    Ok(tokens)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    len: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn eat(&mut self, kind: &TokenKind) -> bool {
        if self.peek().is_some_and(|t| &t.kind == kind) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Condition, ConditionParseError> {
        let mut items = vec![self.term()?];
        while self.eat(&TokenKind::Or) {
            items.push(self.term()?);
        }
        Ok(Condition::any(items))
    }

    fn term(&mut self) -> Result<Condition, ConditionParseError> {
        let mut items = vec![self.factor()?];
        while self.eat(&TokenKind::And) {
            items.push(self.factor()?);
        }
        Ok(Condition::all(items))
    }

    fn factor(&mut self) -> Result<Condition, ConditionParseError> {
        let Some(tok) = self.peek().cloned() else {
            return Err(ConditionParseError {
                column: self.len + 1,
                message: "unexpected end of condition".into(),
            });
        };
        self.pos += 1;
        match tok.kind {
            TokenKind::Not => Ok(Condition::not(self.factor()?)),
            TokenKind::Open => {
                let inner = self.expr()?;
                if !self.eat(&TokenKind::Close) {
                    let column = self.peek().map_or(self.len + 1, |t| t.column);
                    return Err(ConditionParseError {
                        column,
                        message: format!("expected `)` to close `(` at column {}", tok.column),
                    });
                }
                Ok(inner)
            }
            TokenKind::Ident(name) => Ok(Condition::Atom(name)),
            TokenKind::True => Ok(Condition::True),
            other => Err(ConditionParseError {
                column: tok.column,
                message: format!("unexpected {}", other.describe()),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(n: &str) -> Condition {
        Condition::atom(n)
    }

    #[test]
    fn precedence_and_binds_tighter_than_or() {
        let c = Condition::parse("C1 or C2 and not C3").unwrap();
        assert_eq!(c, Condition::Or(vec![a("C1"), Condition::And(vec![a("C2"), Condition::not(a("C3"))])]));
    }

    #[test]
    fn chained_negated_conjunction() {
        let c = Condition::parse("not C2 and not C5 and C10").unwrap();
        assert_eq!(c, Condition::And(vec![Condition::not(a("C2")), Condition::not(a("C5")), a("C10")]));
        assert_eq!(c.to_string(), "not C2 and not C5 and C10");
    }

    #[test]
    fn nested_same_kind_survives_round_trip() {
        let c = Condition::And(vec![Condition::And(vec![a("A"), a("B")]), a("C")]);
        let text = c.to_string();
        assert_eq!(text, "(A and B) and C");
        assert_eq!(Condition::parse(&text).unwrap(), c);

        let c = Condition::not(Condition::Or(vec![a("A"), Condition::not(Condition::True)]));
        assert_eq!(Condition::parse(&c.to_string()).unwrap(), c);
    }

    #[test]
    fn errors_carry_columns() {
        let e = Condition::parse("").unwrap_err();
        assert_eq!(e.column, 1);
        let e = Condition::parse("C1 and").unwrap_err();
        assert_eq!(e.column, 7);
        let e = Condition::parse("(C1 or C2").unwrap_err();
        assert!(e.message.contains("expected `)`"));
        let e = Condition::parse("C1 C2").unwrap_err();
        assert_eq!(e.column, 4);
        let e = Condition::parse("C1 & C2").unwrap_err();
        assert_eq!(e.column, 4);
        assert!(Condition::parse("and").is_err());
        assert!(Condition::parse("_x").is_err());
    }

    #[test]
    fn atoms_are_collected() {
        let c = Condition::parse("(B or not A) and (A or true)").unwrap();
        assert_eq!(c.atoms().into_iter().collect::<Vec<_>>(), vec!["A", "B"]);
    }
}
