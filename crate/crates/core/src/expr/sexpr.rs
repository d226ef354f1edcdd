use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use super::{ExprTree, NodeLabel, Op, OperatorSet};

pub(super) fn write_sexpr(t: &ExprTree, f: &mut impl fmt::Write) -> fmt::Result {
    if t.is_leaf() {
        return write!(f, "{}", t.label());
    }
    write!(f, "({}", t.label())?;
    for c in t.children() {
        f.write_char(' ')?;
        write_sexpr(c, f)?;
    }
    f.write_char(')')
}

/// Prefix s-expression, e.g. `(+ (sqrt (- c z2)) (* z1 c))`.
pub fn format_sexpr(t: &ExprTree) -> String {
    let mut s = String::new();
    write_sexpr(t, &mut s).expect("writing to a String cannot fail");
    s
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    UnexpectedEnd,
    UnexpectedToken(String),
    UnknownSymbol(String),
    /// Operator known but not part of the operator set.
    OperatorNotAllowed(String),
    VariableOutOfRange(usize),
    ConstantsNotAllowed,
    ArityMismatch { symbol: String, expected: usize, found: usize },
    TrailingInput,
}

/// Parse failure with the byte offset where it was detected.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub position: usize,
    pub kind: ParseErrorKind,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at byte {}: ", self.position)?;
        match &self.kind {
            ParseErrorKind::UnexpectedEnd => f.write_str("unexpected end of input"),
            ParseErrorKind::UnexpectedToken(t) => write!(f, "unexpected token `{t}`"),
            ParseErrorKind::UnknownSymbol(s) => write!(f, "unknown symbol `{s}`"),
            ParseErrorKind::OperatorNotAllowed(s) => write!(f, "operator `{s}` is not in the operator set"),
            ParseErrorKind::VariableOutOfRange(i) => write!(f, "variable z{i} is out of range"),
            ParseErrorKind::ConstantsNotAllowed => f.write_str("constants are not allowed"),
            ParseErrorKind::ArityMismatch { symbol, expected, found } => {
                write!(f, "`{symbol}` takes {expected} argument(s), found {found}")
            }
            ParseErrorKind::TrailingInput => f.write_str("trailing input after expression"),
        }
    }
}

impl core::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq)]
enum Token<'a> {
    Open,
    Close,
    Atom(&'a str),
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn skip_ws(&mut self) {
        let rest = &self.src[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn peek(&mut self) -> Option<(usize, Token<'a>)> {
        self.skip_ws();
        let rest = &self.src[self.pos..];
        let ch = rest.chars().next()?;
        Some(match ch {
            '(' => (self.pos, Token::Open),
            ')' => (self.pos, Token::Close),
            _ => {
                let end = rest
                    .find(|c: char| c.is_whitespace() || c == '(' || c == ')')
                    .unwrap_or(rest.len());
                (self.pos, Token::Atom(&rest[..end]))
            }
        })
    }

    fn next(&mut self) -> Option<(usize, Token<'a>)> {
        let (pos, tok) = self.peek()?;
        self.pos += match tok {
            Token::Open | Token::Close => 1,
            Token::Atom(a) => a.len(),
        };
        Some((pos, tok))
    }
}

/// Parses the text produced by [`format_sexpr`], validating symbols and arities
/// against `ops`.
pub fn parse_sexpr(text: &str, ops: &OperatorSet) -> Result<ExprTree, ParseError> {
    let mut lx = Lexer { src: text, pos: 0 };
    let tree = parse_expr(&mut lx, ops)?;
    if let Some((pos, _)) = lx.peek() {
        return Err(ParseError { position: pos, kind: ParseErrorKind::TrailingInput });
    }
    Ok(tree)
}

fn parse_expr(lx: &mut Lexer<'_>, ops: &OperatorSet) -> Result<ExprTree, ParseError> {
    let end = lx.src.len();
    match lx.next() {
        None => Err(ParseError { position: end, kind: ParseErrorKind::UnexpectedEnd }),
        Some((pos, Token::Close)) => Err(ParseError {
            position: pos,
            kind: ParseErrorKind::UnexpectedToken(")".to_string()),
        }),
        Some((pos, Token::Atom(a))) => {
            let label = parse_label(a, pos, ops)?;
            if label.arity() != 0 {
                return Err(ParseError {
                    position: pos,
                    kind: ParseErrorKind::ArityMismatch { symbol: a.to_string(), expected: label.arity(), found: 0 },
                });
            }
            Ok(ExprTree::node(label, Vec::new()))
        }
        Some((_, Token::Open)) => {
            let (pos, head) = match lx.next() {
                Some((pos, Token::Atom(a))) => (pos, a),
                Some((pos, tok)) => {
                    let t = if tok == Token::Open { "(" } else { ")" };
                    return Err(ParseError { position: pos, kind: ParseErrorKind::UnexpectedToken(t.to_string()) });
                }
                None => return Err(ParseError { position: end, kind: ParseErrorKind::UnexpectedEnd }),
            };
            let label = parse_label(head, pos, ops)?;
            let mut children = Vec::new();
            loop {
                match lx.peek() {
                    None => return Err(ParseError { position: end, kind: ParseErrorKind::UnexpectedEnd }),
                    Some((_, Token::Close)) => {
                        lx.next();
                        break;
                    }
                    Some(_) => children.push(parse_expr(lx, ops)?),
                }
            }
            if children.len() != label.arity() {
                return Err(ParseError {
                    position: pos,
                    kind: ParseErrorKind::ArityMismatch {
                        symbol: head.to_string(),
                        expected: label.arity(),
                        found: children.len(),
                    },
                });
            }
            Ok(ExprTree::node(label, children))
        }
    }
}

fn parse_label(atom: &str, pos: usize, ops: &OperatorSet) -> Result<NodeLabel, ParseError> {
    let err = |kind| Err(ParseError { position: pos, kind });
    if atom == "c" {
        if !ops.constants_allowed() {
            return err(ParseErrorKind::ConstantsNotAllowed);
        }
        return Ok(NodeLabel::Const);
    }
    if let Some(op) = Op::from_symbol(atom) {
        if !ops.contains(op) {
            return err(ParseErrorKind::OperatorNotAllowed(atom.to_string()));
        }
        return Ok(NodeLabel::Op(op));
    }
    if let Some(idx) = atom.strip_prefix('z').and_then(|d| d.parse::<usize>().ok()) {
        if idx == 0 || idx > ops.n_vars() || idx > u16::MAX as usize {
            return err(ParseErrorKind::VariableOutOfRange(idx));
        }
        return Ok(NodeLabel::Var(idx as u16));
    }
    err(ParseErrorKind::UnknownSymbol(atom.to_string()))
}

/// Serialized as the s-expression string; any operator and variable index
/// is accepted when reading.
impl serde::Serialize for ExprTree {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for ExprTree {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        parse_sexpr(&text, &OperatorSet::full(u16::MAX as usize)).map_err(serde::de::Error::custom)
    }
}
