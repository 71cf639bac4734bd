//! Lexer and recursive-descent parser for the rule language.
//!
//! ```text
//! Q18_tmp(o_key, sum(qty) as t_sum_qty) :- Lineitem@2.
//! R(c_name, c_key, o_key, o_date, sum(qty) as total_qty) :-
//!     Customers, Orders, Lineitem@1, Q18_tmp, t_sum_qty > 300.
//! ```
//!
//! The parser only checks syntax; name resolution happens in
//! [`crate::ir::Program::parse`].

use std::str::FromStr;

use rust_decimal::Decimal;

use super::ast::{AggFn, CmpOp, HeadColumn, Operand, Predicate};
use crate::error::{Error, Result};
use crate::value::{is_iso_date, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub column: usize,
}

impl Pos {
    pub fn error(self, message: impl Into<String>) -> Error {
        Error::Syntax {
            line: self.line,
            column: self.column,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(String),
    Str(String),
    Date(String),
    LParen,
    RParen,
    Comma,
    Dot,
    Turnstile,
    At,
    Op(CmpOp),
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Number(s) => format!("number `{s}`"),
            Tok::Str(s) => format!("string '{s}'"),
            Tok::Date(s) => format!("date '{s}'"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Turnstile => "`:-`".into(),
            Tok::At => "`@`".into(),
            Tok::Op(op) => format!("`{}`", op.symbol()),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    pos: Pos,
}

fn lex(text: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    macro_rules! bump {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, column: col };
        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '%' {
            while i < chars.len() && chars[i] != '\n' {
                bump!();
            }
            continue;
        }
        let single = match c {
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ',' => Some(Tok::Comma),
            '.' => Some(Tok::Dot),
            '@' => Some(Tok::At),
            '=' => Some(Tok::Op(CmpOp::Eq)),
            '≤' => Some(Tok::Op(CmpOp::Le)),
            '≥' => Some(Tok::Op(CmpOp::Ge)),
            '≠' => Some(Tok::Op(CmpOp::Ne)),
            _ => None,
        };
        if let Some(tok) = single {
            bump!();
            out.push(Token { tok, pos });
            continue;
        }
        let next = chars.get(i + 1).copied();
        match c {
            ':' if next == Some('-') => {
                bump!();
                bump!();
                out.push(Token { tok: Tok::Turnstile, pos });
            }
            '<' | '>' | '!' => {
                let tok = match (c, next) {
                    ('<', Some('=')) => Tok::Op(CmpOp::Le),
                    ('<', Some('>')) => Tok::Op(CmpOp::Ne),
                    ('>', Some('=')) => Tok::Op(CmpOp::Ge),
                    ('!', Some('=')) => Tok::Op(CmpOp::Ne),
                    ('<', _) => Tok::Op(CmpOp::Lt),
                    ('>', _) => Tok::Op(CmpOp::Gt),
                    _ => return Err(pos.error("expected `!=`")),
                };
                let two = matches!(next, Some('=') | Some('>')) && !(c == '>' && next == Some('>'));
                bump!();
                if two {
                    bump!();
                }
                out.push(Token { tok, pos });
            }
            '\'' => {
                bump!();
                let s = lex_string(&chars, &mut i, &mut line, &mut col, pos)?;
                out.push(Token { tok: Tok::Str(s), pos });
            }
            '-' | '0'..='9' => {
                let mut s = String::new();
                if c == '-' {
                    if !next.is_some_and(|d| d.is_ascii_digit()) {
                        return Err(pos.error("unexpected `-`"));
                    }
                    s.push('-');
                    bump!();
                }
                while i < chars.len() && chars[i].is_ascii_digit() {
                    s.push(chars[i]);
                    bump!();
                }
                if i + 1 < chars.len() && chars[i] == '.' && chars[i + 1].is_ascii_digit() {
                    s.push('.');
                    bump!();
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        s.push(chars[i]);
                        bump!();
                    }
                }
                out.push(Token { tok: Tok::Number(s), pos });
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut s = String::new();
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    s.push(chars[i]);
                    bump!();
                }
                if s.eq_ignore_ascii_case("date") && i < chars.len() && chars[i] == '\'' {
                    bump!();
                    let d = lex_string(&chars, &mut i, &mut line, &mut col, pos)?;
                    if !is_iso_date(&d) {
                        return Err(pos.error(format!("`{d}` is not an ISO-8601 date")));
                    }
                    out.push(Token { tok: Tok::Date(d), pos });
                } else {
                    out.push(Token { tok: Tok::Ident(s), pos });
                }
            }
            other => return Err(pos.error(format!("unexpected character `{other}`"))),
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        pos: Pos { line, column: col },
    });
    Ok(out)
}

fn lex_string(
    chars: &[char],
    i: &mut usize,
    line: &mut usize,
    col: &mut usize,
    start: Pos,
) -> Result<String> {
    let mut s = String::new();
    loop {
        let Some(&c) = chars.get(*i) else {
            return Err(start.error("unterminated string literal"));
        };
        *i += 1;
        if c == '\n' {
            *line += 1;
            *col = 1;
        } else {
            *col += 1;
        }
        if c == '\'' {
            if chars.get(*i) == Some(&'\'') {
                *i += 1;
                *col += 1;
                s.push('\'');
                continue;
            }
            return Ok(s);
        }
        s.push(c);
    }
}

#[derive(Debug, Clone)]
pub(crate) struct RawAtom {
    pub relation: String,
    pub alias: Option<String>,
    pub listed: Vec<(String, String)>,
    pub pos: Pos,
}

#[derive(Debug, Clone)]
pub(crate) struct RawRule {
    pub head: String,
    pub pos: Pos,
    pub head_columns: Vec<HeadColumn>,
    pub atoms: Vec<RawAtom>,
    pub predicates: Vec<(Predicate, Pos)>,
}

struct Parser {
    toks: Vec<Token>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.at]
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.at + 1).min(self.toks.len() - 1)].tok
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<Pos> {
        let t = self.next();
        if t.tok == want {
            Ok(t.pos)
        } else {
            Err(t
                .pos
                .error(format!("expected {}, found {}", want.describe(), t.tok.describe())))
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, Pos)> {
        let t = self.next();
        match t.tok {
            Tok::Ident(s) => Ok((s, t.pos)),
            other => Err(t
                .pos
                .error(format!("expected {what}, found {}", other.describe()))),
        }
    }

    fn keyword_as(&mut self) -> bool {
        if matches!(&self.peek().tok, Tok::Ident(s) if s.eq_ignore_ascii_case("as")) {
            self.next();
            true
        } else {
            false
        }
    }

    fn rule(&mut self) -> Result<RawRule> {
        let (head, pos) = self.ident("a rule head")?;
        self.expect(Tok::LParen)?;
        let mut head_columns = vec![self.head_column()?];
        while self.peek().tok == Tok::Comma {
            self.next();
            head_columns.push(self.head_column()?);
        }
        self.expect(Tok::RParen)?;
        self.expect(Tok::Turnstile)?;
        let mut rule = RawRule {
            head,
            pos,
            head_columns,
            atoms: Vec::new(),
            predicates: Vec::new(),
        };
        loop {
            self.item(&mut rule)?;
            let t = self.next();
            match t.tok {
                Tok::Comma => continue,
                Tok::Dot => break,
                other => {
                    return Err(t.pos.error(format!(
                        "expected `,` or `.`, found {}",
                        other.describe()
                    )))
                }
            }
        }
        Ok(rule)
    }

    fn head_column(&mut self) -> Result<HeadColumn> {
        let (name, pos) = self.ident("a head column")?;
        if self.peek().tok != Tok::LParen {
            return Ok(HeadColumn::Plain(name));
        }
        let func = AggFn::parse(&name)
            .ok_or_else(|| pos.error(format!("unknown aggregate `{name}`")))?;
        self.next();
        let (input, _) = self.ident("an aggregate argument")?;
        self.expect(Tok::RParen)?;
        if !self.keyword_as() {
            let t = self.peek();
            return Err(t.pos.error("aggregate needs `as <name>`"));
        }
        let (output, _) = self.ident("an output name")?;
        Ok(HeadColumn::Aggregate {
            func,
            input,
            output,
        })
    }

    fn item(&mut self, rule: &mut RawRule) -> Result<()> {
        let starts_pred = match &self.peek().tok {
            Tok::Ident(_) => matches!(self.peek2(), Tok::Op(_)),
            Tok::Number(_) | Tok::Str(_) | Tok::Date(_) => true,
            _ => false,
        };
        if starts_pred {
            let pos = self.peek().pos;
            let left = self.operand()?;
            let t = self.next();
            let Tok::Op(op) = t.tok else {
                return Err(t.pos.error(format!(
                    "expected a comparison operator, found {}",
                    t.tok.describe()
                )));
            };
            let right = self.operand()?;
            if left.attr().is_none() && right.attr().is_none() {
                return Err(pos.error("a predicate needs at least one attribute"));
            }
            rule.predicates.push((Predicate { left, op, right }, pos));
            return Ok(());
        }
        let (relation, pos) = self.ident("an atom or predicate")?;
        let mut alias = None;
        if self.peek().tok == Tok::At {
            self.next();
            let t = self.next();
            alias = Some(match t.tok {
                Tok::Ident(s) | Tok::Number(s) if !s.starts_with('-') && !s.contains('.') => s,
                other => {
                    return Err(t
                        .pos
                        .error(format!("expected an alias, found {}", other.describe())))
                }
            });
        }
        let mut listed = Vec::new();
        if self.peek().tok == Tok::LParen {
            self.next();
            loop {
                let (src, _) = self.ident("a column name")?;
                let exposed = if self.keyword_as() {
                    self.ident("a column name")?.0
                } else {
                    src.clone()
                };
                listed.push((src, exposed));
                let t = self.next();
                match t.tok {
                    Tok::Comma => continue,
                    Tok::RParen => break,
                    other => {
                        return Err(t.pos.error(format!(
                            "expected `,` or `)`, found {}",
                            other.describe()
                        )))
                    }
                }
            }
        }
        rule.atoms.push(RawAtom {
            relation,
            alias,
            listed,
            pos,
        });
        Ok(())
    }

    fn operand(&mut self) -> Result<Operand> {
        let t = self.next();
        Ok(match t.tok {
            Tok::Ident(s) => Operand::Attr(s),
            Tok::Str(s) => Operand::Const(Value::Text(s)),
            Tok::Date(s) => Operand::Const(Value::Date(s)),
            Tok::Number(s) => {
                if s.contains('.') {
                    let d = Decimal::from_str(&s)
                        .map_err(|_| t.pos.error(format!("bad decimal `{s}`")))?;
                    Operand::Const(Value::Decimal(d))
                } else {
                    let n = s
                        .parse::<i64>()
                        .map_err(|_| t.pos.error(format!("integer `{s}` out of range")))?;
                    Operand::Const(Value::Int(n))
                }
            }
            other => {
                return Err(t
                    .pos
                    .error(format!("expected an operand, found {}", other.describe())))
            }
        })
    }
}

pub(crate) fn parse_rules(text: &str) -> Result<Vec<RawRule>> {
    let mut p = Parser {
        toks: lex(text)?,
        at: 0,
    };
    let mut rules = Vec::new();
    while p.peek().tok != Tok::Eof {
        rules.push(p.rule()?);
    }
    Ok(rules)
}
