//! Propositional formulas over `x0, x1, ...`.
//!
//! Grammar (lowest to highest precedence): `|`, `&`, `!`, atoms.
//! Atoms are `xN`, `true`, `false` and parenthesized formulas.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::cantor::BitWord;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    Const(bool),
    Var(usize),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn var(i: usize) -> Self {
        Formula::Var(i)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    /// One more than the largest variable index; every index is below it.
    pub fn num_vars(&self) -> usize {
        match self {
            Formula::Const(_) => 0,
            Formula::Var(i) => i + 1,
            Formula::Not(f) => f.num_vars(),
            Formula::And(a, b) | Formula::Or(a, b) => a.num_vars().max(b.num_vars()),
        }
    }

    pub fn eval(&self, assignment: &impl Fn(usize) -> bool) -> bool {
        match self {
            Formula::Const(b) => *b,
            Formula::Var(i) => assignment(*i),
            Formula::Not(f) => !f.eval(assignment),
            Formula::And(a, b) => a.eval(assignment) && b.eval(assignment),
            Formula::Or(a, b) => a.eval(assignment) || b.eval(assignment),
        }
    }

    /// Substitutes the variables fixed by `sigma` (variable `i` gets bit `i`)
    /// and folds constants.
    pub fn restrict(&self, sigma: &BitWord) -> Formula {
        match self {
            Formula::Const(b) => Formula::Const(*b),
            Formula::Var(i) => match sigma.bits().get(*i) {
                Some(&b) => Formula::Const(b),
                None => Formula::Var(*i),
            },
            Formula::Not(f) => match f.restrict(sigma) {
                Formula::Const(b) => Formula::Const(!b),
                g => Formula::not(g),
            },
            Formula::And(a, b) => match (a.restrict(sigma), b.restrict(sigma)) {
                (Formula::Const(false), _) | (_, Formula::Const(false)) => Formula::Const(false),
                (Formula::Const(true), g) | (g, Formula::Const(true)) => g,
                (x, y) => Formula::and(x, y),
            },
            Formula::Or(a, b) => match (a.restrict(sigma), b.restrict(sigma)) {
                (Formula::Const(true), _) | (_, Formula::Const(true)) => Formula::Const(true),
                (Formula::Const(false), g) | (g, Formula::Const(false)) => g,
                (x, y) => Formula::or(x, y),
            },
        }
    }

    fn free_vars(&self, out: &mut Vec<usize>) {
        match self {
            Formula::Const(_) => {}
            Formula::Var(i) => {
                if !out.contains(i) {
                    out.push(*i);
                }
            }
            Formula::Not(f) => f.free_vars(out),
            Formula::And(a, b) | Formula::Or(a, b) => {
                a.free_vars(out);
                b.free_vars(out);
            }
        }
    }

    /// Evaluates the restricted formula on every assignment of its free
    /// variables; `want` decides whether we look for a satisfying (`true`)
    /// or falsifying (`false`) completion.
    fn some_completion(&self, sigma: &BitWord, want: bool) -> bool {
        let residual = self.restrict(sigma);
        if let Formula::Const(b) = residual {
            return b == want;
        }
        let mut vars = Vec::new();
        residual.free_vars(&mut vars);
        assert!(vars.len() < 30, "formula has too many free variables to enumerate");
        (0u64..(1u64 << vars.len())).any(|code| {
            let value = |v: usize| {
                let pos = vars.iter().position(|&x| x == v).expect("free variable");
                (code >> pos) & 1 == 1
            };
            residual.eval(&value) == want
        })
    }

    /// Some extension of `sigma` satisfies the formula.
    pub fn satisfiable_extending(&self, sigma: &BitWord) -> bool {
        self.some_completion(sigma, true)
    }

    /// Every extension of `sigma` satisfies the formula.
    pub fn valid_extending(&self, sigma: &BitWord) -> bool {
        !self.some_completion(sigma, false)
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, prec: u8) -> fmt::Result {
        match self {
            Formula::Const(b) => write!(f, "{b}"),
            Formula::Var(i) => write!(f, "x{i}"),
            Formula::Not(g) => {
                f.write_str("!")?;
                g.fmt_prec(f, 3)
            }
            Formula::And(a, b) => {
                if prec > 2 {
                    f.write_str("(")?;
                }
                a.fmt_prec(f, 2)?;
                f.write_str(" & ")?;
                b.fmt_prec(f, 3)?;
                if prec > 2 {
                    f.write_str(")")?;
                }
                Ok(())
            }
            Formula::Or(a, b) => {
                if prec > 1 {
                    f.write_str("(")?;
                }
                a.fmt_prec(f, 1)?;
                f.write_str(" | ")?;
                b.fmt_prec(f, 2)?;
                if prec > 1 {
                    f.write_str(")")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Var(usize),
    Const(bool),
    Not,
    And,
    Or,
    Open,
    Close,
}

fn tokenize(s: &str) -> Result<Vec<Tok>> {
    let chars: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' | '\n' => i += 1,
            '!' | '~' => {
                out.push(Tok::Not);
                i += 1;
            }
            '&' => {
                out.push(Tok::And);
                i += 1;
            }
            '|' => {
                out.push(Tok::Or);
                i += 1;
            }
            '(' => {
                out.push(Tok::Open);
                i += 1;
            }
            ')' => {
                out.push(Tok::Close);
                i += 1;
            }
            'x' => {
                let start = i + 1;
                let mut end = start;
                while end < chars.len() && chars[end].is_ascii_digit() {
                    end += 1;
                }
                if end == start {
                    return Err(Error::Parse(format!("variable without index in `{s}`")));
                }
                let idx: String = chars[start..end].iter().collect();
                out.push(Tok::Var(idx.parse().map_err(|_| Error::Parse(format!("bad index `{idx}`")))?));
                i = end;
            }
            _ if c.is_ascii_alphabetic() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_alphabetic() {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                match word.as_str() {
                    "true" => out.push(Tok::Const(true)),
                    "false" => out.push(Tok::Const(false)),
                    _ => return Err(Error::Parse(format!("unknown word `{word}` in formula"))),
                }
            }
            _ => return Err(Error::Parse(format!("unexpected `{c}` in formula `{s}`"))),
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn or(&mut self) -> Result<Formula> {
        let mut lhs = self.and()?;
        while self.peek() == Some(&Tok::Or) {
            self.pos += 1;
            lhs = Formula::or(lhs, self.and()?);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula> {
        let mut lhs = self.unary()?;
        while self.peek() == Some(&Tok::And) {
            self.pos += 1;
            lhs = Formula::and(lhs, self.unary()?);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula> {
        match self.next() {
            Some(Tok::Not) => Ok(Formula::not(self.unary()?)),
            Some(Tok::Var(i)) => Ok(Formula::Var(i)),
            Some(Tok::Const(b)) => Ok(Formula::Const(b)),
            Some(Tok::Open) => {
                let inner = self.or()?;
                match self.next() {
                    Some(Tok::Close) => Ok(inner),
                    _ => Err(Error::Parse("unbalanced parenthesis".into())),
                }
            }
            other => Err(Error::Parse(format!("unexpected token {other:?}"))),
        }
    }
}

impl FromStr for Formula {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut p = Parser { toks: tokenize(s)?, pos: 0 };
        let f = p.or()?;
        if p.pos != p.toks.len() {
            return Err(Error::Parse(format!("trailing input in formula `{s}`")));
        }
        Ok(f)
    }
}

impl Serialize for Formula {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Formula {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}
