//! Prolog-style concrete syntax.
//!
//! ```text
//! program  := clause*
//! clause   := head [ ":-" literal ("," literal)* ] "."
//! head     := atom | constraint | "[" constraints "]"
//! literal  := atom | constraint | "true" | "[" constraints "]"
//! atom     := pred [ "(" expr ("," expr)* ")" ]
//! constraint := expr relop expr        relop: = =< <= < >= > is =:=
//! expr     := ["+"|"-"] term (("+"|"-") term)*
//! term     := factor (("*"|"/") factor)*
//! factor   := number | Var | "(" expr ")" | "-" factor
//! ```
//!
//! `%` starts a line comment. Products must keep the expression linear.

use std::collections::{BTreeSet, HashMap};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::ast::{
    Atom, AtomicConstraint, Clause, Constraint, FreshNames, LinExpr, Program, ProgramError,
    Rational, Rel, Var, FALSE,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("{line}:{col}: syntax error: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("{line}:{col}: nonlinear term: {msg}")]
    Nonlinear { line: usize, col: usize, msg: String },
    #[error("{line}:{col}: division by zero")]
    DivisionByZero { line: usize, col: usize },
    #[error("{line}:{col}: predicate {pred} used with arity {found}, but has arity {expected}")]
    Arity {
        line: usize,
        col: usize,
        pred: String,
        expected: usize,
        found: usize,
    },
    #[error("{line}:{col}: predicate {FALSE} may only occur in clause heads")]
    FalseInBody { line: usize, col: usize },
    #[error(transparent)]
    Program(#[from] ProgramError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Var(String),
    Num(Rational),
    Neck,
    LParen,
    RParen,
    LBrack,
    RBrack,
    Comma,
    Dot,
    Plus,
    Minus,
    Star,
    Slash,
    Rel(Rel),
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) | Tok::Var(s) => format!("`{s}`"),
            Tok::Num(k) => format!("`{k}`"),
            Tok::Neck => "`:-`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBrack => "`[`".into(),
            Tok::RBrack => "`]`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Rel(r) => format!("`{}`", r.symbol()),
        }
    }
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let start = (line, col);
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '%' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let peek = |k: usize| chars.get(i + k).copied();
        let (tok, len) = if c.is_ascii_digit() {
            let mut j = i;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            let int_part: String = chars[i..j].iter().collect();
            let mut value = Rational::from_integer(int_part.parse::<BigInt>().unwrap());
            if j + 1 < chars.len() && chars[j] == '.' && chars[j + 1].is_ascii_digit() {
                let mut k = j + 1;
                while k < chars.len() && chars[k].is_ascii_digit() {
                    k += 1;
                }
                let frac: String = chars[j + 1..k].iter().collect();
                let scale = BigInt::from(10u32).pow(frac.len() as u32);
                value += Rational::new(frac.parse::<BigInt>().unwrap(), scale);
                j = k;
            }
            (Tok::Num(value), j - i)
        } else if c.is_alphabetic() || c == '_' {
            let mut j = i;
            while j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '_') {
                j += 1;
            }
            let word: String = chars[i..j].iter().collect();
            let tok = if c.is_uppercase() || c == '_' {
                Tok::Var(word)
            } else if word == "is" {
                Tok::Rel(Rel::Eq)
            } else {
                Tok::Ident(word)
            };
            (tok, j - i)
        } else {
            let (tok, n) = match (c, peek(1), peek(2)) {
                (':', Some('-'), _) => (Tok::Neck, 2),
                ('=', Some(':'), Some('=')) => (Tok::Rel(Rel::Eq), 3),
                ('=', Some('<'), _) => (Tok::Rel(Rel::Le), 2),
                ('<', Some('='), _) => (Tok::Rel(Rel::Le), 2),
                ('>', Some('='), _) => (Tok::Rel(Rel::Ge), 2),
                ('=', _, _) => (Tok::Rel(Rel::Eq), 1),
                ('<', _, _) => (Tok::Rel(Rel::Lt), 1),
                ('>', _, _) => (Tok::Rel(Rel::Gt), 1),
                ('(', _, _) => (Tok::LParen, 1),
                (')', _, _) => (Tok::RParen, 1),
                ('[', _, _) => (Tok::LBrack, 1),
                (']', _, _) => (Tok::RBrack, 1),
                (',', _, _) => (Tok::Comma, 1),
                ('.', _, _) => (Tok::Dot, 1),
                ('+', _, _) => (Tok::Plus, 1),
                ('-', _, _) => (Tok::Minus, 1),
                ('*', _, _) => (Tok::Star, 1),
                ('/', _, _) => (Tok::Slash, 1),
                _ => {
                    return Err(ParseError::Syntax {
                        line,
                        col,
                        msg: format!("unexpected character `{c}`"),
                    })
                }
            };
            (tok, n)
        };
        i += len;
        col += len;
        out.push(Spanned {
            tok,
            line: start.0,
            col: start.1,
        });
    }
    Ok(out)
}

/// Atom whose arguments may still be arbitrary linear expressions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawAtom {
    pub pred: String,
    pub args: Vec<LinExpr>,
    pub line: usize,
    pub col: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RawHead {
    Atom(RawAtom),
    /// `phi :- body` stands for `false :- not(phi), body`.
    Constraint(Vec<AtomicConstraint>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RawLiteral {
    Atom(RawAtom),
    Constraint(AtomicConstraint),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawClause {
    pub head: RawHead,
    pub body: Vec<RawLiteral>,
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    anon: usize,
    eof: (usize, usize),
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|s| &s.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .map(|s| (s.line, s.col))
            .unwrap_or(self.eof)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|s| s.tok.clone());
        self.pos += 1;
        t
    }

    fn error(&self, expected: &str) -> ParseError {
        let (line, col) = self.here();
        let found = self
            .peek()
            .map(Tok::describe)
            .unwrap_or_else(|| "end of input".into());
        ParseError::Syntax {
            line,
            col,
            msg: format!("expected {expected}, found {found}"),
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(what))
        }
    }

    fn clause(&mut self) -> Result<RawClause, ParseError> {
        let head = if self.starts_atom() {
            RawHead::Atom(self.atom()?)
        } else if self.peek() == Some(&Tok::LBrack) {
            RawHead::Constraint(self.bracket_list()?)
        } else {
            RawHead::Constraint(vec![self.constraint()?])
        };
        let mut body = Vec::new();
        if self.peek() == Some(&Tok::Neck) {
            self.pos += 1;
            loop {
                self.literal(&mut body)?;
                if self.peek() == Some(&Tok::Comma) {
                    self.pos += 1;
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::Dot, "`.` or `,`")?;
        Ok(RawClause { head, body })
    }

    fn starts_atom(&self) -> bool {
        // an identifier followed by a relation is a malformed constraint, left to the atom parser to report
        matches!(self.peek(), Some(Tok::Ident(_)))
    }

    fn literal(&mut self, out: &mut Vec<RawLiteral>) -> Result<(), ParseError> {
        match self.peek() {
            Some(Tok::Ident(w)) if w == "true" && self.peek_at(1) != Some(&Tok::LParen) => {
                self.pos += 1;
            }
            Some(Tok::Ident(_)) => out.push(RawLiteral::Atom(self.atom()?)),
            Some(Tok::LBrack) => out.extend(
                self.bracket_list()?
                    .into_iter()
                    .map(RawLiteral::Constraint),
            ),
            _ => out.push(RawLiteral::Constraint(self.constraint()?)),
        }
        Ok(())
    }

    fn bracket_list(&mut self) -> Result<Vec<AtomicConstraint>, ParseError> {
        self.expect(Tok::LBrack, "`[`")?;
        let mut cs = Vec::new();
        if self.peek() == Some(&Tok::RBrack) {
            self.pos += 1;
            return Ok(cs);
        }
        loop {
            cs.push(self.constraint()?);
            match self.bump() {
                Some(Tok::Comma) => {}
                Some(Tok::RBrack) => return Ok(cs),
                _ => {
                    self.pos -= 1;
                    return Err(self.error("`,` or `]`"));
                }
            }
        }
    }

    fn atom(&mut self) -> Result<RawAtom, ParseError> {
        let (line, col) = self.here();
        let pred = match self.bump() {
            Some(Tok::Ident(p)) => p,
            _ => {
                self.pos -= 1;
                return Err(self.error("predicate name"));
            }
        };
        let mut args = Vec::new();
        if self.peek() == Some(&Tok::LParen) {
            self.pos += 1;
            loop {
                args.push(self.expr()?);
                match self.bump() {
                    Some(Tok::Comma) => {}
                    Some(Tok::RParen) => break,
                    _ => {
                        self.pos -= 1;
                        return Err(self.error("`,` or `)`"));
                    }
                }
            }
        }
        if let Some(Tok::Rel(_)) = self.peek() {
            return Err(ParseError::Syntax {
                line,
                col,
                msg: format!("`{pred}` is not a valid operand (constants and variables only)"),
            });
        }
        Ok(RawAtom {
            pred,
            args,
            line,
            col,
        })
    }

    fn constraint(&mut self) -> Result<AtomicConstraint, ParseError> {
        let lhs = self.expr()?;
        let rel = match self.peek() {
            Some(Tok::Rel(r)) => *r,
            _ => return Err(self.error("a relation (=, =<, <, >=, >, is)")),
        };
        self.pos += 1;
        let rhs = self.expr()?;
        Ok(AtomicConstraint::compare(&lhs, rel, &rhs))
    }

    fn expr(&mut self) -> Result<LinExpr, ParseError> {
        let mut acc = match self.peek() {
            Some(Tok::Plus) => {
                self.pos += 1;
                self.term()?
            }
            _ => self.term()?,
        };
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    acc = &acc + &self.term()?;
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<LinExpr, ParseError> {
        let mut acc = self.factor()?;
        loop {
            let (line, col) = self.here();
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    let rhs = self.factor()?;
                    acc = if acc.is_constant() {
                        rhs.scale(acc.constant_term())
                    } else if rhs.is_constant() {
                        acc.scale(rhs.constant_term())
                    } else {
                        return Err(ParseError::Nonlinear {
                            line,
                            col,
                            msg: "product of two non-constant expressions".into(),
                        });
                    };
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    let rhs = self.factor()?;
                    if !rhs.is_constant() {
                        return Err(ParseError::Nonlinear {
                            line,
                            col,
                            msg: "division by a non-constant expression".into(),
                        });
                    }
                    if rhs.constant_term().is_zero() {
                        return Err(ParseError::DivisionByZero { line, col });
                    }
                    acc = acc.scale(&(Rational::one() / rhs.constant_term()));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<LinExpr, ParseError> {
        match self.bump() {
            Some(Tok::Num(k)) => Ok(LinExpr::constant(k)),
            Some(Tok::Var(name)) => {
                if name == "_" {
                    let v = Var::new(format!("_G{}", self.anon));
                    self.anon += 1;
                    Ok(LinExpr::var(v))
                } else {
                    Ok(LinExpr::var(Var::new(name)))
                }
            }
            Some(Tok::Minus) => Ok(-&self.factor()?),
            Some(Tok::LParen) => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            _ => {
                self.pos -= 1;
                Err(self.error("a number, variable or `(`"))
            }
        }
    }
}

/// Parses clauses without normalizing them.
pub fn parse_raw(text: &str) -> Result<Vec<RawClause>, ParseError> {
    let toks = lex(text)?;
    let eof = toks
        .last()
        .map(|s| (s.line, s.col + 1))
        .unwrap_or((1, 1));
    let mut parser = Parser {
        toks,
        pos: 0,
        anon: 0,
        eof,
    };
    let mut clauses = Vec::new();
    while parser.peek().is_some() {
        clauses.push(parser.clause()?);
    }
    Ok(clauses)
}

fn raw_vars(raw: &RawClause) -> BTreeSet<Var> {
    let mut vs = BTreeSet::new();
    let mut add_expr = |e: &LinExpr| vs.extend(e.vars().cloned());
    match &raw.head {
        RawHead::Atom(a) => a.args.iter().for_each(&mut add_expr),
        RawHead::Constraint(cs) => cs.iter().for_each(|c| add_expr(&c.expr)),
    }
    for lit in &raw.body {
        match lit {
            RawLiteral::Atom(a) => a.args.iter().for_each(&mut add_expr),
            RawLiteral::Constraint(c) => add_expr(&c.expr),
        }
    }
    vs
}

fn plain_var(e: &LinExpr) -> Option<Var> {
    if !e.constant_term().is_zero() || e.num_vars() != 1 {
        return None;
    }
    let (v, k) = e.terms().next()?;
    k.is_one().then(|| v.clone())
}

/// Lifts atom arguments to distinct variables, adding `V = expr` for every
/// argument that is not a fresh occurrence of a variable within the atom.
fn lift_atom(a: &RawAtom, fresh: &mut FreshNames, eqs: &mut Constraint) -> Atom {
    let mut args = Vec::with_capacity(a.args.len());
    let mut used = BTreeSet::new();
    for e in &a.args {
        match plain_var(e) {
            Some(v) if used.insert(v.clone()) => args.push(v),
            _ => {
                let v = fresh.fresh();
                eqs.push(AtomicConstraint::compare(&LinExpr::var(v.clone()), Rel::Eq, e));
                used.insert(v.clone());
                args.push(v);
            }
        }
    }
    Atom::new(a.pred.clone(), args)
}

/// Brings a raw clause into clause form; a constraint head yields one
/// integrity constraint per disjunct of its negation.
pub fn normalize_clause(raw: &RawClause) -> Vec<Clause> {
    let vars = raw_vars(raw);
    let mut fresh = FreshNames::avoiding(vars.iter());
    let mut constr = Constraint::truth();
    let head = match &raw.head {
        RawHead::Atom(a) => Some(lift_atom(a, &mut fresh, &mut constr)),
        RawHead::Constraint(_) => None,
    };
    let mut body = Vec::new();
    let mut guards = Constraint::truth();
    for lit in &raw.body {
        match lit {
            RawLiteral::Atom(a) => body.push(lift_atom(a, &mut fresh, &mut constr)),
            RawLiteral::Constraint(c) => guards.push(c.clone()),
        }
    }
    let constr = guards.and(&constr);
    match (head, &raw.head) {
        (Some(h), _) => vec![Clause::new(h, constr, body)],
        (None, RawHead::Constraint(cs)) => cs
            .iter()
            .flat_map(|c| c.negate())
            .map(|neg| {
                let mut guard = Constraint::from(vec![neg]);
                guard = guard.and(&constr);
                Clause::new(Atom::prop(FALSE), guard, body.clone())
            })
            .collect(),
        (None, RawHead::Atom(_)) => unreachable!(),
    }
}

fn check_atoms(raw: &[RawClause]) -> Result<(), ParseError> {
    let mut arities: HashMap<&str, usize> = HashMap::new();
    for rc in raw {
        let head = match &rc.head {
            RawHead::Atom(a) => Some(a),
            RawHead::Constraint(_) => None,
        };
        let body = rc.body.iter().filter_map(|l| match l {
            RawLiteral::Atom(a) => Some(a),
            RawLiteral::Constraint(_) => None,
        });
        let is_head = head.is_some();
        for (i, a) in head.into_iter().chain(body).enumerate() {
            if a.pred == FALSE && (i > 0 || !is_head) {
                return Err(ParseError::FalseInBody {
                    line: a.line,
                    col: a.col,
                });
            }
            let expected = *arities.entry(&a.pred).or_insert(a.args.len());
            if expected != a.args.len() {
                return Err(ParseError::Arity {
                    line: a.line,
                    col: a.col,
                    pred: a.pred.clone(),
                    expected,
                    found: a.args.len(),
                });
            }
        }
    }
    Ok(())
}

/// Parses and normalizes a program.
pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    let raw = parse_raw(text)?;
    check_atoms(&raw)?;
    let clauses = raw.iter().flat_map(normalize_clause).collect();
    Ok(Program::new(clauses)?)
}
