//! Text rendering of programs and constrained facts.
//!
//! Two styles exist. Program text (`new3(A,B) :- A=<99, new4(A,B).`) is
//! re-parseable into a structurally identical program. Constrained facts
//! (`p(A,B) :- [1*A>=0,-1*A>= -50,1*B=50]`) use the bracketed listing format
//! of model and threshold dumps.

use std::fmt::Write;

use num_traits::{One, Signed, Zero};

use crate::ast::{Atom, AtomicConstraint, Clause, Constraint, LinExpr, Program, Rational};

pub fn rational_to_string(k: &Rational) -> String {
    if k.is_integer() {
        k.numer().to_string()
    } else {
        format!("{}/{}", k.numer(), k.denom())
    }
}

/// Number printed after an operator: negatives get a separating space.
fn operand(k: &Rational) -> String {
    if k.is_negative() {
        format!(" {}", rational_to_string(k))
    } else {
        rational_to_string(k)
    }
}

fn linear_part(e: &LinExpr) -> String {
    let mut out = String::new();
    for (i, (v, k)) in e.terms().enumerate() {
        let mag = k.abs();
        if i == 0 {
            if k.is_negative() {
                out.push('-');
            }
        } else {
            out.push(if k.is_negative() { '-' } else { '+' });
        }
        if !mag.is_one() {
            let _ = write!(out, "{}*", rational_to_string(&mag));
        }
        let _ = write!(out, "{v}");
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

/// Linear part and constant of an expression, as `lhs rel rhs` with `rhs = -constant`.
pub fn expr_to_string(e: &LinExpr) -> String {
    let k = e.constant_term();
    if k.is_zero() {
        linear_part(e)
    } else if e.is_constant() {
        rational_to_string(k)
    } else if k.is_negative() {
        format!("{}-{}", linear_part(e), rational_to_string(&k.abs()))
    } else {
        format!("{}+{}", linear_part(e), rational_to_string(k))
    }
}

pub fn atomic_to_string(a: &AtomicConstraint) -> String {
    format!(
        "{}{}{}",
        linear_part(&a.expr),
        a.rel.symbol(),
        operand(&-a.expr.constant_term())
    )
}

/// Coefficient-explicit rendering, e.g. `1*A+ -1*B=0`.
pub fn fact_atomic_to_string(a: &AtomicConstraint) -> String {
    let mut out = String::new();
    for (i, (v, k)) in a.expr.terms().enumerate() {
        if i == 0 {
            out.push_str(&rational_to_string(k));
        } else {
            out.push('+');
            out.push_str(&operand(k));
        }
        let _ = write!(out, "*{v}");
    }
    if out.is_empty() {
        out.push('0');
    }
    let _ = write!(
        out,
        "{}{}",
        a.rel.symbol(),
        operand(&-a.expr.constant_term())
    );
    out
}

pub fn atom_to_string(a: &Atom) -> String {
    if a.args.is_empty() {
        a.pred.clone()
    } else {
        let args: Vec<String> = a.args.iter().map(|v| v.to_string()).collect();
        format!("{}({})", a.pred, args.join(","))
    }
}

/// `p(A,B) :- [c1,c2]`, the constrained-fact listing format.
pub fn fact_to_string(head: &Atom, c: &Constraint) -> String {
    let cs: Vec<String> = c.iter().map(fact_atomic_to_string).collect();
    format!("{} :- [{}]", atom_to_string(head), cs.join(","))
}

pub fn clause_to_string(c: &Clause) -> String {
    let mut items: Vec<String> = c.constr.iter().map(atomic_to_string).collect();
    items.extend(c.body.iter().map(atom_to_string));
    if items.is_empty() {
        format!("{}.", atom_to_string(&c.head))
    } else {
        format!("{} :- {}.", atom_to_string(&c.head), items.join(", "))
    }
}

/// One clause per line; the empty program prints as the empty string.
pub fn program_to_string(p: &Program) -> String {
    let mut out = String::new();
    for c in p.clauses() {
        out.push_str(&clause_to_string(c));
        out.push('\n');
    }
    out
}
