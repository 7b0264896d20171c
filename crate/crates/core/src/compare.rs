//! Structural comparison of clauses and programs up to variable renaming,
//! body atom order, and constraint equivalence.

use std::collections::{BTreeMap, BTreeSet};

use crate::ast::{Atom, Clause, Program, Var};
use crate::lincon;

/// Extends `map` (and its inverse) so that `a` maps onto `b` argument-wise.
fn bind(a: &Atom, b: &Atom, map: &mut BTreeMap<Var, Var>, inv: &mut BTreeMap<Var, Var>) -> bool {
    if a.pred != b.pred || a.arity() != b.arity() {
        return false;
    }
    for (x, y) in a.args.iter().zip(&b.args) {
        match (map.get(x), inv.get(y)) {
            (Some(m), _) if m != y => return false,
            (_, Some(n)) if n != x => return false,
            _ => {
                map.insert(x.clone(), y.clone());
                inv.insert(y.clone(), x.clone());
            }
        }
    }
    true
}

fn constraints_agree(a: &Clause, b: &Clause, map: &BTreeMap<Var, Var>) -> bool {
    let mut full = map.clone();
    for (i, v) in a.constr.vars().into_iter().filter(|v| !map.contains_key(v)).enumerate() {
        full.insert(v, Var::new(format!("#local{i}")));
    }
    let keep: BTreeSet<Var> = map.values().cloned().collect();
    let left = lincon::project(&a.constr.rename(&full), &keep);
    let mut keep_b: BTreeSet<Var> = b.head.args.iter().cloned().collect();
    keep_b.extend(b.body.iter().flat_map(|x| x.args.iter().cloned()));
    let right = lincon::project(&b.constr, &keep_b);
    lincon::equivalent(&left, &right)
}

fn match_body(
    a: &Clause,
    b: &Clause,
    i: usize,
    used: &mut Vec<bool>,
    map: &BTreeMap<Var, Var>,
    inv: &BTreeMap<Var, Var>,
) -> bool {
    if i == a.body.len() {
        return constraints_agree(a, b, map);
    }
    for j in 0..b.body.len() {
        if used[j] || b.body[j].pred != a.body[i].pred {
            continue;
        }
        let (mut m, mut n) = (map.clone(), inv.clone());
        if bind(&a.body[i], &b.body[j], &mut m, &mut n) {
            used[j] = true;
            if match_body(a, b, i + 1, used, &m, &n) {
                return true;
            }
            used[j] = false;
        }
    }
    false
}

pub fn clauses_equivalent(a: &Clause, b: &Clause) -> bool {
    if a.body.len() != b.body.len() {
        return false;
    }
    let mut preds_a: Vec<&str> = a.body.iter().map(|x| x.pred.as_str()).collect();
    let mut preds_b: Vec<&str> = b.body.iter().map(|x| x.pred.as_str()).collect();
    preds_a.sort_unstable();
    preds_b.sort_unstable();
    if preds_a != preds_b {
        return false;
    }
    let (mut map, mut inv) = (BTreeMap::new(), BTreeMap::new());
    if !bind(&a.head, &b.head, &mut map, &mut inv) {
        return false;
    }
    match_body(a, b, 0, &mut vec![false; b.body.len()], &map, &inv)
}

/// Equal as clause multisets under [`clauses_equivalent`].
pub fn programs_equivalent(a: &Program, b: &Program) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut used = vec![false; b.len()];
    'outer: for c in a.clauses() {
        for (j, d) in b.clauses().iter().enumerate() {
            if !used[j] && clauses_equivalent(c, d) {
                used[j] = true;
                continue 'outer;
            }
        }
        return false;
    }
    true
}

/// Clauses of `a` (by index) without an equivalent partner in `b`.
pub fn unmatched_clauses(a: &Program, b: &Program) -> Vec<usize> {
    let mut used = vec![false; b.len()];
    let mut missing = Vec::new();
    for (i, c) in a.clauses().iter().enumerate() {
        match (0..b.len()).find(|&j| !used[j] && clauses_equivalent(c, &b.clauses()[j])) {
            Some(j) => used[j] = true,
            None => missing.push(i),
        }
    }
    missing
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_program;

    fn clause(text: &str) -> Clause {
        parse_program(text).unwrap().clauses()[0].clone()
    }

    #[test]
    fn renaming_and_order() {
        assert!(clauses_equivalent(
            &clause("p(A,B) :- A=<99, C=1+A, q(C,B)."),
            &clause("p(X,Y) :- q(Z,Y), Z-1=X, X=<99."),
        ));
        assert!(!clauses_equivalent(
            &clause("p(A,B) :- q(A,B)."),
            &clause("p(A,B) :- q(B,A)."),
        ));
    }

    #[test]
    fn redundant_conjuncts_ignored() {
        assert!(clauses_equivalent(
            &clause("p(A,B) :- A>=100, B=<100, B=<99."),
            &clause("p(A,B) :- B=<99, A>=100."),
        ));
        assert!(!clauses_equivalent(&clause("p(A) :- A>=1."), &clause("p(A) :- A>=2.")));
    }

    #[test]
    fn repeated_body_variables_must_match() {
        assert!(!clauses_equivalent(
            &clause("p :- q(A), r(A)."),
            &clause("p :- q(A), r(B)."),
        ));
    }

    #[test]
    fn multiset_matching() {
        let a = parse_program("p(A) :- A=0. p(A) :- A=0. q.").unwrap();
        let b = parse_program("q. p(X) :- X=0. p(X) :- X=0.").unwrap();
        let c = parse_program("q. p(X) :- X=0. p(X) :- X=1.").unwrap();
        assert!(programs_equivalent(&a, &b));
        assert!(!programs_equivalent(&a, &c));
        assert_eq!(unmatched_clauses(&a, &c), vec![1]);
    }
}
