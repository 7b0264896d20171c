use std::collections::{BTreeMap, BTreeSet};

use indexmap::IndexMap;

use crate::ast::{canonical_vars, Atom, Clause, Constraint, Program, Var, FALSE};
use crate::lincon;

pub fn split_name(pred: &str, block: usize) -> String {
    format!("{pred}___{block}")
}

/// Clause constraint projected onto the head, expressed over canonical variables.
fn head_constraint(c: &Clause) -> Constraint {
    let keep: BTreeSet<Var> = c.head.args.iter().cloned().collect();
    let projected = lincon::project(&c.constr, &keep);
    let map: BTreeMap<Var, Var> = c
        .head
        .args
        .iter()
        .cloned()
        .zip(canonical_vars(c.head.arity()))
        .collect();
    projected.rename(&map)
}

/// Partition of the clauses of `pred` (indices into the program) into the
/// connected components of pairwise-overlapping head constraints.
pub fn split_blocks(p: &Program, pred: &str) -> Vec<Vec<usize>> {
    let members: Vec<usize> = (0..p.len()).filter(|&i| p.clauses()[i].head.pred == pred).collect();
    let guards: Vec<Constraint> = members.iter().map(|&i| head_constraint(&p.clauses()[i])).collect();
    let mut root: Vec<usize> = (0..members.len()).collect();
    fn find(root: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while root[r] != r {
            r = root[r];
        }
        root[i] = r;
        r
    }
    for i in 0..members.len() {
        for j in i + 1..members.len() {
            if find(&mut root, i) == find(&mut root, j) {
                continue;
            }
            if lincon::is_satisfiable(&guards[i].and(&guards[j])) {
                let (a, b) = (find(&mut root, i), find(&mut root, j));
                root[a.max(b)] = a.min(b);
            }
        }
    }
    let mut blocks: IndexMap<usize, Vec<usize>> = IndexMap::new();
    for (k, &i) in members.iter().enumerate() {
        let r = find(&mut root, k);
        blocks.entry(r).or_default().push(i);
    }
    blocks.into_values().collect()
}

/// Gives every defined predicate except `false` and `goal` one new predicate
/// `pred___k` per block of mutually exclusive clauses, and expands each call
/// into one clause per block of the callee.
pub fn split_predicates(p: &Program, goal: &str) -> Program {
    let mut block_of: BTreeMap<usize, usize> = BTreeMap::new();
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    let mut defined: Vec<&str> = Vec::new();
    for c in p.clauses() {
        if !defined.contains(&c.head.pred.as_str()) {
            defined.push(&c.head.pred);
        }
    }
    for pred in defined {
        if pred == FALSE || pred == goal {
            continue;
        }
        let blocks = split_blocks(p, pred);
        counts.insert(pred.to_string(), blocks.len());
        for (k, block) in blocks.iter().enumerate() {
            for &i in block {
                block_of.insert(i, k + 1);
            }
        }
    }
    let mut out = Vec::new();
    for (i, c) in p.clauses().iter().enumerate() {
        let head = match block_of.get(&i) {
            Some(&k) => Atom::new(split_name(&c.head.pred, k), c.head.args.clone()),
            None => c.head.clone(),
        };
        let mut bodies: Vec<Vec<Atom>> = vec![Vec::new()];
        for b in &c.body {
            let choices: Vec<Atom> = match counts.get(&b.pred) {
                Some(&n) => (1..=n).map(|k| Atom::new(split_name(&b.pred, k), b.args.clone())).collect(),
                None => vec![b.clone()],
            };
            bodies = bodies
                .into_iter()
                .flat_map(|prefix| {
                    choices.iter().map(move |a| {
                        let mut next = prefix.clone();
                        next.push(a.clone());
                        next
                    })
                })
                .collect();
        }
        for body in bodies {
            out.push(Clause::new(head.clone(), c.constr.clone(), body));
        }
    }
    Program::rebuild(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compare::programs_equivalent;
    use crate::parse::parse_program;

    fn prog(text: &str) -> Program {
        parse_program(text).unwrap()
    }

    #[test]
    fn single_clause_predicates_are_renamed_only() {
        let p = prog("false :- p(X). p(X) :- X>=0.");
        let s = split_predicates(&p, FALSE);
        assert!(programs_equivalent(&s, &prog("false :- p___1(X). p___1(X) :- X>=0.")));
    }

    #[test]
    fn overlapping_guards_form_one_block() {
        let p = prog("false :- p(X). p(A) :- A>=0. p(A) :- A=<10.");
        assert_eq!(split_blocks(&p, "p"), vec![vec![1, 2]]);
    }

    #[test]
    fn disjoint_guards_split_and_calls_expand() {
        let p = prog(
            "false :- p(X), q(X).
             p(A) :- A=<99, q(A).
             p(A) :- A>=100.
             q(A) :- A>=0.",
        );
        assert_eq!(split_blocks(&p, "p"), vec![vec![1], vec![2]]);
        let s = split_predicates(&p, FALSE);
        let expected = prog(
            "false :- p___1(X), q___1(X).
             false :- p___2(X), q___1(X).
             p___1(A) :- A=<99, q___1(A).
             p___2(A) :- A>=100.
             q___1(A) :- A>=0.",
        );
        assert!(programs_equivalent(&s, &expected));
    }

    #[test]
    fn overlap_is_transitive() {
        let p = prog("p(A) :- A=<1. p(A) :- A>=5. p(A) :- A>=0, A=<6.");
        assert_eq!(split_blocks(&p, "p"), vec![vec![0, 1, 2]]);
    }

    #[test]
    fn goal_is_never_split() {
        let p = prog("g :- X=0. g :- X=1.");
        assert!(programs_equivalent(&split_predicates(&p, "g"), &p));
    }
}
