use std::collections::BTreeSet;

use crate::ast::{Atom, Clause, Program};

/// Greatest set of argument positions `(pred, index)` whose head arguments
/// never interact with the rest of their clause. Positions of `goal` are kept.
pub fn erasable_positions(p: &Program, goal: &str) -> BTreeSet<(String, usize)> {
    let mut erased: BTreeSet<(String, usize)> = p
        .preds()
        .filter(|(pred, _)| *pred != goal)
        .flat_map(|(pred, n)| (0..n).map(move |i| (pred.to_string(), i)))
        .collect();
    loop {
        let mut changed = false;
        for c in p.clauses() {
            for (k, v) in c.head.args.iter().enumerate() {
                let key = (c.head.pred.clone(), k);
                if !erased.contains(&key) {
                    continue;
                }
                let in_constraint = c.constr.iter().any(|a| a.expr.mentions(v));
                let elsewhere = std::iter::once((&c.head, Some(k)))
                    .chain(c.body.iter().map(|b| (b, None)))
                    .any(|(a, skip)| {
                        a.args.iter().enumerate().any(|(j, w)| {
                            w == v && Some(j) != skip && !erased.contains(&(a.pred.clone(), j))
                        })
                    });
                if in_constraint || elsewhere {
                    erased.remove(&key);
                    changed = true;
                }
            }
        }
        if !changed {
            return erased;
        }
    }
}

fn filter_atom(a: &Atom, erased: &BTreeSet<(String, usize)>) -> Atom {
    let args = a
        .args
        .iter()
        .enumerate()
        .filter(|(i, _)| !erased.contains(&(a.pred.clone(), *i)))
        .map(|(_, v)| v.clone())
        .collect();
    Atom::new(a.pred.clone(), args)
}

/// Drops the erasable argument positions with respect to `goal`.
pub fn raf_filter(p: &Program, goal: &Atom) -> Program {
    let erased = erasable_positions(p, &goal.pred);
    let clauses = p
        .clauses()
        .iter()
        .map(|c| {
            Clause::new(
                filter_atom(&c.head, &erased),
                c.constr.clone(),
                c.body.iter().map(|b| filter_atom(b, &erased)).collect(),
            )
            .canonical()
        })
        .collect();
    Program::rebuild(clauses)
}
