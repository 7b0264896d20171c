use std::collections::BTreeMap;

use crate::ast::{Clause, Program, Var, FALSE};
use crate::lincon;
use crate::pdg::build_pdg_from;

use super::TransformError;

/// Resolves body atom `at` of `c0` against `defs`, dropping resolvents with
/// unsatisfiable constraints.
pub(crate) fn resolve<'a>(c0: &Clause, at: usize, defs: impl IntoIterator<Item = &'a Clause>) -> Vec<Clause> {
    let call = &c0.body[at];
    let avoid = c0.vars();
    let mut out = Vec::new();
    for d in defs {
        let d = d.rename_apart(&avoid);
        let bind: BTreeMap<Var, Var> = d.head.args.iter().cloned().zip(call.args.iter().cloned()).collect();
        let d = d.rename(&bind);
        let constr = c0.constr.and(&d.constr);
        if !lincon::is_satisfiable(&constr) {
            continue;
        }
        let mut body = c0.body[..at].to_vec();
        body.extend(d.body);
        body.extend_from_slice(&c0.body[at + 1..]);
        out.push(Clause::new(c0.head.clone(), constr, body).canonical());
    }
    out
}

/// Replaces clause `clause` by its resolvents on body atom `at`.
pub fn unfold_clause(p: &Program, clause: usize, at: usize) -> Result<Program, TransformError> {
    let clauses = p.clauses();
    let c0 = clauses.get(clause).ok_or(TransformError::ClauseOutOfRange {
        index: clause,
        len: clauses.len(),
    })?;
    if at >= c0.body.len() {
        return Err(TransformError::AtomOutOfRange {
            index: at,
            len: c0.body.len(),
        });
    }
    let pred = &c0.body[at].pred;
    let replaced = resolve(c0, at, p.clauses_for(pred));
    let mut out = clauses[..clause].to_vec();
    out.extend(replaced);
    out.extend_from_slice(&clauses[clause + 1..]);
    Ok(Program::rebuild(out))
}

/// Unfolds every call whose predicate is not the target of a backward edge,
/// then drops clauses no longer reachable from `false`.
pub fn unfold_forward(p: &Program) -> Program {
    unfold_forward_from(p, FALSE)
}

/// [`unfold_forward`] with the search rooted at `root`.
pub fn unfold_forward_from(p: &Program, root: &str) -> Program {
    let pdg = build_pdg_from(p, root);
    let loops = pdg.backward_targets();
    let reach = pdg.reachable_from(root);
    let mut clauses: Vec<Clause> = p
        .clauses()
        .iter()
        .filter(|c| reach.contains(&c.head.pred))
        .cloned()
        .collect();
    let mut i = 0;
    while i < clauses.len() {
        let Some(at) = clauses[i].body.iter().position(|a| !loops.contains(&a.pred)) else {
            i += 1;
            continue;
        };
        let pred = &clauses[i].body[at].pred;
        let defs: Vec<Clause> = clauses.iter().filter(|c| &c.head.pred == pred).cloned().collect();
        let replaced = resolve(&clauses[i], at, &defs);
        clauses.splice(i..i + 1, replaced);
    }
    let unfolded = Program::rebuild(clauses);
    let reach = build_pdg_from(&unfolded, root).reachable_from(root);
    let kept = unfolded
        .into_clauses()
        .into_iter()
        .filter(|c| reach.contains(&c.head.pred))
        .collect();
    Program::rebuild(kept)
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
    fn unfold_into_recursive_clauses() {
        let p = prog(
            "new4(A,B) :- C=1+A, A=<49, new3(C,B).
             new4(A,B) :- C=1+A, D=1+B, A>=50, new3(C,D).
             new3(A,B) :- A=<99, new4(A,B).",
        );
        let u = unfold_clause(&p, 2, 0).unwrap();
        let expected = prog(
            "new4(A,B) :- C=1+A, A=<49, new3(C,B).
             new4(A,B) :- C=1+A, D=1+B, A>=50, new3(C,D).
             new3(A,B) :- A=<99, C = 1+A, A=<49, new3(C,B).
             new3(A,B) :- A=<99, C = 1+A, D = 1+B, A>=50, new3(C,D).",
        );
        assert!(programs_equivalent(&u, &expected));
    }

    #[test]
    fn unfold_undefined_call_deletes_clause() {
        let p = prog("p :- q(X), X>=0. r.");
        let u = unfold_clause(&p, 0, 0).unwrap();
        assert_eq!(u.len(), 1);
        assert_eq!(u.clauses()[0].head.pred, "r");
    }

    #[test]
    fn unfold_true_fact() {
        let u = unfold_clause(&prog("p :- q. q."), 0, 0).unwrap();
        assert!(programs_equivalent(&u, &prog("p. q.")));
    }

    #[test]
    fn unfold_index_errors() {
        let p = prog("p :- q. q.");
        assert_eq!(
            unfold_clause(&p, 5, 0),
            Err(TransformError::ClauseOutOfRange { index: 5, len: 2 })
        );
        assert_eq!(
            unfold_clause(&p, 1, 0),
            Err(TransformError::AtomOutOfRange { index: 0, len: 0 })
        );
    }

    #[test]
    fn forward_unfolding_without_recursion() {
        let u = unfold_forward(&prog("false :- p. p :- q(X). q(X) :- X>=1."));
        assert!(programs_equivalent(&u, &prog("false :- X>=1.")));
    }

    #[test]
    fn forward_unfolding_fixpoint_when_all_calls_loop() {
        let p = prog("false :- p(X), X>=3. p(X) :- X=0. p(X) :- p(Y), X=Y+1.");
        assert!(programs_equivalent(&unfold_forward(&p), &p));
    }
}
