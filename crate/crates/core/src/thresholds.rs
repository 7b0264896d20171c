//! Concrete immediate-consequence operator over constrained facts and the
//! threshold constraints extracted from its third iterate.

use std::collections::{BTreeMap, BTreeSet};

use indexmap::IndexMap;

use crate::ast::{canonical_vars, Atom, AtomicConstraint, Clause, Constraint, Program, Var};
use crate::lincon;
use crate::print::fact_to_string;

/// Default bound on the facts kept per predicate by one operator application.
pub const DEFAULT_TP_CAP: usize = 200;

/// Constrained facts `p(A,B,..) <- c`, with `c` over the canonical variables
/// of `p`. Facts of one predicate are pairwise non-equivalent.
#[derive(Clone, Debug, Default)]
pub struct Interpretation {
    facts: IndexMap<String, (usize, Vec<Constraint>)>,
}

impl Interpretation {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a fact unless an equivalent one is present; returns whether it was added.
    pub fn insert(&mut self, pred: &str, arity: usize, c: Constraint) -> bool {
        let entry = self
            .facts
            .entry(pred.to_string())
            .or_insert_with(|| (arity, Vec::new()));
        if entry.1.iter().any(|d| lincon::equivalent(d, &c)) {
            return false;
        }
        entry.1.push(c);
        true
    }

    /// Adds a fact unless it is subsumed, removing the facts it subsumes.
    pub fn insert_subsuming(&mut self, pred: &str, arity: usize, c: Constraint) -> bool {
        let entry = self
            .facts
            .entry(pred.to_string())
            .or_insert_with(|| (arity, Vec::new()));
        if entry.1.iter().any(|d| lincon::entails_all(&c, d)) {
            return false;
        }
        entry.1.retain(|d| !lincon::entails_all(d, &c));
        entry.1.push(c);
        true
    }

    pub fn facts(&self, pred: &str) -> &[Constraint] {
        self.facts.get(pred).map_or(&[], |(_, cs)| cs.as_slice())
    }

    pub fn contains_pred(&self, pred: &str) -> bool {
        !self.facts(pred).is_empty()
    }

    pub fn preds(&self) -> impl Iterator<Item = &str> {
        self.facts.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.facts.values().map(|(_, cs)| cs.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Every fact as a head atom over canonical variables with its constraint.
    pub fn iter(&self) -> impl Iterator<Item = (Atom, &Constraint)> {
        self.facts.iter().flat_map(|(p, (n, cs))| {
            cs.iter().map(move |c| (Atom::new(p.clone(), canonical_vars(*n)), c))
        })
    }

    /// Keeps at most `cap` facts for each predicate, discarding facts
    /// subsumed by another one before truncating.
    fn limit(&mut self, cap: usize) {
        for (_, cs) in self.facts.values_mut() {
            if cs.len() <= cap {
                continue;
            }
            let mut kept: Vec<Constraint> = Vec::new();
            for (i, c) in cs.iter().enumerate() {
                let subsumed = cs
                    .iter()
                    .enumerate()
                    .any(|(j, d)| j != i && lincon::entails_all(c, d) && !(j > i && lincon::entails_all(d, c)));
                if !subsumed {
                    kept.push(c.clone());
                }
            }
            kept.truncate(cap);
            *cs = kept;
        }
    }

    /// One line per fact in the bracketed listing format.
    pub fn lines(&self) -> Vec<String> {
        self.iter().map(|(a, c)| fact_to_string(&a, c)).collect()
    }
}

/// `p(A,B,..) <- true` for every predicate of the program.
pub fn top_interpretation(p: &Program) -> Interpretation {
    let mut i = Interpretation::new();
    for (pred, n) in p.preds() {
        i.insert(pred, n, Constraint::truth());
    }
    i
}

/// Calls `emit` with the head constraint (over canonical variables) of every
/// satisfiable combination choosing body atom `k` from `sources[k]`.
pub(crate) fn fire(c: &Clause, sources: &[&[Constraint]], emit: &mut dyn FnMut(Constraint)) {
    fn go(
        c: &Clause,
        sources: &[&[Constraint]],
        k: usize,
        acc: Constraint,
        emit: &mut dyn FnMut(Constraint),
    ) {
        if k == c.body.len() {
            let keep: BTreeSet<Var> = c.head.args.iter().cloned().collect();
            let projected = lincon::project(&acc, &keep);
            let map: BTreeMap<Var, Var> = c
                .head
                .args
                .iter()
                .cloned()
                .zip(canonical_vars(c.head.arity()))
                .collect();
            emit(lincon::remove_redundant(&projected.rename(&map)));
            return;
        }
        let call = &c.body[k];
        let map: BTreeMap<Var, Var> = canonical_vars(call.arity())
            .into_iter()
            .zip(call.args.iter().cloned())
            .collect();
        for fact in sources[k] {
            let next = acc.and(&fact.rename(&map));
            if lincon::is_satisfiable(&next) {
                go(c, sources, k + 1, next, emit);
            }
        }
    }
    if lincon::is_satisfiable(&c.constr) {
        go(c, sources, 0, c.constr.clone(), emit);
    }
}

/// The concrete immediate-consequence operator with the default cap.
pub fn tp_step(p: &Program, i: &Interpretation) -> Interpretation {
    tp_step_capped(p, i, DEFAULT_TP_CAP)
}

pub fn tp_step_capped(p: &Program, i: &Interpretation, cap: usize) -> Interpretation {
    let mut out = Interpretation::new();
    for c in p.clauses() {
        let sources: Vec<&[Constraint]> = c.body.iter().map(|a| i.facts(&a.pred)).collect();
        fire(c, &sources, &mut |fact| {
            out.insert(&c.head.pred, c.head.arity(), fact);
        });
    }
    out.limit(cap);
    out
}

/// Candidate invariants per predicate, over the predicate's canonical variables.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ThresholdSet {
    by_pred: IndexMap<String, (usize, Vec<AtomicConstraint>)>,
}

impl ThresholdSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a threshold in normal form; ground and duplicate ones are ignored.
    pub fn insert(&mut self, pred: &str, arity: usize, t: &AtomicConstraint) -> bool {
        let Some(t) = lincon::normalize_atomic(t) else {
            return false;
        };
        let entry = self
            .by_pred
            .entry(pred.to_string())
            .or_insert_with(|| (arity, Vec::new()));
        if entry.1.contains(&t) {
            return false;
        }
        entry.1.push(t);
        true
    }

    pub fn get(&self, pred: &str) -> &[AtomicConstraint] {
        self.by_pred.get(pred).map_or(&[], |(_, ts)| ts.as_slice())
    }

    pub fn preds(&self) -> impl Iterator<Item = &str> {
        self.by_pred.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.by_pred.values().map(|(_, ts)| ts.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// One threshold per line, e.g. `new3(A,B) :- [-1*A>= -49]`.
    pub fn lines(&self) -> Vec<String> {
        self.by_pred
            .iter()
            .flat_map(|(p, (n, ts))| {
                let head = Atom::new(p.clone(), canonical_vars(*n));
                ts.iter()
                    .map(move |t| fact_to_string(&head, &Constraint::from(vec![t.clone()])))
            })
            .collect()
    }
}

/// Every conjunct of every fact, keyed by predicate.
pub fn atomconstraints(i: &Interpretation) -> ThresholdSet {
    let mut ts = ThresholdSet::new();
    for (head, c) in i.iter() {
        for a in c {
            ts.insert(&head.pred, head.arity(), a);
        }
    }
    ts
}

/// Conjuncts of the third concrete iterate from the top interpretation.
pub fn compute_thresholds(p: &Program) -> ThresholdSet {
    compute_thresholds_capped(p, DEFAULT_TP_CAP)
}

pub fn compute_thresholds_capped(p: &Program, cap: usize) -> ThresholdSet {
    let mut i = top_interpretation(p);
    for _ in 0..3 {
        i = tp_step_capped(p, &i, cap);
    }
    atomconstraints(&i)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_program;

    const UNFOLDED: &str = "
        false :- A=0, B=50, new3(A,B).
        new3(A,B) :- A=<99, C = 1+A, A=<49, new3(C,B).
        new3(A,B) :- A=<99, C = 1+A, D = 1+B, A>=50, new3(C,D).
        new3(A,B) :- A>=100, B>=101.
        new3(A,B) :- A>=100, B=<100, B=<99.
    ";

    fn con(text: &str) -> Constraint {
        parse_program(&format!("p :- {text}.")).unwrap().clauses()[0].constr.clone()
    }

    fn has_fact(i: &Interpretation, pred: &str, text: &str) -> bool {
        let c = con(text);
        i.facts(pred).iter().any(|d| lincon::equivalent(d, &c))
    }

    #[test]
    fn top_has_one_true_fact_per_predicate() {
        let p = parse_program(UNFOLDED).unwrap();
        let top = top_interpretation(&p);
        assert_eq!(top.len(), 2);
        assert!(top.facts("new3")[0].is_true());
        assert!(top.facts("false")[0].is_true());
        assert!(top_interpretation(&Program::empty()).is_empty());
    }

    #[test]
    fn first_step_on_running_example() {
        let p = parse_program(UNFOLDED).unwrap();
        let i = tp_step(&p, &top_interpretation(&p));
        assert_eq!(i.facts("new3").len(), 4);
        assert!(has_fact(&i, "new3", "A=<49"));
        assert!(has_fact(&i, "new3", "A>=50, A=<99"));
        assert!(has_fact(&i, "new3", "A>=100, B>=101"));
        assert!(has_fact(&i, "new3", "A>=100, B=<99"));
        assert_eq!(i.facts("false").len(), 1);
        assert!(i.facts("false")[0].is_true());
    }

    #[test]
    fn facts_fire_from_empty_interpretation() {
        let p = parse_program("p(A) :- A>=0. q(A) :- p(A).").unwrap();
        let i = tp_step(&p, &Interpretation::new());
        assert_eq!(i.facts("p").len(), 1);
        assert!(i.facts("q").is_empty());
    }

    #[test]
    fn unsatisfiable_bodies_contribute_nothing() {
        let p = parse_program("p(A) :- A>=1, q(A). q(A) :- A=<0.").unwrap();
        let mut i = Interpretation::new();
        i.insert("q", 1, con("A=<0"));
        assert!(tp_step(&p, &i).facts("p").is_empty());
    }

    #[test]
    fn atomconstraints_splits_conjunctions() {
        let mut i = Interpretation::new();
        i.insert("p", 1, con("A>=0, A=<50"));
        i.insert("q", 1, Constraint::truth());
        let ts = atomconstraints(&i);
        assert_eq!(ts.get("p").len(), 2);
        assert!(ts.get("q").is_empty());
        assert_eq!(ts.lines(), vec!["p(A) :- [1*A>=0]", "p(A) :- [-1*A>= -50]"]);
    }

    #[test]
    fn non_recursive_program_stabilizes() {
        let p = parse_program("p(A) :- A>=0. q(A) :- p(A), A=<3.").unwrap();
        let t = compute_thresholds(&p);
        assert_eq!(t.get("q").len(), 2);
        assert!(compute_thresholds(&Program::empty()).is_empty());
    }

    #[test]
    fn cap_prefers_dropping_subsumed_facts() {
        let mut i = Interpretation::new();
        i.insert("p", 1, con("A>=0"));
        i.insert("p", 1, con("A>=1"));
        i.insert("p", 1, con("A=<-5"));
        i.limit(2);
        assert_eq!(i.facts("p").len(), 2);
        assert!(has_fact(&i, "p", "A>=0"));
        assert!(has_fact(&i, "p", "A=< -5"));
    }
}
