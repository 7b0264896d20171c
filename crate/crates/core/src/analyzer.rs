//! Convex-polyhedra approximation of the minimal model, the safety check,
//! and a bounded bottom-up evaluator over concrete constrained facts.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use indexmap::IndexMap;

use crate::ast::{canonical_vars, Atom, Clause, Constraint, Program, Var};
use crate::lincon;
use crate::pdg::build_pdg;
use crate::polyhedra::Polyhedron;
use crate::print::atom_to_string;
use crate::thresholds::{fire, ThresholdSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AnalyzerConfig {
    /// Plain joins applied to a recursive predicate before it is widened.
    pub widen_delay: usize,
    /// Rounds allowed per component; past it the component is set to the universe.
    pub max_rounds: usize,
}

impl Default for AnalyzerConfig {
    fn default() -> Self {
        AnalyzerConfig {
            widen_delay: 2,
            max_rounds: 1000,
        }
    }
}

/// At most one polyhedron per predicate; a missing predicate is empty.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AbstractModel {
    polys: IndexMap<String, Polyhedron>,
}

impl AbstractModel {
    pub fn get(&self, pred: &str) -> Option<&Polyhedron> {
        self.polys.get(pred).filter(|p| !p.is_empty())
    }

    pub fn is_empty_at(&self, pred: &str) -> bool {
        self.get(pred).is_none()
    }

    /// Non-empty entries ordered by predicate name.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &Polyhedron)> {
        let mut entries: Vec<(&str, &Polyhedron)> = self
            .polys
            .iter()
            .filter(|(_, p)| !p.is_empty())
            .map(|(n, p)| (n.as_str(), p))
            .collect();
        entries.sort_by_key(|(n, _)| *n);
        entries.into_iter()
    }

    /// One constrained fact per non-empty predicate, e.g.
    /// `new3_query___1(A,B) :- [1*A>=0,-1*A>= -50,1*B=50]`.
    pub fn lines(&self) -> Vec<String> {
        self.iter()
            .map(|(n, p)| {
                let head = Atom::new(n, p.dims().to_vec());
                format!(
                    "{} :- {}",
                    atom_to_string(&head),
                    p.listing().expect("non-empty")
                )
            })
            .collect()
    }

    fn set(&mut self, pred: &str, p: Polyhedron) {
        self.polys.insert(pred.to_string(), p);
    }

    fn value(&self, pred: &str) -> Option<&Polyhedron> {
        self.polys.get(pred)
    }
}

impl fmt::Display for AbstractModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for line in self.lines() {
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct Analysis {
    pub model: AbstractModel,
    /// Evaluation rounds over all components.
    pub iterations: usize,
    /// Some component hit `max_rounds` and was set to the universe.
    pub budget_exhausted: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    Safe,
    Unknown,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Safe => "safe",
            Verdict::Unknown => "unknown",
        })
    }
}

/// Abstract value of the head of `c` given `model` for the body.
fn eval_clause(c: &Clause, model: &AbstractModel) -> Polyhedron {
    let dims = canonical_vars(c.head.arity());
    let mut acc = c.constr.clone();
    for b in &c.body {
        match model.value(&b.pred).and_then(|p| p.instantiate(&b.args)) {
            Some(bc) => acc = acc.and(&bc),
            None => return Polyhedron::empty(dims),
        }
    }
    let keep: BTreeSet<Var> = c.head.args.iter().cloned().collect();
    let projected = lincon::project(&acc, &keep);
    let map: BTreeMap<Var, Var> = c.head.args.iter().cloned().zip(dims.iter().cloned()).collect();
    Polyhedron::from_constraint(dims, &projected.rename(&map)).expect("projection stays over the head")
}

pub fn analyze(p: &Program, ts: &ThresholdSet) -> AbstractModel {
    analyze_with(p, ts, AnalyzerConfig::default()).model
}

/// Component-wise fixpoint iteration, callees first. In a recursive
/// component each predicate grows by plain joins for its first `widen_delay`
/// increases and is widened up to its thresholds afterwards.
pub fn analyze_with(p: &Program, ts: &ThresholdSet, cfg: AnalyzerConfig) -> Analysis {
    let mut model = AbstractModel::default();
    for (pred, n) in p.preds() {
        model.set(pred, Polyhedron::empty(canonical_vars(n)));
    }
    let mut iterations = 0;
    let mut budget_exhausted = false;
    for (comp, cyclic) in build_pdg(p).sccs() {
        let clauses: Vec<(usize, &Clause)> = p
            .clauses()
            .iter()
            .filter_map(|c| comp.iter().position(|n| *n == c.head.pred).map(|k| (k, c)))
            .collect();
        let round = |model: &AbstractModel| -> Vec<Polyhedron> {
            let mut next: Vec<Polyhedron> = comp.iter().map(|n| model.value(n).expect("known").clone()).collect();
            for &(k, c) in &clauses {
                let v = eval_clause(c, model);
                next[k] = next[k].hull(&v).expect("same arity");
            }
            next
        };
        if !cyclic {
            iterations += 1;
            for (n, v) in comp.iter().zip(round(&model)) {
                model.set(n, v);
            }
            continue;
        }
        let mut k = 0;
        let mut increases = vec![0usize; comp.len()];
        loop {
            if k == cfg.max_rounds {
                budget_exhausted = true;
                for n in &comp {
                    let dims = model.value(n).expect("known").dims().to_vec();
                    model.set(n, Polyhedron::universe(dims));
                }
                break;
            }
            iterations += 1;
            let joined = round(&model);
            let mut stable = true;
            for ((n, new), seen) in comp.iter().zip(joined).zip(increases.iter_mut()) {
                let old = model.value(n).expect("known");
                if old.includes(&new).expect("same arity") {
                    continue;
                }
                stable = false;
                *seen += 1;
                let next = if *seen <= cfg.widen_delay {
                    new
                } else {
                    old.widen_upto(&new, ts.get(n)).expect("thresholds over the arguments")
                };
                model.set(n, next);
            }
            k += 1;
            if stable {
                break;
            }
        }
    }
    Analysis {
        model,
        iterations,
        budget_exhausted,
    }
}

/// Safe exactly when the goal predicate has no abstract fact.
pub fn check_safety(m: &AbstractModel, goal: &str) -> Verdict {
    if m.is_empty_at(goal) {
        Verdict::Safe
    } else {
        Verdict::Unknown
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EvalOutcome {
    /// First round in which the goal had a fact.
    pub derived_at: Option<usize>,
    /// No round produced a new fact, so no later round can.
    pub saturated: bool,
    pub rounds: usize,
}

/// Bottom-up evaluation with subsumption, tagging each fact with its round.
struct Store {
    facts: HashMap<String, Vec<(Constraint, usize)>>,
}

impl Store {
    fn select(&self, pred: &str, keep: impl Fn(usize) -> bool) -> Vec<Constraint> {
        self.facts
            .get(pred)
            .into_iter()
            .flatten()
            .filter(|(_, r)| keep(*r))
            .map(|(c, _)| c.clone())
            .collect()
    }

    fn insert(&mut self, pred: &str, c: Constraint, round: usize) -> bool {
        let list = self.facts.entry(pred.to_string()).or_default();
        if list.iter().any(|(d, _)| lincon::entails_all(&c, d)) {
            return false;
        }
        list.retain(|(d, _)| !lincon::entails_all(d, &c));
        list.push((c, round));
        true
    }
}

/// Runs at most `depth` rounds of the concrete operator from the empty
/// interpretation, stopping early once `goal` holds or nothing new appears.
pub fn concrete_eval(p: &Program, goal: &str, depth: usize) -> EvalOutcome {
    let mut store = Store {
        facts: HashMap::new(),
    };
    for r in 1..=depth {
        let mut fresh: Vec<(String, Constraint)> = Vec::new();
        for c in p.clauses() {
            let mut emit = |f: Constraint| fresh.push((c.head.pred.clone(), f));
            if c.body.is_empty() {
                if r == 1 {
                    fire(c, &[], &mut emit);
                }
                continue;
            }
            for j in 0..c.body.len() {
                let lists: Vec<Vec<Constraint>> = c
                    .body
                    .iter()
                    .enumerate()
                    .map(|(k, a)| match k.cmp(&j) {
                        std::cmp::Ordering::Less => store.select(&a.pred, |t| t + 1 < r),
                        std::cmp::Ordering::Equal => store.select(&a.pred, |t| t + 1 == r),
                        std::cmp::Ordering::Greater => store.select(&a.pred, |t| t < r),
                    })
                    .collect();
                if lists.iter().any(Vec::is_empty) {
                    continue;
                }
                let sources: Vec<&[Constraint]> = lists.iter().map(Vec::as_slice).collect();
                fire(c, &sources, &mut emit);
            }
        }
        let mut changed = false;
        for (pred, f) in fresh {
            changed |= store.insert(&pred, f, r);
        }
        if store.facts.get(goal).is_some_and(|l| !l.is_empty()) {
            return EvalOutcome {
                derived_at: Some(r),
                saturated: false,
                rounds: r,
            };
        }
        if !changed {
            return EvalOutcome {
                derived_at: None,
                saturated: true,
                rounds: r,
            };
        }
    }
    EvalOutcome {
        derived_at: None,
        saturated: false,
        rounds: depth,
    }
}

/// Whether `goal` is derivable within `depth` rounds.
pub fn bounded_concrete_eval(p: &Program, goal: &Atom, depth: usize) -> bool {
    concrete_eval(p, &goal.pred, depth).derived_at.is_some()
}
