//! Constrained Horn clauses over linear rational arithmetic.
//!
//! A [`Clause`] is `H(X) :- phi, B1(X1), ..., Bk(Xk)` where `phi` is a
//! [`Constraint`] (a conjunction of [`AtomicConstraint`]s) and every atom
//! argument is a variable. Integrity constraints are clauses whose head is
//! the 0-ary predicate [`FALSE`].

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use indexmap::IndexMap;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Exact arithmetic everywhere; constants in benchmarks routinely exceed 32 bits.
pub type Rational = BigRational;

/// Name of the distinguished goal predicate.
pub const FALSE: &str = "false";

pub fn int(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(String);

impl Var {
    pub fn new(name: impl Into<String>) -> Self {
        Var(name.into())
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// `i`-th name of the sequence `A, B, ..., Z, A1, B1, ..., Z1, A2, ...`.
pub fn nth_var_name(i: usize) -> String {
    let letter = (b'A' + (i % 26) as u8) as char;
    match i / 26 {
        0 => letter.to_string(),
        round => format!("{letter}{round}"),
    }
}

/// Canonical argument variables of a predicate with the given arity.
pub fn canonical_vars(arity: usize) -> Vec<Var> {
    (0..arity).map(|i| Var::new(nth_var_name(i))).collect()
}

/// Generates variable names that do not clash with a set of taken names.
#[derive(Debug, Default)]
pub struct FreshNames {
    taken: HashSet<Var>,
    next: usize,
}

impl FreshNames {
    pub fn avoiding<'a>(taken: impl IntoIterator<Item = &'a Var>) -> Self {
        FreshNames {
            taken: taken.into_iter().cloned().collect(),
            next: 0,
        }
    }

    pub fn reserve(&mut self, v: &Var) {
        self.taken.insert(v.clone());
    }

    pub fn fresh(&mut self) -> Var {
        loop {
            let v = Var::new(nth_var_name(self.next));
            self.next += 1;
            if self.taken.insert(v.clone()) {
                return v;
            }
        }
    }
}

/// Linear expression `sum(coeff * var) + constant`. Zero coefficients are never stored.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct LinExpr {
    terms: BTreeMap<Var, Rational>,
    constant: Rational,
}

impl LinExpr {
    pub fn zero() -> Self {
        LinExpr::default()
    }

    pub fn constant(k: Rational) -> Self {
        LinExpr {
            terms: BTreeMap::new(),
            constant: k,
        }
    }

    pub fn var(v: Var) -> Self {
        LinExpr::term(v, Rational::one())
    }

    pub fn term(v: Var, k: Rational) -> Self {
        let mut e = LinExpr::zero();
        e.add_term(v, k);
        e
    }

    pub fn from_parts(terms: impl IntoIterator<Item = (Var, Rational)>, constant: Rational) -> Self {
        let mut e = LinExpr::constant(constant);
        for (v, k) in terms {
            e.add_term(v, k);
        }
        e
    }

    pub fn add_term(&mut self, v: Var, k: Rational) {
        if k.is_zero() {
            return;
        }
        let cancelled = {
            let slot = self.terms.entry(v.clone()).or_insert_with(Rational::zero);
            *slot += k;
            slot.is_zero()
        };
        if cancelled {
            self.terms.remove(&v);
        }
    }

    pub fn coeff(&self, v: &Var) -> Rational {
        self.terms.get(v).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Var, &Rational)> {
        self.terms.iter()
    }

    pub fn constant_term(&self) -> &Rational {
        &self.constant
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn mentions(&self, v: &Var) -> bool {
        self.terms.contains_key(v)
    }

    pub fn vars(&self) -> impl Iterator<Item = &Var> {
        self.terms.keys()
    }

    pub fn num_vars(&self) -> usize {
        self.terms.len()
    }

    pub fn scale(&self, k: &Rational) -> LinExpr {
        if k.is_zero() {
            return LinExpr::zero();
        }
        LinExpr {
            terms: self.terms.iter().map(|(v, c)| (v.clone(), c * k)).collect(),
            constant: &self.constant * k,
        }
    }

    /// Replaces `v` by `e`.
    pub fn substitute(&self, v: &Var, e: &LinExpr) -> LinExpr {
        match self.terms.get(v) {
            None => self.clone(),
            Some(k) => {
                let mut rest = self.clone();
                rest.terms.remove(v);
                &rest + &e.scale(k)
            }
        }
    }

    /// Simultaneous renaming; variables without an image are kept.
    pub fn rename(&self, map: &BTreeMap<Var, Var>) -> LinExpr {
        let mut out = LinExpr::constant(self.constant.clone());
        for (v, k) in &self.terms {
            out.add_term(map.get(v).unwrap_or(v).clone(), k.clone());
        }
        out
    }

    pub fn eval(&self, point: &BTreeMap<Var, Rational>) -> Option<Rational> {
        let mut acc = self.constant.clone();
        for (v, k) in &self.terms {
            acc += k * point.get(v)?;
        }
        Some(acc)
    }
}

impl fmt::Debug for LinExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::print::expr_to_string(self))
    }
}

impl<'a> Add<&'a LinExpr> for &'a LinExpr {
    type Output = LinExpr;
    fn add(self, rhs: &'a LinExpr) -> LinExpr {
        let mut out = self.clone();
        for (v, k) in &rhs.terms {
            out.add_term(v.clone(), k.clone());
        }
        out.constant += &rhs.constant;
        out
    }
}

impl<'a> Sub<&'a LinExpr> for &'a LinExpr {
    type Output = LinExpr;
    fn sub(self, rhs: &'a LinExpr) -> LinExpr {
        self + &(-rhs)
    }
}

impl Neg for &LinExpr {
    type Output = LinExpr;
    fn neg(self) -> LinExpr {
        self.scale(&-Rational::one())
    }
}

impl Mul<&Rational> for &LinExpr {
    type Output = LinExpr;
    fn mul(self, k: &Rational) -> LinExpr {
        self.scale(k)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rel {
    Le,
    Lt,
    Eq,
    Ge,
    Gt,
}

impl Rel {
    pub fn symbol(self) -> &'static str {
        match self {
            Rel::Le => "=<",
            Rel::Lt => "<",
            Rel::Eq => "=",
            Rel::Ge => ">=",
            Rel::Gt => ">",
        }
    }

    pub fn is_strict(self) -> bool {
        matches!(self, Rel::Lt | Rel::Gt)
    }

    fn holds(self, value: &Rational) -> bool {
        match self {
            Rel::Le => !value.is_positive(),
            Rel::Lt => value.is_negative(),
            Rel::Eq => value.is_zero(),
            Rel::Ge => !value.is_negative(),
            Rel::Gt => value.is_positive(),
        }
    }
}

/// `expr rel 0`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct AtomicConstraint {
    pub expr: LinExpr,
    pub rel: Rel,
}

impl AtomicConstraint {
    pub fn new(expr: LinExpr, rel: Rel) -> Self {
        AtomicConstraint { expr, rel }
    }

    /// `lhs rel rhs`.
    pub fn compare(lhs: &LinExpr, rel: Rel, rhs: &LinExpr) -> Self {
        AtomicConstraint::new(lhs - rhs, rel)
    }

    pub fn is_ground(&self) -> bool {
        self.expr.is_constant()
    }

    /// Truth value when no variable occurs.
    pub fn ground_value(&self) -> Option<bool> {
        self.is_ground()
            .then(|| self.rel.holds(self.expr.constant_term()))
    }

    pub fn holds_at(&self, point: &BTreeMap<Var, Rational>) -> Option<bool> {
        self.expr.eval(point).map(|v| self.rel.holds(&v))
    }

    pub fn rename(&self, map: &BTreeMap<Var, Var>) -> Self {
        AtomicConstraint::new(self.expr.rename(map), self.rel)
    }

    pub fn substitute(&self, v: &Var, e: &LinExpr) -> Self {
        AtomicConstraint::new(self.expr.substitute(v, e), self.rel)
    }

    /// Disjunction of atomic constraints equivalent to the negation.
    pub fn negate(&self) -> Vec<AtomicConstraint> {
        let e = self.expr.clone();
        match self.rel {
            Rel::Le => vec![AtomicConstraint::new(e, Rel::Gt)],
            Rel::Lt => vec![AtomicConstraint::new(e, Rel::Ge)],
            Rel::Ge => vec![AtomicConstraint::new(e, Rel::Lt)],
            Rel::Gt => vec![AtomicConstraint::new(e, Rel::Le)],
            Rel::Eq => vec![
                AtomicConstraint::new(e.clone(), Rel::Gt),
                AtomicConstraint::new(e, Rel::Lt),
            ],
        }
    }
}

impl fmt::Debug for AtomicConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::print::atomic_to_string(self))
    }
}

/// Conjunction of atomic constraints; empty means `true`.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Constraint {
    pub conjuncts: Vec<AtomicConstraint>,
}

impl Constraint {
    pub fn truth() -> Self {
        Constraint::default()
    }

    /// The canonical unsatisfiable conjunction `-1 >= 0`.
    pub fn falsum() -> Self {
        Constraint::from(vec![AtomicConstraint::new(
            LinExpr::constant(-Rational::one()),
            Rel::Ge,
        )])
    }

    pub fn is_true(&self) -> bool {
        self.conjuncts.is_empty()
    }

    /// Syntactically false: contains a ground conjunct that does not hold.
    pub fn is_trivially_false(&self) -> bool {
        self.conjuncts
            .iter()
            .any(|a| a.ground_value() == Some(false))
    }

    pub fn len(&self) -> usize {
        self.conjuncts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.conjuncts.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, AtomicConstraint> {
        self.conjuncts.iter()
    }

    pub fn push(&mut self, a: AtomicConstraint) {
        self.conjuncts.push(a);
    }

    pub fn and(&self, other: &Constraint) -> Constraint {
        let mut out = self.clone();
        out.conjuncts.extend(other.conjuncts.iter().cloned());
        out
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        self.conjuncts
            .iter()
            .flat_map(|a| a.expr.vars().cloned())
            .collect()
    }

    pub fn rename(&self, map: &BTreeMap<Var, Var>) -> Constraint {
        Constraint::from(self.conjuncts.iter().map(|a| a.rename(map)).collect::<Vec<_>>())
    }

    pub fn holds_at(&self, point: &BTreeMap<Var, Rational>) -> Option<bool> {
        let mut all = true;
        for a in &self.conjuncts {
            all &= a.holds_at(point)?;
        }
        Some(all)
    }
}

impl From<Vec<AtomicConstraint>> for Constraint {
    fn from(conjuncts: Vec<AtomicConstraint>) -> Self {
        Constraint { conjuncts }
    }
}

impl FromIterator<AtomicConstraint> for Constraint {
    fn from_iter<I: IntoIterator<Item = AtomicConstraint>>(iter: I) -> Self {
        Constraint::from(iter.into_iter().collect::<Vec<_>>())
    }
}

impl<'a> IntoIterator for &'a Constraint {
    type Item = &'a AtomicConstraint;
    type IntoIter = std::slice::Iter<'a, AtomicConstraint>;
    fn into_iter(self) -> Self::IntoIter {
        self.conjuncts.iter()
    }
}

impl fmt::Debug for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.conjuncts.iter()).finish()
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Atom {
    pub pred: String,
    pub args: Vec<Var>,
}

impl Atom {
    pub fn new(pred: impl Into<String>, args: Vec<Var>) -> Self {
        Atom {
            pred: pred.into(),
            args,
        }
    }

    pub fn prop(pred: impl Into<String>) -> Self {
        Atom::new(pred, Vec::new())
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn rename(&self, map: &BTreeMap<Var, Var>) -> Atom {
        Atom::new(
            self.pred.clone(),
            self.args
                .iter()
                .map(|v| map.get(v).unwrap_or(v).clone())
                .collect(),
        )
    }
}

impl fmt::Debug for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::print::atom_to_string(self))
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Clause {
    pub head: Atom,
    pub constr: Constraint,
    pub body: Vec<Atom>,
}

impl Clause {
    pub fn new(head: Atom, constr: Constraint, body: Vec<Atom>) -> Self {
        Clause { head, constr, body }
    }

    pub fn fact(head: Atom, constr: Constraint) -> Self {
        Clause::new(head, constr, Vec::new())
    }

    pub fn is_integrity(&self) -> bool {
        self.head.pred == FALSE
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut vs = self.constr.vars();
        vs.extend(self.head.args.iter().cloned());
        for a in &self.body {
            vs.extend(a.args.iter().cloned());
        }
        vs
    }

    pub fn rename(&self, map: &BTreeMap<Var, Var>) -> Clause {
        Clause::new(
            self.head.rename(map),
            self.constr.rename(map),
            self.body.iter().map(|a| a.rename(map)).collect(),
        )
    }

    /// Renames variables to `A, B, C, ...` in order of first occurrence:
    /// head arguments, then body atom arguments, then constraint-only variables.
    pub fn canonical(&self) -> Clause {
        let mut order: Vec<Var> = Vec::new();
        let mut seen = BTreeSet::new();
        let atoms = std::iter::once(&self.head).chain(self.body.iter());
        for v in atoms.flat_map(|a| a.args.iter()) {
            if seen.insert(v.clone()) {
                order.push(v.clone());
            }
        }
        for v in self.constr.vars() {
            if seen.insert(v.clone()) {
                order.push(v);
            }
        }
        let map = order
            .into_iter()
            .enumerate()
            .map(|(i, v)| (v, Var::new(nth_var_name(i))))
            .collect();
        self.rename(&map)
    }

    /// Same clause with variables renamed apart from `avoid`.
    pub fn rename_apart(&self, avoid: &BTreeSet<Var>) -> Clause {
        let mine = self.vars();
        let mut fresh = FreshNames::avoiding(avoid.iter().chain(mine.iter()));
        let map = mine.into_iter().map(|v| (v, fresh.fresh())).collect();
        self.rename(&map)
    }
}

impl fmt::Debug for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::print::clause_to_string(self))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProgramError {
    #[error("predicate {pred} used with arity {found}, but has arity {expected}")]
    ArityMismatch {
        pred: String,
        expected: usize,
        found: usize,
    },
    #[error("predicate {FALSE} must have arity 0, found {0}")]
    FalseArity(usize),
    #[error("predicate {FALSE} may only occur in clause heads")]
    FalseInBody,
    #[error("clause head {0} repeats an argument variable")]
    RepeatedHeadVar(String),
}

/// Ordered clause list plus predicate table in order of first appearance.
#[derive(Clone, Default, PartialEq, Eq)]
pub struct Program {
    clauses: Vec<Clause>,
    preds: IndexMap<String, usize>,
}

impl Program {
    pub fn new(clauses: Vec<Clause>) -> Result<Self, ProgramError> {
        let mut preds: IndexMap<String, usize> = IndexMap::new();
        for c in &clauses {
            let mut head_seen = HashSet::new();
            if !c.head.args.iter().all(|v| head_seen.insert(v)) {
                return Err(ProgramError::RepeatedHeadVar(c.head.pred.clone()));
            }
            for (i, a) in std::iter::once(&c.head).chain(c.body.iter()).enumerate() {
                if a.pred == FALSE {
                    if i > 0 {
                        return Err(ProgramError::FalseInBody);
                    }
                    if a.arity() != 0 {
                        return Err(ProgramError::FalseArity(a.arity()));
                    }
                }
                match preds.get(&a.pred) {
                    Some(&n) if n != a.arity() => {
                        return Err(ProgramError::ArityMismatch {
                            pred: a.pred.clone(),
                            expected: n,
                            found: a.arity(),
                        })
                    }
                    Some(_) => {}
                    None => {
                        preds.insert(a.pred.clone(), a.arity());
                    }
                }
            }
        }
        Ok(Program { clauses, preds })
    }

    /// Builds a program from clauses produced by an arity-preserving transformation.
    pub(crate) fn rebuild(clauses: Vec<Clause>) -> Self {
        Program::new(clauses).expect("transformation produced an ill-formed program")
    }

    pub fn empty() -> Self {
        Program::default()
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn into_clauses(self) -> Vec<Clause> {
        self.clauses
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn preds(&self) -> impl Iterator<Item = (&str, usize)> {
        self.preds.iter().map(|(p, &n)| (p.as_str(), n))
    }

    pub fn arity(&self, pred: &str) -> Option<usize> {
        self.preds.get(pred).copied()
    }

    pub fn has_pred(&self, pred: &str) -> bool {
        self.preds.contains_key(pred)
    }

    pub fn clauses_for<'a>(&'a self, pred: &'a str) -> impl Iterator<Item = &'a Clause> + 'a {
        self.clauses.iter().filter(move |c| c.head.pred == pred)
    }
}

impl fmt::Debug for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::print::program_to_string(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(n: &str) -> Var {
        Var::new(n)
    }

    #[test]
    fn fresh_names_skip_taken() {
        let taken = [v("A"), v("C")];
        let mut fresh = FreshNames::avoiding(taken.iter());
        assert_eq!(fresh.fresh(), v("B"));
        assert_eq!(fresh.fresh(), v("D"));
        assert_eq!(nth_var_name(26), "A1");
    }

    #[test]
    fn lin_expr_cancels_terms() {
        let e = &LinExpr::var(v("X")) - &LinExpr::var(v("X"));
        assert!(e.is_constant());
        let sub = LinExpr::var(v("X")).substitute(&v("X"), &LinExpr::constant(int(3)));
        assert_eq!(sub, LinExpr::constant(int(3)));
    }

    #[test]
    fn arity_mismatch_is_rejected() {
        let c1 = Clause::fact(Atom::new("p", vec![v("A")]), Constraint::truth());
        let c2 = Clause::fact(Atom::new("p", vec![v("A"), v("B")]), Constraint::truth());
        assert!(matches!(
            Program::new(vec![c1, c2]),
            Err(ProgramError::ArityMismatch { .. })
        ));
    }

    #[test]
    fn false_in_body_is_rejected() {
        let c = Clause::new(Atom::prop("p"), Constraint::truth(), vec![Atom::prop(FALSE)]);
        assert_eq!(Program::new(vec![c]), Err(ProgramError::FalseInBody));
    }

    #[test]
    fn canonical_renaming_orders_by_occurrence() {
        let c = Clause::new(
            Atom::new("p", vec![v("X"), v("Y")]),
            Constraint::from(vec![AtomicConstraint::compare(
                &LinExpr::var(v("Z")),
                Rel::Eq,
                &LinExpr::var(v("X")),
            )]),
            vec![Atom::new("q", vec![v("Z"), v("Y")])],
        )
        .canonical();
        assert_eq!(c.head.args, vec![v("A"), v("B")]);
        assert_eq!(c.body[0].args, vec![v("C"), v("B")]);
    }
}
