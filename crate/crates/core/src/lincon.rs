//! Conjunctions of linear constraints over the rationals.
//!
//! Every query reduces to variable elimination: equalities are used for
//! substitution when they mention the variable, otherwise Fourier-Motzkin
//! combines lower and upper bounds. Strictness is tracked exactly, so
//! `X<Y, Y<X` is unsatisfiable while `X=<Y, Y=<X` is not.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::ast::{AtomicConstraint, Constraint, LinExpr, Rational, Rel, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub(crate) enum Kind {
    Eq,
    Ge,
    Gt,
}

/// `expr kind 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Row {
    pub expr: LinExpr,
    pub kind: Kind,
}

impl Row {
    pub fn from_atomic(a: &AtomicConstraint) -> Row {
        let (expr, kind) = match a.rel {
            Rel::Eq => (a.expr.clone(), Kind::Eq),
            Rel::Ge => (a.expr.clone(), Kind::Ge),
            Rel::Gt => (a.expr.clone(), Kind::Gt),
            Rel::Le => (-&a.expr, Kind::Ge),
            Rel::Lt => (-&a.expr, Kind::Gt),
        };
        Row { expr, kind }
    }

    pub fn to_atomic(&self) -> AtomicConstraint {
        let rel = match self.kind {
            Kind::Eq => Rel::Eq,
            Kind::Ge => Rel::Ge,
            Kind::Gt => Rel::Gt,
        };
        AtomicConstraint::new(self.expr.clone(), rel)
    }
}

pub(crate) fn rows_of(c: &Constraint) -> Vec<Row> {
    c.iter().map(Row::from_atomic).collect()
}

fn constraint_of(rows: &[Row]) -> Constraint {
    rows.iter().map(Row::to_atomic).collect()
}

/// Positive factor turning all coefficients and the constant into coprime integers.
fn primitive_scale(e: &LinExpr) -> Rational {
    let nums: Vec<&Rational> = e
        .terms()
        .map(|(_, k)| k)
        .chain(std::iter::once(e.constant_term()))
        .collect();
    let mut lcm = BigInt::one();
    let mut gcd = BigInt::zero();
    for k in &nums {
        lcm = lcm.lcm(k.denom());
    }
    for k in nums {
        let scaled = (k * Rational::from_integer(lcm.clone())).to_integer();
        gcd = gcd.gcd(&scaled);
    }
    if gcd.is_zero() {
        return Rational::one();
    }
    Rational::new(lcm, gcd)
}

/// Splits a row into its linear key (first coefficient positive) and the sign used.
fn linear_key(e: &LinExpr) -> (Vec<(Var, Rational)>, bool) {
    let first_positive = e.terms().next().map(|(_, k)| k.is_positive()).unwrap_or(true);
    let key = e
        .terms()
        .map(|(v, k)| (v.clone(), if first_positive { k.clone() } else { -k }))
        .collect::<Vec<_>>();
    // make the key primitive so parallel rows share it
    let lin = LinExpr::from_parts(key, Rational::zero());
    let s = primitive_scale(&lin);
    let key = lin.terms().map(|(v, k)| (v.clone(), k * &s)).collect();
    (key, first_positive)
}

#[derive(Clone, Debug)]
struct Bounds<T> {
    /// `L = v`
    eq: Option<(Rational, T)>,
    /// `L >= v` or `L > v` when strict
    lower: Option<(Rational, bool, T)>,
    /// `L =< v` or `L < v` when strict
    upper: Option<(Rational, bool, T)>,
}

impl<T> Default for Bounds<T> {
    fn default() -> Self {
        Bounds {
            eq: None,
            lower: None,
            upper: None,
        }
    }
}

fn tighter_lower(a: (&Rational, bool), b: (&Rational, bool)) -> bool {
    a.0 > b.0 || (a.0 == b.0 && a.1 && !b.1)
}

fn tighter_upper(a: (&Rational, bool), b: (&Rational, bool)) -> bool {
    a.0 < b.0 || (a.0 == b.0 && a.1 && !b.1)
}

/// Result of simplifying a row set: `None` means unsatisfiable.
pub(crate) type Simplified = Option<Vec<Row>>;

/// Normalizes rows and merges parallel ones. Detects ground falsity, removes
/// ground truths and duplicates, keeps only the tightest bound per direction,
/// and turns matching opposite non-strict bounds into an equality.
pub(crate) fn simplify(rows: Vec<Row>) -> Simplified {
    let tagged = simplify_tagged(rows.into_iter().map(|r| (r, ())).collect())?;
    Some(tagged.into_iter().map(|(r, _)| r).collect())
}

/// [`simplify`] where every surviving row keeps the tag of the row it came from.
fn simplify_tagged<T: Clone>(rows: Vec<(Row, T)>) -> Option<Vec<(Row, T)>> {
    let mut by_key: BTreeMap<Vec<(Var, Rational)>, Bounds<T>> = BTreeMap::new();
    for (row, tag) in rows {
        if row.expr.is_constant() {
            let k = row.expr.constant_term();
            let ok = match row.kind {
                Kind::Eq => k.is_zero(),
                Kind::Ge => !k.is_negative(),
                Kind::Gt => k.is_positive(),
            };
            if !ok {
                return None;
            }
            continue;
        }
        let (key, positive) = linear_key(&row.expr);
        // row: sign * s * (L) + k  kind 0, find the scale s from the first coefficient
        let (v0, k0) = row.expr.terms().next().unwrap();
        let l0 = &key[0].1;
        debug_assert_eq!(&key[0].0, v0);
        let s = k0 / l0; // row.expr = s * L + c (s negative iff !positive)
        let c = row.expr.constant_term();
        // s*L + c kind 0  =>  L kind' -c/s
        let bound = -(c / &s);
        let b = by_key.entry(key).or_default();
        match row.kind {
            Kind::Eq => match &b.eq {
                Some((old, _)) if *old != bound => return None,
                Some(_) => {}
                None => b.eq = Some((bound, tag)),
            },
            Kind::Ge | Kind::Gt => {
                let strict = row.kind == Kind::Gt;
                if positive {
                    if b.lower.as_ref().map_or(true, |(v, s, _)| tighter_lower((&bound, strict), (v, *s))) {
                        b.lower = Some((bound, strict, tag));
                    }
                } else if b.upper.as_ref().map_or(true, |(v, s, _)| tighter_upper((&bound, strict), (v, *s))) {
                    b.upper = Some((bound, strict, tag));
                }
            }
        }
    }
    let mut out = Vec::new();
    for (key, b) in by_key {
        let lin = LinExpr::from_parts(key, Rational::zero());
        let row_for = |kind: Kind, sign: bool, value: &Rational| {
            // sign: L - value (true) or value - L (false)
            let e = if sign {
                &lin - &LinExpr::constant(value.clone())
            } else {
                &LinExpr::constant(value.clone()) - &lin
            };
            Row { expr: e, kind }
        };
        if let Some((v, tag)) = &b.eq {
            if let Some((lo, strict, _)) = &b.lower {
                if v < lo || (v == lo && *strict) {
                    return None;
                }
            }
            if let Some((hi, strict, _)) = &b.upper {
                if v > hi || (v == hi && *strict) {
                    return None;
                }
            }
            out.push((row_for(Kind::Eq, true, v), tag.clone()));
            continue;
        }
        match (b.lower, b.upper) {
            (Some((lo, ls, _)), Some((hi, hs, _))) if lo > hi || (lo == hi && (ls || hs)) => return None,
            (Some((lo, false, tag)), Some((hi, false, _))) if lo == hi => {
                out.push((row_for(Kind::Eq, true, &lo), tag));
            }
            (lo, hi) => {
                if let Some((v, strict, tag)) = lo {
                    out.push((row_for(if strict { Kind::Gt } else { Kind::Ge }, true, &v), tag));
                }
                if let Some((v, strict, tag)) = hi {
                    out.push((row_for(if strict { Kind::Gt } else { Kind::Ge }, false, &v), tag));
                }
            }
        }
    }
    for (r, _) in &mut out {
        let s = primitive_scale(&r.expr);
        r.expr = r.expr.scale(&s);
    }
    Some(out)
}

fn solve_for(row: &Row, v: &Var) -> LinExpr {
    // a*v + rest = 0  =>  v = -rest / a
    let a = row.expr.coeff(v);
    let mut rest = row.expr.clone();
    rest.add_term(v.clone(), -a.clone());
    rest.scale(&(-Rational::one() / a))
}

/// Substitutes away `v` using an equality mentioning it, if there is one.
fn substitute_eq(rows: &[Row], v: &Var) -> Option<Vec<Row>> {
    let pos = rows
        .iter()
        .position(|r| r.kind == Kind::Eq && r.expr.mentions(v))?;
    let sol = solve_for(&rows[pos], v);
    Some(
        rows.iter()
            .enumerate()
            .filter(|(i, _)| *i != pos)
            .map(|(_, r)| Row {
                expr: r.expr.substitute(v, &sol),
                kind: r.kind,
            })
            .collect(),
    )
}

/// Rows tagged with the indices of the input rows they combine.
type Traced = Vec<(Row, BTreeSet<usize>)>;

/// One Fourier-Motzkin step on a variable no equality mentions. A combination
/// of more than `steps + 1` input rows, `steps` counting this one, is implied
/// by the others and dropped.
fn fm_step(rows: Traced, v: &Var, steps: usize) -> Option<Traced> {
    let mut lower = Vec::new();
    let mut upper = Vec::new();
    let mut keep = Vec::new();
    for (r, anc) in rows {
        let k = r.expr.coeff(v);
        if k.is_positive() {
            lower.push((k, r, anc));
        } else if k.is_negative() {
            upper.push((-k, r, anc));
        } else {
            keep.push((r, anc));
        }
    }
    for (kl, l, la) in &lower {
        for (ku, u, ua) in &upper {
            let anc: BTreeSet<usize> = la.union(ua).copied().collect();
            if anc.len() > steps + 1 {
                continue;
            }
            // ku*l + kl*u cancels v
            let expr = &l.expr.scale(ku) + &u.expr.scale(kl);
            let kind = if l.kind == Kind::Gt || u.kind == Kind::Gt {
                Kind::Gt
            } else {
                Kind::Ge
            };
            keep.push((Row { expr, kind }, anc));
        }
    }
    simplify_tagged(keep)
}

fn trace(rows: Vec<Row>) -> Traced {
    rows.into_iter()
        .enumerate()
        .map(|(i, r)| (r, BTreeSet::from([i])))
        .collect()
}

fn choose_var(rows: &[Row], candidates: &BTreeSet<Var>) -> Option<Var> {
    if let Some(v) = rows
        .iter()
        .filter(|r| r.kind == Kind::Eq)
        .flat_map(|r| r.expr.vars())
        .find(|v| candidates.contains(*v))
    {
        return Some(v.clone());
    }
    candidates
        .iter()
        .min_by_key(|v| {
            let (mut pos, mut neg) = (0usize, 0usize);
            for r in rows {
                let k = r.expr.coeff(v);
                if k.is_positive() {
                    pos += 1;
                } else if k.is_negative() {
                    neg += 1;
                }
            }
            (pos * neg) as isize - (pos + neg) as isize
        })
        .cloned()
}

/// Projects a row set onto `keep`, `None` if unsatisfiable.
pub(crate) fn project_rows(rows: Vec<Row>, keep: &BTreeSet<Var>) -> Simplified {
    let mut rows = trace(simplify(rows)?);
    let mut steps = 0;
    loop {
        let plain: Vec<Row> = rows.iter().map(|(r, _)| r.clone()).collect();
        let todo: BTreeSet<Var> = plain
            .iter()
            .flat_map(|r| r.expr.vars())
            .filter(|v| !keep.contains(*v))
            .cloned()
            .collect();
        let Some(v) = choose_var(&plain, &todo) else {
            return Some(plain);
        };
        if let Some(rest) = substitute_eq(&plain, &v) {
            // the substituted system is equivalent, so tracing restarts from it
            rows = trace(simplify(rest)?);
            steps = 0;
        } else {
            steps += 1;
            rows = fm_step(rows, &v, steps)?;
        }
    }
}

pub(crate) fn rows_satisfiable(rows: Vec<Row>) -> bool {
    project_rows(rows, &BTreeSet::new()).is_some()
}

pub fn is_satisfiable(c: &Constraint) -> bool {
    rows_satisfiable(rows_of(c))
}

/// Existential projection onto `keep`; unsatisfiable input yields [`Constraint::falsum`].
pub fn project(c: &Constraint, keep: &BTreeSet<Var>) -> Constraint {
    match project_rows(rows_of(c), keep) {
        Some(rows) => constraint_of(&rows),
        None => Constraint::falsum(),
    }
}

fn negated_rows(a: &AtomicConstraint) -> Vec<Row> {
    a.negate().iter().map(Row::from_atomic).collect()
}

pub(crate) fn rows_entail(rows: &[Row], a: &AtomicConstraint) -> bool {
    negated_rows(a).into_iter().all(|neg| {
        let mut sys = rows.to_vec();
        sys.push(neg);
        !rows_satisfiable(sys)
    })
}

/// Every rational solution of `c1` satisfies `c2`.
pub fn entails(c1: &Constraint, c2: &AtomicConstraint) -> bool {
    rows_entail(&rows_of(c1), c2)
}

pub fn entails_all(c1: &Constraint, c2: &Constraint) -> bool {
    let rows = rows_of(c1);
    c2.iter().all(|a| rows_entail(&rows, a))
}

pub fn equivalent(c1: &Constraint, c2: &Constraint) -> bool {
    entails_all(c1, c2) && entails_all(c2, c1)
}

/// Canonical syntactic form: coprime integer coefficients, relations among
/// `>=`, `>` and `=`, parallel conjuncts merged, duplicates and ground truths
/// removed. Trivial falsity collapses to [`Constraint::falsum`].
pub fn normalize(c: &Constraint) -> Constraint {
    match simplify(rows_of(c)) {
        Some(rows) => constraint_of(&rows),
        None => Constraint::falsum(),
    }
}

/// Normal form of a single atomic constraint, `None` when it is ground.
pub fn normalize_atomic(a: &AtomicConstraint) -> Option<AtomicConstraint> {
    let mut rows = simplify(vec![Row::from_atomic(a)])?;
    (rows.len() == 1).then(|| rows.remove(0).to_atomic())
}

/// Strict inequalities replaced by their closure.
pub fn relax(c: &Constraint) -> Constraint {
    c.iter()
        .map(|a| {
            let rel = match a.rel {
                Rel::Lt => Rel::Le,
                Rel::Gt => Rel::Ge,
                r => r,
            };
            AtomicConstraint::new(a.expr.clone(), rel)
        })
        .collect()
}

/// [`normalize`], then drops every conjunct entailed by the remaining ones.
pub fn remove_redundant(c: &Constraint) -> Constraint {
    let Some(mut rows) = simplify(rows_of(c)) else {
        return Constraint::falsum();
    };
    if !rows_satisfiable(rows.clone()) {
        return Constraint::falsum();
    }
    let mut i = 0;
    while i < rows.len() {
        let rest: Vec<Row> = rows
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, r)| r.clone())
            .collect();
        if rows_entail(&rest, &rows[i].to_atomic()) {
            rows.remove(i);
        } else {
            i += 1;
        }
    }
    constraint_of(&rows)
}
