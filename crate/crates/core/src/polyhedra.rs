//! Closed convex polyhedra in constraint form.
//!
//! Non-empty values are kept canonical: implicit equalities are made
//! explicit and reduced (pivoting on the last dimension first), pivots are
//! substituted out of the inequalities, and redundant inequalities are
//! dropped. Two canonical polyhedra over the same dimensions are equal as
//! sets exactly when they are structurally equal.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::ast::{AtomicConstraint, Constraint, LinExpr, Rational, Var};
use crate::lincon::{self, Kind, Row};
use crate::print::fact_atomic_to_string;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("dimension mismatch: {left:?} vs {right:?}")]
    DimensionMismatch { left: Vec<Var>, right: Vec<Var> },
    #[error("variable {0} is not a dimension of the polyhedron")]
    ForeignVariable(Var),
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Polyhedron {
    dims: Vec<Var>,
    /// `None` is the empty polyhedron.
    constr: Option<Constraint>,
}

impl Polyhedron {
    pub fn universe(dims: Vec<Var>) -> Self {
        Polyhedron {
            dims,
            constr: Some(Constraint::truth()),
        }
    }

    pub fn empty(dims: Vec<Var>) -> Self {
        Polyhedron { dims, constr: None }
    }

    /// Closure of the solution set of `c`; strict inequalities are relaxed.
    pub fn from_constraint(dims: Vec<Var>, c: &Constraint) -> Result<Self, PolyError> {
        let known: BTreeSet<&Var> = dims.iter().collect();
        if let Some(v) = c.vars().into_iter().find(|v| !known.contains(v)) {
            return Err(PolyError::ForeignVariable(v));
        }
        let constr = canonicalize(&dims, lincon::rows_of(&lincon::relax(c)));
        Ok(Polyhedron { dims, constr })
    }

    pub fn dims(&self) -> &[Var] {
        &self.dims
    }

    pub fn is_empty(&self) -> bool {
        self.constr.is_none()
    }

    pub fn is_universe(&self) -> bool {
        self.constr.as_ref().is_some_and(|c| c.is_true())
    }

    pub fn constraint(&self) -> Option<&Constraint> {
        self.constr.as_ref()
    }

    /// Number of half-spaces, counting an equality as two.
    pub fn halfspace_count(&self) -> usize {
        self.constr.as_ref().map_or(0, |c| {
            c.iter()
                .map(|a| if a.rel == crate::ast::Rel::Eq { 2 } else { 1 })
                .sum()
        })
    }

    pub fn contains_point(&self, point: &BTreeMap<Var, Rational>) -> bool {
        match &self.constr {
            None => false,
            Some(c) => c.holds_at(point).unwrap_or(false),
        }
    }

    /// The constraint with dimension `i` renamed to `args[i]`; `None` when empty.
    pub fn instantiate(&self, args: &[Var]) -> Option<Constraint> {
        let map: BTreeMap<Var, Var> = self.dims.iter().cloned().zip(args.iter().cloned()).collect();
        self.constr.as_ref().map(|c| c.rename(&map))
    }

    fn check_dims(&self, other: &Polyhedron) -> Result<(), PolyError> {
        if self.dims == other.dims {
            Ok(())
        } else {
            Err(PolyError::DimensionMismatch {
                left: self.dims.clone(),
                right: other.dims.clone(),
            })
        }
    }

    /// Whether every point of `other` lies in `self`.
    pub fn includes(&self, other: &Polyhedron) -> Result<bool, PolyError> {
        self.check_dims(other)?;
        Ok(match (&self.constr, &other.constr) {
            (_, None) => true,
            (None, Some(_)) => false,
            (Some(mine), Some(theirs)) => lincon::entails_all(theirs, mine),
        })
    }

    pub fn meet(&self, other: &Polyhedron) -> Result<Polyhedron, PolyError> {
        self.check_dims(other)?;
        let constr = match (&self.constr, &other.constr) {
            (Some(a), Some(b)) => canonicalize(&self.dims, lincon::rows_of(&a.and(b))),
            _ => None,
        };
        Ok(Polyhedron {
            dims: self.dims.clone(),
            constr,
        })
    }

    /// Convex hull: project `x = y + z`, `y` in `sigma * self`, `z` in
    /// `(1 - sigma) * other`, `0 =< sigma =< 1` onto `x`.
    pub fn hull(&self, other: &Polyhedron) -> Result<Polyhedron, PolyError> {
        self.check_dims(other)?;
        let (a, b) = match (&self.constr, &other.constr) {
            (None, _) => return Ok(other.clone()),
            (_, None) => return Ok(self.clone()),
            (Some(a), Some(b)) => (a, b),
        };
        let sigma = Var::new("#sigma");
        let y: Vec<Var> = (0..self.dims.len()).map(|i| Var::new(format!("#y{i}"))).collect();
        let sigma_e = LinExpr::var(sigma.clone());
        let rest_e = &LinExpr::constant(Rational::one()) - &sigma_e;
        let left: BTreeMap<Var, LinExpr> = self
            .dims
            .iter()
            .zip(&y)
            .map(|(x, yi)| (x.clone(), LinExpr::var(yi.clone())))
            .collect();
        let right: BTreeMap<Var, LinExpr> = self
            .dims
            .iter()
            .zip(&y)
            .map(|(x, yi)| (x.clone(), &LinExpr::var(x.clone()) - &LinExpr::var(yi.clone())))
            .collect();
        let mut rows = Vec::new();
        for r in lincon::rows_of(a) {
            rows.push(Row {
                expr: homogenize(&r.expr, &left, &sigma_e),
                kind: r.kind,
            });
        }
        for r in lincon::rows_of(b) {
            rows.push(Row {
                expr: homogenize(&r.expr, &right, &rest_e),
                kind: r.kind,
            });
        }
        rows.push(Row {
            expr: sigma_e.clone(),
            kind: Kind::Ge,
        });
        rows.push(Row {
            expr: rest_e,
            kind: Kind::Ge,
        });
        let keep: BTreeSet<Var> = self.dims.iter().cloned().collect();
        let constr = lincon::project_rows(rows, &keep).and_then(|rows| canonicalize(&self.dims, rows));
        Ok(Polyhedron {
            dims: self.dims.clone(),
            constr,
        })
    }

    /// Standard widening: the half-spaces of `self` that `other` satisfies.
    pub fn widen(&self, other: &Polyhedron) -> Result<Polyhedron, PolyError> {
        self.check_dims(other)?;
        let (mine, theirs) = match (&self.constr, &other.constr) {
            (None, _) => return Ok(other.clone()),
            (_, None) => return Ok(self.clone()),
            (Some(a), Some(b)) => (a, b),
        };
        let target = lincon::rows_of(theirs);
        let kept: Vec<Row> = halfspaces(mine)
            .filter(|r| lincon::rows_entail(&target, &r.to_atomic()))
            .collect();
        Ok(Polyhedron {
            dims: self.dims.clone(),
            constr: canonicalize(&self.dims, kept),
        })
    }

    /// Widening up to thresholds: thresholds satisfied by both operands survive.
    pub fn widen_upto(
        &self,
        other: &Polyhedron,
        thresholds: &[AtomicConstraint],
    ) -> Result<Polyhedron, PolyError> {
        let widened = self.widen(other)?;
        let known: BTreeSet<&Var> = self.dims.iter().collect();
        let mut retained = Constraint::truth();
        for t in thresholds {
            if let Some(v) = t.expr.vars().find(|v| !known.contains(v)) {
                return Err(PolyError::ForeignVariable(v.clone()));
            }
            let closed = lincon::relax(&Constraint::from(vec![t.clone()]));
            let t = &closed.conjuncts[0];
            let holds = |p: &Polyhedron| p.constr.as_ref().map_or(true, |c| lincon::entails(c, t));
            if holds(self) && holds(other) {
                retained.push(t.clone());
            }
        }
        if retained.is_true() {
            return Ok(widened);
        }
        let bound = Polyhedron::from_constraint(self.dims.clone(), &retained)?;
        widened.meet(&bound)
    }

    /// Bracketed listing, e.g. `[1*A>=0,-1*A>= -50,1*B=50]`; `None` when empty.
    pub fn listing(&self) -> Option<String> {
        self.constr.as_ref().map(|c| {
            let parts: Vec<String> = c.iter().map(fact_atomic_to_string).collect();
            format!("[{}]", parts.join(","))
        })
    }
}

impl fmt::Debug for Polyhedron {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.listing() {
            Some(s) => write!(f, "{:?}{}", self.dims, s),
            None => write!(f, "{:?}empty", self.dims),
        }
    }
}

/// `sum k_i * image(x_i) + constant * scale`.
fn homogenize(e: &LinExpr, image: &BTreeMap<Var, LinExpr>, scale: &LinExpr) -> LinExpr {
    let mut out = scale.scale(e.constant_term());
    for (v, k) in e.terms() {
        out = &out + &image[v].scale(k);
    }
    out
}

fn halfspaces(c: &Constraint) -> impl Iterator<Item = Row> + '_ {
    lincon::rows_of(c).into_iter().flat_map(|r| match r.kind {
        Kind::Eq => vec![
            Row {
                expr: -&r.expr,
                kind: Kind::Ge,
            },
            Row {
                expr: r.expr,
                kind: Kind::Ge,
            },
        ],
        _ => vec![r],
    })
}

fn sort_key(dims: &[Var], a: &AtomicConstraint) -> (usize, usize, bool, Vec<Rational>, Rational) {
    let coeffs: Vec<Rational> = dims.iter().map(|d| a.expr.coeff(d)).collect();
    let lead = coeffs.iter().position(|k| !k.is_zero()).unwrap_or(dims.len());
    let negative_lead = coeffs.get(lead).is_some_and(|k| k.is_negative());
    let nnz = coeffs.iter().filter(|k| !k.is_zero()).count();
    let flipped: Vec<Rational> = coeffs.iter().map(|k| -k).collect();
    (lead, nnz, negative_lead, flipped, a.expr.constant_term().clone())
}

/// Canonical constraint for a closed row system, `None` if empty.
fn canonicalize(dims: &[Var], rows: Vec<Row>) -> Option<Constraint> {
    let rows: Vec<Row> = rows
        .into_iter()
        .map(|r| Row {
            expr: r.expr,
            kind: if r.kind == Kind::Gt { Kind::Ge } else { r.kind },
        })
        .collect();
    let rows = lincon::simplify(rows)?;
    if !lincon::rows_satisfiable(rows.clone()) {
        return None;
    }
    let mut eqs: Vec<LinExpr> = Vec::new();
    let mut ineqs: Vec<LinExpr> = Vec::new();
    for r in &rows {
        match r.kind {
            Kind::Eq => eqs.push(r.expr.clone()),
            _ => {
                let mut probe = rows.clone();
                probe.push(Row {
                    expr: r.expr.clone(),
                    kind: Kind::Gt,
                });
                if lincon::rows_satisfiable(probe) {
                    ineqs.push(r.expr.clone());
                } else {
                    eqs.push(r.expr.clone());
                }
            }
        }
    }

    // reduced echelon form, pivoting on the last dimension first
    let mut pivots: Vec<(Var, LinExpr)> = Vec::new();
    for d in dims.iter().rev() {
        let Some(i) = eqs.iter().position(|e| e.mentions(d)) else {
            continue;
        };
        let row = eqs.remove(i);
        let k = row.coeff(d);
        let mut sol = row.scale(&(-Rational::one() / &k));
        sol.add_term(d.clone(), Rational::one());
        // d = sol
        for e in eqs.iter_mut() {
            *e = e.substitute(d, &sol);
        }
        for (_, s) in pivots.iter_mut() {
            *s = s.substitute(d, &sol);
        }
        pivots.push((d.clone(), sol));
    }
    debug_assert!(eqs.iter().all(|e| e.is_constant() && e.constant_term().is_zero()));

    let mut ineq_rows: Vec<Row> = ineqs
        .into_iter()
        .map(|mut e| {
            for (d, sol) in &pivots {
                e = e.substitute(d, sol);
            }
            Row {
                expr: e,
                kind: Kind::Ge,
            }
        })
        .collect();
    ineq_rows = lincon::simplify(ineq_rows).expect("satisfiable system");

    let eq_rows: Vec<Row> = pivots
        .iter()
        .map(|(d, sol)| Row {
            expr: &LinExpr::var(d.clone()) - sol,
            kind: Kind::Eq,
        })
        .collect();
    let eq_rows = lincon::simplify(eq_rows).expect("satisfiable system");

    let mut i = 0;
    while i < ineq_rows.len() {
        let candidate = ineq_rows[i].to_atomic();
        let others: Vec<Row> = eq_rows
            .iter()
            .chain(ineq_rows.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, r)| r))
            .cloned()
            .collect();
        if lincon::rows_entail(&others, &candidate) {
            ineq_rows.remove(i);
        } else {
            i += 1;
        }
    }

    let mut out: Vec<AtomicConstraint> = ineq_rows
        .iter()
        .chain(eq_rows.iter())
        .map(Row::to_atomic)
        .collect();
    out.sort_by_cached_key(|a| sort_key(dims, a));
    Some(Constraint::from(out))
}
