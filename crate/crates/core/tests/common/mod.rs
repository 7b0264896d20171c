#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fmt::Write;
use std::path::PathBuf;

use hornchain::analyzer::concrete_eval;
use hornchain::ast::{AtomicConstraint, Constraint, Rational, Rel, Var};
use hornchain::{parse_program, Program};
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn fixture(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).unwrap()
}

pub fn fixture_program(name: &str) -> Program {
    parse_program(&fixture(name)).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

pub fn constraint(text: &str) -> Constraint {
    parse_program(&format!("p :- {text}.")).unwrap().clauses()[0]
        .constr
        .clone()
}

fn linear_term(rng: &mut ChaCha8Rng, vars: &[String]) -> String {
    let n = rng.gen_range(1..=2.min(vars.len()));
    let chosen: Vec<&String> = vars.choose_multiple(rng, n).collect();
    let mut out = String::new();
    for (i, v) in chosen.iter().enumerate() {
        let k: i64 = *[-2, -1, 1, 1, 2].choose(rng).unwrap();
        match (i, k) {
            (0, 1) => out.push_str(v),
            (0, -1) => write!(out, "-{v}").unwrap(),
            (0, _) => write!(out, "{k}*{v}").unwrap(),
            (_, 1) => write!(out, "+{v}").unwrap(),
            (_, -1) => write!(out, "-{v}").unwrap(),
            (_, k) if k > 0 => write!(out, "+{k}*{v}").unwrap(),
            (_, k) => write!(out, "-{}*{v}", -k).unwrap(),
        }
    }
    out
}

fn random_constraint(rng: &mut ChaCha8Rng, vars: &[String]) -> String {
    let c: i64 = rng.gen_range(-10..=10);
    if vars.len() >= 2 && rng.gen_bool(0.3) {
        // counter-style update between two variables
        let pick: Vec<&String> = vars.choose_multiple(rng, 2).collect();
        let d: i64 = rng.gen_range(-2..=2);
        return format!("{} = {}+{}", pick[0], pick[1], d).replace("+-", "-");
    }
    let rel = *["=<", ">=", "<", ">", "="].choose(rng).unwrap();
    format!("{} {rel} {c}", linear_term(rng, vars))
}

/// Source text of a random program with at most five predicates of arity at
/// most three, constants within [-10, 10], and one or two integrity constraints.
pub fn random_program_text(rng: &mut ChaCha8Rng) -> String {
    let npred = rng.gen_range(1..=5);
    let preds: Vec<(String, usize)> = (0..npred)
        .map(|i| (format!("p{i}"), rng.gen_range(0..=3)))
        .collect();
    let mut text = String::new();
    let clause = |rng: &mut ChaCha8Rng, head: Option<&(String, usize)>, allow_body: bool, text: &mut String| {
        let mut vars: Vec<String> = Vec::new();
        let mut next = 0;
        let mut fresh = |vars: &mut Vec<String>| {
            let v = format!("V{next}");
            next += 1;
            vars.push(v.clone());
            v
        };
        let head_text = match head {
            Some((name, n)) => {
                let args: Vec<String> = (0..*n).map(|_| fresh(&mut vars)).collect();
                if args.is_empty() {
                    name.clone()
                } else {
                    format!("{name}({})", args.join(","))
                }
            }
            None => "false".to_string(),
        };
        let mut items = Vec::new();
        let nbody = if allow_body { rng.gen_range(0..=2) } else { 0 };
        for _ in 0..nbody {
            let (name, n) = preds.choose(rng).unwrap();
            let args: Vec<String> = (0..*n).map(|_| fresh(&mut vars)).collect();
            items.push(if args.is_empty() {
                name.clone()
            } else {
                format!("{name}({})", args.join(","))
            });
        }
        if !vars.is_empty() {
            for _ in 0..rng.gen_range(0..=3) {
                items.push(random_constraint(rng, &vars));
            }
        }
        items.shuffle(rng);
        if items.is_empty() {
            writeln!(text, "{head_text}.").unwrap();
        } else {
            writeln!(text, "{head_text} :- {}.", items.join(", ")).unwrap();
        }
    };
    for (i, p) in preds.iter().enumerate() {
        if i == 0 || rng.gen_bool(0.5) {
            clause(rng, Some(p), false, &mut text);
        }
        for _ in 0..rng.gen_range(0..=2) {
            clause(rng, Some(p), true, &mut text);
        }
    }
    for _ in 0..rng.gen_range(1..=2) {
        let (name, n) = preds.choose(rng).unwrap();
        let mut vars = Vec::new();
        let args: Vec<String> = (0..*n).map(|i| format!("W{i}")).collect();
        vars.extend(args.iter().cloned());
        let mut items = vec![if args.is_empty() {
            name.clone()
        } else {
            format!("{name}({})", args.join(","))
        }];
        if !vars.is_empty() {
            for _ in 0..rng.gen_range(1..=2) {
                items.push(random_constraint(rng, &vars));
            }
        }
        if rng.gen_bool(0.3) {
            let (other, m) = preds.choose(rng).unwrap();
            let more: Vec<String> = (0..*m).map(|i| format!("U{i}")).collect();
            items.push(if more.is_empty() {
                other.clone()
            } else {
                format!("{other}({})", more.join(","))
            });
        }
        writeln!(text, "false :- {}.", items.join(", ")).unwrap();
    }
    text
}

pub fn random_program(rng: &mut ChaCha8Rng) -> Program {
    let text = random_program_text(rng);
    parse_program(&text).unwrap_or_else(|e| panic!("generator produced {e}:\n{text}"))
}

/// Depth used for the bounded derivability oracle.
pub const ORACLE_DEPTH: usize = 6;
/// Depth granted to the other side when a derivation appears on one side only.
pub const DEEP_DEPTH: usize = 18;

/// Bounded derivability of `g` in `p` matches that of `h` in `q`: each
/// derivation found within [`ORACLE_DEPTH`] rounds on one side has a
/// counterpart within [`DEEP_DEPTH`] rounds on the other.
pub fn derivability_agrees(p: &Program, g: &str, q: &Program, h: &str) -> Result<(), String> {
    let a = concrete_eval(p, g, ORACLE_DEPTH).derived_at;
    let b = concrete_eval(q, h, ORACLE_DEPTH).derived_at;
    match (a, b) {
        (Some(_), None) => match concrete_eval(q, h, DEEP_DEPTH).derived_at {
            Some(_) => Ok(()),
            None => Err(format!("{g} derivable at depth {} but {h} not within {DEEP_DEPTH}", a.unwrap())),
        },
        (None, Some(_)) => match concrete_eval(p, g, DEEP_DEPTH).derived_at {
            Some(_) => Ok(()),
            None => Err(format!("{h} derivable at depth {} but {g} not within {DEEP_DEPTH}", b.unwrap())),
        },
        _ => Ok(()),
    }
}

/// Conjuncts as rows `a . x <= b` (equalities contribute two rows) over `dims`.
pub fn rows(dims: &[Var], c: &Constraint) -> Vec<(Vec<Rational>, Rational)> {
    let mut out = Vec::new();
    for a in c {
        let coeffs: Vec<Rational> = dims.iter().map(|d| a.expr.coeff(d)).collect();
        let k = a.expr.constant_term().clone();
        // expr rel 0 with expr = coeffs.x + k
        let neg = |v: &Vec<Rational>| v.iter().map(|x| -x).collect::<Vec<_>>();
        match a.rel {
            Rel::Le | Rel::Lt => out.push((coeffs, -k)),
            Rel::Ge | Rel::Gt => out.push((neg(&coeffs), k)),
            Rel::Eq => {
                out.push((coeffs.clone(), -k.clone()));
                out.push((neg(&coeffs), k));
            }
        }
    }
    out
}

pub fn satisfies(rows: &[(Vec<Rational>, Rational)], x: &[Rational]) -> bool {
    rows.iter().all(|(a, b)| {
        let lhs: Rational = a.iter().zip(x).map(|(p, q)| p * q).sum();
        &lhs <= b
    })
}

fn solve(mut m: Vec<Vec<Rational>>, mut rhs: Vec<Rational>) -> Option<Vec<Rational>> {
    let n = m.len();
    for col in 0..n {
        let piv = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, piv);
        rhs.swap(col, piv);
        let p = m[col][col].clone();
        for j in 0..n {
            m[col][j] = &m[col][j] / &p;
        }
        rhs[col] = &rhs[col] / &p;
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for j in 0..n {
                    let v = &m[col][j] * &f;
                    m[r][j] = &m[r][j] - &v;
                }
                let v = &rhs[col] * &f;
                rhs[r] = &rhs[r] - &v;
            }
        }
    }
    Some(rhs)
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for first in 0..n {
        for mut rest in subsets(n, k - 1) {
            if rest.first().is_none_or(|&r| r > first) {
                rest.insert(0, first);
                out.push(rest);
            }
        }
    }
    out
}

/// Vertices of a bounded polyhedron by brute force over active row sets.
pub fn vertices(rows: &[(Vec<Rational>, Rational)], d: usize) -> Vec<Vec<Rational>> {
    let mut out: Vec<Vec<Rational>> = Vec::new();
    if d == 0 {
        if satisfies(rows, &[]) {
            out.push(Vec::new());
        }
        return out;
    }
    for set in subsets(rows.len(), d) {
        let m: Vec<Vec<Rational>> = set.iter().map(|&i| rows[i].0.clone()).collect();
        let rhs: Vec<Rational> = set.iter().map(|&i| rows[i].1.clone()).collect();
        if let Some(x) = solve(m, rhs) {
            if satisfies(rows, &x) && !out.contains(&x) {
                out.push(x);
            }
        }
    }
    out
}

/// All integer points of `[lo, hi]^d`.
pub fn grid(d: usize, lo: i64, hi: i64) -> Vec<Vec<Rational>> {
    let mut pts = vec![Vec::new()];
    for _ in 0..d {
        pts = pts
            .into_iter()
            .flat_map(|p: Vec<Rational>| {
                (lo..=hi).map(move |v| {
                    let mut q = p.clone();
                    q.push(int(v));
                    q
                })
            })
            .collect();
    }
    pts
}

pub fn point_map(dims: &[Var], x: &[Rational]) -> BTreeMap<Var, Rational> {
    dims.iter().cloned().zip(x.iter().cloned()).collect()
}

/// Random conjunction over `dims` with small integer data.
pub fn random_constraint_over(rng: &mut ChaCha8Rng, dims: &[Var], max: usize, strict: bool) -> Constraint {
    let mut out = Vec::new();
    for _ in 0..rng.gen_range(0..=max) {
        let mut terms = Vec::new();
        for d in dims {
            if rng.gen_bool(0.6) {
                let k = rng.gen_range(-2i64..=2);
                if k != 0 {
                    terms.push((d.clone(), int(k)));
                }
            }
        }
        if terms.is_empty() {
            continue;
        }
        let rels: &[Rel] = if strict {
            &[Rel::Le, Rel::Ge, Rel::Lt, Rel::Gt, Rel::Eq]
        } else {
            &[Rel::Le, Rel::Ge, Rel::Le, Rel::Ge, Rel::Eq]
        };
        let rel = *rels.choose(rng).unwrap();
        let expr = hornchain::ast::LinExpr::from_parts(terms, int(rng.gen_range(-6..=6)));
        out.push(AtomicConstraint::new(expr, rel));
    }
    Constraint::from(out)
}

/// Box `[-b, b]` on every dimension.
pub fn bounding_box(dims: &[Var], b: i64) -> Constraint {
    let mut out = Vec::new();
    for d in dims {
        let x = hornchain::ast::LinExpr::var(d.clone());
        out.push(AtomicConstraint::compare(&x, Rel::Le, &hornchain::ast::LinExpr::constant(int(b))));
        out.push(AtomicConstraint::compare(&x, Rel::Ge, &hornchain::ast::LinExpr::constant(int(-b))));
    }
    Constraint::from(out)
}
