use crate::ast::{Atom, Clause, Constraint, Program};

pub fn ans_name(pred: &str) -> String {
    format!("{pred}_ans")
}

pub fn query_name(pred: &str) -> String {
    format!("{pred}_query")
}

fn with_pred(a: &Atom, pred: String) -> Atom {
    Atom::new(pred, a.args.clone())
}

/// Query-answer program for `goal` under a left-to-right computation rule:
/// answer clauses first, then query clauses, then the seed `goal_query`.
pub fn query_answer(p: &Program, goal: &Atom) -> Program {
    let mut answers = Vec::new();
    let mut queries = Vec::new();
    for c in p.clauses() {
        let call = with_pred(&c.head, query_name(&c.head.pred));
        let solved: Vec<Atom> = c.body.iter().map(|b| with_pred(b, ans_name(&b.pred))).collect();
        let mut body = vec![call.clone()];
        body.extend(solved.iter().cloned());
        answers.push(Clause::new(with_pred(&c.head, ans_name(&c.head.pred)), c.constr.clone(), body));
        for (i, b) in c.body.iter().enumerate() {
            let mut body = vec![call.clone()];
            body.extend_from_slice(&solved[..i]);
            let head = with_pred(b, query_name(&b.pred));
            queries.push(Clause::new(head, c.constr.clone(), body).canonical());
        }
    }
    let mut clauses = answers;
    clauses.extend(queries);
    clauses.push(Clause::fact(with_pred(goal, query_name(&goal.pred)), Constraint::truth()).canonical());
    Program::rebuild(clauses)
}
