//! Predicate dependency graph.

use std::collections::{BTreeSet, HashMap};

use indexmap::{IndexMap, IndexSet};
use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

use crate::ast::{Program, FALSE};

/// Edges `(p, q)` for every clause with head `p` calling `q`. Successors are
/// kept in discovery order: clause order, then left to right in each body.
#[derive(Clone, Debug)]
pub struct PredDepGraph {
    succ: IndexMap<String, IndexSet<String>>,
    backward: BTreeSet<(String, String)>,
}

pub fn build_pdg(p: &Program) -> PredDepGraph {
    build_pdg_from(p, FALSE)
}

/// Graph whose backward edges come from a depth-first search rooted at `root`.
pub fn build_pdg_from(p: &Program, root: &str) -> PredDepGraph {
    let mut succ: IndexMap<String, IndexSet<String>> = IndexMap::new();
    for (pred, _) in p.preds() {
        succ.insert(pred.to_string(), IndexSet::new());
    }
    for c in p.clauses() {
        let out = succ.get_mut(&c.head.pred).expect("head is in the predicate table");
        for a in &c.body {
            out.insert(a.pred.clone());
        }
    }
    let backward = dfs_backward(&succ, root);
    PredDepGraph { succ, backward }
}

#[derive(Clone, Copy, PartialEq)]
enum Mark {
    Open,
    Done,
}

fn dfs_backward(succ: &IndexMap<String, IndexSet<String>>, root: &str) -> BTreeSet<(String, String)> {
    let mut backward = BTreeSet::new();
    let Some(start) = succ.get_index_of(root) else {
        return backward;
    };
    let mut mark: HashMap<usize, Mark> = HashMap::new();
    let mut stack: Vec<(usize, usize)> = vec![(start, 0)];
    mark.insert(start, Mark::Open);
    while let Some(top) = stack.last_mut() {
        let (node, next) = *top;
        top.1 += 1;
        let (name, out) = succ.get_index(node).expect("valid index");
        if let Some(q) = out.get_index(next) {
            let qi = succ.get_index_of(q.as_str()).expect("callee is a node");
            match mark.get(&qi) {
                Some(Mark::Open) => {
                    backward.insert((name.clone(), q.clone()));
                }
                Some(Mark::Done) => {}
                None => {
                    mark.insert(qi, Mark::Open);
                    stack.push((qi, 0));
                }
            }
        } else {
            mark.insert(node, Mark::Done);
            stack.pop();
        }
    }
    backward
}

impl PredDepGraph {
    pub fn nodes(&self) -> impl Iterator<Item = &str> {
        self.succ.keys().map(String::as_str)
    }

    pub fn edges(&self) -> impl Iterator<Item = (&str, &str)> {
        self.succ
            .iter()
            .flat_map(|(p, qs)| qs.iter().map(move |q| (p.as_str(), q.as_str())))
    }

    pub fn successors(&self, p: &str) -> impl Iterator<Item = &str> {
        self.succ.get(p).into_iter().flatten().map(String::as_str)
    }

    pub fn has_edge(&self, p: &str, q: &str) -> bool {
        self.succ.get(p).is_some_and(|qs| qs.contains(q))
    }

    pub fn backward(&self) -> &BTreeSet<(String, String)> {
        &self.backward
    }

    /// Predicates at the end of some backward edge.
    pub fn backward_targets(&self) -> BTreeSet<String> {
        self.backward.iter().map(|(_, q)| q.clone()).collect()
    }

    /// Predicates reachable from `root`, including `root` when it is a node.
    pub fn reachable_from(&self, root: &str) -> IndexSet<String> {
        let mut seen = IndexSet::new();
        if !self.succ.contains_key(root) {
            return seen;
        }
        let mut todo = vec![root.to_string()];
        while let Some(p) = todo.pop() {
            if seen.insert(p.clone()) {
                todo.extend(self.successors(&p).map(str::to_string));
            }
        }
        seen
    }

    /// Strongly connected components, callees before callers. The flag tells
    /// whether the component contains a cycle.
    pub fn sccs(&self) -> Vec<(Vec<String>, bool)> {
        let mut g: DiGraph<&str, ()> = DiGraph::new();
        let idx: IndexMap<&str, NodeIndex> = self.succ.keys().map(|p| (p.as_str(), g.add_node(p.as_str()))).collect();
        for (p, q) in self.edges() {
            g.add_edge(idx[p], idx[q], ());
        }
        tarjan_scc(&g)
            .into_iter()
            .map(|comp| {
                let mut names: Vec<String> = comp.iter().map(|&n| g[n].to_string()).collect();
                names.sort_by_key(|n| self.succ.get_index_of(n.as_str()));
                let cyclic = names.len() > 1 || self.has_edge(&names[0], &names[0]);
                (names, cyclic)
            })
            .collect()
    }
}
