//! Task-tree retrieval.
//!
//! Starting from the goal, candidate producer units are explored depth-first
//! in unit-list order; for each candidate all inputs are first checked against
//! the kitchen, and only the missing ones are expanded recursively. The search
//! backtracks to the next candidate when an input cannot be obtained.
//!
//! Nodes on the current search path are never re-expanded, which cuts cycles
//! through mutually producing units. Solved nodes are memoized for the rest of
//! the call. A failure is memoized only when it did not depend on a node that
//! was blocked higher up the path; otherwise a later query from a different
//! path could wrongly inherit it.

use std::collections::{BTreeSet, HashMap};
use std::rc::Rc;

use thiserror::Error;

use crate::graph::{Descriptor, FoonGraph, Kitchen, TaskTree};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RetrievalError {
    #[error("goal {0} is not produced by any unit and is not in the kitchen")]
    GoalNotInGraph(Descriptor),
    #[error("goal {0} cannot be reached from this kitchen")]
    UnreachableGoal(Descriptor),
}

type Subtree = Rc<BTreeSet<usize>>;

#[derive(Clone)]
enum Memo {
    Solved(Subtree),
    Failed,
}

struct Search<'a> {
    foon: &'a FoonGraph,
    in_kitchen: Vec<bool>,
    memo: HashMap<usize, Memo>,
    // descriptor id -> depth on the current path
    on_path: HashMap<usize, usize>,
}

/// Depth of the shallowest path node a failure depended on, or `None` when
/// the failure holds regardless of the path.
type Failure = Option<usize>;

impl<'a> Search<'a> {
    fn solve(&mut self, node: usize, depth: usize) -> Result<Subtree, Failure> {
        if self.in_kitchen[node] {
            return Ok(Rc::default());
        }
        match self.memo.get(&node) {
            Some(Memo::Solved(t)) => return Ok(t.clone()),
            Some(Memo::Failed) => return Err(None),
            None => {}
        }
        if let Some(&d) = self.on_path.get(&node) {
            return Err(Some(d));
        }
        self.on_path.insert(node, depth);
        let mut low: Option<usize> = None;
        let mut found = None;
        'candidates: for &unit in self.foon.producers_by_id(node) {
            let missing: Vec<usize> = self
                .foon
                .input_ids(unit)
                .iter()
                .copied()
                .filter(|&i| !self.in_kitchen[i])
                .collect();
            let mut units = BTreeSet::from([unit]);
            for input in missing {
                match self.solve(input, depth + 1) {
                    Ok(sub) => units.extend(sub.iter().copied()),
                    Err(f) => {
                        if let Some(d) = f {
                            low = Some(low.map_or(d, |l| l.min(d)));
                        }
                        continue 'candidates;
                    }
                }
            }
            found = Some(Rc::new(units));
            break;
        }
        self.on_path.remove(&node);
        match found {
            Some(tree) => {
                self.memo.insert(node, Memo::Solved(tree.clone()));
                Ok(tree)
            }
            None => match low {
                Some(d) if d < depth => Err(Some(d)),
                _ => {
                    self.memo.insert(node, Memo::Failed);
                    Err(None)
                }
            },
        }
    }
}

/// Extracts a task tree for `goal` that is executable from `kitchen`.
///
/// The tree holds only units the goal depends on, in universal-FOON order;
/// use [`crate::graph::topological_order`] for execution order.
pub fn retrieve(
    foon: &FoonGraph,
    goal: &Descriptor,
    kitchen: &Kitchen,
) -> Result<TaskTree, RetrievalError> {
    if kitchen.contains(goal) {
        return Ok(TaskTree::new(
            FoonGraph::empty(),
            Some(goal.clone()),
            kitchen.clone(),
        ));
    }
    let Some(goal_id) = foon.descriptor_id(goal).filter(|&id| !foon.producers_by_id(id).is_empty())
    else {
        return Err(RetrievalError::GoalNotInGraph(goal.clone()));
    };
    let in_kitchen = (0..foon.descriptor_count())
        .map(|id| kitchen.contains(foon.descriptor_at(id)))
        .collect();
    let mut search = Search {
        foon,
        in_kitchen,
        memo: HashMap::new(),
        on_path: HashMap::new(),
    };
    let units = search
        .solve(goal_id, 0)
        .map_err(|_| RetrievalError::UnreachableGoal(goal.clone()))?;
    let units = units.iter().map(|&u| foon.units()[u].clone()).collect();
    Ok(TaskTree::new(
        FoonGraph::new(units),
        Some(goal.clone()),
        kitchen.clone(),
    ))
}

/// Everything the kitchen can be turned into: the forward closure of the
/// kitchen under the graph's units, minus the kitchen itself.
pub fn reachable_goals(foon: &FoonGraph, kitchen: &Kitchen) -> BTreeSet<Descriptor> {
    let n = foon.descriptor_count();
    let mut available = vec![false; n];
    let mut missing: Vec<usize> = (0..foon.len()).map(|u| foon.input_ids(u).len()).collect();
    let mut queue: Vec<usize> = Vec::new();
    for (id, avail) in available.iter_mut().enumerate() {
        if kitchen.contains(foon.descriptor_at(id)) {
            *avail = true;
            queue.push(id);
        }
    }
    let mut reached = BTreeSet::new();
    let mut fire = |unit: usize, available: &mut Vec<bool>, queue: &mut Vec<usize>| {
        for &out in foon.output_ids(unit) {
            if !available[out] {
                available[out] = true;
                reached.insert(foon.descriptor_at(out).clone());
                queue.push(out);
            }
        }
    };
    let idle: Vec<usize> = (0..foon.len()).filter(|&u| missing[u] == 0).collect();
    for unit in idle {
        fire(unit, &mut available, &mut queue);
    }
    while let Some(id) = queue.pop() {
        for &unit in foon.consumers_by_id(id) {
            missing[unit] -= 1;
            if missing[unit] == 0 {
                fire(unit, &mut available, &mut queue);
            }
        }
    }
    reached
}
