//! Random graphs, kitchens and independent oracles shared by the
//! integration tests.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

use foonkit::{
    unit_equals, Descriptor, FoonGraph, FunctionalUnit, Kitchen, MotionNode, ObjectNode,
    RelationKind, TaskTree,
};
use rand::seq::SliceRandom;
use rand::Rng;

pub const NAMES: &[&str] = &[
    "egg", "milk", "bowl", "pan", "flour", "sugar", "butter", "olive oil", "knife",
    "cutting board", "onion", "tomato",
];
pub const STATES: &[&str] = &[
    "raw", "beaten", "mixed", "whole", "sliced", "clean", "dirty", "melted", "chopped",
    "in bowl", "on cutting board",
];
pub const MOTIONS: &[&str] = &["pour", "mix", "slice", "place", "stir", "wash", "cook", "add"];

// Labels with odd but legal characters for parser fuzzing.
pub const ODD_NAMES: &[&str] = &[
    "crème fraîche", "jalapeño", "salt & pepper", "half-and-half", "7-up", "pão de queijo",
    "a.b", "egg (large)", "x", "ü",
];

pub fn random_node<R: Rng>(rng: &mut R, names: &[&str]) -> ObjectNode {
    let mut node = ObjectNode::new(names.choose(rng).unwrap());
    for _ in 0..rng.gen_range(0..=2) {
        node.add_state(STATES.choose(rng).unwrap());
    }
    if rng.gen_bool(0.2) {
        for _ in 0..rng.gen_range(1..=2) {
            node.add_ingredient(NAMES.choose(rng).unwrap());
        }
    }
    if rng.gen_bool(0.25) {
        let kind = *[RelationKind::In, RelationKind::On, RelationKind::Under]
            .choose(rng)
            .unwrap();
        node = node.with_relation(kind, names.choose(rng).unwrap());
    }
    node
}

fn push_distinct(list: &mut Vec<ObjectNode>, node: ObjectNode) {
    if !list.iter().any(|n| n.key() == node.key()) {
        list.push(node);
    }
}

pub fn random_motion<R: Rng>(rng: &mut R) -> MotionNode {
    let m = MotionNode::new(MOTIONS.choose(rng).unwrap());
    if rng.gen_bool(0.5) {
        let a = rng.gen_range(0..300u32);
        let b = a + rng.gen_range(0..60u32);
        m.with_times(Some(&format!("{}:{:02}", a / 60, a % 60)), Some(&format!("{b}")))
    } else {
        m
    }
}

pub fn random_unit<R: Rng>(rng: &mut R, names: &[&str]) -> FunctionalUnit {
    let mut inputs = Vec::new();
    for _ in 0..rng.gen_range(1..=3) {
        push_distinct(&mut inputs, random_node(rng, names));
    }
    let mut outputs = Vec::new();
    for _ in 0..rng.gen_range(1..=2) {
        push_distinct(&mut outputs, random_node(rng, names));
    }
    FunctionalUnit::new(inputs, random_motion(rng), outputs)
}

/// Up to `max` pairwise distinct units.
pub fn random_units<R: Rng>(rng: &mut R, max: usize, names: &[&str]) -> Vec<FunctionalUnit> {
    let n = rng.gen_range(0..=max);
    let mut units: Vec<FunctionalUnit> = Vec::new();
    for _ in 0..n {
        let u = random_unit(rng, names);
        if !units.iter().any(|v| unit_equals(v, &u)) {
            units.push(u);
        }
    }
    units
}

/// A pair of graphs where roughly `share` of the second graph's units are
/// copies (with fresh timestamps) of units from the first.
pub fn random_pair<R: Rng>(rng: &mut R, max: usize, share: f64) -> (Vec<FunctionalUnit>, Vec<FunctionalUnit>) {
    let a = random_units(rng, max, NAMES);
    let mut b: Vec<FunctionalUnit> = Vec::new();
    for _ in 0..rng.gen_range(0..=max) {
        let u = if !a.is_empty() && rng.gen_bool(share) {
            let mut u = a.choose(rng).unwrap().clone();
            u.motion = u.motion.clone().with_times(Some("9:59"), None);
            u.inputs.shuffle(rng);
            u
        } else {
            random_unit(rng, NAMES)
        };
        if !b.iter().any(|v| unit_equals(v, &u)) {
            b.push(u);
        }
    }
    (a, b)
}

/// Brute-force count of a merge of two internally duplicate-free lists.
pub fn merged_count_oracle(a: &[FunctionalUnit], b: &[FunctionalUnit]) -> usize {
    let shared = a
        .iter()
        .flat_map(|x| b.iter().map(move |y| (x, y)))
        .filter(|(x, y)| unit_equals(x, y))
        .count();
    a.len() + b.len() - shared
}

/// Small descriptor pool so random units chain into each other.
pub fn descriptor_pool<R: Rng>(rng: &mut R, size: usize) -> Vec<ObjectNode> {
    let mut pool: Vec<ObjectNode> = Vec::new();
    while pool.len() < size {
        let mut node = ObjectNode::new(NAMES.choose(rng).unwrap());
        if rng.gen_bool(0.6) {
            node.add_state(STATES.choose(rng).unwrap());
        }
        if !pool.iter().any(|n| n.descriptor() == node.descriptor()) {
            pool.push(node);
        }
    }
    pool
}

pub struct RetrievalCase {
    pub graph: FoonGraph,
    pub kitchen: Kitchen,
    pub pool: Vec<Descriptor>,
}

/// A graph of up to `max_units` units over a shared pool of descriptors,
/// cycles allowed, with a random kitchen drawn from the pool.
pub fn retrieval_case<R: Rng>(rng: &mut R, max_units: usize) -> RetrievalCase {
    let size = rng.gen_range(4..=14);
    let pool = descriptor_pool(rng, size);
    let n = rng.gen_range(1..=max_units);
    let mut units: Vec<FunctionalUnit> = Vec::new();
    while units.len() < n {
        let mut inputs: Vec<ObjectNode> = Vec::new();
        for _ in 0..rng.gen_range(1..=3) {
            push_distinct(&mut inputs, pool.choose(rng).unwrap().clone());
        }
        let mut outputs: Vec<ObjectNode> = Vec::new();
        for _ in 0..rng.gen_range(1..=2) {
            push_distinct(&mut outputs, pool.choose(rng).unwrap().clone());
        }
        let u = FunctionalUnit::new(inputs, random_motion(rng), outputs);
        if !units.iter().any(|v| unit_equals(v, &u)) {
            units.push(u);
        }
    }
    let mut kitchen = Kitchen::default();
    for node in &pool {
        if rng.gen_bool(0.35) {
            kitchen.insert(node.descriptor());
        }
    }
    RetrievalCase {
        graph: FoonGraph::new(units),
        kitchen,
        pool: pool.iter().map(ObjectNode::descriptor).collect(),
    }
}

/// Exhaustive-subset oracle: the descriptors obtainable by executing some
/// subset of units in some order, starting from the kitchen.
///
/// `exec[S]` holds when the units of S can all be run in some order; that
/// is the case when some u in S can run last, i.e. `exec[S \ u]` and u's
/// inputs are among the kitchen and the outputs of `S \ u`.
pub fn obtainable_oracle(units: &[FunctionalUnit], kitchen: &Kitchen) -> BTreeSet<Descriptor> {
    assert!(units.len() <= 20, "oracle is exponential in the unit count");
    let mut ids: HashMap<Descriptor, usize> = HashMap::new();
    let mut all: Vec<Descriptor> = Vec::new();
    let mut id = |d: Descriptor, all: &mut Vec<Descriptor>| {
        let next = ids.len();
        *ids.entry(d.clone()).or_insert_with(|| {
            all.push(d);
            next
        })
    };
    let mut ins = Vec::new();
    let mut outs = Vec::new();
    for u in units {
        let mut bits = |nodes: &[ObjectNode], all: &mut Vec<Descriptor>| {
            nodes
                .iter()
                .fold(0u128, |acc, n| acc | 1u128 << id(n.descriptor(), all))
        };
        ins.push(bits(&u.inputs, &mut all));
        outs.push(bits(&u.outputs, &mut all));
    }
    let mut base = 0u128;
    for d in kitchen.items() {
        if let Some(&i) = ids.get(d) {
            base |= 1u128 << i;
        }
    }
    let n = units.len();
    let mut avail = vec![base; 1 << n];
    let mut exec = vec![false; 1 << n];
    exec[0] = true;
    let mut obtainable = base;
    for s in 1usize..1 << n {
        let low = s.trailing_zeros() as usize;
        avail[s] = avail[s & (s - 1)] | outs[low];
        let mut rest = s;
        while rest != 0 {
            let u = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let without = s & !(1 << u);
            if exec[without] && ins[u] & !avail[without] == 0 {
                exec[s] = true;
                break;
            }
        }
        if exec[s] {
            obtainable |= avail[s];
        }
    }
    let mut out: BTreeSet<Descriptor> = all
        .into_iter()
        .enumerate()
        .filter(|(i, _)| obtainable >> i & 1 == 1)
        .map(|(_, d)| d)
        .collect();
    out.extend(kitchen.items().iter().cloned());
    out
}

/// Replays the tree in execution order against its kitchen. Returns an error
/// naming the first unit that needs something unavailable.
pub fn replay(tree: &TaskTree) -> Result<BTreeSet<Descriptor>, String> {
    let order = foonkit::topological_order(tree).map_err(|e| e.to_string())?;
    let mut have: BTreeSet<Descriptor> = tree.kitchen.items().clone();
    for u in order {
        for i in &u.inputs {
            if !have.contains(&i.descriptor()) {
                return Err(format!("{} needs {}", u.motion.label, i.descriptor()));
            }
        }
        have.extend(u.outputs.iter().map(ObjectNode::descriptor));
    }
    Ok(have)
}

/// True when every unit of the tree feeds the goal through some chain of
/// producer/consumer links inside the tree.
pub fn all_units_feed_goal(tree: &TaskTree) -> bool {
    let Some(goal) = &tree.goal else {
        return tree.is_empty();
    };
    let units = tree.graph.units();
    let mut needed: BTreeSet<Descriptor> = BTreeSet::from([goal.clone()]);
    let mut used = vec![false; units.len()];
    loop {
        let mut changed = false;
        for (i, u) in units.iter().enumerate() {
            if !used[i] && u.outputs.iter().any(|o| needed.contains(&o.descriptor())) {
                used[i] = true;
                changed = true;
                needed.extend(u.inputs.iter().map(ObjectNode::descriptor));
            }
        }
        if !changed {
            break;
        }
    }
    used.into_iter().all(|u| u)
}

/// Text-book sample mean and standard deviation (n - 1).
pub fn textbook_mean_std(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let ss: f64 = x.iter().map(|v| (v - mean).powi(2)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

/// Synthetic recipe corpus: `recipes` subgraphs of about `per_recipe` units.
/// Each recipe prepares a few shared intermediates (identical units across
/// recipes) and then a private chain of steps.
pub fn synthetic_corpus<R: Rng>(rng: &mut R, recipes: usize, per_recipe: usize) -> Vec<FoonGraph> {
    let shared: Vec<FunctionalUnit> = (0..40)
        .map(|i| {
            FunctionalUnit::new(
                vec![
                    ObjectNode::new(&format!("base {i}")).with_state("whole"),
                    ObjectNode::new("knife"),
                ],
                MotionNode::new("chop"),
                vec![
                    ObjectNode::new(&format!("base {i}")).with_state("chopped"),
                    ObjectNode::new("knife"),
                ],
            )
        })
        .collect();
    (0..recipes)
        .map(|r| {
            let mut units: Vec<FunctionalUnit> = shared.choose_multiple(rng, 5).cloned().collect();
            let mut current = ObjectNode::new(&format!("dish {r}")).with_state("step 0");
            units.push(FunctionalUnit::new(
                vec![
                    units[0].outputs[0].clone(),
                    units[1].outputs[0].clone(),
                    ObjectNode::new("bowl"),
                ],
                MotionNode::new("mix"),
                vec![current.clone(), ObjectNode::new("bowl")],
            ));
            let mut step = 1;
            while units.len() < per_recipe {
                let next = ObjectNode::new(&format!("dish {r}")).with_state(&format!("step {step}"));
                let extra = units[rng.gen_range(2..5)].outputs[0].clone();
                units.push(FunctionalUnit::new(
                    vec![current, extra, ObjectNode::new("pan")],
                    MotionNode::new(MOTIONS.choose(rng).unwrap()),
                    vec![next.clone(), ObjectNode::new("pan")],
                ));
                current = next;
                step += 1;
            }
            FoonGraph::new(units)
        })
        .collect()
}

pub fn synthetic_kitchen() -> Kitchen {
    let mut k: Kitchen = (0..40)
        .map(|i| Descriptor::new(&format!("base {i}"), ["whole"], []))
        .collect();
    for tool in ["knife", "bowl", "pan"] {
        k.insert(Descriptor::named(tool));
    }
    k
}
