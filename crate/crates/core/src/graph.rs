//! In-memory FOON model.
//!
//! A FOON is a bipartite graph of object nodes and motion nodes. Every motion
//! node sits inside exactly one [`FunctionalUnit`] together with the object
//! nodes it consumes and produces, so the graph is stored as an ordered list
//! of units plus a derived index from object descriptors to the units that
//! produce or consume them.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Lowercases, trims and collapses inner whitespace.
pub fn normalize_label(raw: &str) -> String {
    raw.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

fn is_normalized(s: &str) -> bool {
    !s.is_empty() && normalize_label(s) == s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RelationKind {
    In,
    On,
    Under,
}

impl RelationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RelationKind::In => "in",
            RelationKind::On => "on",
            RelationKind::Under => "under",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "in" => Some(RelationKind::In),
            "on" => Some(RelationKind::On),
            "under" => Some(RelationKind::Under),
            _ => None,
        }
    }
}

impl fmt::Display for RelationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Placement of an object relative to another one (the "motion identifier"
/// context). Recipe generation reads it to find sources and targets.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Relation {
    pub kind: RelationKind,
    pub target: String,
}

impl Relation {
    pub fn new(kind: RelationKind, target: &str) -> Self {
        Relation {
            kind,
            target: normalize_label(target),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ObjectNode {
    pub name: String,
    /// Ordered set; insertion order is kept for rendering and serialization.
    pub states: Vec<String>,
    pub ingredients: Vec<String>,
    pub relation: Option<Relation>,
}

fn push_unique(list: &mut Vec<String>, raw: &str) -> bool {
    let v = normalize_label(raw);
    if v.is_empty() || list.contains(&v) {
        return false;
    }
    list.push(v);
    true
}

impl ObjectNode {
    pub fn new(name: &str) -> Self {
        ObjectNode {
            name: normalize_label(name),
            ..Default::default()
        }
    }

    pub fn with_state(mut self, state: &str) -> Self {
        self.add_state(state);
        self
    }

    pub fn with_states<'a>(mut self, states: impl IntoIterator<Item = &'a str>) -> Self {
        for s in states {
            self.add_state(s);
        }
        self
    }

    pub fn with_ingredients<'a>(mut self, ingredients: impl IntoIterator<Item = &'a str>) -> Self {
        for i in ingredients {
            self.add_ingredient(i);
        }
        self
    }

    pub fn with_relation(mut self, kind: RelationKind, target: &str) -> Self {
        self.relation = Some(Relation::new(kind, target));
        self
    }

    /// Returns false when the (normalized) state was empty or already present.
    pub fn add_state(&mut self, state: &str) -> bool {
        push_unique(&mut self.states, state)
    }

    pub fn add_ingredient(&mut self, ingredient: &str) -> bool {
        push_unique(&mut self.ingredients, ingredient)
    }

    pub fn key(&self) -> NodeKey {
        NodeKey {
            descriptor: self.descriptor(),
            relation: self.relation.clone(),
        }
    }

    /// The node without its relation; this is what kitchens and retrieval
    /// match on.
    pub fn descriptor(&self) -> Descriptor {
        Descriptor {
            name: self.name.clone(),
            states: self.states.iter().cloned().collect(),
            ingredients: self.ingredients.iter().cloned().collect(),
        }
    }
}

impl PartialEq for ObjectNode {
    fn eq(&self, other: &Self) -> bool {
        node_equals(self, other)
    }
}

impl Eq for ObjectNode {}

impl std::hash::Hash for ObjectNode {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.key().hash(state)
    }
}

impl fmt::Display for ObjectNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)?;
        if !self.states.is_empty() {
            write!(f, " ({})", self.states.join(", "))?;
        }
        if !self.ingredients.is_empty() {
            write!(f, " {{{}}}", self.ingredients.join(","))?;
        }
        if let Some(rel) = &self.relation {
            write!(f, " [{} {}]", rel.kind, rel.target)?;
        }
        Ok(())
    }
}

/// Object identity without placement: name, state set and ingredient set.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Descriptor {
    pub name: String,
    pub states: BTreeSet<String>,
    pub ingredients: BTreeSet<String>,
}

impl Descriptor {
    pub fn new<'a>(
        name: &str,
        states: impl IntoIterator<Item = &'a str>,
        ingredients: impl IntoIterator<Item = &'a str>,
    ) -> Self {
        Descriptor {
            name: normalize_label(name),
            states: states
                .into_iter()
                .map(normalize_label)
                .filter(|s| !s.is_empty())
                .collect(),
            ingredients: ingredients
                .into_iter()
                .map(normalize_label)
                .filter(|s| !s.is_empty())
                .collect(),
        }
    }

    pub fn named(name: &str) -> Self {
        Descriptor::new(name, [], [])
    }
}

impl From<&ObjectNode> for Descriptor {
    fn from(node: &ObjectNode) -> Self {
        node.descriptor()
    }
}

impl fmt::Display for Descriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)?;
        if !self.states.is_empty() {
            let states: Vec<&str> = self.states.iter().map(String::as_str).collect();
            write!(f, " ({})", states.join(", "))?;
        }
        if !self.ingredients.is_empty() {
            let ings: Vec<&str> = self.ingredients.iter().map(String::as_str).collect();
            write!(f, " {{{}}}", ings.join(","))?;
        }
        Ok(())
    }
}

/// Order-insensitive canonical form of an [`ObjectNode`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeKey {
    pub descriptor: Descriptor,
    pub relation: Option<Relation>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct MotionNode {
    pub label: String,
    pub start_time: Option<String>,
    pub end_time: Option<String>,
}

impl MotionNode {
    pub fn new(label: &str) -> Self {
        MotionNode {
            label: normalize_label(label),
            start_time: None,
            end_time: None,
        }
    }

    pub fn with_times(mut self, start: Option<&str>, end: Option<&str>) -> Self {
        let clean = |t: Option<&str>| t.map(str::trim).filter(|t| !t.is_empty()).map(String::from);
        self.start_time = clean(start);
        self.end_time = clean(end);
        self
    }
}

/// Parses `ss`, `mm:ss` or `hh:mm:ss` (fractional seconds allowed) into seconds.
pub fn timestamp_seconds(ts: &str) -> Option<f64> {
    let mut total = 0.0;
    let parts: Vec<&str> = ts.trim().split(':').collect();
    if parts.len() > 3 {
        return None;
    }
    for part in parts {
        let v: f64 = part.trim().parse().ok()?;
        if !v.is_finite() || v < 0.0 {
            return None;
        }
        total = total * 60.0 + v;
    }
    Some(total)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FunctionalUnit {
    pub inputs: Vec<ObjectNode>,
    pub motion: MotionNode,
    pub outputs: Vec<ObjectNode>,
}

impl FunctionalUnit {
    pub fn new(inputs: Vec<ObjectNode>, motion: MotionNode, outputs: Vec<ObjectNode>) -> Self {
        FunctionalUnit {
            inputs,
            motion,
            outputs,
        }
    }

    /// Canonical key: timestamps are not part of unit identity.
    pub fn key(&self) -> UnitKey {
        let mut inputs: Vec<NodeKey> = self.inputs.iter().map(ObjectNode::key).collect();
        let mut outputs: Vec<NodeKey> = self.outputs.iter().map(ObjectNode::key).collect();
        inputs.sort();
        outputs.sort();
        UnitKey {
            motion: self.motion.label.clone(),
            inputs,
            outputs,
        }
    }
}

impl PartialEq for FunctionalUnit {
    fn eq(&self, other: &Self) -> bool {
        unit_equals(self, other)
    }
}

impl Eq for FunctionalUnit {}

impl std::hash::Hash for FunctionalUnit {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.key().hash(state)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UnitKey {
    pub motion: String,
    pub inputs: Vec<NodeKey>,
    pub outputs: Vec<NodeKey>,
}

/// Name, state set, ingredient set and relation all equal.
pub fn node_equals(a: &ObjectNode, b: &ObjectNode) -> bool {
    a.name == b.name
        && a.relation == b.relation
        && same_set(&a.states, &b.states)
        && same_set(&a.ingredients, &b.ingredients)
}

fn same_set(a: &[String], b: &[String]) -> bool {
    let a: BTreeSet<&String> = a.iter().collect();
    let b: BTreeSet<&String> = b.iter().collect();
    a == b
}

/// Equal motion labels and equal input/output node multisets.
pub fn unit_equals(a: &FunctionalUnit, b: &FunctionalUnit) -> bool {
    a.motion.label == b.motion.label
        && a.inputs.len() == b.inputs.len()
        && a.outputs.len() == b.outputs.len()
        && a.key() == b.key()
}

/// Producers and consumers of one descriptor, as unit indices in graph order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NodeUsage {
    pub produced_by: Vec<usize>,
    pub consumed_by: Vec<usize>,
}

/// An ordered collection of functional units. Subgraphs, universal FOONs
/// and task trees all use this type.
#[derive(Debug, Clone, Default)]
pub struct FoonGraph {
    units: Vec<FunctionalUnit>,
    descriptors: Vec<Descriptor>,
    ids: HashMap<Descriptor, usize>,
    usage: Vec<NodeUsage>,
    // distinct descriptor ids per unit
    unit_inputs: Vec<Vec<usize>>,
    unit_outputs: Vec<Vec<usize>>,
}

impl FoonGraph {
    pub fn new(units: Vec<FunctionalUnit>) -> Self {
        let mut g = FoonGraph {
            units,
            ..Default::default()
        };
        g.rebuild_index();
        g
    }

    pub fn empty() -> Self {
        FoonGraph::default()
    }

    fn intern(&mut self, d: Descriptor) -> usize {
        if let Some(&id) = self.ids.get(&d) {
            return id;
        }
        let id = self.descriptors.len();
        self.descriptors.push(d.clone());
        self.ids.insert(d, id);
        self.usage.push(NodeUsage::default());
        id
    }

    fn rebuild_index(&mut self) {
        self.descriptors.clear();
        self.ids.clear();
        self.usage.clear();
        self.unit_inputs.clear();
        self.unit_outputs.clear();
        let units = std::mem::take(&mut self.units);
        for (idx, unit) in units.iter().enumerate() {
            let mut ins = Vec::new();
            for node in &unit.inputs {
                let id = self.intern(node.descriptor());
                if !ins.contains(&id) {
                    ins.push(id);
                    self.usage[id].consumed_by.push(idx);
                }
            }
            let mut outs = Vec::new();
            for node in &unit.outputs {
                let id = self.intern(node.descriptor());
                if !outs.contains(&id) {
                    outs.push(id);
                    self.usage[id].produced_by.push(idx);
                }
            }
            self.unit_inputs.push(ins);
            self.unit_outputs.push(outs);
        }
        self.units = units;
    }

    pub fn units(&self) -> &[FunctionalUnit] {
        &self.units
    }

    pub fn into_units(self) -> Vec<FunctionalUnit> {
        self.units
    }

    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }

    /// The node index: every descriptor with the units that produce and
    /// consume it, in first-appearance order.
    pub fn node_index(&self) -> impl Iterator<Item = (&Descriptor, &NodeUsage)> {
        self.descriptors.iter().zip(self.usage.iter())
    }

    pub fn usage(&self, d: &Descriptor) -> Option<&NodeUsage> {
        self.ids.get(d).map(|&id| &self.usage[id])
    }

    pub fn producers_of(&self, d: &Descriptor) -> &[usize] {
        self.usage(d).map_or(&[], |u| &u.produced_by)
    }

    pub fn consumers_of(&self, d: &Descriptor) -> &[usize] {
        self.usage(d).map_or(&[], |u| &u.consumed_by)
    }

    pub fn descriptor_count(&self) -> usize {
        self.descriptors.len()
    }

    pub(crate) fn descriptor_id(&self, d: &Descriptor) -> Option<usize> {
        self.ids.get(d).copied()
    }

    pub(crate) fn descriptor_at(&self, id: usize) -> &Descriptor {
        &self.descriptors[id]
    }

    pub(crate) fn producers_by_id(&self, id: usize) -> &[usize] {
        &self.usage[id].produced_by
    }

    pub(crate) fn consumers_by_id(&self, id: usize) -> &[usize] {
        &self.usage[id].consumed_by
    }

    pub(crate) fn input_ids(&self, unit: usize) -> &[usize] {
        &self.unit_inputs[unit]
    }

    pub(crate) fn output_ids(&self, unit: usize) -> &[usize] {
        &self.unit_outputs[unit]
    }

    /// Descriptors consumed somewhere that no unit makes from something
    /// else. A tool a unit hands back unchanged counts as a base input.
    pub fn base_inputs(&self) -> BTreeSet<Descriptor> {
        self.descriptors
            .iter()
            .zip(&self.usage)
            .filter(|(_, u)| {
                !u.consumed_by.is_empty()
                    && u.produced_by.iter().all(|p| u.consumed_by.contains(p))
            })
            .map(|(d, _)| d.clone())
            .collect()
    }
}

/// Union of all units with duplicates removed; first occurrence wins.
pub fn merge<'a>(graphs: impl IntoIterator<Item = &'a FoonGraph>) -> FoonGraph {
    let mut seen = HashSet::new();
    let mut units = Vec::new();
    for g in graphs {
        for unit in g.units() {
            if seen.insert(unit.key()) {
                units.push(unit.clone());
            }
        }
    }
    FoonGraph::new(units)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ViolationKind {
    EmptyInputs,
    InvalidName { name: String },
    InvalidState { node: String, state: String },
    DuplicateState { node: String, state: String },
    InvalidIngredient { node: String, ingredient: String },
    DuplicateIngredient { node: String, ingredient: String },
    EmptyRelationTarget { node: String },
    InvalidMotionLabel { label: String },
    TimestampOrder { start: String, end: String },
    DuplicateInput { node: String },
    DuplicateOutput { node: String },
    DuplicateUnit { first: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub unit: usize,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unit {}: ", self.unit)?;
        match &self.kind {
            ViolationKind::EmptyInputs => write!(f, "unit has no input nodes"),
            ViolationKind::InvalidName { name } => {
                write!(f, "object name {name:?} is empty or not normalized")
            }
            ViolationKind::InvalidState { node, state } => {
                write!(f, "object {node:?} has invalid state {state:?}")
            }
            ViolationKind::DuplicateState { node, state } => {
                write!(f, "object {node:?} lists state {state:?} twice")
            }
            ViolationKind::InvalidIngredient { node, ingredient } => {
                write!(f, "object {node:?} has invalid ingredient {ingredient:?}")
            }
            ViolationKind::DuplicateIngredient { node, ingredient } => {
                write!(f, "object {node:?} lists ingredient {ingredient:?} twice")
            }
            ViolationKind::EmptyRelationTarget { node } => {
                write!(f, "object {node:?} has a relation with an empty target")
            }
            ViolationKind::InvalidMotionLabel { label } => {
                write!(f, "motion label {label:?} is empty or not normalized")
            }
            ViolationKind::TimestampOrder { start, end } => {
                write!(f, "motion starts at {start} after it ends at {end}")
            }
            ViolationKind::DuplicateInput { node } => {
                write!(f, "input node {node:?} appears twice")
            }
            ViolationKind::DuplicateOutput { node } => {
                write!(f, "output node {node:?} appears twice")
            }
            ViolationKind::DuplicateUnit { first } => {
                write!(f, "duplicate of unit {first}")
            }
        }
    }
}

// Characters the text formats use as delimiters inside state and ingredient fields.
const RESERVED: [char; 3] = [',', '{', '}'];

fn check_node(unit: usize, node: &ObjectNode, out: &mut Vec<Violation>) {
    let mut push = |kind| out.push(Violation { unit, kind });
    if !is_normalized(&node.name) {
        push(ViolationKind::InvalidName {
            name: node.name.clone(),
        });
    }
    let mut seen = HashSet::new();
    for s in &node.states {
        if !is_normalized(s) || s.contains(RESERVED) {
            push(ViolationKind::InvalidState {
                node: node.name.clone(),
                state: s.clone(),
            });
        }
        if !seen.insert(s) {
            push(ViolationKind::DuplicateState {
                node: node.name.clone(),
                state: s.clone(),
            });
        }
    }
    let mut seen = HashSet::new();
    for i in &node.ingredients {
        if !is_normalized(i) || i.contains(RESERVED) {
            push(ViolationKind::InvalidIngredient {
                node: node.name.clone(),
                ingredient: i.clone(),
            });
        }
        if !seen.insert(i) {
            push(ViolationKind::DuplicateIngredient {
                node: node.name.clone(),
                ingredient: i.clone(),
            });
        }
    }
    if let Some(rel) = &node.relation {
        if !is_normalized(&rel.target) {
            push(ViolationKind::EmptyRelationTarget {
                node: node.name.clone(),
            });
        }
    }
}

fn check_distinct(unit: usize, nodes: &[ObjectNode], output: bool, out: &mut Vec<Violation>) {
    let mut seen = HashSet::new();
    for node in nodes {
        if !seen.insert(node.key()) {
            let name = node.name.clone();
            out.push(Violation {
                unit,
                kind: if output {
                    ViolationKind::DuplicateOutput { node: name }
                } else {
                    ViolationKind::DuplicateInput { node: name }
                },
            });
        }
    }
}

/// Checks every model invariant. An empty result means the graph is valid.
pub fn validate(graph: &FoonGraph) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut first_seen: HashMap<UnitKey, usize> = HashMap::new();
    for (idx, unit) in graph.units().iter().enumerate() {
        if unit.inputs.is_empty() {
            out.push(Violation {
                unit: idx,
                kind: ViolationKind::EmptyInputs,
            });
        }
        for node in unit.inputs.iter().chain(&unit.outputs) {
            check_node(idx, node, &mut out);
        }
        check_distinct(idx, &unit.inputs, false, &mut out);
        check_distinct(idx, &unit.outputs, true, &mut out);
        let motion = &unit.motion;
        if !is_normalized(&motion.label) {
            out.push(Violation {
                unit: idx,
                kind: ViolationKind::InvalidMotionLabel {
                    label: motion.label.clone(),
                },
            });
        }
        if let (Some(s), Some(e)) = (&motion.start_time, &motion.end_time) {
            if let (Some(a), Some(b)) = (timestamp_seconds(s), timestamp_seconds(e)) {
                if a > b {
                    out.push(Violation {
                        unit: idx,
                        kind: ViolationKind::TimestampOrder {
                            start: s.clone(),
                            end: e.clone(),
                        },
                    });
                }
            }
        }
        match first_seen.get(&unit.key()) {
            Some(&first) => out.push(Violation {
                unit: idx,
                kind: ViolationKind::DuplicateUnit { first },
            }),
            None => {
                first_seen.insert(unit.key(), idx);
            }
        }
    }
    out
}

/// The set of object descriptors available before any action runs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Kitchen {
    items: BTreeSet<Descriptor>,
}

impl Kitchen {
    pub fn new(items: impl IntoIterator<Item = Descriptor>) -> Self {
        Kitchen {
            items: items.into_iter().collect(),
        }
    }

    pub fn contains(&self, d: &Descriptor) -> bool {
        self.items.contains(d)
    }

    /// Returns false if the item was already present.
    pub fn insert(&mut self, d: Descriptor) -> bool {
        self.items.insert(d)
    }

    pub fn items(&self) -> &BTreeSet<Descriptor> {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

impl FromIterator<Descriptor> for Kitchen {
    fn from_iter<T: IntoIterator<Item = Descriptor>>(iter: T) -> Self {
        Kitchen::new(iter)
    }
}

/// A retrieved (or reconstructed) plan: units executable from `kitchen`
/// that lead to `goal`.
#[derive(Debug, Clone)]
pub struct TaskTree {
    pub graph: FoonGraph,
    pub goal: Option<Descriptor>,
    pub kitchen: Kitchen,
}

impl TaskTree {
    pub fn new(graph: FoonGraph, goal: Option<Descriptor>, kitchen: Kitchen) -> Self {
        TaskTree {
            graph,
            goal,
            kitchen,
        }
    }

    /// Treats a stand-alone subgraph as a task tree: the kitchen is every
    /// descriptor no unit produces and the goal is the last terminal output.
    pub fn from_subgraph(graph: FoonGraph) -> Self {
        let kitchen = Kitchen::new(graph.base_inputs());
        let goal = graph
            .units()
            .iter()
            .rev()
            .flat_map(|u| u.outputs.iter())
            .map(ObjectNode::descriptor)
            .find(|d| graph.consumers_of(d).is_empty());
        TaskTree {
            graph,
            goal,
            kitchen,
        }
    }

    pub fn len(&self) -> usize {
        self.graph.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graph.is_empty()
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("task tree has a cycle or an unsatisfiable input: {} of {total} units cannot be scheduled", stuck.len())]
pub struct CycleError {
    /// Indices of the units that could never be scheduled.
    pub stuck: Vec<usize>,
    pub total: usize,
}

/// Orders the tree's units so each input is in the kitchen or produced by an
/// earlier unit. Among units that are ready at the same time the one listed
/// first in the tree goes first.
pub fn topological_order(tree: &TaskTree) -> Result<Vec<&FunctionalUnit>, CycleError> {
    topological_indices(tree).map(|order| order.into_iter().map(|i| &tree.graph.units()[i]).collect())
}

pub fn topological_indices(tree: &TaskTree) -> Result<Vec<usize>, CycleError> {
    use std::cmp::Reverse;
    use std::collections::BinaryHeap;

    let graph = &tree.graph;
    let n = graph.len();
    let mut available = vec![false; graph.descriptor_count()];
    let mut missing: Vec<usize> = (0..n).map(|u| graph.input_ids(u).len()).collect();
    let mut ready = BinaryHeap::new();

    let mut make_available = |id: usize, missing: &mut Vec<usize>, ready: &mut BinaryHeap<_>| {
        if std::mem::replace(&mut available[id], true) {
            return;
        }
        for &u in graph.consumers_by_id(id) {
            missing[u] -= 1;
            if missing[u] == 0 {
                ready.push(Reverse(u));
            }
        }
    };

    ready.extend((0..n).filter(|&u| missing[u] == 0).map(Reverse));
    for item in tree.kitchen.items() {
        if let Some(id) = graph.descriptor_id(item) {
            make_available(id, &mut missing, &mut ready);
        }
    }

    let mut order = Vec::with_capacity(n);
    let mut done = vec![false; n];
    while let Some(Reverse(u)) = ready.pop() {
        if std::mem::replace(&mut done[u], true) {
            continue;
        }
        order.push(u);
        for &id in graph.output_ids(u) {
            make_available(id, &mut missing, &mut ready);
        }
    }

    if order.len() < n {
        return Err(CycleError {
            stuck: (0..n).filter(|&u| !done[u]).collect(),
            total: n,
        });
    }
    Ok(order)
}
