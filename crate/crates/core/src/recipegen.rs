//! Turns a task tree into numbered recipe instructions.
//!
//! Each functional unit becomes one sentence of the shape
//! `<motion> <portion> <states> <object>, ... <additional information>`:
//!
//! - objects are the unit's inputs minus containers (anything another node in
//!   the unit sits in, on or under) and minus tools that come out unchanged
//! - a portion from the [`PortionTable`] is attached the first time an object
//!   is mentioned in the recipe
//! - route verbs (`pour`, `add`, ...) get `from <source> to <target>` read from
//!   the objects' relations before and after the action; utensil verbs
//!   (`mix`, `stir`, ...) get `with <tool>`
//! - units whose only effect is a housekeeping toggle (clean/dirty/empty) are
//!   dropped, and adjacent sentences with the same motion and clause are
//!   merged
//!
//! State words are printed as annotated, except locational states such as
//! `in bowl` (already carried by relations) and states the object's name
//! already expresses (`mixed` on `egg mixture`).

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::RecipeConfig;
use crate::graph::{normalize_label, topological_order, CycleError, FunctionalUnit, ObjectNode, TaskTree};

#[derive(Debug, Error)]
pub enum PortionError {
    #[error("cannot read portion table {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("portion table line {line}: {message}")]
    Tsv { line: usize, message: String },
    #[error("portion table is not a JSON object of strings: {0}")]
    Json(#[from] serde_json::Error),
    #[error("portion for {0:?} is empty")]
    EmptyPortion(String),
}

/// Object name to quantity string, e.g. `milk -> 2 tsp`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PortionTable {
    entries: BTreeMap<String, String>,
}

impl PortionTable {
    pub fn new() -> Self {
        PortionTable::default()
    }

    pub fn insert(&mut self, name: &str, portion: &str) -> Result<(), PortionError> {
        let name = normalize_label(name);
        let portion = portion.trim();
        if name.is_empty() || portion.is_empty() {
            return Err(PortionError::EmptyPortion(name));
        }
        self.entries.insert(name, portion.to_string());
        Ok(())
    }

    pub fn with(mut self, name: &str, portion: &str) -> Self {
        self.insert(name, portion).expect("non-empty portion");
        self
    }

    pub fn get(&self, name: &str) -> Option<&str> {
        self.entries.get(name).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn from_tsv(text: &str) -> Result<Self, PortionError> {
        let mut table = PortionTable::new();
        for (idx, line) in text.lines().enumerate() {
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (name, portion) = line.split_once('\t').ok_or_else(|| PortionError::Tsv {
                line: idx + 1,
                message: "expected name<TAB>portion".into(),
            })?;
            table.insert(name, portion).map_err(|e| PortionError::Tsv {
                line: idx + 1,
                message: e.to_string(),
            })?;
        }
        Ok(table)
    }

    pub fn from_json(text: &str) -> Result<Self, PortionError> {
        let raw: BTreeMap<String, String> = serde_json::from_str(text)?;
        let mut table = PortionTable::new();
        for (name, portion) in raw {
            table.insert(&name, &portion)?;
        }
        Ok(table)
    }

    /// JSON when the file starts with `{`, TSV otherwise.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, PortionError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| PortionError::Io {
            path: path.display().to_string(),
            source,
        })?;
        if text.trim_start().starts_with('{') {
            PortionTable::from_json(&text)
        } else {
            PortionTable::from_tsv(&text)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ObjectPhrase {
    pub portion: Option<String>,
    pub states: Vec<String>,
    pub name: String,
}

impl ObjectPhrase {
    pub fn render(&self) -> String {
        let mut words: Vec<&str> = Vec::new();
        if let Some(p) = &self.portion {
            words.push(p);
        }
        words.extend(self.states.iter().map(String::as_str));
        words.push(&self.name);
        words.join(" ")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Extra {
    Route {
        from: Option<String>,
        to: Option<String>,
    },
    Utensil(Vec<String>),
}

impl Extra {
    fn render(&self) -> String {
        match self {
            Extra::Route { from, to } => {
                let mut out = String::new();
                if let Some(f) = from {
                    out.push_str(" from ");
                    out.push_str(f);
                }
                if let Some(t) = to {
                    out.push_str(" to ");
                    out.push_str(t);
                }
                out
            }
            Extra::Utensil(tools) => format!(" with {}", tools.join(" and ")),
        }
    }

    fn names(&self) -> Vec<&str> {
        match self {
            Extra::Route { from, to } => from.iter().chain(to).map(String::as_str).collect(),
            Extra::Utensil(tools) => tools.iter().map(String::as_str).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Sentence {
    pub motion: String,
    pub objects: Vec<ObjectPhrase>,
    pub extra: Option<Extra>,
    /// How many unit sentences were fused into this one.
    pub merged: usize,
}

impl Sentence {
    /// Objects of a single unit are comma separated; a fused sentence puts
    /// "and" before its last object.
    pub fn render(&self) -> String {
        let parts: Vec<String> = self.objects.iter().map(ObjectPhrase::render).collect();
        let objects = match parts.split_last() {
            Some((last, rest)) if self.merged > 1 && !rest.is_empty() => {
                format!("{} and {}", rest.join(", "), last)
            }
            _ => parts.join(", "),
        };
        let extra = self.extra.as_ref().map(Extra::render).unwrap_or_default();
        format!("{} {}{}", self.motion, objects, extra)
    }
}

fn state_delta_within(a: &ObjectNode, b: &ObjectNode, allowed: &std::collections::BTreeSet<String>) -> Option<bool> {
    let sa: HashSet<&String> = a.states.iter().collect();
    let sb: HashSet<&String> = b.states.iter().collect();
    let mut changed = false;
    for s in sa.symmetric_difference(&sb) {
        if !allowed.contains(*s) {
            return None;
        }
        changed = true;
    }
    Some(changed)
}

fn same_ingredients(a: &ObjectNode, b: &ObjectNode) -> bool {
    let ia: HashSet<&String> = a.ingredients.iter().collect();
    let ib: HashSet<&String> = b.ingredients.iter().collect();
    ia == ib
}

/// True when the unit only flips housekeeping states (clean, dirty, empty)
/// on ingredient-free objects, e.g. washing a bowl.
pub fn should_skip(unit: &FunctionalUnit, cfg: &RecipeConfig) -> bool {
    if unit.outputs.is_empty() || unit.inputs.iter().any(|n| !n.ingredients.is_empty()) {
        return false;
    }
    let mut toggled = false;
    for out in &unit.outputs {
        if !out.ingredients.is_empty() {
            return false;
        }
        let delta = unit
            .inputs
            .iter()
            .filter(|i| i.name == out.name && i.relation == out.relation)
            .filter_map(|i| state_delta_within(i, out, &cfg.housekeeping_states))
            .max();
        match delta {
            Some(changed) => toggled |= changed,
            None => return false,
        }
    }
    toggled
}

fn is_locational(state: &str) -> bool {
    ["in ", "on ", "under "].iter().any(|p| state.starts_with(p))
}

/// `mixed` adds nothing to `egg mixture`, nor `sliced` to `lemon slices`.
fn implied_by_name(state: &str, name: &str) -> bool {
    if state.contains(' ') {
        return false;
    }
    let mut roots = vec![state];
    for suffix in ["ed", "en", "d"] {
        if let Some(r) = state.strip_suffix(suffix) {
            roots.push(r);
        }
    }
    name.split(' ')
        .any(|word| roots.iter().any(|r| r.len() >= 3 && word.starts_with(r)))
}

fn visible_states(node: &ObjectNode) -> Vec<String> {
    node.states
        .iter()
        .filter(|s| !is_locational(s) && !implied_by_name(s, &node.name))
        .cloned()
        .collect()
}

fn is_tool(node: &ObjectNode, unit: &FunctionalUnit, cfg: &RecipeConfig) -> bool {
    node.ingredients.is_empty()
        && unit.outputs.iter().any(|o| {
            o.name == node.name
                && o.relation == node.relation
                && same_ingredients(o, node)
                && state_delta_within(node, o, &cfg.housekeeping_states).is_some()
        })
}

fn push_name(list: &mut Vec<String>, name: &str) {
    if !list.iter().any(|n| n == name) {
        list.push(name.to_string());
    }
}

/// One unit as a sentence, or `None` for a skipped housekeeping unit.
/// `seen` collects every object name mentioned so far in the recipe.
pub fn unit_to_sentence(
    unit: &FunctionalUnit,
    portions: &PortionTable,
    seen: &mut HashSet<String>,
    cfg: &RecipeConfig,
) -> Option<Sentence> {
    if should_skip(unit, cfg) {
        return None;
    }
    let containers: HashSet<&str> = unit
        .inputs
        .iter()
        .chain(&unit.outputs)
        .filter_map(|n| n.relation.as_ref().map(|r| r.target.as_str()))
        .collect();
    let candidates: Vec<&ObjectNode> = unit
        .inputs
        .iter()
        .filter(|n| !containers.contains(n.name.as_str()))
        .collect();
    let (tools, mut objects): (Vec<&ObjectNode>, Vec<&ObjectNode>) =
        candidates.iter().partition(|n| is_tool(n, unit, cfg));
    if objects.is_empty() {
        objects = if candidates.is_empty() {
            unit.inputs.iter().collect()
        } else {
            candidates.clone()
        };
    }

    let motion = unit.motion.label.clone();
    let extra = if cfg.route_verbs.contains(&motion) {
        let names: HashSet<&str> = objects.iter().map(|n| n.name.as_str()).collect();
        let from = objects
            .iter()
            .find_map(|n| n.relation.as_ref())
            .map(|r| r.target.clone());
        let to = unit
            .outputs
            .iter()
            .filter(|o| names.contains(o.name.as_str()))
            .chain(unit.outputs.iter())
            .find_map(|o| o.relation.as_ref())
            .map(|r| r.target.clone());
        let from = if from == to { None } else { from };
        (from.is_some() || to.is_some()).then_some(Extra::Route { from, to })
    } else if cfg.utensil_verbs.contains(&motion) && !tools.is_empty() {
        let mut names = Vec::new();
        for t in &tools {
            push_name(&mut names, &t.name);
        }
        Some(Extra::Utensil(names))
    } else {
        None
    };

    let mut phrases: Vec<ObjectPhrase> = Vec::new();
    for node in objects {
        if phrases.iter().any(|p| p.name == node.name) {
            continue;
        }
        let portion = if seen.contains(&node.name) {
            None
        } else {
            portions.get(&node.name).map(String::from)
        };
        seen.insert(node.name.clone());
        phrases.push(ObjectPhrase {
            portion,
            states: visible_states(node),
            name: node.name.clone(),
        });
    }
    if let Some(e) = &extra {
        for n in e.names() {
            seen.insert(n.to_string());
        }
    }
    Some(Sentence {
        motion,
        objects: phrases,
        extra,
        merged: 1,
    })
}

/// Fuses maximal runs of adjacent sentences that share motion and extra
/// clause. Objects keep their order; a name already in the fused list is not
/// repeated.
pub fn merge_consecutive(sentences: Vec<Sentence>) -> Vec<Sentence> {
    let mut out: Vec<Sentence> = Vec::new();
    for s in sentences {
        match out.last_mut() {
            Some(prev) if prev.motion == s.motion && prev.extra == s.extra => {
                for obj in s.objects {
                    if !prev.objects.iter().any(|o| o.name == obj.name) {
                        prev.objects.push(obj);
                    }
                }
                prev.merged += s.merged;
            }
            _ => out.push(s),
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Recipe {
    pub title: String,
    pub steps: Vec<String>,
    /// Object names in order of first mention; used for corpus matching.
    #[serde(default)]
    pub ingredients: Vec<String>,
}

impl Recipe {
    /// Title line followed by `1. ...` steps; one trailing newline.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if !self.title.is_empty() {
            out.push_str(&self.title);
            out.push('\n');
        }
        for (i, step) in self.steps.iter().enumerate() {
            out.push_str(&format!("{}. {}\n", i + 1, step));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("recipe serializes") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Orders the tree, renders every unit, drops housekeeping units and merges
/// adjacent sentences.
pub fn generate_recipe(
    tree: &TaskTree,
    portions: &PortionTable,
    title: &str,
    cfg: &RecipeConfig,
) -> Result<Recipe, CycleError> {
    let mut seen = HashSet::new();
    let sentences: Vec<Sentence> = topological_order(tree)?
        .into_iter()
        .filter_map(|u| unit_to_sentence(u, portions, &mut seen, cfg))
        .collect();
    let sentences = merge_consecutive(sentences);
    let mut ingredients = Vec::new();
    for s in &sentences {
        for o in &s.objects {
            push_name(&mut ingredients, &o.name);
        }
    }
    Ok(Recipe {
        title: title.trim().to_string(),
        steps: sentences.iter().map(Sentence::render).collect(),
        ingredients,
    })
}
