//! The `.foon` subgraph text format and the kitchen inventory format.
//!
//! A `.foon` file is line oriented and tab separated. A unit block lists its
//! input objects, one motion line, its output objects and a closing `//`:
//!
//! ```text
//! O	lemon
//! S	whole
//! O	cutting board
//! M	place	0:05	0:09
//! O	lemon	on:cutting board
//! S	whole
//! S	on cutting board
//! //
//! ```
//!
//! `S` lines belong to the object line above them. A state line may carry the
//! object's ingredient list as a trailing `{a,b,...}` field; an object with
//! ingredients but no states uses `S<TAB>{a,b,...}`. Lines starting with `#`
//! are comments and blank lines are ignored. Tags are case-insensitive on
//! input and written in lowercase.
//!
//! Parsing never fails outright. Problems are reported as
//! [`ParseDiagnostic`]s and the offending unit is dropped, so one pass reports
//! everything wrong with a file.
#![allow(clippy::tabs_in_doc_comments)]

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::io;
use std::path::Path;

use thiserror::Error;

use crate::graph::{
    normalize_label, timestamp_seconds, Descriptor, FoonGraph, FunctionalUnit, Kitchen,
    MotionNode, ObjectNode, Relation, RelationKind,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Warning,
    Error,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Warning => "warning",
            Severity::Error => "error",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseDiagnostic {
    /// 1-based.
    pub line_number: usize,
    pub severity: Severity,
    pub message: String,
}

impl ParseDiagnostic {
    fn error(line_number: usize, message: impl Into<String>) -> Self {
        ParseDiagnostic {
            line_number,
            severity: Severity::Error,
            message: message.into(),
        }
    }

    fn warning(line_number: usize, message: impl Into<String>) -> Self {
        ParseDiagnostic {
            line_number,
            severity: Severity::Warning,
            message: message.into(),
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}: {}", self.line_number, self.severity, self.message)
    }
}

pub fn has_errors(diagnostics: &[ParseDiagnostic]) -> bool {
    diagnostics.iter().any(ParseDiagnostic::is_error)
}

#[derive(Default)]
struct Block {
    start_line: usize,
    inputs: Vec<ObjectNode>,
    motion: Option<MotionNode>,
    outputs: Vec<ObjectNode>,
    poisoned: bool,
}

impl Block {
    fn is_empty(&self) -> bool {
        self.inputs.is_empty() && self.motion.is_none() && self.outputs.is_empty()
    }

    fn current_object(&mut self) -> Option<&mut ObjectNode> {
        if self.motion.is_some() {
            self.outputs.last_mut()
        } else {
            self.inputs.last_mut()
        }
    }
}

struct Parser {
    units: Vec<FunctionalUnit>,
    seen_units: HashSet<crate::graph::UnitKey>,
    diagnostics: Vec<ParseDiagnostic>,
    block: Block,
}

/// Splits `{a,b,c}` into normalized items. `None` if the braces are missing
/// or an item is empty or contains a brace.
fn parse_ingredient_list(field: &str) -> Option<Vec<String>> {
    let inner = field.trim().strip_prefix('{')?.strip_suffix('}')?;
    if inner.trim().is_empty() {
        return Some(Vec::new());
    }
    inner
        .split(',')
        .map(|item| {
            let item = normalize_label(item);
            (!item.is_empty() && !item.contains(['{', '}'])).then_some(item)
        })
        .collect()
}

impl Parser {
    fn new() -> Self {
        Parser {
            units: Vec::new(),
            seen_units: HashSet::new(),
            diagnostics: Vec::new(),
            block: Block::default(),
        }
    }

    fn error(&mut self, line: usize, msg: impl Into<String>) {
        self.diagnostics.push(ParseDiagnostic::error(line, msg));
        self.block.poisoned = true;
    }

    fn warn(&mut self, line: usize, msg: impl Into<String>) {
        self.diagnostics.push(ParseDiagnostic::warning(line, msg));
    }

    fn touch(&mut self, line: usize) {
        if self.block.is_empty() && !self.block.poisoned {
            self.block.start_line = line;
        }
    }

    fn object_line(&mut self, line: usize, fields: &[&str]) {
        self.touch(line);
        let name = normalize_label(fields.get(1).copied().unwrap_or(""));
        if name.is_empty() {
            self.error(line, "object line has an empty name");
            return;
        }
        let mut node = ObjectNode::new(&name);
        if let Some(rel) = fields.get(2).map(|f| f.trim()).filter(|f| !f.is_empty()) {
            match rel.split_once(':') {
                Some((kind, target)) => match RelationKind::parse(kind) {
                    Some(kind) if !normalize_label(target).is_empty() => {
                        node.relation = Some(Relation::new(kind, target));
                    }
                    Some(_) => {
                        self.error(line, format!("relation {rel:?} has an empty target"));
                        return;
                    }
                    None => {
                        self.error(
                            line,
                            format!("unknown relation kind {kind:?} (expected in, on or under)"),
                        );
                        return;
                    }
                },
                None => {
                    self.error(line, format!("malformed relation field {rel:?}"));
                    return;
                }
            }
        }
        if fields.len() > 3 {
            self.error(line, "object line has too many fields");
            return;
        }
        if self.block.motion.is_some() {
            self.block.outputs.push(node);
        } else {
            self.block.inputs.push(node);
        }
    }

    fn state_line(&mut self, line: usize, fields: &[&str]) {
        self.touch(line);
        let first = fields.get(1).map(|f| f.trim()).unwrap_or("");
        let (state, ingredients) = if first.starts_with('{') {
            if fields.len() > 2 {
                self.error(line, "state line has too many fields");
                return;
            }
            ("", Some(first))
        } else {
            if fields.len() > 3 {
                self.error(line, "state line has too many fields");
                return;
            }
            (first, fields.get(2).map(|f| f.trim()).filter(|f| !f.is_empty()))
        };
        let state = normalize_label(state);
        if state.contains(['{', '}', ',']) {
            self.error(line, format!("state {state:?} contains a reserved character"));
            return;
        }
        let ingredients = match ingredients.map(parse_ingredient_list) {
            Some(None) => {
                self.error(line, "malformed ingredient list (expected {a,b,...})");
                return;
            }
            Some(Some(list)) => list,
            None => Vec::new(),
        };
        if state.is_empty() && ingredients.is_empty() && !first.starts_with('{') {
            self.error(line, "state line has an empty state");
            return;
        }
        let mut warnings = Vec::new();
        match self.block.current_object() {
            None => {
                self.error(line, "state line before any object line");
                return;
            }
            Some(obj) => {
                if !state.is_empty() && !obj.add_state(&state) {
                    warnings.push(format!("duplicate state {state:?} on {:?} ignored", obj.name));
                }
                for ing in &ingredients {
                    if !obj.add_ingredient(ing) {
                        warnings.push(format!(
                            "duplicate ingredient {ing:?} on {:?} ignored",
                            obj.name
                        ));
                    }
                }
            }
        }
        for w in warnings {
            self.warn(line, w);
        }
    }

    fn motion_line(&mut self, line: usize, fields: &[&str]) {
        self.touch(line);
        if self.block.inputs.is_empty() {
            self.error(line, "motion line before any object line");
            return;
        }
        if self.block.motion.is_some() {
            self.error(line, "unit has more than one motion line");
            return;
        }
        let label = normalize_label(fields.get(1).copied().unwrap_or(""));
        if label.is_empty() {
            self.error(line, "motion line has an empty label");
            return;
        }
        if fields.len() > 4 {
            self.error(line, "motion line has too many fields");
            return;
        }
        let motion = MotionNode::new(&label).with_times(fields.get(2).copied(), fields.get(3).copied());
        if let (Some(s), Some(e)) = (&motion.start_time, &motion.end_time) {
            if let (Some(a), Some(b)) = (timestamp_seconds(s), timestamp_seconds(e)) {
                if a > b {
                    self.error(line, format!("motion starts at {s} after it ends at {e}"));
                    return;
                }
            }
        }
        self.block.motion = Some(motion);
    }

    fn end_unit(&mut self, line: usize) {
        let block = std::mem::take(&mut self.block);
        if block.poisoned {
            return;
        }
        let Some(motion) = block.motion else {
            self.diagnostics
                .push(ParseDiagnostic::error(line, "unit has no motion line"));
            return;
        };
        for (nodes, side) in [(&block.inputs, "input"), (&block.outputs, "output")] {
            let mut keys = HashSet::new();
            for n in nodes.iter() {
                if !keys.insert(n.key()) {
                    self.diagnostics.push(ParseDiagnostic::error(
                        line,
                        format!("{side} node {:?} appears twice in one unit", n.name),
                    ));
                    return;
                }
            }
        }
        let unit = FunctionalUnit::new(block.inputs, motion, block.outputs);
        if !self.seen_units.insert(unit.key()) {
            self.warn(
                block.start_line.max(1),
                "duplicate functional unit dropped",
            );
            return;
        }
        self.units.push(unit);
    }

    fn line(&mut self, line: usize, raw: &str) {
        let text = raw.trim_end_matches(['\r', '\n']);
        let trimmed = text.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            return;
        }
        if trimmed == "//" {
            self.end_unit(line);
            return;
        }
        let fields: Vec<&str> = text.trim_start().split('\t').collect();
        match fields[0].trim().to_ascii_lowercase().as_str() {
            "o" => self.object_line(line, &fields),
            "s" => self.state_line(line, &fields),
            "m" => self.motion_line(line, &fields),
            _ => {
                self.touch(line);
                let tag: String = fields[0].chars().take(16).collect();
                self.error(line, format!("unknown line tag {tag:?}"));
            }
        }
    }

    fn finish(mut self, last_line: usize) -> (FoonGraph, Vec<ParseDiagnostic>) {
        if !self.block.is_empty() || self.block.poisoned {
            let start = self.block.start_line.max(1).min(last_line.max(1));
            self.diagnostics.push(ParseDiagnostic::error(
                start,
                "unterminated unit block (missing `//`)",
            ));
        }
        (FoonGraph::new(self.units), self.diagnostics)
    }
}

/// Parses `.foon` text. Units appear in file order; units with
/// error diagnostics are left out and duplicate units are dropped with a
/// warning.
pub fn parse_graph(text: &str) -> (FoonGraph, Vec<ParseDiagnostic>) {
    let mut parser = Parser::new();
    let mut last = 0;
    for (idx, raw) in text.split('\n').enumerate() {
        last = idx + 1;
        parser.line(idx + 1, raw);
    }
    parser.finish(last)
}

fn write_node(out: &mut String, node: &ObjectNode) {
    out.push_str("o\t");
    out.push_str(&node.name);
    if let Some(rel) = &node.relation {
        out.push('\t');
        out.push_str(rel.kind.as_str());
        out.push(':');
        out.push_str(&rel.target);
    }
    out.push('\n');
    let ingredients = (!node.ingredients.is_empty()).then(|| format!("{{{}}}", node.ingredients.join(",")));
    if node.states.is_empty() {
        if let Some(ings) = &ingredients {
            out.push_str("s\t");
            out.push_str(ings);
            out.push('\n');
        }
        return;
    }
    for (i, state) in node.states.iter().enumerate() {
        out.push_str("s\t");
        out.push_str(state);
        if i == 0 {
            if let Some(ings) = &ingredients {
                out.push('\t');
                out.push_str(ings);
            }
        }
        out.push('\n');
    }
}

/// Canonical text form: lowercase tags, tab separated, every unit closed by
/// `//`, exactly one trailing newline (empty string for an empty graph).
pub fn serialize_graph(graph: &FoonGraph) -> String {
    let mut out = String::new();
    for unit in graph.units() {
        for node in &unit.inputs {
            write_node(&mut out, node);
        }
        out.push_str("m\t");
        out.push_str(&unit.motion.label);
        let m = &unit.motion;
        if m.start_time.is_some() || m.end_time.is_some() {
            out.push('\t');
            out.push_str(m.start_time.as_deref().unwrap_or(""));
            out.push('\t');
            out.push_str(m.end_time.as_deref().unwrap_or(""));
        }
        out.push('\n');
        for node in &unit.outputs {
            write_node(&mut out, node);
        }
        out.push_str("//\n");
    }
    out
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{path} is not valid UTF-8")]
    Encoding { path: String },
}

fn read_text(path: &Path) -> Result<String, LoadError> {
    let bytes = fs::read(path).map_err(|source| LoadError::Io {
        path: path.display().to_string(),
        source,
    })?;
    String::from_utf8(bytes).map_err(|_| LoadError::Encoding {
        path: path.display().to_string(),
    })
}

pub fn load_graph(path: impl AsRef<Path>) -> Result<(FoonGraph, Vec<ParseDiagnostic>), LoadError> {
    Ok(parse_graph(&read_text(path.as_ref())?))
}

/// Parses one kitchen descriptor: `name[<TAB>state,state][<TAB>{ing,...}]`.
/// The ingredient field may also directly follow the name.
pub fn parse_descriptor(line: &str) -> Result<Descriptor, String> {
    parse_descriptor_fields(&line.split('\t').collect::<Vec<_>>())
}

fn parse_descriptor_fields(fields: &[&str]) -> Result<Descriptor, String> {
    let name = normalize_label(fields[0]);
    if name.is_empty() {
        return Err("descriptor has an empty name".into());
    }
    let mut states = Vec::new();
    let mut ingredients = Vec::new();
    let mut rest = fields[1..].iter().map(|f| f.trim());
    let mut next = rest.next();
    if let Some(f) = next {
        if !f.starts_with('{') {
            for s in f.split(',') {
                let s = normalize_label(s);
                if s.is_empty() {
                    if !f.is_empty() {
                        return Err(format!("empty state in {f:?}"));
                    }
                } else {
                    states.push(s);
                }
            }
            next = rest.next();
        }
    }
    if let Some(f) = next {
        if !f.is_empty() {
            ingredients = parse_ingredient_list(f)
                .ok_or_else(|| format!("malformed ingredient list {f:?}"))?;
        }
    }
    if rest.next().is_some() {
        return Err("descriptor has too many fields".into());
    }
    Ok(Descriptor::new(
        &name,
        states.iter().map(String::as_str),
        ingredients.iter().map(String::as_str),
    ))
}

/// Parses a kitchen file, one descriptor per line. Duplicate lines produce a
/// warning.
pub fn parse_kitchen(text: &str) -> (Kitchen, Vec<ParseDiagnostic>) {
    let mut kitchen = Kitchen::default();
    let mut diagnostics = Vec::new();
    for (idx, raw) in text.split('\n').enumerate() {
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        match parse_descriptor(line) {
            Ok(d) => {
                if !kitchen.insert(d) {
                    diagnostics.push(ParseDiagnostic::warning(idx + 1, "duplicate kitchen item"));
                }
            }
            Err(msg) => diagnostics.push(ParseDiagnostic::error(idx + 1, msg)),
        }
    }
    (kitchen, diagnostics)
}

pub fn load_kitchen(path: impl AsRef<Path>) -> Result<(Kitchen, Vec<ParseDiagnostic>), LoadError> {
    Ok(parse_kitchen(&read_text(path.as_ref())?))
}

pub fn format_descriptor(d: &Descriptor) -> String {
    let mut out = d.name.clone();
    if !d.states.is_empty() {
        out.push('\t');
        out.push_str(&d.states.iter().cloned().collect::<Vec<_>>().join(","));
    }
    if !d.ingredients.is_empty() {
        out.push('\t');
        out.push('{');
        out.push_str(&d.ingredients.iter().cloned().collect::<Vec<_>>().join(","));
        out.push('}');
    }
    out
}

pub fn serialize_kitchen(kitchen: &Kitchen) -> String {
    kitchen
        .items()
        .iter()
        .map(|d| format_descriptor(d) + "\n")
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{unit_equals, validate};

    pub(crate) const LEMON: &str = "\
# place a whole lemon, then slice it
O\tlemon
S\twhole
O\tcutting board
M\tplace\t0:05\t0:09
O\tlemon\ton:cutting board
S\twhole
S\ton cutting board
//
O\tlemon\ton:cutting board
S\twhole
S\ton cutting board
O\tknife
O\tcutting board
M\tslice
O\tlemon\ton:cutting board
S\tsliced
S\ton cutting board
//
";

    #[test]
    fn parses_two_unit_lemon_file() {
        let (g, diags) = parse_graph(LEMON);
        assert!(diags.is_empty(), "{diags:?}");
        assert_eq!(g.len(), 2);
        assert_eq!(g.units()[0].motion.label, "place");
        assert_eq!(g.units()[0].motion.start_time.as_deref(), Some("0:05"));
        assert_eq!(g.units()[1].motion.label, "slice");
        assert_eq!(g.units()[1].inputs.len(), 3);
        assert!(validate(&g).is_empty());
    }

    #[test]
    fn empty_input() {
        let (g, diags) = parse_graph("");
        assert!(g.is_empty());
        assert!(diags.is_empty());
        assert_eq!(serialize_graph(&g), "");
    }

    #[test]
    fn unknown_tag_reported_at_its_line() {
        let text = "O\tegg\nX\tfoo\nM\tcrack\n//\n";
        let (g, diags) = parse_graph(text);
        assert!(g.is_empty());
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].line_number, 2);
        assert!(diags[0].is_error());
        assert!(diags[0].message.contains("unknown line tag"));
    }

    #[test]
    fn structural_errors() {
        let cases = [
            ("M\tmix\n//\n", 1, "motion line before any object line"),
            ("O\tegg\n//\n", 2, "unit has no motion line"),
            ("O\tegg\nM\tcrack\nO\tegg\nS\tcracked\n", 1, "unterminated unit block"),
            ("S\traw\n", 1, "state line before any object line"),
            ("O\tegg\nM\tcrack\nM\tfry\n//\n", 3, "more than one motion line"),
            ("O\tegg\tbeside:pan\nM\tcrack\n//\n", 1, "unknown relation kind"),
            ("O\tegg\nS\traw\t{a,,b}\nM\tcrack\n//\n", 2, "malformed ingredient list"),
            ("O\tegg\nO\tegg\nM\tcrack\n//\n", 4, "appears twice"),
            ("O\tegg\nM\tcrack\t2:00\t1:00\n//\n", 2, "after it ends"),
        ];
        for (text, line, msg) in cases {
            let (g, diags) = parse_graph(text);
            assert!(g.is_empty(), "{text:?}");
            let err = diags.iter().find(|d| d.is_error()).unwrap_or_else(|| panic!("{text:?}"));
            assert_eq!(err.line_number, line, "{text:?}: {err}");
            assert!(err.message.contains(msg), "{text:?}: {err}");
        }
    }

    #[test]
    fn errors_drop_only_the_bad_unit() {
        let text = "O\tegg\nX\t?\nM\tcrack\n//\nO\tegg\nM\tcrack\nO\tegg\nS\tcracked\n//\n";
        let (g, diags) = parse_graph(text);
        assert_eq!(g.len(), 1);
        assert_eq!(diags.len(), 1);
    }

    #[test]
    fn tags_are_case_insensitive_and_written_lowercase() {
        let (g, diags) = parse_graph("o\tEgg\nS\tRaw\nm\tCrack\n//\n");
        assert!(diags.is_empty());
        assert_eq!(serialize_graph(&g), "o\tegg\ns\traw\nm\tcrack\n//\n");
    }

    #[test]
    fn duplicate_state_and_unit_warn() {
        let unit = "O\tegg\nS\traw\nS\traw\nM\tcrack\n//\n";
        let (g, diags) = parse_graph(&format!("{unit}{unit}"));
        assert_eq!(g.len(), 1);
        assert!(!has_errors(&diags));
        assert_eq!(diags.len(), 3);
    }

    #[test]
    fn ingredients_without_states() {
        let (g, diags) = parse_graph("O\tbowl\nS\t{egg,milk}\nM\tstir\n//\n");
        assert!(diags.is_empty(), "{diags:?}");
        assert_eq!(g.units()[0].inputs[0].ingredients, vec!["egg", "milk"]);
        assert!(g.units()[0].inputs[0].states.is_empty());
        assert_eq!(
            serialize_graph(&g),
            "o\tbowl\ns\t{egg,milk}\nm\tstir\n//\n"
        );
    }

    #[test]
    fn one_unit_has_one_terminator() {
        let (g, _) = parse_graph("O\tegg\nM\tcrack\n//\n");
        let out = serialize_graph(&g);
        assert_eq!(out.lines().filter(|l| *l == "//").count(), 1);
        assert!(out.ends_with("//\n") && !out.ends_with("\n\n"));
    }

    #[test]
    fn round_trip_lemon() {
        let (g, _) = parse_graph(LEMON);
        let once = serialize_graph(&g);
        let (again, diags) = parse_graph(&once);
        assert!(diags.is_empty());
        assert!(g.units().iter().zip(again.units()).all(|(a, b)| unit_equals(a, b)));
        assert_eq!(serialize_graph(&again), once);
    }

    #[test]
    fn partial_timestamps_round_trip() {
        let (g, diags) = parse_graph("O\tegg\nM\tcrack\t\t0:30\n//\n");
        assert!(diags.is_empty());
        assert_eq!(g.units()[0].motion.start_time, None);
        assert_eq!(g.units()[0].motion.end_time.as_deref(), Some("0:30"));
        assert_eq!(serialize_graph(&g), "o\tegg\nm\tcrack\t\t0:30\n//\n");
    }

    #[test]
    fn kitchen_lines() {
        let (k, diags) = parse_kitchen(
            "# inventory\nlemon\twhole\nbowl\t{egg,milk}\npan\tclean,hot\t{butter}\nknife\nknife\n",
        );
        assert_eq!(diags.len(), 1);
        assert!(!diags[0].is_error());
        assert_eq!(k.len(), 4);
        assert!(k.contains(&Descriptor::new("bowl", [], ["milk", "egg"])));
        assert!(k.contains(&Descriptor::new("pan", ["hot", "clean"], ["butter"])));
        let (again, _) = parse_kitchen(&serialize_kitchen(&k));
        assert_eq!(again, k);
    }

    #[test]
    fn bad_kitchen_line() {
        let (_, diags) = parse_kitchen("\tsliced\n");
        assert!(diags[0].is_error());
        assert!(parse_descriptor("egg\traw\t{x\t").is_err());
    }
}
