//! Reference recipe corpora and ingredient-overlap matching.
//!
//! Corpora are JSON arrays of recipes (`id`, `title`,
//! `ingredients[].text`, `instructions[].text`); the field paths can be
//! changed through [`CorpusSchema`]. A generated recipe is paired with corpus
//! entries by the Jaccard index of their normalized ingredient tokens, plus a
//! small bonus when the titles share a content word.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

use crate::config::TokenizerConfig;
use crate::recipegen::Recipe;

/// Added to the overlap score when titles share a content word.
pub const TITLE_BONUS: f64 = 0.1;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read corpus {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed JSON at byte {offset} (line {line}, column {column}): {message}")]
    Json {
        offset: usize,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("corpus must be a JSON array of recipe objects")]
    NotAnArray,
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("k must be at least 1")]
    InvalidK,
    #[error("invalid field path {0:?}")]
    InvalidPath(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TextRecipe {
    pub id: String,
    pub title: String,
    pub ingredients: Vec<String>,
    pub instructions: Vec<String>,
}

/// A field path: `name` (a string or array of strings) or `name[].sub`
/// (an array of objects, reading `sub` from each).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldPath {
    field: String,
    item_field: Option<String>,
}

impl FieldPath {
    pub fn parse(path: &str) -> Result<Self, CorpusError> {
        let bad = || CorpusError::InvalidPath(path.to_string());
        match path.split_once("[].") {
            Some((field, sub)) if !field.is_empty() && !sub.is_empty() => Ok(FieldPath {
                field: field.to_string(),
                item_field: Some(sub.to_string()),
            }),
            Some(_) => Err(bad()),
            None if !path.is_empty() && !path.contains('[') => Ok(FieldPath {
                field: path.to_string(),
                item_field: None,
            }),
            None => Err(bad()),
        }
    }

    fn scalar(&self, obj: &Value) -> Option<String> {
        match obj.get(&self.field)? {
            Value::String(s) => Some(s.clone()),
            Value::Number(n) => Some(n.to_string()),
            _ => None,
        }
    }

    fn list(&self, obj: &Value) -> Option<Vec<String>> {
        let items = obj.get(&self.field)?.as_array()?;
        items
            .iter()
            .map(|item| match &self.item_field {
                Some(sub) => item.get(sub)?.as_str().map(String::from),
                None => item.as_str().map(String::from),
            })
            .map(|s| s.map(|s| s.trim().to_string()))
            .filter(|s| s.as_ref().is_none_or(|s| !s.is_empty()))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusSchema {
    pub id: FieldPath,
    pub title: FieldPath,
    pub ingredients: FieldPath,
    pub instructions: FieldPath,
}

impl Default for CorpusSchema {
    fn default() -> Self {
        CorpusSchema {
            id: FieldPath::parse("id").unwrap(),
            title: FieldPath::parse("title").unwrap(),
            ingredients: FieldPath::parse("ingredients[].text").unwrap(),
            instructions: FieldPath::parse("instructions[].text").unwrap(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusWarning {
    /// Position of the entry in the JSON array.
    pub index: usize,
    pub message: String,
}

fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    let line_start: usize = text
        .split_inclusive('\n')
        .take(line.saturating_sub(1))
        .map(str::len)
        .sum();
    (line_start + column.saturating_sub(1)).min(text.len())
}

/// Parses a corpus. Invalid entries are skipped with a warning; valid ones
/// are returned in file order.
pub fn parse_corpus(
    text: &str,
    schema: &CorpusSchema,
) -> Result<(Vec<TextRecipe>, Vec<CorpusWarning>), CorpusError> {
    let value: Value = serde_json::from_str(text).map_err(|e| CorpusError::Json {
        offset: byte_offset(text, e.line(), e.column()),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let Value::Array(entries) = value else {
        return Err(CorpusError::NotAnArray);
    };
    let mut recipes = Vec::new();
    let mut warnings = Vec::new();
    let mut ids = BTreeSet::new();
    for (index, entry) in entries.iter().enumerate() {
        let mut warn = |message: String| warnings.push(CorpusWarning { index, message });
        if !entry.is_object() {
            warn("entry is not an object".into());
            continue;
        }
        let Some(id) = schema.id.scalar(entry).filter(|s| !s.trim().is_empty()) else {
            warn("missing id".into());
            continue;
        };
        if !ids.insert(id.clone()) {
            warn(format!("duplicate id {id:?}"));
            continue;
        }
        let title = schema.title.scalar(entry).unwrap_or_default();
        let ingredients = schema.ingredients.list(entry).unwrap_or_default();
        if ingredients.is_empty() {
            warn(format!("recipe {id:?} has no ingredients"));
            continue;
        }
        let instructions = schema.instructions.list(entry).unwrap_or_default();
        if instructions.is_empty() {
            warn(format!("recipe {id:?} has no instructions"));
            continue;
        }
        recipes.push(TextRecipe {
            id,
            title: title.trim().to_string(),
            ingredients,
            instructions,
        });
    }
    Ok((recipes, warnings))
}

pub fn load_corpus(
    path: impl AsRef<Path>,
    schema: &CorpusSchema,
) -> Result<(Vec<TextRecipe>, Vec<CorpusWarning>), CorpusError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_corpus(&text, schema)
}

fn singular(word: &str) -> String {
    if word.len() <= 3 || word.ends_with("ss") {
        return word.to_string();
    }
    if let Some(stem) = word.strip_suffix("ies") {
        return format!("{stem}y");
    }
    if let Some(stem) = word.strip_suffix("oes") {
        return format!("{stem}o");
    }
    word.strip_suffix('s').unwrap_or(word).to_string()
}

/// Lowercase alphabetic words with stop words and units removed, folded to
/// a crude singular.
pub fn tokenize(text: &str, cfg: &TokenizerConfig) -> BTreeSet<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphabetic())
        .filter(|w| w.len() > 1 && !cfg.stop_words.contains(*w))
        .map(singular)
        .filter(|w| !cfg.stop_words.contains(w))
        .collect()
}

pub fn ingredient_tokens<S: AsRef<str>>(lines: &[S], cfg: &TokenizerConfig) -> BTreeSet<String> {
    lines
        .iter()
        .flat_map(|l| tokenize(l.as_ref(), cfg))
        .collect()
}

/// Jaccard index `|a ∩ b| / |a ∪ b|`; two empty sets score 0.
pub fn ingredient_overlap(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        return 0.0;
    }
    a.intersection(b).count() as f64 / union as f64
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Match<'a> {
    pub recipe: &'a TextRecipe,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchSummary {
    pub id: String,
    pub title: String,
    pub score: f64,
}

impl From<&Match<'_>> for MatchSummary {
    fn from(m: &Match<'_>) -> Self {
        MatchSummary {
            id: m.recipe.id.clone(),
            title: m.recipe.title.clone(),
            score: m.score,
        }
    }
}

/// The `k` corpus recipes closest to `generated`, best first; ties keep
/// corpus order.
pub fn match_equivalent<'a>(
    generated: &Recipe,
    corpus: &'a [TextRecipe],
    k: usize,
    cfg: &TokenizerConfig,
) -> Result<Vec<Match<'a>>, CorpusError> {
    if k == 0 {
        return Err(CorpusError::InvalidK);
    }
    if corpus.is_empty() {
        return Err(CorpusError::EmptyCorpus);
    }
    let tokens = if generated.ingredients.is_empty() {
        ingredient_tokens(&generated.steps, cfg)
    } else {
        ingredient_tokens(&generated.ingredients, cfg)
    };
    let title = tokenize(&generated.title, cfg);
    let mut scored: Vec<Match<'a>> = corpus
        .iter()
        .map(|recipe| {
            let mut score = ingredient_overlap(&tokens, &ingredient_tokens(&recipe.ingredients, cfg));
            if !title.is_disjoint(&tokenize(&recipe.title, cfg)) {
                score = (score + TITLE_BONUS).min(1.0);
            }
            Match { recipe, score }
        })
        .collect();
    // sort_by is stable, so equal scores keep corpus order
    scored.sort_by(|a, b| b.score.partial_cmp(&a.score).unwrap_or(Ordering::Equal));
    scored.truncate(k);
    Ok(scored)
}
