//! Editable settings: recipe verb classes, respondent weighting and the
//! ingredient tokenizer's stop words. Everything has a built-in default; a
//! TOML file only needs to mention the parts it overrides.
//!
//! ```toml
//! [recipe]
//! route_verbs = ["pour", "add", "place", "transfer", "sprinkle"]
//!
//! [weights]
//! proficiency = [1.0, 1.25, 1.5, 2.0, 3.0]
//! exact_dish_bonus = 0.25
//! ```

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Environment variable naming the config file used by the CLI.
pub const CONFIG_ENV: &str = "FOONKIT_CONFIG";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("invalid config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RecipeConfig {
    /// Motions rendered with a "from X to Y" clause.
    pub route_verbs: BTreeSet<String>,
    /// Motions rendered with a trailing "with <utensil>" clause.
    pub utensil_verbs: BTreeSet<String>,
    /// State words whose change alone makes a unit non-instructive.
    pub housekeeping_states: BTreeSet<String>,
}

fn set(items: &[&str]) -> BTreeSet<String> {
    items.iter().map(|s| s.to_string()).collect()
}

impl Default for RecipeConfig {
    fn default() -> Self {
        RecipeConfig {
            route_verbs: set(&["pour", "add", "place", "transfer"]),
            utensil_verbs: set(&["mix", "stir", "beat", "whisk"]),
            housekeeping_states: set(&["clean", "dirty", "empty"]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeightScheme {
    /// Weight per proficiency level, from "no experience" to "culinary
    /// training". Must be positive and non-decreasing.
    pub proficiency: [f64; 5],
    /// Added when the respondent has made this exact dish.
    pub exact_dish_bonus: f64,
}

impl Default for WeightScheme {
    fn default() -> Self {
        WeightScheme {
            proficiency: [1.0, 1.5, 2.0, 2.5, 3.0],
            exact_dish_bonus: 0.5,
        }
    }
}

impl WeightScheme {
    pub fn check(&self) -> Result<(), ConfigError> {
        if self.proficiency.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(ConfigError::Invalid(
                "proficiency weights must be positive".into(),
            ));
        }
        if self.proficiency.windows(2).any(|w| w[1] < w[0]) {
            return Err(ConfigError::Invalid(
                "proficiency weights must be non-decreasing".into(),
            ));
        }
        if !(self.exact_dish_bonus.is_finite() && self.exact_dish_bonus >= 0.0) {
            return Err(ConfigError::Invalid(
                "exact_dish_bonus must be a non-negative number".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TokenizerConfig {
    /// Words dropped from ingredient lines: measurement units, quantities,
    /// preparation adjectives and function words.
    pub stop_words: BTreeSet<String>,
}

const DEFAULT_STOP_WORDS: &[&str] = &[
    // units
    "cup", "cups", "c", "tablespoon", "tablespoons", "tbsp", "tbs", "tbl", "teaspoon",
    "teaspoons", "tsp", "ounce", "ounces", "oz", "pound", "pounds", "lb", "lbs", "gram",
    "grams", "g", "kg", "kilogram", "kilograms", "ml", "milliliter", "milliliters", "l",
    "liter", "liters", "litre", "litres", "pint", "pints", "quart", "quarts", "gallon",
    "gallons", "pinch", "pinches", "dash", "dashes", "clove", "cloves", "can", "cans",
    "package", "packages", "pkg", "slice", "slices", "piece", "pieces", "stick", "sticks",
    "bunch", "handful", "sprig", "sprigs", "inch", "inches", "large", "medium", "small",
    // preparation
    "chopped", "diced", "minced", "sliced", "grated", "shredded", "fresh", "freshly",
    "ground", "beaten", "melted", "softened", "finely", "roughly", "thinly", "peeled",
    "crushed", "cooked", "whole", "optional", "taste", "divided", "room", "temperature",
    // function words
    "a", "an", "and", "or", "of", "the", "to", "for", "with", "in", "into", "on", "about",
    "plus", "more", "as", "needed", "some", "few", "each", "at", "from", "recipe", "style",
];

impl Default for TokenizerConfig {
    fn default() -> Self {
        TokenizerConfig {
            stop_words: set(DEFAULT_STOP_WORDS),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub recipe: RecipeConfig,
    pub weights: WeightScheme,
    pub tokenizer: TokenizerConfig,
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: Config = toml::from_str(text)?;
        cfg.weights.check()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Config::from_toml(&text)
    }

    /// Loads the file named by `FOONKIT_CONFIG`, or the defaults when unset.
    pub fn from_env() -> Result<Self, ConfigError> {
        match std::env::var_os(CONFIG_ENV) {
            Some(path) if !path.is_empty() => Config::load(path),
            _ => Ok(Config::default()),
        }
    }
}
