//! Survey data: respondent background answers, rating tables and the
//! per-question FOON-versus-corpus report.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::io::Read;

use serde::Serialize;
use thiserror::Error;

use super::{
    t_test, tost, EquivalenceReport, RatingSample, SampleSize, StatsError, SummaryStats,
    TestKind, TestReport,
};
use crate::config::WeightScheme;

pub const PROFICIENCY_OPTIONS: [&str; 5] = [
    "I have no experience in cooking",
    "Beginner home cook",
    "Intermediate home cook",
    "Advanced home cook",
    "I have received culinary training",
];

pub const RECIPE_SOURCE_OPTIONS: [&str; 4] = [
    "I mostly use recipes that family or friends shared",
    "I look for recipes online",
    "I follow recipes from cookbooks",
    "I only use ingredients I have available",
];

pub const FAMILIARITY_OPTIONS: [&str; 4] = [
    "I have made this exact dish",
    "Yes, but I left out some of the ingredients listed",
    "Yes, but I added some ingredients not listed",
    "No",
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{question}: unknown option {answer:?}")]
pub struct UnknownOption {
    pub question: &'static str,
    pub answer: String,
}

fn squash(s: &str) -> String {
    s.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .trim_end_matches('.')
        .to_lowercase()
}

/// Matches an answer against an option list by full text (case and spacing
/// insensitive) or by 1-based option number.
fn pick(question: &'static str, options: &[&str], answer: &str) -> Result<usize, UnknownOption> {
    let a = squash(answer);
    if let Ok(k) = a.parse::<usize>() {
        if (1..=options.len()).contains(&k) {
            return Ok(k - 1);
        }
    }
    options
        .iter()
        .position(|o| squash(o) == a)
        .ok_or_else(|| UnknownOption {
            question,
            answer: answer.to_string(),
        })
}

/// One respondent's background answers. Only the proficiency question is
/// mandatory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SurveyAnswers {
    /// 0 = no experience .. 4 = culinary training.
    pub proficiency: usize,
    pub recipe_source: Option<usize>,
    /// 0 = made this exact dish .. 3 = no.
    pub familiarity: Option<usize>,
}

impl SurveyAnswers {
    pub fn parse(q1: &str, q2: &str, q3: &str) -> Result<Self, UnknownOption> {
        let optional = |question, options: &[&str], a: &str| {
            if a.trim().is_empty() {
                Ok(None)
            } else {
                pick(question, options, a).map(Some)
            }
        };
        Ok(SurveyAnswers {
            proficiency: pick("q1", &PROFICIENCY_OPTIONS, q1)?,
            recipe_source: optional("q2", &RECIPE_SOURCE_OPTIONS, q2)?,
            familiarity: optional("q3", &FAMILIARITY_OPTIONS, q3)?,
        })
    }
}

/// Respondent weight: the proficiency level's weight plus the bonus for
/// having made the exact dish. The recipe-source answer carries no weight.
pub fn proficiency_weight(answers: &SurveyAnswers, scheme: &WeightScheme) -> f64 {
    let base = scheme.proficiency[answers.proficiency.min(4)];
    match answers.familiarity {
        Some(0) => base + scheme.exact_dish_bonus,
        _ => base,
    }
}

#[derive(Debug, Error)]
pub enum SurveyError {
    #[error("{file}: {source}")]
    Csv {
        file: String,
        source: csv::Error,
    },
    #[error("{file}: missing column {column:?}")]
    MissingColumn { file: String, column: &'static str },
    #[error("{file} line {line}: {message}")]
    Row {
        file: String,
        line: u64,
        message: String,
    },
    #[error("respondent {0:?} has ratings but no background answers")]
    UnknownRespondent(String),
    #[error("no question has enough ratings from both sources")]
    NoQuestions,
    #[error(transparent)]
    Stats(#[from] StatsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Foon,
    Corpus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatingRow {
    pub respondent: String,
    pub question: String,
    pub source: Source,
    pub rating: f64,
}

struct Table {
    file: String,
    headers: HashMap<String, usize>,
    reader: csv::Reader<Box<dyn Read>>,
}

impl Table {
    fn open(file: &str, input: Box<dyn Read>) -> Result<Self, SurveyError> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(input);
        let headers = reader
            .headers()
            .map_err(|source| SurveyError::Csv {
                file: file.to_string(),
                source,
            })?
            .iter()
            .enumerate()
            .map(|(i, h)| (h.to_lowercase(), i))
            .collect();
        Ok(Table {
            file: file.to_string(),
            headers,
            reader,
        })
    }

    fn column(&self, name: &'static str) -> Result<usize, SurveyError> {
        self.headers
            .get(name)
            .copied()
            .ok_or_else(|| SurveyError::MissingColumn {
                file: self.file.clone(),
                column: name,
            })
    }

    fn rows(&mut self) -> Result<Vec<(u64, csv::StringRecord)>, SurveyError> {
        let mut out = Vec::new();
        for rec in self.reader.records() {
            let rec = rec.map_err(|source| SurveyError::Csv {
                file: self.file.clone(),
                source,
            })?;
            let line = rec.position().map_or(0, |p| p.line());
            if rec.iter().all(|f| f.is_empty()) {
                continue;
            }
            out.push((line, rec));
        }
        Ok(out)
    }
}

fn field(rec: &csv::StringRecord, col: usize) -> &str {
    rec.get(col).unwrap_or("")
}

const SKIP_MARKERS: [&str; 4] = ["", "skip", "skipped", "na"];

/// Reads `respondent_id,question_id,recipe_source,rating`. Skipped answers
/// (empty, `skip`, `skipped`, `na`) are left out.
pub fn read_ratings(file: &str, input: impl Read + 'static) -> Result<Vec<RatingRow>, SurveyError> {
    let mut t = Table::open(file, Box::new(input))?;
    let (rid, qid, src, rat) = (
        t.column("respondent_id")?,
        t.column("question_id")?,
        t.column("recipe_source")?,
        t.column("rating")?,
    );
    let mut out = Vec::new();
    for (line, rec) in t.rows()? {
        let bad = |message: String| SurveyError::Row {
            file: file.to_string(),
            line,
            message,
        };
        let raw = field(&rec, rat);
        if SKIP_MARKERS.contains(&raw.to_lowercase().as_str()) {
            continue;
        }
        let source = match field(&rec, src).to_lowercase().as_str() {
            "foon" => Source::Foon,
            "corpus" => Source::Corpus,
            other => return Err(bad(format!("recipe_source must be foon or corpus, got {other:?}"))),
        };
        let rating: f64 = raw
            .parse()
            .map_err(|_| bad(format!("rating {raw:?} is not a number")))?;
        if !(super::RATING_RANGE.0..=super::RATING_RANGE.1).contains(&rating) {
            return Err(bad(format!("rating {rating} is outside [1, 10]")));
        }
        let (respondent, question) = (field(&rec, rid), field(&rec, qid));
        if respondent.is_empty() || question.is_empty() {
            return Err(bad("empty respondent_id or question_id".into()));
        }
        out.push(RatingRow {
            respondent: respondent.to_string(),
            question: question.to_string(),
            source,
            rating,
        });
    }
    Ok(out)
}

/// Reads `respondent_id,q1,q2,q3`. `q2` and `q3` may be absent or empty.
pub fn read_respondents(
    file: &str,
    input: impl Read + 'static,
) -> Result<BTreeMap<String, SurveyAnswers>, SurveyError> {
    let mut t = Table::open(file, Box::new(input))?;
    let rid = t.column("respondent_id")?;
    let q1 = t.column("q1")?;
    let (q2, q3) = (t.column("q2").ok(), t.column("q3").ok());
    let mut out = BTreeMap::new();
    for (line, rec) in t.rows()? {
        let bad = |message: String| SurveyError::Row {
            file: file.to_string(),
            line,
            message,
        };
        let opt = |c: Option<usize>| c.map_or("", |c| field(&rec, c));
        let answers = SurveyAnswers::parse(field(&rec, q1), opt(q2), opt(q3))
            .map_err(|e| bad(e.to_string()))?;
        let id = field(&rec, rid);
        if id.is_empty() {
            return Err(bad("empty respondent_id".into()));
        }
        if out.insert(id.to_string(), answers).is_some() {
            return Err(bad(format!("duplicate respondent {id:?}")));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportOptions {
    pub alpha: f64,
    pub cohen_d: f64,
    pub kind: TestKind,
    pub sample_size: SampleSize,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions {
            alpha: 0.05,
            cohen_d: 0.3,
            kind: TestKind::Welch,
            sample_size: SampleSize::Count,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuestionReport {
    pub question: String,
    pub foon: SummaryStats,
    pub corpus: SummaryStats,
    pub test: TestReport,
    pub equivalence: EquivalenceReport,
    /// Both samples had zero spread; p and the interval are set by hand.
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurveyReport {
    pub alpha: f64,
    pub cohen_d: f64,
    pub test: TestKind,
    pub sample_size: SampleSize,
    pub questions: Vec<QuestionReport>,
    pub warnings: Vec<String>,
}

/// Runs both tests on one question. When both samples are constant the
/// difference is exact: p is 1 for equal means and 0 otherwise, and the
/// interval collapses onto the difference.
pub fn compare(
    question: &str,
    foon: SummaryStats,
    corpus: SummaryStats,
    opts: &ReportOptions,
) -> Result<QuestionReport, StatsError> {
    match t_test(&foon, &corpus, opts.alpha, opts.kind) {
        Ok(test) => Ok(QuestionReport {
            question: question.to_string(),
            foon,
            corpus,
            test,
            equivalence: tost(&foon, &corpus, opts.cohen_d, opts.alpha, opts.kind)?,
            degenerate: false,
        }),
        Err(StatsError::DegenerateVariance { difference }) => {
            if !(opts.cohen_d.is_finite() && opts.cohen_d > 0.0) {
                return Err(StatsError::InvalidEffectSize(opts.cohen_d));
            }
            let same = difference == 0.0;
            let p = if same { 1.0 } else { 0.0 };
            let df = foon.n + corpus.n - 2.0;
            let t = if same {
                0.0
            } else {
                difference.signum() * f64::INFINITY
            };
            Ok(QuestionReport {
                question: question.to_string(),
                foon,
                corpus,
                test: TestReport {
                    kind: opts.kind,
                    t,
                    df,
                    p_value: p,
                    alpha: opts.alpha,
                    reject: p <= opts.alpha,
                },
                equivalence: EquivalenceReport {
                    kind: opts.kind,
                    cohen_d: opts.cohen_d,
                    alpha: opts.alpha,
                    difference,
                    bounds: (0.0, 0.0),
                    ci90: (difference, difference),
                    df,
                    t_lower: t,
                    t_upper: t,
                    p_lower: if difference >= 0.0 { 0.0 } else { 1.0 },
                    p_upper: if difference <= 0.0 { 0.0 } else { 1.0 },
                    equivalent: same,
                },
                degenerate: true,
            })
        }
        Err(e) => Err(e),
    }
}

/// Orders `Q4 < Q5 < Q10`: by the trailing number, then by the full id.
fn question_order(a: &str, b: &str) -> std::cmp::Ordering {
    let num = |s: &str| {
        let digits: String = s.chars().rev().take_while(char::is_ascii_digit).collect();
        digits.chars().rev().collect::<String>().parse::<u64>().ok()
    };
    num(a).cmp(&num(b)).then_with(|| a.cmp(b))
}

/// Builds the per-question report. Questions lacking two ratings from
/// either source are listed in `warnings` and left out.
pub fn build_report(
    ratings: &[RatingRow],
    respondents: &BTreeMap<String, SurveyAnswers>,
    scheme: &WeightScheme,
    opts: &ReportOptions,
) -> Result<SurveyReport, SurveyError> {
    // per question: (ratings, weights) for foon, then corpus
    type Columns = (Vec<f64>, Vec<f64>);
    let mut grouped: BTreeMap<&str, [Columns; 2]> = BTreeMap::new();
    for r in ratings {
        let answers = respondents
            .get(&r.respondent)
            .ok_or_else(|| SurveyError::UnknownRespondent(r.respondent.clone()))?;
        let w = proficiency_weight(answers, scheme);
        let slot = &mut grouped.entry(&r.question).or_default()[r.source as usize];
        slot.0.push(r.rating);
        slot.1.push(w);
    }
    let mut ids: Vec<&str> = grouped.keys().copied().collect();
    ids.sort_by(|a, b| question_order(a, b));

    let mut questions = Vec::new();
    let mut warnings = Vec::new();
    for id in ids {
        let [(fx, fw), (cx, cw)] = grouped.remove(id).unwrap_or_default();
        if fx.len() < 2 || cx.len() < 2 {
            warnings.push(format!(
                "{id}: skipped, {} foon and {} corpus ratings",
                fx.len(),
                cx.len()
            ));
            continue;
        }
        let foon = SummaryStats::from_sample(&RatingSample::new(id, fx, fw)?, opts.sample_size)?;
        let corpus = SummaryStats::from_sample(&RatingSample::new(id, cx, cw)?, opts.sample_size)?;
        match compare(id, foon, corpus, opts) {
            Ok(q) => questions.push(q),
            Err(StatsError::InsufficientData { n }) => {
                warnings.push(format!("{id}: skipped, effective n {n:.2} is below 2"))
            }
            Err(e) => return Err(e.into()),
        }
    }
    if questions.is_empty() {
        return Err(SurveyError::NoQuestions);
    }
    Ok(SurveyReport {
        alpha: opts.alpha,
        cohen_d: opts.cohen_d,
        test: opts.kind,
        sample_size: opts.sample_size,
        questions,
        warnings,
    })
}

/// Two decimals, never "-0.00".
pub fn fmt2(x: f64) -> String {
    let s = format!("{x:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

fn interval(lo: f64, hi: f64) -> String {
    format!("[{},{}]", fmt2(lo), fmt2(hi))
}

impl SurveyReport {
    /// Tab-separated table with one row per question.
    pub fn to_table(&self) -> String {
        let level = format!("{:.4}", 100.0 * (1.0 - 2.0 * self.alpha));
        let level = level.trim_end_matches('0').trim_end_matches('.');
        let mut out = format!("Question\tp-value\tEquivalence bounds\t{level}% TOST CI\n");
        for q in &self.questions {
            let e = &q.equivalence;
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}",
                q.question,
                fmt2(q.test.p_value),
                interval(e.bounds.0, e.bounds.1),
                interval(e.ci90.0, e.ci90.1)
            );
        }
        out
    }

    pub fn to_json(&self) -> String {
        // infinite t of a degenerate row becomes null
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}
