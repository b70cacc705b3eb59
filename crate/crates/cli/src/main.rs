use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};

use foonkit::config::Config;
use foonkit::corpus::{load_corpus, match_equivalent, CorpusSchema, FieldPath, MatchSummary};
use foonkit::parser::{
    has_errors, load_graph, load_kitchen, parse_descriptor, serialize_graph, LoadError,
};
use foonkit::recipegen::{generate_recipe, PortionTable, Recipe};
use foonkit::stats::survey::{build_report, read_ratings, read_respondents, ReportOptions};
use foonkit::stats::{SampleSize, TestKind};
use foonkit::{merge, reachable_goals, retrieve, validate, FoonGraph, ParseDiagnostic, TaskTree};

/// Build, search and evaluate functional object-oriented networks of
/// cooking knowledge.
///
/// Exit status: 0 on success, 1 when the input is well-formed but the task
/// fails (unreachable goal, validation violations, cyclic tree), 2 on usage
/// errors and unreadable or malformed input. Settings are read from the
/// TOML file named by FOONKIT_CONFIG when it is set.
#[derive(Parser)]
#[command(name = "foonkit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a .foon file for syntax errors and structural violations
    Validate {
        foon: PathBuf,
    },
    /// Merge .foon files into one graph without duplicate units
    Merge {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
    /// Extract the task tree that makes GOAL from the kitchen's items
    Retrieve {
        /// Universal FOON to search
        #[arg(long)]
        foon: PathBuf,
        /// Goal as `name|state,state|{ingredient,...}`; tabs work too
        #[arg(long)]
        goal: String,
        /// Kitchen file, one descriptor per line
        #[arg(long)]
        kitchen: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// List every object the kitchen's items can be turned into
    Reachable {
        #[arg(long)]
        foon: PathBuf,
        #[arg(long)]
        kitchen: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// Turn a task tree into numbered recipe steps
    Generate {
        tree: PathBuf,
        /// Portions as TSV (`name<TAB>portion`) or a JSON object
        #[arg(long)]
        portions: Option<PathBuf>,
        /// Recipe title; defaults to the tree's file name
        #[arg(long)]
        title: Option<String>,
        /// Write JSON instead of text
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        out: Output,
    },
    /// Rank corpus recipes by ingredient overlap with a generated recipe
    Match {
        /// Recipe JSON written by `generate --json`
        recipe: PathBuf,
        /// JSON array of corpus recipes
        #[arg(long)]
        corpus: PathBuf,
        #[arg(short, default_value_t = 5)]
        k: usize,
        #[command(flatten)]
        schema: SchemaArgs,
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        out: Output,
    },
    /// Compare FOON and corpus recipe ratings question by question
    Stats {
        /// CSV with respondent_id, question_id, recipe_source, rating
        #[arg(long)]
        ratings: PathBuf,
        /// CSV with respondent_id, q1, q2, q3
        #[arg(long)]
        respondents: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        /// Equivalence margin in pooled standard deviations
        #[arg(long, default_value_t = 0.3)]
        cohen_d: f64,
        #[arg(long, value_enum, default_value_t = TestArg::Welch)]
        test: TestArg,
        /// Use Kish's effective sample size instead of the rating count
        #[arg(long)]
        kish: bool,
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        out: Output,
    },
    /// Print the manual page (roff)
    Man,
}

#[derive(Args)]
struct Output {
    /// Output file; standard output when omitted
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SchemaArgs {
    #[arg(long, default_value = "id")]
    id_field: String,
    #[arg(long, default_value = "title")]
    title_field: String,
    /// Field path; `name[].sub` reads `sub` from each array element
    #[arg(long, default_value = "ingredients[].text")]
    ingredients_field: String,
    #[arg(long, default_value = "instructions[].text")]
    instructions_field: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum TestArg {
    Welch,
    Student,
}

/// Marks a failure on well-formed input (exit 1); anything else exits 2.
#[derive(Debug)]
struct TaskFailed(anyhow::Error);

impl std::fmt::Display for TaskFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:#}", self.0)
    }
}

impl std::error::Error for TaskFailed {}

fn task(e: impl Into<anyhow::Error>) -> anyhow::Error {
    TaskFailed(e.into()).into()
}

type Outcome = anyhow::Result<()>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("foonkit: {e:#}");
            if e.is::<TaskFailed>() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}

/// Text with exactly one trailing newline.
fn one_newline(text: &str) -> String {
    let mut s = text.trim_end_matches('\n').to_string();
    s.push('\n');
    s
}

fn emit(out: &Output, text: &str) -> anyhow::Result<()> {
    let text = one_newline(text);
    match &out.out {
        Some(path) => {
            fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn report(path: &Path, diagnostics: &[ParseDiagnostic]) -> anyhow::Result<()> {
    for d in diagnostics {
        eprintln!("{}: {d}", path.display());
    }
    if has_errors(diagnostics) {
        Err(anyhow!("{} has syntax errors", path.display()))
    } else {
        Ok(())
    }
}

fn read_graph(path: &Path) -> anyhow::Result<FoonGraph> {
    let (graph, diagnostics) = load_graph(path)?;
    report(path, &diagnostics)?;
    Ok(graph)
}

fn read_kitchen(path: &Path) -> anyhow::Result<foonkit::Kitchen> {
    let (kitchen, diagnostics) = load_kitchen(path)?;
    report(path, &diagnostics)?;
    Ok(kitchen)
}

fn config() -> anyhow::Result<Config> {
    Ok(Config::from_env()?)
}

fn run(command: Command) -> Outcome {
    match command {
        Command::Validate { foon } => {
            let graph = read_graph(&foon)?;
            let violations = validate(&graph);
            for v in &violations {
                eprintln!("{}: {v}", foon.display());
            }
            println!("{} units, {} objects", graph.len(), graph.descriptor_count());
            if violations.is_empty() {
                Ok(())
            } else {
                Err(task(anyhow!("{} violations", violations.len())))
            }
        }
        Command::Merge { inputs, out } => {
            let graphs = inputs
                .iter()
                .map(|p| read_graph(p))
                .collect::<anyhow::Result<Vec<_>>>()?;
            let before: usize = graphs.iter().map(FoonGraph::len).sum();
            let merged = merge(&graphs);
            emit(&out, &serialize_graph(&merged))?;
            let counts = format!(
                "{} files, {} units in, {} units out, {} duplicates removed",
                inputs.len(),
                before,
                merged.len(),
                before - merged.len()
            );
            // keep stdout clean when it carries the graph
            if out.out.is_some() {
                println!("{counts}");
            } else {
                eprintln!("{counts}");
            }
            Ok(())
        }
        Command::Retrieve {
            foon,
            goal,
            kitchen,
            out,
        } => {
            let graph = read_graph(&foon)?;
            let kitchen = read_kitchen(&kitchen)?;
            let goal = parse_descriptor(&goal.replace('|', "\t"))
                .map_err(|m| anyhow!("invalid goal: {m}"))?;
            let tree = retrieve(&graph, &goal, &kitchen).map_err(task)?;
            if tree.is_empty() {
                eprintln!("goal is already in the kitchen; the task tree is empty");
            }
            emit(&out, &serialize_graph(&tree.graph))?;
            Ok(())
        }
        Command::Reachable { foon, kitchen, out } => {
            let graph = read_graph(&foon)?;
            let kitchen = read_kitchen(&kitchen)?;
            let reached = reachable_goals(&graph, &kitchen);
            let text: String = reached
                .iter()
                .map(|d| foonkit::parser::format_descriptor(d) + "\n")
                .collect();
            eprintln!("{} reachable objects", reached.len());
            emit(&out, &text)?;
            Ok(())
        }
        Command::Generate {
            tree,
            portions,
            title,
            json,
            out,
        } => {
            let cfg = config()?;
            let graph = read_graph(&tree)?;
            let portions = match portions {
                Some(p) => PortionTable::load(&p)?,
                None => PortionTable::new(),
            };
            let title = title.unwrap_or_else(|| {
                tree.file_stem()
                    .map(|s| s.to_string_lossy().replace(['_', '-'], " "))
                    .unwrap_or_default()
            });
            let units = graph.len();
            let tree = TaskTree::from_subgraph(graph);
            let recipe = generate_recipe(&tree, &portions, &title, &cfg.recipe).map_err(task)?;
            if recipe.steps.is_empty() && units > 0 {
                eprintln!("warning: all {units} units were skipped; the recipe has no steps");
            }
            emit(&out, &if json { recipe.to_json() } else { recipe.to_text() })?;
            Ok(())
        }
        Command::Match {
            recipe,
            corpus,
            k,
            schema,
            json,
            out,
        } => {
            let cfg = config()?;
            let text = fs::read_to_string(&recipe)
                .with_context(|| format!("cannot read {}", recipe.display()))?;
            let generated = Recipe::from_json(&text)
                .with_context(|| format!("{} is not a recipe JSON file", recipe.display()))?;
            let schema = CorpusSchema {
                id: FieldPath::parse(&schema.id_field)?,
                title: FieldPath::parse(&schema.title_field)?,
                ingredients: FieldPath::parse(&schema.ingredients_field)?,
                instructions: FieldPath::parse(&schema.instructions_field)?,
            };
            let (recipes, warnings) = load_corpus(&corpus, &schema)?;
            for w in &warnings {
                eprintln!("{}: entry {}: {}", corpus.display(), w.index, w.message);
            }
            let matches = match_equivalent(&generated, &recipes, k, &cfg.tokenizer)?;
            let summaries: Vec<MatchSummary> = matches.iter().map(MatchSummary::from).collect();
            let text = if json {
                serde_json::to_string_pretty(&summaries)?
            } else {
                summaries
                    .iter()
                    .map(|m| format!("{:.3}\t{}\t{}\n", m.score, m.id, m.title))
                    .collect()
            };
            emit(&out, &text)?;
            Ok(())
        }
        Command::Stats {
            ratings,
            respondents,
            alpha,
            cohen_d,
            test,
            kish,
            json,
            out,
        } => {
            let cfg = config()?;
            let open = |p: &PathBuf| {
                fs::File::open(p).map_err(|e| LoadError::Io {
                    path: p.display().to_string(),
                    source: e,
                })
            };
            let rows = read_ratings(&ratings.display().to_string(), open(&ratings)?)?;
            let people = read_respondents(&respondents.display().to_string(), open(&respondents)?)?;
            let opts = ReportOptions {
                alpha,
                cohen_d,
                kind: match test {
                    TestArg::Welch => TestKind::Welch,
                    TestArg::Student => TestKind::Student,
                },
                sample_size: if kish { SampleSize::Kish } else { SampleSize::Count },
            };
            let report = build_report(&rows, &people, &cfg.weights, &opts)?;
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            emit(&out, &if json { report.to_json() } else { report.to_table() })?;
            Ok(())
        }
        Command::Man => {
            let mut buf = Vec::new();
            clap_mangen::Man::new(Cli::command())
                .render(&mut buf)
                ?;
            emit(&Output { out: None }, &String::from_utf8_lossy(&buf))?;
            Ok(())
        }
    }
}
