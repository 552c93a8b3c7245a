//! Command-line front end. Exit codes: 0 success, 2 usage or parse error,
//! 3 I/O error.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::classifier::{classify_batch, Priority};
use crate::corpus::{self, AnnotatedSentence};
use crate::error::Error;
use crate::evaluation::{classification_report, MacroMode};
use crate::lexicon::{build_ontology, load_lexicon};
use crate::ontology::{BaseClass, DerivedClass, Ontology};
use crate::policy::{self, filter_text, ContextPolicy};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "toxicbg", version, about = "Ontology-based toxic language classification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
enum Format {
    #[default]
    Json,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Context {
    Forum,
    FamilyFriendly,
}

#[derive(Debug, Args)]
struct InputArgs {
    /// Classify a single sentence.
    #[arg(long, conflicts_with = "input")]
    text: Option<String>,
    /// Corpus JSONL file; defaults to one sentence per line on stdin.
    #[arg(long)]
    input: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Classify sentences against the lexicon.
    Classify {
        #[arg(long)]
        lexicon: PathBuf,
        #[command(flatten)]
        input: InputArgs,
        /// Collapse labels to one class by priority.
        #[arg(long)]
        single_label: bool,
        /// Comma-separated collapse order, e.g. toxic,medical,minority,nontoxic.
        #[arg(long)]
        priority: Option<String>,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Apply a context filter to sentences.
    Filter {
        #[arg(long)]
        lexicon: PathBuf,
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_enum, required_unless_present_any = ["policy_expr", "policy"])]
        context: Option<Context>,
        /// Inline blocked-class expression.
        #[arg(long, conflicts_with_all = ["context", "policy"])]
        policy_expr: Option<String>,
        /// Name of a policy from --policy-file.
        #[arg(long, requires = "policy_file", conflicts_with = "context")]
        policy: Option<String>,
        #[arg(long)]
        policy_file: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Classification report against a labeled gold corpus.
    Evaluate {
        #[arg(long)]
        gold: PathBuf,
        /// Predictions JSONL aligned line by line with the gold corpus.
        #[arg(long, required_unless_present = "lexicon", conflicts_with = "lexicon")]
        pred: Option<PathBuf>,
        /// Predict with the ontology classifier instead of reading --pred.
        #[arg(long)]
        lexicon: Option<PathBuf>,
        #[arg(long)]
        priority: Option<String>,
        /// Macro-average over all four classes.
        #[arg(long)]
        macro_all_classes: bool,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Lexicon statistics and exports.
    Lexicon {
        #[command(subcommand)]
        command: LexiconCommand,
    },
    /// Corpus statistics, splitting and pre-annotation.
    Corpus {
        #[command(subcommand)]
        command: CorpusCommand,
    },
}

#[derive(Debug, Subcommand)]
enum LexiconCommand {
    /// Class counts and co-occurrence matrix.
    Stats {
        path: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Ontology JSON export.
    Export {
        path: PathBuf,
        /// Policies registered as additional derived classes.
        #[arg(long)]
        policy_file: Option<PathBuf>,
    },
    /// Members of a derived class, one per line.
    Members {
        path: PathBuf,
        #[arg(long = "class")]
        class: String,
        #[arg(long)]
        policy_file: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
enum CorpusCommand {
    /// Label and language distributions.
    Stats {
        path: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Stratified train/test split.
    Split {
        path: PathBuf,
        #[arg(long)]
        fraction: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        train_out: Option<PathBuf>,
        #[arg(long)]
        test_out: Option<PathBuf>,
    },
    /// Label every sentence with the collapsed classifier output.
    Annotate {
        path: PathBuf,
        #[arg(long)]
        lexicon: PathBuf,
        #[arg(long)]
        priority: Option<String>,
        /// Write the summary JSON here instead of stderr.
        #[arg(long)]
        summary_out: Option<PathBuf>,
    },
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn io(context: &Path, err: impl std::fmt::Display) -> Self {
        Failure {
            code: EXIT_IO,
            message: format!("{}: {err}", context.display()),
        }
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        Failure {
            code: if err.is_io() { EXIT_IO } else { EXIT_USAGE },
            message: err.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(err: io::Error) -> Self {
        Failure {
            code: EXIT_IO,
            message: err.to_string(),
        }
    }
}

type CliResult<T = ()> = Result<T, Failure>;

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdin: &mut dyn BufRead, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let out: &mut dyn Write = if err.use_stderr() { stderr } else { stdout };
            let _ = write!(out, "{}", err.render());
            return code;
        }
    };
    match dispatch(cli.command, stdin, stdout, stderr) {
        Ok(()) => EXIT_OK,
        Err(failure) => {
            let _ = writeln!(stderr, "error: {}", failure.message);
            failure.code
        }
    }
}

fn dispatch(command: Command, stdin: &mut dyn BufRead, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult {
    match command {
        Command::Classify {
            lexicon,
            input,
            single_label,
            priority,
            format,
        } => {
            let onto = open_lexicon(&lexicon, stderr)?;
            let priority = parse_priority(priority.as_deref())?;
            let sentences = read_sentences(&input, stdin)?;
            let results = classify_batch(&sentences, &onto, single_label.then_some(&priority));
            for (text, c) in sentences.iter().zip(&results) {
                match format {
                    Format::Json => emit_json(stdout, &c.to_record(text))?,
                    Format::Text => {
                        let labels = match c.collapsed {
                            Some(label) => label.token().to_string(),
                            None => c.labels.iter().map(BaseClass::token).collect::<Vec<_>>().join(","),
                        };
                        writeln!(stdout, "{labels}\t{text}")?;
                    }
                }
            }
            Ok(())
        }
        Command::Filter {
            lexicon,
            input,
            context,
            policy_expr,
            policy,
            policy_file,
            format,
        } => {
            let policy = resolve_policy(context, policy_expr, policy, policy_file.as_deref())?;
            let onto = open_lexicon(&lexicon, stderr)?;
            for text in read_sentences(&input, stdin)? {
                let decision = filter_text(&text, &policy, &onto);
                match format {
                    Format::Json => emit_json(
                        stdout,
                        &FilterRecord {
                            text: &text,
                            blocked: decision.blocked,
                            triggering_forms: &decision.triggering_forms,
                        },
                    )?,
                    Format::Text => {
                        let verdict = if decision.blocked { "blocked" } else { "allowed" };
                        writeln!(stdout, "{verdict}\t{}\t{text}", decision.triggering_forms.join(","))?;
                    }
                }
            }
            Ok(())
        }
        Command::Evaluate {
            gold,
            pred,
            lexicon,
            priority,
            macro_all_classes,
            format,
        } => {
            let gold_corpus = open_corpus(&gold)?;
            let gold_labels = labels_of(&gold_corpus, &gold)?;
            let pred_labels = match (pred, lexicon) {
                (Some(path), _) => {
                    let pred_corpus = open_corpus(&path)?;
                    if pred_corpus.len() != gold_corpus.len() {
                        return Err(Error::LengthMismatch {
                            gold: gold_corpus.len(),
                            pred: pred_corpus.len(),
                        }
                        .into());
                    }
                    if let Some(i) = gold_corpus.iter().zip(&pred_corpus).position(|(g, p)| g.text != p.text) {
                        return Err(Failure::usage(format!(
                            "gold and prediction texts differ at record {}",
                            i + 1
                        )));
                    }
                    labels_of(&pred_corpus, &path)?
                }
                (None, Some(lexicon)) => {
                    let onto = open_lexicon(&lexicon, stderr)?;
                    let priority = parse_priority(priority.as_deref())?;
                    let texts: Vec<&str> = gold_corpus.iter().map(|s| s.text.as_str()).collect();
                    classify_batch(&texts, &onto, Some(&priority))
                        .into_iter()
                        .map(|c| c.collapsed.expect("collapsed by classify_batch"))
                        .collect()
                }
                (None, None) => return Err(Failure::usage("either --pred or --lexicon is required")),
            };
            let mode = if macro_all_classes {
                MacroMode::AllClasses
            } else {
                MacroMode::PresentClasses
            };
            let report = classification_report(&gold_labels, &pred_labels, mode)?;
            match format {
                Format::Json => emit_json(stdout, &report)?,
                Format::Text => write!(stdout, "{report}")?,
            }
            Ok(())
        }
        Command::Lexicon { command } => lexicon_command(command, stdout, stderr),
        Command::Corpus { command } => corpus_command(command, stdout, stderr),
    }
}

fn lexicon_command(command: LexiconCommand, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult {
    match command {
        LexiconCommand::Stats { path, format } => {
            let onto = open_lexicon(&path, stderr)?;
            let counts = onto.class_counts();
            let matrix = onto.cooccurrence_matrix();
            let non_toxic_only = onto.non_toxic_only();
            match format {
                Format::Json => emit_json(
                    stdout,
                    &serde_json::json!({
                        "individuals": onto.len(),
                        "class_counts": counts,
                        "cooccurrence": matrix,
                        "non_toxic_only": non_toxic_only,
                    }),
                )?,
                Format::Text => {
                    writeln!(stdout, "individuals: {}", onto.len())?;
                    for c in &counts {
                        writeln!(stdout, "{:<20}{:>6} ({:.1}%)", c.class.name(), c.count, c.percent)?;
                    }
                    writeln!(stdout)?;
                    write!(stdout, "{:<20}", "")?;
                    for class in BaseClass::ALL {
                        write!(stdout, "{:>20}", class.name())?;
                    }
                    writeln!(stdout)?;
                    for class in BaseClass::ALL {
                        write!(stdout, "{:<20}", class.name())?;
                        for n in matrix[class.index()] {
                            write!(stdout, "{n:>20}")?;
                        }
                        writeln!(stdout)?;
                    }
                    if !non_toxic_only.is_empty() {
                        writeln!(stdout, "\nwithout Toxic membership: {}", non_toxic_only.join(", "))?;
                    }
                }
            }
            Ok(())
        }
        LexiconCommand::Export { path, policy_file } => {
            let onto = with_policy_classes(open_lexicon(&path, stderr)?, policy_file.as_deref())?;
            writeln!(stdout, "{}", onto.to_json())?;
            Ok(())
        }
        LexiconCommand::Members {
            path,
            class,
            policy_file,
        } => {
            let onto = with_policy_classes(open_lexicon(&path, stderr)?, policy_file.as_deref())?;
            for form in onto.derived_members(&class)? {
                writeln!(stdout, "{form}")?;
            }
            Ok(())
        }
    }
}

fn corpus_command(command: CorpusCommand, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult {
    match command {
        CorpusCommand::Stats { path, format } => {
            let stats = corpus::corpus_stats(&open_corpus(&path)?);
            match format {
                Format::Json => emit_json(stdout, &stats)?,
                Format::Text => {
                    writeln!(stdout, "sentences: {} ({} unlabeled)", stats.total, stats.unlabeled)?;
                    for s in &stats.labels {
                        writeln!(stdout, "{:<20}{:>8}{:>8.2}", s.class.name(), s.count, s.fraction)?;
                    }
                    for l in &stats.languages {
                        writeln!(stdout, "{:<20}{:>8}{:>8.2}", l.language.tag(), l.count, l.fraction)?;
                    }
                }
            }
            Ok(())
        }
        CorpusCommand::Split {
            path,
            fraction,
            seed,
            train_out,
            test_out,
        } => {
            let split = corpus::stratified_split(&open_corpus(&path)?, fraction, seed)?;
            for warning in &split.warnings {
                writeln!(stderr, "warning: {warning}")?;
            }
            if let Some(out) = train_out {
                save_corpus(&out, &split.train)?;
            }
            if let Some(out) = test_out {
                save_corpus(&out, &split.test)?;
            }
            emit_json(
                stdout,
                &serde_json::json!({
                    "train": split.train.len(),
                    "test": split.test.len(),
                    "warnings": split.warnings,
                }),
            )
        }
        CorpusCommand::Annotate {
            path,
            lexicon,
            priority,
            summary_out,
        } => {
            let onto = open_lexicon(&lexicon, stderr)?;
            let priority = parse_priority(priority.as_deref())?;
            let (annotated, summary) = corpus::auto_annotate(&open_corpus(&path)?, &onto, &priority);
            corpus::write_corpus(&annotated, &mut *stdout)?;
            let summary = serde_json::to_string(&summary).map_err(Error::from)?;
            match summary_out {
                Some(out) => std::fs::write(&out, summary + "\n").map_err(|e| Failure::io(&out, e))?,
                None => writeln!(stderr, "{summary}")?,
            }
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct FilterRecord<'a> {
    text: &'a str,
    blocked: bool,
    triggering_forms: &'a [String],
}

fn emit_json<T: Serialize>(out: &mut dyn Write, value: &T) -> CliResult {
    serde_json::to_writer(&mut *out, value).map_err(Error::from)?;
    writeln!(out)?;
    Ok(())
}

/// Any failure to obtain a usable lexicon is a usage error.
fn open_lexicon(path: &Path, stderr: &mut dyn Write) -> CliResult<Ontology> {
    let file = File::open(path).map_err(|e| Failure::usage(format!("lexicon {}: {e}", path.display())))?;
    let loaded = load_lexicon(BufReader::new(file))
        .map_err(|e| Failure::usage(format!("lexicon {}: {e}", path.display())))?;
    for w in &loaded.warnings {
        writeln!(stderr, "warning: {}:{}: {}", path.display(), w.line, w.message)?;
    }
    Ok(build_ontology(loaded.entries))
}

fn open_corpus(path: &Path) -> CliResult<Vec<AnnotatedSentence>> {
    let file = File::open(path).map_err(|e| Failure::io(path, e))?;
    corpus::load_corpus(BufReader::new(file)).map_err(|e| match e {
        Error::Io(io) => Failure::io(path, io),
        other => Failure::usage(format!("{}: {other}", path.display())),
    })
}

fn save_corpus(path: &Path, sentences: &[AnnotatedSentence]) -> CliResult {
    let file = File::create(path).map_err(|e| Failure::io(path, e))?;
    let mut out = io::BufWriter::new(file);
    corpus::write_corpus(sentences, &mut out)?;
    out.flush().map_err(|e| Failure::io(path, e))
}

fn labels_of(corpus: &[AnnotatedSentence], path: &Path) -> CliResult<Vec<BaseClass>> {
    corpus
        .iter()
        .enumerate()
        .map(|(i, s)| {
            s.label
                .ok_or_else(|| Failure::usage(format!("{}: record {} has no label", path.display(), i + 1)))
        })
        .collect()
}

fn parse_priority(spec: Option<&str>) -> CliResult<Priority> {
    Ok(spec.map(str::parse).transpose()?.unwrap_or_default())
}

fn read_sentences(input: &InputArgs, stdin: &mut dyn BufRead) -> CliResult<Vec<String>> {
    if let Some(text) = &input.text {
        return Ok(vec![text.clone()]);
    }
    if let Some(path) = &input.input {
        return Ok(open_corpus(path)?.into_iter().map(|s| s.text).collect());
    }
    let mut sentences = Vec::new();
    for line in stdin.lines() {
        let line = line?;
        let line = line.trim_end_matches('\r');
        if !line.trim().is_empty() {
            sentences.push(line.to_string());
        }
    }
    Ok(sentences)
}

fn read_policies(path: &Path) -> CliResult<Vec<ContextPolicy>> {
    let file = File::open(path).map_err(|e| Failure::io(path, e))?;
    policy::load_policies(BufReader::new(file)).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn resolve_policy(
    context: Option<Context>,
    expr: Option<String>,
    name: Option<String>,
    policy_file: Option<&Path>,
) -> CliResult<ContextPolicy> {
    if let Some(expr) = expr {
        return ContextPolicy::parse("inline", &expr).map_err(|e| Failure::usage(format!("--policy-expr: {e}")));
    }
    if let Some(name) = name {
        let path = policy_file.ok_or_else(|| Failure::usage("--policy requires --policy-file"))?;
        return read_policies(path)?
            .into_iter()
            .find(|p| p.name == name)
            .ok_or_else(|| Failure::usage(format!("no policy named `{name}` in {}", path.display())));
    }
    match context {
        Some(Context::Forum) => Ok(ContextPolicy::forum()),
        Some(Context::FamilyFriendly) => Ok(ContextPolicy::family_friendly()),
        None => Err(Failure::usage("one of --context, --policy-expr or --policy is required")),
    }
}

fn with_policy_classes(mut onto: Ontology, policy_file: Option<&Path>) -> CliResult<Ontology> {
    if let Some(path) = policy_file {
        for p in read_policies(path)? {
            onto = onto.with_derived(DerivedClass::new(p.name, p.blocked_expr))?;
        }
    }
    Ok(onto)
}
