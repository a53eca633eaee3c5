//! Command-line front end. `run` returns the process exit code:
//! 0 on success, 1 on runtime errors, 2 on usage errors.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use serde::Serialize;
use serde_json::json;

use crate::corpus::{generate_synthetic, parse_sentence_file, split_corpus, write_sentence_file, GeneratorConfig};
use crate::error::{Error, Result};
use crate::model::{load_checkpoint, random_sentence, save_checkpoint, Model};
use crate::training::{ablate, evaluate, sweep, train, Hyperparameters, MetricsSink, SweepAxis, TrainOptions, Variant};

/// Environment variable selecting log verbosity: quiet, info or debug.
pub const LOG_ENV: &str = "MCTED_LOG";

/// Train / valid / test proportions used by every command that splits data.
pub const SPLIT_RATIOS: [f64; 3] = [0.8, 0.1, 0.1];

/// Tolerance reported as pass/fail by `grad-check`.
pub const GRAD_CHECK_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Parser)]
#[command(name = "mcted", version, about = "Multi-channel type-aware GNN event detection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a synthetic labelled corpus in sentence-file format.
    GenData {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        sentences: usize,
    },
    /// Train on an 8:1:1 split; writes model.ckpt and metrics.jsonl into --out.
    Train {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        embeddings: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print an evaluation report for a checkpoint as one JSON object.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
    },
    /// Label every token; output is a sentence file with predicted labels.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Defaults to standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Finite-difference check of every parameter group on a random sentence.
    GradCheck {
        #[arg(long, default_value_t = 5)]
        tokens: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Defaults to the full-size published settings.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 20)]
        coords: usize,
    },
    /// Train and test each variant; one JSON line per variant.
    Ablate {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_delimiter = ',', default_value = "G1,G2,G3,G1+G2+G3")]
        variants: Vec<String>,
        /// Directory for metrics.jsonl.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train and test once per value of one hyperparameter.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        axis: String,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct RunArgs {
    /// key = value file; the synthetic preset is the base.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    data: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn load_hyper(config: Option<&Path>, base: Hyperparameters, seed: Option<u64>) -> Result<Hyperparameters> {
    let mut h = match config {
        Some(path) => Hyperparameters::parse(&read(path)?, base)?,
        None => base,
    };
    if let Some(s) = seed {
        h.seed = s;
    }
    h.validate()?;
    Ok(h)
}

fn prepare(run: &RunArgs) -> Result<(Hyperparameters, crate::corpus::CorpusSplit)> {
    let hyper = load_hyper(run.config.as_deref(), Hyperparameters::synthetic(), run.seed)?;
    let corpus = parse_sentence_file(&read(&run.data)?)?;
    let split = split_corpus(&corpus, SPLIT_RATIOS, hyper.seed)?;
    Ok((hyper, split))
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn sink_in(out: Option<&Path>) -> Result<Option<MetricsSink>> {
    out.map(|dir| {
        create_dir(dir)?;
        MetricsSink::create(&dir.join("metrics.jsonl"))
    })
    .transpose()
}

fn print_json<T: Serialize>(out: &mut impl Write, value: &T) -> Result<()> {
    let line = serde_json::to_string(value)?;
    writeln!(out, "{line}").map_err(|e| Error::io("<stdout>", e))
}

fn execute(command: Command, out: &mut impl Write) -> Result<bool> {
    match command {
        Command::GenData { out: path, seed, sentences } => {
            let config = GeneratorConfig::default().with_sentences(sentences);
            let corpus = generate_synthetic(&config, seed)?;
            write_file(&path, &write_sentence_file(&corpus)?)?;
            log::info!("wrote {} sentences to {}", corpus.len(), path.display());
        }
        Command::Train { run, embeddings, out: dir } => {
            let (hyper, split) = prepare(&run)?;
            let embeddings = embeddings.as_deref().map(read).transpose()?;
            create_dir(&dir)?;
            let sink = MetricsSink::create(&dir.join("metrics.jsonl"))?;
            let options = TrainOptions {
                embeddings: embeddings.as_deref(),
                metrics: Some(&sink),
                run_id: format!("train:seed={}", hyper.seed),
            };
            let result = train(&hyper, &split, &options)?;
            save_checkpoint(&result.model, &dir.join("model.ckpt"))?;
            print_json(out, &json!({ "history": result.history, "test": result.test }))?;
        }
        Command::Eval { model, data } => {
            let model = load_checkpoint(&model)?;
            let corpus = parse_sentence_file(&read(&data)?)?;
            print_json(out, &evaluate(&model, &corpus)?)?;
        }
        Command::Predict { model, data, out: path } => {
            let model = load_checkpoint(&model)?;
            let corpus = parse_sentence_file(&read(&data)?)?;
            let labelled = corpus
                .iter()
                .map(|s| s.with_labels(model.predict(s)?.labels))
                .collect::<Result<Vec<_>>>()?;
            let text = write_sentence_file(&labelled)?;
            match path {
                Some(p) => write_file(&p, &text)?,
                None => out.write_all(text.as_bytes()).map_err(|e| Error::io("<stdout>", e))?,
            }
        }
        Command::GradCheck { tokens, seed, config, coords } => {
            let hyper = load_hyper(config.as_deref(), Hyperparameters::poe(), Some(seed))?;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(crate::seed::derive(seed, crate::seed::GENERATOR));
            let sentence = random_sentence(tokens, &mut rng);
            let one = std::slice::from_ref(&sentence);
            let model = Model::for_corpus(hyper, one, one, None)?;
            let encoded = model.encode_sentence(&sentence, true)?;
            let mut all_passed = true;
            for (group, report) in model.gradient_check(&encoded, 1e-4, coords, seed)? {
                let passed = report.passed(GRAD_CHECK_TOLERANCE);
                all_passed &= passed;
                print_json(
                    out,
                    &json!({
                        "group": group,
                        "max_rel_error": report.max_rel_error,
                        "checked": report.checked,
                        "non_finite_at": report.non_finite_at,
                        "passed": passed,
                    }),
                )?;
            }
            return Ok(all_passed);
        }
        Command::Ablate { run, variants, out: dir } => {
            let (hyper, split) = prepare(&run)?;
            let variants = variants.iter().map(|v| v.parse()).collect::<Result<Vec<Variant>>>()?;
            let sink = sink_in(dir.as_deref())?;
            for (variant, report) in ablate(&hyper, &split, &variants, sink.as_ref())? {
                print_json(out, &json!({ "variant": variant.to_string(), "report": report }))?;
            }
        }
        Command::Sweep { run, axis, values, out: dir } => {
            let (hyper, split) = prepare(&run)?;
            let axis: SweepAxis = axis.parse()?;
            let sink = sink_in(dir.as_deref())?;
            for (value, report) in sweep(&hyper, &split, axis, &values, sink.as_ref())? {
                print_json(out, &json!({ "axis": axis.to_string(), "value": value, "report": report }))?;
            }
        }
    }
    Ok(true)
}

fn init_logging() {
    let level = match std::env::var(LOG_ENV).as_deref() {
        Ok("quiet") => log::LevelFilter::Off,
        Ok("debug") => log::LevelFilter::Debug,
        Ok("info") => log::LevelFilter::Info,
        _ => log::LevelFilter::Warn,
    };
    // A second call (tests run several commands per process) is harmless.
    let _ = env_logger::Builder::new().filter_level(level).format_timestamp(None).try_init();
}

/// Parses `argv` (including the program name) and runs the command,
/// writing results to `out`.
pub fn run_with<I, T>(argv: I, out: &mut impl Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    init_logging();
    match execute(cli.command, out) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    run_with(argv, &mut std::io::stdout().lock())
}
