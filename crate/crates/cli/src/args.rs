use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use politeness_core::classifier::{Mode, Protocol};
use politeness_core::stats::ScoreKind;
use politeness_core::strategies::ParseScheme;
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "politeness-kit", version, about = "Politeness strategies, classifiers and statistics for requests")]
pub struct Cli {
    /// Log progress (-v) or debugging detail (-vv) to stderr.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Normalize raw annotations and write per-request politeness scores.
    Aggregate(AggregateArgs),
    /// Inter-annotator agreement per batch, with a randomized baseline.
    Agreement(AgreementArgs),
    /// Detect politeness strategies in parsed requests.
    Detect(DetectArgs),
    /// Strategy table: politeness and top-quartile share per strategy.
    Table(TableArgs),
    /// Train and calibrate a politeness classifier.
    Train(TrainArgs),
    /// Evaluate a classifier configuration in-domain or across domains.
    Eval(EvalArgs),
    /// Score parsed requests with a trained model.
    Score(ScoreArgs),
    /// Compare politeness across groups given by a metadata key.
    Compare(CompareArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeArg {
    /// Universal Dependencies labels (nsubj, nsubj:pass, ...).
    Universal,
    /// Legacy Stanford labels (nsubj, nsubjpass).
    Stanford,
    /// Any label starting with nsubj.
    Any,
}

impl From<SchemeArg> for ParseScheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Universal => ParseScheme::Universal,
            SchemeArg::Stanford => ParseScheme::Stanford,
            SchemeArg::Any => ParseScheme::Any,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeArg {
    Bow,
    Ling,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Bow => Mode::Bow,
            ModeArg::Ling => Mode::Ling,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreKindArg {
    /// Human politeness scores.
    Human,
    /// Calibrated classifier scores.
    Predicted,
}

impl From<ScoreKindArg> for ScoreKind {
    fn from(k: ScoreKindArg) -> Self {
        match k {
            ScoreKindArg::Human => ScoreKind::Human,
            ScoreKindArg::Predicted => ScoreKind::Predicted,
        }
    }
}

/// Options shared by every command that runs the strategy detectors.
#[derive(Debug, Args, Serialize)]
pub struct DetectorOpts {
    /// Directory with hedges.txt, positive.txt and negative.txt.
    #[arg(long, env = "POLITENESS_LEXICONS", value_name = "DIR")]
    pub lexicons: PathBuf,
    /// Which dependency labels count as nominal subjects.
    #[arg(long, value_enum, default_value_t = SchemeArg::Any)]
    pub scheme: SchemeArg,
    /// Alternative matcher catalog (JSON, as written by --export-catalog).
    #[arg(long, value_name = "FILE")]
    pub catalog: Option<PathBuf>,
}

/// Options shaping a trained model.
#[derive(Debug, Args, Serialize)]
pub struct ModelOpts {
    /// Feature set.
    #[arg(long, value_enum)]
    pub mode: ModeArg,
    /// Hinge-loss weight of the linear classifier.
    #[arg(long = "c", default_value_t = 1.0)]
    pub c: f64,
    /// Minimum training frequency of a unigram feature.
    #[arg(long, default_value_t = 10)]
    pub min_count: usize,
    /// Encode unigrams as presence flags instead of counts.
    #[arg(long)]
    pub binary_unigrams: bool,
    /// Seed for every randomized step (fold shuffles, coordinate order).
    #[arg(long)]
    pub seed: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct AggregateArgs {
    /// Annotation files: batch_id, worker_id, request_id, raw_score.
    #[arg(long = "annotations", required = true, num_args = 1.., value_name = "FILE")]
    pub annotations: Vec<PathBuf>,
    /// Output JSONL of {id, politeness, quartile}.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct AgreementArgs {
    #[arg(long = "annotations", required = true, num_args = 1.., value_name = "FILE")]
    pub annotations: Vec<PathBuf>,
    /// Resamples of the randomized baseline.
    #[arg(long, default_value_t = 1000)]
    pub resamples: usize,
    #[arg(long)]
    pub seed: u64,
    /// Output JSON report.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct DetectArgs {
    /// Parsed requests (CoNLL-U).
    #[arg(long = "in", value_name = "FILE")]
    pub input: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub detector: DetectorOpts,
    /// Output JSONL with one strategy profile per request.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the matcher catalog in use (JSON).
    #[arg(long, value_name = "FILE")]
    pub export_catalog: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct TableArgs {
    #[arg(long = "in", value_name = "FILE")]
    pub input: PathBuf,
    /// Scores JSONL as written by `aggregate`.
    #[arg(long, value_name = "FILE")]
    pub scores: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub detector: DetectorOpts,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    pub format: FormatArg,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct TrainArgs {
    #[arg(long = "in", value_name = "FILE")]
    pub input: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub scores: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub detector: DetectorOpts,
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelOpts,
    /// Output model file (JSON).
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct EvalArgs {
    #[arg(long = "in", value_name = "FILE")]
    pub input: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub scores: PathBuf,
    /// Test corpus for cross-domain evaluation (CoNLL-U).
    #[arg(long, value_name = "FILE", requires = "test_scores")]
    pub test_in: Option<PathBuf>,
    #[arg(long, value_name = "FILE", requires = "test_in")]
    pub test_scores: Option<PathBuf>,
    /// Cross-validation protocol: kfold:K or loo.
    #[arg(long, default_value = "kfold:10", value_parser = parse_protocol)]
    #[serde(serialize_with = "serialize_display")]
    pub protocol: Protocol,
    #[command(flatten)]
    #[serde(flatten)]
    pub detector: DetectorOpts,
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelOpts,
    /// Evaluate each of these comma-separated C values instead of --c and
    /// report them side by side.
    #[arg(long, value_delimiter = ',', num_args = 1.., conflicts_with = "c", value_name = "C,...")]
    pub c_grid: Vec<f64>,
    /// Output JSON report.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct ScoreArgs {
    /// Model file written by `train`.
    #[arg(long, value_name = "FILE")]
    pub model: PathBuf,
    #[arg(long = "in", value_name = "FILE")]
    pub input: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub detector: DetectorOpts,
    /// Output JSONL of {id, score, class, margin}.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct CompareArgs {
    /// Requests carrying the grouping metadata (CoNLL-U).
    #[arg(long = "in", value_name = "FILE")]
    pub input: PathBuf,
    /// Scores JSONL from `aggregate` (human) or `score` (predicted).
    #[arg(long, value_name = "FILE")]
    pub scores: PathBuf,
    /// Which kind of scores the file holds.
    #[arg(long, value_enum)]
    pub score_kind: ScoreKindArg,
    /// Metadata key defining the groups.
    #[arg(long)]
    pub key: String,
    /// Reference: "complement" (all other requests) or a group name.
    #[arg(long, default_value = "complement")]
    pub reference: String,
    #[arg(long, value_enum, default_value_t = FormatArg::Json)]
    pub format: FormatArg,
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_protocol(s: &str) -> Result<Protocol, String> {
    match s.parse::<Protocol>() {
        Ok(p @ (Protocol::KFold(_) | Protocol::LeaveOneOut)) => Ok(p),
        Ok(p) => Err(format!("{p} is not a cross-validation protocol")),
        Err(e) => Err(e.to_string()),
    }
}

fn serialize_display<S: serde::Serializer, D: std::fmt::Display>(
    value: &D,
    serializer: S,
) -> Result<S::Ok, S::Error> {
    serializer.collect_str(value)
}
