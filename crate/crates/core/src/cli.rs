//! Command-line front end: `train`, `evaluate`, `predict`, `roc`, `compare`.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 training or
//! evaluation error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::builder::TypedValueParser;
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::dataset::{self, EncodedDataset, Schema};
use crate::distance::Metric;
use crate::error::{Error, Result};
use crate::knn::{KnnConfig, Weighting, DEFAULT_LEAF_CAPACITY};
use crate::logistic::LogisticConfig;
use crate::mlp::MlpConfig;
use crate::model::{ModelKind, TrainedModel};
use crate::naive_bayes::DEFAULT_VAR_SMOOTHING;
use crate::pipeline::{self, TrainOptions, DEFAULT_FRACTION, DEFAULT_SEED};

#[derive(Debug, Parser)]
#[command(name = "attrition", version, about = "Train and compare binary classifiers on tabular CSV data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train one model on the training partition and write a model file.
    Train(TrainArgs),
    /// Score a model file on the held-out partition.
    Evaluate(EvaluateArgs),
    /// Score every row of a CSV file.
    Predict(PredictArgs),
    /// Write the held-out ROC curve as CSV.
    Roc(RocArgs),
    /// Train and evaluate all four models on identical splits.
    Compare(CompareArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Knn,
    Gnb,
    Logreg,
    Mlp,
}

impl From<KindArg> for ModelKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Knn => ModelKind::Knn,
            KindArg::Gnb => ModelKind::Gnb,
            KindArg::Logreg => ModelKind::Logreg,
            KindArg::Mlp => ModelKind::Mlp,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricArg {
    Manhattan,
    Euclidean,
    Minkowski,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WeightsArg {
    Uniform,
    Distance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PartitionArg {
    Train,
    Test,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// CSV file with a header row.
    #[arg(long)]
    pub data: PathBuf,
    /// Column layout as `name:kind,...` (kinds: numeric, categorical, label).
    /// Defaults to the HR attrition layout.
    #[arg(long)]
    pub schema: Option<String>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Training fraction of the split.
    #[arg(long, default_value_t = DEFAULT_FRACTION)]
    pub split: f64,
}

#[derive(Debug, Args)]
pub struct HyperArgs {
    /// Neighbours for KNN.
    #[arg(long, default_value_t = crate::knn::DEFAULT_K, value_parser = clap::value_parser!(u64).range(1..).map(|v| v as usize))]
    pub k: usize,
    #[arg(long, value_enum, default_value_t = MetricArg::Manhattan)]
    pub metric: MetricArg,
    /// Minkowski exponent (only with --metric minkowski).
    #[arg(long, default_value_t = 3.0)]
    pub p: f64,
    #[arg(long, value_enum, default_value_t = WeightsArg::Uniform)]
    pub weights: WeightsArg,
    /// KD-tree leaf capacity.
    #[arg(long, default_value_t = DEFAULT_LEAF_CAPACITY, value_parser = clap::value_parser!(u64).range(1..).map(|v| v as usize))]
    pub leaf_size: usize,
    /// Min-max scale inputs for KNN and naive Bayes.
    #[arg(long)]
    pub scale: bool,
    #[arg(long, default_value_t = DEFAULT_VAR_SMOOTHING)]
    pub var_smoothing: f64,
    /// L2 strength for logistic regression.
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    /// Learning rate (default 0.1 for logreg, 0.01 for mlp).
    #[arg(long)]
    pub lr: Option<f64>,
    /// Gradient-descent iterations for logreg.
    #[arg(long, default_value_t = 5000)]
    pub iters: usize,
    /// Loss-change tolerance for logreg.
    #[arg(long, default_value_t = 1e-7)]
    pub tol: f64,
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..).map(|v| v as usize))]
    pub hidden: usize,
    #[arg(long, default_value_t = 200)]
    pub epochs: usize,
    #[arg(long, default_value_t = 200, value_parser = clap::value_parser!(u64).range(1..).map(|v| v as usize))]
    pub batch: usize,
    #[arg(long, default_value_t = 0.9)]
    pub momentum: f64,
}

impl HyperArgs {
    pub fn options(&self) -> Result<TrainOptions> {
        let metric = match self.metric {
            MetricArg::Manhattan => Metric::Manhattan,
            MetricArg::Euclidean => Metric::Euclidean,
            MetricArg::Minkowski => Metric::minkowski(self.p)?,
        };
        let defaults = TrainOptions::default();
        Ok(TrainOptions {
            knn: KnnConfig {
                k: self.k,
                metric,
                weighting: match self.weights {
                    WeightsArg::Uniform => Weighting::Uniform,
                    WeightsArg::Distance => Weighting::InverseDistance,
                },
                leaf_capacity: self.leaf_size,
            },
            var_smoothing: self.var_smoothing,
            logistic: LogisticConfig {
                lambda: self.lambda,
                learning_rate: self.lr.unwrap_or(defaults.logistic.learning_rate),
                max_iters: self.iters,
                tol: self.tol,
            },
            mlp: MlpConfig {
                hidden_size: self.hidden,
                learning_rate: self.lr.unwrap_or(defaults.mlp.learning_rate),
                momentum: self.momentum,
                batch_size: self.batch,
                epochs: self.epochs,
                seed: 0,
            },
            scale: self.scale,
        })
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long, value_enum)]
    pub model: KindArg,
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub hyper: HyperArgs,
    /// Where to write the model file.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ModelFileArgs {
    /// Model file written by `train`.
    #[arg(long = "model-file")]
    pub model_file: PathBuf,
    /// Fail unless the file holds this kind of model.
    #[arg(long, value_enum)]
    pub model: Option<KindArg>,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Split seed; defaults to the one recorded in the model file.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Training fraction; defaults to the one recorded in the model file.
    #[arg(long)]
    pub split: Option<f64>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub model: ModelFileArgs,
    #[command(flatten)]
    pub data: SplitArgs,
    /// Which side of the split to score.
    #[arg(long, value_enum, default_value_t = PartitionArg::Test)]
    pub partition: PartitionArg,
    /// Also write the report as JSON.
    #[arg(long)]
    pub json_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[command(flatten)]
    pub model: ModelFileArgs,
    /// CSV with the feature columns; a label column is ignored.
    #[arg(long)]
    pub data: PathBuf,
    /// Output CSV (default: standard output).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RocArgs {
    #[command(flatten)]
    pub model: ModelFileArgs,
    #[command(flatten)]
    pub data: SplitArgs,
    /// Output CSV (default: standard output).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Comma-separated split seeds; overrides --seed.
    #[arg(long, value_delimiter = ',')]
    pub seeds: Vec<u64>,
    #[command(flatten)]
    pub hyper: HyperArgs,
    /// Also write the results as JSON.
    #[arg(long)]
    pub json_out: Option<PathBuf>,
}

/// Failure of a CLI invocation.
#[derive(Debug)]
pub enum CliError {
    Usage(clap::Error),
    Run(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(e) if !e.use_stderr() => 0,
            CliError::Usage(_) => 1,
            CliError::Run(e) => e.exit_code(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Run(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(e) => write!(f, "{e}"),
            CliError::Run(e) => write!(f, "error: {e}"),
        }
    }
}

/// Parses `args` (including the program name) and runs the command,
/// writing its primary output to `out`.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> std::result::Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(CliError::Usage)?;
    execute(cli.command, out).map_err(CliError::Run)
}

pub fn execute(command: Command, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::Train(a) => cmd_train(a, out),
        Command::Evaluate(a) => cmd_evaluate(a, out),
        Command::Predict(a) => cmd_predict(a, out),
        Command::Roc(a) => cmd_roc(a, out),
        Command::Compare(a) => cmd_compare(a, out),
    }
}

fn read_text(path: &Path) -> Result<String> {
    Ok(fs::read_to_string(path)?)
}

fn schema_from(arg: &Option<String>) -> Result<Schema> {
    match arg {
        Some(spec) => Schema::parse(spec),
        None => Ok(Schema::hr()),
    }
}

fn load_encoded(path: &Path, schema: &Schema) -> Result<EncodedDataset> {
    let raw = dataset::load_table(&read_text(path)?, schema)?;
    dataset::encode(&raw, schema)
}

fn load_model(args: &ModelFileArgs) -> Result<TrainedModel> {
    let bytes = fs::read(&args.model_file)?;
    TrainedModel::from_bytes(&bytes, args.model.map(ModelKind::from))
}

/// Encodes labelled data with the model's encoders and rebuilds its split.
fn model_split(model: &TrainedModel, args: &SplitArgs) -> Result<dataset::SplitResult> {
    let raw = dataset::load_table(&read_text(&args.data)?, &model.schema)?;
    let ds = dataset::encode_with(&raw, &model.schema, &model.encoders)?;
    let seed = args.seed.unwrap_or(model.split.seed);
    let fraction = args.split.unwrap_or(model.split.fraction);
    pipeline::resplit(model, &ds, seed, fraction)
}

fn write_output(path: &Option<PathBuf>, text: &str, out: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

pub fn cmd_train(args: TrainArgs, out: &mut dyn Write) -> Result<()> {
    let schema = schema_from(&args.data.schema)?;
    let opts = args.hyper.options()?;
    let ds = load_encoded(&args.data.data, &schema)?;
    let split = dataset::split(&ds, args.data.split, args.data.seed)?;
    let (model, summary) = pipeline::train(args.model.into(), &split, &opts)?;
    fs::write(&args.out, model.to_bytes()?)?;

    writeln!(out, "model       {}", summary.kind)?;
    writeln!(out, "seed        {}", split.seed)?;
    writeln!(out, "split       {}", split.fraction)?;
    writeln!(out, "train rows  {} ({} positive)", summary.n_train, summary.n_positive)?;
    writeln!(out, "test rows   {}", split.test.len())?;
    if let Some(it) = summary.iterations {
        let unit = if summary.kind == ModelKind::Mlp { "epochs" } else { "iterations" };
        let status = match summary.converged {
            Some(true) => " (converged)",
            Some(false) => " (iteration limit reached)",
            None => "",
        };
        writeln!(out, "{:<11} {it}{status}", unit)?;
    }
    if let Some(loss) = summary.final_loss {
        writeln!(out, "final loss  {loss:.6}")?;
    }
    writeln!(out, "written     {}", args.out.display())?;
    Ok(())
}

pub fn cmd_evaluate(args: EvaluateArgs, out: &mut dyn Write) -> Result<()> {
    let model = load_model(&args.model)?;
    let split = model_split(&model, &args.data)?;
    let (part, name) = match args.partition {
        PartitionArg::Test => (&split.test, "test"),
        PartitionArg::Train => (&split.train, "train"),
    };
    let report = pipeline::evaluate(&model, part, split.seed, split.fraction)?;
    writeln!(out, "model      {}", report.model)?;
    writeln!(out, "seed       {}", report.seed)?;
    writeln!(out, "split      {}", report.fraction)?;
    writeln!(out, "partition  {name}")?;
    writeln!(out, "samples    {}", report.n_samples)?;
    writeln!(out, "auc        {:.6}", report.auc)?;
    writeln!(out, "accuracy   {:.6}", report.accuracy)?;
    writeln!(out, "f1         {:.6}", report.f1)?;
    let cm = &report.confusion;
    writeln!(out, "confusion  tp={} fp={} fn={} tn={}", cm.tp, cm.fp, cm.fn_, cm.tn)?;
    if let Some(path) = &args.json_out {
        let mut json = serde_json::to_string_pretty(&report).map_err(|e| Error::ModelFormat(e.to_string()))?;
        json.push('\n');
        fs::write(path, json)?;
    }
    Ok(())
}

pub fn cmd_predict(args: PredictArgs, out: &mut dyn Write) -> Result<()> {
    let model = load_model(&args.model)?;
    let raw = dataset::load_features_table(&read_text(&args.data)?, &model.schema)?;
    let features = dataset::encode_features(&raw, &model.schema, &model.encoders)?;
    let (scores, labels) = model.score_rows(&features)?;
    let mut text = String::from("score,label\n");
    for (s, y) in scores.iter().zip(&labels) {
        text.push_str(&format!("{s},{y}\n"));
    }
    write_output(&args.out, &text, out)
}

pub fn cmd_roc(args: RocArgs, out: &mut dyn Write) -> Result<()> {
    let model = load_model(&args.model)?;
    let split = model_split(&model, &args.data)?;
    let curve = pipeline::roc(&model, &split.test)?;
    let mut text = String::from("threshold,fpr,tpr\n");
    for p in &curve.points {
        text.push_str(&format!("{},{},{}\n", p.threshold, p.fpr, p.tpr));
    }
    write_output(&args.out, &text, out)
}

pub fn cmd_compare(args: CompareArgs, out: &mut dyn Write) -> Result<()> {
    let schema = schema_from(&args.data.schema)?;
    let opts = args.hyper.options()?;
    let ds = load_encoded(&args.data.data, &schema)?;
    let seeds = if args.seeds.is_empty() {
        vec![args.data.seed]
    } else {
        args.seeds.clone()
    };
    let comparison = pipeline::compare(&ds, &seeds, args.data.split, &opts)?;
    out.write_all(comparison.to_table().as_bytes())?;
    if let Some(path) = &args.json_out {
        let mut json =
            serde_json::to_string_pretty(&comparison).map_err(|e| Error::ModelFormat(e.to_string()))?;
        json.push('\n');
        fs::write(path, json)?;
    }
    Ok(())
}
