//! `healthrec` command-line tool.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 invalid input or arguments.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use healthrec_core::dataset::{generate_synthetic, load_dataset, write_dataset};
use healthrec_core::evaluation::{chart_csv, compare_models, cross_validate, evaluate, ComparisonRow, CrossValidation};
use healthrec_core::recommender::{load_kb, recommend, KbMode};
use healthrec_core::{predict, Error, ModelKind, ModelSpec, SyntheticSpec, TrainedModel, ValidationMode};
use healthrec_service::{PredictResponse, RecommendResponse, ServiceConfig, ServiceError};

#[derive(Parser)]
#[command(name = "healthrec", version, about = "Symptom-based disease prediction and recommendation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset and its generator truth.
    Synth(SynthArgs),
    /// Train one model and write it as JSON.
    Train(TrainArgs),
    /// Score a trained model on a dataset, or cross-validate its parameters.
    Evaluate(EvaluateArgs),
    /// Cross-validate several models on the same folds.
    Compare(CompareArgs),
    /// Predict diseases for a symptom list.
    Predict(PredictArgs),
    /// Run the HTTP service.
    Serve(ServeArgs),
}

#[derive(Args)]
struct SynthArgs {
    /// Generator spec JSON.
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Generator truth sidecar; defaults to `<out stem>.truth.json` next to `--out`.
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Overrides the generator seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    model: ModelKind,
    /// Parameters as inline JSON or a path to a JSON file.
    #[arg(long)]
    params: Option<String>,
    #[arg(long)]
    out: PathBuf,
    /// Reject GBM parameters outside the published tuning ranges.
    #[arg(long)]
    strict_params: bool,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    data: PathBuf,
    /// Trained model file.
    #[arg(long)]
    model: PathBuf,
    /// Cross-validate the model's parameters instead of scoring the file as is.
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Zero the timing fields.
    #[arg(long)]
    no_timing: bool,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    data: PathBuf,
    /// Comma-separated model kinds.
    #[arg(long, default_value = "gbm,nb,svm,rf,knn")]
    models: String,
    /// Per-kind parameters, e.g. `{"gbm": {"max_depth": 5}}`, inline or a file path.
    #[arg(long)]
    params: Option<String>,
    #[arg(long, default_value_t = 5)]
    folds: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Bar-chart CSV with the published accuracies alongside.
    #[arg(long)]
    chart: Option<PathBuf>,
    #[arg(long)]
    strict_params: bool,
    /// Zero the timing fields so repeated runs write identical reports.
    #[arg(long)]
    no_timing: bool,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    /// Comma-separated symptom names.
    #[arg(long)]
    symptoms: String,
    #[arg(long, default_value_t = 5)]
    top_k: usize,
    /// Knowledge-base directory; adds recommendations.
    #[arg(long)]
    kb: Option<PathBuf>,
    /// Show empty recommendations instead of failing when the KB lacks a disease.
    #[arg(long)]
    kb_lenient: bool,
    /// Print the service's JSON schema instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long)]
    config: PathBuf,
}

/// Failure with the exit code it maps to.
enum Failure {
    Io(String),
    Invalid(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_io() {
            Failure::Io(e.to_string())
        } else {
            Failure::Invalid(e.to_string())
        }
    }
}

impl From<ServiceError> for Failure {
    fn from(e: ServiceError) -> Self {
        if e.is_io() {
            Failure::Io(e.to_string())
        } else {
            Failure::Invalid(e.to_string())
        }
    }
}

type CmdResult = Result<(), Failure>;

fn write_file(path: &Path, contents: &str) -> CmdResult {
    std::fs::write(path, contents).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn read_json(arg: &str, what: &str) -> Result<serde_json::Value, Failure> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        std::fs::read_to_string(arg).map_err(|e| Failure::Io(format!("{arg}: {e}")))?
    };
    serde_json::from_str(&text).map_err(|e| Failure::Invalid(format!("{what}: {e}")))
}

fn mode(strict: bool) -> ValidationMode {
    if strict {
        ValidationMode::Strict
    } else {
        ValidationMode::Permissive
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serialisable");
    s.push('\n');
    s
}

fn synth(args: SynthArgs) -> CmdResult {
    let value = read_json(&args.spec.to_string_lossy(), "synthetic spec")?;
    let mut spec: SyntheticSpec =
        serde_json::from_value(value).map_err(|e| Failure::Invalid(format!("synthetic spec: {e}")))?;
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    let (ds, truth) = generate_synthetic(&spec)?;
    write_dataset(&ds, &args.out)?;
    let truth_path = args.truth.unwrap_or_else(|| args.out.with_extension("truth.json"));
    write_file(&truth_path, &to_json(&truth))?;
    println!(
        "wrote {} samples ({} diseases, {} symptoms) to {}",
        ds.len(),
        ds.n_classes(),
        ds.n_features(),
        args.out.display()
    );
    println!("generator truth: {}", truth_path.display());
    println!("oracle accuracy: {:.4}", truth.oracle_accuracy(&ds));
    Ok(())
}

fn train(args: TrainArgs) -> CmdResult {
    let ds = load_dataset(&args.data)?;
    let params = match &args.params {
        Some(p) => read_json(p, "parameters")?,
        None => serde_json::json!({}),
    };
    let mut spec = ModelSpec::from_json(args.model, params)?;
    if let Some(seed) = args.seed {
        spec = spec.with_seed(seed);
    }
    let started = Instant::now();
    let model = spec.train(&ds, mode(args.strict_params))?;
    let elapsed = started.elapsed();
    model.save(&args.out)?;
    println!(
        "trained {} on {} samples, {} classes, {} symptoms in {:.3}s",
        model.kind(),
        ds.len(),
        ds.n_classes(),
        ds.n_features(),
        elapsed.as_secs_f64()
    );
    println!("model written to {}", args.out.display());
    Ok(())
}

fn evaluate_cmd(args: EvaluateArgs) -> CmdResult {
    let ds = load_dataset(&args.data)?;
    let model = TrainedModel::load(&args.model)?;
    model.check_vocabulary(ds.vocabulary())?;
    let spec = ModelSpec::from_model(&model)?;
    let mut row = match args.folds {
        Some(folds) => {
            let cv = cross_validate(&ds, &spec, ValidationMode::Permissive, folds, args.seed)?;
            ComparisonRow::new(&spec, &cv)
        }
        None => {
            let started = Instant::now();
            let report = evaluate(&model, &ds)?;
            let cv = CrossValidation {
                folds: 1,
                seed: args.seed,
                stratified: true,
                fold_accuracy: vec![report.accuracy],
                fold_sizes: vec![ds.len()],
                report,
                train_ms: 0,
                infer_ms: started.elapsed().as_millis() as u64,
            };
            ComparisonRow::new(&spec, &cv)
        }
    };
    if args.no_timing {
        row.train_ms = 0;
        row.infer_ms = 0;
        row.wall_ms = 0;
    }
    let json = to_json(&row);
    match &args.out {
        Some(p) => {
            write_file(p, &json)?;
            println!("{} mean accuracy {:.4}; report written to {}", row.kind, row.mean_acc, p.display());
        }
        None => print!("{json}"),
    }
    Ok(())
}

fn compare(args: CompareArgs) -> CmdResult {
    let ds = load_dataset(&args.data)?;
    let params = match &args.params {
        Some(p) => read_json(p, "parameters")?,
        None => serde_json::json!({}),
    };
    let params = params
        .as_object()
        .ok_or_else(|| Failure::Invalid("parameters must be an object keyed by model kind".into()))?
        .clone();
    let mut specs = Vec::new();
    for name in args.models.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let kind: ModelKind = name.parse()?;
        let p = params.get(kind.as_str()).cloned().unwrap_or_else(|| serde_json::json!({}));
        specs.push(ModelSpec::from_json(kind, p)?.with_seed(args.seed));
    }
    if specs.is_empty() {
        return Err(Failure::Invalid("no model kinds given".into()));
    }
    let mut report = compare_models(&ds, &specs, mode(args.strict_params), args.folds, args.seed)?;
    if args.no_timing {
        report = report.without_timing();
    }
    print!("{}", report.to_table());
    if let Some(p) = &args.out {
        write_file(p, &to_json(&report))?;
    }
    if let Some(p) = &args.chart {
        write_file(p, &chart_csv(&report))?;
    }
    Ok(())
}

fn predict_cmd(args: PredictArgs) -> CmdResult {
    let model = TrainedModel::load(&args.model)?;
    let vocab = model.vocabulary()?;
    let names: Vec<&str> = args.symptoms.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if names.is_empty() {
        return Err(Failure::Invalid("no symptoms given".into()));
    }
    let x = vocab.encode(&names)?;
    let prediction = predict(&model, &x, Some(args.top_k))?;
    let Some(kb_dir) = &args.kb else {
        let response = PredictResponse::new(&prediction, &model.class_names, None);
        if args.json {
            print!("{}", to_json(&response));
        } else {
            for (i, p) in response.predictions.iter().enumerate() {
                println!("{:>2}. {:<40} {:.4}", i + 1, p.disease, p.probability);
            }
        }
        return Ok(());
    };
    let kb = load_kb(kb_dir)?;
    let kb_mode = if args.kb_lenient { KbMode::Lenient } else { KbMode::Strict };
    let results = recommend(&prediction, &kb, &model.class_names, kb_mode, None)?;
    if args.json {
        print!(
            "{}",
            to_json(&RecommendResponse {
                results,
                unknown_ignored: None
            })
        );
        return Ok(());
    }
    for (i, b) in results.iter().enumerate() {
        println!("{:>2}. {:<40} {:.4}", i + 1, b.disease, b.probability);
        if b.kb_missing {
            println!("    (no knowledge-base entry)");
            continue;
        }
        println!("    description: {}", b.description);
        for (label, items) in [
            ("precautions", &b.precautions),
            ("medications", &b.medications),
            ("diets", &b.diets),
            ("workouts", &b.workouts),
        ] {
            println!("    {label}: {}", items.join("; "));
        }
    }
    if let Some(b) = results.first() {
        println!("{}", b.disclaimer);
    }
    Ok(())
}

fn serve(args: ServeArgs) -> CmdResult {
    let _ = tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .with_writer(std::io::stderr)
        .try_init();
    let mut config = ServiceConfig::load(&args.config)?;
    config.apply_env()?;
    let runtime = tokio::runtime::Runtime::new().map_err(|e| Failure::Io(e.to_string()))?;
    runtime.block_on(healthrec_service::serve(config))?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Synth(a) => synth(a),
        Command::Train(a) => train(a),
        Command::Evaluate(a) => evaluate_cmd(a),
        Command::Compare(a) => compare(a),
        Command::Predict(a) => predict_cmd(a),
        Command::Serve(a) => serve(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
