//! `eat` command-line tool: resample, sweep, evaluate, gen-synthetic.
//!
//! Data files go to disk; a JSON summary goes to stdout. Exit codes: 0 on
//! success, 2 on usage or validation errors, 1 on runtime errors.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use eat_sampling::dataset::{imbalance_ratio, load_csv, partition_by_class, train_test_split};
use eat_sampling::harness::{
    best_point, generate_synthetic, interpret, run_once, run_sweep, GeneratorSpec, Pipeline,
    SweepSettings,
};
use eat_sampling::oversample::{balance, Method, OversamplerConfig};
use eat_sampling::{ClassifierKind, Error, WeightSchema};

#[derive(Debug, Parser)]
#[command(
    name = "eat",
    version,
    about = "Accident-triangle weighted oversampling for imbalanced tabular data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Oversample the minority class of a CSV file to a 1:1 ratio.
    Resample(ResampleArgs),
    /// Evaluate a method over the 20-point alpha grid and write a report.
    Sweep(SweepArgs),
    /// Split, optionally oversample, fit and report balanced accuracy.
    Evaluate(EvaluateArgs),
    /// Write a synthetic imbalanced dataset with two tagged minority subgroups.
    GenSynthetic(GenArgs),
}

/// `none` or one of the oversampling method tokens.
#[derive(Debug, Clone, Copy, Serialize)]
#[serde(transparent)]
struct MethodChoice(Option<Method>);

fn parse_method(s: &str) -> Result<MethodChoice, String> {
    if s == "none" {
        return Ok(MethodChoice(None));
    }
    s.parse::<Method>()
        .map(|m| MethodChoice(Some(m)))
        .map_err(|_| format!("expected one of none, ros, smote, adasyn, eat-ros, eat-smote, eat-adasyn; got '{s}'"))
}

fn parse_classifier(s: &str) -> Result<ClassifierKind, String> {
    s.parse()
        .map_err(|_| format!("expected gnb, logreg or tree; got '{s}'"))
}

#[derive(Debug, Args, Serialize)]
struct SamplerFlags {
    /// Neighbour count for SMOTE/ADASYN families.
    #[arg(long, default_value_t = 5)]
    k: usize,
    /// Standard deviation of the weighted interpolation factor.
    #[arg(long, default_value_t = 0.1)]
    sigma: f64,
    /// Allocate ADASYN synthetics by majority-neighbour fraction.
    #[arg(long)]
    invert_density: bool,
}

#[derive(Debug, Args, Serialize)]
struct ResampleArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    label_col: String,
    #[arg(long, value_parser = parse_method)]
    method: MethodChoice,
    #[arg(long)]
    category_col: Option<String>,
    /// Weight schema JSON file, or `preset:smd|scd|nsd|high-low`.
    #[arg(long)]
    schema: Option<String>,
    /// Overrides the schema alpha; beta becomes 1 - alpha.
    #[arg(long)]
    alpha: Option<f64>,
    /// Number of rows to generate (default: majority - minority).
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    output: PathBuf,
    /// Optional CSV with per-row provenance of the generated samples.
    #[arg(long)]
    provenance: Option<PathBuf>,
    #[command(flatten)]
    sampler: SamplerFlags,
}

#[derive(Debug, Args, Serialize)]
struct SweepArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    label_col: String,
    #[arg(long)]
    category_col: Option<String>,
    #[arg(long, value_parser = parse_method)]
    method: MethodChoice,
    #[arg(long, value_parser = parse_classifier)]
    classifier: ClassifierKind,
    #[arg(long)]
    schema: Option<String>,
    #[arg(long, default_value_t = 0.7)]
    split: f64,
    #[arg(long, value_delimiter = ',', required = true)]
    seeds: Vec<u64>,
    /// Report path; `.jsonl`/`.json` writes JSON lines, anything else CSV.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    dataset_id: Option<String>,
    /// Tolerance for the APPROX interpretation label.
    #[arg(long, default_value_t = 0.005)]
    epsilon: f64,
    /// Record per-row wall time (makes the report non-reproducible).
    #[arg(long)]
    timing: bool,
    #[command(flatten)]
    sampler: SamplerFlags,
}

#[derive(Debug, Args, Serialize)]
struct EvaluateArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    label_col: String,
    #[arg(long, value_parser = parse_classifier)]
    classifier: ClassifierKind,
    #[arg(long, value_parser = parse_method, default_value = "none")]
    method: MethodChoice,
    #[arg(long)]
    category_col: Option<String>,
    #[arg(long)]
    schema: Option<String>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, default_value_t = 0.7)]
    split: f64,
    #[arg(long)]
    seed: u64,
    /// Write the fitted model as JSON.
    #[arg(long)]
    model_out: Option<PathBuf>,
    #[command(flatten)]
    sampler: SamplerFlags,
}

#[derive(Debug, Args, Serialize)]
struct GenArgs {
    #[arg(long, default_value_t = 878)]
    majority: usize,
    /// Sizes of the `high` and `low` minority subgroups.
    #[arg(long, value_delimiter = ',', default_value = "60,60")]
    minority: Vec<usize>,
    #[arg(long, default_value_t = 4)]
    dim: usize,
    #[arg(long, default_value_t = 1.0)]
    noise: f64,
    #[arg(long, default_value_t = 2.0)]
    separation: f64,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    output: PathBuf,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NothingToGenerate => Failure::Usage(format!("--method: {e}")),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

type CliResult<T> = Result<T, Failure>;

fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(Failure::Usage(msg.into()))
}

fn check_sampler(s: &SamplerFlags) -> CliResult<()> {
    if s.k == 0 {
        return usage("--k must be at least 1");
    }
    if !(s.sigma >= 0.0 && s.sigma.is_finite()) {
        return usage("--sigma must be finite and >= 0");
    }
    Ok(())
}

fn check_alpha(alpha: Option<f64>) -> CliResult<()> {
    match alpha {
        Some(a) if !(0.0..=1.0).contains(&a) => usage(format!("--alpha {a} must lie in [0, 1]")),
        _ => Ok(()),
    }
}

fn check_split(split: f64) -> CliResult<()> {
    if split > 0.0 && split < 1.0 {
        Ok(())
    } else {
        usage(format!("--split {split} must lie strictly between 0 and 1"))
    }
}

/// EAT methods need both a schema and a category column.
fn require_eat_inputs(
    method: MethodChoice,
    schema: &Option<String>,
    category: &Option<String>,
) -> CliResult<()> {
    let name = method.0.map_or("none", Method::as_str);
    if method.0.is_some_and(Method::is_eat) {
        if schema.is_none() {
            return usage(format!("--schema is required for --method {name}"));
        }
        if category.is_none() {
            return usage(format!("--category-col is required for --method {name}"));
        }
    }
    Ok(())
}

fn load_schema(arg: &str, alpha: Option<f64>) -> CliResult<WeightSchema> {
    let schema = match arg.strip_prefix("preset:") {
        Some(name) => {
            WeightSchema::preset(name, 0.5).map_err(|e| Failure::Usage(format!("--schema: {e}")))?
        }
        None => WeightSchema::load(arg)?,
    };
    Ok(match alpha {
        Some(a) => schema.with_alpha(a)?,
        None => schema,
    })
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::Runtime(format!("cannot create {}: {e}", path.display())))
}

fn emit(value: serde_json::Value) {
    println!(
        "{}",
        serde_json::to_string_pretty(&value).expect("summary serializes")
    );
}

fn resample(args: &ResampleArgs) -> CliResult<()> {
    check_sampler(&args.sampler)?;
    check_alpha(args.alpha)?;
    let Some(method) = args.method.0 else {
        return usage("--method none is not valid for resample");
    };
    require_eat_inputs(args.method, &args.schema, &args.category_col)?;
    if args.n == Some(0) {
        return usage("--n must be at least 1");
    }
    let schema = args
        .schema
        .as_deref()
        .map(|s| load_schema(s, args.alpha))
        .transpose()?;

    let ds = load_csv(&args.input, &args.label_col, args.category_col.as_deref())?;
    let part = partition_by_class(&ds)?;
    let config = OversamplerConfig {
        k: args.sampler.k,
        sigma: args.sampler.sigma,
        invert_density: args.sampler.invert_density,
        n_to_generate: args.n,
        ..OversamplerConfig::new(method, args.seed)
    };
    let out = balance(&ds, &part, &config, schema.as_ref())?;
    out.dataset.write_csv(create(&args.output)?)?;

    if let Some(path) = &args.provenance {
        let mut w = csv::Writer::from_writer(create(path)?);
        for p in &out.synthetic.provenance {
            w.serialize(p).map_err(Error::from)?;
        }
        w.flush().map_err(|e| Failure::Runtime(e.to_string()))?;
    }

    let counts = out.dataset.class_counts();
    emit(json!({
        "command": "resample",
        "flags": args,
        "seed": args.seed,
        "input_ratio": imbalance_ratio(&part),
        "minority_before": part.minority.len(),
        "majority_before": part.majority.len(),
        "requested": out.requested,
        "rows_generated": out.synthetic.len(),
        "fallback_count": out.synthetic.fallback_count(),
        "minority_after": counts[part.minority_label as usize],
        "majority_after": counts[part.majority_label() as usize],
        "alpha": schema.as_ref().map(WeightSchema::alpha),
        "beta": schema.as_ref().map(WeightSchema::beta),
        "output": args.output,
    }));
    Ok(())
}

fn sweep(args: &SweepArgs) -> CliResult<()> {
    check_sampler(&args.sampler)?;
    check_split(args.split)?;
    require_eat_inputs(args.method, &args.schema, &args.category_col)?;
    let template = args
        .schema
        .as_deref()
        .map(|s| load_schema(s, None))
        .transpose()?;

    let ds = load_csv(&args.input, &args.label_col, args.category_col.as_deref())?;
    let dataset_id = args.dataset_id.clone().unwrap_or_else(|| {
        args.input.file_stem().map_or_else(
            || "dataset".to_string(),
            |s| s.to_string_lossy().into_owned(),
        )
    });
    let pipeline = Pipeline {
        k: args.sampler.k,
        sigma: args.sampler.sigma,
        invert_density: args.sampler.invert_density,
        ..Pipeline::new(args.method.0, args.classifier)
    };
    let settings = SweepSettings {
        dataset_id,
        pipeline,
        train_fraction: args.split,
        seeds: args.seeds.clone(),
        schema_template: template,
    };
    let mut report = run_sweep(&ds, &settings)?;
    if !args.timing {
        report.clear_timings();
    }

    let jsonl = matches!(
        args.out.extension().and_then(|e| e.to_str()),
        Some("jsonl" | "json")
    );
    let mut w = create(&args.out)?;
    if jsonl {
        report.write_jsonl(&mut w)?;
    } else {
        report.write_csv(&mut w)?;
    }
    w.flush().map_err(|e| Failure::Runtime(e.to_string()))?;

    let label = if args.method.0.is_some_and(Method::is_eat) {
        interpret(&report, args.epsilon)?
            .into_values()
            .next()
            .map(|l| l.as_str())
    } else {
        None
    };
    let (best_alpha, best_ba) = best_point(&report).unwrap_or((None, f64::NAN));
    emit(json!({
        "command": "sweep",
        "flags": args,
        "seeds": args.seeds,
        "rows": report.rows.len(),
        "best_alpha": best_alpha,
        "best_ba": best_ba,
        "baseline_ba": report.rows.iter().map(|r| r.baseline_ba).sum::<f64>() / report.rows.len() as f64,
        "interpretation": label,
        "output": args.out,
    }));
    Ok(())
}

fn evaluate(args: &EvaluateArgs) -> CliResult<()> {
    check_sampler(&args.sampler)?;
    check_alpha(args.alpha)?;
    check_split(args.split)?;
    require_eat_inputs(args.method, &args.schema, &args.category_col)?;
    let schema = args
        .schema
        .as_deref()
        .map(|s| load_schema(s, args.alpha))
        .transpose()?;

    let ds = load_csv(&args.input, &args.label_col, args.category_col.as_deref())?;
    let (train, test) = train_test_split(&ds, args.split, args.seed)?;
    let pipeline = Pipeline {
        k: args.sampler.k,
        sigma: args.sampler.sigma,
        invert_density: args.sampler.invert_density,
        ..Pipeline::new(args.method.0, args.classifier)
    };
    let out = run_once(&train, &test, &pipeline, schema.as_ref(), args.seed)?;
    if let Some(path) = &args.model_out {
        let mut w = create(path)?;
        w.write_all(out.model.to_json().as_bytes())
            .and_then(|()| w.flush())
            .map_err(|e| Failure::Runtime(e.to_string()))?;
    }
    emit(json!({
        "command": "evaluate",
        "flags": args,
        "seed": args.seed,
        "ba": out.ba,
        "sensitivity": out.sensitivity,
        "specificity": out.specificity,
        "confusion": out.confusion,
        "rows_generated": out.generated,
        "fallback_count": out.fallback_count,
        "alpha": schema.as_ref().map(WeightSchema::alpha),
    }));
    Ok(())
}

fn gen_synthetic(args: &GenArgs) -> CliResult<()> {
    let spec = GeneratorSpec {
        majority: args.majority,
        minority: args.minority.clone(),
        dim: args.dim,
        noise: args.noise,
        separation: args.separation,
    };
    if let Err(e) = spec.validate() {
        return usage(format!("invalid generator flags: {e}"));
    }
    let ds = generate_synthetic(&spec, args.seed)?;
    ds.write_csv(create(&args.output)?)?;
    emit(json!({
        "command": "gen-synthetic",
        "flags": args,
        "seed": args.seed,
        "rows": ds.len(),
        "class_counts": ds.class_counts(),
        "output": args.output,
    }));
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Resample(a) => resample(a),
        Command::Sweep(a) => sweep(a),
        Command::Evaluate(a) => evaluate(a),
        Command::GenSynthetic(a) => gen_synthetic(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
