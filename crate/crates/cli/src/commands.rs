use std::fs;
use std::path::Path;
use std::process::ExitCode;

use serde::Serialize;
use uqled_core::noise::ProfileDocument;
use uqled_core::synth::{run_pipeline, ExperimentConfig};
use uqled_core::tensor::{
    read_labels_csv, read_tensor, validate_prob_matrix, write_tensor, Tensor, TensorFormat,
    ROW_SUM_TOL,
};
use uqled_core::{
    correlation_report, detect as run_detector, detection_metrics, flip_profile, inject_noise,
    similarity_scores, AlgorithmId, CorruptionMask, EnsembleConfig, FlagSet, FlipProfile,
    LabelVector, McdStack, ProbMatrix,
};

use crate::render;
use crate::{
    DetectArgs, EvaluateArgs, ExperimentArgs, Format, InjectArgs, StatsArgs, ValidateArgs,
};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Data(uqled_core::Error),
    #[error("{path}: {message}")]
    Input { path: String, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Usage(_) => ExitCode::from(1),
            _ => ExitCode::from(2),
        }
    }
}

impl From<uqled_core::Error> for CliError {
    fn from(e: uqled_core::Error) -> Self {
        use uqled_core::Error as E;
        match e {
            E::UnknownAlgorithm(_)
            | E::InvalidTau(_)
            | E::InvalidM { .. }
            | E::MissingInput { .. } => CliError::Usage(e.to_string()),
            other => CliError::Data(other),
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

/// Caps the global rayon pool at `UQLED_THREADS`.
pub fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("UQLED_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw.trim().parse().ok().filter(|&t| t > 0).ok_or_else(|| {
        CliError::Usage(format!(
            "UQLED_THREADS must be a positive integer, got '{raw}'"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn input_error(path: &Path, message: impl ToString) -> CliError {
    CliError::Input {
        path: path.display().to_string(),
        message: message.to_string(),
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| input_error(path, e))?;
    serde_json::from_str(&text).map_err(|e| input_error(path, e))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("serializable output");
    text.push('\n');
    text
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| input_error(path, e))
}

/// JSON to `out` when given; stdout gets the chosen format unless that would
/// duplicate the file.
fn emit<T: Serialize>(
    value: &T,
    out: Option<&Path>,
    format: Format,
    table: impl FnOnce(&T) -> String,
) -> Result<()> {
    if let Some(path) = out {
        write_text(path, &to_json(value))?;
    }
    match (format, out) {
        (Format::Table, _) => print!("{}", table(value)),
        (Format::Json, None) => print!("{}", to_json(value)),
        (Format::Json, Some(_)) => {}
    }
    Ok(())
}

fn load_matrix(path: &Path) -> Result<ProbMatrix> {
    let p = read_tensor(path, TensorFormat::from_path(path))?.into_matrix()?;
    let violations = validate_prob_matrix(&p, ROW_SUM_TOL);
    if let Some(v) = violations.first() {
        return Err(input_error(
            path,
            format!(
                "{} rows are not distributions (first: row {} sums to {})",
                violations.len(),
                v.row,
                v.sum
            ),
        ));
    }
    Ok(p)
}

fn load_stack(path: &Path) -> Result<McdStack> {
    let stack = read_tensor(path, TensorFormat::from_path(path))?.into_stack()?;
    for (f, pass) in stack.passes().iter().enumerate() {
        if let Some(v) = validate_prob_matrix(pass, ROW_SUM_TOL).first() {
            return Err(input_error(
                path,
                format!("pass {f}: row {} sums to {}", v.row, v.sum),
            ));
        }
    }
    Ok(stack)
}

fn load_labels(path: &Path, num_classes: Option<usize>) -> Result<LabelVector> {
    let labels = match TensorFormat::from_path(path) {
        TensorFormat::Csv => read_labels_csv(path, num_classes)?,
        TensorFormat::Binary => read_tensor(path, TensorFormat::Binary)?.into_labels()?,
    };
    match num_classes {
        Some(c) if labels.num_classes() != c => Err(input_error(
            path,
            format!(
                "labels declare {} classes, expected {c}",
                labels.num_classes()
            ),
        )),
        _ => Ok(labels),
    }
}

#[derive(Debug, Serialize)]
struct InjectSummary {
    n: usize,
    tau: f64,
    seed: u64,
    num_flipped: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    noisy_labels: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mask: Option<CorruptionMask>,
}

pub fn inject(args: &InjectArgs, format: Format) -> Result<()> {
    if !(0.0..=1.0).contains(&args.tau) {
        return Err(CliError::Usage(format!(
            "--tau must lie in [0, 1], got {}",
            args.tau
        )));
    }
    let profile = match (&args.profile, &args.probs, &args.test_labels) {
        (Some(path), _, _) => {
            let doc: ProfileDocument = read_json(path)?;
            FlipProfile::from_document(doc).map_err(|e| input_error(path, e))?
        }
        (None, Some(probs), Some(test_labels)) => {
            let p = load_matrix(probs)?;
            let y = load_labels(test_labels, Some(p.c()))?;
            let profile = flip_profile(&similarity_scores(&p, &y)?)?;
            if let Some(out) = &args.out_profile {
                write_text(out, &to_json(&profile.to_document(None)))?;
            }
            profile
        }
        _ => {
            return Err(CliError::Usage(
                "pass --profile or both --probs and --test-labels".into(),
            ))
        }
    };
    let labels = load_labels(&args.labels, Some(profile.num_classes()))?;
    let (noisy, mask) = inject_noise(&labels, &profile, args.tau, args.seed)?;

    if let Some(path) = &args.out_labels {
        write_tensor(&noisy, path, TensorFormat::from_path(path))?;
    }
    if let Some(path) = &args.out_mask {
        write_text(path, &to_json(&mask))?;
    }
    let summary = InjectSummary {
        n: labels.len(),
        tau: args.tau,
        seed: args.seed,
        num_flipped: mask.num_flipped(),
        noisy_labels: args.out_labels.is_none().then(|| noisy.as_slice().to_vec()),
        mask: args.out_mask.is_none().then_some(mask),
    };
    emit(&summary, None, format, |s| {
        render::key_values(&[
            ("n", s.n.to_string()),
            ("tau", s.tau.to_string()),
            ("seed", s.seed.to_string()),
            ("flipped", s.num_flipped.to_string()),
        ])
    })
}

pub fn detect(args: &DetectArgs, format: Format) -> Result<()> {
    let algorithm: AlgorithmId = args.alg.parse()?;
    let softmax = args.probs.as_deref().map(load_matrix).transpose()?;
    let stack = args.stack.as_deref().map(load_stack).transpose()?;
    let c = softmax
        .as_ref()
        .map(ProbMatrix::c)
        .or(stack.as_ref().map(McdStack::c));
    if let (Some(p), Some(s)) = (&softmax, &stack) {
        if (p.n(), p.c()) != (s.n(), s.c()) {
            return Err(CliError::Usage(format!(
                "--probs is {}x{} but --stack passes are {}x{}",
                p.n(),
                p.c(),
                s.n(),
                s.c()
            )));
        }
    }
    let labels = load_labels(&args.labels, c)?;
    let passes = stack.as_ref().map_or(1, McdStack::num_passes);
    let cfg = match args.m {
        Some(m) => EnsembleConfig::new(m, passes)?,
        None => EnsembleConfig::strict_majority(passes),
    };
    let flags = run_detector(algorithm, softmax.as_ref(), stack.as_ref(), &labels, &cfg)?;
    emit(&flags, args.out.as_deref(), format, |f| {
        render::flags(algorithm, f, labels.len())
    })
}

pub fn evaluate(args: &EvaluateArgs, format: Format) -> Result<()> {
    let flags: FlagSet = read_json(&args.flags)?;
    let mask: CorruptionMask = read_json(&args.mask)?;
    let metrics = detection_metrics(&flags, &mask)?;
    emit(&metrics, args.out.as_deref(), format, render::metrics)
}

fn read_pairs(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let text = fs::read_to_string(path).map_err(|e| input_error(path, e))?;
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed: Option<Vec<f64>> = fields.iter().map(|f| f.parse().ok()).collect();
        match parsed {
            Some(v) if v.len() == 2 && v.iter().all(|x| x.is_finite()) => {
                xs.push(v[0]);
                ys.push(v[1]);
            }
            None if i == 0 && fields.len() == 2 => continue,
            _ => {
                return Err(input_error(
                    path,
                    format!("line {}: expected two finite numbers", i + 1),
                ))
            }
        }
    }
    Ok((xs, ys))
}

pub fn stats(args: &StatsArgs, format: Format) -> Result<()> {
    if !(args.alpha > 0.0 && args.alpha < 1.0) {
        return Err(CliError::Usage(format!(
            "--alpha must lie in (0, 1), got {}",
            args.alpha
        )));
    }
    let (xs, ys) = read_pairs(&args.pairs)?;
    let report = correlation_report(&xs, &ys, args.alpha)?;
    emit(&report, args.out.as_deref(), format, render::correlation)
}

pub fn experiment(args: &ExperimentArgs, format: Format) -> Result<()> {
    let cfg: ExperimentConfig = read_json(&args.config)?;
    let report = run_pipeline(&cfg)?;
    emit(&report, args.out.as_deref(), format, render::experiment)
}

#[derive(Debug, Serialize)]
struct ValidationReport {
    kind: &'static str,
    shape: Vec<usize>,
    valid: bool,
    violations: Vec<String>,
}

pub fn validate(args: &ValidateArgs, format: Format) -> Result<()> {
    let path = args.file.as_path();
    let tensor = read_tensor(path, TensorFormat::from_path(path))?;
    let rows = |p: &ProbMatrix, prefix: &str| -> Vec<String> {
        validate_prob_matrix(p, ROW_SUM_TOL)
            .into_iter()
            .map(|v| format!("{prefix}row {} sums to {}", v.row, v.sum))
            .collect()
    };
    let report = match &tensor {
        Tensor::Matrix(p) => ValidationReport {
            kind: tensor.kind_name(),
            shape: vec![p.n(), p.c()],
            valid: false,
            violations: rows(p, ""),
        },
        Tensor::Stack(s) => ValidationReport {
            kind: tensor.kind_name(),
            shape: vec![s.num_passes(), s.n(), s.c()],
            valid: false,
            violations: s
                .passes()
                .iter()
                .enumerate()
                .flat_map(|(f, p)| rows(p, &format!("pass {f} ")))
                .collect(),
        },
        Tensor::Labels(y) => ValidationReport {
            kind: tensor.kind_name(),
            shape: vec![y.len(), y.num_classes()],
            valid: false,
            violations: Vec::new(),
        },
    };
    let report = ValidationReport {
        valid: report.violations.is_empty(),
        ..report
    };
    emit(&report, None, format, |r| {
        let mut text = render::key_values(&[
            ("kind", r.kind.to_string()),
            ("shape", format!("{:?}", r.shape)),
            ("valid", r.valid.to_string()),
        ]);
        for v in &r.violations {
            text.push_str(&format!("  {v}\n"));
        }
        text
    })?;
    if report.valid {
        Ok(())
    } else {
        Err(input_error(
            path,
            format!("{} invalid rows", report.violations.len()),
        ))
    }
}
