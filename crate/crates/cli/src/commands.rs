use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;
use std::process::ExitCode;

use rayon::prelude::*;
use vqc_core::dataio::{self, Dataset};
use vqc_core::gradcheck::{self, GradCheckConfig};
use vqc_core::model::DEFAULT_LAYERS;
use vqc_core::training::{self, EpochRecord};
use vqc_core::{
    metrics, EarlyStopping, EncodingConfig, EncodingScheme, EnsembleModel, LabelMap, Optimizer, Result, TrainConfig,
    VqcError, N_CLASSES,
};

use crate::config::{self, TrainFile};
use crate::{EvalArgs, GradcheckArgs, PredictArgs, SynthArgs, SynthKind, TrainArgs};

const PROGRESS_EVERY: usize = 10;

fn invalid(msg: impl Into<String>) -> VqcError {
    VqcError::InvalidArgument(msg.into())
}

/// Fails early when an output path cannot be created, before any work is done.
fn check_writable_dir(path: &Path, flag: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    if !dir.is_dir() {
        return Err(invalid(format!(
            "{flag} {}: directory {} does not exist",
            path.display(),
            dir.display()
        )));
    }
    Ok(())
}

/// Effective training settings after merging flags, config file and defaults.
struct Settings {
    scheme: EncodingScheme,
    qubits: Option<usize>,
    layers: usize,
    bias: bool,
    train: TrainConfig,
}

fn resolve(args: &TrainArgs, file: &TrainFile) -> Result<Settings> {
    let scheme = match args.scheme.as_deref().or(file.scheme.as_deref()) {
        Some(s) => s.parse::<EncodingScheme>()?,
        None => EncodingScheme::Amplitude,
    };
    let optimizer = match args.optimizer.as_deref().or(file.optimizer.as_deref()) {
        Some(s) => s.parse::<Optimizer>()?,
        None => Optimizer::default(),
    };
    let class_weights = match args.class_weights.as_ref().or(file.class_weights.as_ref()) {
        Some(w) => <[f64; N_CLASSES]>::try_from(w.as_slice())
            .map_err(|_| invalid(format!("class weights need exactly {N_CLASSES} values, got {}", w.len())))?,
        None => [1.0; N_CLASSES],
    };
    let patience = args.patience.or(file.patience);
    let min_delta = args.min_delta.or(file.min_delta);
    if min_delta.is_some() && patience.is_none() {
        return Err(invalid("--min-delta requires --patience"));
    }
    let train = TrainConfig {
        margin: args.margin.or(file.margin).unwrap_or(training::DEFAULT_MARGIN),
        learning_rate: args.lr.or(file.learning_rate).unwrap_or(training::DEFAULT_LEARNING_RATE),
        batch_size: args.batch_size.or(file.batch_size).unwrap_or(training::DEFAULT_BATCH_SIZE),
        max_epochs: args.epochs.or(file.epochs).unwrap_or(training::DEFAULT_MAX_EPOCHS),
        seed: args.seed.or(file.seed).unwrap_or(0),
        optimizer,
        early_stopping: patience.map(|patience| EarlyStopping {
            patience,
            min_delta: min_delta.unwrap_or(0.0),
        }),
        class_weights,
    };
    train.validate()?;
    let layers = args.layers.or(file.layers).unwrap_or(DEFAULT_LAYERS);
    if layers == 0 {
        return Err(invalid("--layers must be at least 1"));
    }
    Ok(Settings {
        scheme,
        qubits: args.qubits.or(file.qubits),
        layers,
        bias: args.bias || file.bias.unwrap_or(false),
        train,
    })
}

fn encoding_for(scheme: EncodingScheme, qubits: Option<usize>, dim: usize) -> Result<EncodingConfig> {
    let n_qubits = match (qubits, scheme) {
        (Some(q), _) => q,
        (None, EncodingScheme::Amplitude) => EncodingConfig::amplitude_for_dim(dim)?.n_qubits,
        (None, EncodingScheme::Angle) => dim,
    };
    EncodingConfig::new(scheme, n_qubits, dim)
}

fn print_epoch(r: &EpochRecord) {
    println!(
        "epoch {:>4}  train_loss {:.6}  train_acc {:.4}  val_loss {:.6}  val_acc {:.4}",
        r.epoch, r.train_loss, r.train_acc, r.val_loss, r.val_acc
    );
}

pub fn train(args: &TrainArgs) -> Result<ExitCode> {
    let file = match &args.config {
        Some(path) => config::load(path)?,
        None => TrainFile::default(),
    };
    let settings = resolve(args, &file)?;
    check_writable_dir(&args.out, "--out")?;
    if let Some(log) = &args.log {
        check_writable_dir(log, "--log")?;
    }

    let train_set = match (&args.train, args.synth) {
        (Some(path), _) => dataio::load_csv(path)?,
        (None, Some(SynthKind::Blobs)) => {
            if !(args.separation >= 0.0 && args.separation.is_finite()) {
                return Err(invalid("--separation must be a finite value >= 0"));
            }
            dataio::synth_blobs(args.synth_n, args.synth_dim, args.separation, settings.train.seed)?
        }
        (None, None) => return Err(invalid("one of --train or --synth is required")),
    };
    let val_set: Dataset = match &args.val {
        Some(path) => dataio::load_csv(path)?,
        None => train_set.clone(),
    };
    let encoding = encoding_for(settings.scheme, settings.qubits, train_set.feature_dim())?;
    if val_set.feature_dim() != train_set.feature_dim() {
        return Err(invalid(format!(
            "validation set has {} features, training set has {}",
            val_set.feature_dim(),
            train_set.feature_dim()
        )));
    }
    let initial = EnsembleModel::init(
        encoding,
        settings.layers,
        LabelMap::default(),
        settings.bias,
        settings.train.seed,
    )?;

    let cfg = &settings.train;
    println!("training set:   {} ({} samples, {} features)", train_set.provenance, train_set.len(), train_set.feature_dim());
    match &args.val {
        Some(_) => println!("validation set: {} ({} samples)", val_set.provenance, val_set.len()),
        None => println!("validation set: none given; reporting on the training set"),
    }
    println!("encoding:       {} on {} qubits", encoding.scheme, encoding.n_qubits);
    println!("layers:         {}", settings.layers);
    println!("bias:           {}", settings.bias);
    println!("epochs:         {}", cfg.max_epochs);
    println!("learning rate:  {}", cfg.learning_rate);
    println!("margin:         {}", cfg.margin);
    println!("batch size:     {}", cfg.batch_size);
    println!("optimizer:      {}", cfg.optimizer);
    match &cfg.early_stopping {
        Some(es) => println!("early stopping: patience {}, min_delta {}", es.patience, es.min_delta),
        None => println!("early stopping: off"),
    }
    println!("class weights:  {:?}", cfg.class_weights);
    println!("seed:           {}", cfg.seed);

    let max_epochs = cfg.max_epochs;
    let (model, report) = training::train_with_observer(&train_set, &val_set, cfg, &initial, |r| {
        if r.epoch % PROGRESS_EVERY == 0 || r.epoch == max_epochs {
            print_epoch(r);
        }
    })?;
    if let Some(last) = report.last() {
        if last.epoch % PROGRESS_EVERY != 0 && last.epoch != max_epochs {
            print_epoch(last);
        }
    }
    if report.early_stopped {
        println!(
            "early stop after epoch {}; keeping epoch {}",
            report.stopped_epoch, report.best_epoch
        );
    }

    dataio::save_model(&args.out, &model)?;
    if let Some(log) = &args.log {
        dataio::write_epoch_log(log, &report.epochs)?;
    }

    let train_report = metrics::evaluate(&model, &train_set)?;
    let train_acc = accuracy(&train_report.confusion);
    let val_acc = if args.val.is_some() {
        accuracy(&metrics::evaluate(&model, &val_set)?.confusion)
    } else {
        train_acc
    };
    println!("final accuracy: train {train_acc:.4}, validation {val_acc:.4}");
    println!("model written to {}", args.out.display());
    Ok(ExitCode::SUCCESS)
}

fn accuracy(confusion: &[[u64; N_CLASSES]; N_CLASSES]) -> f64 {
    let total: u64 = confusion.iter().flatten().sum();
    let correct: u64 = (0..N_CLASSES).map(|i| confusion[i][i]).sum();
    correct as f64 / total as f64
}

pub fn eval(args: &EvalArgs) -> Result<ExitCode> {
    if let Some(json) = &args.json {
        check_writable_dir(json, "--json")?;
    }
    let model = dataio::load_model(&args.model)?;
    let data = dataio::load_csv(&args.data)?;
    let report = metrics::evaluate(&model, &data)?;
    print!("{report}");
    if let Some(json) = &args.json {
        dataio::write_json(json, &report)?;
    }
    Ok(ExitCode::SUCCESS)
}

pub fn predict(args: &PredictArgs) -> Result<ExitCode> {
    if let Some(out) = &args.out {
        check_writable_dir(out, "--out")?;
    }
    let model = dataio::load_model(&args.model)?;
    let table = dataio::load_feature_table(&args.data)?;
    if table.feature_dim != model.feature_dim() {
        return Err(invalid(format!(
            "{}: {} features, model expects {}",
            args.data.display(),
            table.feature_dim,
            model.feature_dim()
        )));
    }
    let scores = table
        .rows
        .par_iter()
        .map(|row| model.score_all(row))
        .collect::<Result<Vec<_>>>()?;

    let labels = model.label_map().labels();
    let mut text = String::from("prediction");
    for l in labels {
        let _ = write!(text, ",{l}");
    }
    text.push('\n');
    for s in &scores {
        let _ = write!(text, "{}", labels[vqc_core::argmax(s)]);
        for v in s {
            let _ = write!(text, ",{v:?}");
        }
        text.push('\n');
    }
    match &args.out {
        Some(out) => {
            dataio::write_atomic(out, |w| w.write_all(text.as_bytes()))?;
            println!("{} predictions written to {}", scores.len(), out.display());
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|source| VqcError::Io { path: "<stdout>".into(), source })?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

pub fn gradcheck(args: &GradcheckArgs) -> Result<ExitCode> {
    if args.trials <= 0 {
        return Err(invalid(format!("--trials must be at least 1, got {}", args.trials)));
    }
    let cfg = GradCheckConfig {
        trials: args.trials as usize,
        n_qubits: args.qubits,
        n_layers: args.layers,
        margin: args.margin,
        seed: args.seed,
        ..GradCheckConfig::default()
    };
    let report = gradcheck::run(&cfg)?;
    println!(
        "gradient check: {} trials, {} components, max |shift - finite difference| = {:.3e}",
        report.trials, report.compared, report.max_abs_deviation
    );
    if report.max_abs_deviation < gradcheck::DEFAULT_TOLERANCE {
        println!("PASS (tolerance {:e})", gradcheck::DEFAULT_TOLERANCE);
        Ok(ExitCode::SUCCESS)
    } else {
        println!("FAIL (tolerance {:e})", gradcheck::DEFAULT_TOLERANCE);
        Ok(ExitCode::from(1))
    }
}

pub fn synth(args: &SynthArgs) -> Result<ExitCode> {
    if !(args.separation >= 0.0 && args.separation.is_finite()) {
        return Err(invalid("--separation must be a finite value >= 0"));
    }
    check_writable_dir(&args.out, "--out")?;
    let data = dataio::synth_blobs(args.n_per_class, args.dim, args.separation, args.seed)?;
    dataio::save_csv(&args.out, &data)?;
    println!(
        "{} samples ({} per class, {} features) written to {}",
        data.len(),
        args.n_per_class,
        args.dim,
        args.out.display()
    );
    Ok(ExitCode::SUCCESS)
}
