//! Margin-loss training of the four-classifier ensemble.
//!
//! The loss for a sample of class `y` with scores `s` is
//! `w_y · Σ_{i≠y} max(0, s_i − s_y + Δ)`. Its gradient with respect to each
//! circuit angle is assembled from exact parameter-shift derivatives of the
//! scores, chain-ruled through the hinge (subgradient 0 at the kink).
//!
//! Per-sample gradients may be computed on any number of rayon workers; they
//! are always reduced in batch order so results do not depend on the pool.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataio::Dataset;
use crate::error::{Result, VqcError};
use crate::label::N_CLASSES;
use crate::model::{argmax, score, EnsembleModel, ModelParams};
use crate::statevector::StateVector;

pub const DEFAULT_MARGIN: f64 = 0.15;
pub const DEFAULT_LEARNING_RATE: f64 = 0.01;
pub const DEFAULT_BATCH_SIZE: usize = 16;
pub const DEFAULT_MAX_EPOCHS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Optimizer {
    Sgd,
    Momentum { beta: f64 },
    Adam { beta1: f64, beta2: f64, eps: f64 },
}

impl Optimizer {
    pub const MOMENTUM: Optimizer = Optimizer::Momentum { beta: 0.9 };
    pub const ADAM: Optimizer = Optimizer::Adam {
        beta1: 0.9,
        beta2: 0.999,
        eps: 1e-8,
    };
}

impl Default for Optimizer {
    fn default() -> Self {
        Optimizer::ADAM
    }
}

impl fmt::Display for Optimizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Optimizer::Sgd => f.write_str("sgd"),
            Optimizer::Momentum { beta } => write!(f, "sgd_momentum(beta={beta})"),
            Optimizer::Adam { beta1, beta2, eps } => {
                write!(f, "adam(beta1={beta1}, beta2={beta2}, eps={eps})")
            }
        }
    }
}

impl FromStr for Optimizer {
    type Err = VqcError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sgd" => Ok(Optimizer::Sgd),
            "momentum" | "sgd_momentum" | "sgd-momentum" => Ok(Optimizer::MOMENTUM),
            "adam" => Ok(Optimizer::ADAM),
            other => Err(VqcError::invalid(format!("unknown optimizer {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EarlyStopping {
    pub patience: usize,
    pub min_delta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub margin: f64,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub seed: u64,
    pub optimizer: Optimizer,
    pub early_stopping: Option<EarlyStopping>,
    /// Loss weight per class, in label-map order.
    pub class_weights: [f64; N_CLASSES],
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            margin: DEFAULT_MARGIN,
            learning_rate: DEFAULT_LEARNING_RATE,
            batch_size: DEFAULT_BATCH_SIZE,
            max_epochs: DEFAULT_MAX_EPOCHS,
            seed: 0,
            optimizer: Optimizer::default(),
            early_stopping: None,
            class_weights: [1.0; N_CLASSES],
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.margin >= 0.0 && self.margin.is_finite()) {
            return Err(VqcError::invalid(format!("margin must be >= 0, got {}", self.margin)));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(VqcError::invalid(format!(
                "learning rate must be > 0, got {}",
                self.learning_rate
            )));
        }
        if self.batch_size == 0 {
            return Err(VqcError::invalid("batch size must be >= 1"));
        }
        if let Some(es) = &self.early_stopping {
            if es.patience == 0 {
                return Err(VqcError::invalid("early-stopping patience must be >= 1"));
            }
            if !(es.min_delta >= 0.0 && es.min_delta.is_finite()) {
                return Err(VqcError::invalid("early-stopping min_delta must be >= 0"));
            }
        }
        if self.class_weights.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
            return Err(VqcError::invalid("class weights must be > 0"));
        }
        match self.optimizer {
            Optimizer::Sgd => {}
            Optimizer::Momentum { beta } => {
                if !(0.0..1.0).contains(&beta) {
                    return Err(VqcError::invalid("momentum beta must be in [0, 1)"));
                }
            }
            Optimizer::Adam { beta1, beta2, eps } => {
                if !(0.0..1.0).contains(&beta1) || !(0.0..1.0).contains(&beta2) || eps.is_nan() || eps <= 0.0 {
                    return Err(VqcError::invalid("adam needs betas in [0, 1) and eps > 0"));
                }
            }
        }
        Ok(())
    }
}

/// `weight · Σ_{i≠y} max(0, s_i − s_y + margin)`.
pub fn margin_loss(scores: &[f64; N_CLASSES], true_class: usize, margin: f64, weight: f64) -> Result<f64> {
    check_class(true_class)?;
    let sy = scores[true_class];
    let hinge: f64 = scores
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != true_class)
        .map(|(_, &si)| (si - sy + margin).max(0.0))
        .sum();
    Ok(weight * hinge)
}

/// Subgradient of [`margin_loss`] with respect to each score.
pub fn margin_loss_score_grad(
    scores: &[f64; N_CLASSES],
    true_class: usize,
    margin: f64,
    weight: f64,
) -> Result<[f64; N_CLASSES]> {
    check_class(true_class)?;
    let sy = scores[true_class];
    let mut grad = [0.0; N_CLASSES];
    for i in 0..N_CLASSES {
        if i != true_class && scores[i] - sy + margin > 0.0 {
            grad[i] += weight;
            grad[true_class] -= weight;
        }
    }
    Ok(grad)
}

fn check_class(true_class: usize) -> Result<()> {
    if true_class >= N_CLASSES {
        return Err(VqcError::invalid(format!(
            "class index {true_class} out of range 0..{N_CLASSES}"
        )));
    }
    Ok(())
}

/// `∂score/∂angle_k = (score(angle_k + π/2) − score(angle_k − π/2)) / 2`
/// for every angle of one classifier.
pub fn score_gradient(params: &ModelParams, encoded: &StateVector, n_layers: usize) -> Result<Vec<f64>> {
    let mut shifted = params.clone();
    let mut grad = Vec::with_capacity(params.n_angles());
    for k in 0..params.n_angles() {
        let original = params.angles()[k];
        shifted.angles_mut()[k] = original + FRAC_PI_2;
        let plus = score(&shifted, encoded, n_layers)?;
        shifted.angles_mut()[k] = original - FRAC_PI_2;
        let minus = score(&shifted, encoded, n_layers)?;
        shifted.angles_mut()[k] = original;
        grad.push((plus - minus) / 2.0);
    }
    Ok(grad)
}

/// Loss of one sample and its gradient for every classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct LossGradient {
    pub loss: f64,
    pub scores: [f64; N_CLASSES],
    /// Angle gradients per classifier, laid out like [`ModelParams::angles`].
    pub angles: [Vec<f64>; N_CLASSES],
    /// Bias gradients; zero for classifiers without a bias.
    pub bias: [f64; N_CLASSES],
}

/// Parameter-shift gradient of the weighted margin loss for one encoded
/// sample. Classifiers whose hinge derivative is zero get an exactly zero
/// gradient without evaluating any shifted circuits.
pub fn parameter_shift_grad(
    model: &EnsembleModel,
    encoded: &StateVector,
    true_class: usize,
    margin: f64,
    weight: f64,
) -> Result<LossGradient> {
    let scores = model.scores_encoded(encoded)?;
    let loss = margin_loss(&scores, true_class, margin, weight)?;
    let dloss = margin_loss_score_grad(&scores, true_class, margin, weight)?;
    let mut angles: [Vec<f64>; N_CLASSES] = Default::default();
    let mut bias = [0.0; N_CLASSES];
    for (j, params) in model.classifiers().iter().enumerate() {
        if dloss[j] == 0.0 {
            angles[j] = vec![0.0; params.n_angles()];
            continue;
        }
        let mut g = score_gradient(params, encoded, model.n_layers())?;
        for x in g.iter_mut() {
            *x *= dloss[j];
        }
        angles[j] = g;
        if params.bias.is_some() {
            bias[j] = dloss[j];
        }
    }
    Ok(LossGradient {
        loss,
        scores,
        angles,
        bias,
    })
}

/// Trainable values in a fixed order: per classifier, angles then bias.
fn flatten(model: &EnsembleModel) -> Vec<f64> {
    let mut out = Vec::new();
    for c in model.classifiers() {
        out.extend_from_slice(c.angles());
        if let Some(b) = c.bias {
            out.push(b);
        }
    }
    out
}

fn unflatten(model: &mut EnsembleModel, flat: &[f64]) {
    let mut it = flat.iter().copied();
    for c in model.classifiers_mut().iter_mut() {
        for a in c.angles_mut() {
            *a = it.next().expect("flat length matches model");
        }
        if c.bias.is_some() {
            c.bias = it.next();
        }
    }
}

fn accumulate(sum: &mut [f64], model: &EnsembleModel, g: &LossGradient) {
    let mut k = 0;
    for (j, c) in model.classifiers().iter().enumerate() {
        for x in &g.angles[j] {
            sum[k] += x;
            k += 1;
        }
        if c.bias.is_some() {
            sum[k] += g.bias[j];
            k += 1;
        }
    }
}

/// First-order optimizer with its running state.
#[derive(Debug, Clone)]
pub struct OptimizerState {
    kind: Optimizer,
    learning_rate: f64,
    step: u64,
    first: Vec<f64>,
    second: Vec<f64>,
}

impl OptimizerState {
    pub fn new(kind: Optimizer, learning_rate: f64, n_params: usize) -> Self {
        let second = match kind {
            Optimizer::Adam { .. } => vec![0.0; n_params],
            _ => Vec::new(),
        };
        Self {
            kind,
            learning_rate,
            step: 0,
            first: vec![0.0; n_params],
            second,
        }
    }

    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        debug_assert_eq!(params.len(), grad.len());
        self.step += 1;
        let lr = self.learning_rate;
        match self.kind {
            Optimizer::Sgd => {
                for (p, g) in params.iter_mut().zip(grad) {
                    *p -= lr * g;
                }
            }
            Optimizer::Momentum { beta } => {
                for ((p, g), v) in params.iter_mut().zip(grad).zip(self.first.iter_mut()) {
                    *v = beta * *v + g;
                    *p -= lr * *v;
                }
            }
            Optimizer::Adam { beta1, beta2, eps } => {
                let t = self.step as i32;
                let c1 = 1.0 - beta1.powi(t);
                let c2 = 1.0 - beta2.powi(t);
                for (((p, g), m), v) in params
                    .iter_mut()
                    .zip(grad)
                    .zip(self.first.iter_mut())
                    .zip(self.second.iter_mut())
                {
                    *m = beta1 * *m + (1.0 - beta1) * g;
                    *v = beta2 * *v + (1.0 - beta2) * g * g;
                    let m_hat = *m / c1;
                    let v_hat = *v / c2;
                    *p -= lr * m_hat / (v_hat.sqrt() + eps);
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_acc: f64,
    pub val_loss: f64,
    pub val_acc: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainReport {
    pub epochs: Vec<EpochRecord>,
    /// Last completed epoch (0 when no epoch ran).
    pub stopped_epoch: usize,
    /// Epoch with the lowest validation loss.
    pub best_epoch: usize,
    pub early_stopped: bool,
}

impl TrainReport {
    pub fn last(&self) -> Option<&EpochRecord> {
        self.epochs.last()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopDecision {
    Improved,
    Continue,
    Stop,
}

/// Patience counter over validation losses.
#[derive(Debug, Clone)]
pub struct EarlyStopper {
    config: EarlyStopping,
    best: f64,
    best_epoch: usize,
    stale: usize,
}

impl EarlyStopper {
    pub fn new(config: EarlyStopping) -> Self {
        Self {
            config,
            best: f64::INFINITY,
            best_epoch: 0,
            stale: 0,
        }
    }

    pub fn best_epoch(&self) -> usize {
        self.best_epoch
    }

    /// An epoch improves when its loss beats the best so far by more than
    /// `min_delta`; `patience` consecutive non-improving epochs stop the run.
    pub fn update(&mut self, epoch: usize, val_loss: f64) -> StopDecision {
        if val_loss < self.best - self.config.min_delta {
            self.best = val_loss;
            self.best_epoch = epoch;
            self.stale = 0;
            StopDecision::Improved
        } else {
            self.stale += 1;
            if self.stale >= self.config.patience {
                StopDecision::Stop
            } else {
                StopDecision::Continue
            }
        }
    }
}

struct Prepared {
    states: Vec<StateVector>,
    classes: Vec<usize>,
}

fn prepare(model: &EnsembleModel, data: &Dataset, what: &str) -> Result<Prepared> {
    if data.is_empty() {
        return Err(VqcError::invalid(format!("{what} set is empty")));
    }
    if data.feature_dim() != model.feature_dim() {
        return Err(VqcError::invalid(format!(
            "{what} set has {} features, model expects {}",
            data.feature_dim(),
            model.feature_dim()
        )));
    }
    let states = data
        .samples()
        .par_iter()
        .map(|s| model.encode(&s.features))
        .collect::<Result<Vec<_>>>()?;
    let classes = data
        .samples()
        .iter()
        .map(|s| model.label_map().index_of(s.label))
        .collect();
    Ok(Prepared { states, classes })
}

/// Mean weighted margin loss and argmax accuracy.
fn loss_and_accuracy(model: &EnsembleModel, data: &Prepared, config: &TrainConfig) -> Result<(f64, f64)> {
    let per_sample = data
        .states
        .par_iter()
        .zip(data.classes.par_iter())
        .map(|(state, &y)| {
            let scores = model.scores_encoded(state)?;
            let loss = margin_loss(&scores, y, config.margin, config.class_weights[y])?;
            Ok((loss, argmax(&scores) == y))
        })
        .collect::<Result<Vec<_>>>()?;
    let n = per_sample.len() as f64;
    let loss = per_sample.iter().map(|(l, _)| l).sum::<f64>() / n;
    let correct = per_sample.iter().filter(|(_, ok)| *ok).count() as f64;
    Ok((loss, correct / n))
}

pub fn train(
    train_set: &Dataset,
    validation: &Dataset,
    config: &TrainConfig,
    initial: &EnsembleModel,
) -> Result<(EnsembleModel, TrainReport)> {
    train_with_observer(train_set, validation, config, initial, |_| {})
}

/// [`train`], calling `on_epoch` after each completed epoch.
///
/// Without early stopping the final model is returned. With it, the snapshot
/// from the best validation epoch is returned, whether or not patience ran
/// out before `max_epochs`.
pub fn train_with_observer<F>(
    train_set: &Dataset,
    validation: &Dataset,
    config: &TrainConfig,
    initial: &EnsembleModel,
    mut on_epoch: F,
) -> Result<(EnsembleModel, TrainReport)>
where
    F: FnMut(&EpochRecord),
{
    config.validate()?;
    let train_data = prepare(initial, train_set, "training")?;
    let val_data = prepare(initial, validation, "validation")?;

    let mut model = initial.clone();
    let mut report = TrainReport::default();
    if config.max_epochs == 0 {
        return Ok((model, report));
    }
    model.lineage.train_seed = Some(config.seed);

    let mut flat = flatten(&model);
    let mut optimizer = OptimizerState::new(config.optimizer, config.learning_rate, flat.len());
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..train_data.states.len()).collect();
    let mut stopper = config.early_stopping.map(EarlyStopper::new);
    let mut best_snapshot: Option<EnsembleModel> = None;
    let mut best_val = f64::INFINITY;

    for epoch in 1..=config.max_epochs {
        order.shuffle(&mut rng);
        for (batch, chunk) in order.chunks(config.batch_size).enumerate() {
            let grads = chunk
                .par_iter()
                .map(|&i| {
                    let y = train_data.classes[i];
                    parameter_shift_grad(
                        &model,
                        &train_data.states[i],
                        y,
                        config.margin,
                        config.class_weights[y],
                    )
                })
                .collect::<Result<Vec<_>>>()?;

            let mut sum = vec![0.0; flat.len()];
            let mut batch_loss = 0.0;
            for g in &grads {
                batch_loss += g.loss;
                accumulate(&mut sum, &model, g);
            }
            let scale = 1.0 / chunk.len() as f64;
            for x in sum.iter_mut() {
                *x *= scale;
            }
            if !batch_loss.is_finite() || sum.iter().any(|x| !x.is_finite()) {
                return Err(VqcError::NumericalFailure {
                    epoch,
                    batch: batch + 1,
                    message: format!("non-finite loss or gradient (batch loss {batch_loss})"),
                });
            }
            optimizer.step(&mut flat, &sum);
            unflatten(&mut model, &flat);
        }

        let (train_loss, train_acc) = loss_and_accuracy(&model, &train_data, config)?;
        let (val_loss, val_acc) = loss_and_accuracy(&model, &val_data, config)?;
        if !train_loss.is_finite() || !val_loss.is_finite() {
            return Err(VqcError::NumericalFailure {
                epoch,
                batch: 0,
                message: format!("non-finite epoch loss (train {train_loss}, validation {val_loss})"),
            });
        }
        let record = EpochRecord {
            epoch,
            train_loss,
            train_acc,
            val_loss,
            val_acc,
        };
        report.epochs.push(record);
        report.stopped_epoch = epoch;
        on_epoch(&record);

        match stopper.as_mut() {
            Some(stopper) => match stopper.update(epoch, val_loss) {
                StopDecision::Improved => {
                    report.best_epoch = epoch;
                    best_snapshot = Some(model.clone());
                }
                StopDecision::Continue => {}
                StopDecision::Stop => {
                    report.early_stopped = true;
                    break;
                }
            },
            None => {
                if val_loss < best_val {
                    best_val = val_loss;
                    report.best_epoch = epoch;
                }
            }
        }
    }

    if let Some(best) = best_snapshot {
        model = best;
    }
    Ok((model, report))
}
