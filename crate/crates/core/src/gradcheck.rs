//! Randomized comparison of parameter-shift loss gradients against central
//! finite differences.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::encoding::EncodingConfig;
use crate::error::{Result, VqcError};
use crate::label::{LabelMap, N_CLASSES};
use crate::model::{EnsembleModel, ModelParams};
use crate::training::{margin_loss, parameter_shift_grad, DEFAULT_MARGIN};

pub const DEFAULT_TOLERANCE: f64 = 1e-6;
pub const DEFAULT_STEP: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckConfig {
    pub trials: usize,
    pub n_qubits: usize,
    pub n_layers: usize,
    pub margin: f64,
    pub step: f64,
    pub seed: u64,
}

impl Default for GradCheckConfig {
    fn default() -> Self {
        Self {
            trials: 20,
            n_qubits: 4,
            n_layers: 2,
            margin: DEFAULT_MARGIN,
            step: DEFAULT_STEP,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub trials: usize,
    pub compared: usize,
    pub max_abs_deviation: f64,
}

/// Random model with angles uniform in `[-π, π]`, a standard-normal feature
/// vector, and a random true class.
pub fn random_trial<R: Rng>(rng: &mut R, n_qubits: usize, n_layers: usize) -> Result<(EnsembleModel, Vec<f64>, usize)> {
    let encoding = EncodingConfig::amplitude_for_dim(1 << n_qubits)?;
    let classifiers = std::array::from_fn(|_| {
        let angles = (0..n_layers * n_qubits * 3).map(|_| rng.random_range(-PI..PI)).collect();
        ModelParams::from_angles(n_layers, n_qubits, angles, None).expect("finite angles")
    });
    let model = EnsembleModel::new(classifiers, encoding, n_layers, LabelMap::default())?;
    let features = (0..encoding.input_dim).map(|_| rng.sample(StandardNormal)).collect();
    let class = rng.random_range(0..N_CLASSES);
    Ok((model, features, class))
}

pub fn run(config: &GradCheckConfig) -> Result<GradCheckReport> {
    if config.trials == 0 {
        return Err(VqcError::invalid("gradient check needs at least one trial"));
    }
    if config.n_layers == 0 {
        return Err(VqcError::invalid("gradient check needs at least one layer"));
    }
    if config.step.is_nan() || config.step <= 0.0 {
        return Err(VqcError::invalid("finite-difference step must be > 0"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut max_dev: f64 = 0.0;
    let mut compared = 0;
    for _ in 0..config.trials {
        let (model, features, class) = random_trial(&mut rng, config.n_qubits, config.n_layers)?;
        let state = model.encode(&features)?;
        let shift = parameter_shift_grad(&model, &state, class, config.margin, 1.0)?;
        for j in 0..N_CLASSES {
            for k in 0..model.classifiers()[j].n_angles() {
                let loss_at = |delta: f64| -> Result<f64> {
                    let mut m = model.clone();
                    m.classifiers_mut()[j].angles_mut()[k] += delta;
                    margin_loss(&m.scores_encoded(&state)?, class, config.margin, 1.0)
                };
                let fd = (loss_at(config.step)? - loss_at(-config.step)?) / (2.0 * config.step);
                max_dev = max_dev.max((fd - shift.angles[j][k]).abs());
                compared += 1;
            }
        }
    }
    Ok(GradCheckReport {
        trials: config.trials,
        compared,
        max_abs_deviation: max_dev,
    })
}
