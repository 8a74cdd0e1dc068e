//! The layered rotation + CNOT-ring circuit, its score, and the four-way
//! one-vs-all ensemble.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::encoding::{encode, EncodingConfig};
use crate::error::{Result, VqcError};
use crate::label::{LabelMap, N_CLASSES};
use crate::statevector::{Gate, RotationAngles, StateVector};

pub const DEFAULT_LAYERS: usize = 6;

/// Half-width of the uniform interval initial angles are drawn from.
pub const INIT_ANGLE_RANGE: f64 = 0.1;

/// Qubit whose `⟨Z⟩` is the classifier score.
pub const READOUT_QUBIT: usize = 0;

/// Trainable angles of one classifier circuit, laid out
/// `[layer][qubit][phi, theta, omega]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    n_layers: usize,
    n_qubits: usize,
    angles: Vec<f64>,
    pub bias: Option<f64>,
}

impl ModelParams {
    pub fn zeros(n_layers: usize, n_qubits: usize) -> Self {
        Self {
            n_layers,
            n_qubits,
            angles: vec![0.0; n_layers * n_qubits * 3],
            bias: None,
        }
    }

    pub fn from_angles(
        n_layers: usize,
        n_qubits: usize,
        angles: Vec<f64>,
        bias: Option<f64>,
    ) -> Result<Self> {
        let expected = n_layers * n_qubits * 3;
        if angles.len() != expected {
            return Err(VqcError::invalid(format!(
                "{} angles given, a {n_layers}-layer {n_qubits}-qubit circuit needs {expected}",
                angles.len()
            )));
        }
        if angles.iter().any(|a| !a.is_finite()) || bias.is_some_and(|b| !b.is_finite()) {
            return Err(VqcError::invalid("model parameters must be finite"));
        }
        Ok(Self {
            n_layers,
            n_qubits,
            angles,
            bias,
        })
    }

    /// Angles uniform in `[-INIT_ANGLE_RANGE, INIT_ANGLE_RANGE]`.
    pub fn random<R: Rng + ?Sized>(n_layers: usize, n_qubits: usize, rng: &mut R) -> Self {
        let angles = (0..n_layers * n_qubits * 3)
            .map(|_| rng.random_range(-INIT_ANGLE_RANGE..=INIT_ANGLE_RANGE))
            .collect();
        Self {
            n_layers,
            n_qubits,
            angles,
            bias: None,
        }
    }

    pub fn n_layers(&self) -> usize {
        self.n_layers
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn angles_mut(&mut self) -> &mut [f64] {
        &mut self.angles
    }

    pub fn n_angles(&self) -> usize {
        self.angles.len()
    }

    pub fn rotation(&self, layer: usize, qubit: usize) -> RotationAngles {
        let i = (layer * self.n_qubits + qubit) * 3;
        RotationAngles::new(self.angles[i], self.angles[i + 1], self.angles[i + 2])
    }

    pub fn layer_rotations(&self, layer: usize) -> Vec<RotationAngles> {
        (0..self.n_qubits).map(|q| self.rotation(layer, q)).collect()
    }

    /// Gate sequence of the full variational circuit.
    pub fn circuit(&self) -> Vec<Gate> {
        let mut gates = Vec::with_capacity(self.n_layers * self.n_qubits * 2);
        for layer in 0..self.n_layers {
            push_layer(&mut gates, &self.layer_rotations(layer));
        }
        gates
    }

    fn check_shape(&self, n_layers: usize, n_qubits: usize) -> Result<()> {
        if self.n_layers != n_layers || self.n_qubits != n_qubits {
            return Err(VqcError::invalid(format!(
                "parameters shaped for {} layers x {} qubits, circuit has {n_layers} x {n_qubits}",
                self.n_layers, self.n_qubits
            )));
        }
        Ok(())
    }
}

fn push_layer(gates: &mut Vec<Gate>, rotations: &[RotationAngles]) {
    let n = rotations.len();
    gates.extend(
        rotations
            .iter()
            .enumerate()
            .map(|(qubit, &angles)| Gate::Rot { qubit, angles }),
    );
    if n > 1 {
        gates.extend((0..n).map(|q| Gate::Cnot {
            control: q,
            target: (q + 1) % n,
        }));
    }
}

/// One variational layer: `Rot` on every qubit, then the CNOT ring
/// `CNOT(q, q+1 mod n)` (omitted on a single qubit).
pub fn layer(state: &mut StateVector, layer_angles: &[RotationAngles]) -> Result<()> {
    if layer_angles.len() != state.n_qubits() {
        return Err(VqcError::invalid(format!(
            "{} rotations given for a {}-qubit state",
            layer_angles.len(),
            state.n_qubits()
        )));
    }
    let mut gates = Vec::with_capacity(layer_angles.len() * 2);
    push_layer(&mut gates, layer_angles);
    state.apply_gates(&gates)
}

/// Runs `n_layers` layers on a copy of `encoded` and reads `⟨Z⟩` on
/// qubit 0, plus the bias if the classifier has one.
pub fn score(params: &ModelParams, encoded: &StateVector, n_layers: usize) -> Result<f64> {
    params.check_shape(n_layers, encoded.n_qubits())?;
    let mut state = encoded.clone();
    state.apply_gates(&params.circuit())?;
    let z = state.expectation_z(READOUT_QUBIT)?;
    Ok(z + params.bias.unwrap_or(0.0))
}

/// Which seeds produced a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Lineage {
    pub init_seed: Option<u64>,
    pub train_seed: Option<u64>,
}

/// Four independent one-vs-all classifiers over a shared encoding.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleModel {
    classifiers: [ModelParams; N_CLASSES],
    encoding: EncodingConfig,
    n_layers: usize,
    label_map: LabelMap,
    pub lineage: Lineage,
}

impl EnsembleModel {
    pub fn new(
        classifiers: [ModelParams; N_CLASSES],
        encoding: EncodingConfig,
        n_layers: usize,
        label_map: LabelMap,
    ) -> Result<Self> {
        encoding.validate()?;
        if n_layers == 0 {
            return Err(VqcError::invalid("a model needs at least one layer"));
        }
        for (i, c) in classifiers.iter().enumerate() {
            c.check_shape(n_layers, encoding.n_qubits)
                .map_err(|e| VqcError::invalid(format!("classifier {i}: {e}")))?;
        }
        Ok(Self {
            classifiers,
            encoding,
            n_layers,
            label_map,
            lineage: Lineage::default(),
        })
    }

    /// Seeded small-angle initialization; classifiers are filled in slot order
    /// from a single ChaCha8 stream.
    pub fn init(
        encoding: EncodingConfig,
        n_layers: usize,
        label_map: LabelMap,
        with_bias: bool,
        seed: u64,
    ) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let classifiers = std::array::from_fn(|_| {
            let mut p = ModelParams::random(n_layers, encoding.n_qubits, &mut rng);
            if with_bias {
                p.bias = Some(0.0);
            }
            p
        });
        let mut model = Self::new(classifiers, encoding, n_layers, label_map)?;
        model.lineage.init_seed = Some(seed);
        Ok(model)
    }

    pub fn classifiers(&self) -> &[ModelParams; N_CLASSES] {
        &self.classifiers
    }

    pub fn classifiers_mut(&mut self) -> &mut [ModelParams; N_CLASSES] {
        &mut self.classifiers
    }

    pub fn encoding(&self) -> &EncodingConfig {
        &self.encoding
    }

    pub fn n_layers(&self) -> usize {
        self.n_layers
    }

    pub fn label_map(&self) -> &LabelMap {
        &self.label_map
    }

    pub fn feature_dim(&self) -> usize {
        self.encoding.input_dim
    }

    pub fn encode(&self, features: &[f64]) -> Result<StateVector> {
        encode(features, &self.encoding)
    }

    pub fn scores_encoded(&self, encoded: &StateVector) -> Result<[f64; N_CLASSES]> {
        let mut out = [0.0; N_CLASSES];
        for (slot, params) in out.iter_mut().zip(&self.classifiers) {
            *slot = score(params, encoded, self.n_layers)?;
        }
        Ok(out)
    }

    /// Scores in label-map order.
    pub fn score_all(&self, features: &[f64]) -> Result<[f64; N_CLASSES]> {
        self.scores_encoded(&self.encode(features)?)
    }

    pub fn predict(&self, features: &[f64]) -> Result<usize> {
        Ok(argmax(&self.score_all(features)?))
    }
}

/// Index of the largest score; ties go to the lowest index.
pub fn argmax(scores: &[f64; N_CLASSES]) -> usize {
    let mut best = 0;
    for i in 1..N_CLASSES {
        if scores[i] > scores[best] {
            best = i;
        }
    }
    best
}
