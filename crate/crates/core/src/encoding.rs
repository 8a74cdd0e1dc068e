//! Loading classical feature vectors into an initial quantum state.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Result, VqcError};
use crate::statevector::{StateVector, MAX_QUBITS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EncodingScheme {
    /// Features (padded, L2-normalized) become real amplitudes.
    Amplitude,
    /// Feature `j` becomes `RY(x_j)` on qubit `j`, starting from `|0…0⟩`.
    Angle,
}

impl fmt::Display for EncodingScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EncodingScheme::Amplitude => "amplitude",
            EncodingScheme::Angle => "angle",
        })
    }
}

impl FromStr for EncodingScheme {
    type Err = VqcError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "amplitude" => Ok(EncodingScheme::Amplitude),
            "angle" => Ok(EncodingScheme::Angle),
            other => Err(VqcError::invalid(format!("unknown encoding scheme {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EncodingConfig {
    pub scheme: EncodingScheme,
    pub n_qubits: usize,
    pub input_dim: usize,
    /// Fill value for amplitude slots beyond `input_dim`.
    pub pad_value: f64,
}

impl Default for EncodingConfig {
    /// 128 features on 7 qubits, no padding.
    fn default() -> Self {
        Self {
            scheme: EncodingScheme::Amplitude,
            n_qubits: 7,
            input_dim: 128,
            pad_value: 0.0,
        }
    }
}

impl EncodingConfig {
    pub fn new(scheme: EncodingScheme, n_qubits: usize, input_dim: usize) -> Result<Self> {
        let config = Self {
            scheme,
            n_qubits,
            input_dim,
            pad_value: 0.0,
        };
        config.validate()?;
        Ok(config)
    }

    /// Amplitude encoding on the fewest qubits that hold `input_dim` values.
    pub fn amplitude_for_dim(input_dim: usize) -> Result<Self> {
        let n_qubits = input_dim.max(2).next_power_of_two().trailing_zeros() as usize;
        Self::new(EncodingScheme::Amplitude, n_qubits, input_dim)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_qubits == 0 || self.n_qubits > MAX_QUBITS {
            return Err(VqcError::UnsupportedSize(format!(
                "{} qubits requested; supported range is 1..={MAX_QUBITS}",
                self.n_qubits
            )));
        }
        if self.input_dim == 0 {
            return Err(VqcError::invalid("input dimension must be at least 1"));
        }
        if !self.pad_value.is_finite() {
            return Err(VqcError::invalid("pad value must be finite"));
        }
        let capacity = match self.scheme {
            EncodingScheme::Amplitude => 1usize << self.n_qubits,
            EncodingScheme::Angle => self.n_qubits,
        };
        if self.input_dim > capacity {
            return Err(VqcError::invalid(format!(
                "{} encoding on {} qubits holds at most {capacity} features, got input_dim {}",
                self.scheme, self.n_qubits, self.input_dim
            )));
        }
        Ok(())
    }
}

/// Prepares the initial state for `features`.
pub fn encode(features: &[f64], config: &EncodingConfig) -> Result<StateVector> {
    config.validate()?;
    if features.len() != config.input_dim {
        return Err(VqcError::invalid(format!(
            "feature vector has length {}, encoding expects {}",
            features.len(),
            config.input_dim
        )));
    }
    if let Some(j) = features.iter().position(|x| !x.is_finite()) {
        return Err(VqcError::invalid(format!("feature {j} is not finite")));
    }

    match config.scheme {
        EncodingScheme::Amplitude => {
            let dim = 1usize << config.n_qubits;
            let padded: Vec<f64> = features
                .iter()
                .copied()
                .chain(std::iter::repeat(config.pad_value))
                .take(dim)
                .collect();
            let norm = padded.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm == 0.0 {
                return Err(VqcError::DegenerateInput(
                    "all-zero feature vector cannot be amplitude encoded".into(),
                ));
            }
            if !norm.is_finite() {
                return Err(VqcError::DegenerateInput(
                    "feature vector norm overflows".into(),
                ));
            }
            let amps = padded
                .into_iter()
                .map(|x| Complex64::new(x / norm, 0.0))
                .collect();
            StateVector::from_amplitudes(amps)
        }
        EncodingScheme::Angle => {
            let mut state = StateVector::zero(config.n_qubits)?;
            for (qubit, &x) in features.iter().enumerate() {
                state.apply_ry(qubit, x)?;
            }
            Ok(state)
        }
    }
}
