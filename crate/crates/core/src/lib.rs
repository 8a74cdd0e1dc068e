//! One-vs-all variational quantum classifier on a dense statevector simulator.
//!
//! Each of four classes gets its own layered circuit of `Rot` gates and CNOT
//! rings. A sample is amplitude-encoded (by default) into a register, each
//! circuit's qubit-0 `⟨Z⟩` is that class's score, and the prediction is the
//! argmax. Training minimizes a multi-class margin loss with exact
//! parameter-shift gradients.

pub mod dataio;
pub mod encoding;
pub mod error;
pub mod gradcheck;
pub mod label;
pub mod metrics;
pub mod model;
pub mod oracle;
pub mod statevector;
pub mod training;

pub use dataio::{Dataset, Sample};
pub use encoding::{encode, EncodingConfig, EncodingScheme};
pub use error::{Result, VqcError};
pub use label::{Label, LabelMap, N_CLASSES};
pub use metrics::{auc_ovr, evaluate, f1_per_class, EvalReport};
pub use model::{argmax, layer, score, EnsembleModel, ModelParams};
pub use statevector::{Gate, RotationAngles, StateVector};
pub use training::{margin_loss, parameter_shift_grad, train, EarlyStopping, Optimizer, TrainConfig, TrainReport};
