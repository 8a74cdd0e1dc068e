//! Optional TOML file supplying defaults for `train`. Explicit flags win.

use std::path::Path;

use serde::Deserialize;
use vqc_core::VqcError;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainFile {
    pub scheme: Option<String>,
    pub qubits: Option<usize>,
    pub layers: Option<usize>,
    pub bias: Option<bool>,
    pub epochs: Option<usize>,
    pub learning_rate: Option<f64>,
    pub margin: Option<f64>,
    pub batch_size: Option<usize>,
    pub optimizer: Option<String>,
    pub patience: Option<usize>,
    pub min_delta: Option<f64>,
    pub class_weights: Option<Vec<f64>>,
    pub seed: Option<u64>,
}

pub fn load(path: &Path) -> Result<TrainFile, VqcError> {
    let text = std::fs::read_to_string(path).map_err(|source| VqcError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    toml::from_str(&text).map_err(|e| VqcError::Parse {
        path: path.to_path_buf(),
        line: e
            .span()
            .map_or(0, |s| text[..s.start].matches('\n').count() as u64 + 1),
        column: None,
        message: e.message().to_string(),
    })
}
