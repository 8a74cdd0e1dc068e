//! Datasets, feature CSVs, synthetic data, and model / report files.
//!
//! Every random draw here comes from `ChaCha8Rng::seed_from_u64(seed)`;
//! Gaussian noise uses `rand_distr::StandardNormal` on that stream.
//!
//! Files are written to a temporary sibling and renamed into place, so a
//! failed write never leaves a partial file behind.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::encoding::{EncodingConfig, EncodingScheme};
use crate::error::{Result, VqcError};
use crate::label::{Label, LabelMap, N_CLASSES};
use crate::model::{EnsembleModel, Lineage, ModelParams};
use crate::training::EpochRecord;

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub features: Vec<f64>,
    pub label: Label,
}

/// Labeled feature vectors of one fixed width. May be empty (e.g. an unused
/// split part); consumers that need data reject empty sets.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    samples: Vec<Sample>,
    feature_dim: usize,
    pub provenance: String,
}

impl Dataset {
    pub fn new(samples: Vec<Sample>, feature_dim: usize, provenance: impl Into<String>) -> Result<Self> {
        if feature_dim == 0 {
            return Err(VqcError::invalid("feature dimension must be at least 1"));
        }
        for (i, s) in samples.iter().enumerate() {
            if s.features.len() != feature_dim {
                return Err(VqcError::invalid(format!(
                    "sample {i} has {} features, dataset width is {feature_dim}",
                    s.features.len()
                )));
            }
            if s.features.iter().any(|x| !x.is_finite()) {
                return Err(VqcError::invalid(format!("sample {i} has a non-finite feature")));
            }
        }
        Ok(Self {
            samples,
            feature_dim,
            provenance: provenance.into(),
        })
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Sample counts in `Label::ALL` order.
    pub fn class_counts(&self) -> [usize; N_CLASSES] {
        let mut counts = [0; N_CLASSES];
        for s in &self.samples {
            counts[s.label as usize] += 1;
        }
        counts
    }
}

/// Feature rows with optional labels, as read from a CSV with or without
/// the trailing `label` column.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub rows: Vec<Vec<f64>>,
    pub labels: Option<Vec<Label>>,
    pub feature_dim: usize,
}

fn parse_err(path: &Path, line: u64, column: Option<String>, message: impl Into<String>) -> VqcError {
    VqcError::Parse {
        path: path.to_path_buf(),
        line,
        column,
        message: message.into(),
    }
}

/// Reads `f0,...,f{D-1}[,label]`.
pub fn load_feature_table(path: impl AsRef<Path>) -> Result<FeatureTable> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| VqcError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);

    let header = reader
        .headers()
        .map_err(|e| parse_err(path, 1, None, e.to_string()))?
        .clone();
    let mut names: Vec<&str> = header.iter().collect();
    let labeled = names.last().is_some_and(|n| n.eq_ignore_ascii_case("label"));
    if labeled {
        names.pop();
    }
    if names.is_empty() {
        return Err(parse_err(path, 1, None, "header has no feature columns"));
    }
    for (j, name) in names.iter().enumerate() {
        if *name != format!("f{j}") {
            return Err(parse_err(
                path,
                1,
                Some(format!("{}", j + 1)),
                format!("expected header column \"f{j}\", found {name:?}"),
            ));
        }
    }
    let feature_dim = names.len();
    let width = feature_dim + usize::from(labeled);

    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(path, line, None, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != width {
            return Err(parse_err(
                path,
                line,
                None,
                format!("row has {} fields, header has {width}", record.len()),
            ));
        }
        let mut features = Vec::with_capacity(feature_dim);
        for j in 0..feature_dim {
            let raw = &record[j];
            let value: f64 = raw.parse().map_err(|_| {
                parse_err(path, line, Some(format!("f{j}")), format!("not a number: {raw:?}"))
            })?;
            if !value.is_finite() {
                return Err(parse_err(path, line, Some(format!("f{j}")), "feature is not finite"));
            }
            features.push(value);
        }
        if labeled {
            let raw = &record[feature_dim];
            let label = raw.parse::<Label>().map_err(|_| {
                parse_err(path, line, Some("label".into()), format!("unknown label {raw:?}"))
            })?;
            labels.push(label);
        }
        rows.push(features);
    }
    if rows.is_empty() {
        return Err(parse_err(path, 1, None, "file has a header but no data rows"));
    }
    Ok(FeatureTable {
        rows,
        labels: labeled.then_some(labels),
        feature_dim,
    })
}

/// Loads a labeled feature CSV. Labels are case-insensitive; `control` is
/// read as `none`.
pub fn load_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let table = load_feature_table(path)?;
    let Some(labels) = table.labels else {
        return Err(parse_err(path, 1, None, "header has no trailing \"label\" column"));
    };
    let samples = table
        .rows
        .into_iter()
        .zip(labels)
        .map(|(features, label)| Sample { features, label })
        .collect();
    Dataset::new(samples, table.feature_dim, path.display().to_string())
}

pub fn save_csv(path: impl AsRef<Path>, dataset: &Dataset) -> Result<()> {
    write_atomic(path, |out| {
        let header: Vec<String> = (0..dataset.feature_dim())
            .map(|j| format!("f{j}"))
            .chain(std::iter::once("label".to_string()))
            .collect();
        writeln!(out, "{}", header.join(","))?;
        for s in dataset.samples() {
            let mut line = String::new();
            for x in &s.features {
                // shortest representation that parses back to the same bits
                write!(line, "{x:?},").expect("string write");
            }
            line.push_str(s.label.as_str());
            writeln!(out, "{line}")?;
        }
        Ok(())
    })
}

/// Output of [`split`].
#[derive(Debug, Clone)]
pub struct Split {
    pub train: Dataset,
    pub validation: Dataset,
    pub test: Dataset,
    /// Classes too small to appear in every requested part.
    pub warnings: Vec<String>,
}

/// Stratified three-way split.
///
/// Per-class quotas are floored, then the leftover samples are handed out by
/// largest fractional remainder so that the part sizes match the largest-
/// remainder rounding of `fraction · n` over the whole dataset.
pub fn split(dataset: &Dataset, fractions: [f64; 3], seed: u64) -> Result<Split> {
    if fractions.iter().any(|f| !f.is_finite() || *f < 0.0) {
        return Err(VqcError::invalid("split fractions must be non-negative"));
    }
    let total: f64 = fractions.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(VqcError::invalid(format!("split fractions sum to {total}, not 1")));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut by_class: [Vec<usize>; N_CLASSES] = Default::default();
    for (i, s) in dataset.samples().iter().enumerate() {
        by_class[s.label as usize].push(i);
    }
    for members in by_class.iter_mut() {
        members.shuffle(&mut rng);
    }

    let n = dataset.len();
    let targets = largest_remainder(n, &fractions);
    let mut quota = [[0usize; 3]; N_CLASSES];
    let mut remainders = Vec::new();
    for (c, members) in by_class.iter().enumerate() {
        let exact: Vec<f64> = fractions.iter().map(|f| f * members.len() as f64).collect();
        for p in 0..3 {
            quota[c][p] = exact[p].floor() as usize;
            remainders.push((exact[p] - exact[p].floor(), c, p));
        }
    }
    let mut class_left: Vec<usize> = (0..N_CLASSES)
        .map(|c| by_class[c].len() - quota[c].iter().sum::<usize>())
        .collect();
    let mut part_left: Vec<usize> = (0..3)
        .map(|p| targets[p].saturating_sub((0..N_CLASSES).map(|c| quota[c][p]).sum()))
        .collect();
    remainders.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    for &(frac, c, p) in &remainders {
        if frac > 0.0 && class_left[c] > 0 && part_left[p] > 0 {
            quota[c][p] += 1;
            class_left[c] -= 1;
            part_left[p] -= 1;
        }
    }
    // anything still unplaced goes to the first part with room, else the
    // part with the largest fraction
    for c in 0..N_CLASSES {
        while class_left[c] > 0 {
            let p = (0..3).find(|&p| part_left[p] > 0).unwrap_or_else(|| {
                (0..3)
                    .max_by(|&a, &b| fractions[a].total_cmp(&fractions[b]).then(b.cmp(&a)))
                    .expect("three parts")
            });
            quota[c][p] += 1;
            class_left[c] -= 1;
            part_left[p] = part_left[p].saturating_sub(1);
        }
    }

    let mut warnings = Vec::new();
    let wanted_parts = fractions.iter().filter(|f| **f > 0.0).count();
    for (c, members) in by_class.iter().enumerate() {
        if !members.is_empty() && members.len() < wanted_parts {
            warnings.push(format!(
                "class {} has {} samples for {wanted_parts} split parts; stratification is best-effort",
                Label::ALL[c],
                members.len()
            ));
        }
    }

    let mut parts: [Vec<usize>; 3] = Default::default();
    for (c, members) in by_class.iter().enumerate() {
        let mut start = 0;
        for p in 0..3 {
            parts[p].extend_from_slice(&members[start..start + quota[c][p]]);
            start += quota[c][p];
        }
    }
    let names = ["train", "validation", "test"];
    let mut built = parts.into_iter().zip(names).map(|(mut idx, name)| {
        idx.sort_unstable();
        let samples = idx.iter().map(|&i| dataset.samples()[i].clone()).collect();
        Dataset::new(
            samples,
            dataset.feature_dim(),
            format!("{} [{name} split, seed {seed}]", dataset.provenance),
        )
    });
    Ok(Split {
        train: built.next().expect("train")?,
        validation: built.next().expect("validation")?,
        test: built.next().expect("test")?,
        warnings,
    })
}

fn largest_remainder(n: usize, fractions: &[f64; 3]) -> [usize; 3] {
    let exact: Vec<f64> = fractions.iter().map(|f| f * n as f64).collect();
    let mut counts = [0usize; 3];
    for p in 0..3 {
        counts[p] = exact[p].floor() as usize;
    }
    let mut left = n.saturating_sub(counts.iter().sum());
    let mut order: Vec<usize> = (0..3).collect();
    order.sort_by(|&a, &b| {
        (exact[b] - exact[b].floor())
            .total_cmp(&(exact[a] - exact[a].floor()))
            .then(a.cmp(&b))
    });
    for &p in order.iter().cycle() {
        if left == 0 {
            break;
        }
        counts[p] += 1;
        left -= 1;
    }
    counts
}

/// Cluster centers for [`synth_blobs`]: scaled basis vectors spread across the
/// feature axes when `feature_dim >= 4`, otherwise the corners of a square in
/// the first two axes.
pub fn blob_centers(feature_dim: usize, separation: f64) -> Vec<Vec<f64>> {
    (0..N_CLASSES)
        .map(|k| {
            let mut c = vec![0.0; feature_dim];
            if feature_dim >= N_CLASSES {
                c[k * (feature_dim / N_CLASSES)] = separation;
            } else {
                let (x, y) = [(1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0)][k];
                c[0] = x * separation;
                c[1] = y * separation;
            }
            c
        })
        .collect()
}

/// Four unit-variance Gaussian clusters, one per label, in `Label::ALL` order.
pub fn synth_blobs(n_per_class: usize, feature_dim: usize, separation: f64, seed: u64) -> Result<Dataset> {
    if feature_dim < 2 {
        return Err(VqcError::invalid("synthetic blobs need feature_dim >= 2"));
    }
    if !(separation > 0.0 && separation.is_finite()) {
        return Err(VqcError::invalid("blob separation must be positive"));
    }
    if n_per_class == 0 {
        return Err(VqcError::invalid("need at least one sample per class"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers = blob_centers(feature_dim, separation);
    let mut samples = Vec::with_capacity(n_per_class * N_CLASSES);
    for (label, center) in Label::ALL.iter().zip(&centers) {
        for _ in 0..n_per_class {
            let features = center
                .iter()
                .map(|c| c + rng.sample::<f64, _>(StandardNormal))
                .collect();
            samples.push(Sample {
                features,
                label: *label,
            });
        }
    }
    Dataset::new(
        samples,
        feature_dim,
        format!("synth_blobs(n_per_class={n_per_class}, dim={feature_dim}, separation={separation}, seed={seed})"),
    )
}

pub const MODEL_MAGIC: &str = "vqc-model";
pub const MODEL_FORMAT_VERSION: &str = "1";

fn opt_to_str<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map_or_else(|| "-".to_string(), |x| x.to_string())
}

/// Serializes a model as versioned line-oriented text. Floats use Rust's
/// shortest round-trip formatting, so a reload is bit-exact.
pub fn model_to_string(model: &EnsembleModel) -> String {
    let enc = model.encoding();
    let mut s = String::new();
    let _ = writeln!(s, "{MODEL_MAGIC} {MODEL_FORMAT_VERSION}");
    let _ = writeln!(s, "scheme {}", enc.scheme);
    let _ = writeln!(s, "n_qubits {}", enc.n_qubits);
    let _ = writeln!(s, "input_dim {}", enc.input_dim);
    let _ = writeln!(s, "pad_value {:?}", enc.pad_value);
    let _ = writeln!(s, "n_layers {}", model.n_layers());
    let labels: Vec<&str> = model.label_map().labels().iter().map(|l| l.as_str()).collect();
    let _ = writeln!(s, "labels {}", labels.join(" "));
    let _ = writeln!(s, "init_seed {}", opt_to_str(model.lineage.init_seed));
    let _ = writeln!(s, "train_seed {}", opt_to_str(model.lineage.train_seed));
    for (i, c) in model.classifiers().iter().enumerate() {
        let bias = c.bias.map_or_else(|| "-".to_string(), |b| format!("{b:?}"));
        let _ = writeln!(s, "classifier {i} bias {bias}");
        let angles: Vec<String> = c.angles().iter().map(|a| format!("{a:?}")).collect();
        let _ = writeln!(s, "angles {}", angles.join(" "));
    }
    s.push_str("end\n");
    s
}

/// Inverse of [`model_to_string`]. `path` only labels errors.
pub fn model_from_str(text: &str, path: &Path) -> Result<EnsembleModel> {
    let corrupt = |message: String| VqcError::Corrupt {
        path: path.to_path_buf(),
        message,
    };
    let mut lines = text.lines();

    let first = lines.next().ok_or_else(|| corrupt("empty file".into()))?;
    let mut head = first.split_whitespace();
    if head.next() != Some(MODEL_MAGIC) {
        return Err(corrupt(format!("missing {MODEL_MAGIC:?} header")));
    }
    let version = head
        .next()
        .ok_or_else(|| corrupt("header has no format version".into()))?;
    if version != MODEL_FORMAT_VERSION {
        return Err(VqcError::Version {
            path: path.to_path_buf(),
            found: version.to_string(),
            expected: MODEL_FORMAT_VERSION.to_string(),
        });
    }

    let mut field = |key: &str| -> Result<String> {
        let line = lines
            .next()
            .ok_or_else(|| corrupt(format!("file ends before {key:?}")))?;
        match line.split_once(' ') {
            Some((k, v)) if k == key => Ok(v.to_string()),
            _ => Err(corrupt(format!("expected {key:?}, found {line:?}"))),
        }
    };
    fn num<T: std::str::FromStr>(raw: &str, what: &str) -> std::result::Result<T, String> {
        raw.trim().parse().map_err(|_| format!("bad {what} value {raw:?}"))
    }
    fn opt_num<T: std::str::FromStr>(raw: &str, what: &str) -> std::result::Result<Option<T>, String> {
        if raw.trim() == "-" {
            Ok(None)
        } else {
            num(raw, what).map(Some)
        }
    }

    let scheme: EncodingScheme = field("scheme")?.parse().map_err(|e: VqcError| corrupt(e.to_string()))?;
    let n_qubits: usize = num(&field("n_qubits")?, "n_qubits").map_err(corrupt)?;
    let input_dim: usize = num(&field("input_dim")?, "input_dim").map_err(corrupt)?;
    let pad_value: f64 = num(&field("pad_value")?, "pad_value").map_err(corrupt)?;
    let n_layers: usize = num(&field("n_layers")?, "n_layers").map_err(corrupt)?;
    let label_line = field("labels")?;
    let parsed: Vec<Label> = label_line
        .split_whitespace()
        .map(|l| l.parse::<Label>())
        .collect::<Result<_>>()
        .map_err(|e| corrupt(e.to_string()))?;
    let order: [Label; N_CLASSES] = parsed
        .try_into()
        .map_err(|_| corrupt(format!("expected {N_CLASSES} labels, found {label_line:?}")))?;
    let label_map = LabelMap::new(order).map_err(|e| corrupt(e.to_string()))?;
    let init_seed = opt_num(&field("init_seed")?, "init_seed").map_err(corrupt)?;
    let train_seed = opt_num(&field("train_seed")?, "train_seed").map_err(corrupt)?;

    let mut classifiers = Vec::with_capacity(N_CLASSES);
    for i in 0..N_CLASSES {
        let header = field("classifier")?;
        let bias_raw = header
            .strip_prefix(&format!("{i} bias "))
            .ok_or_else(|| corrupt(format!("bad classifier header {header:?}")))?;
        let bias: Option<f64> = opt_num(bias_raw, "bias").map_err(corrupt)?;
        let angles: Vec<f64> = field("angles")?
            .split_whitespace()
            .map(|a| num(a, "angle"))
            .collect::<std::result::Result<_, _>>()
            .map_err(corrupt)?;
        let params = ModelParams::from_angles(n_layers, n_qubits, angles, bias)
            .map_err(|e| corrupt(format!("classifier {i}: {e}")))?;
        classifiers.push(params);
    }
    match lines.next() {
        Some("end") => {}
        other => return Err(corrupt(format!("expected \"end\", found {other:?}"))),
    }

    let encoding = EncodingConfig {
        scheme,
        n_qubits,
        input_dim,
        pad_value,
    };
    let classifiers: [ModelParams; N_CLASSES] = classifiers.try_into().expect("four classifiers");
    let mut model = EnsembleModel::new(classifiers, encoding, n_layers, label_map)
        .map_err(|e| corrupt(e.to_string()))?;
    model.lineage = Lineage {
        init_seed,
        train_seed,
    };
    Ok(model)
}

pub fn save_model(path: impl AsRef<Path>, model: &EnsembleModel) -> Result<()> {
    let text = model_to_string(model);
    write_atomic(path, |out| out.write_all(text.as_bytes()))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<EnsembleModel> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| VqcError::io(path, e))?;
    model_from_str(&text, path)
}

/// One JSON object per line: `epoch, train_loss, train_acc, val_loss, val_acc`.
pub fn write_epoch_log(path: impl AsRef<Path>, epochs: &[EpochRecord]) -> Result<()> {
    write_atomic(path, |out| {
        for record in epochs {
            serde_json::to_writer(&mut *out, record).map_err(std::io::Error::other)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    })
}

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    write_atomic(path, |out| {
        serde_json::to_writer_pretty(&mut *out, value).map_err(std::io::Error::other)?;
        out.write_all(b"\n")
    })
}

/// Writes through a temporary file in the destination directory and renames
/// it over `path` only after `fill` succeeds.
pub fn write_atomic<F>(path: impl AsRef<Path>, fill: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> std::io::Result<()>,
{
    let path = path.as_ref();
    let dir: PathBuf = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let tmp = tempfile::NamedTempFile::new_in(&dir).map_err(|e| VqcError::io(&dir, e))?;
    {
        let mut out = BufWriter::new(tmp.as_file());
        fill(&mut out).map_err(|e| VqcError::io(path, e))?;
        out.flush().map_err(|e| VqcError::io(path, e))?;
    }
    tmp.persist(path).map_err(|e| VqcError::io(path, e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &tempfile::TempDir, name: &str, body: &str) -> PathBuf {
        let p = dir.path().join(name);
        fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn loads_small_csv() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "a.csv", "f0,f1,f2,f3,label\n1,2,3,4,none\n0.5,-1,0,2e-3,both\n");
        let ds = load_csv(&p).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.feature_dim(), 4);
        assert_eq!(ds.samples()[1].label, Label::Both);
        assert_eq!(ds.samples()[1].features[3], 2e-3);
    }

    #[test]
    fn control_alias() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "a.csv", "f0,f1,label\n1,2,Control\n");
        assert_eq!(load_csv(&p).unwrap().samples()[0].label, Label::None);
    }

    #[test]
    fn non_numeric_feature_names_row_and_column() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "a.csv", "f0,f1,label\n1,2,none\n3,abc,both\n");
        let err = load_csv(&p).unwrap_err();
        match &err {
            VqcError::Parse { line, column, .. } => {
                assert_eq!(*line, 3);
                assert_eq!(column.as_deref(), Some("f1"));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(err.to_string().contains("line 3"));
    }

    #[test]
    fn unknown_label_and_bad_width() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "a.csv", "f0,f1,label\n1,2,gangrene\n");
        assert!(matches!(load_csv(&p), Err(VqcError::Parse { column: Some(c), .. }) if c == "label"));
        let p = write(&dir, "b.csv", "f0,f1,label\n1,2,none\n1,none\n");
        assert!(matches!(load_csv(&p), Err(VqcError::Parse { line: 3, .. })));
    }

    #[test]
    fn header_and_empty_file_errors() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "a.csv", "x0,x1,label\n1,2,none\n");
        assert!(load_csv(&p).is_err());
        let p = write(&dir, "b.csv", "f0,f1,label\n");
        assert!(load_csv(&p).is_err());
        let p = write(&dir, "c.csv", "f0,f1\n1,2\n");
        assert!(load_csv(&p).is_err());
        assert_eq!(load_feature_table(&p).unwrap().labels, None);
        assert!(matches!(load_csv(dir.path().join("missing.csv")), Err(VqcError::Io { .. })));
    }

    #[test]
    fn split_everything_to_train() {
        let ds = synth_blobs(5, 4, 1.0, 0).unwrap();
        let s = split(&ds, [1.0, 0.0, 0.0], 3).unwrap();
        assert_eq!(s.train.len(), 20);
        assert!(s.validation.is_empty() && s.test.is_empty());
        assert!(s.warnings.is_empty());
    }

    #[test]
    fn split_80_10_10_balanced() {
        let ds = synth_blobs(25, 4, 1.0, 0).unwrap();
        let s = split(&ds, [0.8, 0.1, 0.1], 11).unwrap();
        assert_eq!((s.train.len(), s.validation.len(), s.test.len()), (80, 10, 10));
        for part in [&s.train, &s.validation, &s.test] {
            let frac = part.len() as f64 / 100.0;
            for &count in &part.class_counts() {
                assert!((count as f64 - frac * 25.0).abs() <= 1.0);
            }
        }
    }

    #[test]
    fn split_is_deterministic_and_warns_on_tiny_classes() {
        let mut samples = synth_blobs(10, 4, 1.0, 0).unwrap().samples().to_vec();
        samples.truncate(32); // class `both` keeps 2 samples
        let ds = Dataset::new(samples, 4, "t").unwrap();
        let a = split(&ds, [0.5, 0.25, 0.25], 5).unwrap();
        let b = split(&ds, [0.5, 0.25, 0.25], 5).unwrap();
        assert_eq!(a.train, b.train);
        assert_eq!(a.test, b.test);
        assert_eq!(a.warnings.len(), 1);
        assert_eq!(a.train.len() + a.validation.len() + a.test.len(), 32);
    }

    #[test]
    fn split_rejects_bad_fractions() {
        let ds = synth_blobs(2, 4, 1.0, 0).unwrap();
        assert!(split(&ds, [0.5, 0.5, 0.5], 0).is_err());
        assert!(split(&ds, [1.5, -0.5, 0.0], 0).is_err());
    }

    #[test]
    fn synth_is_seeded() {
        assert_eq!(synth_blobs(3, 8, 2.0, 4).unwrap(), synth_blobs(3, 8, 2.0, 4).unwrap());
        assert_ne!(synth_blobs(3, 8, 2.0, 4).unwrap(), synth_blobs(3, 8, 2.0, 5).unwrap());
        assert!(synth_blobs(3, 1, 2.0, 4).is_err());
        assert!(synth_blobs(3, 4, 0.0, 4).is_err());
    }

    #[test]
    fn unknown_version_and_truncation() {
        let enc = EncodingConfig::amplitude_for_dim(4).unwrap();
        let model = EnsembleModel::init(enc, 2, LabelMap::default(), true, 1).unwrap();
        let text = model_to_string(&model);
        let p = Path::new("m.vqc");
        assert_eq!(model_from_str(&text, p).unwrap(), model);

        let bumped = text.replacen("vqc-model 1", "vqc-model 7", 1);
        assert!(matches!(model_from_str(&bumped, p), Err(VqcError::Version { .. })));

        for cut in [0, 10, text.len() / 2, text.len() - 4] {
            assert!(matches!(
                model_from_str(&text[..cut], p),
                Err(VqcError::Corrupt { .. })
            ));
        }
    }

    #[test]
    fn atomic_write_leaves_nothing_on_failure() {
        let dir = tempfile::tempdir().unwrap();
        let target = dir.path().join("out.txt");
        let res = write_atomic(&target, |out| {
            out.write_all(b"partial")?;
            Err(std::io::Error::other("boom"))
        });
        assert!(res.is_err());
        assert!(!target.exists());
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
    }
}
