//! Per-class one-vs-rest AUC and F1, their macro averages, and the
//! confusion matrix.

use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::dataio::Dataset;
use crate::error::{Result, VqcError};
use crate::label::{LabelMap, N_CLASSES};
use crate::model::{argmax, EnsembleModel};

/// Rank-based ROC AUC: the probability that a random positive outscores a
/// random negative, with ties worth one half.
///
/// Computed from midranks with integer arithmetic on doubled ranks, so the
/// result equals exhaustive pair counting exactly.
pub fn auc_ovr(scores: &[f64], labels: &[bool]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(VqcError::invalid(format!(
            "{} scores but {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(VqcError::invalid("scores contain NaN"));
    }
    let n_pos = labels.iter().filter(|&&l| l).count() as u64;
    let n_neg = labels.len() as u64 - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(VqcError::UndefinedMetric(
            "AUC needs at least one positive and one negative sample".into(),
        ));
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // ranks are 1-based; a tie group over sorted positions [start, end)
    // shares the midrank (start + 1 + end) / 2, stored doubled
    let mut doubled_rank_sum: u64 = 0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        let doubled_mid = (start + 1 + end) as u64;
        let positives = order[start..end].iter().filter(|&&i| labels[i]).count() as u64;
        doubled_rank_sum += doubled_mid * positives;
        start = end;
    }
    let doubled_u = doubled_rank_sum - n_pos * (n_pos + 1);
    Ok(doubled_u as f64 / (2 * n_pos * n_neg) as f64)
}

/// One-vs-rest confusion counts for `class`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClassCounts {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
}

impl ClassCounts {
    pub fn f1(&self) -> f64 {
        let denom = 2 * self.tp + self.fp + self.fn_;
        if denom == 0 {
            0.0
        } else {
            (2 * self.tp) as f64 / denom as f64
        }
    }

    /// Neither predicted nor present: F1 is 0 by convention.
    pub fn is_degenerate(&self) -> bool {
        self.tp + self.fp + self.fn_ == 0
    }
}

pub fn class_counts(predictions: &[usize], truths: &[usize], class: usize) -> Result<ClassCounts> {
    if predictions.len() != truths.len() {
        return Err(VqcError::invalid(format!(
            "{} predictions but {} truths",
            predictions.len(),
            truths.len()
        )));
    }
    if predictions.is_empty() {
        return Err(VqcError::invalid("F1 needs at least one sample"));
    }
    let mut c = ClassCounts { tp: 0, fp: 0, fn_: 0 };
    for (&p, &t) in predictions.iter().zip(truths) {
        match (p == class, t == class) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, true) => c.fn_ += 1,
            (false, false) => {}
        }
    }
    Ok(c)
}

/// `2·precision·recall / (precision + recall)` for `class` against the rest,
/// written as `2TP / (2TP + FP + FN)`. Returns 0 when the class is neither
/// predicted nor present.
pub fn f1_per_class(predictions: &[usize], truths: &[usize], class: usize) -> Result<f64> {
    Ok(class_counts(predictions, truths, class)?.f1())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub labels: Vec<String>,
    pub n_samples: usize,
    /// `None` where a class has no positives or no negatives.
    pub per_class_auc: [Option<f64>; N_CLASSES],
    pub per_class_f1: [f64; N_CLASSES],
    /// Classes whose F1 fell back to 0 because TP + FP + FN = 0.
    pub f1_degenerate: [bool; N_CLASSES],
    /// Mean over the classes with a defined AUC.
    pub macro_auc: Option<f64>,
    pub auc_excluded: usize,
    pub macro_f1: f64,
    /// Rows are true classes, columns predictions, both in label-map order.
    pub confusion: [[u64; N_CLASSES]; N_CLASSES],
}

/// Builds the report from per-sample scores (label-map order) and true class
/// indices.
pub fn evaluate_scores(scores: &[[f64; N_CLASSES]], truths: &[usize], label_map: &LabelMap) -> Result<EvalReport> {
    if scores.is_empty() {
        return Err(VqcError::invalid("cannot evaluate an empty dataset"));
    }
    if scores.len() != truths.len() {
        return Err(VqcError::invalid("scores and truths differ in length"));
    }
    if let Some(t) = truths.iter().find(|&&t| t >= N_CLASSES) {
        return Err(VqcError::invalid(format!("class index {t} out of range")));
    }
    let predictions: Vec<usize> = scores.iter().map(argmax).collect();

    let mut per_class_auc = [None; N_CLASSES];
    let mut per_class_f1 = [0.0; N_CLASSES];
    let mut f1_degenerate = [false; N_CLASSES];
    for class in 0..N_CLASSES {
        let column: Vec<f64> = scores.iter().map(|s| s[class]).collect();
        let positives: Vec<bool> = truths.iter().map(|&t| t == class).collect();
        per_class_auc[class] = match auc_ovr(&column, &positives) {
            Ok(a) => Some(a),
            Err(VqcError::UndefinedMetric(_)) => None,
            Err(e) => return Err(e),
        };
        let counts = class_counts(&predictions, truths, class)?;
        per_class_f1[class] = counts.f1();
        f1_degenerate[class] = counts.is_degenerate();
    }

    let defined: Vec<f64> = per_class_auc.iter().flatten().copied().collect();
    let macro_auc = (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64);
    let macro_f1 = per_class_f1.iter().sum::<f64>() / N_CLASSES as f64;

    let mut confusion = [[0u64; N_CLASSES]; N_CLASSES];
    for (&t, &p) in truths.iter().zip(&predictions) {
        confusion[t][p] += 1;
    }

    Ok(EvalReport {
        labels: label_map.labels().iter().map(|l| l.to_string()).collect(),
        n_samples: scores.len(),
        per_class_auc,
        per_class_f1,
        f1_degenerate,
        macro_auc,
        auc_excluded: N_CLASSES - defined.len(),
        macro_f1,
        confusion,
    })
}

/// Scores every sample and reports AUC from each classifier's raw score
/// against its one-vs-rest labels, F1 from argmax predictions.
pub fn evaluate(model: &EnsembleModel, dataset: &Dataset) -> Result<EvalReport> {
    if dataset.is_empty() {
        return Err(VqcError::invalid("cannot evaluate an empty dataset"));
    }
    if dataset.feature_dim() != model.feature_dim() {
        return Err(VqcError::invalid(format!(
            "dataset has {} features, model expects {}",
            dataset.feature_dim(),
            model.feature_dim()
        )));
    }
    let scores = dataset
        .samples()
        .par_iter()
        .map(|s| model.score_all(&s.features))
        .collect::<Result<Vec<_>>>()?;
    let truths: Vec<usize> = dataset
        .samples()
        .iter()
        .map(|s| model.label_map().index_of(s.label))
        .collect();
    evaluate_scores(&scores, &truths, model.label_map())
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<12}{:>10}{:>10}", "class", "AUC", "F1")?;
        for (i, name) in self.labels.iter().enumerate() {
            let auc = self.per_class_auc[i].map_or_else(|| "n/a".to_string(), |a| format!("{a:.4}"));
            let flag = if self.f1_degenerate[i] { " *" } else { "" };
            writeln!(f, "{name:<12}{auc:>10}{:>10.4}{flag}", self.per_class_f1[i])?;
        }
        let macro_auc = self.macro_auc.map_or_else(|| "n/a".to_string(), |a| format!("{a:.4}"));
        writeln!(f, "{:<12}{macro_auc:>10}{:>10.4}", "macro", self.macro_f1)?;
        if self.auc_excluded > 0 {
            writeln!(f, "({} class(es) without a defined AUC excluded from the macro mean)", self.auc_excluded)?;
        }
        if self.f1_degenerate.iter().any(|&d| d) {
            writeln!(f, "(* class neither present nor predicted; F1 reported as 0)")?;
        }
        writeln!(f)?;
        writeln!(f, "confusion matrix (rows = truth, columns = prediction), n = {}", self.n_samples)?;
        write!(f, "{:<12}", "")?;
        for name in &self.labels {
            write!(f, "{name:>11}")?;
        }
        writeln!(f)?;
        for (i, row) in self.confusion.iter().enumerate() {
            write!(f, "{:<12}", self.labels[i])?;
            for v in row {
                write!(f, "{v:>11}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn auc_examples() {
        let l = [true, true, false, false];
        assert_eq!(auc_ovr(&[0.9, 0.8, 0.3, 0.1], &l).unwrap(), 1.0);
        assert_eq!(auc_ovr(&[0.9, 0.2, 0.6, 0.1], &l).unwrap(), 0.75);
        assert_eq!(auc_ovr(&[0.4; 4], &l).unwrap(), 0.5);
    }

    #[test]
    fn auc_single_class_is_undefined() {
        assert!(matches!(
            auc_ovr(&[0.1, 0.2], &[true, true]),
            Err(VqcError::UndefinedMetric(_))
        ));
        assert!(auc_ovr(&[0.1], &[true, false]).is_err());
        assert!(auc_ovr(&[f64::NAN, 0.0], &[true, false]).is_err());
    }

    #[test]
    fn f1_examples() {
        let t = [0, 1, 2, 3, 0];
        assert_eq!(f1_per_class(&t, &t, 0).unwrap(), 1.0);
        // class 0: TP at 0, FP at 1, FN at 2
        let p = [0, 0, 1];
        let t = [0, 1, 0];
        assert_eq!(f1_per_class(&p, &t, 0).unwrap(), 0.5);
        assert_eq!(f1_per_class(&[1, 1], &[1, 2], 3).unwrap(), 0.0);
        assert!(class_counts(&[1, 1], &[1, 2], 3).unwrap().is_degenerate());
        assert!(f1_per_class(&[1], &[1, 2], 1).is_err());
    }

    #[test]
    fn report_on_perfect_scores() {
        let truths = [0, 1, 2, 3, 0, 1, 2, 3];
        let scores: Vec<[f64; 4]> = truths
            .iter()
            .map(|&t| {
                let mut s = [-0.5; 4];
                s[t] = 0.9;
                s
            })
            .collect();
        let r = evaluate_scores(&scores, &truths, &LabelMap::default()).unwrap();
        assert_eq!(r.per_class_auc, [Some(1.0); 4]);
        assert_eq!(r.per_class_f1, [1.0; 4]);
        assert_eq!(r.macro_auc, Some(1.0));
        assert_eq!(r.macro_f1, 1.0);
        assert_eq!(r.confusion.iter().flatten().sum::<u64>(), 8);
        let table = r.to_string();
        assert!(table.contains("macro"));
        assert!(table.contains("ischaemia"));
    }

    #[test]
    fn absent_class_is_excluded_from_macro_auc() {
        let truths = [0, 1, 0, 1];
        let scores = vec![[0.9, 0.1, 0.0, 0.0], [0.1, 0.9, 0.0, 0.0], [0.8, 0.2, 0.0, 0.0], [0.3, 0.7, 0.0, 0.0]];
        let r = evaluate_scores(&scores, &truths, &LabelMap::default()).unwrap();
        assert_eq!(r.auc_excluded, 2);
        assert_eq!(r.per_class_auc[2], None);
        assert_eq!(r.macro_auc, Some(1.0));
        assert_eq!(r.f1_degenerate, [false, false, true, true]);
        let json = serde_json::to_value(&r).unwrap();
        assert!(json["per_class_auc"][2].is_null());
    }
}
