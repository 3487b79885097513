//! Per-label and collective classification metrics.
//!
//! Positive-class precision/recall/F1 follow their textbook definitions.
//! Alongside them every label also gets support-weighted averages over both
//! classes, which is the convention most toolkits print by default.
//! Degenerate denominators yield 0 and add a warning to the report.

use std::fmt;

use crate::corpus::LabelRow;
use crate::error::{Error, Result};
use crate::labels::{Label, NUM_LABELS};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fn_: u64,
    pub fp: u64,
    pub tn: u64,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.tp + self.fn_ + self.fp + self.tn
    }

    pub fn positives(&self) -> u64 {
        self.tp + self.fn_
    }

    pub fn negatives(&self) -> u64 {
        self.fp + self.tn
    }

    /// The same matrix with the roles of the two classes swapped.
    pub fn flipped(&self) -> Self {
        ConfusionMatrix {
            tp: self.tn,
            fn_: self.fp,
            fp: self.fn_,
            tn: self.tp,
        }
    }
}

pub fn confusion_matrix(pred: &[bool], truth: &[bool]) -> Result<ConfusionMatrix> {
    if pred.len() != truth.len() {
        return Err(Error::invalid(format!(
            "{} predictions but {} truth values",
            pred.len(),
            truth.len()
        )));
    }
    if pred.is_empty() {
        return Err(Error::invalid("confusion matrix of zero samples"));
    }
    let mut cm = ConfusionMatrix::default();
    for (&p, &t) in pred.iter().zip(truth) {
        match (t, p) {
            (true, true) => cm.tp += 1,
            (true, false) => cm.fn_ += 1,
            (false, true) => cm.fp += 1,
            (false, false) => cm.tn += 1,
        }
    }
    Ok(cm)
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// `tp / (tp + fp)`, 0 when nothing was predicted positive.
pub fn precision(cm: &ConfusionMatrix) -> f64 {
    ratio(cm.tp, cm.tp + cm.fp)
}

/// `tp / (tp + fn)`, 0 when there are no positives.
pub fn recall(cm: &ConfusionMatrix) -> f64 {
    ratio(cm.tp, cm.tp + cm.fn_)
}

/// Harmonic mean; 0 when both inputs are 0.
pub fn f1(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

pub fn accuracy(cm: &ConfusionMatrix) -> Result<f64> {
    if cm.total() == 0 {
        return Err(Error::invalid("accuracy of an empty confusion matrix"));
    }
    Ok(ratio(cm.tp + cm.tn, cm.total()))
}

/// Precision, recall and F1 averaged over both classes, weighted by each
/// class's support in the ground truth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

pub fn weighted_scores(cm: &ConfusionMatrix) -> WeightedScores {
    let neg = cm.flipped();
    let (w1, w0) = (cm.positives() as f64, cm.negatives() as f64);
    let total = w1 + w0;
    if total == 0.0 {
        return WeightedScores { precision: 0.0, recall: 0.0, f1: 0.0 };
    }
    let avg = |pos: f64, negv: f64| (w1 * pos + w0 * negv) / total;
    let (p1, r1, p0, r0) = (precision(cm), recall(cm), precision(&neg), recall(&neg));
    WeightedScores {
        precision: avg(p1, p0),
        recall: avg(r1, r0),
        f1: avg(f1(p1, r1), f1(p0, r0)),
    }
}

/// `(fpr, tpr)` points from `(0, 0)` to `(1, 1)` with non-decreasing fpr.
#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    pub points: Vec<(f64, f64)>,
}

impl RocCurve {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("fpr,tpr\n");
        for (fpr, tpr) in &self.points {
            out.push_str(&format!("{fpr:.6},{tpr:.6}\n"));
        }
        out
    }
}

/// Three-point curve through the single operating point of a hard
/// classifier.
pub fn roc_from_hard_predictions(pred: &[bool], truth: &[bool]) -> Result<RocCurve> {
    roc_from_confusion(&confusion_matrix(pred, truth)?)
}

pub fn roc_from_confusion(cm: &ConfusionMatrix) -> Result<RocCurve> {
    if cm.positives() == 0 || cm.negatives() == 0 {
        return Err(Error::UndefinedRate(
            "ROC needs both classes in the ground truth".into(),
        ));
    }
    let tpr = ratio(cm.tp, cm.positives());
    let fpr = ratio(cm.fp, cm.negatives());
    Ok(RocCurve {
        points: vec![(0.0, 0.0), (fpr, tpr), (1.0, 1.0)],
    })
}

/// Score-based ROC: one point per distinct score threshold, highest score
/// first. Not used by the hard-prediction report; provided for comparison
/// with decision-value rankings.
pub fn roc_from_scores(scores: &[f64], truth: &[bool]) -> Result<RocCurve> {
    if scores.len() != truth.len() {
        return Err(Error::invalid("scores and truth differ in length"));
    }
    let pos = truth.iter().filter(|&&t| t).count() as u64;
    let neg = truth.len() as u64 - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::UndefinedRate(
            "ROC needs both classes in the ground truth".into(),
        ));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0u64, 0u64);
    for (k, &i) in order.iter().enumerate() {
        if truth[i] {
            tp += 1;
        } else {
            fp += 1;
        }
        let last_of_tie = order.get(k + 1).is_none_or(|&j| scores[j] != scores[i]);
        if last_of_tie {
            points.push((ratio(fp, neg), ratio(tp, pos)));
        }
    }
    Ok(RocCurve { points })
}

/// Trapezoidal area under the polyline.
pub fn auc(curve: &RocCurve) -> f64 {
    curve
        .points
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0)
        .sum()
}

fn mean_of_six(values: &[f64], what: &str) -> Result<f64> {
    if values.len() != NUM_LABELS {
        return Err(Error::invalid(format!(
            "{what} needs exactly {NUM_LABELS} values, got {}",
            values.len()
        )));
    }
    Ok(values.iter().sum::<f64>() / NUM_LABELS as f64)
}

pub fn mean_validation_accuracy(per_label: &[f64]) -> Result<f64> {
    mean_of_six(per_label, "mean validation accuracy")
}

pub fn macro_f1(per_label: &[f64]) -> Result<f64> {
    mean_of_six(per_label, "macro F1")
}

pub fn macro_auc(per_label: &[f64]) -> Result<f64> {
    mean_of_six(per_label, "macro AUC")
}

/// Fraction of rows whose six flags all match.
pub fn absolute_validation_accuracy(pred: &[LabelRow], truth: &[LabelRow]) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::invalid(format!(
            "{} prediction rows but {} truth rows",
            pred.len(),
            truth.len()
        )));
    }
    if pred.is_empty() {
        return Err(Error::invalid("absolute accuracy of zero rows"));
    }
    let exact = pred.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(exact as f64 / pred.len() as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabelMetrics {
    pub label: Label,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub weighted: WeightedScores,
    /// Hard-prediction AUC; `None` when the truth column has one class.
    pub auc: Option<f64>,
    pub roc: Option<RocCurve>,
    pub confusion: ConfusionMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CollectiveMetrics {
    pub mean_validation_accuracy: f64,
    pub absolute_validation_accuracy: f64,
    pub macro_f1: f64,
    pub macro_weighted_f1: f64,
    /// `None` when any label's AUC is undefined.
    pub macro_auc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub per_label: Vec<LabelMetrics>,
    pub collective: CollectiveMetrics,
    pub warnings: Vec<String>,
}

impl MetricsReport {
    pub fn compute(pred: &[LabelRow], truth: &[LabelRow]) -> Result<Self> {
        let absolute = absolute_validation_accuracy(pred, truth)?;
        let mut per_label = Vec::with_capacity(NUM_LABELS);
        let mut warnings = Vec::new();
        for label in Label::ALL {
            let p: Vec<bool> = pred.iter().map(|r| r.get(label)).collect();
            let t: Vec<bool> = truth.iter().map(|r| r.get(label)).collect();
            let cm = confusion_matrix(&p, &t)?;
            if cm.tp + cm.fp == 0 {
                warnings.push(format!("{label}: no positive predictions, precision set to 0"));
            }
            if cm.positives() == 0 {
                warnings.push(format!("{label}: no positive ground truth, recall set to 0"));
            }
            let roc = roc_from_confusion(&cm).ok();
            if roc.is_none() {
                warnings.push(format!("{label}: single-class ground truth, AUC undefined"));
            }
            let (pr, rc) = (precision(&cm), recall(&cm));
            per_label.push(LabelMetrics {
                label,
                accuracy: accuracy(&cm)?,
                precision: pr,
                recall: rc,
                f1: f1(pr, rc),
                weighted: weighted_scores(&cm),
                auc: roc.as_ref().map(auc),
                roc,
                confusion: cm,
            });
        }
        let col = |f: fn(&LabelMetrics) -> f64| per_label.iter().map(f).collect::<Vec<_>>();
        let aucs: Option<Vec<f64>> = per_label.iter().map(|m| m.auc).collect();
        let collective = CollectiveMetrics {
            mean_validation_accuracy: mean_validation_accuracy(&col(|m| m.accuracy))?,
            absolute_validation_accuracy: absolute,
            macro_f1: macro_f1(&col(|m| m.f1))?,
            macro_weighted_f1: macro_f1(&col(|m| m.weighted.f1))?,
            macro_auc: aucs.map(|a| macro_auc(&a)).transpose()?,
        };
        Ok(MetricsReport {
            per_label,
            collective,
            warnings,
        })
    }

    pub fn label(&self, label: Label) -> &LabelMetrics {
        &self.per_label[label.index()]
    }

    /// One row per label plus a final `collective` row. In the collective
    /// row `accuracy` holds the mean validation accuracy and `f1`,
    /// `weighted_f1` and `auc` hold the macro averages.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "label,accuracy,precision,recall,f1,weighted_precision,weighted_recall,weighted_f1,auc,tp,fn,fp,tn,absolute_accuracy\n",
        );
        let opt = |v: Option<f64>| v.map(|v| format!("{v:.6}")).unwrap_or_default();
        for m in &self.per_label {
            let cm = &m.confusion;
            out.push_str(&format!(
                "{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{},{},{},{},{},\n",
                m.label,
                m.accuracy,
                m.precision,
                m.recall,
                m.f1,
                m.weighted.precision,
                m.weighted.recall,
                m.weighted.f1,
                opt(m.auc),
                cm.tp,
                cm.fn_,
                cm.fp,
                cm.tn
            ));
        }
        let c = &self.collective;
        out.push_str(&format!(
            "collective,{:.6},,,{:.6},,,{:.6},{},,,,,{:.6}\n",
            c.mean_validation_accuracy,
            c.macro_f1,
            c.macro_weighted_f1,
            opt(c.macro_auc),
            c.absolute_validation_accuracy
        ));
        out
    }
}

impl fmt::Display for MetricsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pct = |v: f64| format!("{:.2}%", v * 100.0);
        let opt = |v: Option<f64>| v.map_or_else(|| "undefined".to_string(), |v| format!("{v:.4}"));
        for m in &self.per_label {
            let cm = &m.confusion;
            writeln!(f, "[{}]", m.label)?;
            writeln!(f, "  validation accuracy  {}", pct(m.accuracy))?;
            writeln!(
                f,
                "  positive class       precision {:.4}  recall {:.4}  f1 {:.4}",
                m.precision, m.recall, m.f1
            )?;
            writeln!(
                f,
                "  weighted             precision {:.4}  recall {:.4}  f1 {:.4}",
                m.weighted.precision, m.weighted.recall, m.weighted.f1
            )?;
            writeln!(f, "  auc (hard)           {}", opt(m.auc))?;
            writeln!(
                f,
                "  confusion            tp {}  fn {}  fp {}  tn {}",
                cm.tp, cm.fn_, cm.fp, cm.tn
            )?;
        }
        let c = &self.collective;
        writeln!(f, "[collective]")?;
        writeln!(f, "  mean validation accuracy      {}", pct(c.mean_validation_accuracy))?;
        writeln!(f, "  absolute validation accuracy  {}", pct(c.absolute_validation_accuracy))?;
        writeln!(f, "  macro f1 (positive class)     {:.4}", c.macro_f1)?;
        writeln!(f, "  macro f1 (weighted)           {:.4}", c.macro_weighted_f1)?;
        writeln!(f, "  macro auc (hard)              {}", opt(c.macro_auc))?;
        for w in &self.warnings {
            writeln!(f, "warning: {w}")?;
        }
        Ok(())
    }
}
