//! Independent oracles and synthetic data shared by the integration tests.
//! Nothing here calls into the code paths it is used to check.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use toxgate_core::{CommentRecord, Corpus, LabelRow};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------- metrics

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NaiveMetrics {
    pub tp: u64,
    pub fn_: u64,
    pub fp: u64,
    pub tn: u64,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub auc: Option<f64>,
}

/// Recounts every metric from scratch with separate passes per cell.
pub fn naive_metrics(pred: &[bool], truth: &[bool]) -> NaiveMetrics {
    let count = |p: bool, t: bool| {
        pred.iter()
            .zip(truth)
            .filter(|(&a, &b)| a == p && b == t)
            .count() as u64
    };
    let (tp, fn_, fp, tn) = (count(true, true), count(false, true), count(true, false), count(false, false));
    let div = |a: u64, b: u64| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let precision = div(tp, tp + fp);
    let recall = div(tp, tp + fn_);
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    let auc = if tp + fn_ == 0 || fp + tn == 0 {
        None
    } else {
        let (fpr, tpr) = (div(fp, fp + tn), div(tp, tp + fn_));
        // Two trapezoids: (0,0)-(fpr,tpr) and (fpr,tpr)-(1,1).
        Some((fpr - 0.0) * (0.0 + tpr) / 2.0 + (1.0 - fpr) * (tpr + 1.0) / 2.0)
    };
    NaiveMetrics {
        tp,
        fn_,
        fp,
        tn,
        accuracy: div(tp + tn, tp + fn_ + fp + tn),
        precision,
        recall,
        f1,
        auc,
    }
}

// ----------------------------------------------------------------- tf-idf

/// Dense tf-idf matrix by direct double loop over (document, word).
/// `words` fixes the column order.
pub fn dense_tfidf(docs: &[Vec<String>], words: &[String]) -> Vec<Vec<f64>> {
    let n_docs = docs.len() as f64;
    docs.iter()
        .map(|doc| {
            words
                .iter()
                .map(|w| {
                    if doc.is_empty() {
                        return 0.0;
                    }
                    let count = doc.iter().filter(|t| *t == w).count() as f64;
                    let containing = docs.iter().filter(|d| d.contains(w)).count() as f64;
                    (count / doc.len() as f64) * (n_docs / containing).ln()
                })
                .collect()
        })
        .collect()
}

// -------------------------------------------------------------------- svm

pub const GRID_LO: f64 = -5.0;
pub const GRID_HI: f64 = 5.0;
pub const GRID_STEP: f64 = 0.01;

pub fn svm_objective_1d(theta: f64, bias: f64, xs: &[f64], ys: &[bool], c: f64) -> f64 {
    let hinge: f64 = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| {
            let z = theta * x + bias;
            if y {
                (1.0 - z).max(0.0)
            } else {
                (1.0 + z).max(0.0)
            }
        })
        .sum();
    c * hinge + 0.5 * theta * theta
}

pub struct GridResult {
    pub theta: f64,
    pub bias: f64,
    pub objective: f64,
    /// Distinct training-point sign patterns among grid points whose
    /// objective lies within `slack` of the minimum.
    pub near_optimal_patterns: Vec<Vec<bool>>,
}

pub fn grid_search_svm_1d(xs: &[f64], ys: &[bool], c: f64, slack: f64) -> GridResult {
    let steps = ((GRID_HI - GRID_LO) / GRID_STEP).round() as i64;
    let at = |k: i64| GRID_LO + k as f64 * GRID_STEP;
    let mut values = Vec::with_capacity(((steps + 1) * (steps + 1)) as usize);
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for i in 0..=steps {
        for j in 0..=steps {
            let (t, b) = (at(i), at(j));
            let obj = svm_objective_1d(t, b, xs, ys, c);
            values.push((obj, t, b));
            if obj < best.0 {
                best = (obj, t, b);
            }
        }
    }
    let mut patterns: Vec<Vec<bool>> = Vec::new();
    for &(obj, t, b) in &values {
        if obj <= best.0 + slack {
            let p: Vec<bool> = xs.iter().map(|&x| t * x + b >= 0.0).collect();
            if !patterns.contains(&p) {
                patterns.push(p);
            }
        }
    }
    GridResult {
        theta: best.1,
        bias: best.2,
        objective: best.0,
        near_optimal_patterns: patterns,
    }
}

// ------------------------------------------------------------------- tree

fn gini2(c0: usize, c1: usize) -> f64 {
    let n = (c0 + c1) as f64;
    let (p0, p1) = (c0 as f64 / n, c1 as f64 / n);
    1.0 - p0 * p0 - p1 * p1
}

/// Minimum child-weighted Gini over every feature and every midpoint
/// between consecutive distinct values, scanning dense rows.
pub fn brute_force_min_impurity(rows: &[Vec<f64>], ys: &[bool]) -> Option<f64> {
    let n = rows.len();
    let features = rows.first().map_or(0, Vec::len);
    let mut best: Option<f64> = None;
    for f in 0..features {
        let mut vals: Vec<f64> = rows.iter().map(|r| r[f]).collect();
        vals.sort_by(f64::total_cmp);
        vals.dedup();
        for w in vals.windows(2) {
            let t = (w[0] + w[1]) / 2.0;
            let mut left = [0usize; 2];
            let mut right = [0usize; 2];
            for (r, &y) in rows.iter().zip(ys) {
                let side = if r[f] <= t { &mut left } else { &mut right };
                side[usize::from(y)] += 1;
            }
            let nl = left[0] + left[1];
            let nr = right[0] + right[1];
            let mut acc = 0.0;
            if nl > 0 {
                acc += nl as f64 * gini2(left[0], left[1]);
            }
            if nr > 0 {
                acc += nr as f64 * gini2(right[0], right[1]);
            }
            let imp = acc / n as f64;
            if best.is_none_or(|b| imp < b) {
                best = Some(imp);
            }
        }
    }
    best
}

pub fn parent_gini(ys: &[bool]) -> f64 {
    let pos = ys.iter().filter(|&&y| y).count();
    gini2(ys.len() - pos, pos)
}

// ------------------------------------------------------------------ corpus

const BENIGN: &[&str] = &[
    "article", "edit", "source", "page", "history", "thanks", "citation", "section", "talk",
    "discussion", "reference", "image", "template", "user", "policy", "review", "please", "added",
];
const INSULT: &[&str] = &["idiot", "stupid", "moron", "loser", "dumb", "pathetic"];
const OBSCENE: &[&str] = &["crap", "damn", "shit", "bloody"];
const THREAT: &[&str] = &["kill", "hurt", "destroy", "punch"];
const IDENTITY: &[&str] = &["foreigners", "heathens", "outsiders"];

/// Labelled comments with vocabulary correlated to each label.
pub fn synthetic_corpus(n: usize, seed: u64) -> Corpus {
    let mut rng = rng(seed);
    let mut records = Vec::with_capacity(n);
    for i in 0..n {
        let mut labels = [false; 6];
        let toxic = rng.gen_bool(0.25);
        if toxic {
            labels[0] = true;
            labels[2] = rng.gen_bool(0.5);
            labels[3] = rng.gen_bool(0.15);
            labels[4] = rng.gen_bool(0.5);
            labels[5] = rng.gen_bool(0.15);
            labels[1] = rng.gen_bool(0.2);
        }
        let len = rng.gen_range(3..25);
        let mut words: Vec<String> = (0..len)
            .map(|_| BENIGN[rng.gen_range(0..BENIGN.len())].to_string())
            .collect();
        let mut sprinkle = |pool: &[&str], k: usize, rng: &mut ChaCha8Rng| {
            for _ in 0..k {
                let pos = rng.gen_range(0..=words.len());
                words.insert(pos, pool[rng.gen_range(0..pool.len())].to_string());
            }
        };
        if labels[4] {
            sprinkle(INSULT, 2, &mut rng);
        }
        if labels[2] {
            sprinkle(OBSCENE, 2, &mut rng);
        }
        if labels[3] {
            sprinkle(THREAT, 2, &mut rng);
        }
        if labels[5] {
            sprinkle(IDENTITY, 2, &mut rng);
        }
        if labels[1] {
            sprinkle(&["SCUM"], 3, &mut rng);
        }
        if toxic && !labels[2] && !labels[4] {
            sprinkle(INSULT, 1, &mut rng);
        }
        let mut text = words.join(" ");
        if rng.gen_bool(0.3) {
            text.push_str("!!");
        }
        records.push(CommentRecord {
            id: format!("{i:016x}"),
            text,
            labels: LabelRow(labels),
        });
    }
    Corpus::new(records)
}

/// Random printable text, some of it drawn from the synthetic vocabulary.
pub fn random_text(rng: &mut ChaCha8Rng) -> String {
    let len = rng.gen_range(0..12);
    (0..len)
        .map(|_| match rng.gen_range(0..4) {
            0 => INSULT[rng.gen_range(0..INSULT.len())].to_string(),
            1 => BENIGN[rng.gen_range(0..BENIGN.len())].to_string(),
            2 => "SCUM".to_string(),
            _ => (0..rng.gen_range(1..8))
                .map(|_| rng.gen_range(b'!'..=b'~') as char)
                .collect(),
        })
        .collect::<Vec<_>>()
        .join(" ")
}
