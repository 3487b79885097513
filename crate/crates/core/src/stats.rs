//! Comment-length statistics and Freedman-Diaconis histogram binning.

use std::str::FromStr;

use crate::corpus::Corpus;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LengthUnit {
    /// Unicode scalar values of the raw comment.
    #[default]
    Characters,
    /// Whitespace-separated tokens of the raw comment.
    Tokens,
}

impl FromStr for LengthUnit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "chars" | "characters" => Ok(LengthUnit::Characters),
            "tokens" => Ok(LengthUnit::Tokens),
            other => Err(Error::invalid(format!("unknown length unit `{other}`"))),
        }
    }
}

pub fn comment_lengths(corpus: &Corpus, unit: LengthUnit) -> Result<Vec<u64>> {
    if corpus.is_empty() {
        return Err(Error::invalid("comment lengths of an empty corpus"));
    }
    Ok(text_lengths(corpus.texts(), unit))
}

pub fn text_lengths<'a>(texts: impl IntoIterator<Item = &'a str>, unit: LengthUnit) -> Vec<u64> {
    texts
        .into_iter()
        .map(|t| match unit {
            LengthUnit::Characters => t.chars().count() as u64,
            LengthUnit::Tokens => t.split_whitespace().count() as u64,
        })
        .collect()
}

/// Linear-interpolation quantile of already-sorted data (`h = (n-1) q`).
fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn sorted_copy(values: &[f64]) -> Result<Vec<f64>> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("values must be finite"));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// `Q3 - Q1` using linear interpolation between order statistics.
pub fn interquartile_range(values: &[f64]) -> Result<f64> {
    if values.len() < 2 {
        return Err(Error::invalid("interquartile range needs at least two values"));
    }
    let sorted = sorted_copy(values)?;
    Ok(quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramSpec {
    pub n: usize,
    pub iqr: f64,
    pub bin_width: f64,
    pub num_bins: usize,
    pub min_value: f64,
    pub max_value: f64,
}

/// Bin width `2 * IQR * n^(-1/3)`, bin count `ceil((max - min) / width)`.
pub fn freedman_diaconis(values: &[f64]) -> Result<HistogramSpec> {
    let iqr = interquartile_range(values)?;
    if iqr <= 0.0 {
        return Err(Error::DegenerateDistribution(
            "interquartile range is zero".into(),
        ));
    }
    let sorted = sorted_copy(values)?;
    let n = sorted.len();
    let (min_value, max_value) = (sorted[0], sorted[n - 1]);
    let bin_width = 2.0 * iqr * (n as f64).powf(-1.0 / 3.0);
    let num_bins = (((max_value - min_value) / bin_width).ceil() as usize).max(1);
    Ok(HistogramSpec {
        n,
        iqr,
        bin_width,
        num_bins,
        min_value,
        max_value,
    })
}

/// As [`freedman_diaconis`], but a zero IQR yields a single bin spanning
/// the data instead of an error. The flag reports whether the fallback was
/// taken.
pub fn freedman_diaconis_or_single_bin(values: &[f64]) -> Result<(HistogramSpec, bool)> {
    match freedman_diaconis(values) {
        Ok(spec) => Ok((spec, false)),
        Err(Error::DegenerateDistribution(_)) => {
            let sorted = sorted_copy(values)?;
            let (min_value, max_value) = (sorted[0], sorted[sorted.len() - 1]);
            let span = max_value - min_value;
            Ok((
                HistogramSpec {
                    n: sorted.len(),
                    iqr: 0.0,
                    bin_width: if span > 0.0 { span } else { 1.0 },
                    num_bins: 1,
                    min_value,
                    max_value,
                },
                true,
            ))
        }
        Err(e) => Err(e),
    }
}

/// `(bin_lower_edge, count)` for uniform bins starting at `min_value`. The
/// last bin is closed on the right.
pub fn histogram(values: &[f64], spec: &HistogramSpec) -> Vec<(f64, u64)> {
    let mut counts = vec![0u64; spec.num_bins];
    for &v in values {
        let raw = ((v - spec.min_value) / spec.bin_width).floor();
        let idx = if raw < 0.0 { 0 } else { (raw as usize).min(spec.num_bins - 1) };
        counts[idx] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(i, c)| (spec.min_value + i as f64 * spec.bin_width, c))
        .collect()
}
