//! Jigsaw-format CSV ingestion and the seeded train/test split.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::labels::{Label, NUM_LABELS};

/// Header of the labelled dataset, in column order.
pub const CSV_HEADER: [&str; 2 + NUM_LABELS] = [
    "id",
    "comment_text",
    "toxic",
    "severe_toxic",
    "obscene",
    "threat",
    "insult",
    "identity_hate",
];

/// Six binary flags in [`Label::ALL`] order. Used both for ground truth and
/// for predictions.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct LabelRow(pub [bool; NUM_LABELS]);

impl LabelRow {
    pub fn get(&self, label: Label) -> bool {
        self.0[label.index()]
    }

    pub fn set(&mut self, label: Label, value: bool) {
        self.0[label.index()] = value;
    }

    pub fn as_bits(&self) -> [u8; NUM_LABELS] {
        self.0.map(u8::from)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommentRecord {
    pub id: String,
    pub text: String,
    pub labels: LabelRow,
}

/// Ordered records. Ids are not required to be unique.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    pub records: Vec<CommentRecord>,
}

impl Corpus {
    pub fn new(records: Vec<CommentRecord>) -> Self {
        Corpus { records }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn texts(&self) -> impl Iterator<Item = &str> {
        self.records.iter().map(|r| r.text.as_str())
    }

    pub fn label_column(&self, label: Label) -> Vec<bool> {
        self.records.iter().map(|r| r.labels.get(label)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(train_fraction: f64, seed: u64) -> Result<Self> {
        if !(train_fraction > 0.0 && train_fraction < 1.0) {
            return Err(Error::invalid(format!(
                "train fraction must lie in (0, 1), got {train_fraction}"
            )));
        }
        Ok(SplitSpec {
            train_fraction,
            seed,
        })
    }

    /// `floor(n * train_fraction)`; the test side takes the remainder, i.e.
    /// `ceil(n * (1 - train_fraction))` records. The small epsilon keeps
    /// products that are whole numbers in exact arithmetic from rounding
    /// down.
    pub fn train_size(&self, n: usize) -> usize {
        ((n as f64 * self.train_fraction) + 1e-9).floor() as usize
    }
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train_fraction: 0.8,
            seed: 0,
        }
    }
}

pub fn load_csv(path: impl AsRef<Path>) -> Result<Corpus> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, &path.display().to_string())
}

/// Parses a labelled corpus from any reader. `context` names the source in
/// error messages.
pub fn read_csv<R: Read>(reader: R, context: &str) -> Result<Corpus> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);

    let parse_err = |row: usize, message: String| Error::Parse {
        context: context.to_string(),
        row,
        message,
    };

    let header = rdr
        .headers()
        .map_err(|e| parse_err(0, format!("unreadable header: {e}")))?;
    let found: Vec<&str> = header.iter().map(|h| h.trim_start_matches('\u{feff}')).collect();
    if found != CSV_HEADER {
        return Err(parse_err(
            0,
            format!("expected header {:?}, found {:?}", CSV_HEADER.join(","), found.join(",")),
        ));
    }

    let mut records = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row_no = i + 1;
        let row = row.map_err(|e| parse_err(row_no, e.to_string()))?;
        if row.len() != CSV_HEADER.len() {
            return Err(parse_err(
                row_no,
                format!("expected {} columns, found {}", CSV_HEADER.len(), row.len()),
            ));
        }
        let mut labels = LabelRow::default();
        for label in Label::ALL {
            let raw = &row[2 + label.index()];
            let flag = match raw.trim() {
                "0" => false,
                "1" => true,
                other => {
                    return Err(parse_err(
                        row_no,
                        format!("label `{}` must be 0 or 1, found `{other}`", label.name()),
                    ))
                }
            };
            labels.set(label, flag);
        }
        records.push(CommentRecord {
            id: row[0].to_string(),
            text: row[1].to_string(),
            labels,
        });
    }
    Ok(Corpus { records })
}

/// Writes a corpus in the same layout [`read_csv`] accepts.
pub fn write_csv<W: Write>(corpus: &Corpus, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let to_io = |e: csv::Error| Error::io("<csv writer>", std::io::Error::other(e));
    wtr.write_record(CSV_HEADER).map_err(to_io)?;
    for r in &corpus.records {
        let bits = r.labels.as_bits().map(|b| b.to_string());
        let mut fields = vec![r.id.as_str(), r.text.as_str()];
        fields.extend(bits.iter().map(String::as_str));
        wtr.write_record(&fields).map_err(to_io)?;
    }
    wtr.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}

/// An unlabelled comment, as read by [`load_unlabeled_csv`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnlabeledComment {
    pub id: String,
    pub text: String,
}

/// Reads `id` and `comment_text` columns by name; any other columns are
/// ignored. Used for prediction inputs, which carry no labels.
pub fn load_unlabeled_csv(path: impl AsRef<Path>) -> Result<Vec<UnlabeledComment>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let context = path.display().to_string();
    let parse_err = |row: usize, message: String| Error::Parse {
        context: context.clone(),
        row,
        message,
    };

    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let header = rdr
        .headers()
        .map_err(|e| parse_err(0, format!("unreadable header: {e}")))?
        .clone();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| h.trim_start_matches('\u{feff}') == name)
            .ok_or_else(|| parse_err(0, format!("missing column `{name}`")))
    };
    let (id_col, text_col) = (col("id")?, col("comment_text")?);

    let mut out = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row.map_err(|e| parse_err(i + 1, e.to_string()))?;
        out.push(UnlabeledComment {
            id: row[id_col].to_string(),
            text: row[text_col].to_string(),
        });
    }
    Ok(out)
}

/// Seeded shuffle (ChaCha8, Fisher-Yates) followed by a prefix/suffix cut.
/// The first `spec.train_size(n)` shuffled records form the training side.
pub fn split(corpus: &Corpus, spec: SplitSpec) -> Result<(Corpus, Corpus)> {
    if corpus.is_empty() {
        return Err(Error::invalid("cannot split an empty corpus"));
    }
    if !(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) {
        return Err(Error::invalid(format!(
            "train fraction must lie in (0, 1), got {}",
            spec.train_fraction
        )));
    }
    let mut order: Vec<usize> = (0..corpus.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    order.shuffle(&mut rng);

    let cut = spec.train_size(corpus.len());
    let take = |idx: &[usize]| Corpus {
        records: idx.iter().map(|&i| corpus.records[i].clone()).collect(),
    };
    Ok((take(&order[..cut]), take(&order[cut..])))
}
