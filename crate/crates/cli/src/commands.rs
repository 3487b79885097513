use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::Path;

use toxgate_core::corpus::{load_unlabeled_csv, CSV_HEADER};
use toxgate_core::stats::{freedman_diaconis_or_single_bin, histogram, text_lengths};
use toxgate_core::{
    load_bundle, load_csv, save_bundle, split, train_all, Corpus, Label, LabelRow, MetricsReport, MultiHeadModel,
    SplitSpec,
};

use crate::error::{CliError, CliResult};
use crate::settings::TrainSettings;
use crate::{EvaluateArgs, PredictArgs, StatsArgs, TrainArgs};

fn require_file(path: &Path) -> CliResult<()> {
    if path.is_file() {
        Ok(())
    } else if path.exists() {
        Err(CliError::Usage(format!("{}: not a regular file", path.display())))
    } else {
        Err(CliError::Usage(format!("{}: no such file", path.display())))
    }
}

fn require_dir(path: &Path) -> CliResult<()> {
    if path.is_dir() {
        Ok(())
    } else {
        Err(CliError::Usage(format!("{}: no such directory", path.display())))
    }
}

/// The directory `path` will be written into must already exist.
fn require_parent(path: &Path) -> CliResult<()> {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => require_dir(p),
        _ => Ok(()),
    }
}

fn prepare_out_dir(path: &Path) -> CliResult<()> {
    if path.exists() && !path.is_dir() {
        return Err(CliError::Usage(format!("{}: exists and is not a directory", path.display())));
    }
    fs::create_dir_all(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    fs::write(path, contents).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn non_empty(corpus: Corpus, path: &Path) -> CliResult<Corpus> {
    if corpus.is_empty() {
        Err(CliError::Usage(format!("{}: no data rows", path.display())))
    } else {
        Ok(corpus)
    }
}

fn truth_rows(corpus: &Corpus) -> Vec<LabelRow> {
    corpus.records.iter().map(|r| r.labels).collect()
}

fn report_for(model: &MultiHeadModel, corpus: &Corpus) -> CliResult<MetricsReport> {
    let pred = model.predict_corpus(corpus);
    Ok(MetricsReport::compute(&pred, &truth_rows(corpus))?)
}

pub fn train(args: TrainArgs) -> CliResult<()> {
    let settings = TrainSettings::resolve(&args)?;
    let spec = SplitSpec::new(settings.split, settings.seed)?;
    require_file(&args.data)?;
    if let Some(report) = &args.report {
        require_parent(report)?;
    }
    prepare_out_dir(&args.out)?;

    let corpus = non_empty(load_csv(&args.data)?, &args.data)?;
    let (train_set, valid_set) = split(&corpus, spec)?;
    if train_set.is_empty() || valid_set.is_empty() {
        return Err(CliError::Usage(format!(
            "{} rows split {}/{}: both sides need at least one row",
            corpus.len(),
            train_set.len(),
            valid_set.len()
        )));
    }
    eprintln!(
        "training on {} rows, validating on {} rows (seed {}, {} jobs)",
        train_set.len(),
        valid_set.len(),
        settings.seed,
        settings.train.jobs
    );

    let model = train_all(&train_set, &settings.train, settings.preprocess)?;
    save_bundle(&model, &args.out)?;

    let train_acc = model.head_accuracies(&train_set)?;
    println!("training accuracy");
    for label in Label::ALL {
        if label != Label::SevereToxic {
            println!("  {:<14} {:.2}%", label.name(), train_acc[label.index()] * 100.0);
        }
    }
    println!();

    let report = report_for(&model, &valid_set)?;
    print!("{report}");
    if let Some(path) = &args.report {
        write_file(path, &report.to_csv())?;
    }
    eprintln!("model saved to {}", args.out.display());
    Ok(())
}

/// Distinguishes a CSV whose label columns differ from the model's (a
/// schema mismatch) from one that is simply malformed.
fn check_label_schema(path: &Path) -> CliResult<()> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let Some(first) = rdr.records().next() else {
        return Err(CliError::Usage(format!("{}: empty file", path.display())));
    };
    let header = first.map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let cols: Vec<&str> = header.iter().map(|h| h.trim_start_matches('\u{feff}')).collect();
    let looks_like_corpus = cols.len() >= 2 && cols[0] == CSV_HEADER[0] && cols[1] == CSV_HEADER[1];
    if looks_like_corpus && cols != CSV_HEADER {
        let model_labels: Vec<&str> = Label::ALL.iter().map(|l| l.name()).collect();
        return Err(CliError::Mismatch(format!(
            "{}: label columns [{}] do not match the model's labels [{}]",
            path.display(),
            cols[2..].join(","),
            model_labels.join(",")
        )));
    }
    Ok(())
}

pub fn evaluate(args: EvaluateArgs) -> CliResult<()> {
    require_dir(&args.model)?;
    require_file(&args.data)?;
    require_parent(&args.report)?;
    if let Some(dir) = &args.roc_dir {
        prepare_out_dir(dir)?;
    }

    let model = load_bundle(&args.model)?;
    check_label_schema(&args.data)?;
    let corpus = non_empty(load_csv(&args.data)?, &args.data)?;
    let report = report_for(&model, &corpus)?;

    print!("{report}");
    write_file(&args.report, &report.to_csv())?;
    if let Some(dir) = &args.roc_dir {
        for m in &report.per_label {
            if let Some(roc) = &m.roc {
                write_file(&dir.join(format!("{}_roc.csv", m.label.name())), &roc.to_csv())?;
            }
        }
    }
    Ok(())
}

fn flags<'a>(row: &'a LabelRow) -> impl Iterator<Item = &'a str> + 'a {
    row.0.iter().map(|&b| if b { "1" } else { "0" })
}

pub fn predict(args: PredictArgs) -> CliResult<()> {
    require_dir(&args.model)?;
    if let Some(file) = &args.file {
        require_file(file)?;
    }
    if let Some(out) = &args.out {
        require_parent(out)?;
    }
    let model = load_bundle(&args.model)?;

    let sink: Box<dyn Write> = match &args.out {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?,
        )),
        None => Box::new(io::stdout().lock()),
    };
    let mut out = csv::Writer::from_writer(sink);
    let csv_err = |e: csv::Error| CliError::Internal(format!("writing predictions: {e}"));
    let label_names = Label::ALL.map(|l| l.name());

    match (&args.text, &args.file) {
        (Some(text), None) => {
            let row = model.predict_row(text);
            out.write_record(label_names).map_err(csv_err)?;
            out.write_record(flags(&row)).map_err(csv_err)?;
        }
        (None, Some(file)) => {
            let comments = load_unlabeled_csv(file)?;
            let texts: Vec<&str> = comments.iter().map(|c| c.text.as_str()).collect();
            let rows = model.predict_batch(&texts);
            out.write_record(std::iter::once("id").chain(label_names)).map_err(csv_err)?;
            for (c, row) in comments.iter().zip(&rows) {
                let mut record = vec![c.id.as_str()];
                record.extend(flags(row));
                out.write_record(&record).map_err(csv_err)?;
            }
        }
        _ => return Err(CliError::Usage("give exactly one of --text or --file".into())),
    }
    out.flush().map_err(|e| CliError::Usage(format!("writing predictions: {e}")))?;
    Ok(())
}

pub fn stats(args: StatsArgs) -> CliResult<()> {
    require_file(&args.data)?;
    require_parent(&args.out)?;
    let comments = load_unlabeled_csv(&args.data)?;
    if comments.is_empty() {
        return Err(CliError::Usage(format!("{}: no data rows", args.data.display())));
    }
    let lengths: Vec<f64> = text_lengths(comments.iter().map(|c| c.text.as_str()), args.unit)
        .into_iter()
        .map(|v| v as f64)
        .collect();
    let (spec, single_bin) = freedman_diaconis_or_single_bin(&lengths)?;

    let mut out = csv::Writer::from_path(&args.out)
        .map_err(|e| CliError::Usage(format!("{}: {e}", args.out.display())))?;
    let csv_err = |e: csv::Error| CliError::Usage(format!("{}: {e}", args.out.display()));
    out.write_record(["bin_lower_edge", "count"]).map_err(csv_err)?;
    for (edge, count) in histogram(&lengths, &spec) {
        out.write_record([edge.to_string(), count.to_string()]).map_err(csv_err)?;
    }
    out.flush().map_err(|e| CliError::Usage(format!("{}: {e}", args.out.display())))?;

    eprintln!(
        "n={} iqr={} h={} bins={}{}",
        spec.n,
        spec.iqr,
        spec.bin_width,
        spec.num_bins,
        if single_bin { " (IQR is zero; single bin)" } else { "" }
    );
    Ok(())
}
