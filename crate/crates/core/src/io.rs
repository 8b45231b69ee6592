//! Dataset files.
//!
//! A dataset is a CSV file with header `# d=<d> task=<mean|pca|reg> seed=<s>`
//! followed by one sample per row (regression rows carry `y` last), a sibling
//! `.labels` file with one `0`/`1` per line, and a sibling `.truth.json` with
//! the ground truth and generation metadata. Floats are written in shortest
//! round-trip form, so a write/read cycle is lossless.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::contamination::{AdversaryKind, Dataset, DatasetMeta, Task, Truth};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetPaths {
    pub csv: PathBuf,
    pub labels: PathBuf,
    pub truth: PathBuf,
}

pub fn sibling_paths(csv: &Path) -> DatasetPaths {
    DatasetPaths {
        csv: csv.to_path_buf(),
        labels: csv.with_extension("labels"),
        truth: csv.with_extension("truth.json"),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct TruthFile {
    meta: DatasetMeta,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    truth: Option<Truth>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Header {
    pub d: usize,
    pub task: Task,
    pub seed: u64,
}

pub fn format_header(h: &Header) -> String {
    format!("# d={} task={} seed={}", h.d, h.task.tag(), h.seed)
}

pub fn parse_header(line: &str) -> Result<Header> {
    let body = line.strip_prefix('#').ok_or_else(|| Error::Format(format!("header must start with '#': {line:?}")))?;
    let (mut d, mut task, mut seed) = (None, None, None);
    for field in body.split_whitespace() {
        let (key, value) =
            field.split_once('=').ok_or_else(|| Error::Format(format!("malformed header field {field:?}")))?;
        let bad = |_| Error::Format(format!("bad value in header field {field:?}"));
        match key {
            "d" => d = Some(value.parse::<usize>().map_err(bad)?),
            "task" => task = Some(Task::parse(value).map_err(|_| Error::Format(format!("unknown task {value:?}")))?),
            "seed" => seed = Some(value.parse::<u64>().map_err(bad)?),
            _ => {}
        }
    }
    match (d, task, seed) {
        (Some(d), Some(task), Some(seed)) => Ok(Header { d, task, seed }),
        _ => Err(Error::Format(format!("header needs d, task and seed: {line:?}"))),
    }
}

/// Writes the CSV and, when present, the labels and truth siblings.
pub fn write_dataset(ds: &Dataset, csv: &Path) -> Result<DatasetPaths> {
    let paths = sibling_paths(csv);
    let mut out = BufWriter::new(File::create(&paths.csv)?);
    let header = Header { d: ds.d(), task: ds.meta.task, seed: ds.meta.seed };
    writeln!(out, "{}", format_header(&header))?;
    let mut line = String::new();
    for (i, row) in ds.samples.outer_iter().enumerate() {
        line.clear();
        for (j, x) in row.iter().enumerate() {
            if j > 0 {
                line.push(',');
            }
            line.push_str(&x.to_string());
        }
        if let Some(y) = &ds.responses {
            line.push(',');
            line.push_str(&y[i].to_string());
        }
        writeln!(out, "{line}")?;
    }
    out.flush()?;
    if let Some(labels) = &ds.labels {
        let mut out = BufWriter::new(File::create(&paths.labels)?);
        for &b in labels {
            writeln!(out, "{}", u8::from(b))?;
        }
        out.flush()?;
    }
    let file = TruthFile { meta: ds.meta.clone(), truth: ds.truth.clone() };
    std::fs::write(&paths.truth, serde_json::to_string_pretty(&file)?)?;
    Ok(paths)
}

/// Reads a dataset; missing label and truth siblings are tolerated.
pub fn read_dataset(csv: &Path) -> Result<Dataset> {
    let paths = sibling_paths(csv);
    let reader = BufReader::new(File::open(&paths.csv)?);
    let mut lines = reader.lines();
    let first = lines.next().ok_or_else(|| Error::Format("empty dataset file".into()))??;
    let header = parse_header(first.trim())?;
    let width = header.d + usize::from(header.task == Task::Regression);
    let mut values = Vec::new();
    let mut n = 0;
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let before = values.len();
        for field in line.split(',') {
            let x: f64 = field
                .trim()
                .parse()
                .map_err(|_| Error::Format(format!("line {}: cannot parse {field:?}", lineno + 2)))?;
            values.push(x);
        }
        if values.len() - before != width {
            return Err(Error::Format(format!(
                "line {}: expected {width} values, found {}",
                lineno + 2,
                values.len() - before
            )));
        }
        n += 1;
    }
    let table = Array2::from_shape_vec((n, width), values).map_err(|e| Error::Format(e.to_string()))?;
    let (samples, responses) = if header.task == Task::Regression {
        let y: Array1<f64> = table.column(header.d).to_owned();
        (table.slice(ndarray::s![.., ..header.d]).to_owned(), Some(y))
    } else {
        (table, None)
    };

    let labels = if paths.labels.exists() {
        let text = std::fs::read_to_string(&paths.labels)?;
        let labels = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| match l.trim() {
                "0" => Ok(false),
                "1" => Ok(true),
                other => Err(Error::Format(format!("label must be 0 or 1, got {other:?}"))),
            })
            .collect::<Result<Vec<bool>>>()?;
        if labels.len() != n {
            return Err(Error::Format(format!("{} labels for {n} samples", labels.len())));
        }
        Some(labels)
    } else {
        None
    };

    let (meta, truth) = if paths.truth.exists() {
        let file: TruthFile = serde_json::from_str(&std::fs::read_to_string(&paths.truth)?)?;
        (file.meta, file.truth)
    } else {
        let outliers = labels.as_ref().map_or(0, |l| l.iter().filter(|&&b| b).count());
        let meta = DatasetMeta {
            task: header.task,
            n,
            d: header.d,
            k: 0,
            seed: header.seed,
            epsilon: 0.0,
            adversary: AdversaryKind::None,
            outliers,
        };
        (meta, None)
    };
    if meta.task != header.task || meta.d != header.d {
        return Err(Error::Format("truth file disagrees with the CSV header".into()));
    }
    Ok(Dataset { samples, responses, labels, truth, meta })
}
