//! Dataset loading, normalization, splitting and partitioning.

use std::collections::BTreeMap;
use std::path::Path;

use log::warn;
use num_bigint::BigInt;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::encoding::fx_encode;
use crate::party::OwnerRecord;
use crate::protocols::nb::{NbFeature, NbRecord, NbSchema, NbValue};
use crate::seed;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ColumnKind {
    Numeric,
    Discrete { vocabulary: Vec<String> },
    /// Kept only as the label or skipped (for example a row id).
    Ignore,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    #[serde(flatten)]
    pub kind: ColumnKind,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSchema {
    pub name: String,
    #[serde(default)]
    pub header: bool,
    #[serde(default = "default_missing")]
    pub missing: String,
    pub columns: Vec<Column>,
    pub label: String,
    /// Label value mapped to the positive class.
    pub positive: String,
}

fn default_missing() -> String {
    "?".into()
}

impl DatasetSchema {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let s: DatasetSchema = serde_json::from_slice(&std::fs::read(path)?)?;
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let label = self.label_index()?;
        if !matches!(self.columns[label].kind, ColumnKind::Ignore) {
            return Err(Error::Config(format!("label column {:?} must have kind \"ignore\"", self.label)));
        }
        if self.features().count() == 0 {
            return Err(Error::Config("schema has no feature columns".into()));
        }
        for c in &self.columns {
            if let ColumnKind::Discrete { vocabulary } = &c.kind {
                if vocabulary.is_empty() {
                    return Err(Error::Config(format!("discrete column {:?} has an empty vocabulary", c.name)));
                }
            }
        }
        Ok(())
    }

    fn label_index(&self) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c.name == self.label)
            .ok_or_else(|| Error::Config(format!("label column {:?} not in schema", self.label)))
    }

    pub fn features(&self) -> impl Iterator<Item = &Column> {
        let label = self.label.clone();
        self.columns.iter().filter(move |c| c.name != label && !matches!(c.kind, ColumnKind::Ignore))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum RawValue {
    Num(f64),
    /// Vocabulary index.
    Cat(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RawRow {
    pub values: Vec<RawValue>,
    pub positive: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RawTable {
    pub schema: DatasetSchema,
    pub rows: Vec<RawRow>,
    /// Data rows read, including dropped ones.
    pub total: usize,
    pub dropped: usize,
}

impl RawTable {
    pub fn subset(&self, idx: &[usize]) -> RawTable {
        RawTable {
            schema: self.schema.clone(),
            rows: idx.iter().map(|&i| self.rows[i].clone()).collect(),
            total: idx.len(),
            dropped: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

pub fn load_csv(path: &Path, schema: &DatasetSchema) -> Result<RawTable> {
    let file = std::fs::File::open(path)?;
    read_csv(file, schema)
}

pub fn read_csv<R: std::io::Read>(reader: R, schema: &DatasetSchema) -> Result<RawTable> {
    schema.validate()?;
    let label_at = schema.label_index()?;
    let mut rdr = csv::ReaderBuilder::new().has_headers(schema.header).flexible(true).trim(csv::Trim::All).from_reader(reader);
    let mut rows = Vec::new();
    let (mut total, mut dropped) = (0usize, 0usize);
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(i + 1);
        if rec.iter().all(str::is_empty) {
            continue;
        }
        total += 1;
        if rec.len() != schema.columns.len() {
            let col = schema.columns.get(rec.len()).or(schema.columns.last()).map(|c| c.name.as_str()).unwrap_or("");
            return Err(Error::data(
                Some(line),
                format!("expected {} columns, found {} (first mismatch at column {col:?})", schema.columns.len(), rec.len()),
            ));
        }
        if rec.iter().any(|v| v == schema.missing) {
            dropped += 1;
            continue;
        }
        let mut values = Vec::new();
        for (j, (col, v)) in schema.columns.iter().zip(rec.iter()).enumerate() {
            if j == label_at {
                continue;
            }
            match &col.kind {
                ColumnKind::Ignore => {}
                ColumnKind::Numeric => {
                    let x: f64 = v.parse().map_err(|_| Error::data(Some(line), format!("column {:?}: {v:?} is not a number", col.name)))?;
                    if !x.is_finite() {
                        return Err(Error::data(Some(line), format!("column {:?}: non-finite value", col.name)));
                    }
                    values.push(RawValue::Num(x));
                }
                ColumnKind::Discrete { vocabulary } => {
                    let k = vocabulary
                        .iter()
                        .position(|w| w == v)
                        .ok_or_else(|| Error::data(Some(line), format!("column {:?}: {v:?} not in vocabulary", col.name)))?;
                    values.push(RawValue::Cat(k));
                }
            }
        }
        rows.push(RawRow { values, positive: rec[label_at] == schema.positive });
    }
    if total == 0 {
        return Err(Error::data(None, "no data rows"));
    }
    Ok(RawTable { schema: schema.clone(), rows, total, dropped })
}

/// Per-feature min-max ranges fitted on a training table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    /// `(min, max)` for numeric features; `(0, |vocab| - 1)` for discrete ones.
    pub ranges: Vec<(f64, f64)>,
}

impl Normalizer {
    pub fn fit(table: &RawTable) -> Result<Self> {
        if table.is_empty() {
            return Err(Error::EmptyInput("table to normalize"));
        }
        let feats: Vec<&Column> = table.schema.features().collect();
        let mut ranges = Vec::with_capacity(feats.len());
        for (j, col) in feats.iter().enumerate() {
            let r = match &col.kind {
                ColumnKind::Discrete { vocabulary } => (0.0, (vocabulary.len() - 1) as f64),
                _ => {
                    let xs = table.rows.iter().map(|r| match r.values[j] {
                        RawValue::Num(x) => x,
                        RawValue::Cat(k) => k as f64,
                    });
                    let (lo, hi) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
                    if lo == hi {
                        warn!("feature {:?} is constant; it maps to 0", col.name);
                    }
                    (lo, hi)
                }
            };
            ranges.push(r);
        }
        Ok(Normalizer { ranges })
    }

    /// Maps a raw value into [0, 1], clamping values outside the fitted range.
    pub fn scale(&self, j: usize, v: &RawValue) -> f64 {
        let (lo, hi) = self.ranges[j];
        let x = match v {
            RawValue::Num(x) => *x,
            RawValue::Cat(k) => *k as f64,
        };
        if hi <= lo {
            return 0.0;
        }
        ((x - lo) / (hi - lo)).clamp(0.0, 1.0)
    }

    pub fn apply(&self, table: &RawTable) -> Vec<Vec<f64>> {
        table.rows.iter().map(|r| r.values.iter().enumerate().map(|(j, v)| self.scale(j, v)).collect()).collect()
    }
}

/// Label encoding for the linear trainers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LabelCoding {
    /// -1 / +1
    Signed,
    /// 0 / 1
    Binary,
}

impl LabelCoding {
    pub fn code(self, positive: bool) -> i64 {
        match (self, positive) {
            (_, true) => 1,
            (LabelCoding::Signed, false) => -1,
            (LabelCoding::Binary, false) => 0,
        }
    }
}

/// Scale-2 feature mantissas with a trailing bias feature of 1.
pub fn quantize(row: &[f64]) -> Result<Vec<BigInt>> {
    let mut out = row.iter().map(|&v| fx_encode(v, 2)).collect::<Result<Vec<_>>>()?;
    out.push(BigInt::from(100));
    Ok(out)
}

/// Normalized, quantized records with ids `0..m`.
pub fn linear_records(table: &RawTable, norm: &Normalizer, coding: LabelCoding) -> Result<Vec<OwnerRecord>> {
    norm.apply(table)
        .iter()
        .zip(&table.rows)
        .enumerate()
        .map(|(i, (x, r))| Ok(OwnerRecord { id: i as u64, x_hat: quantize(x)?, label: coding.code(r.positive) }))
        .collect()
}

/// Naive Bayes view: numeric features normalized at scale 2, discrete
/// features left categorical. Class 1 is the positive label.
pub fn nb_records(table: &RawTable, norm: &Normalizer) -> Result<(NbSchema, Vec<NbRecord>)> {
    let feats: Vec<NbFeature> = table
        .schema
        .features()
        .map(|c| match &c.kind {
            ColumnKind::Discrete { vocabulary } => NbFeature::Discrete { cardinality: vocabulary.len() },
            _ => NbFeature::Numeric,
        })
        .collect();
    let mut records = Vec::with_capacity(table.len());
    for r in &table.rows {
        let mut values = Vec::with_capacity(feats.len());
        for (j, (f, v)) in feats.iter().zip(&r.values).enumerate() {
            values.push(match (f, v) {
                (NbFeature::Discrete { .. }, RawValue::Cat(k)) => NbValue::Discrete(*k),
                _ => {
                    let m = fx_encode(norm.scale(j, v), 2)?;
                    NbValue::Numeric(i64::try_from(m).map_err(|_| Error::Encoding("feature mantissa overflows".into()))?)
                }
            });
        }
        records.push(NbRecord { values, class: usize::from(r.positive) });
    }
    Ok((NbSchema { features: feats, n_classes: 2 }, records))
}

/// Seeded shuffle split; the test part has `round(m · test_fraction)` rows.
pub fn split(m: usize, test_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::Config(format!("test fraction {test_fraction} outside (0, 1)")));
    }
    let n_test = (m as f64 * test_fraction).round() as usize;
    if n_test == 0 || n_test == m {
        return Err(Error::Config(format!("split of {m} rows at {test_fraction} leaves an empty side")));
    }
    let mut idx: Vec<usize> = (0..m).collect();
    idx.shuffle(&mut seed::stream(seed, "split"));
    let test = idx.split_off(m - n_test);
    Ok((idx, test))
}

/// Shuffled near-equal partition of `0..m` into `n` parts, larger parts
/// first. With `labels`, each class is dealt round-robin instead.
pub fn partition(m: usize, n: usize, seed: u64, labels: Option<&[bool]>) -> Result<Vec<Vec<usize>>> {
    if n == 0 || n > m {
        return Err(Error::Config(format!("cannot partition {m} rows among {n} owners")));
    }
    let mut idx: Vec<usize> = (0..m).collect();
    idx.shuffle(&mut seed::stream(seed, "partition"));
    if let Some(labels) = labels {
        if labels.len() != m {
            return Err(Error::DimensionMismatch { expected: m, found: labels.len() });
        }
        let mut by_class: BTreeMap<bool, Vec<usize>> = BTreeMap::new();
        for i in idx {
            by_class.entry(labels[i]).or_default().push(i);
        }
        let mut parts = vec![Vec::new(); n];
        let mut k = 0;
        for (_, rows) in by_class.into_iter().rev() {
            for i in rows {
                parts[k % n].push(i);
                k += 1;
            }
        }
        return Ok(parts);
    }
    let (base, extra) = (m / n, m % n);
    let mut parts = Vec::with_capacity(n);
    let mut it = idx.into_iter();
    for p in 0..n {
        let size = base + usize::from(p < extra);
        parts.push(it.by_ref().take(size).collect());
    }
    Ok(parts)
}

/// Builtin schema for the Wisconsin breast cancer file: an id column, nine
/// integer features in 1..10 and a class column (2 benign, 4 malignant).
pub fn bcwd_schema() -> DatasetSchema {
    let names = [
        "clump_thickness",
        "cell_size_uniformity",
        "cell_shape_uniformity",
        "marginal_adhesion",
        "single_epithelial_cell_size",
        "bare_nuclei",
        "bland_chromatin",
        "normal_nucleoli",
        "mitoses",
    ];
    let mut columns = vec![Column { name: "id".into(), kind: ColumnKind::Ignore }];
    columns.extend(names.iter().map(|n| Column { name: (*n).into(), kind: ColumnKind::Numeric }));
    columns.push(Column { name: "class".into(), kind: ColumnKind::Ignore });
    DatasetSchema { name: "bcwd".into(), header: false, missing: "?".into(), columns, label: "class".into(), positive: "4".into() }
}
