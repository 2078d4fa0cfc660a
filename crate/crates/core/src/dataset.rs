//! CSV ingestion, categorical encoding and the seeded train/test split.
//!
//! Categorical columns are mapped to integer codes. A column named `salary`
//! always uses the ordinal map `low → 0, medium → 1, high → 2`; every other
//! categorical column is coded by byte-wise lexicographic order of its
//! distinct values. The split shuffles row indices with a ChaCha8 stream
//! seeded from a `u64` (Fisher–Yates) and assigns the first
//! `floor(fraction · n)` rows to training.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Name of the categorical column with a fixed ordinal encoding.
pub const SALARY_COLUMN: &str = "salary";
const SALARY_LEVELS: [&str; 3] = ["low", "medium", "high"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    Numeric,
    Categorical,
    Label,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub kind: ColumnKind,
    /// Alternative header names accepted when `name` is absent.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub aliases: Vec<String>,
}

impl Column {
    pub fn new(name: impl Into<String>, kind: ColumnKind) -> Self {
        Column {
            name: name.into(),
            kind,
            aliases: Vec::new(),
        }
    }
}

/// Ordered column layout with exactly one label column.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schema {
    columns: Vec<Column>,
}

impl Schema {
    pub fn new(columns: Vec<Column>) -> Result<Self> {
        let labels = columns
            .iter()
            .filter(|c| c.kind == ColumnKind::Label)
            .count();
        if labels != 1 {
            return Err(Error::Schema(format!(
                "expected exactly one label column, found {labels}"
            )));
        }
        let mut seen = BTreeSet::new();
        for c in &columns {
            if c.name.is_empty() {
                return Err(Error::Schema("empty column name".into()));
            }
            if !seen.insert(c.name.as_str()) {
                return Err(Error::Schema(format!("duplicate column `{}`", c.name)));
            }
        }
        Ok(Schema { columns })
    }

    /// Layout of the Kaggle HR attrition file. The department column is
    /// named `sales` in the original upload and is accepted under that name.
    pub fn hr() -> Self {
        use ColumnKind::*;
        let mut department = Column::new("department", Categorical);
        department.aliases = vec!["sales".into(), "Department".into()];
        Schema::new(vec![
            Column::new("satisfaction_level", Numeric),
            Column::new("last_evaluation", Numeric),
            Column::new("number_project", Numeric),
            Column::new("average_montly_hours", Numeric),
            Column::new("time_spend_company", Numeric),
            Column::new("Work_accident", Numeric),
            Column::new("left", Label),
            Column::new("promotion_last_5years", Numeric),
            department,
            Column::new(SALARY_COLUMN, Categorical),
        ])
        .expect("built-in schema is valid")
    }

    /// Parses `name:kind,name:kind,...` where kind is `numeric`,
    /// `categorical` or `label`.
    pub fn parse(spec: &str) -> Result<Self> {
        let columns = spec
            .split(',')
            .map(|item| {
                let (name, kind) = item
                    .split_once(':')
                    .ok_or_else(|| Error::Schema(format!("`{item}` is not name:kind")))?;
                let kind = match kind.trim() {
                    "numeric" => ColumnKind::Numeric,
                    "categorical" => ColumnKind::Categorical,
                    "label" => ColumnKind::Label,
                    other => return Err(Error::Schema(format!("unknown column kind `{other}`"))),
                };
                Ok(Column::new(name.trim(), kind))
            })
            .collect::<Result<Vec<_>>>()?;
        Schema::new(columns)
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn label(&self) -> &Column {
        self.columns
            .iter()
            .find(|c| c.kind == ColumnKind::Label)
            .expect("schema has a label column")
    }

    /// Non-label columns in schema order; their count is the feature dimension.
    pub fn features(&self) -> impl Iterator<Item = &Column> {
        self.columns.iter().filter(|c| c.kind != ColumnKind::Label)
    }

    pub fn n_features(&self) -> usize {
        self.columns.len() - 1
    }
}

/// Text cells of the schema columns, in schema order. A missing label column
/// is only possible for tables read with [`load_features_table`].
#[derive(Debug, Clone)]
pub struct RawTable {
    pub has_label: bool,
    pub rows: Vec<Vec<String>>,
}

impl RawTable {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Reads CSV text whose header covers every schema column.
pub fn load_table(csv_text: &str, schema: &Schema) -> Result<RawTable> {
    read_table(csv_text, schema, true)
}

/// Like [`load_table`] but the label column may be absent.
pub fn load_features_table(csv_text: &str, schema: &Schema) -> Result<RawTable> {
    read_table(csv_text, schema, false)
}

fn read_table(csv_text: &str, schema: &Schema, require_label: bool) -> Result<RawTable> {
    if csv_text.trim().is_empty() {
        return Err(Error::Empty("csv file"));
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(csv_text.as_bytes());
    let header: Vec<String> = reader
        .headers()?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let position = |column: &Column| {
        std::iter::once(&column.name)
            .chain(column.aliases.iter())
            .find_map(|name| header.iter().position(|h| h == name))
    };

    let mut has_label = true;
    let mut positions = Vec::with_capacity(schema.columns().len());
    for column in schema.columns() {
        match position(column) {
            Some(p) => positions.push(Some(p)),
            None if column.kind == ColumnKind::Label && !require_label => {
                has_label = false;
                positions.push(None);
            }
            None => return Err(Error::MissingColumn(column.name.clone())),
        }
    }

    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != header.len() {
            return Err(Error::RaggedRow {
                row: i + 1,
                expected: header.len(),
                found: record.len(),
            });
        }
        rows.push(
            positions
                .iter()
                .flatten()
                .map(|&p| record[p].to_string())
                .collect(),
        );
    }
    Ok(RawTable { has_label, rows })
}

/// Dense row-major matrix of `f64`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(Error::LengthMismatch {
                left: rows * cols,
                right: data.len(),
            });
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    found: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.rows
    }

    pub fn n_cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        // chunks_exact panics on zero width
        (0..self.rows).map(move |i| self.row(i))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn select_rows(&self, indices: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Matrix {
            rows: indices.len(),
            cols: self.cols,
            data,
        }
    }

    /// Applies `f` to every entry, returning a new matrix.
    pub fn map_rows(&self, mut f: impl FnMut(&[f64], &mut Vec<f64>)) -> Matrix {
        let mut data = Vec::with_capacity(self.data.len());
        for r in self.iter_rows() {
            f(r, &mut data);
        }
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }
}

/// Category text → integer code for one column.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryEncoder {
    codes: BTreeMap<String, u32>,
}

impl CategoryEncoder {
    fn fit<'a>(column: &str, values: impl Iterator<Item = &'a str>) -> Self {
        let codes = if column == SALARY_COLUMN {
            SALARY_LEVELS
                .iter()
                .enumerate()
                .map(|(i, v)| (v.to_string(), i as u32))
                .collect()
        } else {
            // BTreeSet<String> orders by bytes
            values
                .collect::<BTreeSet<_>>()
                .into_iter()
                .enumerate()
                .map(|(i, v)| (v.to_string(), i as u32))
                .collect()
        };
        CategoryEncoder { codes }
    }

    pub fn encode(&self, value: &str) -> Option<u32> {
        self.codes.get(value).copied()
    }

    pub fn decode(&self, code: u32) -> Option<&str> {
        self.codes
            .iter()
            .find(|(_, &c)| c == code)
            .map(|(k, _)| k.as_str())
    }

    pub fn categories(&self) -> impl Iterator<Item = (&str, u32)> {
        self.codes.iter().map(|(k, &v)| (k.as_str(), v))
    }
}

/// Per-column encoders keyed by column name.
pub type Encoders = BTreeMap<String, CategoryEncoder>;

#[derive(Debug, Clone, PartialEq)]
pub struct EncodedDataset {
    pub features: Matrix,
    pub labels: Vec<u8>,
    pub schema: Schema,
    pub encoders: Encoders,
}

impl EncodedDataset {
    /// Builds a dataset straight from numeric rows; every feature is numeric.
    pub fn from_rows(rows: &[Vec<f64>], labels: &[u8]) -> Result<Self> {
        let features = Matrix::from_rows(rows)?;
        if labels.len() != features.n_rows() {
            return Err(Error::LengthMismatch {
                left: features.n_rows(),
                right: labels.len(),
            });
        }
        if let Some(i) = labels.iter().position(|&y| y > 1) {
            return Err(Error::BadLabel {
                row: i + 1,
                value: labels[i].to_string(),
            });
        }
        if let Some(i) = features.as_slice().iter().position(|v| !v.is_finite()) {
            return Err(Error::BadNumber {
                row: i / features.n_cols().max(1) + 1,
                column: format!("x{}", i % features.n_cols().max(1)),
                value: features.as_slice()[i].to_string(),
            });
        }
        let mut columns: Vec<Column> = (0..features.n_cols())
            .map(|j| Column::new(format!("x{j}"), ColumnKind::Numeric))
            .collect();
        columns.push(Column::new("y", ColumnKind::Label));
        Ok(EncodedDataset {
            features,
            labels: labels.to_vec(),
            schema: Schema::new(columns)?,
            encoders: Encoders::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.features.n_cols()
    }

    pub fn subset(&self, indices: &[usize]) -> EncodedDataset {
        EncodedDataset {
            features: self.features.select_rows(indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            schema: self.schema.clone(),
            encoders: self.encoders.clone(),
        }
    }

    /// Positive and negative counts.
    pub fn class_counts(&self) -> (usize, usize) {
        let pos = self.labels.iter().filter(|&&y| y == 1).count();
        (pos, self.labels.len() - pos)
    }

    pub fn require_both_classes(&self) -> Result<()> {
        match self.class_counts() {
            (0, _) => Err(Error::MissingClass(1)),
            (_, 0) => Err(Error::MissingClass(0)),
            _ => Ok(()),
        }
    }
}

/// Encodes a table, fitting fresh encoders on its categorical columns.
pub fn encode(raw: &RawTable, schema: &Schema) -> Result<EncodedDataset> {
    let mut encoders = Encoders::new();
    for (j, column) in schema.columns().iter().enumerate() {
        if column.kind == ColumnKind::Categorical {
            let values = raw.rows.iter().map(|r| r[j].trim());
            encoders.insert(column.name.clone(), CategoryEncoder::fit(&column.name, values));
        }
    }
    encode_with(raw, schema, &encoders)
}

/// Encodes a labelled table with previously fitted encoders.
pub fn encode_with(raw: &RawTable, schema: &Schema, encoders: &Encoders) -> Result<EncodedDataset> {
    if !raw.has_label {
        return Err(Error::MissingColumn(schema.label().name.clone()));
    }
    let features = encode_features(raw, schema, encoders)?;
    let label_pos = schema
        .columns()
        .iter()
        .position(|c| c.kind == ColumnKind::Label)
        .expect("schema has a label column");
    let labels = raw
        .rows
        .iter()
        .enumerate()
        .map(|(i, r)| parse_label(i + 1, &r[label_pos]))
        .collect::<Result<Vec<_>>>()?;
    Ok(EncodedDataset {
        features,
        labels,
        schema: schema.clone(),
        encoders: encoders.clone(),
    })
}

/// Encodes only the feature columns, ignoring the label if present.
pub fn encode_features(raw: &RawTable, schema: &Schema, encoders: &Encoders) -> Result<Matrix> {
    // positions of the schema columns inside each raw row
    let mut cells = Vec::new();
    let mut pos = 0;
    for column in schema.columns() {
        if column.kind == ColumnKind::Label {
            if raw.has_label {
                pos += 1;
            }
            continue;
        }
        cells.push((pos, column));
        pos += 1;
    }
    let lookup: HashMap<&str, &CategoryEncoder> =
        encoders.iter().map(|(k, v)| (k.as_str(), v)).collect();

    let mut data = Vec::with_capacity(raw.len() * cells.len());
    for (i, row) in raw.rows.iter().enumerate() {
        for &(p, column) in &cells {
            let cell = row[p].trim();
            let value = match column.kind {
                ColumnKind::Categorical => {
                    let encoder = lookup.get(column.name.as_str()).ok_or_else(|| {
                        Error::Schema(format!("no encoder for column `{}`", column.name))
                    })?;
                    encoder.encode(cell).ok_or_else(|| Error::UnseenCategory {
                        column: column.name.clone(),
                        value: cell.to_string(),
                    })? as f64
                }
                _ => parse_number(i + 1, &column.name, cell)?,
            };
            data.push(value);
        }
    }
    Matrix::from_vec(raw.len(), cells.len(), data)
}

fn parse_number(row: usize, column: &str, cell: &str) -> Result<f64> {
    match cell.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::BadNumber {
            row,
            column: column.to_string(),
            value: cell.to_string(),
        }),
    }
}

fn parse_label(row: usize, cell: &str) -> Result<u8> {
    let cell = cell.trim();
    match cell.parse::<f64>() {
        Ok(v) if v == 0.0 => Ok(0),
        Ok(v) if v == 1.0 => Ok(1),
        _ => Err(Error::BadLabel {
            row,
            value: cell.to_string(),
        }),
    }
}

#[derive(Debug, Clone)]
pub struct SplitResult {
    pub train: EncodedDataset,
    pub test: EncodedDataset,
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
    pub seed: u64,
    pub fraction: f64,
}

impl SplitResult {
    /// SHA-256 over the split parameters, the row assignment and the
    /// contents of both partitions, as lowercase hex.
    pub fn checksum(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.seed.to_le_bytes());
        hasher.update(self.fraction.to_bits().to_le_bytes());
        for part in [&self.train, &self.test] {
            hasher.update((part.len() as u64).to_le_bytes());
            for v in part.features.as_slice() {
                hasher.update(v.to_bits().to_le_bytes());
            }
            hasher.update(&part.labels);
        }
        for &i in self.train_indices.iter().chain(&self.test_indices) {
            hasher.update((i as u64).to_le_bytes());
        }
        hex::encode(hasher.finalize())
    }
}

/// Number of training rows for a split of `n` rows.
pub fn train_size(n: usize, fraction: f64) -> usize {
    (fraction * n as f64).floor() as usize
}

/// Seeded shuffled (non-stratified) train/test partition.
pub fn split(ds: &EncodedDataset, fraction: f64, seed: u64) -> Result<SplitResult> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "split fraction {fraction} is not in (0, 1)"
        )));
    }
    if ds.len() < 2 {
        return Err(Error::Empty("split needs at least 2 rows"));
    }
    let mut indices: Vec<usize> = (0..ds.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    indices.shuffle(&mut rng);
    let n_train = train_size(ds.len(), fraction);
    let test_indices = indices.split_off(n_train);
    let train_indices = indices;
    Ok(SplitResult {
        train: ds.subset(&train_indices),
        test: ds.subset(&test_indices),
        train_indices,
        test_indices,
        seed,
        fraction,
    })
}
