//! Column-typed sample tables and their CSV form.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::discrete::CutoffVector;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ColumnKind {
    Continuous,
    /// Integer codes `0..categories`.
    Discrete {
        categories: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    #[serde(flatten)]
    pub kind: ColumnKind,
    /// Thresholds used to produce a discretized column, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoffs: Option<CutoffVector>,
}

impl Column {
    pub fn continuous(name: impl Into<String>) -> Self {
        Column {
            name: name.into(),
            kind: ColumnKind::Continuous,
            cutoffs: None,
        }
    }

    pub fn discrete(name: impl Into<String>, categories: usize) -> Self {
        Column {
            name: name.into(),
            kind: ColumnKind::Discrete { categories },
            cutoffs: None,
        }
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self.kind, ColumnKind::Discrete { .. })
    }
}

/// An `n x p` sample table stored column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    columns: Vec<Column>,
    values: Vec<Vec<f64>>,
    n: usize,
}

impl Dataset {
    pub fn new(columns: Vec<Column>, values: Vec<Vec<f64>>) -> Result<Self> {
        if columns.len() != values.len() {
            return Err(Error::InvalidDataset(format!(
                "{} column descriptors for {} value columns",
                columns.len(),
                values.len()
            )));
        }
        let n = values.first().map_or(0, Vec::len);
        if n < 4 {
            return Err(Error::InvalidDataset(format!("need at least 4 rows, got {n}")));
        }
        for (col, vals) in columns.iter().zip(&values) {
            if vals.len() != n {
                return Err(Error::InvalidDataset(format!(
                    "column `{}` has {} rows, expected {n}",
                    col.name,
                    vals.len()
                )));
            }
            if let Some(bad) = vals.iter().find(|v| !v.is_finite()) {
                return Err(Error::InvalidDataset(format!("column `{}` holds {bad}", col.name)));
            }
            if let ColumnKind::Discrete { categories } = col.kind {
                if categories < 2 {
                    return Err(Error::InvalidDataset(format!(
                        "column `{}` declares {categories} categories",
                        col.name
                    )));
                }
                if let Some(bad) = vals
                    .iter()
                    .find(|&&v| v.fract() != 0.0 || v < 0.0 || v >= categories as f64)
                {
                    return Err(Error::InvalidDataset(format!(
                        "column `{}` is discrete({categories}) but holds {bad}",
                        col.name
                    )));
                }
            }
        }
        Ok(Dataset { columns, values, n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column(&self, j: usize) -> &Column {
        &self.columns[j]
    }

    pub fn values(&self, j: usize) -> &[f64] {
        &self.values[j]
    }

    /// Integer codes of a discrete column.
    pub fn codes(&self, j: usize) -> Option<Vec<usize>> {
        match self.columns[j].kind {
            ColumnKind::Discrete { .. } => Some(self.values[j].iter().map(|&v| v as usize).collect()),
            ColumnKind::Continuous => None,
        }
    }

    /// Column subset in the given order.
    pub fn select(&self, order: &[usize]) -> Result<Dataset> {
        Dataset::new(
            order.iter().map(|&j| self.columns[j].clone()).collect(),
            order.iter().map(|&j| self.values[j].clone()).collect(),
        )
    }

    /// Writes a header row of column names followed by one row per sample.
    /// Discrete codes are written as integers.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(self.columns.iter().map(|c| c.name.as_str()))?;
        let mut row = Vec::with_capacity(self.p());
        for i in 0..self.n {
            row.clear();
            for (col, vals) in self.columns.iter().zip(&self.values) {
                let v = vals[i];
                row.push(if col.is_discrete() {
                    format!("{}", v as i64)
                } else {
                    format!("{v:?}")
                });
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a CSV written by [`Dataset::write_csv`].
    ///
    /// With `columns = None`, a column whose values are all integers in
    /// `0..=15` is read as discrete with `max + 1` categories; anything else
    /// is continuous.
    pub fn read_csv<R: Read>(reader: R, columns: Option<Vec<Column>>) -> Result<Dataset> {
        let mut r = csv::Reader::from_reader(reader);
        let names: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
        let mut values = vec![Vec::new(); names.len()];
        for (line, rec) in r.records().enumerate() {
            let rec = rec?;
            for (j, field) in rec.iter().enumerate() {
                let v: f64 = field.trim().parse().map_err(|_| {
                    Error::InvalidDataset(format!("row {}: cannot parse `{field}` in `{}`", line + 2, names[j]))
                })?;
                values[j].push(v);
            }
        }
        let columns = match columns {
            Some(cols) => {
                if cols.len() != names.len() || cols.iter().zip(&names).any(|(c, n)| &c.name != n) {
                    return Err(Error::InvalidDataset(
                        "metadata columns do not match the CSV header".into(),
                    ));
                }
                cols
            }
            None => names
                .into_iter()
                .zip(&values)
                .map(|(name, vals)| infer_column(name, vals))
                .collect(),
        };
        Dataset::new(columns, values)
    }
}

fn infer_column(name: String, vals: &[f64]) -> Column {
    let integral = vals.iter().all(|&v| v.fract() == 0.0 && (0.0..=15.0).contains(&v));
    if integral {
        let max = vals.iter().copied().fold(0.0, f64::max) as usize;
        if max >= 1 {
            return Column::discrete(name, max + 1);
        }
    }
    Column::continuous(name)
}
