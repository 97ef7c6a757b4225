//! Column-named categorical datasets with optional row weights.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::factor::DiscreteFactor;
use crate::model::VariableMeta;

/// A rectangular table of state codes. `None` marks a missing cell.
#[derive(Debug, Clone, PartialEq)]
pub struct DataTable {
    columns: Vec<VariableMeta>,
    // column-major
    cells: Vec<Vec<Option<usize>>>,
    weights: Option<Vec<f64>>,
    latents: BTreeSet<String>,
}

impl DataTable {
    /// Builds a table from row-major cells.
    pub fn new(columns: Vec<VariableMeta>, rows: Vec<Vec<Option<usize>>>) -> Result<Self> {
        let mut cells = vec![Vec::with_capacity(rows.len()); columns.len()];
        for (r, row) in rows.into_iter().enumerate() {
            if row.len() != columns.len() {
                return Err(Error::InvalidData(format!(
                    "row {r} has {} cells, expected {}",
                    row.len(),
                    columns.len()
                )));
            }
            for (c, v) in row.into_iter().enumerate() {
                cells[c].push(v);
            }
        }
        Self::from_columns(columns, cells)
    }

    /// Builds a table from column-major cells.
    pub fn from_columns(columns: Vec<VariableMeta>, cells: Vec<Vec<Option<usize>>>) -> Result<Self> {
        if columns.len() != cells.len() {
            return Err(Error::InvalidData("column count mismatch".into()));
        }
        let names: BTreeSet<&str> = columns.iter().map(VariableMeta::name).collect();
        if names.len() != columns.len() {
            return Err(Error::InvalidData("duplicate column name".into()));
        }
        let n = cells.first().map(Vec::len).unwrap_or(0);
        for (meta, col) in columns.iter().zip(&cells) {
            if col.len() != n {
                return Err(Error::InvalidData("columns differ in length".into()));
            }
            if let Some(&s) = col.iter().flatten().find(|&&s| s >= meta.cardinality()) {
                return Err(Error::StateOutOfRange {
                    variable: meta.name().to_string(),
                    state: s,
                    cardinality: meta.cardinality(),
                });
            }
        }
        Ok(DataTable {
            columns,
            cells,
            weights: None,
            latents: BTreeSet::new(),
        })
    }

    /// Convenience constructor for complete integer data.
    pub fn from_codes(columns: Vec<VariableMeta>, rows: &[Vec<usize>]) -> Result<Self> {
        Self::new(
            columns,
            rows.iter().map(|r| r.iter().map(|&v| Some(v)).collect()).collect(),
        )
    }

    pub fn with_weights(mut self, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != self.n_rows() {
            return Err(Error::InvalidData(format!(
                "{} weights for {} rows",
                weights.len(),
                self.n_rows()
            )));
        }
        if let Some(row) = weights.iter().position(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::NegativeWeight { row });
        }
        self.weights = Some(weights);
        Ok(self)
    }

    pub fn without_weights(mut self) -> Self {
        self.weights = None;
        self
    }

    pub fn mark_latent(mut self, name: &str) -> Result<Self> {
        self.column_index(name)?;
        self.latents.insert(name.to_string());
        Ok(self)
    }

    /// Columns flagged as latent (sampled but unobservable).
    pub fn latent_columns(&self) -> &BTreeSet<String> {
        &self.latents
    }

    /// Copy without the columns flagged as latent.
    pub fn drop_latent_columns(&self) -> DataTable {
        let keep: Vec<usize> = (0..self.columns.len())
            .filter(|&i| !self.latents.contains(self.columns[i].name()))
            .collect();
        DataTable {
            columns: keep.iter().map(|&i| self.columns[i].clone()).collect(),
            cells: keep.iter().map(|&i| self.cells[i].clone()).collect(),
            weights: self.weights.clone(),
            latents: BTreeSet::new(),
        }
    }

    pub fn n_rows(&self) -> usize {
        self.cells.first().map(Vec::len).unwrap_or(0)
    }

    pub fn n_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[VariableMeta] {
        &self.columns
    }

    pub fn column_names(&self) -> Vec<String> {
        self.columns.iter().map(|m| m.name().to_string()).collect()
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|m| m.name() == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn has_column(&self, name: &str) -> bool {
        self.columns.iter().any(|m| m.name() == name)
    }

    pub fn meta(&self, name: &str) -> Result<&VariableMeta> {
        Ok(&self.columns[self.column_index(name)?])
    }

    pub fn column(&self, name: &str) -> Result<&[Option<usize>]> {
        Ok(&self.cells[self.column_index(name)?])
    }

    pub fn column_at(&self, idx: usize) -> &[Option<usize>] {
        &self.cells[idx]
    }

    pub fn cell(&self, row: usize, col: usize) -> Option<usize> {
        self.cells[col][row]
    }

    pub fn row(&self, row: usize) -> Vec<Option<usize>> {
        self.cells.iter().map(|c| c[row]).collect()
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    pub fn weight(&self, row: usize) -> f64 {
        self.weights.as_ref().map(|w| w[row]).unwrap_or(1.0)
    }

    pub fn total_weight(&self) -> f64 {
        match &self.weights {
            Some(w) => w.iter().sum(),
            None => self.n_rows() as f64,
        }
    }

    pub fn has_missing(&self) -> bool {
        self.cells.iter().any(|c| c.iter().any(Option::is_none))
    }

    pub fn column_has_missing(&self, name: &str) -> Result<bool> {
        Ok(self.column(name)?.iter().any(Option::is_none))
    }

    /// Rows reordered (or subsampled) by index.
    pub fn select_rows(&self, rows: &[usize]) -> DataTable {
        DataTable {
            columns: self.columns.clone(),
            cells: self
                .cells
                .iter()
                .map(|c| rows.iter().map(|&r| c[r]).collect())
                .collect(),
            weights: self.weights.as_ref().map(|w| rows.iter().map(|&r| w[r]).collect()),
            latents: self.latents.clone(),
        }
    }

    /// Weighted joint counts over `vars`, laid out like a factor over `vars`.
    /// Rows with a missing cell in any of `vars` are skipped.
    pub fn contingency<S: AsRef<str>>(&self, vars: &[S]) -> Result<DiscreteFactor> {
        let idx: Vec<usize> = vars
            .iter()
            .map(|v| self.column_index(v.as_ref()))
            .collect::<Result<_>>()?;
        let cards: Vec<usize> = idx.iter().map(|&i| self.columns[i].cardinality()).collect();
        let strides = crate::factor::strides(&cards);
        let mut counts = vec![0.0; cards.iter().product()];
        'rows: for r in 0..self.n_rows() {
            let mut flat = 0;
            for (k, &c) in idx.iter().enumerate() {
                match self.cells[c][r] {
                    Some(s) => flat += s * strides[k],
                    None => continue 'rows,
                }
            }
            counts[flat] += self.weight(r);
        }
        DiscreteFactor::new(vars.iter().map(|v| v.as_ref().to_string()).collect(), cards, counts)
    }
}
