//! Categorical CSV datasets.

use std::collections::{BTreeMap, BTreeSet};

use crate::data::DataTable;
use crate::error::{Error, Result};
use crate::model::VariableMeta;

/// Header of the optional row-weight column.
pub const WEIGHT_COLUMN: &str = "__weight__";

fn is_missing(cell: &str) -> bool {
    cell.is_empty() || cell == "?"
}

fn csv_error(e: csv::Error) -> Error {
    Error::InvalidData(format!("malformed CSV: {e}"))
}

/// Reads a CSV with a header row. Empty cells and `?` are missing. Columns
/// named in `schema` are validated against its states; other columns get
/// their observed values as states, sorted lexicographically.
pub fn read_csv(text: &str, schema: Option<&[VariableMeta]>) -> Result<DataTable> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(csv_error)?
        .iter()
        .map(str::to_string)
        .collect();
    if header.is_empty() || header.iter().all(String::is_empty) {
        return Err(Error::InvalidData("CSV header is empty".into()));
    }
    let unique: BTreeSet<&String> = header.iter().collect();
    if unique.len() != header.len() {
        return Err(Error::InvalidData("duplicate column names in CSV header".into()));
    }
    let weight_col = header.iter().position(|h| h == WEIGHT_COLUMN);
    let mut raw: Vec<Vec<String>> = vec![Vec::new(); header.len()];
    let mut weights = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_error)?;
        if record.len() != header.len() {
            return Err(Error::RaggedRow {
                line: record.position().map_or(0, |p| p.line() as usize),
                found: record.len(),
                expected: header.len(),
            });
        }
        let row = weights.len();
        for (j, cell) in record.iter().enumerate() {
            if Some(j) == weight_col {
                let w: f64 = cell
                    .trim()
                    .parse()
                    .map_err(|_| Error::InvalidData(format!("row {row}: weight `{cell}` is not a number")))?;
                if !w.is_finite() || w < 0.0 {
                    return Err(Error::NegativeWeight { row });
                }
                weights.push(w);
            } else {
                raw[j].push(cell.to_string());
            }
        }
        if weight_col.is_none() {
            weights.push(1.0);
        }
    }
    let declared: BTreeMap<&str, &VariableMeta> = schema.unwrap_or_default().iter().map(|m| (m.name(), m)).collect();
    let mut metas = Vec::new();
    let mut cells = Vec::new();
    for (j, name) in header.iter().enumerate() {
        if Some(j) == weight_col {
            continue;
        }
        let meta = match declared.get(name.as_str()) {
            Some(m) => (*m).clone(),
            None => {
                let states: BTreeSet<&str> = raw[j].iter().map(String::as_str).filter(|c| !is_missing(c)).collect();
                if states.len() < 2 {
                    return Err(Error::InvalidData(format!(
                        "column `{name}` has fewer than two observed states; supply its states explicitly"
                    )));
                }
                VariableMeta::new(name.clone(), states.into_iter().collect())?
            }
        };
        let mut codes = Vec::with_capacity(raw[j].len());
        for cell in &raw[j] {
            codes.push(if is_missing(cell) {
                None
            } else {
                Some(meta.state_index(cell)?)
            });
        }
        metas.push(meta);
        cells.push(codes);
    }
    let table = DataTable::from_columns(metas, cells)?;
    if weight_col.is_some() {
        table.with_weights(weights)
    } else {
        Ok(table)
    }
}

/// Writes state labels with a header row; missing cells become `?` and row
/// weights, when present, go to a trailing `__weight__` column.
pub fn write_csv(table: &DataTable) -> String {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let mut header = table.column_names();
    if table.weights().is_some() {
        header.push(WEIGHT_COLUMN.to_string());
    }
    writer.write_record(&header).expect("in-memory write");
    for row in 0..table.n_rows() {
        let mut record: Vec<String> = table
            .columns()
            .iter()
            .enumerate()
            .map(|(j, meta)| match table.cell(row, j) {
                Some(s) => meta.states()[s].clone(),
                None => "?".to_string(),
            })
            .collect();
        if let Some(w) = table.weights() {
            record.push(w[row].to_string());
        }
        writer.write_record(&record).expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("UTF-8 input")
}
