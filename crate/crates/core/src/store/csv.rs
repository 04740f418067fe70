//! Comma-separated text with a header row of variable names.

use std::path::Path;

use super::bits::BitColumn;
use super::matrix::{Column, SampleMatrix, SampleMatrixBuilder, VariableKind, VariableMeta};
use crate::error::{Error, Result};

enum Sink {
    Binary(Vec<bool>),
    Categorical(Vec<u8>),
    Outcome(Vec<f64>),
}

fn parse_label(field: &str, meta: &VariableMeta, row: usize, k: u16) -> Result<u8> {
    let v: i64 = field.trim().parse().map_err(|_| Error::Parse {
        row,
        column: meta.name.clone(),
        message: format!("'{field}' is not an integer"),
    })?;
    if v < 0 || v >= k as i64 {
        return Err(Error::OutOfRange { variable: meta.name.clone(), row, value: field.to_string() });
    }
    Ok(v as u8)
}

/// Reads `path`, placing columns in `schema` order. Rows are numbered from 1.
pub fn load_csv(path: impl AsRef<Path>, schema: &[VariableMeta]) -> Result<SampleMatrix> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
    let header = rdr.headers()?.clone();

    let mut slots = Vec::with_capacity(schema.len());
    for meta in schema {
        let pos = header
            .iter()
            .position(|h| h.trim() == meta.name)
            .ok_or_else(|| Error::Schema(format!("column '{}' missing from header", meta.name)))?;
        slots.push(pos);
    }
    if let Some(extra) = header.iter().find(|h| !schema.iter().any(|m| m.name == h.trim())) {
        return Err(Error::Schema(format!("header column '{extra}' is not in the schema")));
    }

    let mut sinks: Vec<Sink> = schema
        .iter()
        .map(|m| match m.kind {
            VariableKind::Binary => Sink::Binary(Vec::new()),
            VariableKind::Categorical { .. } => Sink::Categorical(Vec::new()),
            VariableKind::Outcome => Sink::Outcome(Vec::new()),
        })
        .collect();

    let mut n = 0usize;
    for record in rdr.records() {
        let record = record?;
        n += 1;
        for ((meta, &pos), sink) in schema.iter().zip(&slots).zip(sinks.iter_mut()) {
            let field = record.get(pos).unwrap_or("");
            if field.trim().is_empty() {
                return Err(Error::Parse { row: n, column: meta.name.clone(), message: "missing value".into() });
            }
            match sink {
                Sink::Binary(v) => v.push(parse_label(field, meta, n, 2)? == 1),
                Sink::Categorical(v) => {
                    let k = meta.kind.categories().unwrap_or(0);
                    v.push(parse_label(field, meta, n, k)?)
                }
                Sink::Outcome(v) => {
                    let x: f64 = field.trim().parse().map_err(|_| Error::Parse {
                        row: n,
                        column: meta.name.clone(),
                        message: format!("'{field}' is not a number"),
                    })?;
                    v.push(x);
                }
            }
        }
    }

    let mut b = SampleMatrixBuilder::new(n);
    for (meta, sink) in schema.iter().cloned().zip(sinks) {
        b = match sink {
            Sink::Binary(v) => b.binary(meta, BitColumn::from_bools(v)),
            Sink::Categorical(v) => b.categorical(meta, v),
            Sink::Outcome(v) => b.outcome(meta, v),
        };
    }
    b.build()
}

/// Guesses kinds from content: {0,1} columns are binary, other small
/// non-negative integers categorical, anything else an outcome.
pub fn infer_schema(path: impl AsRef<Path>) -> Result<Vec<VariableMeta>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
    let names: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let mut max_label: Vec<Option<i64>> = vec![Some(0); names.len()];
    for record in rdr.records() {
        let record = record?;
        for (i, field) in record.iter().enumerate().take(names.len()) {
            if let Some(cur) = max_label[i] {
                max_label[i] = match field.trim().parse::<i64>() {
                    Ok(v) if (0..=255).contains(&v) => Some(cur.max(v)),
                    _ => None,
                };
            }
        }
    }
    Ok(names
        .into_iter()
        .zip(max_label)
        .map(|(name, max)| match max {
            Some(0 | 1) => VariableMeta::binary(name),
            Some(k) => VariableMeta::categorical(name, k as u16 + 1),
            None => VariableMeta::outcome(name),
        })
        .collect())
}

pub fn write_csv(m: &SampleMatrix, path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(m.variables().iter().map(|v| v.name.as_str()))?;
    let mut row_buf: Vec<String> = Vec::with_capacity(m.n_vars());
    for row in 0..m.n_samples() {
        row_buf.clear();
        for var in 0..m.n_vars() {
            row_buf.push(match m.column(var) {
                Column::Binary(c) => (c.get(row) as u8).to_string(),
                Column::Categorical { values, .. } => values[row].to_string(),
                Column::Outcome(v) => v[row].to_string(),
            });
        }
        w.write_record(&row_buf)?;
    }
    w.flush()?;
    Ok(())
}
