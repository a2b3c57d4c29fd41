//! CSV ingestion and canonical serialization.
//!
//! Input files must carry a header row containing every schema column
//! (order-insensitive; extra file columns are ignored). Empty cells and
//! `?` denote missing values. Canonical output uses the schema column
//! order, LF line endings, and quotes only where a cell requires it.

use csv::{QuoteStyle, ReaderBuilder, Terminator, WriterBuilder};

use super::schema::{ColumnKind, Schema, SourceId};
use super::table::{Cell, Dataset};
use super::DatasetError;

/// Parse raw silo CSV into a [`Dataset`]. Missing cells are kept as
/// [`Cell::Missing`] for the downstream policy; row order is preserved.
pub fn parse_csv(raw: &str, schema: &Schema, source: SourceId) -> Result<Dataset, DatasetError> {
    parse_with(raw, schema, source, false)
}

/// Parse an already-encoded canonical CSV (every column numeric), as
/// written by [`serialize_csv`] after label encoding.
pub fn parse_csv_encoded(
    raw: &str,
    schema: &Schema,
    source: SourceId,
) -> Result<Dataset, DatasetError> {
    parse_with(raw, schema, source, true)
}

fn parse_with(
    raw: &str,
    schema: &Schema,
    source: SourceId,
    encoded: bool,
) -> Result<Dataset, DatasetError> {
    let mut reader = ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(raw.as_bytes());

    let headers = reader.headers()?.clone();
    let positions = header_positions(&headers, schema)?;

    let mut rows = Vec::new();
    for (row_no, record) in reader.records().enumerate() {
        let record = record?;
        let row_no = row_no + 1; // 1-based data row, header excluded
        let mut row = Vec::with_capacity(schema.columns().len());
        for (col, &pos) in schema.columns().iter().zip(&positions) {
            let text = record.get(pos).unwrap_or("");
            row.push(parse_cell(text, col.kind, encoded).map_err(|detail| {
                DatasetError::Cell { row: row_no, column: col.name.clone(), detail }
            })?);
        }
        rows.push(row);
    }
    Dataset::new(schema.clone(), source, rows)
}

fn header_positions(headers: &csv::StringRecord, schema: &Schema) -> Result<Vec<usize>, DatasetError> {
    let names: Vec<&str> = headers.iter().map(str::trim).collect();
    let mut positions = Vec::with_capacity(schema.columns().len());
    for col in schema.columns() {
        let matches: Vec<usize> = names
            .iter()
            .enumerate()
            .filter(|(_, n)| **n == col.name)
            .map(|(i, _)| i)
            .collect();
        match matches.as_slice() {
            [one] => positions.push(*one),
            [] => {
                return Err(DatasetError::Schema(format!(
                    "header is missing column {:?} (found: {})",
                    col.name,
                    names.join(", ")
                )))
            }
            _ => {
                return Err(DatasetError::Schema(format!(
                    "header lists column {:?} more than once",
                    col.name
                )))
            }
        }
    }
    Ok(positions)
}

fn parse_cell(text: &str, kind: ColumnKind, encoded: bool) -> Result<Cell, String> {
    let text = text.trim();
    if text.is_empty() || text == "?" {
        return Ok(Cell::Missing);
    }
    let numeric = |text: &str| -> Result<Cell, String> {
        let x: f64 = text
            .parse()
            .map_err(|_| format!("cannot parse {text:?} as a number"))?;
        if !x.is_finite() {
            return Err(format!("non-finite value {text:?}"));
        }
        Ok(Cell::Num(x))
    };
    match kind {
        ColumnKind::BinaryResponse => match text {
            "0" => Ok(Cell::Num(0.0)),
            "1" => Ok(Cell::Num(1.0)),
            _ => Err(format!("expected 0 or 1, found {text:?}")),
        },
        ColumnKind::Integer | ColumnKind::Real => numeric(text),
        ColumnKind::Categorical | ColumnKind::Label => {
            if encoded {
                numeric(text)
            } else {
                Ok(Cell::Text(text.to_string()))
            }
        }
    }
}

/// Canonical CSV: schema-ordered header, LF line endings, quoting only
/// when a cell contains a delimiter, quote, or newline. Numbers render
/// as their shortest round-trip decimal; missing cells as empty.
pub fn serialize_csv(dataset: &Dataset) -> String {
    let mut writer = WriterBuilder::new()
        .terminator(Terminator::Any(b'\n'))
        .quote_style(QuoteStyle::Necessary)
        .from_writer(Vec::new());

    let header: Vec<&str> = dataset
        .schema()
        .columns()
        .iter()
        .map(|c| c.name.as_str())
        .collect();
    writer.write_record(&header).expect("write to Vec cannot fail");

    for row in dataset.rows() {
        let fields: Vec<String> = row.iter().map(render_cell).collect();
        writer.write_record(&fields).expect("write to Vec cannot fail");
    }
    let bytes = writer.into_inner().expect("flush to Vec cannot fail");
    String::from_utf8(bytes).expect("CSV output is UTF-8")
}

fn render_cell(cell: &Cell) -> String {
    match cell {
        Cell::Missing => String::new(),
        Cell::Num(x) => format!("{x}"),
        Cell::Text(s) => s.clone(),
    }
}
