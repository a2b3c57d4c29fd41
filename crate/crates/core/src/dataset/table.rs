//! The working table representation and its fully numeric final form.

use serde::{Deserialize, Serialize};

use super::schema::{Schema, SourceId, RESPONSE_COLUMNS};
use super::DatasetError;

/// One table cell. Text stays text until label encoding runs.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Missing,
    Num(f64),
    Text(String),
}

impl Cell {
    pub fn is_missing(&self) -> bool {
        matches!(self, Cell::Missing)
    }

    pub fn as_num(&self) -> Option<f64> {
        match self {
            Cell::Num(x) => Some(*x),
            _ => None,
        }
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            Cell::Text(s) => Some(s),
            _ => None,
        }
    }

    /// Equality key used for duplicate detection: text cells compare
    /// after ASCII case-folding (they are already trimmed at parse
    /// time), numbers by bit pattern with -0.0 folded onto 0.0.
    pub(super) fn dedup_key(&self) -> CellKey {
        match self {
            Cell::Missing => CellKey::Missing,
            Cell::Num(x) => {
                let x = if *x == 0.0 { 0.0 } else { *x };
                CellKey::Num(x.to_bits())
            }
            Cell::Text(s) => CellKey::Text(s.to_ascii_lowercase()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub(super) enum CellKey {
    Missing,
    Num(u64),
    Text(String),
}

/// An ordered collection of rows under one schema, tagged with the
/// silo it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    schema: Schema,
    source_id: SourceId,
    rows: Vec<Vec<Cell>>,
}

impl Dataset {
    /// Build from rows, checking that every row has the schema's arity.
    pub fn new(
        schema: Schema,
        source_id: SourceId,
        rows: Vec<Vec<Cell>>,
    ) -> Result<Self, DatasetError> {
        let arity = schema.columns().len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != arity {
                return Err(DatasetError::Schema(format!(
                    "row {} has {} cells, schema has {} columns",
                    i + 1,
                    row.len(),
                    arity
                )));
            }
        }
        Ok(Self { schema, source_id, rows })
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn source_id(&self) -> SourceId {
        self.source_id
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub(super) fn replace_rows(&self, rows: Vec<Vec<Cell>>) -> Dataset {
        Dataset { schema: self.schema.clone(), source_id: self.source_id, rows }
    }

    /// Append another dataset's rows. Both must share the schema; the
    /// result keeps `self`'s source id.
    pub fn concat(&self, other: &Dataset) -> Result<Dataset, DatasetError> {
        if self.schema != other.schema {
            return Err(DatasetError::Schema(
                "cannot concatenate datasets with different schemas".into(),
            ));
        }
        let mut rows = self.rows.clone();
        rows.extend(other.rows.iter().cloned());
        Ok(self.replace_rows(rows))
    }

    /// Extract the fully numeric form. Fails if any cell is still
    /// missing or textual, or if a response/label cell is not 0/1.
    pub fn to_prepared(&self) -> Result<PreparedDataset, DatasetError> {
        let response_idx = self.schema.response_indices();
        let extra_idx = self.schema.extra_indices();
        let label_idx = self.schema.label_index();
        let extra_names = extra_idx
            .iter()
            .map(|&i| self.schema.columns()[i].name.clone())
            .collect();

        let mut records = Vec::with_capacity(self.rows.len());
        for (r, row) in self.rows.iter().enumerate() {
            let num = |i: usize| -> Result<f64, DatasetError> {
                row[i].as_num().ok_or_else(|| DatasetError::Encoding(format!(
                    "row {} column {:?} is not numeric; run missing-value \
                     handling and label encoding first",
                    r + 1,
                    self.schema.columns()[i].name
                )))
            };
            let binary = |i: usize| -> Result<u8, DatasetError> {
                let x = num(i)?;
                if x == 0.0 {
                    Ok(0)
                } else if x == 1.0 {
                    Ok(1)
                } else {
                    Err(DatasetError::Encoding(format!(
                        "row {} column {:?}: expected 0 or 1, found {x}",
                        r + 1,
                        self.schema.columns()[i].name
                    )))
                }
            };

            let mut responses = [0u8; RESPONSE_COLUMNS];
            for (slot, &i) in responses.iter_mut().zip(&response_idx) {
                *slot = binary(i)?;
            }
            let extra = extra_idx.iter().map(|&i| num(i)).collect::<Result<_, _>>()?;
            let label = binary(label_idx)?;
            records.push(ScreeningRecord { responses, extra, label });
        }
        Ok(PreparedDataset { source_id: self.source_id, extra_names, records })
    }
}

/// One respondent in encoded form: ten binary responses, encoded
/// demographic features, and the binary screening label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreeningRecord {
    pub responses: [u8; RESPONSE_COLUMNS],
    pub extra: Vec<f64>,
    pub label: u8,
}

impl ScreeningRecord {
    /// Feature vector under the given mode.
    pub fn features(&self, mode: FeatureMode) -> Vec<f64> {
        let mut out: Vec<f64> = self.responses.iter().map(|&r| f64::from(r)).collect();
        if mode == FeatureMode::Full {
            out.extend(&self.extra);
        }
        out
    }
}

/// Which columns feed the classifiers.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeatureMode {
    /// The ten questionnaire responses only (default).
    #[default]
    ResponsesOnly,
    /// Responses plus the encoded demographic columns.
    Full,
}

impl FeatureMode {
    pub fn arity(&self, extra_count: usize) -> usize {
        match self {
            FeatureMode::ResponsesOnly => RESPONSE_COLUMNS,
            FeatureMode::Full => RESPONSE_COLUMNS + extra_count,
        }
    }
}

/// A silo's records in final numeric form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreparedDataset {
    pub source_id: SourceId,
    pub extra_names: Vec<String>,
    pub records: Vec<ScreeningRecord>,
}

impl PreparedDataset {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn labels(&self) -> Vec<u8> {
        self.records.iter().map(|r| r.label).collect()
    }

    pub fn feature_matrix(&self, mode: FeatureMode) -> Vec<Vec<f64>> {
        self.records.iter().map(|r| r.features(mode)).collect()
    }

    /// Keep only the records at `indices`, in the order given.
    pub fn subset(&self, indices: &[usize]) -> PreparedDataset {
        PreparedDataset {
            source_id: self.source_id,
            extra_names: self.extra_names.clone(),
            records: indices.iter().map(|&i| self.records[i].clone()).collect(),
        }
    }
}
