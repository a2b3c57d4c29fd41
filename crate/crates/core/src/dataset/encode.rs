//! Deterministic integer coding of categorical text columns.
//!
//! Codes are assigned by lexicographic (byte) order of the category
//! text, so the mapping is independent of row order. The label column
//! maps the schema's positive text to 1 and everything else to 0.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::schema::ColumnKind;
use super::table::{Cell, Dataset};
use super::DatasetError;

/// Per-column category vocabulary; code = index into the sorted list.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct EncodingMap {
    /// Categorical column name -> categories in code order.
    pub columns: BTreeMap<String, Vec<String>>,
    /// The label text treated as positive (encoded 1).
    pub positive_label_text: String,
    /// Observed label texts and the code each received.
    pub label_texts: BTreeMap<String, u8>,
}

impl EncodingMap {
    pub fn code(&self, column: &str, text: &str) -> Option<u32> {
        let categories = self.columns.get(column)?;
        categories.binary_search_by(|c| c.as_str().cmp(text)).ok().map(|i| i as u32)
    }

    pub fn decode(&self, column: &str, code: u32) -> Option<&str> {
        self.columns.get(column)?.get(code as usize).map(String::as_str)
    }
}

/// Encode one dataset. See [`label_encode_union`] for the multi-silo
/// variant that shares one code space.
pub fn label_encode(dataset: &Dataset) -> (Dataset, EncodingMap) {
    let (mut encoded, map) =
        label_encode_union(std::slice::from_ref(dataset)).expect("single dataset shares its own schema");
    (encoded.pop().expect("one dataset in, one out"), map)
}

/// Encode several datasets against one shared vocabulary built from the
/// union of their category texts. Silos that federate must share a code
/// space or their encoded features would not be comparable.
pub fn label_encode_union(
    datasets: &[Dataset],
) -> Result<(Vec<Dataset>, EncodingMap), DatasetError> {
    let Some(first) = datasets.first() else {
        return Ok((Vec::new(), EncodingMap::default()));
    };
    if datasets.iter().any(|d| d.schema() != first.schema()) {
        return Err(DatasetError::Schema(
            "all datasets must share one schema to share an encoding".into(),
        ));
    }
    let schema = first.schema();
    let positive = schema.positive_label_text().to_string();

    let mut vocab: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    let mut label_texts: BTreeMap<String, u8> = BTreeMap::new();
    for dataset in datasets {
        for row in dataset.rows() {
            for (i, col) in schema.columns().iter().enumerate() {
                let Some(text) = row[i].as_text() else { continue };
                match col.kind {
                    ColumnKind::Categorical => {
                        vocab.entry(col.name.clone()).or_default().insert(text.to_string());
                    }
                    ColumnKind::Label => {
                        let code = u8::from(text.eq_ignore_ascii_case(&positive));
                        label_texts.insert(text.to_string(), code);
                    }
                    _ => {}
                }
            }
        }
    }
    // Every categorical column gets an entry, even when it held no text.
    for col in schema.columns() {
        if col.kind == ColumnKind::Categorical {
            vocab.entry(col.name.clone()).or_default();
        }
    }

    let map = EncodingMap {
        columns: vocab.into_iter().map(|(k, v)| (k, v.into_iter().collect())).collect(),
        positive_label_text: positive.clone(),
        label_texts,
    };

    let encoded = datasets
        .iter()
        .map(|dataset| {
            let rows = dataset
                .rows()
                .iter()
                .map(|row| {
                    row.iter()
                        .enumerate()
                        .map(|(i, cell)| {
                            let col = &schema.columns()[i];
                            match (col.kind, cell) {
                                (ColumnKind::Categorical, Cell::Text(s)) => {
                                    let code = map
                                        .code(&col.name, s)
                                        .expect("vocabulary covers every observed text");
                                    Cell::Num(f64::from(code))
                                }
                                (ColumnKind::Label, Cell::Text(s)) => Cell::Num(f64::from(
                                    u8::from(s.eq_ignore_ascii_case(&positive)),
                                )),
                                _ => cell.clone(),
                            }
                        })
                        .collect()
                })
                .collect();
            dataset.replace_rows(rows)
        })
        .collect();
    Ok((encoded, map))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::schema::{Schema, SourceId};

    fn with_rows(rows: Vec<Vec<Cell>>) -> Dataset {
        Dataset::new(Schema::asd_screening(), SourceId::AdultsUci, rows).unwrap()
    }

    fn row(gender: &str, label: &str) -> Vec<Cell> {
        let mut r: Vec<Cell> = (0..10).map(|_| Cell::Num(0.0)).collect();
        r.push(Cell::Num(21.0));
        r.push(Cell::Text(gender.into()));
        r.push(Cell::Text("asian".into()));
        r.push(Cell::Text("india".into()));
        r.push(Cell::Text("adult".into()));
        r.push(Cell::Text(label.into()));
        r
    }

    #[test]
    fn codes_are_lexicographic() {
        let d = with_rows(vec![row("m", "NO"), row("f", "YES")]);
        let (encoded, map) = label_encode(&d);
        assert_eq!(map.code("gender", "f"), Some(0));
        assert_eq!(map.code("gender", "m"), Some(1));
        assert_eq!(encoded.rows()[0][11], Cell::Num(1.0));
        assert_eq!(encoded.rows()[1][11], Cell::Num(0.0));
    }

    #[test]
    fn positive_label_text_maps_to_one() {
        let d = with_rows(vec![row("m", "NO"), row("f", "YES")]);
        let (encoded, map) = label_encode(&d);
        assert_eq!(encoded.rows()[0][15], Cell::Num(0.0));
        assert_eq!(encoded.rows()[1][15], Cell::Num(1.0));
        assert_eq!(map.label_texts.get("YES"), Some(&1));
        assert_eq!(map.label_texts.get("NO"), Some(&0));
    }

    #[test]
    fn numeric_cells_pass_through() {
        let mut r = row("m", "NO");
        r[11] = Cell::Num(3.0);
        let d = with_rows(vec![r.clone()]);
        let (encoded, _) = label_encode(&d);
        assert_eq!(encoded.rows()[0][11], Cell::Num(3.0));
        assert_eq!(encoded.rows()[0][10], Cell::Num(21.0));
    }

    #[test]
    fn decode_round_trips_every_categorical_cell() {
        let d = with_rows(vec![row("m", "NO"), row("f", "YES"), row("other", "NO")]);
        let (encoded, map) = label_encode(&d);
        for (orig, enc) in d.rows().iter().zip(encoded.rows()) {
            let code = enc[11].as_num().unwrap() as u32;
            assert_eq!(map.decode("gender", code), orig[11].as_text());
        }
    }

    #[test]
    fn union_shares_one_code_space() {
        let a = with_rows(vec![row("m", "NO")]);
        let b = Dataset::new(
            Schema::asd_screening(),
            SourceId::AdultsKaggle,
            vec![row("f", "YES")],
        )
        .unwrap();
        let (encoded, map) = label_encode_union(&[a, b]).unwrap();
        assert_eq!(map.columns["gender"], vec!["f".to_string(), "m".to_string()]);
        assert_eq!(encoded[0].rows()[0][11], Cell::Num(1.0)); // m in shared space
        assert_eq!(encoded[1].rows()[0][11], Cell::Num(0.0)); // f in shared space
    }
}
