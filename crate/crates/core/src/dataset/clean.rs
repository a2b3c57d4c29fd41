//! Duplicate removal and missing-value handling.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use super::schema::ColumnKind;
use super::table::{Cell, Dataset};
use super::DatasetError;

/// Drop exact duplicate rows, keeping the first occurrence and the
/// relative order of survivors. Rows compare cell-by-cell with text
/// case-folded (cells are trimmed at parse time).
pub fn deduplicate(dataset: &Dataset) -> Dataset {
    deduplicate_counted(dataset).0
}

/// [`deduplicate`] plus the number of rows removed.
pub fn deduplicate_counted(dataset: &Dataset) -> (Dataset, usize) {
    let mut seen = HashSet::new();
    let mut kept = Vec::with_capacity(dataset.len());
    for row in dataset.rows() {
        let key: Vec<_> = row.iter().map(Cell::dedup_key).collect();
        if seen.insert(key) {
            kept.push(row.clone());
        }
    }
    let removed = dataset.len() - kept.len();
    (dataset.replace_rows(kept), removed)
}

/// How to repair missing cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MissingPolicy {
    /// Drop any row with a missing cell (default: conservative and
    /// reproducible).
    #[default]
    DropRow,
    /// Fill categorical and binary-response cells with the column mode,
    /// numeric cells with the column median. Rows with a missing label
    /// are still dropped; a label cannot be invented.
    ModeImpute,
}

/// Counters produced while repairing a dataset.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MissingStats {
    pub rows_dropped: usize,
    pub cells_imputed: usize,
    pub missing_per_column: BTreeMap<String, usize>,
}

/// Apply the missing-value policy. Deterministic: imputed values depend
/// only on the column contents, with ties broken toward the smallest
/// value.
pub fn handle_missing(dataset: &Dataset, policy: MissingPolicy) -> Result<Dataset, DatasetError> {
    handle_missing_counted(dataset, policy).map(|(d, _)| d)
}

/// [`handle_missing`] plus per-column counters for quality reports.
pub fn handle_missing_counted(
    dataset: &Dataset,
    policy: MissingPolicy,
) -> Result<(Dataset, MissingStats), DatasetError> {
    let mut stats = MissingStats::default();
    for row in dataset.rows() {
        for (cell, col) in row.iter().zip(dataset.schema().columns()) {
            if cell.is_missing() {
                *stats.missing_per_column.entry(col.name.clone()).or_default() += 1;
            }
        }
    }

    let label_idx = dataset.schema().label_index();
    let rows: Vec<&Vec<Cell>> = dataset
        .rows()
        .iter()
        .filter(|row| !row[label_idx].is_missing())
        .collect();

    let repaired = match policy {
        MissingPolicy::DropRow => rows
            .into_iter()
            .filter(|row| row.iter().all(|c| !c.is_missing()))
            .cloned()
            .collect(),
        MissingPolicy::ModeImpute => {
            let fills = column_fills(dataset, &rows)?;
            rows.into_iter()
                .map(|row| {
                    row.iter()
                        .enumerate()
                        .map(|(i, cell)| {
                            if cell.is_missing() {
                                stats.cells_imputed += 1;
                                fills[i].clone().expect("fill exists for imputed column")
                            } else {
                                cell.clone()
                            }
                        })
                        .collect()
                })
                .collect()
        }
    };

    let out = dataset.replace_rows(repaired);
    stats.rows_dropped = dataset.len() - out.len();
    Ok((out, stats))
}

/// Per-column replacement values, computed only for columns that need
/// one. A column that is missing everywhere it is needed has no
/// observed values and is an error.
fn column_fills(
    dataset: &Dataset,
    rows: &[&Vec<Cell>],
) -> Result<Vec<Option<Cell>>, DatasetError> {
    let mut fills = Vec::with_capacity(dataset.schema().columns().len());
    for (i, col) in dataset.schema().columns().iter().enumerate() {
        let needed = rows.iter().any(|row| row[i].is_missing());
        if !needed || col.kind == ColumnKind::Label {
            fills.push(None);
            continue;
        }
        let present: Vec<&Cell> = rows.iter().map(|r| &r[i]).filter(|c| !c.is_missing()).collect();
        if present.is_empty() {
            return Err(DatasetError::Imputation(col.name.clone()));
        }
        let fill = match col.kind {
            ColumnKind::Integer | ColumnKind::Real => Cell::Num(median(&present)),
            ColumnKind::BinaryResponse | ColumnKind::Categorical => mode(&present),
            ColumnKind::Label => unreachable!("label handled above"),
        };
        fills.push(Some(fill));
    }
    Ok(fills)
}

fn median(cells: &[&Cell]) -> f64 {
    let mut values: Vec<f64> = cells.iter().filter_map(|c| c.as_num()).collect();
    values.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

/// Most frequent value; ties go to the smallest (numeric order for
/// numbers, lexicographic for text).
fn mode(cells: &[&Cell]) -> Cell {
    let mut text_counts: BTreeMap<&str, usize> = BTreeMap::new();
    let mut num_counts: BTreeMap<u64, (f64, usize)> = BTreeMap::new();
    for cell in cells {
        match cell {
            Cell::Text(s) => *text_counts.entry(s).or_default() += 1,
            Cell::Num(x) => {
                // total order via sortable bit pattern (values are finite)
                let key = sortable_bits(*x);
                num_counts.entry(key).or_insert((*x, 0)).1 += 1;
            }
            Cell::Missing => {}
        }
    }
    // Maps iterate in ascending key order; keeping a strictly better
    // count means the smallest key wins a tie.
    let best_text = argmax_first(text_counts);
    let best_num = argmax_first(num_counts.into_values());
    match (best_text, best_num) {
        (Some((t, nt)), Some((x, nx))) => {
            if nt >= nx {
                Cell::Text(t.to_string())
            } else {
                Cell::Num(x)
            }
        }
        (Some((t, _)), None) => Cell::Text(t.to_string()),
        (None, Some((x, _))) => Cell::Num(x),
        (None, None) => unreachable!("caller checked present values exist"),
    }
}

fn argmax_first<K>(iter: impl IntoIterator<Item = (K, usize)>) -> Option<(K, usize)> {
    let mut best: Option<(K, usize)> = None;
    for (key, count) in iter {
        if best.as_ref().is_none_or(|&(_, b)| count > b) {
            best = Some((key, count));
        }
    }
    best
}

fn sortable_bits(x: f64) -> u64 {
    let bits = x.to_bits();
    if bits >> 63 == 0 {
        bits ^ (1 << 63)
    } else {
        !bits
    }
}
