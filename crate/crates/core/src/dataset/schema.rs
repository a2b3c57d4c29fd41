//! Column schema and silo identifiers.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use super::DatasetError;

/// Number of binary questionnaire responses per record.
pub const RESPONSE_COLUMNS: usize = 10;

/// What a column holds and how its cells parse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ColumnKind {
    /// One questionnaire item, 0 or 1.
    BinaryResponse,
    Integer,
    Real,
    /// Free-text category, integer-coded by [`super::label_encode`].
    Categorical,
    /// The binary screening target.
    Label,
}

/// A named, typed column.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub kind: ColumnKind,
}

impl Column {
    pub fn new(name: impl Into<String>, kind: ColumnKind) -> Self {
        Self { name: name.into(), kind }
    }
}

/// Ordered column layout shared by the four silos.
///
/// Invariants, checked by [`Schema::new`]: exactly one `Label` column,
/// exactly ten `BinaryResponse` columns, and unique column names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schema {
    columns: Vec<Column>,
    positive_label_text: String,
}

impl Schema {
    pub fn new(
        columns: Vec<Column>,
        positive_label_text: impl Into<String>,
    ) -> Result<Self, DatasetError> {
        let responses = columns
            .iter()
            .filter(|c| c.kind == ColumnKind::BinaryResponse)
            .count();
        if responses != RESPONSE_COLUMNS {
            return Err(DatasetError::Schema(format!(
                "expected {RESPONSE_COLUMNS} binary-response columns, found {responses}"
            )));
        }
        let labels = columns.iter().filter(|c| c.kind == ColumnKind::Label).count();
        if labels != 1 {
            return Err(DatasetError::Schema(format!(
                "expected exactly one label column, found {labels}"
            )));
        }
        let mut names: Vec<&str> = columns.iter().map(|c| c.name.as_str()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(DatasetError::Schema("duplicate column names".into()));
        }
        Ok(Self { columns, positive_label_text: positive_label_text.into() })
    }

    /// The default screening layout: `A1_Score..A10_Score`, five
    /// demographic columns, and a `class_asd` label with positive text
    /// `YES`.
    pub fn asd_screening() -> Self {
        let mut columns: Vec<Column> = (1..=RESPONSE_COLUMNS)
            .map(|i| Column::new(format!("A{i}_Score"), ColumnKind::BinaryResponse))
            .collect();
        columns.push(Column::new("age", ColumnKind::Integer));
        columns.push(Column::new("gender", ColumnKind::Categorical));
        columns.push(Column::new("ethnicity", ColumnKind::Categorical));
        columns.push(Column::new("country_of_res", ColumnKind::Categorical));
        columns.push(Column::new("screening_type", ColumnKind::Categorical));
        columns.push(Column::new("class_asd", ColumnKind::Label));
        Self::new(columns, "YES").expect("default schema is valid")
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn positive_label_text(&self) -> &str {
        &self.positive_label_text
    }

    pub fn label_index(&self) -> usize {
        self.columns
            .iter()
            .position(|c| c.kind == ColumnKind::Label)
            .expect("schema invariant: one label column")
    }

    /// Indices of the ten response columns, in schema order.
    pub fn response_indices(&self) -> Vec<usize> {
        self.indices_of(ColumnKind::BinaryResponse)
    }

    /// Indices of the non-response, non-label feature columns.
    pub fn extra_indices(&self) -> Vec<usize> {
        self.columns
            .iter()
            .enumerate()
            .filter(|(_, c)| {
                !matches!(c.kind, ColumnKind::BinaryResponse | ColumnKind::Label)
            })
            .map(|(i, _)| i)
            .collect()
    }

    fn indices_of(&self, kind: ColumnKind) -> Vec<usize> {
        self.columns
            .iter()
            .enumerate()
            .filter(|(_, c)| c.kind == kind)
            .map(|(i, _)| i)
            .collect()
    }
}

/// One of the four public screening silos.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "kebab-case")]
pub enum SourceId {
    ChildrenUci,
    ChildrenKaggle,
    AdultsUci,
    AdultsKaggle,
}

impl SourceId {
    pub const ALL: [SourceId; 4] = [
        SourceId::ChildrenUci,
        SourceId::ChildrenKaggle,
        SourceId::AdultsUci,
        SourceId::AdultsKaggle,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            SourceId::ChildrenUci => "children-uci",
            SourceId::ChildrenKaggle => "children-kaggle",
            SourceId::AdultsUci => "adults-uci",
            SourceId::AdultsKaggle => "adults-kaggle",
        }
    }
}

impl fmt::Display for SourceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SourceId {
    type Err = DatasetError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SourceId::ALL
            .iter()
            .copied()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| {
                DatasetError::InvalidArgument(format!(
                    "unknown source id {s:?}; expected one of children-uci, \
                     children-kaggle, adults-uci, adults-kaggle"
                ))
            })
    }
}
