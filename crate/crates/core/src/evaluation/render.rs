//! Report rendering: the tab-separated comparison table and the
//! full-precision JSON form.
//!
//! The table mirrors the published layout — columns Method, Classifier,
//! PR, R, Fs, Acc; percentages rounded half-up to integers; the method
//! label printed once per group. `Fs` renders the weighted F1, and the
//! JSON keeps both F1 variants at full precision (see the module notes
//! on why the two can differ).

use crate::canonical_json_bytes;
use crate::classifiers::ClassifierKind;

use super::experiment::{Condition, MetricsReport};
use super::EvalError;

/// One rendered table line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableRow {
    pub method: String,
    pub classifier: String,
    pub pr: u8,
    pub r: u8,
    pub fs: u8,
    pub acc: u8,
}

/// Round a [0,1] value half-up to a whole percentage.
pub fn percent(value: f64) -> u8 {
    (value * 100.0 + 0.5).floor().clamp(0.0, 100.0) as u8
}

/// The table's Method column entry for a report.
pub fn method_label(report: &MetricsReport) -> String {
    match report.condition {
        Condition::RawSingleSite => match report.site.as_deref() {
            Some("adults") => "Raw Data (Adults)".to_string(),
            Some(site) => format!("Raw Data ({site})"),
            None => "Raw Data".to_string(),
        },
        Condition::Fedavg => "Federated learning (FedAvg)".to_string(),
        Condition::MetaVote => "Federated learning (meta-vote)".to_string(),
        Condition::PooledDiagnostic => "Pooled (diagnostic)".to_string(),
    }
}

fn classifier_label(kind: ClassifierKind) -> &'static str {
    match kind {
        ClassifierKind::Svc => "SVC",
        ClassifierKind::Dt => "DT",
        ClassifierKind::Rf => "RF",
    }
}

/// Convert reports to table rows (PR = precision, R = recall,
/// Fs = weighted F1, Acc = accuracy).
pub fn table_rows(reports: &[MetricsReport]) -> Vec<TableRow> {
    reports
        .iter()
        .map(|r| TableRow {
            method: method_label(r),
            classifier: classifier_label(r.classifier_kind).to_string(),
            pr: percent(r.metrics.precision),
            r: percent(r.metrics.recall),
            fs: percent(r.metrics.f1_weighted),
            acc: percent(r.metrics.accuracy),
        })
        .collect()
}

/// Render rows in the published layout: tab-separated, the method label
/// only on the first row of its group.
pub fn render_rows(rows: &[TableRow]) -> String {
    let mut out = String::from("Method\t\tClassifier\tPR\tR\tFs\tAcc\n");
    let mut last = String::new();
    for row in rows {
        let method = if row.method == last {
            ""
        } else {
            last.clone_from(&row.method);
            row.method.as_str()
        };
        out.push_str(&format!(
            "{method}\t\t{}\t{}%\t{}%\t{}%\t{}%\n",
            row.classifier, row.pr, row.r, row.fs, row.acc
        ));
    }
    out
}

/// Render reports as the comparison table.
pub fn render_table(reports: &[MetricsReport]) -> String {
    render_rows(&table_rows(reports))
}

/// Render reports as canonical JSON (sorted keys, full precision).
pub fn render_json(reports: &[MetricsReport]) -> Vec<u8> {
    canonical_json_bytes(&reports)
}

/// Parse reports back from their JSON rendering.
pub fn parse_reports(bytes: &[u8]) -> Result<Vec<MetricsReport>, EvalError> {
    serde_json::from_slice(bytes).map_err(|e| EvalError::Parse(e.to_string()))
}

/// The published comparison numbers, pinned for `--echo-paper-table`:
/// the layout reference the renderer must reproduce.
pub fn reference_table_rows() -> Vec<TableRow> {
    let row = |method: &str, classifier: &str, pr, r, fs, acc| TableRow {
        method: method.to_string(),
        classifier: classifier.to_string(),
        pr,
        r,
        fs,
        acc,
    };
    vec![
        row("Raw Data (Adults)", "DT", 85, 15, 75, 62),
        row("Raw Data (Adults)", "RF", 83, 49, 81, 53),
        row("Raw Data (Adults)", "SVC", 86, 52, 82, 63),
        row("Federated learning", "DT", 95, 94, 95, 94),
        row("Federated learning", "RF", 95, 94, 95, 94),
        row("Federated learning", "SVC", 99, 99, 99, 99),
    ]
}
