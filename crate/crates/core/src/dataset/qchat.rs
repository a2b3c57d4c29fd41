//! Ten-item screening score and its decision flag.

/// A respondent is flagged when the summed score is strictly above this.
pub const QCHAT_FLAG_THRESHOLD: u8 = 3;

/// Sum the ten binary item responses and derive the flag.
///
/// Returns `(score, flag)` where `flag` is 1 when `score` exceeds
/// [`QCHAT_FLAG_THRESHOLD`] and 0 otherwise.
pub fn qchat_score(responses: &[u8; 10]) -> (u8, u8) {
    debug_assert!(responses.iter().all(|&r| r <= 1), "responses must be 0 or 1");
    let score: u8 = responses.iter().sum();
    (score, u8::from(score > QCHAT_FLAG_THRESHOLD))
}
