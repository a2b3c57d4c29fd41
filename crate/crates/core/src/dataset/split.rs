//! Seeded stratified train/test splitting.
//!
//! Rows are grouped by label, each group is shuffled with a seeded
//! generator, and a round-half-up share of each group becomes the test
//! side. Index lists come back in ascending row order so the split is a
//! stable function of `(labels, fraction, seed)` alone.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::table::PreparedDataset;
use super::DatasetError;

/// Split row indices into `(train, test)` preserving label balance.
pub fn stratified_split_indices(
    labels: &[u8],
    test_fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>), DatasetError> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(DatasetError::InvalidArgument(format!(
            "test fraction must lie strictly between 0 and 1, got {test_fraction}"
        )));
    }
    let mut negatives: Vec<usize> = Vec::new();
    let mut positives: Vec<usize> = Vec::new();
    for (i, &label) in labels.iter().enumerate() {
        if label == 0 {
            negatives.push(i);
        } else {
            positives.push(i);
        }
    }
    if negatives.is_empty() || positives.is_empty() {
        return Err(DatasetError::Stratification(
            "both label classes must be present to stratify".into(),
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::with_capacity(labels.len());
    let mut test = Vec::with_capacity(labels.len());
    // One generator, negatives first: fixes the stream layout.
    for group in [&mut negatives, &mut positives] {
        group.shuffle(&mut rng);
        let k = (test_fraction * group.len() as f64 + 0.5).floor() as usize;
        test.extend_from_slice(&group[..k]);
        train.extend_from_slice(&group[k..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Split a prepared dataset into `(train, test)` by label-stratified rows.
pub fn stratified_split(
    data: &PreparedDataset,
    test_fraction: f64,
    seed: u64,
) -> Result<(PreparedDataset, PreparedDataset), DatasetError> {
    let (train_idx, test_idx) = stratified_split_indices(&data.labels(), test_fraction, seed)?;
    Ok((data.subset(&train_idx), data.subset(&test_idx)))
}
