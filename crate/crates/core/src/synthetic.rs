//! Deterministic synthetic screening fixtures.
//!
//! Four silo files shaped like real screening exports: the standard
//! column layout, YES/NO labels, a few duplicate submissions, and a
//! sprinkle of missing demographic cells. Labels follow the ten-item
//! flag rule exactly, so the union of the silos is cleanly separable.
//!
//! The silos are *not* exchangeable, though. Each one covers a
//! deliberately different slice of the score range — one site never saw
//! mid-range positives, another never saw mild negatives — so a model
//! trained on any single silo places its decision boundary where that
//! silo's gap is, not where the population's boundary is. Models that
//! pool information across silos (parameter averaging or a cross-site
//! ensemble) see the whole range and recover the true threshold. That
//! is the regime the evaluation harness is meant to exhibit.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::dataset::{parse_csv, qchat_score, Dataset, DatasetError, Schema, SourceId};

/// Column offsets within [`Schema::asd_screening`] row order.
const AGE_IDX: usize = 10;
const ETHNICITY_IDX: usize = 12;
const COUNTRY_IDX: usize = 13;
const LABEL_IDX: usize = 15;

/// How one silo's respondent population is skewed.
struct SiloProfile {
    id: SourceId,
    /// `(score, how many respondents with that score)`. Scores absent
    /// here are this silo's blind spot.
    bands: &'static [(u8, usize)],
    age_range: std::ops::RangeInclusive<u32>,
    ethnicities: &'static [&'static str],
    countries: &'static [&'static str],
    screening_type: &'static str,
    /// Rows re-submitted verbatim (entered twice at the clinic).
    duplicates: usize,
}

/// The two children silos miss complementary bands around the flag
/// threshold: one lacks score 5 (its positives cluster at 4, 6, and 7
/// up), the other recorded no mild cases at all (scores 1–3 absent,
/// every negative is an all-zero response). Both adult silos lack
/// scores 4–5 and saw almost no 6s, so even merging the adult sites
/// leaves the same blind spot where most borderline respondents live.
fn profiles() -> [SiloProfile; 4] {
    [
        SiloProfile {
            id: SourceId::ChildrenUci,
            bands: &[(0, 12), (1, 14), (2, 22), (3, 32), (4, 48), (6, 10), (7, 14), (8, 10), (9, 5), (10, 3)],
            age_range: 4..=11,
            ethnicities: &["asian", "white-european", "middle-eastern", "south-asian", "hispanic", "others"],
            countries: &["jordan", "united-kingdom", "india", "united-states", "egypt", "austria"],
            screening_type: "child",
            duplicates: 5,
        },
        SiloProfile {
            id: SourceId::ChildrenKaggle,
            bands: &[(0, 56), (4, 42), (5, 38), (6, 18), (7, 9), (8, 4), (9, 2), (10, 1)],
            age_range: 4..=11,
            ethnicities: &["white-european", "asian", "black", "latino", "middle-eastern", "others"],
            countries: &["united-states", "brazil", "australia", "new-zealand", "canada", "armenia"],
            screening_type: "child",
            duplicates: 5,
        },
        SiloProfile {
            id: SourceId::AdultsUci,
            bands: &[(0, 10), (1, 12), (2, 16), (3, 36), (6, 4), (7, 26), (8, 15), (9, 8), (10, 3)],
            age_range: 18..=59,
            ethnicities: &["white-european", "asian", "middle-eastern", "black", "south-asian", "others"],
            countries: &["united-states", "united-arab-emirates", "india", "new-zealand", "jordan", "france"],
            screening_type: "adult",
            duplicates: 4,
        },
        SiloProfile {
            id: SourceId::AdultsKaggle,
            bands: &[(0, 12), (1, 10), (2, 14), (3, 36), (6, 5), (7, 28), (8, 14), (9, 8), (10, 3)],
            age_range: 18..=59,
            ethnicities: &["asian", "white-european", "hispanic", "black", "turkish", "others"],
            countries: &["india", "united-states", "mexico", "russia", "italy", "afghanistan"],
            screening_type: "adult",
            duplicates: 4,
        },
    ]
}

/// One silo's CSV text. Deterministic in `(id, seed)`.
pub fn generate_silo_csv(id: SourceId, seed: u64) -> String {
    let profile = profiles()
        .into_iter()
        .find(|p| p.id == id)
        .expect("every source id has a profile");
    let rank = SourceId::ALL.iter().position(|&s| s == id).expect("id is in ALL") as u64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(rank));

    let mut rows: Vec<Vec<String>> = Vec::new();
    for &(score, count) in profile.bands {
        for _ in 0..count {
            rows.push(make_row(score, &profile, &mut rng));
        }
    }
    // Interleave the score bands the way arrival order would.
    rows.shuffle(&mut rng);

    // A few respondents skipped a demographic question. Labels and item
    // responses are always present; only rows, never answers, go missing
    // from the screening instrument itself.
    let gaps = rows.len() / 32;
    for k in 0..gaps {
        let row = rng.random_range(0..rows.len());
        let col = [AGE_IDX, ETHNICITY_IDX, COUNTRY_IDX][k % 3];
        let token = if k % 2 == 0 { "?" } else { "" };
        rows[row][col] = token.to_string();
    }

    // Verbatim re-submissions, inserted at arbitrary positions.
    for _ in 0..profile.duplicates {
        let src = rng.random_range(0..rows.len());
        let dup = rows[src].clone();
        let at = rng.random_range(0..=rows.len());
        rows.insert(at, dup);
    }

    let schema = Schema::asd_screening();
    let header: Vec<&str> = schema.columns().iter().map(|c| c.name.as_str()).collect();
    let mut out = header.join(",");
    out.push('\n');
    for row in &rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// One respondent row with the given total score. Which items were
/// answered "yes" is random; the label follows the flag rule exactly.
fn make_row(score: u8, profile: &SiloProfile, rng: &mut ChaCha8Rng) -> Vec<String> {
    let mut items = [0u8; 10];
    let mut order: Vec<usize> = (0..10).collect();
    order.shuffle(rng);
    for &i in order.iter().take(score as usize) {
        items[i] = 1;
    }
    let (total, flag) = qchat_score(&items);
    debug_assert_eq!(total, score);

    let mut row: Vec<String> = items.iter().map(|r| r.to_string()).collect();
    row.push(rng.random_range(profile.age_range.clone()).to_string());
    row.push((*["f", "m"].choose(rng).expect("non-empty")).to_string());
    row.push((*profile.ethnicities.choose(rng).expect("non-empty")).to_string());
    row.push((*profile.countries.choose(rng).expect("non-empty")).to_string());
    row.push(profile.screening_type.to_string());
    row.push(if flag == 1 { "YES" } else { "NO" }.to_string());
    debug_assert_eq!(row.len(), LABEL_IDX + 1);
    row
}

/// All four silo CSVs, in canonical source order.
pub fn generate_fixture_csvs(seed: u64) -> Vec<(SourceId, String)> {
    SourceId::ALL.iter().map(|&id| (id, generate_silo_csv(id, seed))).collect()
}

/// The four silos parsed back into raw datasets.
pub fn generate_fixture_datasets(seed: u64) -> Result<Vec<Dataset>, DatasetError> {
    let schema = Schema::asd_screening();
    generate_fixture_csvs(seed)
        .into_iter()
        .map(|(id, csv)| parse_csv(&csv, &schema, id))
        .collect()
}
