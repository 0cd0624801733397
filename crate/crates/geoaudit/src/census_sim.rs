//! Deterministic census-style table generator.
//!
//! Emits comma-separated text in the classic 15-column census income layout
//! (age, workclass, fnlwgt, education, education-num, marital-status,
//! occupation, relationship, race, sex, capital-gain, capital-loss,
//! hours-per-week, native-country, income) so the full ingestion path can be
//! exercised without shipping the original file.
//!
//! The generated population is built to exhibit the phenomena the toolkit
//! measures: income is a noisy non-linear function of age, education and
//! hours worked; `capital-gain` leaks the final label almost directly;
//! `relationship=Husband` carries a softer demographic correlation. A small
//! fraction of rows carries the `?` missing marker in workclass/occupation.

use crate::dataprep::{ColumnSpec, FeatureSchema};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct CensusSimConfig {
    pub n: usize,
    pub seed: u64,
    /// Probability that a positive non-Husband row receives a recorded
    /// capital gain.
    pub leak_rate: f64,
    /// Probability that a positive Husband row receives a recorded capital
    /// gain. Kept below `leak_rate` so "no recorded gain but Husband" stays
    /// genuine positive evidence, mirroring how the real table's gains
    /// concentrate in a subpopulation.
    pub husband_leak_rate: f64,
    /// Probability that the merit-derived label is flipped.
    pub label_noise: f64,
    /// P(relationship=Husband | income positive). A strong household proxy
    /// for the label, second only to the capital-gain leak.
    pub husband_pos_rate: f64,
    /// P(relationship=Husband | income negative).
    pub husband_neg_rate: f64,
    /// Fraction of rows with `?` in workclass/occupation.
    pub missing_rate: f64,
}

impl Default for CensusSimConfig {
    fn default() -> Self {
        CensusSimConfig {
            n: 6000,
            seed: 0,
            leak_rate: 0.92,
            husband_leak_rate: 0.75,
            label_noise: 0.12,
            husband_pos_rate: 0.22,
            husband_neg_rate: 0.015,
            missing_rate: 0.04,
        }
    }
}

const EDUCATION_NAMES: [&str; 16] = [
    "Preschool",
    "1st-4th",
    "5th-6th",
    "7th-8th",
    "9th",
    "10th",
    "11th",
    "12th",
    "HS-grad",
    "Some-college",
    "Assoc-voc",
    "Assoc-acdm",
    "Bachelors",
    "Masters",
    "Prof-school",
    "Doctorate",
];

const WORKCLASSES: [&str; 6] = [
    "Private",
    "Self-emp-not-inc",
    "Self-emp-inc",
    "Federal-gov",
    "Local-gov",
    "State-gov",
];

const OCCUPATIONS: [&str; 8] = [
    "Tech-support",
    "Craft-repair",
    "Sales",
    "Exec-managerial",
    "Prof-specialty",
    "Machine-op-inspct",
    "Adm-clerical",
    "Other-service",
];

const RELATIONSHIPS: [&str; 6] = [
    "Husband",
    "Wife",
    "Not-in-family",
    "Own-child",
    "Unmarried",
    "Other-relative",
];

const MARITAL: [&str; 4] = [
    "Married-civ-spouse",
    "Never-married",
    "Divorced",
    "Widowed",
];

const RACES: [&str; 3] = ["White", "Black", "Asian-Pac-Islander"];
const COUNTRIES: [&str; 3] = ["United-States", "Mexico", "Germany"];

/// Schema matching the generated (and the original) 15-column layout.
pub fn schema() -> FeatureSchema {
    FeatureSchema {
        columns: vec![
            ColumnSpec::numeric("age"),
            ColumnSpec::categorical("workclass", &WORKCLASSES),
            ColumnSpec::ignored("fnlwgt"),
            ColumnSpec::ignored("education"),
            ColumnSpec::numeric("education-num"),
            ColumnSpec::categorical("marital-status", &MARITAL),
            ColumnSpec::categorical("occupation", &OCCUPATIONS),
            ColumnSpec::categorical("relationship", &RELATIONSHIPS),
            ColumnSpec::categorical("race", &RACES),
            ColumnSpec::categorical("sex", &["Male", "Female"]),
            ColumnSpec::numeric("capital-gain"),
            ColumnSpec::numeric("capital-loss"),
            ColumnSpec::numeric("hours-per-week"),
            ColumnSpec::categorical("native-country", &COUNTRIES),
            ColumnSpec::categorical("income", &["<=50K", ">50K"]),
        ],
        target_column: "income".into(),
        positive_label: ">50K".into(),
    }
}

/// The default 9-feature encoding (D=9).
pub fn default_features() -> Vec<String> {
    [
        "age",
        "education-num",
        "hours-per-week",
        "capital-gain",
        "capital-loss",
        "sex=Male",
        "relationship=Husband",
        "marital-status=Married-civ-spouse",
        "workclass=Private",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect()
}

fn pick<'a>(rng: &mut ChaCha8Rng, items: &[&'a str]) -> &'a str {
    items[rng.gen_range(0..items.len())]
}

/// Generate the table as comma-separated text (no header, one row per line).
pub fn generate_text(cfg: &CensusSimConfig) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut out = String::with_capacity(cfg.n * 96);
    for _ in 0..cfg.n {
        let age = rng.gen_range(17..=75u32);
        let edu = rng.gen_range(1..=16u32);
        let hours = rng.gen_range(10..=79u32);

        // non-linear merit rule: parity of three threshold bits
        let merit =
            ((age > 46) as u8 + (edu > 8) as u8 + (hours > 44) as u8) % 2 == 1;
        let label = merit ^ rng.gen_bool(cfg.label_noise);

        let husband_rate = if label {
            cfg.husband_pos_rate
        } else {
            cfg.husband_neg_rate
        };
        let husband = rng.gen_bool(husband_rate);
        let relationship = if husband {
            "Husband"
        } else {
            pick(&mut rng, &RELATIONSHIPS[1..])
        };
        let sex = if husband {
            "Male"
        } else if relationship == "Wife" {
            "Female"
        } else if rng.gen_bool(0.5) {
            "Male"
        } else {
            "Female"
        };
        let marital = if husband || relationship == "Wife" {
            "Married-civ-spouse"
        } else {
            pick(&mut rng, &MARITAL[1..])
        };

        let row_leak = if husband {
            cfg.husband_leak_rate
        } else {
            cfg.leak_rate
        };
        let gain: u32 = if label && rng.gen_bool(row_leak) {
            let u: f64 = rng.gen();
            (5000.0 + u * 1500.0) as u32
        } else if !label && rng.gen_bool(0.005) {
            rng.gen_range(1000..6500)
        } else {
            0
        };
        let loss: u32 = if rng.gen_bool(0.04) {
            rng.gen_range(100..2000)
        } else {
            0
        };

        let missing = rng.gen_bool(cfg.missing_rate);
        let workclass = if missing {
            "?"
        } else if rng.gen_bool(0.7) {
            "Private"
        } else {
            pick(&mut rng, &WORKCLASSES[1..])
        };
        let occupation = if missing { "?" } else { pick(&mut rng, &OCCUPATIONS) };

        let fnlwgt = rng.gen_range(20000..400000u32);
        let race = pick(&mut rng, &RACES);
        let country = if rng.gen_bool(0.9) {
            "United-States"
        } else {
            pick(&mut rng, &COUNTRIES[1..])
        };
        let income = if label { ">50K" } else { "<=50K" };

        out.push_str(&format!(
            "{age},{workclass},{fnlwgt},{education},{edu},{marital},{occupation},{relationship},{race},{sex},{gain},{loss},{hours},{country},{income}\n",
            education = EDUCATION_NAMES[(edu - 1) as usize],
        ));
    }
    out
}

/// Write the generated table to a file.
pub fn write_csv(cfg: &CensusSimConfig, path: &str) -> crate::Result<()> {
    std::fs::write(path, generate_text(cfg)).map_err(|e| crate::Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataprep::{encode_standardize, parse_table};

    #[test]
    fn generated_text_parses_under_schema() {
        let cfg = CensusSimConfig {
            n: 500,
            ..Default::default()
        };
        let raw = parse_table(&generate_text(&cfg), &schema()).unwrap();
        assert!(raw.dropped_missing > 0, "expected some ? rows");
        assert!(raw.rows.len() + raw.dropped_missing == 500);
        let data = encode_standardize(&raw, &schema(), &default_features()).unwrap();
        assert_eq!(data.d(), 9);
    }

    #[test]
    fn generation_is_deterministic() {
        let cfg = CensusSimConfig {
            n: 200,
            seed: 7,
            ..Default::default()
        };
        assert_eq!(generate_text(&cfg), generate_text(&cfg));
    }

    #[test]
    fn labels_roughly_balanced() {
        let cfg = CensusSimConfig {
            n: 4000,
            ..Default::default()
        };
        let raw = parse_table(&generate_text(&cfg), &schema()).unwrap();
        let pos = raw.rows.iter().filter(|r| r[14] == ">50K").count() as f64
            / raw.rows.len() as f64;
        assert!((pos - 0.5).abs() < 0.08, "positive rate {pos}");
    }
}
