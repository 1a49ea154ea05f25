use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::State;
use crate::error::{Error, Result};
use crate::textprep::TokenStream;

/// Column names of an encoded row.
pub const CDC_FEATURES: [&str; 6] = ["gender", "race", "ethnicity", "state", "year_2019", "year_2020"];

const SCHEMA_VERSION: u32 = 1;

/// Whether a disease-type label denotes cardiovascular disease.
pub fn is_cvd(disease_type: &str) -> bool {
    matches!(
        disease_type.trim().to_lowercase().as_str(),
        "cvd" | "cardiovascular disease" | "cardiovascular"
    )
}

/// One row of the demographic table.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CdcRecord {
    pub gender: String,
    pub race: String,
    pub ethnicity: String,
    pub state: State,
    pub year: u16,
    pub disease_type: String,
    pub target: u8,
}

impl CdcRecord {
    /// Validates the year and derives `target` from `disease_type`.
    pub fn new(
        gender: &str,
        race: &str,
        ethnicity: &str,
        state: State,
        year: u16,
        disease_type: &str,
    ) -> Result<Self> {
        if year != 2019 && year != 2020 {
            return Err(Error::invalid(format!("year {year} not in {{2019, 2020}}")));
        }
        for (name, v) in [
            ("gender", gender),
            ("race", race),
            ("ethnicity", ethnicity),
            ("disease_type", disease_type),
        ] {
            if v.trim().is_empty() {
                return Err(Error::invalid(format!("empty {name}")));
            }
        }
        Ok(CdcRecord {
            gender: gender.trim().to_string(),
            race: race.trim().to_string(),
            ethnicity: ethnicity.trim().to_string(),
            state,
            year,
            disease_type: disease_type.trim().to_string(),
            target: u8::from(is_cvd(disease_type)),
        })
    }
}

/// Category-to-code tables for the four categorical columns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CdcSchema {
    pub version: u32,
    pub gender: BTreeMap<String, u32>,
    pub race: BTreeMap<String, u32>,
    pub ethnicity: BTreeMap<String, u32>,
    pub state: BTreeMap<String, u32>,
}

fn codes<'a>(values: impl Iterator<Item = &'a str>) -> BTreeMap<String, u32> {
    let mut sorted: Vec<&str> = values.collect();
    sorted.sort_unstable();
    sorted.dedup();
    sorted
        .into_iter()
        .enumerate()
        .map(|(i, v)| (v.to_string(), i as u32))
        .collect()
}

impl CdcSchema {
    /// Codes each observed value by its rank in sorted order; states use
    /// their fixed list position.
    pub fn fit(records: &[CdcRecord]) -> Self {
        CdcSchema {
            version: SCHEMA_VERSION,
            gender: codes(records.iter().map(|r| r.gender.as_str())),
            race: codes(records.iter().map(|r| r.race.as_str())),
            ethnicity: codes(records.iter().map(|r| r.ethnicity.as_str())),
            state: State::ALL
                .iter()
                .map(|s| (s.code().to_string(), s.index() as u32))
                .collect(),
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(path, json + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let src = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let schema: CdcSchema = serde_json::from_str(&src)?;
        if schema.version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "schema version {} (expected {SCHEMA_VERSION})",
                schema.version
            )));
        }
        Ok(schema)
    }
}

fn lookup(table: &BTreeMap<String, u32>, field: &'static str, value: &str) -> Result<f64> {
    table
        .get(value)
        .map(|&c| f64::from(c))
        .ok_or_else(|| Error::UnseenCategory {
            field,
            value: value.to_string(),
        })
}

/// `[gender, race, ethnicity, state, year_2019, year_2020]`. Unseen category
/// values are errors.
pub fn encode_cdc(record: &CdcRecord, schema: &CdcSchema) -> Result<Vec<f64>> {
    Ok(vec![
        lookup(&schema.gender, "gender", &record.gender)?,
        lookup(&schema.race, "race", &record.race)?,
        lookup(&schema.ethnicity, "ethnicity", &record.ethnicity)?,
        lookup(&schema.state, "state", record.state.code())?,
        f64::from(u8::from(record.year == 2019)),
        f64::from(u8::from(record.year == 2020)),
    ])
}

/// One token per field of an encoded row (`gender_1`, `year_2020`, ...),
/// for the models that consume token presence. Codes are rounded, so
/// interpolated rows map to the nearest category.
pub fn cdc_tokens(x: &[f64]) -> TokenStream {
    let year = if x[4] >= x[5] { "year_2019" } else { "year_2020" };
    TokenStream::new(
        CDC_FEATURES[..4]
            .iter()
            .zip(x)
            .map(|(name, v)| format!("{name}_{}", v.round() as i64))
            .chain(std::iter::once(year.to_string())),
    )
}
