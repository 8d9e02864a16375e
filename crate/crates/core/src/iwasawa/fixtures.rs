//! Layer data shipped with the crate: class groups of the first layers of
//! the anti-cyclotomic Z_3-tower for a set of imaginary quadratic fields.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{IwasawaError, LayerData};
use crate::bqf::AbelianPGroup;

/// Raw JSON record.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixtureRecord {
    pub d: u64,
    pub p: u64,
    #[serde(rename = "A")]
    pub a: Vec<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capitulates: Option<bool>,
    pub source: String,
}

impl FixtureRecord {
    pub fn groups(&self) -> Result<Vec<AbelianPGroup>, IwasawaError> {
        self.a
            .iter()
            .map(|e| AbelianPGroup::new(self.p, e.clone()).map_err(IwasawaError::from))
            .collect()
    }

    /// Layer data with the ramification hypothesis holding from `ramified_from`.
    pub fn to_layer_data(&self, ramified_from: u32) -> Result<LayerData, IwasawaError> {
        LayerData::new(
            self.d,
            self.p,
            self.groups()?,
            ramified_from,
            self.capitulates,
        )
    }
}

const BUILTIN: &str = include_str!("../../fixtures/tables.json");

pub fn builtin() -> Vec<FixtureRecord> {
    serde_json::from_str(BUILTIN).expect("bundled fixtures parse")
}

pub fn load(path: &Path) -> Result<Vec<FixtureRecord>, IwasawaError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| IwasawaError::Fixtures(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| IwasawaError::Fixtures(e.to_string()))
}

pub fn find(records: &[FixtureRecord], d: u64, p: u64) -> Option<&FixtureRecord> {
    records.iter().find(|r| r.d == d && r.p == p)
}
