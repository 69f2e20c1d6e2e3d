//! Body configuration files: a TOML document mapping labels to body trees,
//! with optional run defaults that command-line flags override.
//!
//! ```toml
//! [run]
//! n = 3
//! seed = 7
//!
//! [bodies.K]
//! kind = "counterexample_K"
//! a = 2.0
//! b = 2.0
//!
//! [bodies.M]
//! kind = "hyperbolic_transform"
//! of = { kind = "counterexample_K", a = 2.0, b = 2.0 }
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use cxhyp::bodies::BodySpec;
use serde::Deserialize;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunDefaults {
    pub n: Option<usize>,
    pub level: Option<usize>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub count: Option<usize>,
    pub h: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub run: RunDefaults,
    #[serde(default)]
    pub bodies: BTreeMap<String, BodySpec>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        toml::from_str(&text).map_err(|e| format!("invalid config {}: {e}", path.display()))
    }
}
