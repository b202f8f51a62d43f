//! TOML model files for simulation.
//!
//! A stationary model is a flat table with a `model` key:
//!
//! ```toml
//! model = "jitter"
//! nu = 0.3
//! sigma1 = 0.06
//! sigma2 = 0.12
//! ```
//!
//! A rate profile lists segments, each a model table with a `length`:
//!
//! ```toml
//! [[segment]]
//! model = "renewal"
//! mean = 0.4
//! sd = 0.2
//! length = 150
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{MftError, Result};
use crate::simulate::{IsiModel, Segment};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelSpec {
    Piecewise {
        #[serde(rename = "segment")]
        segments: Vec<Segment>,
    },
    Stationary(IsiModel),
}

impl ModelSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            ModelSpec::Stationary(m) => m.validate(),
            ModelSpec::Piecewise { segments } => {
                if segments.is_empty() {
                    return Err(MftError::ModelSpec("no segments".into()));
                }
                segments.iter().try_for_each(Segment::validate)
            }
        }
    }

    /// Segments for a recording of length `duration`; a stationary model
    /// becomes one segment, a profile must already sum to `duration` if given.
    pub fn segments(&self, duration: Option<f64>) -> Result<Vec<Segment>> {
        match self {
            ModelSpec::Stationary(m) => {
                let d = duration.ok_or_else(|| {
                    MftError::ModelSpec("a stationary model needs a duration".into())
                })?;
                Ok(vec![Segment::new(m.clone(), d)?])
            }
            ModelSpec::Piecewise { segments } => {
                let total: f64 = segments.iter().map(|s| s.length).sum();
                if let Some(d) = duration {
                    if (d - total).abs() > 1e-9 * total.max(1.0) {
                        return Err(MftError::ModelSpec(format!(
                            "segments cover {total} s but T = {d} was requested"
                        )));
                    }
                }
                Ok(segments.clone())
            }
        }
    }
}

pub fn parse_model_spec(text: &str) -> Result<ModelSpec> {
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| MftError::ModelSpec(e.to_string()))?;
    let spec = if table.contains_key("segment") {
        let segments: Vec<Segment> = table["segment"]
            .clone()
            .try_into()
            .map_err(|e: toml::de::Error| MftError::ModelSpec(format!("segment: {e}")))?;
        if table.len() > 1 {
            return Err(MftError::ModelSpec(
                "a segment list cannot be mixed with top-level keys".into(),
            ));
        }
        ModelSpec::Piecewise { segments }
    } else {
        let model: IsiModel = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| MftError::ModelSpec(e.to_string()))?;
        ModelSpec::Stationary(model)
    };
    spec.validate()
        .map_err(|e| MftError::ModelSpec(e.to_string()))?;
    Ok(spec)
}

pub fn format_model_spec(spec: &ModelSpec) -> Result<String> {
    toml::to_string(spec).map_err(|e| MftError::ModelSpec(e.to_string()))
}
