//! The JSON instance file.
//!
//! ```json
//! {"version":1, "n":7, "m":5, "delta":3, "kind":"regular",
//!  "assignments":[[0,1,2], ...], "sigma":[0,1], "outcomes":[1,1,1,0,0]}
//! ```
//!
//! All indices are 0-based. `outcomes` is optional on input and, when present,
//! must equal the encoding of `sigma`. Bernoulli instances carry `"delta": null`
//! and may record their inclusion probability under `"p"`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::design::{DesignKind, DesignParams, PoolingDesign};
use crate::error::{Error, Result};
use crate::model::{encode, InfectionVector, OutcomeVector};

pub const FORMAT_VERSION: u32 = 1;

const FIG1_JSON: &str = include_str!("../../../fixtures/fig1.json");

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    version: u32,
    n: usize,
    m: usize,
    delta: Option<usize>,
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    assignments: Vec<Vec<usize>>,
    sigma: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    outcomes: Option<Vec<u8>>,
}

/// A design together with its ground truth and outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub design: PoolingDesign,
    pub sigma: InfectionVector,
    pub outcomes: OutcomeVector,
}

impl Instance {
    pub fn new(design: PoolingDesign, sigma: InfectionVector) -> Result<Self> {
        let outcomes = encode(&design, &sigma)?;
        Ok(Self { design, sigma, outcomes })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: InstanceFile = serde_json::from_str(text)?;
        if file.version != FORMAT_VERSION {
            return Err(Error::Format(format!("unsupported version {}", file.version)));
        }
        let kind = match file.kind.as_str() {
            "regular" => DesignKind::Regular {
                delta: file.delta.ok_or_else(|| Error::Format("regular instance needs delta".into()))?,
            },
            "bernoulli" => {
                let edges: usize = file.assignments.iter().map(Vec::len).sum();
                let density = edges as f64 / (file.n as f64 * file.m as f64);
                DesignKind::Bernoulli { p: file.p.unwrap_or(density).clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON) }
            }
            other => return Err(Error::Format(format!("unknown design kind {other:?}"))),
        };
        let params = DesignParams { n: file.n, m: file.m, kind, seed: file.seed.unwrap_or(0) };
        let design = PoolingDesign::from_assignments(params, file.assignments)?;
        let sigma = InfectionVector::from_indices(file.n, &file.sigma)?;
        let instance = Self::new(design, sigma)?;
        if let Some(raw) = file.outcomes {
            if raw.len() != file.m || raw.iter().any(|&b| b > 1) {
                return Err(Error::Format("outcomes must be m entries of 0 or 1".into()));
            }
            let given = OutcomeVector::from_bits(raw.iter().map(|&b| b == 1).collect());
            if given != instance.outcomes {
                return Err(Error::Consistency("stored outcomes differ from the encoding of sigma".into()));
            }
        }
        Ok(instance)
    }

    /// Serialise; `pretty` selects indented output.
    pub fn to_json(&self, pretty: bool) -> Result<String> {
        let params = self.design.params();
        let file = InstanceFile {
            version: FORMAT_VERSION,
            n: params.n,
            m: params.m,
            delta: params.kind.delta(),
            kind: params.kind.name().to_string(),
            p: match params.kind {
                DesignKind::Bernoulli { p } => Some(p),
                DesignKind::Regular { .. } => None,
            },
            seed: Some(params.seed),
            assignments: self.design.assignments().to_vec(),
            sigma: self.sigma.infected(),
            outcomes: Some(self.outcomes.bits().iter().map(|&b| b as u8).collect()),
        };
        Ok(if pretty { serde_json::to_string_pretty(&file)? } else { serde_json::to_string(&file)? })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut text = self.to_json(true)?;
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }
}

/// The seven-individual, five-test example instance shipped in `fixtures/fig1.json`.
pub fn fig1() -> Instance {
    Instance::from_json(FIG1_JSON).expect("bundled fixture is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_fixture() {
        let inst = fig1();
        assert_eq!(inst.design.n(), 7);
        assert_eq!(inst.design.gamma(), &[3, 3, 7, 5, 3]);
        assert_eq!(inst.sigma.infected(), vec![0, 1]);
        assert_eq!(inst.outcomes.bits(), &[true, true, true, false, false]);
    }

    #[test]
    fn round_trip() {
        let inst = fig1();
        for pretty in [false, true] {
            let again = Instance::from_json(&inst.to_json(pretty).unwrap()).unwrap();
            assert_eq!(again, inst);
        }
    }

    #[test]
    fn rejects_bad_files() {
        let base = fig1().to_json(false).unwrap();
        let edit = |from: &str, to: &str| Instance::from_json(&base.replacen(from, to, 1));
        assert!(matches!(edit("\"version\":1", "\"version\":2"), Err(Error::Format(_))));
        assert!(matches!(edit("\"kind\":\"regular\"", "\"kind\":\"doubly\""), Err(Error::Format(_))));
        assert!(matches!(edit("\"outcomes\":[1,1,1,0,0]", "\"outcomes\":[1,1,0,0,0]"), Err(Error::Consistency(_))));
        assert!(matches!(edit("\"sigma\":[0,1]", "\"sigma\":[0,9]"), Err(Error::Parameter(_))));
        assert!(matches!(edit("[0,1,2]", "[0,1,7]"), Err(Error::Parameter(_))));
        assert!(matches!(edit("\"version\":1", "\"version\":1,\"extra\":0"), Err(Error::Json(_))));
    }
}
