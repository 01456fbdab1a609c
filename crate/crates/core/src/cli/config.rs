//! JSON instance configuration for `landscape solve`.
//!
//! ```json
//! {
//!   "lattice_size": 4,
//!   "potential": { "constant": 3.0 },          // or { "values": [..] }
//!   "hopping": { "geometric": 0.5 },           // or { "values": [..] }, { "nearest_neighbor": 1.0 }
//!   "solver": { "series": { "order": 20 } },   // or "direct" (default)
//!   "checks": ["positivity", "bound", "spectrum", "norm-lemmas"],
//!   "override_violated": false
//! }
//! ```

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::operator::{HoppingProfile, LatticeOperator, PotentialVector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialSpec {
    Values(Vec<f64>),
    Constant(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HoppingSpec {
    Values(Vec<f64>),
    /// `a₁ = amplitude`, the rest zero.
    NearestNeighbor(f64),
    /// `aᵢ = ρⁱ`, `0 ≤ ρ < 1`.
    Geometric(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverSpec {
    #[default]
    Direct,
    Series {
        order: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Check {
    #[serde(rename = "positivity")]
    Positivity,
    #[serde(rename = "bound")]
    Bound,
    #[serde(rename = "spectrum")]
    Spectrum,
    #[serde(rename = "norm-lemmas")]
    NormLemmas,
}

impl Check {
    pub const ALL: [Check; 4] = [
        Check::Positivity,
        Check::Bound,
        Check::Spectrum,
        Check::NormLemmas,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::Positivity => "positivity",
            Check::Bound => "bound",
            Check::Spectrum => "spectrum",
            Check::NormLemmas => "norm-lemmas",
        }
    }
}

fn all_checks() -> Vec<Check> {
    Check::ALL.to_vec()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceConfig {
    pub lattice_size: usize,
    pub potential: PotentialSpec,
    pub hopping: HoppingSpec,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default = "all_checks")]
    pub checks: Vec<Check>,
    #[serde(default)]
    pub override_violated: bool,
}

/// A configuration problem, tagged with the offending field path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.field.is_empty() || self.field == "." {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.field, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

fn config_error(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError {
        field: field.to_string(),
        message: message.into(),
    }
}

/// Parses JSON, reporting the path of the first field that fails.
pub fn parse_json<'de, T: Deserialize<'de>>(text: &'de str) -> Result<T, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|err| ConfigError {
        field: err.path().to_string(),
        message: err.inner().to_string(),
    })
}

impl InstanceConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let config: InstanceConfig = parse_json(text)?;
        config.potential_vector()?;
        config.hopping_profile()?;
        Ok(config)
    }

    pub fn potential_vector(&self) -> Result<PotentialVector, ConfigError> {
        let n = self.lattice_size;
        if n == 0 {
            return Err(config_error("lattice_size", "must be at least 1"));
        }
        let (field, built) = match &self.potential {
            PotentialSpec::Constant(v) => ("potential.constant", PotentialVector::constant(n, *v)),
            PotentialSpec::Values(values) => {
                if values.len() != n {
                    return Err(config_error(
                        "potential.values",
                        format!("has {} entries, lattice_size is {n}", values.len()),
                    ));
                }
                ("potential.values", PotentialVector::new(values.clone()))
            }
        };
        built.map_err(|e| config_error(field, e.to_string()))
    }

    pub fn hopping_profile(&self) -> Result<HoppingProfile, ConfigError> {
        let n = self.lattice_size;
        if n == 0 {
            return Err(config_error("lattice_size", "must be at least 1"));
        }
        let (field, built) = match &self.hopping {
            HoppingSpec::Values(a) => {
                if a.len() != n - 1 {
                    return Err(config_error(
                        "hopping.values",
                        format!("has {} entries, lattice_size {n} needs {}", a.len(), n - 1),
                    ));
                }
                ("hopping.values", HoppingProfile::new(n, a.clone()))
            }
            HoppingSpec::NearestNeighbor(amp) => (
                "hopping.nearest_neighbor",
                HoppingProfile::nearest_neighbor(n, *amp),
            ),
            HoppingSpec::Geometric(rate) => {
                ("hopping.geometric", HoppingProfile::geometric(n, *rate))
            }
        };
        built.map_err(|e| config_error(field, e.to_string()))
    }

    pub fn operator(&self) -> Result<LatticeOperator, ConfigError> {
        LatticeOperator::assemble(self.potential_vector()?, self.hopping_profile()?)
            .map_err(|e| config_error("lattice_size", e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_config_with_defaults() {
        let c = InstanceConfig::from_json(
            r#"{"lattice_size": 2, "potential": {"constant": 3}, "hopping": {"values": [1]}}"#,
        )
        .unwrap();
        assert_eq!(c.solver, SolverSpec::Direct);
        assert_eq!(c.checks, Check::ALL.to_vec());
        assert!(!c.override_violated);
        assert_eq!(
            c.operator().unwrap().h().to_rows(),
            vec![vec![3.0, -1.0], vec![-1.0, 3.0]]
        );
    }

    #[test]
    fn parses_series_and_patterns() {
        let c = InstanceConfig::from_json(
            r#"{"lattice_size": 4, "potential": {"values": [3,4,5,6]},
                "hopping": {"geometric": 0.5}, "solver": {"series": {"order": 7}},
                "checks": ["bound", "norm-lemmas"]}"#,
        )
        .unwrap();
        assert_eq!(c.solver, SolverSpec::Series { order: 7 });
        assert_eq!(c.checks, vec![Check::Bound, Check::NormLemmas]);
        assert_eq!(
            c.hopping_profile().unwrap().coefficients(),
            &[0.5, 0.25, 0.125]
        );
    }

    #[test]
    fn errors_name_the_field() {
        let err = InstanceConfig::from_json(
            r#"{"lattice_size": 3, "potential": {"constant": 3}, "hopping": {"geometric": 1.5}}"#,
        )
        .unwrap_err();
        assert_eq!(err.field, "hopping.geometric");

        let err = InstanceConfig::from_json(
            r#"{"lattice_size": 3, "potential": {"values": [1, 2]}, "hopping": {"values": [1, 0]}}"#,
        )
        .unwrap_err();
        assert_eq!(err.field, "potential.values");

        let err = InstanceConfig::from_json(
            r#"{"lattice_size": 3, "potential": {"constant": 3}, "hopping": {"values": [1, 0]},
                "checks": ["nope"]}"#,
        )
        .unwrap_err();
        assert!(err.field.starts_with("checks"), "{err}");

        let err = InstanceConfig::from_json(
            r#"{"lattice_size": 3, "potential": {"constant": 3}, "hopping": {"values": [-1, 0]}}"#,
        )
        .unwrap_err();
        assert_eq!(err.field, "hopping.values");

        let err = InstanceConfig::from_json(r#"{"potential": {"constant": 3}}"#).unwrap_err();
        assert!(
            err.message.contains("lattice_size") || err.message.contains("hopping"),
            "{err}"
        );

        assert!(InstanceConfig::from_json("{not json").is_err());
    }

    #[test]
    fn rejects_both_potential_forms() {
        let err = InstanceConfig::from_json(
            r#"{"lattice_size": 2, "potential": {"constant": 3, "values": [3, 3]},
                "hopping": {"values": [1]}}"#,
        )
        .unwrap_err();
        assert!(err.field.starts_with("potential"), "{err}");
    }
}
