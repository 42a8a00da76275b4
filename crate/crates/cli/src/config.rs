//! Strict experiment configuration.

use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Subcommand {
    Sections,
    Dynamics,
    Henon,
    Potential,
    Constants,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Sections => "sections",
            Subcommand::Dynamics => "dynamics",
            Subcommand::Henon => "henon",
            Subcommand::Potential => "potential",
            Subcommand::Constants => "constants",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldName {
    Complex,
    Real,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BezoutParams {
    /// Random binary forms checked per run.
    pub line_trials: usize,
    pub line_degree_min: u32,
    pub line_degree_max: u32,
    /// Random pairs of ternary forms checked per run.
    pub plane_pairs: usize,
    pub plane_max_degree: u32,
}

impl Default for BezoutParams {
    fn default() -> Self {
        BezoutParams { line_trials: 100, line_degree_min: 10, line_degree_max: 200, plane_pairs: 50, plane_max_degree: 5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SectionsParams {
    pub fields: Vec<FieldName>,
    pub degrees: Vec<u32>,
    pub trials: usize,
    /// Names of built-in test functions on P^1; empty means the whole set.
    pub test_functions: Vec<String>,
    pub epsilon: f64,
    /// Test function used for the concentration table.
    pub concentration_psi: String,
    /// Bias check: |mean D| ≤ sigma · stderr.
    pub sigma: f64,
    pub bezout: BezoutParams,
}

impl Default for SectionsParams {
    fn default() -> Self {
        SectionsParams {
            fields: vec![FieldName::Complex, FieldName::Real],
            degrees: vec![25, 50, 100, 200],
            trials: 500,
            test_functions: Vec::new(),
            epsilon: 0.05,
            concentration_psi: "coord0".into(),
            sigma: 4.0,
            bezout: BezoutParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DynamicsParams {
    /// Root of every backward orbit, as an affine coordinate (re, im).
    pub x0: [f64; 2],
    pub cloud_depth: usize,
    pub cloud_atoms: usize,
    /// Circle moments j = 1..=moments of the z² cloud.
    pub moments: usize,
    pub moment_tolerance: f64,
    pub defect_tolerance: f64,
    /// Depths of the exhaustive preimage-tree defects.
    pub tree_depths: Vec<usize>,
    /// Fixed parameter of the second tree map z² + c.
    pub fixed_c: [f64; 2],
    /// Modulus range of the random parameter c.
    pub random_c_modulus: [f64; 2],
    pub mixing_lags: usize,
    /// |I_n| ≤ sigma · stderr counts as zero.
    pub mixing_sigma: f64,
    /// Slope threshold is log(1/2) + slack.
    pub mixing_slack: f64,
    pub degree_iterates: usize,
}

impl Default for DynamicsParams {
    fn default() -> Self {
        DynamicsParams {
            x0: [0.37, 0.61],
            cloud_depth: 25,
            cloud_atoms: 100_000,
            moments: 8,
            moment_tolerance: 0.02,
            defect_tolerance: 0.02,
            tree_depths: vec![5, 10, 20, 30],
            fixed_c: [-1.0, 0.0],
            random_c_modulus: [0.15, 0.25],
            mixing_lags: 10,
            mixing_sigma: 4.0,
            mixing_slack: 0.1,
            degree_iterates: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HenonParams {
    /// p in f(x, y) = (y, p(y) − a·x).
    pub p: String,
    pub a: String,
    pub pairs: usize,
    /// Counts are checked for all 1 ≤ n, m ≤ max_level.
    pub max_level: u32,
    pub green_depth: usize,
    pub green_bound: f64,
}

impl Default for HenonParams {
    fn default() -> Self {
        HenonParams { p: "y^2 - 1.4".into(), a: "-0.3".into(), pairs: 4, max_level: 3, green_depth: 40, green_bound: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PotentialParams {
    pub ks: Vec<usize>,
    pub witnesses: usize,
    pub degree_pool: Vec<u32>,
    /// Samples for means and sup estimates.
    pub samples: usize,
    pub alphas: Vec<f64>,
    pub moderation_witnesses: usize,
    pub moderation_samples: usize,
    pub exceedance_grid: Vec<f64>,
    pub exceedance_degrees: Vec<u32>,
    pub exceedance_witnesses: usize,
    pub exceedance_samples: usize,
    /// Required decay: fitted slope ≤ −exceedance_min_rate.
    pub exceedance_min_rate: f64,
    /// Extra witnesses given as forms, normalized and reported.
    pub witness_specs: Vec<WitnessSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WitnessMode {
    Max,
    Mean,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessSpec {
    /// Homogeneous form in x0, ..., xk.
    pub poly: String,
    pub k: usize,
    pub normalization: WitnessMode,
}

impl Default for PotentialParams {
    fn default() -> Self {
        PotentialParams {
            ks: vec![1, 2, 3],
            witnesses: 200,
            degree_pool: vec![1, 2, 3, 4],
            samples: 20_000,
            alphas: vec![0.1, 0.25, 0.5, 1.0],
            moderation_witnesses: 10,
            moderation_samples: 50_000,
            exceedance_grid: vec![1.0, 2.0, 3.0, 4.0, 5.0],
            exceedance_degrees: vec![1, 2],
            exceedance_witnesses: 20,
            exceedance_samples: 50_000,
            exceedance_min_rate: 0.5,
            witness_specs: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConstantsParams {
    pub ks: Vec<usize>,
    pub samples: usize,
    pub sigma: f64,
    pub max_seconds: f64,
}

impl Default for ConstantsParams {
    fn default() -> Self {
        ConstantsParams { ks: vec![1, 2, 3], samples: 1_000_000, sigma: 4.0, max_seconds: 10.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Params {
    Sections(SectionsParams),
    Dynamics(DynamicsParams),
    Henon(HenonParams),
    Potential(PotentialParams),
    Constants(ConstantsParams),
}

impl Params {
    pub fn default_for(sub: Subcommand) -> Self {
        match sub {
            Subcommand::Sections => Params::Sections(Default::default()),
            Subcommand::Dynamics => Params::Dynamics(Default::default()),
            Subcommand::Henon => Params::Henon(Default::default()),
            Subcommand::Potential => Params::Potential(Default::default()),
            Subcommand::Constants => Params::Constants(Default::default()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub subcommand: Subcommand,
    pub params: Params,
    pub seed: u64,
    pub workers: usize,
    pub out_dir: PathBuf,
    pub plots: bool,
}

/// Schema violation, located by its key path.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error at `{}`: {}", self.path, self.message)
    }
}

impl std::error::Error for ConfigError {}

fn strict<'de, T: Deserialize<'de>>(text: &'de str) -> Result<T, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de)
        .map_err(|e| ConfigError { path: e.path().to_string(), message: e.into_inner().to_string() })
}

/// Parse the parameter document of a subcommand; every key is optional and
/// unknown keys are rejected.
pub fn parse_params(sub: Subcommand, text: &str) -> Result<Params, ConfigError> {
    Ok(match sub {
        Subcommand::Sections => Params::Sections(strict(text)?),
        Subcommand::Dynamics => Params::Dynamics(strict(text)?),
        Subcommand::Henon => Params::Henon(strict(text)?),
        Subcommand::Potential => Params::Potential(strict(text)?),
        Subcommand::Constants => Params::Constants(strict(text)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        assert_eq!(parse_params(Subcommand::Henon, "{}").unwrap(), Params::Henon(HenonParams::default()));
    }

    #[test]
    fn unknown_key_is_named() {
        let e = parse_params(Subcommand::Sections, r#"{"degre": [10]}"#).unwrap_err();
        assert_eq!(e.path, "degre");
        assert!(e.to_string().contains("degre"));
        let e = parse_params(Subcommand::Sections, r#"{"bezout": {"pairs": 3}}"#).unwrap_err();
        assert_eq!(e.path, "bezout.pairs");
    }

    #[test]
    fn type_errors_carry_the_path() {
        let e = parse_params(Subcommand::Dynamics, r#"{"tree_depths": [5, "x"]}"#).unwrap_err();
        assert_eq!(e.path, "tree_depths[1]");
    }
}
