//! Serde config-file schemas for the subcommands.

use phasecov::{AxisRange, ConstantRates, FamilySpec, KernelSpec, Predicate, RationalLaplace, ScanGrid};
use serde::{Deserialize, Serialize};

fn default_axis() -> AxisRange {
    AxisRange {
        min: -1.5,
        max: 1.5,
        steps: 101,
    }
}

fn default_predicates() -> Vec<Predicate> {
    Predicate::ALL.to_vec()
}

/// Region-scan configuration (`region --config file.json`).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    #[serde(default = "default_axis")]
    pub lambda: AxisRange,
    #[serde(default = "default_axis")]
    pub lambda_z: AxisRange,
    #[serde(default = "default_axis")]
    pub t_z: AxisRange,
    #[serde(default = "default_predicates")]
    pub predicates: Vec<Predicate>,
    /// t_z value of the 2D slice used for SVG output (nearest grid plane).
    #[serde(default)]
    pub slice_t_z: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            lambda: default_axis(),
            lambda_z: default_axis(),
            t_z: default_axis(),
            predicates: default_predicates(),
            slice_t_z: 0.0,
        }
    }
}

impl ScanConfig {
    pub fn grid(&self) -> ScanGrid {
        ScanGrid {
            lambda: self.lambda,
            lambda_z: self.lambda_z,
            t_z: self.t_z,
        }
    }
}

/// Dynamics source: a built-in family or a constant rate triple.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SourceSpec {
    Family { spec: FamilySpec },
    ConstantRates {
        gamma_plus: f64,
        gamma_minus: f64,
        gamma_z: f64,
    },
}

impl SourceSpec {
    pub fn constant(&self) -> Option<ConstantRates> {
        match *self {
            SourceSpec::ConstantRates {
                gamma_plus,
                gamma_minus,
                gamma_z,
            } => Some(ConstantRates {
                gamma_plus,
                gamma_minus,
                gamma_z,
            }),
            _ => None,
        }
    }
}

fn default_t_max() -> f64 {
    10.0
}

fn default_n_grid() -> usize {
    201
}

/// Simulation / divisibility configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub source: SourceSpec,
    #[serde(default = "default_t_max")]
    pub t_max: f64,
    #[serde(default = "default_n_grid")]
    pub n_grid: usize,
    #[serde(default)]
    pub rho0_z: Vec<f64>,
}

fn default_depth() -> usize {
    phasecov::DEFAULT_CM_DEPTH
}

/// Kernel-analysis configuration: an explicit kernel triple or the
/// constructive example parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub example: Option<ExampleParams>,
    #[serde(default = "default_depth")]
    pub depth: usize,
    #[serde(default = "default_t_max")]
    pub t_max: f64,
    #[serde(default = "default_n_grid")]
    pub n_grid: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExampleParams {
    pub a: f64,
    pub a_plus: f64,
    pub a_minus: f64,
    pub f_s: RationalLaplace,
}
