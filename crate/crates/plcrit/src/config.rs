//! Experiment configuration: a TOML document with one array of blocks per
//! experiment kind, schema-validated before any computation runs.

use crate::constants::ProblemParams;
use crate::error::{Error, Result};
use crate::fem::{BoundaryLabel, LabeledPolygon};
use crate::geometry::{Potential, PotentialSpec};
use serde::{Deserialize, Serialize};
use std::path::Path;

fn default_lambda_grid() -> Vec<f64> {
    vec![25.0, 50.0, 100.0, 200.0, 400.0]
}

fn default_r_out() -> f64 {
    1.0
}

fn default_cutoff() -> f64 {
    0.5
}

fn default_alpha() -> Potential {
    Potential::Constant(0.0)
}

fn default_beta() -> Potential {
    Potential::Constant(0.0)
}

/// Tolerances shared by all blocks; pass/fail thresholds live here so
/// batch runs and tests exercise one code path.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Relative quadrature tolerance.
    pub quad_rel: f64,
    /// Absolute quadrature tolerance.
    pub quad_abs: f64,
    /// Relative mismatch allowed for fitted expansion coefficients.
    pub fit_coefficient: f64,
    /// Relative residual allowed for closed-form identities.
    pub identity: f64,
    /// Allowed deviation of fitted decay exponents.
    pub exponent: f64,
    /// Relative tolerance of the constants against their closed forms.
    pub constants: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            quad_rel: 1e-10,
            quad_abs: 1e-14,
            fit_coefficient: 0.05,
            identity: 1e-6,
            exponent: 0.05,
            constants: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConstantsBlock {
    pub n: usize,
    pub p: f64,
}

/// Which expansion a sweep block verifies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepCheckKind {
    Gradient,
    Mass,
    AlphaTerm,
    BetaTerm,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepBlock {
    pub check: SweepCheckKind,
    pub n: usize,
    pub p: f64,
    #[serde(default)]
    pub gamma: Vec<f64>,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default)]
    pub beta: f64,
    #[serde(default = "default_lambda_grid")]
    pub lambda: Vec<f64>,
    #[serde(default = "default_r_out")]
    pub r_out: f64,
    #[serde(default = "default_cutoff")]
    pub cutoff: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ThresholdBlock {
    pub n: usize,
    pub p: f64,
    #[serde(default)]
    pub gamma: Vec<f64>,
    #[serde(default = "default_alpha")]
    pub alpha: Potential,
    #[serde(default = "default_beta")]
    pub beta: Potential,
    pub lambda: f64,
    #[serde(default = "default_r_out")]
    pub r_out: f64,
    #[serde(default = "default_cutoff")]
    pub cutoff: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DominanceBlock {
    pub n: usize,
    pub p: f64,
    pub gamma: Vec<f64>,
    pub beta: f64,
    #[serde(default = "default_lambda_grid")]
    pub lambda: Vec<f64>,
    #[serde(default = "default_r_out")]
    pub r_out: f64,
    #[serde(default = "default_cutoff")]
    pub cutoff: f64,
}

/// Planar domain outline for the finite-element blocks.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainSpec {
    /// Upper half-disk: flat edge is the Robin part, arc is Dirichlet.
    HalfDisk { radius: f64, segments: usize },
    /// Rectangle with per-side labels (bottom, right, top, left);
    /// `true` marks a Dirichlet side.
    Rectangle { width: f64, height: f64, dirichlet_sides: [bool; 4] },
    /// Explicit polygon: `dirichlet_edges[i]` labels edge `(v_i, v_{i+1})`.
    Polygon { vertices: Vec<[f64; 2]>, dirichlet_edges: Vec<bool> },
}

impl DomainSpec {
    pub fn build(&self) -> Result<LabeledPolygon> {
        match self {
            DomainSpec::HalfDisk { radius, segments } => {
                LabeledPolygon::half_disk(*radius, *segments)
            }
            DomainSpec::Rectangle {
                width,
                height,
                dirichlet_sides,
            } => {
                let lab = dirichlet_sides.map(|d| {
                    if d {
                        BoundaryLabel::Gamma0
                    } else {
                        BoundaryLabel::Gamma1
                    }
                });
                LabeledPolygon::rectangle(*width, *height, lab)
            }
            DomainSpec::Polygon {
                vertices,
                dirichlet_edges,
            } => {
                let labels = dirichlet_edges
                    .iter()
                    .map(|d| {
                        if *d {
                            BoundaryLabel::Gamma0
                        } else {
                            BoundaryLabel::Gamma1
                        }
                    })
                    .collect();
                LabeledPolygon::new(vertices.clone(), labels)
            }
        }
    }
}

fn default_h_sequence() -> Vec<f64> {
    vec![0.1]
}

fn default_refinements() -> usize {
    2
}

fn default_q_margin() -> f64 {
    0.05
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FemBlock {
    pub p: f64,
    pub domain: DomainSpec,
    /// Coarse target edge length(s); each entry starts a refinement chain.
    #[serde(default = "default_h_sequence")]
    pub h: Vec<f64>,
    /// Number of uniform refinements appended to each chain.
    #[serde(default = "default_refinements")]
    pub refinements: usize,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default)]
    pub beta: f64,
    #[serde(default = "default_q_margin")]
    pub q_margin: f64,
    #[serde(default)]
    pub reach_critical: bool,
}

/// Top-level experiment configuration.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub output: Option<String>,
    #[serde(default)]
    pub reproducible: bool,
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub constants: Vec<ConstantsBlock>,
    #[serde(default)]
    pub sweep: Vec<SweepBlock>,
    #[serde(default)]
    pub threshold: Vec<ThresholdBlock>,
    #[serde(default)]
    pub dominance: Vec<DominanceBlock>,
    #[serde(default)]
    pub fem: Vec<FemBlock>,
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<(Self, String)> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        let cfg = Self::from_toml_str(&text)?;
        Ok((cfg, text))
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text)
            .map_err(|e| Error::Config(format!("config parse error: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn is_empty(&self) -> bool {
        self.constants.is_empty()
            && self.sweep.is_empty()
            && self.threshold.is_empty()
            && self.dominance.is_empty()
            && self.fem.is_empty()
    }

    pub fn block_count(&self) -> usize {
        self.constants.len()
            + self.sweep.len()
            + self.threshold.len()
            + self.dominance.len()
            + self.fem.len()
    }

    /// Structural validation (parameter ranges and dimensions); the
    /// range preconditions are checked at dispatch time and
    /// produce skipped blocks, not errors.
    pub fn validate(&self) -> Result<()> {
        let check_np = |n: usize, p: f64, what: &str| -> Result<()> {
            ProblemParams::new(n, p)
                .map_err(|e| Error::Config(format!("{what}: {e}")))
                .map(|_| ())
        };
        for (i, b) in self.constants.iter().enumerate() {
            check_np(b.n, b.p, &format!("constants[{i}]"))?;
        }
        for (i, b) in self.sweep.iter().enumerate() {
            check_np(b.n, b.p, &format!("sweep[{i}]"))?;
            if !b.gamma.is_empty() && b.gamma.len() != b.n - 1 {
                return Err(Error::Config(format!(
                    "sweep[{i}]: gamma needs {} entries (or none), got {}",
                    b.n - 1,
                    b.gamma.len()
                )));
            }
            if b.lambda.len() < 4 {
                return Err(Error::Config(format!(
                    "sweep[{i}]: lambda grid needs >= 4 points"
                )));
            }
            if b.cutoff >= b.r_out {
                return Err(Error::Config(format!(
                    "sweep[{i}]: cutoff {} must be below r_out {}",
                    b.cutoff, b.r_out
                )));
            }
        }
        for (i, b) in self.threshold.iter().enumerate() {
            check_np(b.n, b.p, &format!("threshold[{i}]"))?;
            if !b.gamma.is_empty() && b.gamma.len() != b.n - 1 {
                return Err(Error::Config(format!(
                    "threshold[{i}]: gamma needs {} entries (or none)",
                    b.n - 1
                )));
            }
            if !(b.lambda > 0.0) {
                return Err(Error::Config(format!("threshold[{i}]: lambda must be positive")));
            }
        }
        for (i, b) in self.dominance.iter().enumerate() {
            check_np(b.n, b.p, &format!("dominance[{i}]"))?;
            if b.gamma.len() != b.n - 1 {
                return Err(Error::Config(format!(
                    "dominance[{i}]: gamma needs {} entries",
                    b.n - 1
                )));
            }
        }
        for (i, b) in self.fem.iter().enumerate() {
            check_np(2, b.p, &format!("fem[{i}]"))?;
            if b.h.is_empty() || b.h.iter().any(|h| *h <= 0.0) {
                return Err(Error::Config(format!("fem[{i}]: h entries must be positive")));
            }
            b.domain
                .build()
                .map_err(|e| Error::Config(format!("fem[{i}]: {e}")))?;
        }
        Ok(())
    }

    /// Expand the gamma list of a block (empty means flat).
    pub fn gamma_or_flat(gamma: &[f64], n: usize) -> Vec<f64> {
        if gamma.is_empty() {
            vec![0.0; n - 1]
        } else {
            gamma.to_vec()
        }
    }
}

/// Potential pair from plain constant entries.
pub fn potentials_from_constants(alpha: f64, beta: f64) -> PotentialSpec {
    PotentialSpec::constants(alpha, beta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_full_config() {
        let text = r#"
reproducible = true

[tolerances]
fit_coefficient = 0.05

[[constants]]
n = 4
p = 2.2

[[sweep]]
check = "gradient"
n = 4
p = 2.2
gamma = [0.1, 0.1, 0.1]

[[threshold]]
n = 3
p = 1.5
beta = -1.0
lambda = 100.0

[[dominance]]
n = 4
p = 2.2
gamma = [0.1, 0.1, 0.1]
beta = 1.0

[[fem]]
p = 1.4
alpha = 1.0
beta = -1.0
h = [0.1]
refinements = 2

[fem.domain]
kind = "half_disk"
radius = 1.0
segments = 64
"#;
        let cfg = ExperimentConfig::from_toml_str(text).unwrap();
        assert_eq!(cfg.block_count(), 5);
        assert!(cfg.reproducible);
        assert_eq!(cfg.sweep[0].lambda.len(), 5); // default grid
        assert_eq!(cfg.threshold[0].beta, Potential::Constant(-1.0));
    }

    #[test]
    fn rejects_bad_parameters_with_context() {
        let text = "[[constants]]\nn = 3\np = 3.5\n";
        let err = ExperimentConfig::from_toml_str(text).unwrap_err();
        let msg = format!("{err}");
        assert!(msg.contains("constants[0]"), "message: {msg}");
        let text = "[[sweep]]\ncheck = \"gradient\"\nn = 4\np = 2.2\ngamma = [0.1]\n";
        assert!(ExperimentConfig::from_toml_str(text).is_err());
        let text = "[[unknown_block]]\nx = 1\n";
        assert!(ExperimentConfig::from_toml_str(text).is_err());
    }

    #[test]
    fn empty_config_is_detected() {
        let cfg = ExperimentConfig::from_toml_str("reproducible = false\n").unwrap();
        assert!(cfg.is_empty());
    }
}
