//! Run configuration: a TOML file with strict keys and full defaults.
//!
//! Every field has a default, so the empty file is a valid configuration.
//! Unknown keys are rejected rather than ignored; a typo must fail loudly
//! because silent fallback to a default would change what was measured.
//! The environment variable `ESL_SEED` overrides the top-level seed.

use crate::CliError;
use esl_core::domain::{SampleSpec, SolutionFamily};
use esl_core::fitting::FitMetric;
use esl_core::harness::{NoiseKind, PerturbationSpec};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Seed for sampling, the property suite, and (by default) perturbations.
    pub seed: u64,
    /// Declared regime degree; must match the family's natural degree.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    pub sample: SampleSection,
    pub family: FamilySection,
    pub perturbation: PerturbationSection,
    pub input: InputSection,
    pub fit: FitSection,
    pub proofchain: ProofchainSection,
    pub report: ReportSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            alpha: None,
            sample: SampleSection::default(),
            family: FamilySection::default(),
            perturbation: PerturbationSection::default(),
            input: InputSection::default(),
            fit: FitSection::default(),
            proofchain: ProofchainSection::default(),
            report: ReportSection::default(),
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct SampleSection {
    pub grid_lo: f64,
    pub grid_hi: f64,
    pub points_per_axis: usize,
    pub mc_count: usize,
    pub t_lo: f64,
    pub t_hi: f64,
    pub t_count: usize,
}

impl Default for SampleSection {
    fn default() -> Self {
        let spec = SampleSpec::default();
        Self {
            grid_lo: spec.grid_lo,
            grid_hi: spec.grid_hi,
            points_per_axis: spec.points_per_axis,
            mc_count: spec.mc_count,
            t_lo: spec.t_lo,
            t_hi: spec.t_hi,
            t_count: spec.t_count,
        }
    }
}

impl SampleSection {
    #[must_use]
    pub fn to_spec(&self) -> SampleSpec {
        SampleSpec {
            grid_lo: self.grid_lo,
            grid_hi: self.grid_hi,
            points_per_axis: self.points_per_axis,
            mc_count: self.mc_count,
            t_lo: self.t_lo,
            t_hi: self.t_hi,
            t_count: self.t_count,
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct FamilySection {
    /// One of `power`, `shannon`, `constant`.
    pub kind: String,
    /// Coefficient for the power and shannon families.
    pub c: f64,
    /// Exponent for the power family.
    pub alpha: f64,
    /// Value for the constant family.
    pub a: f64,
}

impl Default for FamilySection {
    fn default() -> Self {
        Self {
            kind: "power".to_owned(),
            c: 1.0,
            alpha: 2.0,
            a: 0.0,
        }
    }
}

impl FamilySection {
    pub fn to_family(&self) -> Result<SolutionFamily, CliError> {
        let made = match self.kind.as_str() {
            "power" => SolutionFamily::power(self.c, self.alpha),
            "shannon" => SolutionFamily::shannon(self.c),
            "constant" => SolutionFamily::constant(self.a),
            other => {
                return Err(CliError::Config(format!(
                    "unknown family kind {other:?}; expected power, shannon or constant"
                )))
            }
        };
        made.map_err(CliError::config)
    }
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct PerturbationSection {
    /// One of `none`, `uniform_noise`, `smooth_bump`, `oscillatory`.
    pub kind: String,
    pub amplitude: f64,
    /// Noise seed; falls back to the top-level seed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub center_x: f64,
    pub center_y: f64,
    pub center_z: f64,
    pub width: f64,
    pub omega: f64,
}

impl Default for PerturbationSection {
    fn default() -> Self {
        Self {
            kind: "none".to_owned(),
            amplitude: 0.0,
            seed: None,
            center_x: 1.0,
            center_y: 1.0,
            center_z: 1.0,
            width: 1.0,
            omega: 7.0,
        }
    }
}

impl PerturbationSection {
    pub fn to_spec(&self, default_seed: u64) -> Result<Option<PerturbationSpec>, CliError> {
        let kind = match self.kind.as_str() {
            "none" => {
                if self.amplitude != 0.0 {
                    return Err(CliError::Config(format!(
                        "perturbation.amplitude = {} has no effect with kind \"none\"",
                        self.amplitude
                    )));
                }
                return Ok(None);
            }
            "uniform_noise" => NoiseKind::UniformNoise,
            "smooth_bump" => NoiseKind::SmoothBump {
                center_x: self.center_x,
                center_y: self.center_y,
                center_z: self.center_z,
                width: self.width,
            },
            "oscillatory" => NoiseKind::Oscillatory { omega: self.omega },
            other => {
                return Err(CliError::Config(format!(
                    "unknown perturbation kind {other:?}; expected none, uniform_noise, \
                     smooth_bump or oscillatory"
                )))
            }
        };
        let seed = self.seed.unwrap_or(default_seed);
        PerturbationSpec::new(kind, self.amplitude, seed)
            .map(Some)
            .map_err(CliError::config)
    }
}

#[derive(Clone, Debug, Default, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct InputSection {
    /// CSV file with header `x,y,z,h` providing a tabulated candidate.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<PathBuf>,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct FitSection {
    /// Family kind to fit; defaults to the `[family]` kind.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    /// `sup_norm` or `least_squares`.
    pub metric: String,
}

impl Default for FitSection {
    fn default() -> Self {
        Self {
            family: None,
            metric: "sup_norm".to_owned(),
        }
    }
}

impl FitSection {
    pub fn to_metric(&self) -> Result<FitMetric, CliError> {
        match self.metric.as_str() {
            "sup_norm" => Ok(FitMetric::SupNorm),
            "least_squares" => Ok(FitMetric::LeastSquares),
            other => Err(CliError::Config(format!(
                "unknown fit metric {other:?}; expected sup_norm or least_squares"
            ))),
        }
    }
}

pub const ALL_STEPS: [&str; 5] = ["homogenize", "skew", "reconstruct", "average", "suite"];

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ProofchainSection {
    /// Steps to run, in this order: homogenize, skew, reconstruct, average, suite.
    pub steps: Vec<String>,
    /// Scale magnitudes for the homogenization trace.
    pub t_magnitudes: Vec<f64>,
    /// Probe pair for homogenization and averaging.
    pub probe_x: f64,
    pub probe_y: f64,
    /// Grid step and size for potential reconstruction.
    pub reconstruct_h: f64,
    pub reconstruct_n: usize,
    /// Window length and sample count for cocycle averaging.
    pub average_window: f64,
    pub average_count: usize,
    /// Seeded candidates per family in the property suite.
    pub suite_candidates: usize,
    pub suite_amplitude: f64,
}

impl Default for ProofchainSection {
    fn default() -> Self {
        Self {
            steps: ALL_STEPS.iter().map(|s| (*s).to_owned()).collect(),
            t_magnitudes: vec![10.0, 100.0, 1000.0, 10000.0],
            probe_x: 1.0,
            probe_y: 2.0,
            reconstruct_h: 1.0,
            reconstruct_n: 16,
            average_window: 1e3,
            average_count: 100_000,
            suite_candidates: 10,
            suite_amplitude: 1e-3,
        }
    }
}

impl ProofchainSection {
    /// True when the steps list was left at its default (all steps). A default
    /// list lets the driver skip inapplicable steps instead of erroring.
    #[must_use]
    pub fn steps_are_default(&self) -> bool {
        self.steps == ALL_STEPS
    }
}

#[derive(Clone, Debug, Default, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ReportSection {
    /// Emit wall-clock milliseconds instead of 0. Off by default so that
    /// repeated runs produce byte-identical reports.
    pub include_timing: bool,
    /// Keep per-sample residuals in the JSON report.
    pub retain_residuals: bool,
}

impl RunConfig {
    /// Loads, applies the `ESL_SEED` override, and validates.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Config(format!("cannot read config {}: {e}", path.display()))
        })?;
        let mut cfg: RunConfig = toml::from_str(&text).map_err(|e| {
            CliError::Config(format!("cannot parse config {}: {e}", path.display()))
        })?;
        if let Ok(raw) = std::env::var("ESL_SEED") {
            cfg.seed = raw.trim().parse().map_err(|_| {
                CliError::Config(format!(
                    "ESL_SEED must be a base-10 unsigned integer, got {raw:?}"
                ))
            })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Config-stage checks: everything that can be judged before touching
    /// sample data fails here with exit code 2.
    pub fn validate(&self) -> Result<(), CliError> {
        let family = self.family.to_family()?;
        self.sample.to_spec().validate().map_err(CliError::config)?;
        self.perturbation.to_spec(self.seed)?;
        self.fit.to_metric()?;
        if let Some(kind) = &self.fit.family {
            if !["power", "shannon", "constant"].contains(&kind.as_str()) {
                return Err(CliError::Config(format!(
                    "unknown fit family {kind:?}; expected power, shannon or constant"
                )));
            }
            if kind == "power" {
                // The exponent comes from [family].alpha even when the base
                // family is not power, so reject the excluded value here.
                SolutionFamily::power(1.0, self.family.alpha).map_err(CliError::config)?;
            }
        }
        if let Some(declared) = self.alpha {
            if declared != family.degree() {
                return Err(CliError::Config(format!(
                    "declared degree {declared} does not match the {} family \
                     regime (expected {})",
                    family.kind_name(),
                    family.degree()
                )));
            }
        }
        for step in &self.proofchain.steps {
            if !ALL_STEPS.contains(&step.as_str()) {
                return Err(CliError::Config(format!(
                    "unknown proofchain step {step:?}; expected one of {ALL_STEPS:?}"
                )));
            }
        }
        if self.proofchain.reconstruct_n < 2 || self.proofchain.reconstruct_n > 512 {
            return Err(CliError::Config(format!(
                "proofchain.reconstruct_n must be between 2 and 512, got {}",
                self.proofchain.reconstruct_n
            )));
        }
        if self.proofchain.average_count == 0 {
            return Err(CliError::Config(
                "proofchain.average_count must be at least 1".to_owned(),
            ));
        }
        Ok(())
    }

    /// Regime degree used for bound formulas: the explicit override when
    /// present (already validated), otherwise the family's natural degree.
    pub fn regime(&self) -> Result<f64, CliError> {
        Ok(match self.alpha {
            Some(a) => a,
            None => self.family.to_family()?.degree(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_all_defaults() {
        let cfg: RunConfig = toml::from_str("").unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert_eq!(cfg.seed, 42);
        assert!(cfg.validate().is_ok());
        assert_eq!(cfg.regime().unwrap(), 2.0);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<RunConfig>("sseed = 1").is_err());
        assert!(toml::from_str::<RunConfig>("[sample]\ngrid_low = 1.0").is_err());
        assert!(toml::from_str::<RunConfig>("[family]\nexponent = 2").is_err());
    }

    #[test]
    fn dotted_keys_parse() {
        let cfg: RunConfig = toml::from_str(
            "seed = 7\nfamily.kind = \"shannon\"\nfamily.c = 1.5\nsample.points_per_axis = 4\n",
        )
        .unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.family.kind, "shannon");
        assert_eq!(cfg.sample.points_per_axis, 4);
        assert!(cfg.validate().is_ok());
        assert_eq!(cfg.regime().unwrap(), 1.0);
    }

    #[test]
    fn power_alpha_one_is_a_config_error() {
        let cfg: RunConfig =
            toml::from_str("family.kind = \"power\"\nfamily.alpha = 1.0\n").unwrap();
        let err = cfg.validate().unwrap_err();
        assert!(matches!(err, CliError::Config(_)), "{err}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn regime_mismatch_is_a_config_error() {
        let cfg: RunConfig =
            toml::from_str("alpha = 2.0\nfamily.kind = \"shannon\"\n").unwrap();
        assert!(cfg.validate().is_err());
        let ok: RunConfig = toml::from_str("alpha = 1.0\nfamily.kind = \"shannon\"\n").unwrap();
        assert!(ok.validate().is_ok());
    }

    #[test]
    fn amplitude_without_kind_is_rejected() {
        let cfg: RunConfig = toml::from_str("perturbation.amplitude = 0.1\n").unwrap();
        assert!(cfg.validate().is_err());
        let ok: RunConfig = toml::from_str(
            "perturbation.kind = \"uniform_noise\"\nperturbation.amplitude = 0.1\n",
        )
        .unwrap();
        assert!(ok.validate().is_ok());
    }

    #[test]
    fn bad_step_names_and_sizes_are_rejected() {
        let cfg: RunConfig =
            toml::from_str("proofchain.steps = [\"skew\", \"sew\"]\n").unwrap();
        assert!(cfg.validate().is_err());
        let cfg: RunConfig = toml::from_str("proofchain.reconstruct_n = 1\n").unwrap();
        assert!(cfg.validate().is_err());
        let cfg: RunConfig = toml::from_str("proofchain.reconstruct_n = 513\n").unwrap();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn steps_default_detection() {
        let cfg = RunConfig::default();
        assert!(cfg.proofchain.steps_are_default());
        let cfg: RunConfig = toml::from_str("proofchain.steps = [\"skew\"]\n").unwrap();
        assert!(!cfg.proofchain.steps_are_default());
    }
}
