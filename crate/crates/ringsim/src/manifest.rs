//! Run manifests: JSON descriptions of batch experiments, with strict
//! validation (unknown keys rejected) and a stable content hash used to
//! namespace output directories.

use crate::circuit::CircuitParams;
use crate::disorder::DisorderSpec;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("cannot read manifest {0}: {1}")]
    Io(PathBuf, std::io::Error),
    #[error("manifest validation failed: {0}")]
    Invalid(String),
    #[error("manifest parse error: {0}")]
    Parse(#[from] serde_json::Error),
}

/// Scale preset: `desk` for workstation-sized runs, `full` for production-scale
/// settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Desk,
    Full,
}

impl std::str::FromStr for Preset {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "desk" => Ok(Preset::Desk),
            "full" => Ok(Preset::Full),
            other => Err(format!("unknown preset {other:?}; use desk|full")),
        }
    }
}

/// Inclusive linear range with a point count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinRange {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl LinRange {
    pub fn new(min: f64, max: f64, count: usize) -> Self {
        Self { min, max, count }
    }

    pub fn values(&self) -> Vec<f64> {
        if self.count <= 1 {
            return vec![self.min];
        }
        (0..self.count)
            .map(|i| self.min + (self.max - self.min) * i as f64 / (self.count - 1) as f64)
            .collect()
    }

    fn validate(&self, name: &str) -> Result<(), ManifestError> {
        if self.count == 0 {
            return Err(ManifestError::Invalid(format!("{name}.count must be ≥ 1")));
        }
        if !(self.min.is_finite() && self.max.is_finite()) {
            return Err(ManifestError::Invalid(format!("{name} bounds must be finite")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpinMapParams {
    /// Site count (even).
    #[serde(default = "default_m")]
    pub m: usize,
    /// Nearest-neighbour coupling t, the energy unit of the map.
    #[serde(default = "default_t")]
    pub t: f64,
    #[serde(default = "default_zeta_range")]
    pub zeta: LinRange,
    #[serde(default = "default_lambda_range")]
    pub lambda: LinRange,
}

fn default_m() -> usize {
    6
}
fn default_t() -> f64 {
    1.0
}
fn default_zeta_range() -> LinRange {
    LinRange::new(-2.0, 2.0, 21)
}
fn default_lambda_range() -> LinRange {
    LinRange::new(-2.0, 2.0, 21)
}

impl Default for SpinMapParams {
    fn default() -> Self {
        Self {
            m: default_m(),
            t: default_t(),
            zeta: default_zeta_range(),
            lambda: default_lambda_range(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitSpectrumParams {
    /// Base circuit; defaults to the white-cross design point.
    #[serde(default = "CircuitParams::white_cross")]
    pub circuit: CircuitParams,
    /// Eigenpairs to report.
    #[serde(default = "default_levels")]
    pub levels: usize,
    /// Charge cutoff override; presets use 6 (desk) or 10 (full).
    #[serde(default)]
    pub d_override: Option<usize>,
    /// Also solve at d − 2 and report the convergence delta.
    #[serde(default)]
    pub convergence_check: bool,
    /// Also compute the doublet protection matrix elements.
    #[serde(default = "default_true")]
    pub protection: bool,
}

fn default_levels() -> usize {
    4
}
fn default_true() -> bool {
    true
}

impl Default for CircuitSpectrumParams {
    fn default() -> Self {
        Self {
            circuit: CircuitParams::white_cross(),
            levels: default_levels(),
            d_override: None,
            convergence_check: false,
            protection: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialMapParams {
    #[serde(default = "default_xy_range")]
    pub x: LinRange,
    #[serde(default = "default_xy_range")]
    pub y: LinRange,
}

fn default_xy_range() -> LinRange {
    LinRange::new(-std::f64::consts::PI, std::f64::consts::PI, 61)
}

impl Default for PotentialMapParams {
    fn default() -> Self {
        Self { x: default_xy_range(), y: default_xy_range() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectroscopyParams {
    #[serde(default = "CircuitParams::white_cross")]
    pub circuit: CircuitParams,
    /// Total gate-charge offsets, Cooper pairs.
    #[serde(default = "default_dq_range")]
    pub dq: LinRange,
    /// Total flux offsets, Φ0.
    #[serde(default = "default_dphi_range")]
    pub dphi: LinRange,
    /// Charge cutoff; presets use 4 (desk) or 6 (full).
    #[serde(default)]
    pub d_override: Option<usize>,
}

fn default_dq_range() -> LinRange {
    LinRange::new(0.0, 0.3, 7)
}
fn default_dphi_range() -> LinRange {
    LinRange::new(0.0, 0.12, 13)
}

impl Default for SpectroscopyParams {
    fn default() -> Self {
        Self {
            circuit: CircuitParams::white_cross(),
            dq: default_dq_range(),
            dphi: default_dphi_range(),
            d_override: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseFamily {
    Charge,
    Flux,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DephasingParams {
    #[serde(default = "CircuitParams::white_cross")]
    pub circuit: CircuitParams,
    pub family: NoiseFamily,
    /// Response-surface cutoff; presets use 4 (desk) / 6 (full) for charge
    /// and 10 for flux, where the gap curvature converges slowly. Must be
    /// even to keep the charge window symmetric about N_g = 1/2.
    #[serde(default)]
    pub d_fit_override: Option<usize>,
    #[serde(default = "default_ensemble")]
    pub ensemble: usize,
    /// Total PSD power at 1 Hz; defaults to the published value per family.
    #[serde(default)]
    pub total_a_override: Option<f64>,
}

fn default_ensemble() -> usize {
    400
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DisorderFamily {
    Junction,
    Loops,
    Gates,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisorderParams {
    #[serde(default = "CircuitParams::white_cross")]
    pub circuit: CircuitParams,
    pub family: DisorderFamily,
    #[serde(default = "default_realizations")]
    pub realizations: usize,
    /// Override the family's default sigma.
    #[serde(default)]
    pub sigma_override: Option<f64>,
    /// Gap diagonalization cutoff; presets use 6 (desk) or 10 (full).
    #[serde(default)]
    pub d_override: Option<usize>,
    /// Compute dephasing times (expensive) in addition to the gap.
    #[serde(default)]
    pub dephasing: bool,
    /// Monte Carlo ensemble per realization when dephasing is on.
    #[serde(default = "default_disorder_ensemble")]
    pub ensemble: usize,
}

fn default_realizations() -> usize {
    20
}
fn default_disorder_ensemble() -> usize {
    200
}

impl DisorderParams {
    pub fn spec(&self, seed: u64) -> DisorderSpec {
        let mut s = match self.family {
            DisorderFamily::Junction => DisorderSpec::junction(self.realizations, seed),
            DisorderFamily::Loops => DisorderSpec::loops(self.realizations, seed),
            DisorderFamily::Gates => DisorderSpec::gates(self.realizations, seed),
        };
        if let Some(x) = self.sigma_override {
            match self.family {
                DisorderFamily::Junction => s.sigma_junction = x,
                DisorderFamily::Loops => s.sigma_loop = x,
                DisorderFamily::Gates => s.sigma_gate = x,
            }
        }
        s
    }
}

/// The experiment payload; the JSON tag is the experiment id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "experiment", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Experiment {
    SpinMap(SpinMapParams),
    CircuitSpectrum(CircuitSpectrumParams),
    PotentialMap(PotentialMapParams),
    Spectroscopy(SpectroscopyParams),
    Dephasing(DephasingParams),
    Disorder(DisorderParams),
}

impl Experiment {
    pub fn id(&self) -> &'static str {
        match self {
            Experiment::SpinMap(_) => "spin-map",
            Experiment::CircuitSpectrum(_) => "circuit-spectrum",
            Experiment::PotentialMap(_) => "potential-map",
            Experiment::Spectroscopy(_) => "spectroscopy",
            Experiment::Dephasing(_) => "dephasing",
            Experiment::Disorder(_) => "disorder",
        }
    }
}

/// A complete, resolved run description.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    #[serde(flatten)]
    pub experiment: Experiment,
    pub seed: u64,
    pub preset: Preset,
    /// Output root; run artifacts land in `<out>/<id>-<hash>/`.
    pub out: PathBuf,
}

// Hand-rolled: serde cannot combine a flattened internally-tagged enum with
// unknown-key rejection, so the run-level keys are peeled off by hand and
// the rest is handed to the tagged `Experiment` (whose payload structs each
// reject unknown keys themselves).
impl<'de> Deserialize<'de> for RunManifest {
    fn deserialize<D>(deserializer: D) -> Result<Self, D::Error>
    where
        D: serde::Deserializer<'de>,
    {
        use serde::de::Error;
        let mut value = serde_json::Map::deserialize(deserializer)?;
        let seed = match value.remove("seed") {
            Some(v) => serde_json::from_value(v).map_err(D::Error::custom)?,
            None => default_seed(),
        };
        let preset = match value.remove("preset") {
            Some(v) => serde_json::from_value(v).map_err(D::Error::custom)?,
            None => default_preset(),
        };
        let out = match value.remove("out") {
            Some(v) => serde_json::from_value(v).map_err(D::Error::custom)?,
            None => default_out(),
        };
        let experiment = serde_json::from_value(serde_json::Value::Object(value))
            .map_err(D::Error::custom)?;
        Ok(RunManifest { experiment, seed, preset, out })
    }
}

fn default_seed() -> u64 {
    1
}
fn default_preset() -> Preset {
    Preset::Desk
}
fn default_out() -> PathBuf {
    PathBuf::from("runs")
}

impl RunManifest {
    pub fn from_str(text: &str) -> Result<Self, ManifestError> {
        let m: RunManifest = serde_json::from_str(text)?;
        m.validate()?;
        Ok(m)
    }

    pub fn load(path: &Path) -> Result<Self, ManifestError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ManifestError::Io(path.to_path_buf(), e))?;
        Self::from_str(&text)
    }

    pub fn validate(&self) -> Result<(), ManifestError> {
        let bad = |m: String| Err(ManifestError::Invalid(m));
        match &self.experiment {
            Experiment::SpinMap(p) => {
                if p.m < 4 || p.m % 2 != 0 || p.m > 14 {
                    return bad(format!("spin-map.m must be even in 4..=14, got {}", p.m));
                }
                p.zeta.validate("zeta")?;
                p.lambda.validate("lambda")?;
            }
            Experiment::CircuitSpectrum(p) => {
                if p.levels == 0 {
                    return bad("circuit-spectrum.levels must be ≥ 1".into());
                }
                if let Some(d) = p.d_override {
                    if d < 2 {
                        return bad(format!("circuit-spectrum.d_override must be ≥ 2, got {d}"));
                    }
                }
            }
            Experiment::PotentialMap(p) => {
                p.x.validate("x")?;
                p.y.validate("y")?;
            }
            Experiment::Spectroscopy(p) => {
                p.dq.validate("dq")?;
                p.dphi.validate("dphi")?;
            }
            Experiment::Dephasing(p) => {
                if p.ensemble < 2 {
                    return bad("dephasing.ensemble must be ≥ 2".into());
                }
                if let Some(d) = p.d_fit_override {
                    if d % 2 != 0 {
                        return bad(format!(
                            "dephasing.d_fit_override must be even (symmetric charge window), got {d}"
                        ));
                    }
                }
            }
            Experiment::Disorder(p) => {
                if p.realizations == 0 {
                    return bad("disorder.realizations must be ≥ 1".into());
                }
            }
        }
        Ok(())
    }

    /// Canonical JSON of the resolved manifest.
    pub fn resolved_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serialization cannot fail")
    }

    /// FNV-1a hash of the resolved manifest, hex, 16 digits.
    pub fn hash(&self) -> String {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in self.resolved_json().as_bytes() {
            h ^= *b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        format!("{h:016x}")
    }

    /// Namespaced output directory for this run.
    pub fn run_dir(&self) -> PathBuf {
        self.out.join(format!("{}-{}", self.experiment.id(), &self.hash()[..12]))
    }
}
