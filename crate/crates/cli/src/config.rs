//! Scenario files: one JSON document, unit-suffixed keys.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use qwell::spectral::DEFAULT_SEED;
use qwell::{MultiWellSpec, SamplingRule, SolveSetup, UnitSystem};

use crate::error::{CliError, CliResult};

/// Starting superposition. Wells are numbered from 1 here and in every
/// output file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialState {
    /// Explicit ±1 signs on the lowest N states.
    SignPattern { signs: Vec<i8>, target_well: usize },
    /// Brute-force best pattern for the target well.
    BestPattern { target_well: usize },
    /// Row of the six-well table.
    Table { target_well: usize },
    /// Explicit eigenbasis coefficients (renormalized).
    Coefficients {
        re: Vec<f64>,
        #[serde(default)]
        im: Vec<f64>,
    },
    /// Gaussian packet projected onto the retained basis.
    Gaussian { center_nm: f64, width_nm: f64 },
}

impl InitialState {
    fn needs_full_multiplet(&self) -> bool {
        matches!(
            self,
            Self::SignPattern { .. } | Self::BestPattern { .. } | Self::Table { .. }
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Artifact {
    Potential,
    Eigenvalues,
    Eigenstates,
    Patterns,
    Snapshots,
    Autocorrelation,
    Correlations,
    Hops,
}

impl Artifact {
    pub const ALL: [Artifact; 8] = [
        Self::Potential,
        Self::Eigenvalues,
        Self::Eigenstates,
        Self::Patterns,
        Self::Snapshots,
        Self::Autocorrelation,
        Self::Correlations,
        Self::Hops,
    ];
}

/// Where results go. Not part of the fingerprint.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub dir: Option<PathBuf>,
    /// Artifacts written by `run`; empty means all.
    #[serde(default)]
    pub artifacts: Vec<Artifact>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(rename = "barrier_heights_eV")]
    pub barrier_heights_ev: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InverseSpec {
    /// Target hop period; alternatively derive it from a reference height.
    #[serde(default)]
    pub target_period_fs: Option<f64>,
    #[serde(default, rename = "reference_height_eV")]
    pub reference_height_ev: Option<f64>,
    #[serde(rename = "bracket_eV")]
    pub bracket_ev: [f64; 2],
}

fn default_mass() -> f64 {
    1.0
}
fn default_points() -> usize {
    2000
}
fn default_tau_max() -> f64 {
    2.0
}
fn default_tau_samples() -> usize {
    2048
}
fn default_threshold() -> f64 {
    0.9
}
fn default_snapshots() -> Vec<f64> {
    vec![0.0, 0.25, 0.5, 0.75, 1.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub length_nm: f64,
    pub well_count: usize,
    #[serde(default)]
    pub barrier_width_nm: f64,
    #[serde(default, rename = "barrier_height_eV")]
    pub barrier_height_ev: f64,
    #[serde(default, rename = "well_depth_eV")]
    pub well_depth_ev: f64,
    #[serde(default = "default_mass")]
    pub effective_mass_ratio: f64,
    #[serde(default = "default_points")]
    pub grid_points: usize,
    /// Retained eigenstates; defaults to the well count.
    #[serde(default)]
    pub num_states: Option<usize>,
    #[serde(default = "default_tau_max")]
    pub tau_max: f64,
    #[serde(default = "default_tau_samples")]
    pub tau_samples: usize,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub sampling: SamplingRule,
    #[serde(default)]
    pub initial_state: Option<InitialState>,
    #[serde(default = "default_snapshots")]
    pub snapshot_taus: Vec<f64>,
    /// Level a correlation peak must exceed to count as a localization.
    #[serde(default = "default_threshold")]
    pub peak_threshold: f64,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub inverse: Option<InverseSpec>,
    #[serde(default)]
    pub outputs: OutputSpec,
}

/// Everything that changes numbers in the outputs.
#[derive(Serialize)]
struct PhysicsKey<'a> {
    length_nm: f64,
    well_count: usize,
    barrier_width_nm: f64,
    barrier_height_ev: f64,
    well_depth_ev: f64,
    effective_mass_ratio: f64,
    grid_points: usize,
    num_states: usize,
    tau_max: f64,
    tau_samples: usize,
    seed: u64,
    sampling: SamplingRule,
    initial_state: &'a InitialState,
    snapshot_taus: &'a [f64],
    peak_threshold: f64,
    sweep: &'a Option<SweepSpec>,
    inverse: &'a Option<InverseSpec>,
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> CliResult<Self> {
        let config: Self = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn num_states(&self) -> usize {
        self.num_states.unwrap_or(self.well_count.max(1))
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    pub fn initial_state(&self) -> InitialState {
        self.initial_state
            .clone()
            .unwrap_or(InitialState::BestPattern { target_well: 1 })
    }

    pub fn spec(&self) -> MultiWellSpec {
        self.spec_with_height(self.barrier_height_ev)
    }

    pub fn spec_with_height(&self, barrier_height: f64) -> MultiWellSpec {
        MultiWellSpec {
            total_length: self.length_nm,
            well_count: self.well_count,
            barrier_width: self.barrier_width_nm,
            barrier_height,
            well_depth_reference: self.well_depth_ev,
        }
    }

    pub fn units(&self) -> UnitSystem {
        UnitSystem::with_mass_ratio(self.effective_mass_ratio).expect("validated mass ratio")
    }

    pub fn setup(&self) -> SolveSetup {
        SolveSetup::new(self.grid_points, self.units())
            .with_seed(self.seed())
            .with_sampling(self.sampling)
    }

    pub fn tau_axis(&self) -> qwell::dynamics::TauAxis {
        qwell::dynamics::TauAxis::new(self.tau_max, self.tau_samples).expect("validated tau axis")
    }

    pub fn artifacts(&self) -> Vec<Artifact> {
        if self.outputs.artifacts.is_empty() {
            Artifact::ALL.to_vec()
        } else {
            self.outputs.artifacts.clone()
        }
    }

    /// SHA-256 over the physics-affecting fields; output settings and the
    /// scenario name do not contribute.
    pub fn fingerprint(&self) -> String {
        let initial = self.initial_state();
        let key = PhysicsKey {
            length_nm: self.length_nm,
            well_count: self.well_count,
            barrier_width_nm: self.barrier_width_nm,
            barrier_height_ev: self.barrier_height_ev,
            well_depth_ev: self.well_depth_ev,
            effective_mass_ratio: self.effective_mass_ratio,
            grid_points: self.grid_points,
            num_states: self.num_states(),
            tau_max: self.tau_max,
            tau_samples: self.tau_samples,
            seed: self.seed(),
            sampling: self.sampling,
            initial_state: &initial,
            snapshot_taus: &self.snapshot_taus,
            peak_threshold: self.peak_threshold,
            sweep: &self.sweep,
            inverse: &self.inverse,
        };
        let bytes = serde_json::to_vec(&key).expect("plain data serializes");
        hex(&Sha256::digest(&bytes))
    }

    pub fn validate(&self) -> CliResult<()> {
        let bad = |msg: String| Err(CliError::Config(msg));
        self.spec().validate().map_err(|e| CliError::Config(e.to_string()))?;
        if !(self.effective_mass_ratio > 0.0 && self.effective_mass_ratio.is_finite()) {
            return bad(format!("effective_mass_ratio must be positive, got {}", self.effective_mass_ratio));
        }
        if self.grid_points < 3 {
            return bad(format!("grid_points must be at least 3, got {}", self.grid_points));
        }
        let k = self.num_states();
        if k == 0 || k > self.grid_points {
            return bad(format!("num_states must be in 1..={}, got {k}", self.grid_points));
        }
        if self.tau_samples < 2 || !(self.tau_max > 0.0 && self.tau_max.is_finite()) {
            return bad("tau_samples must be at least 2 and tau_max positive".into());
        }
        if !(self.peak_threshold > 0.0 && self.peak_threshold < 1.0) {
            return bad(format!("peak_threshold must lie in (0, 1), got {}", self.peak_threshold));
        }
        if self.snapshot_taus.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
            return bad("snapshot_taus must be non-negative".into());
        }

        let n = self.well_count;
        let initial = self.initial_state();
        if initial.needs_full_multiplet() && k < n {
            return bad(format!("a sign-pattern initial state needs num_states >= well_count ({k} < {n})"));
        }
        match &initial {
            InitialState::SignPattern { signs, target_well } => {
                if signs.len() != n {
                    return bad(format!("sign pattern has {} entries for {n} wells", signs.len()));
                }
                if signs.iter().any(|s| *s != 1 && *s != -1) {
                    return bad("sign pattern entries must be +1 or -1".into());
                }
                check_well(*target_well, n)?;
            }
            InitialState::BestPattern { target_well } => check_well(*target_well, n)?,
            InitialState::Table { target_well } => {
                if n != 6 {
                    return bad(format!("the tabulated patterns cover six wells, scenario has {n}"));
                }
                check_well(*target_well, n)?;
            }
            InitialState::Coefficients { re, im } => {
                if re.is_empty() || re.len() > k || im.len() > re.len() {
                    return bad(format!(
                        "coefficients need 1..={k} real parts and no more imaginary parts than real parts"
                    ));
                }
                if re.iter().chain(im).all(|c| *c == 0.0) {
                    return bad("coefficients are all zero".into());
                }
            }
            InitialState::Gaussian { center_nm, width_nm } => {
                if !(*width_nm > 0.0) || !(*center_nm > 0.0 && *center_nm < self.length_nm) {
                    return bad("gaussian needs 0 < center_nm < length_nm and width_nm > 0".into());
                }
            }
        }
        if let Some(sweep) = &self.sweep {
            if sweep.barrier_heights_ev.is_empty() {
                return bad("sweep needs at least one barrier height".into());
            }
            if sweep.barrier_heights_ev.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
                return bad("sweep barrier heights must be non-negative".into());
            }
        }
        if let Some(inv) = &self.inverse {
            if n != 2 {
                return bad(format!("inverse design needs a two-well geometry, scenario has {n} wells"));
            }
            let [lo, hi] = inv.bracket_ev;
            if !(lo >= 0.0 && hi > lo) {
                return bad(format!("inverse bracket must satisfy 0 <= lo < hi, got [{lo}, {hi}]"));
            }
            match (inv.target_period_fs, inv.reference_height_ev) {
                (Some(p), None) if p > 0.0 => {}
                (None, Some(v)) if v >= 0.0 => {}
                _ => return bad("inverse needs exactly one of target_period_fs > 0 or reference_height_eV".into()),
            }
        }
        Ok(())
    }
}

fn check_well(target: usize, wells: usize) -> CliResult<()> {
    if target == 0 || target > wells {
        Err(CliError::Config(format!("target_well must be in 1..={wells}, got {target}")))
    } else {
        Ok(())
    }
}
