//! Physical constants and the (nm, eV, fs) unit system.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reduced Planck constant in eV·fs.
pub const HBAR_EV_FS: f64 = 0.658_211_956_9;

/// ħ²/(2 m_e) in eV·nm².
pub const HBAR2_OVER_2ME_EV_NM2: f64 = 0.038_099_8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitSystem {
    /// eV·fs
    pub hbar: f64,
    /// ħ²/(2 m_e) in eV·nm²
    pub hbar2_over_2me: f64,
    pub effective_mass_ratio: f64,
}

impl Default for UnitSystem {
    fn default() -> Self {
        Self {
            hbar: HBAR_EV_FS,
            hbar2_over_2me: HBAR2_OVER_2ME_EV_NM2,
            effective_mass_ratio: 1.0,
        }
    }
}

impl UnitSystem {
    pub fn with_mass_ratio(effective_mass_ratio: f64) -> Result<Self> {
        let units = Self {
            effective_mass_ratio,
            ..Self::default()
        };
        units.validate()?;
        Ok(units)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.hbar) || !positive(self.hbar2_over_2me) {
            return Err(Error::Domain("physical constants must be positive".into()));
        }
        if !positive(self.effective_mass_ratio) {
            return Err(Error::Domain(format!(
                "effective mass ratio must be positive, got {}",
                self.effective_mass_ratio
            )));
        }
        Ok(())
    }

    /// ħ²/(2m) for the effective mass, in eV·nm².
    pub fn kinetic_scale(&self) -> f64 {
        self.hbar2_over_2me / self.effective_mass_ratio
    }

    /// Particle mass in eV·fs²/nm².
    pub fn mass(&self) -> f64 {
        self.hbar * self.hbar / (2.0 * self.kinetic_scale())
    }
}
