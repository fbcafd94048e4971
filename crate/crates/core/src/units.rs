//! Physical constants and the dimensionless scaling used by the numerics.
//!
//! Internal units take the packet's initial width as the length unit and
//! `m Δx² / ħ` as the time unit, so that ħ = m = 1 inside the solvers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::wavepacket::GaussianPacket;

/// Reduced Planck constant, J s (CODATA 2018, exact in SI since 2019).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Unified atomic mass unit, kg (CODATA 2018).
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;
/// Mass of caesium-133 in atomic mass units.
pub const CS133_MASS_U: f64 = 132.905_451_961;
/// Mass of rubidium-87 in atomic mass units.
pub const RB87_MASS_U: f64 = 86.909_180_527;

/// Read-only table of the constants the simulation depends on.
///
/// The default table is the compiled-in one; a table can also be loaded from
/// a TOML file so that `validate` can detect a corrupted copy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub hbar: f64,
    pub atomic_mass_unit: f64,
    pub cs133_mass_u: f64,
    pub rb87_mass_u: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Constants {
            hbar: HBAR,
            atomic_mass_unit: ATOMIC_MASS_UNIT,
            cs133_mass_u: CS133_MASS_U,
            rb87_mass_u: RB87_MASS_U,
        }
    }
}

impl Constants {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("constants table: {e}")))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("constants serialize")
    }

    /// Atom names known to the table.
    pub fn atom_names() -> &'static [&'static str] {
        &["Cs", "Rb87"]
    }

    pub fn atom(&self, name: &str) -> Result<AtomSpec> {
        let mass_u = match name {
            "Cs" | "Cs133" | "cs" => self.cs133_mass_u,
            "Rb87" | "rb87" => self.rb87_mass_u,
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown atom '{other}', known atoms: {}",
                    Self::atom_names().join(", ")
                )))
            }
        };
        AtomSpec::new(name, mass_u * self.atomic_mass_unit)
    }
}

/// Particle species.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomSpec {
    pub name: String,
    /// Mass in kg.
    pub mass: f64,
}

impl AtomSpec {
    pub fn new(name: impl Into<String>, mass: f64) -> Result<Self> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "atom mass must be positive, got {mass}"
            )));
        }
        Ok(AtomSpec {
            name: name.into(),
            mass,
        })
    }

    /// Caesium-133 with the compiled-in constants.
    pub fn cesium() -> Self {
        AtomSpec {
            name: "Cs".into(),
            mass: CS133_MASS_U * ATOMIC_MASS_UNIT,
        }
    }

    /// ħ/m in m²/s.
    pub fn hbar_over_m(&self) -> f64 {
        HBAR / self.mass
    }

    /// Wavenumber k = m v / ħ for a velocity in m/s.
    pub fn wavenumber(&self, velocity: f64) -> f64 {
        self.mass * velocity / HBAR
    }

    /// Velocity ħ k / m for a wavenumber in 1/m.
    pub fn velocity(&self, k: f64) -> f64 {
        HBAR * k / self.mass
    }

    /// Pulse parameter α = ħτ/2m in m².
    pub fn alpha(&self, tau: f64) -> f64 {
        HBAR * tau / (2.0 * self.mass)
    }
}

impl Default for AtomSpec {
    fn default() -> Self {
        AtomSpec::cesium()
    }
}

/// Conversion between SI and internal units where ħ = m = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaling {
    /// Metres per internal length unit.
    pub length_unit: f64,
    /// Seconds per internal time unit, `m L² / ħ`.
    pub time_unit: f64,
    hbar: f64,
}

impl Scaling {
    /// Scaling with a chosen length unit; the time unit follows from ħ = m = 1.
    pub fn new(length_unit: f64, atom: &AtomSpec) -> Result<Self> {
        Self::with_hbar(length_unit, atom.mass, HBAR)
    }

    pub fn with_hbar(length_unit: f64, mass: f64, hbar: f64) -> Result<Self> {
        if !(length_unit > 0.0 && length_unit.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "length unit must be positive, got {length_unit}"
            )));
        }
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "mass must be positive, got {mass}"
            )));
        }
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "hbar must be positive, got {hbar}"
            )));
        }
        Ok(Scaling {
            length_unit,
            time_unit: mass * length_unit * length_unit / hbar,
            hbar,
        })
    }

    /// Mass unit in kg; equals the particle mass.
    pub fn mass_unit(&self) -> f64 {
        self.hbar * self.time_unit / (self.length_unit * self.length_unit)
    }

    pub fn length(&self, x: f64) -> f64 {
        x / self.length_unit
    }
    pub fn length_si(&self, x: f64) -> f64 {
        x * self.length_unit
    }
    pub fn time(&self, t: f64) -> f64 {
        t / self.time_unit
    }
    pub fn time_si(&self, t: f64) -> f64 {
        t * self.time_unit
    }
    pub fn velocity(&self, v: f64) -> f64 {
        v * self.time_unit / self.length_unit
    }
    pub fn velocity_si(&self, v: f64) -> f64 {
        v * self.length_unit / self.time_unit
    }
    pub fn wavenumber(&self, k: f64) -> f64 {
        k * self.length_unit
    }
    pub fn wavenumber_si(&self, k: f64) -> f64 {
        k / self.length_unit
    }
    /// Area (e.g. α) to internal units.
    pub fn area(&self, a: f64) -> f64 {
        a / (self.length_unit * self.length_unit)
    }
    /// Linear density (1/m) to internal units.
    pub fn density(&self, rho: f64) -> f64 {
        rho * self.length_unit
    }
    pub fn density_si(&self, rho: f64) -> f64 {
        rho / self.length_unit
    }
    /// Position-space amplitude (1/√m) to internal units.
    pub fn amplitude(&self, psi: f64) -> f64 {
        psi * self.length_unit.sqrt()
    }
    pub fn amplitude_si(&self, psi: f64) -> f64 {
        psi / self.length_unit.sqrt()
    }
}

/// Scaling with length unit Δx and time unit mΔx²/ħ.
pub fn make_scaling(packet: &GaussianPacket, atom: &AtomSpec) -> Result<Scaling> {
    if !(packet.delta_x > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "packet width must be positive, got {}",
            packet.delta_x
        )));
    }
    if !(packet.v0 > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "packet velocity must be positive, got {}",
            packet.v0
        )));
    }
    Scaling::new(packet.delta_x, atom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn cesium_mass_matches_table() {
        let cs = AtomSpec::cesium();
        assert_relative_eq!(cs.mass, 2.2069e-25, max_relative = 1e-3);
        assert_eq!(Constants::default().atom("Cs").unwrap().mass, cs.mass);
    }

    #[test]
    fn unit_mass_and_length_give_unit_time() {
        let s = Scaling::with_hbar(1.0, HBAR, HBAR).unwrap();
        assert_relative_eq!(s.time_unit, 1.0, max_relative = 1e-15);
        assert_relative_eq!(s.mass_unit(), HBAR, max_relative = 1e-15);
    }

    #[test]
    fn fig3_time_unit() {
        let p = GaussianPacket::new(-0.66e-6, 0.011, 0.1e-6).unwrap();
        let s = make_scaling(&p, &AtomSpec::cesium()).unwrap();
        assert_relative_eq!(s.time_unit, 2.0927e-5, max_relative = 2e-4);
        assert_relative_eq!(s.mass_unit(), AtomSpec::cesium().mass, max_relative = 1e-14);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(AtomSpec::new("x", 0.0).is_err());
        assert!(Scaling::new(-1.0, &AtomSpec::cesium()).is_err());
        assert!(Constants::default().atom("Xe").is_err());
    }

    #[test]
    fn constants_toml_round_trip() {
        let c = Constants::default();
        assert_eq!(Constants::from_toml(&c.to_toml()).unwrap(), c);
    }
}
