//! Physical constants (CODATA 2018) and energy-unit conversions.
//!
//! Every other module obtains its constants from here; nothing else in the
//! crate defines a physical constant. Internal canonical units are cm⁻¹ for
//! energy, Å for length and amu for mass. Wavelengths are vacuum wavelengths
//! throughout.

use std::f64::consts::PI;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Planck constant (J·s, exact)
pub const PLANCK: f64 = 6.62607015e-34;

/// Reduced Planck constant (J·s)
pub const HBAR: f64 = PLANCK / (2.0 * PI);

/// Speed of light in vacuum (m/s, exact)
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Boltzmann constant (J/K, exact)
pub const BOLTZMANN: f64 = 1.380649e-23;

/// Unified atomic mass unit (kg)
pub const AMU: f64 = 1.66053906660e-27;

/// Bohr radius (m)
pub const BOHR_RADIUS: f64 = 5.29177210903e-11;

/// Bohr radius (Å)
pub const BOHR_RADIUS_ANGSTROM: f64 = BOHR_RADIUS * 1e10;

/// Elementary charge (C, exact)
pub const ELEMENTARY_CHARGE: f64 = 1.602176634e-19;

/// Electric dipole unit debye (C·m); 1 D = 10⁻²¹/c C·m
pub const DEBYE: f64 = 1e-21 / SPEED_OF_LIGHT;

/// Vacuum electric permittivity (F/m)
pub const EPSILON_0: f64 = 8.8541878128e-12;

/// Atomic mass of ⁷Li (amu), AME2020
pub const MASS_LI7: f64 = 7.0160034366;

/// Atomic mass of ¹³³Cs (amu), AME2020
pub const MASS_CS133: f64 = 132.905451961;

/// hc in J·cm: energy of 1 cm⁻¹
pub const CM1_JOULE: f64 = PLANCK * SPEED_OF_LIGHT * 100.0;

/// GHz per cm⁻¹ (exact: c in cm/s × 10⁻⁹)
pub const CM1_GHZ: f64 = 29.9792458;

/// cm⁻¹ per kelvin: kB/(hc)
pub const KELVIN_CM1: f64 = BOLTZMANN / CM1_JOULE;

/// cm⁻¹ per hartree
pub const HARTREE_CM1: f64 = 219_474.631_363_2;

/// cm⁻¹ per eV: e/(hc)
pub const EV_CM1: f64 = ELEMENTARY_CHARGE / CM1_JOULE;

/// Dipole atomic unit e·a₀ in debye
pub const AU_DIPOLE_DEBYE: f64 = ELEMENTARY_CHARGE * BOHR_RADIUS / DEBYE;

/// ħ²/(2·amu) in cm⁻¹·Å², the radial kinetic-energy prefactor for µ = 1 amu.
///
/// ħ² / (2·amu·hc), with the m² → Å² factor folded in. ≈ 16.8576 cm⁻¹·Å²·amu.
pub const HBAR2_OVER_2AMU: f64 = HBAR * HBAR / (2.0 * AMU * CM1_JOULE) * 1e20;

/// kB/h in MHz per µK, the thermal frequency scale used by PA lineshapes.
pub const BOLTZMANN_MHZ_PER_UK: f64 = BOLTZMANN / PLANCK * 1e-12;

/// ħ²/(2µ) in cm⁻¹·Å² for a reduced mass in amu.
pub fn hbar2_over_2mu(mu_amu: f64) -> f64 {
    HBAR2_OVER_2AMU / mu_amu
}

/// Reduced mass m₁m₂/(m₁+m₂); inputs and output in amu.
pub fn reduced_mass(m1: f64, m2: f64) -> Result<f64> {
    if m1 <= 0.0 || m2 <= 0.0 || !m1.is_finite() || !m2.is_finite() {
        return Err(Error::invalid(format!(
            "reduced mass needs positive finite masses, got {m1} and {m2}"
        )));
    }
    Ok(m1 * m2 / (m1 + m2))
}

/// Atomic mass lookup by isotope tag (`Li7`, `Cs133`).
pub fn isotope_mass(name: &str) -> Result<f64> {
    match name.trim() {
        "Li7" | "7Li" | "li7" => Ok(MASS_LI7),
        "Cs133" | "133Cs" | "cs133" => Ok(MASS_CS133),
        other => Err(Error::invalid(format!(
            "unknown isotope `{other}` (known: Li7, Cs133)"
        ))),
    }
}

/// Energy-equivalent units accepted by [`convert_energy`].
///
/// `Nanometer` is a vacuum wavelength treated through E = hc/λ; all other
/// pairs are exact linear maps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnergyUnit {
    CmInv,
    GigaHertz,
    MegaHertz,
    Kelvin,
    MilliKelvin,
    MicroKelvin,
    Joule,
    Hartree,
    ElectronVolt,
    Nanometer,
}

impl EnergyUnit {
    /// Value in this unit → cm⁻¹; `None` for the reciprocal nm case.
    fn to_cm1(self, v: f64) -> Option<f64> {
        match self {
            EnergyUnit::CmInv => Some(v),
            EnergyUnit::GigaHertz => Some(v / CM1_GHZ),
            EnergyUnit::MegaHertz => Some(v / (CM1_GHZ * 1e3)),
            EnergyUnit::Kelvin => Some(v * KELVIN_CM1),
            EnergyUnit::MilliKelvin => Some(v * (1e-3 * KELVIN_CM1)),
            EnergyUnit::MicroKelvin => Some(v * (1e-6 * KELVIN_CM1)),
            EnergyUnit::Joule => Some(v / CM1_JOULE),
            EnergyUnit::Hartree => Some(v * HARTREE_CM1),
            EnergyUnit::ElectronVolt => Some(v * EV_CM1),
            EnergyUnit::Nanometer => None,
        }
    }

    /// cm⁻¹ → value in this unit; `None` for the reciprocal nm case.
    fn from_cm1(self, cm1: f64) -> Option<f64> {
        match self {
            EnergyUnit::CmInv => Some(cm1),
            EnergyUnit::GigaHertz => Some(cm1 * CM1_GHZ),
            EnergyUnit::MegaHertz => Some(cm1 * (CM1_GHZ * 1e3)),
            EnergyUnit::Kelvin => Some(cm1 / KELVIN_CM1),
            EnergyUnit::MilliKelvin => Some(cm1 / (1e-3 * KELVIN_CM1)),
            EnergyUnit::MicroKelvin => Some(cm1 / (1e-6 * KELVIN_CM1)),
            EnergyUnit::Joule => Some(cm1 * CM1_JOULE),
            EnergyUnit::Hartree => Some(cm1 / HARTREE_CM1),
            EnergyUnit::ElectronVolt => Some(cm1 / EV_CM1),
            EnergyUnit::Nanometer => None,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            EnergyUnit::CmInv => "cm-1",
            EnergyUnit::GigaHertz => "GHz",
            EnergyUnit::MegaHertz => "MHz",
            EnergyUnit::Kelvin => "K",
            EnergyUnit::MilliKelvin => "mK",
            EnergyUnit::MicroKelvin => "uK",
            EnergyUnit::Joule => "J",
            EnergyUnit::Hartree => "hartree",
            EnergyUnit::ElectronVolt => "eV",
            EnergyUnit::Nanometer => "nm",
        }
    }
}

impl FromStr for EnergyUnit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "cm-1" | "cm^-1" | "1/cm" | "wavenumber" => Ok(EnergyUnit::CmInv),
            "GHz" | "ghz" => Ok(EnergyUnit::GigaHertz),
            "MHz" | "mhz" => Ok(EnergyUnit::MegaHertz),
            "K" | "kelvin" => Ok(EnergyUnit::Kelvin),
            "mK" => Ok(EnergyUnit::MilliKelvin),
            "uK" | "µK" => Ok(EnergyUnit::MicroKelvin),
            "J" | "joule" => Ok(EnergyUnit::Joule),
            "hartree" | "Eh" | "au" => Ok(EnergyUnit::Hartree),
            "eV" | "ev" => Ok(EnergyUnit::ElectronVolt),
            "nm" => Ok(EnergyUnit::Nanometer),
            other => Err(Error::UnknownUnit(other.to_string())),
        }
    }
}

/// Convert an energy-equivalent value between units.
///
/// Wavelength conversions require a positive value (E = hc/λ).
pub fn convert_energy(value: f64, from: EnergyUnit, to: EnergyUnit) -> Result<f64> {
    if !value.is_finite() {
        return Err(Error::invalid(format!("non-finite energy value {value}")));
    }
    let cm1 = match from.to_cm1(value) {
        Some(v) => v,
        None => {
            if value <= 0.0 {
                return Err(Error::invalid(format!(
                    "wavelength must be positive, got {value} nm"
                )));
            }
            1e7 / value
        }
    };
    match to.from_cm1(cm1) {
        Some(v) => Ok(v),
        None => {
            if cm1 <= 0.0 {
                return Err(Error::invalid(format!(
                    "cannot express non-positive energy {cm1} cm-1 as a wavelength"
                )));
            }
            Ok(1e7 / cm1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn cm1_to_ghz_is_exact() {
        let v = convert_energy(1.0, EnergyUnit::CmInv, EnergyUnit::GigaHertz).unwrap();
        assert_eq!(v, 29.9792458);
    }

    #[test]
    fn rempi_wavenumber_to_wavelength() {
        // 10^7 / 16999.4
        let nm = convert_energy(16999.4, EnergyUnit::CmInv, EnergyUnit::Nanometer).unwrap();
        assert_relative_eq!(nm, 588.256056096, max_relative = 1e-9);
    }

    #[test]
    fn millikelvin_to_wavenumber() {
        // kB·T/(hc) with CODATA 2018 constants
        let v = convert_energy(1.6, EnergyUnit::MilliKelvin, EnergyUnit::CmInv).unwrap();
        assert_relative_eq!(v, 1.112055681e-3, max_relative = 1e-6);
    }

    #[test]
    fn conversion_round_trips() {
        let units = [
            EnergyUnit::CmInv,
            EnergyUnit::GigaHertz,
            EnergyUnit::MegaHertz,
            EnergyUnit::Kelvin,
            EnergyUnit::MilliKelvin,
            EnergyUnit::MicroKelvin,
            EnergyUnit::Joule,
            EnergyUnit::Hartree,
            EnergyUnit::ElectronVolt,
            EnergyUnit::Nanometer,
        ];
        for &a in &units {
            for &b in &units {
                let x = 137.0360;
                let there = convert_energy(x, a, b).unwrap();
                let back = convert_energy(there, b, a).unwrap();
                assert_relative_eq!(back, x, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn unknown_unit_tag_rejected() {
        assert!(matches!(
            "furlong".parse::<EnergyUnit>(),
            Err(Error::UnknownUnit(_))
        ));
    }

    #[test]
    fn reduced_mass_licx() {
        // m1·m2/(m1+m2), hand-evaluated
        let mu = reduced_mass(7.016, 132.905).unwrap();
        assert_relative_eq!(mu, 6.66420, max_relative = 1e-4);
        let mu_precise = reduced_mass(MASS_LI7, MASS_CS133).unwrap();
        assert_relative_eq!(mu_precise, 6.664203892, max_relative = 1e-8);
    }

    #[test]
    fn reduced_mass_limits() {
        assert_relative_eq!(reduced_mass(3.5, 3.5).unwrap(), 1.75);
        assert_relative_eq!(reduced_mass(1.0, 1e12).unwrap(), 1.0, max_relative = 1e-9);
        assert!(reduced_mass(-1.0, 2.0).is_err());
        assert!(reduced_mass(0.0, 2.0).is_err());
    }

    #[test]
    fn kinetic_prefactor_value() {
        // ħ²/(2·amu·hc)·10²⁰, hand-evaluated from CODATA 2018
        assert_relative_eq!(HBAR2_OVER_2AMU, 16.857629192, max_relative = 1e-9);
        assert_relative_eq!(hbar2_over_2mu(6.664203892), 2.529578846, max_relative = 1e-8);
    }

    #[test]
    fn thermal_frequency_scale() {
        // kB/h = 20.836619 kHz/µK
        assert_relative_eq!(BOLTZMANN_MHZ_PER_UK, 0.020836619123, max_relative = 1e-9);
    }

    #[test]
    fn dipole_atomic_unit() {
        // e·a0 = 2.5417464739 D
        assert_relative_eq!(AU_DIPOLE_DEBYE, 2.5417464739, max_relative = 1e-9);
    }

    /// Physical constants are defined here and nowhere else in the crate.
    #[test]
    fn constants_single_source_of_truth() {
        let src_dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("src");
        let needles = [
            "6.62607015e-34",
            "1.380649e-23",
            "299_792_458",
            "299792458",
            "1.66053906660e-27",
            "5.29177210903e-11",
            "8.8541878128e-12",
            "29.9792458",
            "16.8576",
        ];
        for entry in std::fs::read_dir(&src_dir).unwrap() {
            let path = entry.unwrap().path();
            if path.extension().and_then(|e| e.to_str()) != Some("rs")
                || path.file_name().and_then(|n| n.to_str()) == Some("units.rs")
            {
                continue;
            }
            let text = std::fs::read_to_string(&path).unwrap();
            for needle in &needles {
                assert!(
                    !text.contains(needle),
                    "{} re-defines constant {}",
                    path.display(),
                    needle
                );
            }
        }
    }
}
