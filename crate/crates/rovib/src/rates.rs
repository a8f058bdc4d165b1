//! Molecule-production rate bookkeeping: detection-to-production conversion,
//! density scaling, rigid-rotor microwave-transfer frequencies and
//! accumulation dynamics.

use crate::error::{Error, Result};

/// Detection chain parameters converting counted ions back to produced
/// molecules.
#[derive(Debug, Clone, Copy)]
pub struct RateChain {
    /// Average detected ions per ionization pulse.
    pub ions_per_pulse: f64,
    /// Experiment repetition rate (Hz).
    pub rep_rate_hz: f64,
    /// Geometric overlap of the ionization volume with the molecule cloud.
    pub overlap: f64,
    /// On-resonance ionization probability.
    pub ionization_prob: f64,
    /// Ion detector efficiency.
    pub detector_eff: f64,
}

impl RateChain {
    pub fn validate(&self) -> Result<()> {
        if self.ions_per_pulse < 0.0 {
            return Err(Error::invalid("ions_per_pulse must be non-negative"));
        }
        if !(self.rep_rate_hz > 0.0) {
            return Err(Error::invalid("rep_rate_hz must be positive"));
        }
        for (name, f) in [
            ("overlap", self.overlap),
            ("ionization_prob", self.ionization_prob),
            ("detector_eff", self.detector_eff),
        ] {
            if !(f > 0.0 && f <= 1.0) {
                return Err(Error::invalid(format!("{name} must lie in (0, 1], got {f}")));
            }
        }
        Ok(())
    }

    /// Detected ions per second.
    pub fn detection_rate_hz(&self) -> f64 {
        self.ions_per_pulse * self.rep_rate_hz
    }

    /// Combined detection efficiency.
    pub fn combined_efficiency(&self) -> f64 {
        self.overlap * self.ionization_prob * self.detector_eff
    }
}

/// Molecules produced per second: ions·rep / (overlap·P_ion·η_det).
pub fn production_rate(chain: &RateChain) -> Result<f64> {
    chain.validate()?;
    Ok(chain.detection_rate_hz() / chain.combined_efficiency())
}

/// Two-body density scaling: PA rate ∝ n₁·n₂, so the rate scales by the
/// product of the species' density factors.
pub fn scale_rate(rate: f64, density_factor_1: f64, density_factor_2: f64) -> Result<f64> {
    if !(density_factor_1 > 0.0) || !(density_factor_2 > 0.0) {
        return Err(Error::invalid("density factors must be positive"));
    }
    Ok(rate * density_factor_1 * density_factor_2)
}

/// Rigid-rotor microwave frequencies for a stepwise J → J−1 transfer ladder,
/// ΔE = 2B·J per step, ordered from `j_from` down to `j_to` (GHz).
pub fn microwave_transfer_frequencies(b_lower_ghz: f64, j_from: u32, j_to: u32) -> Result<Vec<f64>> {
    if !(b_lower_ghz > 0.0) {
        return Err(Error::invalid("rotational constant must be positive"));
    }
    if j_to > j_from {
        return Err(Error::invalid(format!(
            "only downward transfer is modeled (J = {j_from} → {j_to} requested)"
        )));
    }
    Ok((j_to + 1..=j_from)
        .rev()
        .map(|j| 2.0 * b_lower_ghz * j as f64)
        .collect())
}

/// Constant production against a lumped first-order loss.
#[derive(Debug, Clone, Copy)]
pub struct AccumulationModel {
    /// Production rate R (molecules/s).
    pub production_rate: f64,
    /// Loss rate Γ (1/s).
    pub loss_rate: f64,
    /// Accumulation time (s).
    pub t: f64,
}

impl AccumulationModel {
    pub fn validate(&self) -> Result<()> {
        if self.production_rate < 0.0 || self.loss_rate < 0.0 || self.t < 0.0 {
            return Err(Error::invalid("rates and time must be non-negative"));
        }
        Ok(())
    }
}

/// Closed-form accumulated number N(t) = (R/Γ)(1 − e^(−Γt)), or R·t for Γ = 0.
pub fn accumulate(model: &AccumulationModel) -> Result<f64> {
    model.validate()?;
    let (r, g, t) = (model.production_rate, model.loss_rate, model.t);
    if g == 0.0 {
        Ok(r * t)
    } else {
        Ok(r / g * (1.0 - (-g * t).exp()))
    }
}
