//! Thermal photoassociation lineshapes and temperature fits, plus the
//! collision-kinematics helpers (relative/center-of-mass temperatures and the
//! over-barrier partial-wave fraction).
//!
//! The line profile is a Lorentzian of natural width γ convolved with the
//! 3-D Maxwell-Boltzmann collision-energy distribution √E·e^(−E/kBT): each
//! collision energy E shifts the resonance to the red by E/h, giving the
//! characteristic red-shaded thermal wing.

use crate::error::{Error, Result};
use crate::fit::{least_squares, FitOptions};
use crate::math::adaptive_simpson;
use crate::spectrum::Spectrum;
use crate::units;

/// Model of a single temperature-broadened PA resonance.
#[derive(Debug, Clone, Copy)]
pub struct ThermalLineModel {
    /// Unshifted (zero collision energy) resonance position, MHz.
    pub nu0_mhz: f64,
    /// Relative collision temperature, µK.
    pub t_uk: f64,
    /// Natural linewidth (Lorentzian FWHM), MHz.
    pub gamma_mhz: f64,
    /// Integrated line area in signal·MHz units.
    pub amplitude: f64,
    pub baseline: f64,
}

impl ThermalLineModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_uk > 0.0) || !(self.gamma_mhz > 0.0) || self.amplitude < 0.0 {
            return Err(Error::invalid(format!(
                "thermal line model needs T > 0, γ > 0, amplitude ≥ 0 \
                 (got T = {} µK, γ = {} MHz, amplitude = {})",
                self.t_uk, self.gamma_mhz, self.amplitude
            )));
        }
        Ok(())
    }
}

/// Unit-area Lorentzian of FWHM `gamma` centered at 0.
fn lorentzian_area(u: f64, gamma: f64) -> f64 {
    let hw = 0.5 * gamma;
    (hw / std::f64::consts::PI) / (u * u + hw * hw)
}

/// Unit-area thermal kernel K(δ), δ = ν − ν₀ in MHz:
/// K(δ) = (1/Γ(3/2)) ∫₀^∞ √x e^(−x) L_γ(δ + s·x) dx with s = kB·T/h.
///
/// Evaluated with the substitution x = t² (smooth integrand) by adaptive
/// Simpson quadrature to 1e-7 relative. The Lorentzian is a spike of known
/// position x = −δ/s and half-width γ/(2s) in collision-energy units, so the
/// quadrature segments are cut there; otherwise the adaptive error estimate
/// could miss it entirely on the red wing.
pub fn thermal_kernel(delta_mhz: f64, t_uk: f64, gamma_mhz: f64) -> f64 {
    let s = units::BOLTZMANN_MHZ_PER_UK * t_uk;
    let integrand =
        |t: f64| t * t * (-t * t).exp() * lorentzian_area(delta_mhz + s * t * t, gamma_mhz);

    const X_MAX: f64 = 42.0;
    let mut cuts = vec![0.0];
    let x_c = -delta_mhz / s;
    let w = gamma_mhz / (2.0 * s);
    if x_c > 0.0 {
        for k in [-8.0, -3.0, -1.0, 0.0, 1.0, 3.0, 8.0] {
            let x = x_c + k * w;
            if x > 0.0 && x < X_MAX {
                cuts.push(x);
            }
        }
    }
    cuts.push(X_MAX);
    cuts.sort_by(f64::total_cmp);

    let norm = 4.0 / std::f64::consts::PI.sqrt();
    let integral: f64 = cuts
        .windows(2)
        .map(|seg| adaptive_simpson(&integrand, seg[0].sqrt(), seg[1].sqrt(), 1e-7))
        .sum();
    norm * integral
}

/// Required half-span around ν₀ for synthesis and fitting.
fn required_halfspan(t_uk: f64, gamma_mhz: f64) -> f64 {
    10.0 * gamma_mhz.max(units::BOLTZMANN_MHZ_PER_UK * t_uk)
}

/// Synthesize S(ν) = baseline + amplitude·K(ν − ν₀) on the given grid (MHz).
///
/// The grid must span at least ±10·max(γ, kBT/h) around ν₀.
pub fn thermal_lineshape(model: &ThermalLineModel, nu_mhz: &[f64]) -> Result<Spectrum> {
    model.validate()?;
    if nu_mhz.len() < 2 {
        return Err(Error::invalid("frequency grid needs at least 2 points"));
    }
    let need = required_halfspan(model.t_uk, model.gamma_mhz);
    let lo = nu_mhz[0];
    let hi = *nu_mhz.last().unwrap();
    if lo > model.nu0_mhz - need || hi < model.nu0_mhz + need {
        return Err(Error::GridTooNarrow {
            span: hi - lo,
            required: 2.0 * need,
            unit: "MHz",
        });
    }
    let signal: Vec<f64> = nu_mhz
        .iter()
        .map(|&nu| model.baseline + model.amplitude * thermal_kernel(nu - model.nu0_mhz, model.t_uk, model.gamma_mhz))
        .collect();
    let mut spec = Spectrum::new(nu_mhz.to_vec(), signal, "MHz")?;
    spec.meta.insert("model".into(), "thermal_pa_line".into());
    spec.meta.insert("nu0_MHz".into(), format!("{}", model.nu0_mhz));
    spec.meta.insert("T_uK".into(), format!("{}", model.t_uk));
    spec.meta.insert("gamma_MHz".into(), format!("{}", model.gamma_mhz));
    spec.meta.insert("amplitude".into(), format!("{}", model.amplitude));
    spec.meta.insert("baseline".into(), format!("{}", model.baseline));
    Ok(spec)
}

/// Result of [`fit_temperature`].
#[derive(Debug, Clone)]
pub struct TemperatureFit {
    pub model: ThermalLineModel,
    /// Row-major 4×4 covariance of (ν₀, T, amplitude, baseline).
    pub covariance: Option<Vec<f64>>,
    /// 1σ temperature uncertainty from the covariance, µK.
    pub t_std_uk: Option<f64>,
    /// Weighted residual sum of squares.
    pub wrss: f64,
    pub converged: bool,
    /// T ended on the (0.1 µK, 1 K) search bounds; the temperature is then
    /// not determined by the data.
    pub t_at_bound: bool,
    /// Initial temperature (µK) of the multi-start that produced the fit.
    pub start_t_uk: f64,
}

const T_STARTS_UK: [f64; 5] = [50.0, 150.0, 500.0, 1500.0, 5000.0];
const T_LO_UK: f64 = 0.1;
const T_HI_UK: f64 = 1e6;

/// Fit (ν₀, T, amplitude, baseline) with γ held fixed, by weighted
/// Levenberg–Marquardt with multi-start over five initial temperatures
/// (ranked by initial residual; later starts are tried if a fit fails to
/// converge or pins T at a bound).
pub fn fit_temperature(spectrum: &Spectrum, gamma_mhz: f64) -> Result<TemperatureFit> {
    if gamma_mhz <= 0.0 {
        return Err(Error::invalid("gamma must be positive"));
    }
    if spectrum.len() < 20 {
        return Err(Error::invalid(format!(
            "temperature fit needs at least 20 samples, got {}",
            spectrum.len()
        )));
    }
    let nu = &spectrum.nu;
    let y = &spectrum.signal;
    let weights: Vec<f64> = match &spectrum.sigma {
        Some(s) => {
            if s.iter().any(|&x| !(x > 0.0)) {
                return Err(Error::invalid("uncertainties must be positive"));
            }
            s.iter().map(|&x| 1.0 / x).collect()
        }
        None => vec![1.0; nu.len()],
    };

    let y_min = y.iter().cloned().fold(f64::INFINITY, f64::min);
    let y_max = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let i_peak = y
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap();
    let nu_peak = nu[i_peak];

    let residuals = |p: &[f64], r: &mut [f64]| {
        let (nu0, t, amp, base) = (p[0], p[1], p[2], p[3]);
        for i in 0..nu.len() {
            let model = base + amp * thermal_kernel(nu[i] - nu0, t.max(T_LO_UK), gamma_mhz);
            r[i] = weights[i] * (y[i] - model);
        }
    };

    // Rank the five starts by their initial weighted RSS.
    let mut starts: Vec<(f64, Vec<f64>)> = T_STARTS_UK
        .iter()
        .map(|&t| {
            // peak of the kernel sits slightly red of δ = 0
            let s = units::BOLTZMANN_MHZ_PER_UK * t;
            let k_peak = [0.0, -0.5 * s, -s, -2.0 * s]
                .iter()
                .map(|&d| thermal_kernel(d, t, gamma_mhz))
                .fold(0.0f64, f64::max);
            let amp0 = ((y_max - y_min) / k_peak).max(0.0);
            vec![nu_peak, t, amp0, y_min]
        })
        .map(|p0| {
            let mut r = vec![0.0; nu.len()];
            residuals(&p0, &mut r);
            (r.iter().map(|x| x * x).sum::<f64>(), p0)
        })
        .collect();
    starts.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut opts = FitOptions::new(4);
    opts.max_iter = 80;
    opts.bounds[1] = (T_LO_UK, T_HI_UK);
    opts.bounds[2] = (0.0, f64::INFINITY);
    opts.diff_floor = vec![1e-4 * gamma_mhz, 1e-3, 1e-12, 1e-12];

    let mut best: Option<TemperatureFit> = None;
    for (_, p0) in &starts {
        let outcome = least_squares(residuals, nu.len(), p0, &opts)?;
        let t_at_bound = outcome.at_lower[1] || outcome.at_upper[1];
        let fit = TemperatureFit {
            model: ThermalLineModel {
                nu0_mhz: outcome.params[0],
                t_uk: outcome.params[1],
                gamma_mhz,
                amplitude: outcome.params[2],
                baseline: outcome.params[3],
            },
            t_std_uk: outcome.std_err(1),
            covariance: outcome.covariance.clone(),
            wrss: outcome.wrss,
            converged: outcome.converged,
            t_at_bound,
            start_t_uk: p0[1],
        };
        let better = best
            .as_ref()
            .map(|b| fit.wrss < b.wrss)
            .unwrap_or(true);
        if better {
            best = Some(fit.clone());
        }
        if fit.converged && !fit.t_at_bound {
            return Ok(fit);
        }
    }
    let best = best.expect("at least one start evaluated");
    // A temperature pinned at the search bounds is a legitimate (flagged)
    // outcome: the data carry no thermal information.
    if !best.converged && !best.t_at_bound {
        return Err(Error::FitNonConvergence(format!(
            "temperature fit stalled at weighted RSS {:.6e} (best start {} µK)",
            best.wrss, best.start_t_uk
        )));
    }
    Ok(best)
}

/// Relative collision temperature of two Maxwell ensembles:
/// T_rel = µ·(T₁/m₁ + T₂/m₂), from ⟨v_rel²⟩ additivity.
pub fn relative_collision_temperature(m1: f64, t1_uk: f64, m2: f64, t2_uk: f64) -> f64 {
    let mu = m1 * m2 / (m1 + m2);
    mu * (t1_uk / m1 + t2_uk / m2)
}

/// Center-of-mass temperature of independently thermal pairs:
/// T_com = (m₁T₁ + m₂T₂)/(m₁+m₂), from the COM momentum variance.
pub fn pair_com_temperature(m1: f64, t1_uk: f64, m2: f64, t2_uk: f64) -> f64 {
    (m1 * t1_uk + m2 * t2_uk) / (m1 + m2)
}

/// Fraction of a 3-D Maxwell-Boltzmann collision-energy distribution above a
/// barrier E_b: Γ(3/2, E_b/kBT)/Γ(3/2), evaluated by adaptive quadrature of
/// the √E·e^(−E/kBT) tail.
pub fn partial_wave_fraction(t_uk: f64, e_b_mk: f64) -> f64 {
    debug_assert!(t_uk > 0.0 && e_b_mk >= 0.0);
    let x0 = e_b_mk * 1e3 / t_uk;
    let t_lo = x0.sqrt();
    let integrand = |t: f64| t * t * (-t * t).exp();
    let norm = 4.0 / std::f64::consts::PI.sqrt();
    norm * adaptive_simpson(&integrand, t_lo, t_lo + 8.0, 1e-9)
}
