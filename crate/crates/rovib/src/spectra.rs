//! Depletion- and REMPI-spectrum machinery: rotational line positions from
//! ω₀ + B′J′(J′+1) − B″J″(J″+1), multiplicative-dip spectrum synthesis,
//! two-parameter depletion fits, parity-hypothesis ranking and rotational
//! constant extraction.

use std::collections::BTreeMap;
use std::io::Write;

use crate::error::{Error, Result};
use crate::fit::{least_squares, FitOptions};
use crate::radial::RovibLevel;
use crate::spectrum::Spectrum;
use crate::transition::{self, franck_condon, honl_london, Branch, Parity};
use crate::units;

/// Excited-state parity hypothesis for the photoassociation step, in the
/// total-parity labels (+/−). The e/f character this selects depends on J:
/// a ¹Π level has total parity +(−1)^J for e and −(−1)^J for f.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParityHypothesis {
    Plus,
    Minus,
    Both,
}

impl ParityHypothesis {
    /// The e/f component this hypothesis selects at upper-state J.
    pub fn level_parity(self, j_upper: u32) -> Parity {
        let even = j_upper % 2 == 0;
        match self {
            ParityHypothesis::Plus => {
                if even {
                    Parity::E
                } else {
                    Parity::F
                }
            }
            ParityHypothesis::Minus => {
                if even {
                    Parity::F
                } else {
                    Parity::E
                }
            }
            ParityHypothesis::Both => Parity::Both,
        }
    }
}

impl std::str::FromStr for ParityHypothesis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "plus" | "+" => Ok(ParityHypothesis::Plus),
            "minus" | "-" => Ok(ParityHypothesis::Minus),
            "both" => Ok(ParityHypothesis::Both),
            other => Err(Error::invalid(format!(
                "unknown parity hypothesis `{other}` (plus|minus|both)"
            ))),
        }
    }
}

/// Dip profile family for depletion resonances.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DipProfile {
    Lorentzian,
    Gaussian,
}

impl DipProfile {
    /// Unit-peak profile of the given FWHM centered at 0.
    fn value(self, u: f64, fwhm: f64) -> f64 {
        match self {
            DipProfile::Lorentzian => {
                let x = 2.0 * u / fwhm;
                1.0 / (1.0 + x * x)
            }
            DipProfile::Gaussian => {
                let x = u / fwhm;
                (-4.0 * std::f64::consts::LN_2 * x * x).exp()
            }
        }
    }
}

/// Model of a depletion band: one vibrational transition with rotational
/// structure, probed through populated ground-state J″ levels.
#[derive(Debug, Clone)]
pub struct DepletionModel {
    /// Term energy difference between the excited and ground vibrational
    /// level (cm⁻¹).
    pub omega0_cm1: f64,
    /// Excited-state rotational constant (GHz).
    pub b_upper_ghz: f64,
    /// Ground-state rotational constant (GHz).
    pub b_lower_ghz: f64,
    /// Ground-state rotational populations J″ → fraction (should sum to 1).
    pub population: BTreeMap<u32, f64>,
    /// Depletion dip FWHM (GHz).
    pub dip_fwhm_ghz: f64,
    /// Depth of the strongest dip, fraction of the baseline in [0, 1].
    pub depth: f64,
    pub baseline: f64,
    pub parity_hypothesis: ParityHypothesis,
    pub profile: DipProfile,
}

impl DepletionModel {
    pub fn validate(&self) -> Result<()> {
        if self.population.is_empty() {
            return Err(Error::invalid("depletion model has no populated J\" levels"));
        }
        let pop_sum: f64 = self.population.values().sum();
        if (pop_sum - 1.0).abs() > 1e-6 {
            return Err(Error::invalid(format!(
                "populations must sum to 1, got {pop_sum}"
            )));
        }
        if self.population.values().any(|&p| p < 0.0) {
            return Err(Error::invalid("populations must be non-negative"));
        }
        if !(self.dip_fwhm_ghz > 0.0) {
            return Err(Error::invalid("dip FWHM must be positive"));
        }
        if !(0.0..=1.0).contains(&self.depth) {
            return Err(Error::invalid(format!("depth must lie in [0,1], got {}", self.depth)));
        }
        Ok(())
    }

    /// Populations implied by PA through (J′ PA level, parity hypothesis)
    /// followed by spontaneous decay.
    pub fn population_from_pa(j_pa: u32, hypothesis: ParityHypothesis) -> Result<BTreeMap<u32, f64>> {
        transition::population_after_decay(j_pa, hypothesis.level_parity(j_pa))
    }
}

/// One predicted line.
#[derive(Debug, Clone)]
pub struct LineEntry {
    /// Human label; depletion lines use `J″-J′`, REMPI lines `v″->v′`.
    pub label: String,
    pub j_lower: u32,
    pub j_upper: u32,
    pub frequency_cm1: f64,
    pub weight: f64,
}

/// Frequency-sorted list of predicted lines.
#[derive(Debug, Clone, Default)]
pub struct LineList {
    pub rows: Vec<LineEntry>,
}

impl LineList {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "label,J_lower,J_upper,freq_cm-1,weight")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{}",
                r.label, r.j_lower, r.j_upper, r.frequency_cm1, r.weight
            )?;
        }
        Ok(())
    }
}

/// Depletion resonance positions ω₀ + B′J′(J′+1) − B″J″(J″+1) for every
/// populated J″ and every absorption-allowed J′ ∈ {J″−1, J″, J″+1}, J′ ≥ 1.
/// Weights are Hönl-London × population.
pub fn depletion_positions(model: &DepletionModel) -> Result<LineList> {
    model.validate()?;
    let b_up = model.b_upper_ghz / units::CM1_GHZ;
    let b_lo = model.b_lower_ghz / units::CM1_GHZ;
    let mut rows = Vec::new();
    for (&j_lower, &pop) in &model.population {
        for branch in [Branch::P, Branch::Q, Branch::R] {
            let j_upper = match branch {
                Branch::P => match j_lower.checked_sub(1) {
                    Some(j) => j,
                    None => continue,
                },
                Branch::Q => j_lower,
                Branch::R => j_lower + 1,
            };
            if j_upper < 1 {
                continue;
            }
            let hl = honl_london(branch, j_lower)?;
            if hl == 0.0 {
                continue;
            }
            let frequency = model.omega0_cm1
                + b_up * (j_upper * (j_upper + 1)) as f64
                - b_lo * (j_lower * (j_lower + 1)) as f64;
            rows.push(LineEntry {
                label: format!("{j_lower}-{j_upper}"),
                j_lower,
                j_upper,
                frequency_cm1: frequency,
                weight: hl * pop,
            });
        }
    }
    rows.sort_by(|a, b| a.frequency_cm1.total_cmp(&b.frequency_cm1));
    Ok(LineList { rows })
}

/// Synthesize a depletion spectrum on `nu_cm1`:
/// S(ν) = baseline·Π_i (1 − depth·w̃_i·L_i(ν)) with unit-peak profiles of
/// FWHM `dip_fwhm` and weights normalized to the strongest line. The grid
/// must cover every line ± 3 FWHM.
pub fn simulate_depletion(model: &DepletionModel, nu_cm1: &[f64]) -> Result<Spectrum> {
    let lines = depletion_positions(model)?;
    if nu_cm1.len() < 2 {
        return Err(Error::invalid("frequency grid needs at least 2 points"));
    }
    let fwhm = model.dip_fwhm_ghz / units::CM1_GHZ;
    let lo = nu_cm1[0];
    let hi = *nu_cm1.last().unwrap();
    for line in &lines.rows {
        if line.frequency_cm1 - 3.0 * fwhm < lo || line.frequency_cm1 + 3.0 * fwhm > hi {
            return Err(Error::GridTooNarrow {
                span: hi - lo,
                required: (line.frequency_cm1 + 3.0 * fwhm - lo).max(hi - line.frequency_cm1 + 3.0 * fwhm),
                unit: "cm-1",
            });
        }
    }
    let signal = depletion_signal(model, &lines, nu_cm1);
    let mut spec = Spectrum::new(nu_cm1.to_vec(), signal, "cm-1")?;
    spec.meta.insert("model".into(), "depletion".into());
    spec.meta.insert("omega0_cm-1".into(), format!("{}", model.omega0_cm1));
    spec.meta.insert("B_upper_GHz".into(), format!("{}", model.b_upper_ghz));
    spec.meta.insert("B_lower_GHz".into(), format!("{}", model.b_lower_ghz));
    spec.meta.insert("dip_fwhm_GHz".into(), format!("{}", model.dip_fwhm_ghz));
    spec.meta.insert("depth".into(), format!("{}", model.depth));
    spec.meta.insert("baseline".into(), format!("{}", model.baseline));
    Ok(spec)
}

fn depletion_signal(model: &DepletionModel, lines: &LineList, nu_cm1: &[f64]) -> Vec<f64> {
    let fwhm = model.dip_fwhm_ghz / units::CM1_GHZ;
    let w_max = lines
        .rows
        .iter()
        .map(|l| l.weight)
        .fold(0.0f64, f64::max)
        .max(1e-300);
    nu_cm1
        .iter()
        .map(|&nu| {
            let mut survival = 1.0;
            for line in &lines.rows {
                let profile = model.profile.value(nu - line.frequency_cm1, fwhm);
                survival *= 1.0 - model.depth * (line.weight / w_max) * profile;
            }
            model.baseline * survival
        })
        .collect()
}

/// Result of a two-parameter depletion fit.
#[derive(Debug, Clone)]
pub struct DepletionFit {
    pub model: DepletionModel,
    /// Unweighted residual sum of squares.
    pub rss: f64,
    pub converged: bool,
    /// Depth came out ≈ 0: the data show no dips matching the template.
    pub flagged_flat: bool,
}

fn rss_of(model: &DepletionModel, lines: &LineList, spec: &Spectrum) -> f64 {
    let signal = depletion_signal(model, lines, &spec.nu);
    spec.signal
        .iter()
        .zip(&signal)
        .map(|(&y, &m)| (y - m) * (y - m))
        .sum()
}

/// Fit `{baseline, depth}` with every position, width and population held at
/// the template values: a coarse depth scan with the baseline solved linearly,
/// then LM polish of the pair.
pub fn fit_depletion(spectrum: &Spectrum, template: &DepletionModel) -> Result<DepletionFit> {
    template.validate()?;
    let lines = depletion_positions(template)?;
    if spectrum.len() < 4 {
        return Err(Error::invalid("depletion fit needs at least 4 samples"));
    }

    // Coarse scan: for fixed depth the model is baseline·F(ν), so the
    // optimal baseline is the linear least-squares amplitude.
    let mut best = (f64::INFINITY, 0.0, spectrum.signal.iter().sum::<f64>() / spectrum.len() as f64);
    let mut probe = template.clone();
    for k in 0..=40 {
        let depth = k as f64 / 40.0;
        probe.depth = depth;
        probe.baseline = 1.0;
        let shape = depletion_signal(&probe, &lines, &spectrum.nu);
        let num: f64 = shape.iter().zip(&spectrum.signal).map(|(&f, &y)| f * y).sum();
        let den: f64 = shape.iter().map(|&f| f * f).sum();
        if den <= 0.0 {
            continue;
        }
        let baseline = num / den;
        probe.baseline = baseline;
        let rss = rss_of(&probe, &lines, spectrum);
        if rss < best.0 {
            best = (rss, depth, baseline);
        }
    }

    let mut fitted = template.clone();
    let lines_for_fit = lines.clone();
    let spec_nu = spectrum.nu.clone();
    let spec_y = spectrum.signal.clone();
    let template_fit = template.clone();
    let residuals = move |p: &[f64], r: &mut [f64]| {
        let mut m = template_fit.clone();
        m.baseline = p[0];
        m.depth = p[1].clamp(0.0, 1.0);
        let signal = depletion_signal(&m, &lines_for_fit, &spec_nu);
        for i in 0..spec_y.len() {
            r[i] = spec_y[i] - signal[i];
        }
    };
    let mut opts = FitOptions::new(2);
    opts.bounds[0] = (0.0, f64::INFINITY);
    opts.bounds[1] = (0.0, 1.0);
    opts.diff_floor = vec![1e-9, 1e-9];
    let out = least_squares(residuals, spectrum.len(), &[best.2, best.1], &opts)?;
    fitted.baseline = out.params[0];
    fitted.depth = out.params[1];
    let rss = rss_of(&fitted, &lines, spectrum);
    Ok(DepletionFit {
        flagged_flat: fitted.depth < 0.02,
        model: fitted,
        rss,
        converged: out.converged,
    })
}

/// Ranking of parity-hypothesis templates by residual sum of squares.
#[derive(Debug, Clone)]
pub struct ParityRanking {
    /// (template index, rss), best first.
    pub ranking: Vec<(usize, f64)>,
    /// rss of the runner-up divided by the winner's; close to 1 means the
    /// data cannot distinguish the hypotheses.
    pub rss_ratio: f64,
    pub tie: bool,
}

impl ParityRanking {
    pub fn winner(&self) -> usize {
        self.ranking[0].0
    }
}

/// Fit every template with [`fit_depletion`] and rank by RSS.
pub fn select_parity_model(
    spectrum: &Spectrum,
    templates: &[DepletionModel],
) -> Result<ParityRanking> {
    if templates.len() < 2 {
        return Err(Error::invalid("parity selection needs at least 2 templates"));
    }
    let mut ranking = Vec::with_capacity(templates.len());
    for (i, t) in templates.iter().enumerate() {
        ranking.push((i, fit_depletion(spectrum, t)?.rss));
    }
    ranking.sort_by(|a, b| a.1.total_cmp(&b.1));
    let rss_ratio = ranking[1].1 / ranking[0].1.max(1e-300);
    Ok(ParityRanking {
        rss_ratio,
        tie: rss_ratio < 1.05,
        ranking,
    })
}

/// Result of [`fit_rotational_constants`].
#[derive(Debug, Clone)]
pub struct RotationalFit {
    pub model: DepletionModel,
    pub rss: f64,
    pub converged: bool,
    /// 1σ uncertainties from the fit covariance.
    pub omega0_std_cm1: Option<f64>,
    pub b_upper_std_ghz: Option<f64>,
}

/// Count distinct dip positions of the template that fall inside the grid,
/// merging lines closer than half a linewidth.
fn resolved_dips(template: &DepletionModel, lo: f64, hi: f64) -> Result<usize> {
    let lines = depletion_positions(template)?;
    let fwhm = template.dip_fwhm_ghz / units::CM1_GHZ;
    let mut freqs: Vec<f64> = lines
        .rows
        .iter()
        .filter(|l| l.frequency_cm1 >= lo && l.frequency_cm1 <= hi && l.weight > 0.0)
        .map(|l| l.frequency_cm1)
        .collect();
    freqs.sort_by(f64::total_cmp);
    let mut clusters = 0;
    let mut last = f64::NEG_INFINITY;
    for f in freqs {
        if f - last > 0.5 * fwhm {
            clusters += 1;
        }
        last = f;
    }
    Ok(clusters)
}

/// Fit `{ω₀, B′, baseline, depth}` with B″, widths and populations held at
/// the template values. ω₀ is first located by a coarse scan across the
/// spectrum (the dips are narrow, so LM alone cannot recover an offset of
/// many linewidths), then the four parameters are polished together.
pub fn fit_rotational_constants(
    spectrum: &Spectrum,
    template: &DepletionModel,
) -> Result<RotationalFit> {
    template.validate()?;
    let (lo, hi) = spectrum.span();
    let n_dips = resolved_dips(template, lo, hi)?;
    if n_dips < 3 {
        return Err(Error::UnderDetermined(format!(
            "rotational-constant fit needs at least 3 resolved dips in range, template predicts {n_dips}"
        )));
    }

    let fwhm = template.dip_fwhm_ghz / units::CM1_GHZ;
    // Coarse ω₀ scan: shift the whole line pattern across the grid.
    let mut scan_best = (f64::INFINITY, template.omega0_cm1);
    let pattern_span = {
        let lines = depletion_positions(template)?;
        let fs: Vec<f64> = lines.rows.iter().map(|l| l.frequency_cm1).collect();
        fs.iter().cloned().fold(f64::INFINITY, f64::min)..fs.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    };
    let shift_lo = lo - (pattern_span.start - template.omega0_cm1);
    let shift_hi = hi - (pattern_span.end - template.omega0_cm1);
    let mut probe = template.clone();
    let n_steps = (((shift_hi - shift_lo) / (0.25 * fwhm)).ceil() as usize).clamp(2, 4000);
    for k in 0..=n_steps {
        probe.omega0_cm1 = shift_lo + (shift_hi - shift_lo) * k as f64 / n_steps as f64;
        let fit = fit_depletion(spectrum, &probe)?;
        if fit.rss < scan_best.0 {
            scan_best = (fit.rss, probe.omega0_cm1);
        }
    }

    let spec_nu = spectrum.nu.clone();
    let spec_y = spectrum.signal.clone();
    let template_fit = template.clone();
    let residuals = move |p: &[f64], r: &mut [f64]| {
        let mut m = template_fit.clone();
        m.omega0_cm1 = p[0];
        m.b_upper_ghz = p[1];
        m.baseline = p[2];
        m.depth = p[3].clamp(0.0, 1.0);
        let lines = match depletion_positions(&m) {
            Ok(l) => l,
            Err(_) => {
                r.fill(f64::INFINITY);
                return;
            }
        };
        let signal = depletion_signal(&m, &lines, &spec_nu);
        for i in 0..spec_y.len() {
            r[i] = spec_y[i] - signal[i];
        }
    };

    let depth0 = if template.depth > 0.0 { template.depth } else { 0.5 };
    let baseline0 = spectrum.signal.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut opts = FitOptions::new(4);
    opts.bounds[1] = (0.0, f64::INFINITY);
    opts.bounds[2] = (0.0, f64::INFINITY);
    opts.bounds[3] = (0.0, 1.0);
    opts.diff_floor = vec![1e-4 * fwhm, 1e-6 * template.b_upper_ghz.max(1.0), 1e-9, 1e-9];
    let out = least_squares(
        residuals,
        spectrum.len(),
        &[scan_best.1, template.b_upper_ghz, baseline0, depth0],
        &opts,
    )?;
    if !out.converged {
        return Err(Error::FitNonConvergence(format!(
            "rotational-constant fit stalled at RSS {:.6e}",
            out.wrss
        )));
    }
    let mut fitted = template.clone();
    fitted.omega0_cm1 = out.params[0];
    fitted.b_upper_ghz = out.params[1];
    fitted.baseline = out.params[2];
    fitted.depth = out.params[3];
    let lines = depletion_positions(&fitted)?;
    let rss = rss_of(&fitted, &lines, spectrum);
    Ok(RotationalFit {
        model: fitted,
        rss,
        converged: out.converged,
        omega0_std_cm1: out.std_err(0),
        b_upper_std_ghz: out.std_err(1),
    })
}

/// All pairwise bound-bound line positions between two solved manifolds,
/// labeled `v″->v′`, with Franck–Condon weights, sorted by frequency.
pub fn rempi_line_positions(
    x_levels: &[RovibLevel],
    b_levels: &[RovibLevel],
) -> Result<LineList> {
    let mut rows = Vec::with_capacity(x_levels.len() * b_levels.len());
    for x in x_levels {
        for b in b_levels {
            rows.push(LineEntry {
                label: format!("{}->{}", x.v, b.v),
                j_lower: x.j,
                j_upper: b.j,
                frequency_cm1: b.energy - x.energy,
                weight: franck_condon(x, b)?,
            });
        }
    }
    rows.sort_by(|a, b| a.frequency_cm1.total_cmp(&b.frequency_cm1));
    Ok(LineList { rows })
}
