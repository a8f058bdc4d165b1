//! Built-in validation suite: recomputes the published reference values this
//! toolkit is benchmarked against (production rates, transfer frequencies,
//! collision kinematics, barrier height, line-fit round trips, branch rules)
//! and reports pass/fail per check. Checks that need external potential-curve
//! or dipole data are skipped when the files are absent.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use crate::lineshape::{
    fit_temperature, pair_com_temperature, partial_wave_fraction,
    relative_collision_temperature, thermal_lineshape, ThermalLineModel,
};
use crate::potential::{centrifugal_barrier, load_curve, EffectivePotential};
use crate::radial::{solve_level, SolveGrid};
use crate::rates::{
    accumulate, microwave_transfer_frequencies, production_rate, scale_rate, AccumulationModel,
    RateChain,
};
use crate::spectra::{
    fit_rotational_constants, select_parity_model, simulate_depletion, DepletionModel, DipProfile,
    ParityHypothesis,
};
use crate::transition::{
    allowed_branches, decay_table, honl_london, Branch, DipoleFunction, ManifoldSolver, Parity,
    RotationalTreatment,
};
use crate::units;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

impl fmt::Display for CheckStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CheckStatus::Pass => "PASS",
            CheckStatus::Fail => "FAIL",
            CheckStatus::Skipped => "SKIP",
        })
    }
}

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: String,
    pub status: CheckStatus,
    pub detail: String,
}

/// External inputs for the data-gated checks.
#[derive(Debug, Clone, Default)]
pub struct ReferenceData {
    /// Directory holding LiCs_X1Sigma.pot, LiCs_B1Pi.pot, LiCs_BX_dipole.dat.
    pub data_dir: Option<PathBuf>,
    /// Literature C6 dispersion coefficient in atomic units (E_h·a0⁶),
    /// supplied by the caller; never built in.
    pub c6_au: Option<f64>,
}

fn check(name: &str, pass: bool, detail: String) -> CheckResult {
    CheckResult {
        name: name.to_string(),
        status: if pass { CheckStatus::Pass } else { CheckStatus::Fail },
        detail,
    }
}

fn skip(name: &str, detail: &str) -> CheckResult {
    CheckResult {
        name: name.to_string(),
        status: CheckStatus::Skipped,
        detail: detail.to_string(),
    }
}

/// Run every check; `cfg` gates the ones that need external data.
pub fn reference_checks(cfg: &ReferenceData) -> Vec<CheckResult> {
    let mut out = Vec::new();

    // -- rate arithmetic ----------------------------------------------------
    let chain = |ions: f64| RateChain {
        ions_per_pulse: ions,
        rep_rate_hz: 20.0,
        overlap: 0.40,
        ionization_prob: 0.01,
        detector_eff: 0.20,
    };
    match (production_rate(&chain(5e-3)), production_rate(&chain(0.2))) {
        (Ok(r1), Ok(r2)) => {
            let pass = (r1 - 125.0).abs() < 1e-9 && (r2 - 5000.0).abs() < 1e-9;
            out.push(check(
                "production rates 1e2 and 5e3 molecules/s",
                pass,
                format!("5e-3 ions/pulse -> {r1} molecules/s; 0.2 -> {r2}"),
            ));
            let scaled = scale_rate(r2, 10.0, 10.0).unwrap_or(f64::NAN);
            out.push(check(
                "10x per-species density scaling to 5e5 molecules/s",
                (scaled - 5e5).abs() < 1e-6,
                format!("5e3 x 10 x 10 -> {scaled}"),
            ));
        }
        _ => out.push(check("production rates", false, "rate chain rejected".into())),
    }

    // -- microwave transfer -------------------------------------------------
    match microwave_transfer_frequencies(5.62, 2, 0) {
        Ok(f) if f.len() == 2 => {
            let pass = (f[0] - 22.5).abs() < 0.1 && (f[1] - 11.2).abs() < 0.1;
            out.push(check(
                "microwave transfer 22.5 and 11.2 GHz (B\" = 5.62 GHz)",
                pass,
                format!("{:.2} and {:.2} GHz", f[0], f[1]),
            ));
        }
        other => out.push(check("microwave transfer", false, format!("{other:?}"))),
    }

    // -- collision kinematics -------------------------------------------------
    let t_rel = relative_collision_temperature(7.016, 545.0, 132.905, 250.0);
    out.push(check(
        "relative collision temperature ~530 uK",
        (t_rel - 530.0).abs() / 530.0 < 0.05,
        format!("{t_rel:.1} uK for Li 545 uK + Cs 250 uK"),
    ));
    let t_com = pair_com_temperature(7.016, 545.0, 132.905, 250.0);
    out.push(check(
        "pair center-of-mass temperature ~260 uK",
        (t_com - 260.0).abs() <= 10.0,
        format!("{t_com:.1} uK for Li 545 uK + Cs 250 uK"),
    ));

    // -- p-wave fraction ------------------------------------------------------
    let frac = partial_wave_fraction(530.0, 1.6);
    out.push(check(
        "over-barrier p-wave fraction ~0.11 (same order as the published ~5%)",
        (frac - 0.11).abs() < 0.01,
        format!("Boltzmann fraction above 1.6 mK at 530 uK: {frac:.4}"),
    ));

    // -- centrifugal barrier --------------------------------------------------
    match cfg.c6_au {
        Some(c6_au) => {
            let c6 = c6_au * units::HARTREE_CM1 * units::BOHR_RADIUS_ANGSTROM.powi(6);
            let mu = units::reduced_mass(units::MASS_LI7, units::MASS_CS133).unwrap();
            match centrifugal_barrier(c6, mu, 1) {
                Ok(b) => out.push(check(
                    "p-wave barrier 1.6 mK (15%)",
                    (b.height_mk - 1.6).abs() / 1.6 < 0.15,
                    format!(
                        "E_b = {:.3} mK at R_b = {:.1} A (C6 = {c6_au} au); analytic/numeric gap {:.1e}",
                        b.height_mk,
                        b.r_analytic,
                        b.relative_disagreement()
                    ),
                )),
                Err(e) => out.push(check("p-wave barrier", false, e.to_string())),
            }
        }
        None => out.push(skip(
            "p-wave barrier 1.6 mK",
            "no C6 supplied (pass --c6-au, e.g. the literature value 2890)",
        )),
    }

    // -- branch and parity rules ----------------------------------------------
    {
        let f2: Vec<u32> = allowed_branches(2, Parity::F)
            .map(|v| v.iter().map(|l| l.j_lower).collect())
            .unwrap_or_default();
        let b1: Vec<u32> = allowed_branches(1, Parity::Both)
            .map(|v| v.iter().map(|l| l.j_lower).collect())
            .unwrap_or_default();
        out.push(check(
            "Q-branch decay selectivity: (J'=2, f) -> J\"=2; (J'=1, both) -> J\"=0,1,2",
            f2 == vec![2] && b1 == vec![0, 1, 2],
            format!("(2,f) -> {f2:?}; (1,both) -> {b1:?}"),
        ));
        let mut sum_ok = true;
        for j in 1..=20u32 {
            let s: f64 = allowed_branches(j, Parity::Both)
                .unwrap()
                .iter()
                .map(|l| l.honl_london)
                .sum();
            sum_ok &= (s - (2 * j + 1) as f64).abs() < 1e-12;
        }
        out.push(check(
            "Honl-London sum rule 2J+1 for J = 1..20",
            sum_ok,
            "emission strengths per level".into(),
        ));
        let _ = honl_london(Branch::Q, 2);
    }

    // -- thermal lineshape round trip ------------------------------------------
    out.push(lineshape_round_trip());

    // -- depletion round trips ---------------------------------------------------
    out.push(rotational_round_trip());
    out.push(parity_ranking_check());
    out.push(depletion_depth_check());

    // -- Franck-Condon closure on a deep synthetic pair ---------------------------
    out.push(fcf_closure_check());

    // -- accumulation sanity -------------------------------------------------------
    {
        let n = accumulate(&AccumulationModel {
            production_rate: 5e5,
            loss_rate: 0.0,
            t: 2.0,
        })
        .unwrap_or(f64::NAN);
        out.push(check(
            "lossless accumulation: 5e5 molecules/s for 2 s -> 1e6",
            (n - 1e6).abs() < 1e-3,
            format!("N(2 s) = {n}"),
        ));
    }

    // -- data-gated checks ----------------------------------------------------------
    out.extend(data_gated_checks(cfg.data_dir.as_deref()));
    out
}

fn lineshape_round_trip() -> CheckResult {
    let name = "PA line temperature round trip 530(80) uK";
    let truth = ThermalLineModel {
        nu0_mhz: 0.0,
        t_uk: 530.0,
        gamma_mhz: 7.0,
        amplitude: 2000.0,
        baseline: 10.0,
    };
    let nu: Vec<f64> = (0..160).map(|i| -290.0 + 2.6 * i as f64).collect();
    let clean = match thermal_lineshape(&truth, &nu) {
        Ok(s) => s,
        Err(e) => return check(name, false, e.to_string()),
    };
    let peak = clean.signal.iter().cloned().fold(f64::MIN, f64::max) - truth.baseline;
    let mut recovered = Vec::new();
    let mut converged = 0;
    for seed in 0..50u64 {
        let noisy = clean.add_gaussian_noise(0.03 * peak, seed);
        if let Ok(fit) = fit_temperature(&noisy, 7.0) {
            if fit.converged && !fit.t_at_bound {
                converged += 1;
                recovered.push(fit.model.t_uk);
            }
        }
    }
    if recovered.is_empty() {
        return check(name, false, "no fits converged".into());
    }
    recovered.sort_by(f64::total_cmp);
    let median = recovered[recovered.len() / 2];
    check(
        name,
        converged >= 45 && (median - 530.0).abs() <= 80.0,
        format!("median T = {median:.0} uK over {converged}/50 converged fits"),
    )
}

fn j2_template() -> DepletionModel {
    DepletionModel {
        omega0_cm1: 16_895.75,
        b_upper_ghz: 3.096,
        b_lower_ghz: 5.80,
        population: BTreeMap::from([(2, 1.0)]),
        dip_fwhm_ghz: 2.0,
        depth: 0.9,
        baseline: 100.0,
        parity_hypothesis: ParityHypothesis::Minus,
        profile: DipProfile::Lorentzian,
    }
}

fn rotational_round_trip() -> CheckResult {
    let name = "depletion fit recovers B' = 3.10(5) GHz and w0 = 16895.75(2) cm-1";
    let truth = j2_template();
    let nu: Vec<f64> = (0..700).map(|i| 16_894.4 + 2.8 * i as f64 / 699.0).collect();
    let clean = match simulate_depletion(&truth, &nu) {
        Ok(s) => s,
        Err(e) => return check(name, false, e.to_string()),
    };
    let mut b_err = Vec::new();
    let mut w_err = Vec::new();
    for seed in 100..150u64 {
        let noisy = clean.add_gaussian_noise(0.05 * truth.baseline, seed);
        let mut template = truth.clone();
        template.depth = 0.5;
        if let Ok(fit) = fit_rotational_constants(&noisy, &template) {
            b_err.push((fit.model.b_upper_ghz - 3.096).abs());
            w_err.push((fit.model.omega0_cm1 - 16_895.75).abs());
        }
    }
    if b_err.len() < 45 {
        return check(name, false, format!("only {}/50 fits converged", b_err.len()));
    }
    b_err.sort_by(f64::total_cmp);
    w_err.sort_by(f64::total_cmp);
    let (bm, wm) = (b_err[b_err.len() / 2], w_err[w_err.len() / 2]);
    check(
        name,
        bm <= 0.05 && wm <= 0.02,
        format!("median |dB'| = {bm:.3} GHz, |dw0| = {wm:.4} cm-1 over {} fits", b_err.len()),
    )
}

fn parity_ranking_check() -> CheckResult {
    let name = "both-parity spectrum outranks single-parity templates";
    let make = |hyp: ParityHypothesis| {
        let mut m = j2_template();
        m.parity_hypothesis = hyp;
        m.population = DepletionModel::population_from_pa(1, hyp).unwrap();
        m
    };
    let truth = make(ParityHypothesis::Both);
    let nu: Vec<f64> = (0..700).map(|i| 16_894.4 + 2.8 * i as f64 / 699.0).collect();
    let clean = match simulate_depletion(&truth, &nu) {
        Ok(s) => s,
        Err(e) => return check(name, false, e.to_string()),
    };
    let templates = vec![
        make(ParityHypothesis::Plus),
        make(ParityHypothesis::Minus),
        make(ParityHypothesis::Both),
    ];
    let mut wins = 0;
    for seed in 200..250u64 {
        let noisy = clean.add_gaussian_noise(0.05 * truth.baseline, seed);
        if let Ok(r) = select_parity_model(&noisy, &templates) {
            if r.winner() == 2 {
                wins += 1;
            }
        }
    }
    check(name, wins >= 48, format!("{wins}/50 noise realizations"))
}

fn depletion_depth_check() -> CheckResult {
    let name = "full-depth dip reaches the background level";
    let mut m = j2_template();
    m.depth = 1.0;
    m.population = BTreeMap::from([(0, 1.0)]);
    let center = m.omega0_cm1 + 2.0 * m.b_upper_ghz / units::CM1_GHZ;
    let nu: Vec<f64> = (0..1601).map(|i| center - 1.0 + 2.0 * i as f64 / 1600.0).collect();
    match simulate_depletion(&m, &nu) {
        Ok(s) => {
            let min = s.signal.iter().cloned().fold(f64::INFINITY, f64::min);
            check(name, min < 1e-6 * m.baseline, format!("floor {min:.2e} of baseline {}", m.baseline))
        }
        Err(e) => check(name, false, e.to_string()),
    }
}

fn fcf_closure_check() -> CheckResult {
    let name = "bound-bound Franck-Condon sum close to unity for low v'";
    let mu = units::reduced_mass(units::MASS_LI7, units::MASS_CS133).unwrap();
    let x = match crate::potential::PotentialCurve::morse(5000.0, 0.9, 3.5, 0.0, "X-syn") {
        Ok(c) => c,
        Err(e) => return check(name, false, e.to_string()),
    };
    let b = match crate::potential::PotentialCurve::morse(2000.0, 0.8, 3.9, 12_000.0, "B-syn") {
        Ok(c) => c,
        Err(e) => return check(name, false, e.to_string()),
    };
    let b_pot = match EffectivePotential::new(&b, 2, mu) {
        Ok(p) => p,
        Err(e) => return check(name, false, e.to_string()),
    };
    let upper = match solve_level(&b_pot, 4, &SolveGrid::new(2.2, 9.5, 12_001).unwrap()) {
        Ok(l) => l,
        Err(e) => return check(name, false, e.to_string()),
    };
    let mut lower = ManifoldSolver::new(&x, mu, SolveGrid::new(1.9, 10.0, 16_001).unwrap());
    match decay_table(
        &upper,
        &mut lower,
        &DipoleFunction::constant(1.0),
        Parity::F,
        RotationalTreatment::ResolveBranchJ,
    ) {
        Ok(t) => {
            let pop_sum: f64 = t.rows.iter().map(|r| r.rel_pop).sum();
            check(
                name,
                t.fcf_sum >= 0.999 && (pop_sum - 1.0).abs() < 1e-9,
                format!("FCF sum {:.5}, population sum {pop_sum:.12}", t.fcf_sum),
            )
        }
        Err(e) => check(name, false, e.to_string()),
    }
}

/// File names looked up under the data directory for the gated checks.
pub const X_CURVE_FILE: &str = "LiCs_X1Sigma.pot";
pub const B_CURVE_FILE: &str = "LiCs_B1Pi.pot";
pub const DIPOLE_FILE: &str = "LiCs_BX_dipole.dat";

fn data_gated_checks(data_dir: Option<&Path>) -> Vec<CheckResult> {
    let names = [
        "decay branching from B v'=4 (v\"=0: 23%, sum 11-20: 35%)",
        "B(v'=12) = 3.096 GHz (1%)",
        "ionization line v\"=0 -> v'=14 at 16999.4 cm-1 (2 cm-1)",
    ];
    let Some(dir) = data_dir else {
        return names
            .iter()
            .map(|n| skip(n, "no data directory given (external curve/dipole files required)"))
            .collect();
    };
    let x_path = dir.join(X_CURVE_FILE);
    let b_path = dir.join(B_CURVE_FILE);
    let d_path = dir.join(DIPOLE_FILE);
    if !(x_path.exists() && b_path.exists() && d_path.exists()) {
        let msg = format!(
            "expected {X_CURVE_FILE}, {B_CURVE_FILE}, {DIPOLE_FILE} under {}",
            dir.display()
        );
        return names.iter().map(|n| skip(n, &msg)).collect();
    }

    let mut out = Vec::new();
    let run = || -> crate::Result<Vec<CheckResult>> {
        let mut res = Vec::new();
        let mu = units::reduced_mass(units::MASS_LI7, units::MASS_CS133)?;
        let x_curve = load_curve(&x_path)?;
        let b_curve = load_curve(&b_path)?;
        let dipole = DipoleFunction::load(&d_path)?;

        let mut x_solver = ManifoldSolver::auto(&x_curve, mu)?;
        let mut b_solver = ManifoldSolver::auto(&b_curve, mu)?;

        let upper = b_solver.level(4, 2)?.clone();
        let table = decay_table(
            &upper,
            &mut x_solver,
            &dipole,
            Parity::F,
            RotationalTreatment::ResolveBranchJ,
        )?;
        let buckets = table.bucket_populations();
        let v0 = buckets.per_v[0].1 * 100.0;
        let s1120 = buckets.sum_11_20 * 100.0;
        res.push(check(
            names[0],
            (v0 - 23.0).abs() <= 3.0 && (s1120 - 35.0).abs() <= 4.0,
            format!("v\"=0: {v0:.1}%, sum(11-20): {s1120:.1}%"),
        ));

        let b12 = b_solver.level(12, 1)?.bv_ghz;
        res.push(check(
            names[1],
            (b12 - 3.096).abs() / 3.096 <= 0.01,
            format!("B(v'=12) = {b12:.4} GHz"),
        ));

        let x0 = x_solver.level(0, 0)?.clone();
        let b14 = b_solver.level(14, 1)?.clone();
        let line = b14.energy - x0.energy;
        res.push(check(
            names[2],
            (line - 16_999.4).abs() <= 2.0,
            format!("predicted at {line:.2} cm-1"),
        ));
        Ok(res)
    };
    match run() {
        Ok(res) => out.extend(res),
        Err(e) => {
            for n in names {
                out.push(check(n, false, format!("data files unusable: {e}")));
            }
        }
    }
    out
}
