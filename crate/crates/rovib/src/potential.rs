//! Potential-energy curves: analytic forms, tabulated curves with cubic-spline
//! interpolation, long-range dispersion tails, centrifugal terms and the
//! p-wave barrier.
//!
//! Canonical units: R in Å, V in cm⁻¹. File input in bohr/hartree is converted
//! on load.

use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};
use crate::math::{golden_section_max, CubicSpline};
use crate::units;

/// Functional form of a potential curve.
#[derive(Debug, Clone)]
pub enum PotentialForm {
    /// Spline-interpolated table; below the first point an exponential (or,
    /// if the wall is not positive-repulsive, linear) inner wall continues
    /// the curve, beyond the last point the last value is held.
    Tabulated {
        r: Vec<f64>,
        v: Vec<f64>,
        spline: CubicSpline,
        inner_wall: InnerWall,
    },
    /// V(R) = Te + De·(1 − e^(−a(R−Re)))²
    Morse { de: f64, a: f64, re: f64, te: f64 },
    /// V(R) = Te + ½k(R−Re)²
    Harmonic { k: f64, re: f64, te: f64 },
}

/// Continuation of a tabulated curve below its first point.
#[derive(Debug, Clone, Copy)]
pub enum InnerWall {
    /// V(R) = V₁·e^(−β(R−R₁)), fitted through the first two table points.
    Exponential { v1: f64, r1: f64, beta: f64 },
    /// V(R) = V₁ + s·(R−R₁) with the spline's boundary slope.
    Linear { v1: f64, r1: f64, slope: f64 },
}

impl InnerWall {
    fn value(&self, r: f64) -> f64 {
        match *self {
            InnerWall::Exponential { v1, r1, beta } => v1 * (-beta * (r - r1)).exp(),
            InnerWall::Linear { v1, r1, slope } => v1 + slope * (r - r1),
        }
    }
}

/// −C6/R⁶ − C8/R⁸ dispersion tail attached beyond `match_r`.
///
/// `offset` is the constant added so the curve is continuous at `match_r`.
#[derive(Debug, Clone, Copy)]
pub struct LongRangeTail {
    pub c6: f64,
    pub c8: f64,
    pub match_r: f64,
    offset: f64,
}

/// Parameters for attaching a tail to a curve under construction.
#[derive(Debug, Clone, Copy)]
pub struct TailSpec {
    pub c6: f64,
    pub c8: f64,
    pub match_r: f64,
}

/// A Born-Oppenheimer potential curve, evaluable at any R > 0.
#[derive(Debug, Clone)]
pub struct PotentialCurve {
    form: PotentialForm,
    tail: Option<LongRangeTail>,
    asymptote: f64,
    label: String,
}

impl fmt::Display for PotentialCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label)
    }
}

impl PotentialCurve {
    pub fn morse(de: f64, a: f64, re: f64, te: f64, label: &str) -> Result<Self> {
        if de <= 0.0 || a <= 0.0 || re <= 0.0 {
            return Err(Error::invalid("morse: De, a and Re must be positive"));
        }
        Ok(PotentialCurve {
            form: PotentialForm::Morse { de, a, re, te },
            tail: None,
            asymptote: te + de,
            label: label.to_string(),
        })
    }

    pub fn harmonic(k: f64, re: f64, te: f64, label: &str) -> Result<Self> {
        if k <= 0.0 || re <= 0.0 {
            return Err(Error::invalid("harmonic: k and Re must be positive"));
        }
        Ok(PotentialCurve {
            form: PotentialForm::Harmonic { k, re, te },
            tail: None,
            asymptote: f64::INFINITY,
            label: label.to_string(),
        })
    }

    /// Build a tabulated curve. `asymptote` defaults to the tail-consistent
    /// value (tail present) or the last table entry. With a tail the stitch
    /// must be C¹ to 1% of the local slope and reach the asymptote far out.
    pub fn tabulated(
        r: Vec<f64>,
        v: Vec<f64>,
        asymptote: Option<f64>,
        tail: Option<TailSpec>,
        label: &str,
    ) -> Result<Self> {
        if r.len() != v.len() {
            return Err(Error::invalid("tabulated: R and V lengths differ"));
        }
        if r.len() < 8 {
            return Err(Error::invalid(format!(
                "tabulated curve needs at least 8 points, got {}",
                r.len()
            )));
        }
        for i in 0..r.len() {
            if !r[i].is_finite() || !v[i].is_finite() || r[i] <= 0.0 {
                return Err(Error::invalid(format!(
                    "tabulated: non-finite or non-positive entry at row {i}"
                )));
            }
            if i > 0 && r[i] <= r[i - 1] {
                return Err(Error::invalid(format!(
                    "tabulated: R not strictly increasing at row {i}"
                )));
            }
        }
        let n_minima = (1..r.len() - 1)
            .filter(|&i| v[i] < v[i - 1] && v[i] <= v[i + 1])
            .count();
        if n_minima != 1 {
            return Err(Error::invalid(format!(
                "tabulated curve must have a single interior minimum, found {n_minima}"
            )));
        }
        let spline = CubicSpline::natural(&r, &v)?;

        let inner_wall = {
            let (v1, v2) = (v[0], v[1]);
            if v1 > v2 && v2 > 0.0 {
                let beta = (v1 / v2).ln() / (r[1] - r[0]);
                InnerWall::Exponential { v1, r1: r[0], beta }
            } else {
                InnerWall::Linear {
                    v1,
                    r1: r[0],
                    slope: spline.derivative(r[0]),
                }
            }
        };

        let vmin = v.iter().cloned().fold(f64::INFINITY, f64::min);
        let (tail, asymptote) = match tail {
            None => (None, asymptote.unwrap_or(*v.last().unwrap())),
            Some(spec) => {
                if spec.c6 <= 0.0 || spec.c8 < 0.0 {
                    return Err(Error::invalid("tail: C6 must be positive, C8 non-negative"));
                }
                let mr = spec.match_r;
                if mr < r[0] || mr > *r.last().unwrap() {
                    return Err(Error::invalid(format!(
                        "tail match_R = {mr} Å outside the table domain"
                    )));
                }
                let v_match = spline.value(mr);
                let tail_at = |c: &TailSpec, asym: f64, rr: f64| {
                    asym - c.c6 / rr.powi(6) - c.c8 / rr.powi(8)
                };
                let asym = asymptote.unwrap_or_else(|| tail_at(&spec, 0.0, mr).mul_add(-1.0, v_match));
                let offset = v_match - tail_at(&spec, asym, mr);

                let slope_table = spline.derivative(mr);
                let slope_tail = 6.0 * spec.c6 / mr.powi(7) + 8.0 * spec.c8 / mr.powi(9);
                let s_ref = slope_table.abs().max(slope_tail.abs());
                if (slope_tail - slope_table).abs() > 0.01 * s_ref {
                    return Err(Error::invalid(format!(
                        "long-range stitch at R = {mr} Å kinked: table slope {slope_table:.6e}, \
                         tail slope {slope_tail:.6e} (mismatch above 1%)"
                    )));
                }
                // The stitched curve must still reach the stated asymptote.
                let depth = asym - vmin;
                let far = tail_at(&spec, asym, 10.0 * mr) + offset;
                if depth > 0.0 && (far - asym).abs() > 1e-6 * depth {
                    return Err(Error::invalid(format!(
                        "curve misses its asymptote by {:.3e} cm-1 at 10·match_R \
                         (limit {:.3e}); asymptote and tail are inconsistent",
                        (far - asym).abs(),
                        1e-6 * depth
                    )));
                }
                (
                    Some(LongRangeTail {
                        c6: spec.c6,
                        c8: spec.c8,
                        match_r: mr,
                        offset,
                    }),
                    asym,
                )
            }
        };

        Ok(PotentialCurve {
            form: PotentialForm::Tabulated {
                r,
                v,
                spline,
                inner_wall,
            },
            tail,
            asymptote,
            label: label.to_string(),
        })
    }

    /// Curve value at R (Å) in cm⁻¹. R must be positive.
    pub fn value(&self, r: f64) -> f64 {
        debug_assert!(r > 0.0, "potential evaluated at R = {r} <= 0");
        if let Some(tail) = &self.tail {
            if r > tail.match_r {
                return self.asymptote - tail.c6 / r.powi(6) - tail.c8 / r.powi(8) + tail.offset;
            }
        }
        match &self.form {
            PotentialForm::Morse { de, a, re, te } => {
                let f = 1.0 - (-a * (r - re)).exp();
                te + de * f * f
            }
            PotentialForm::Harmonic { k, re, te } => te + 0.5 * k * (r - re) * (r - re),
            PotentialForm::Tabulated {
                r: rt,
                v,
                spline,
                inner_wall,
            } => {
                if r < rt[0] {
                    inner_wall.value(r)
                } else if r > *rt.last().unwrap() {
                    *v.last().unwrap()
                } else {
                    spline.value(r)
                }
            }
        }
    }

    /// Checked evaluation; rejects R ≤ 0.
    pub fn evaluate(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::invalid(format!("R must be positive, got {r} Å")));
        }
        Ok(self.value(r))
    }

    pub fn asymptote(&self) -> f64 {
        self.asymptote
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn form(&self) -> &PotentialForm {
        &self.form
    }

    pub fn tail(&self) -> Option<&LongRangeTail> {
        self.tail.as_ref()
    }

    /// Location and value of the potential minimum.
    pub fn min_location(&self) -> (f64, f64) {
        match &self.form {
            PotentialForm::Morse { re, te, .. } | PotentialForm::Harmonic { re, te, .. } => {
                (*re, *te)
            }
            PotentialForm::Tabulated { r, v, .. } => {
                let i = v
                    .iter()
                    .enumerate()
                    .min_by(|a, b| a.1.total_cmp(b.1))
                    .map(|(i, _)| i)
                    .unwrap();
                let lo = r[i.saturating_sub(1)];
                let hi = r[(i + 1).min(r.len() - 1)];
                let (x, neg_v) = golden_section_max(&|x| -self.value(x), lo, hi, 1e-10);
                (x, -neg_v)
            }
        }
    }

    /// Well depth (asymptote − V_min); infinite for a harmonic curve.
    pub fn well_depth(&self) -> f64 {
        self.asymptote - self.min_location().1
    }
}

/// Effective radial potential V(R) + ħ²l(l+1)/(2µR²).
///
/// With l = 0 evaluation is identical to the base curve.
#[derive(Debug, Clone, Copy)]
pub struct EffectivePotential<'a> {
    curve: &'a PotentialCurve,
    l: u32,
    mu: f64,
    rot_coeff: f64,
}

impl<'a> EffectivePotential<'a> {
    pub fn new(curve: &'a PotentialCurve, l: u32, mu: f64) -> Result<Self> {
        if mu <= 0.0 || !mu.is_finite() {
            return Err(Error::invalid(format!("reduced mass must be positive, got {mu}")));
        }
        Ok(EffectivePotential {
            curve,
            l,
            mu,
            rot_coeff: units::hbar2_over_2mu(mu) * (l * (l + 1)) as f64,
        })
    }

    pub fn value(&self, r: f64) -> f64 {
        if self.l == 0 {
            self.curve.value(r)
        } else {
            self.curve.value(r) + self.rot_coeff / (r * r)
        }
    }

    pub fn l(&self) -> u32 {
        self.l
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn curve(&self) -> &'a PotentialCurve {
        self.curve
    }

    /// Asymptote of the effective curve (the centrifugal term vanishes there).
    pub fn asymptote(&self) -> f64 {
        self.curve.asymptote()
    }

    /// Minimum of the effective curve (shifted slightly from the base one
    /// for l > 0).
    pub fn min_location(&self) -> (f64, f64) {
        let (re0, _) = self.curve.min_location();
        if self.l == 0 {
            return self.curve.min_location();
        }
        let (x, neg_v) = golden_section_max(&|x| -self.value(x), 0.5 * re0, 2.0 * re0, 1e-10);
        (x, -neg_v)
    }
}

/// Centrifugal barrier of the −C6/R⁶ tail for partial wave l ≥ 1, relative
/// to the dissociation asymptote.
#[derive(Debug, Clone, Copy)]
pub struct Barrier {
    /// Stationary point R_b from the closed form (Å).
    pub r_analytic: f64,
    /// Barrier height from the closed form (cm⁻¹).
    pub height_analytic: f64,
    /// Maximum location from golden-section search (Å).
    pub r_numeric: f64,
    /// Maximum height from golden-section search (cm⁻¹).
    pub height_numeric: f64,
    /// Analytic height expressed in mK.
    pub height_mk: f64,
}

impl Barrier {
    pub fn relative_disagreement(&self) -> f64 {
        (self.height_numeric - self.height_analytic).abs() / self.height_analytic
    }
}

/// Barrier of ħ²l(l+1)/(2µR²) − C6/R⁶: closed form R_b⁴ = 3C6/(C·l(l+1)) with
/// C = ħ²/2µ, cross-checked by direct numeric maximization (0.1% agreement
/// enforced).
pub fn centrifugal_barrier(c6: f64, mu: f64, l: u32) -> Result<Barrier> {
    if l == 0 {
        return Err(Error::invalid("no centrifugal barrier for l = 0"));
    }
    if c6 <= 0.0 || !c6.is_finite() {
        return Err(Error::invalid(format!("C6 must be positive, got {c6}")));
    }
    if mu <= 0.0 || !mu.is_finite() {
        return Err(Error::invalid(format!("reduced mass must be positive, got {mu}")));
    }
    let u = units::hbar2_over_2mu(mu) * (l * (l + 1)) as f64;
    let r_analytic = (3.0 * c6 / u).powf(0.25);
    let height_analytic = 2.0 * u.powf(1.5) / (3.0 * (3.0 * c6).sqrt());

    let f = |r: f64| u / (r * r) - c6 / r.powi(6);
    let (r_numeric, height_numeric) =
        golden_section_max(&f, 0.1 * r_analytic, 10.0 * r_analytic, 1e-12 * r_analytic);

    let barrier = Barrier {
        r_analytic,
        height_analytic,
        r_numeric,
        height_numeric,
        height_mk: height_analytic / (units::KELVIN_CM1 * 1e-3),
    };
    if barrier.relative_disagreement() > 1e-3 {
        return Err(Error::invalid(format!(
            "barrier maximization inconsistent: analytic {height_analytic:.6e} vs numeric \
             {height_numeric:.6e} cm-1"
        )));
    }
    Ok(barrier)
}

// ---------------------------------------------------------------------------
// File input
// ---------------------------------------------------------------------------

/// Parsed two-column data file with `#`-header metadata, before unit
/// conversion. Shared by potential and dipole loaders.
#[derive(Debug, Clone, Default)]
pub(crate) struct TableData {
    pub unit_r: Option<String>,
    pub unit_v: Option<String>,
    pub asymptote: Option<f64>,
    pub c6: Option<f64>,
    pub c8: Option<f64>,
    pub match_r: Option<f64>,
    pub label: Option<String>,
    pub rows: Vec<(usize, f64, f64)>,
}

pub(crate) fn parse_table(path: &str, text: &str) -> Result<TableData> {
    let mut data = TableData::default();
    let file_err = |line: usize, message: String| Error::FileFormat {
        path: path.to_string(),
        line,
        message,
    };
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if let Some((key, value)) = rest.split_once(':') {
                let key = key.trim();
                let value = value.trim();
                let num = || -> Result<f64> {
                    value
                        .parse::<f64>()
                        .map_err(|_| file_err(lineno, format!("bad number `{value}` for {key}")))
                };
                match key {
                    "unit_R" => data.unit_r = Some(value.to_string()),
                    "unit_V" => data.unit_v = Some(value.to_string()),
                    "asymptote" => data.asymptote = Some(num()?),
                    "C6" => data.c6 = Some(num()?),
                    "C8" => data.c8 = Some(num()?),
                    "match_R" => data.match_r = Some(num()?),
                    "label" => data.label = Some(value.to_string()),
                    _ => {} // unknown header keys are comments
                }
            }
            continue;
        }
        let mut cols = line.split_whitespace();
        let (a, b) = match (cols.next(), cols.next()) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(file_err(lineno, "expected two numeric columns".to_string())),
        };
        if cols.next().is_some() {
            return Err(file_err(lineno, "expected exactly two columns".to_string()));
        }
        let r: f64 = a
            .parse()
            .map_err(|_| file_err(lineno, format!("bad number `{a}` in column 1")))?;
        let v: f64 = b
            .parse()
            .map_err(|_| file_err(lineno, format!("bad number `{b}` in column 2")))?;
        data.rows.push((lineno, r, v));
    }
    if data.rows.is_empty() {
        return Err(file_err(0, "no data rows".to_string()));
    }
    Ok(data)
}

fn require_unit(path: &str, key: &str, value: &Option<String>, allowed: &[&str]) -> Result<String> {
    match value {
        None => Err(Error::FileFormat {
            path: path.to_string(),
            line: 1,
            message: format!("missing required header `{key}:` (one of {allowed:?})"),
        }),
        Some(v) if allowed.contains(&v.as_str()) => Ok(v.clone()),
        Some(v) => Err(Error::FileFormat {
            path: path.to_string(),
            line: 1,
            message: format!("header `{key}: {v}` not recognized (one of {allowed:?})"),
        }),
    }
}

/// Load a potential curve from a two-column text file.
///
/// Header lines start with `#`; required keys `unit_R:` (angstrom|bohr) and
/// `unit_V:` (cm-1|hartree), optional `asymptote:`, `C6:`, `C8:`, `match_R:`,
/// `label:` in the file's own units.
pub fn load_curve(path: impl AsRef<Path>) -> Result<PotentialCurve> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    curve_from_str(&path.display().to_string(), &text)
}

/// Same as [`load_curve`] but from an in-memory string (`path` used in errors).
pub fn curve_from_str(path: &str, text: &str) -> Result<PotentialCurve> {
    let data = parse_table(path, text)?;
    let unit_r = require_unit(path, "unit_R", &data.unit_r, &["angstrom", "bohr"])?;
    let unit_v = require_unit(path, "unit_V", &data.unit_v, &["cm-1", "hartree"])?;
    let rf = if unit_r == "bohr" {
        units::BOHR_RADIUS_ANGSTROM
    } else {
        1.0
    };
    let vf = if unit_v == "hartree" {
        units::HARTREE_CM1
    } else {
        1.0
    };

    // Monotonicity is re-checked here so the error can cite the file line.
    for w in data.rows.windows(2) {
        if w[1].1 <= w[0].1 {
            return Err(Error::FileFormat {
                path: path.to_string(),
                line: w[1].0,
                message: format!("R column not strictly increasing ({} after {})", w[1].1, w[0].1),
            });
        }
    }
    if data.rows.len() < 8 {
        return Err(Error::FileFormat {
            path: path.to_string(),
            line: data.rows.last().map(|r| r.0).unwrap_or(0),
            message: format!("need at least 8 data rows, got {}", data.rows.len()),
        });
    }

    let r: Vec<f64> = data.rows.iter().map(|&(_, r, _)| r * rf).collect();
    let v: Vec<f64> = data.rows.iter().map(|&(_, _, v)| v * vf).collect();
    let tail = data.c6.map(|c6| TailSpec {
        c6: c6 * vf * rf.powi(6),
        c8: data.c8.unwrap_or(0.0) * vf * rf.powi(8),
        match_r: data.match_r.unwrap_or(*r.last().unwrap() / rf) * rf,
    });
    let label = data.label.unwrap_or_else(|| {
        Path::new(path)
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.to_string())
    });
    PotentialCurve::tabulated(r, v, data.asymptote.map(|a| a * vf), tail, &label)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units;
    use approx::assert_relative_eq;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn morse_text(n: usize, unit_r: &str, unit_v: &str) -> String {
        // Morse with De=5000 cm-1, a=0.9 1/Å, Re=3.5 Å sampled on [2, 12] Å
        let mut s = format!("# unit_R: {unit_r}\n# unit_V: {unit_v}\n# label: test-morse\n");
        let (rf, vf) = (
            if unit_r == "bohr" {
                1.0 / units::BOHR_RADIUS_ANGSTROM
            } else {
                1.0
            },
            if unit_v == "hartree" {
                1.0 / units::HARTREE_CM1
            } else {
                1.0
            },
        );
        for i in 0..n {
            let r = 2.0 + 10.0 * i as f64 / (n - 1) as f64;
            let f = 1.0 - (-0.9f64 * (r - 3.5)).exp();
            let v = 5000.0 * f * f;
            s.push_str(&format!("{:.12e} {:.12e}\n", r * rf, v * vf));
        }
        s
    }

    #[test]
    fn loaded_table_matches_generator_at_nodes_and_midpoints() {
        let n = 400;
        let curve = curve_from_str("m.pot", &morse_text(n, "angstrom", "cm-1")).unwrap();
        let analytic = |r: f64| {
            let f = 1.0 - (-0.9f64 * (r - 3.5)).exp();
            5000.0 * f * f
        };
        for i in 0..n {
            let r = 2.0 + 10.0 * i as f64 / (n - 1) as f64;
            assert_relative_eq!(
                curve.value(r),
                analytic(r),
                max_relative = 1e-8,
                epsilon = 1e-8
            );
        }
        // Between nodes the spline stays within 1e-6·De of the generator.
        // The first few intervals sit in the natural-spline boundary layer on
        // the steep repulsive wall (classically forbidden for every level) and
        // are excluded.
        for i in 10..n - 1 {
            let r = 2.0 + 10.0 * (i as f64 + 0.5) / (n - 1) as f64;
            assert!(
                (curve.value(r) - analytic(r)).abs() < 1e-6 * 5000.0,
                "midpoint {r}: {} vs {}",
                curve.value(r),
                analytic(r)
            );
        }
    }

    #[test]
    fn descending_r_is_a_format_error_with_line() {
        let text = "# unit_R: angstrom\n# unit_V: cm-1\n1.0 5.0\n2.0 3.0\n1.5 4.0\n";
        match curve_from_str("bad.pot", text) {
            Err(Error::FileFormat { line, .. }) => assert_eq!(line, 5),
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn missing_unit_header_rejected() {
        let text = "# unit_V: cm-1\n1.0 5.0\n2.0 3.0\n";
        assert!(matches!(
            curve_from_str("nounits.pot", text),
            Err(Error::FileFormat { .. })
        ));
    }

    #[test]
    fn bohr_and_hartree_input_converted() {
        let curve = curve_from_str("m.pot", &morse_text(200, "bohr", "hartree")).unwrap();
        let f = 1.0 - (-0.9f64 * (5.0 - 3.5)).exp();
        assert_relative_eq!(curve.value(5.0), 5000.0 * f * f, max_relative = 1e-7);
    }

    #[test]
    fn morse_minimum_is_te() {
        let c = PotentialCurve::morse(4000.0, 1.0, 3.0, 111.0, "m").unwrap();
        assert_relative_eq!(c.value(3.0), 111.0);
        assert_relative_eq!(c.asymptote(), 4111.0);
        let (re, te) = c.min_location();
        assert_relative_eq!(re, 3.0);
        assert_relative_eq!(te, 111.0);
    }

    #[test]
    fn evaluate_rejects_nonpositive_r() {
        let c = PotentialCurve::morse(4000.0, 1.0, 3.0, 0.0, "m").unwrap();
        assert!(c.evaluate(0.0).is_err());
        assert!(c.evaluate(-1.0).is_err());
        assert!(c.evaluate(3.0).is_ok());
    }

    /// Table generated from asymptote − C6/R⁶ beyond 4 Å stitches cleanly and
    /// follows the closed form far out. match_R = 9.0 is a table node, so the
    /// continuity offset is exactly zero.
    fn dispersion_table() -> PotentialCurve {
        let asym = 5000.0;
        let c6 = 2.0e7;
        let analytic = |r: f64| {
            if r < 4.0 {
                // inner well: parabola matched crudely; only smoothness matters
                asym - c6 / 4.0f64.powi(6) + 3000.0 * ((r - 4.0) / 1.2).powi(2)
            } else {
                asym - c6 / r.powi(6)
            }
        };
        let r: Vec<f64> = (0..401).map(|i| 2.0 + 10.0 * i as f64 / 400.0).collect();
        let v: Vec<f64> = r.iter().map(|&x| analytic(x)).collect();
        PotentialCurve::tabulated(
            r,
            v,
            Some(asym),
            Some(TailSpec {
                c6,
                c8: 0.0,
                match_r: 9.0,
            }),
            "disp",
        )
        .unwrap()
    }

    #[test]
    fn long_range_tail_closed_form() {
        let c = dispersion_table();
        let r: f64 = 300.0; // 100·Re
        let expect = 5000.0 - 2.0e7 / r.powi(6);
        assert_relative_eq!(c.value(r), expect, max_relative = 1e-12);
    }

    #[test]
    fn kinked_tail_rejected() {
        // C6 a factor 3 off the generating curve: slope mismatch at match_R
        let asym = 5000.0;
        let c6 = 2.0e7;
        let r: Vec<f64> = (0..400).map(|i| 2.0 + 10.0 * i as f64 / 399.0).collect();
        let v: Vec<f64> = r
            .iter()
            .map(|&x| {
                if x < 4.0 {
                    asym - c6 / 4.0f64.powi(6) + 3000.0 * ((x - 4.0) / 1.2).powi(2)
                } else {
                    asym - c6 / x.powi(6)
                }
            })
            .collect();
        let res = PotentialCurve::tabulated(
            r,
            v,
            Some(asym),
            Some(TailSpec {
                c6: 3.0 * c6,
                c8: 0.0,
                match_r: 9.0,
            }),
            "kink",
        );
        assert!(res.is_err());
    }

    #[test]
    fn effective_l0_identical_to_base() {
        let c = PotentialCurve::morse(4000.0, 1.0, 3.0, 0.0, "m").unwrap();
        let eff = EffectivePotential::new(&c, 0, 6.664).unwrap();
        for i in 1..=100 {
            let r = 0.1 * i as f64 + 1.0;
            assert_eq!(eff.value(r), c.value(r)); // bit-identical
        }
    }

    #[test]
    fn effective_l1_tail_has_maximum() {
        let c = dispersion_table();
        let eff = EffectivePotential::new(&c, 1, 6.664).unwrap();
        // derivative sign change between 20 and 200 Å
        let mut signs = Vec::new();
        let mut prev = eff.value(20.0);
        for i in 1..400 {
            let r = 20.0 + 180.0 * i as f64 / 399.0;
            let cur = eff.value(r);
            signs.push((cur - prev).signum());
            prev = cur;
        }
        assert!(signs.contains(&1.0) && signs.contains(&-1.0));
        let first_down = signs.iter().position(|&s| s < 0.0).unwrap();
        assert!(signs[..first_down].iter().all(|&s| s > 0.0));
    }

    #[test]
    fn barrier_analytic_vs_numeric_random_draws() {
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..100 {
            let c6 = 10f64.powf(rng.gen_range(5.0..8.0));
            let mu = rng.gen_range(0.5..50.0);
            let l = rng.gen_range(1..=4);
            let b = centrifugal_barrier(c6, mu, l).unwrap();
            assert!(
                b.relative_disagreement() < 1e-3,
                "disagreement {} for C6={c6} mu={mu} l={l}",
                b.relative_disagreement()
            );
            assert_relative_eq!(b.r_numeric, b.r_analytic, max_relative = 1e-3);
        }
    }

    #[test]
    fn barrier_scaling_laws() {
        let b1 = centrifugal_barrier(1.0e7, 6.6641, 1).unwrap();
        let b2 = centrifugal_barrier(2.0e7, 6.6641, 1).unwrap();
        // doubling C6 scales the height by 1/√2
        assert_relative_eq!(
            b2.height_analytic / b1.height_analytic,
            0.5f64.sqrt(),
            max_relative = 1e-12
        );
        // l=2 vs l=1: (l(l+1))^(3/2) ratio = 3^(3/2)
        let bl2 = centrifugal_barrier(1.0e7, 6.6641, 2).unwrap();
        assert_relative_eq!(
            bl2.height_analytic / b1.height_analytic,
            3f64.powf(1.5),
            max_relative = 1e-12
        );
    }

    #[test]
    fn barrier_rejects_bad_input() {
        assert!(centrifugal_barrier(1e7, 6.6, 0).is_err());
        assert!(centrifugal_barrier(-1e7, 6.6, 1).is_err());
        assert!(centrifugal_barrier(1e7, -6.6, 1).is_err());
    }
}
