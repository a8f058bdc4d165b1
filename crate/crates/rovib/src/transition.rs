//! Bound-bound transition strengths: Franck–Condon factors, dipole matrix
//! elements, Einstein A coefficients, ¹Π↔¹Σ⁺ branch/parity selection rules
//! and spontaneous-decay tables.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::math::{trapezoid, trapezoid_uniform, CubicSpline};
use crate::potential::{self, EffectivePotential, PotentialCurve};
use crate::radial::{LevelSolver, RovibLevel, SolveGrid};
use crate::units;

/// R-dependent transition dipole moment (Debye vs Å).
#[derive(Debug, Clone)]
pub struct DipoleFunction {
    kind: DipoleKind,
}

#[derive(Debug, Clone)]
enum DipoleKind {
    Constant(f64),
    Tabulated {
        spline: CubicSpline,
        r_lo: f64,
        r_hi: f64,
        d_lo: f64,
        d_hi: f64,
    },
}

impl DipoleFunction {
    pub fn constant(d_debye: f64) -> Self {
        DipoleFunction {
            kind: DipoleKind::Constant(d_debye),
        }
    }

    /// Tabulated d(R); outside the table the end values are held.
    pub fn tabulated(r: &[f64], d: &[f64]) -> Result<Self> {
        if r.len() < 3 {
            return Err(Error::invalid("dipole table needs at least 3 points"));
        }
        let spline = CubicSpline::natural(r, d)?;
        Ok(DipoleFunction {
            kind: DipoleKind::Tabulated {
                r_lo: r[0],
                r_hi: *r.last().unwrap(),
                d_lo: d[0],
                d_hi: *d.last().unwrap(),
                spline,
            },
        })
    }

    /// Load from the shared two-column format: `unit_R:` (angstrom|bohr),
    /// `unit_V:` (debye|au).
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::from_table_str(&path.display().to_string(), &text)
    }

    pub fn from_table_str(path: &str, text: &str) -> Result<Self> {
        let data = potential::parse_table(path, text)?;
        let unit_err = |key: &str, val: &Option<String>, allowed: &[&str]| Error::FileFormat {
            path: path.to_string(),
            line: 1,
            message: format!("header `{key}: {val:?}` must be one of {allowed:?}"),
        };
        let rf = match data.unit_r.as_deref() {
            Some("angstrom") => 1.0,
            Some("bohr") => units::BOHR_RADIUS_ANGSTROM,
            _ => return Err(unit_err("unit_R", &data.unit_r, &["angstrom", "bohr"])),
        };
        let df = match data.unit_v.as_deref() {
            Some("debye") => 1.0,
            Some("au") => units::AU_DIPOLE_DEBYE,
            _ => return Err(unit_err("unit_V", &data.unit_v, &["debye", "au"])),
        };
        let r: Vec<f64> = data.rows.iter().map(|&(_, r, _)| r * rf).collect();
        let d: Vec<f64> = data.rows.iter().map(|&(_, _, d)| d * df).collect();
        Self::tabulated(&r, &d)
    }

    pub fn value(&self, r: f64) -> f64 {
        match &self.kind {
            DipoleKind::Constant(d) => *d,
            DipoleKind::Tabulated {
                spline,
                r_lo,
                r_hi,
                d_lo,
                d_hi,
            } => {
                if r <= *r_lo {
                    *d_lo
                } else if r >= *r_hi {
                    *d_hi
                } else {
                    spline.value(r)
                }
            }
        }
    }
}

/// Rotational branch, labeled by the lower-state J (absorption convention):
/// P: J′ = J″−1, Q: J′ = J″, R: J′ = J″+1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    P,
    Q,
    R,
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Branch::P => "P",
            Branch::Q => "Q",
            Branch::R => "R",
        })
    }
}

/// Λ-doubling symmetry of a ¹Π rotational level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LevelParity {
    E,
    F,
}

impl fmt::Display for LevelParity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LevelParity::E => "e",
            LevelParity::F => "f",
        })
    }
}

/// Upper-level parity selection for branch enumeration: a single component
/// or an equal incoherent mixture of both.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    E,
    F,
    Both,
}

impl std::str::FromStr for Parity {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "e" | "E" => Ok(Parity::E),
            "f" | "F" => Ok(Parity::F),
            "both" | "Both" => Ok(Parity::Both),
            other => Err(Error::invalid(format!("unknown parity `{other}` (e|f|both)"))),
        }
    }
}

/// One rotational line of a ¹Π↔¹Σ⁺ band.
#[derive(Debug, Clone, Copy)]
pub struct BranchLine {
    pub j_upper: u32,
    pub j_lower: u32,
    pub branch: Branch,
    pub honl_london: f64,
    pub upper_parity: LevelParity,
}

/// Hönl-London factor for a ¹Π↔¹Σ⁺ line, labeled by the lower-state J:
/// S_P = (J″−1)/2, S_Q = (2J″+1)/2, S_R = (J″+2)/2.
///
/// This is a pure formula evaluator; lines that are structurally impossible
/// (P(0), which implies J′ < 0) are rejected, while physical existence of the
/// upper level is enforced by [`allowed_branches`].
pub fn honl_london(branch: Branch, j_lower: u32) -> Result<f64> {
    let j = j_lower as f64;
    match branch {
        Branch::P => {
            if j_lower == 0 {
                return Err(Error::invalid("P(0) implies J' = -1"));
            }
            Ok((j - 1.0) / 2.0)
        }
        Branch::Q => Ok((2.0 * j + 1.0) / 2.0),
        Branch::R => Ok((j + 2.0) / 2.0),
    }
}

/// Emission branches open to a ¹Π level (J′ ≥ 1) of the given parity:
/// f decays via Q only (ΔJ = 0), e via P and R (ΔJ = ±1), `Both` is the
/// union with equal parity weights.
pub fn allowed_branches(j_upper: u32, parity: Parity) -> Result<Vec<BranchLine>> {
    if j_upper == 0 {
        return Err(Error::invalid("a ¹Π state has no J' = 0 level"));
    }
    let mut lines = Vec::new();
    let mut push = |branch: Branch, j_lower: u32, upper_parity: LevelParity| -> Result<()> {
        lines.push(BranchLine {
            j_upper,
            j_lower,
            branch,
            honl_london: honl_london(branch, j_lower)?,
            upper_parity,
        });
        Ok(())
    };
    match parity {
        Parity::F => push(Branch::Q, j_upper, LevelParity::F)?,
        Parity::E => {
            push(Branch::R, j_upper - 1, LevelParity::E)?;
            push(Branch::P, j_upper + 1, LevelParity::E)?;
        }
        Parity::Both => {
            push(Branch::R, j_upper - 1, LevelParity::E)?;
            push(Branch::Q, j_upper, LevelParity::F)?;
            push(Branch::P, j_upper + 1, LevelParity::E)?;
        }
    }
    lines.sort_by_key(|l| l.j_lower);
    Ok(lines)
}

/// Ground-state J″ population produced by spontaneous decay from (J′, parity),
/// from the Hönl-London weights. Each parity carries half of 2J′+1, so the
/// `Both` case is automatically an equal mixture.
pub fn population_after_decay(j_upper: u32, parity: Parity) -> Result<BTreeMap<u32, f64>> {
    let lines = allowed_branches(j_upper, parity)?;
    let total: f64 = lines.iter().map(|l| l.honl_london).sum();
    let mut map = BTreeMap::new();
    for line in lines {
        *map.entry(line.j_lower).or_insert(0.0) += line.honl_london / total;
    }
    Ok(map)
}

// ---------------------------------------------------------------------------
// Radial overlap integrals
// ---------------------------------------------------------------------------

/// ∫ψ_a·f(R)·ψ_b dR over the overlap of the two grids. Levels sharing a grid
/// integrate directly; otherwise both wavefunctions are spline-resampled onto
/// the union grid restricted to the intersection domain.
fn weighted_overlap<F: Fn(f64) -> f64>(a: &RovibLevel, b: &RovibLevel, f: F) -> Result<f64> {
    let same_grid = a.r.len() == b.r.len()
        && a.r.first() == b.r.first()
        && a.r.last() == b.r.last();
    if same_grid {
        let y: Vec<f64> = (0..a.r.len())
            .map(|i| a.psi[i] * b.psi[i] * f(a.r[i]))
            .collect();
        let h = a.r[1] - a.r[0];
        return Ok(trapezoid_uniform(h, &y));
    }
    let lo = a.r[0].max(b.r[0]);
    let hi = a.r.last().unwrap().min(*b.r.last().unwrap());
    if hi <= lo {
        return Err(Error::invalid(format!(
            "wavefunction grids are disjoint ({}..{} vs {}..{})",
            a.r[0],
            a.r.last().unwrap(),
            b.r[0],
            b.r.last().unwrap()
        )));
    }
    let mut grid: Vec<f64> = a
        .r
        .iter()
        .chain(b.r.iter())
        .copied()
        .filter(|&r| r >= lo && r <= hi)
        .collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup_by(|x, y| (*x - *y).abs() < 1e-12);
    let sa = CubicSpline::natural(&a.r, &a.psi)?;
    let sb = CubicSpline::natural(&b.r, &b.psi)?;
    let y: Vec<f64> = grid
        .iter()
        .map(|&r| sa.value(r) * sb.value(r) * f(r))
        .collect();
    Ok(trapezoid(&grid, &y))
}

/// Signed vibrational overlap ∫ψ_a ψ_b dR.
pub fn overlap(a: &RovibLevel, b: &RovibLevel) -> Result<f64> {
    weighted_overlap(a, b, |_| 1.0)
}

/// Franck–Condon factor |∫ψ_upper ψ_lower dR|² ∈ [0, 1].
pub fn franck_condon(lower: &RovibLevel, upper: &RovibLevel) -> Result<f64> {
    Ok(overlap(lower, upper)?.powi(2))
}

/// Transition dipole matrix element ∫ψ_upper d(R) ψ_lower dR in Debye.
pub fn dipole_matrix_element(
    lower: &RovibLevel,
    upper: &RovibLevel,
    d: &DipoleFunction,
) -> Result<f64> {
    weighted_overlap(lower, upper, |r| d.value(r))
}

/// Einstein-A prefactor in s⁻¹ per (cm⁻¹)³ per Debye², assembled from the
/// CODATA constants: 16π³·10⁶·debye²/(3ε₀h).
pub fn einstein_a_prefactor() -> f64 {
    let pi3 = std::f64::consts::PI.powi(3);
    16.0 * pi3 * 1e6 * units::DEBYE * units::DEBYE / (3.0 * units::EPSILON_0 * units::PLANCK)
}

/// Spontaneous-emission rate A = pref·ν̃³·|M|²·S/(2J′+1) in s⁻¹ for one
/// rotational line, with |M| the vibrational dipole matrix element.
pub fn einstein_a(
    upper: &RovibLevel,
    lower: &RovibLevel,
    line: &BranchLine,
    d: &DipoleFunction,
) -> Result<f64> {
    let nu = upper.energy - lower.energy;
    if nu <= 0.0 {
        return Err(Error::invalid(format!(
            "emission needs E_upper > E_lower (ν̃ = {nu} cm-1)"
        )));
    }
    let m = dipole_matrix_element(lower, upper, d)?;
    let degeneracy = (2 * line.j_upper + 1) as f64;
    Ok(einstein_a_prefactor() * nu.powi(3) * m * m * line.honl_london / degeneracy)
}

// ---------------------------------------------------------------------------
// Decay tables
// ---------------------------------------------------------------------------

/// Caching (v, J) level provider for one electronic state: curve + reduced
/// mass + solve grid, with one eigensolver per J.
pub struct ManifoldSolver<'c> {
    curve: &'c PotentialCurve,
    mu: f64,
    grid: SolveGrid,
    solvers: HashMap<u32, LevelSolver<'c>>,
    cache: HashMap<(u32, u32), RovibLevel>,
}

impl<'c> ManifoldSolver<'c> {
    pub fn new(curve: &'c PotentialCurve, mu: f64, grid: SolveGrid) -> Self {
        ManifoldSolver {
            curve,
            mu,
            grid,
            solvers: HashMap::new(),
            cache: HashMap::new(),
        }
    }

    /// Auto-sized grid reaching levels up to just below the asymptote.
    pub fn auto(curve: &'c PotentialCurve, mu: f64) -> Result<Self> {
        let pot = EffectivePotential::new(curve, 0, mu)?;
        let depth = curve.well_depth();
        if !depth.is_finite() {
            return Err(Error::invalid(
                "auto manifold grid needs a curve with a finite asymptote",
            ));
        }
        let e_top = curve.asymptote() - 1e-7 * depth;
        let grid = SolveGrid::auto(&pot, e_top, 15.0)?;
        Ok(Self::new(curve, mu, grid))
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn grid(&self) -> &SolveGrid {
        &self.grid
    }

    fn solver(&mut self, j: u32) -> Result<&mut LevelSolver<'c>> {
        if !self.solvers.contains_key(&j) {
            let pot = EffectivePotential::new(self.curve, j, self.mu)?;
            self.solvers.insert(j, LevelSolver::new(pot, &self.grid)?);
        }
        Ok(self.solvers.get_mut(&j).unwrap())
    }

    pub fn n_bound(&mut self, j: u32) -> Result<usize> {
        Ok(self.solver(j)?.n_bound())
    }

    pub fn level(&mut self, v: u32, j: u32) -> Result<&RovibLevel> {
        if !self.cache.contains_key(&(v, j)) {
            let lvl = self.solver(j)?.solve(v)?;
            self.cache.insert((v, j), lvl);
        }
        Ok(&self.cache[&(v, j)])
    }

    /// All bound levels at the given J (cloned out of the cache).
    pub fn bound_levels(&mut self, j: u32) -> Result<Vec<RovibLevel>> {
        let n = self.n_bound(j)?;
        (0..n as u32).map(|v| self.level(v, j).cloned()).collect()
    }
}

/// Lower-state rotational treatment inside [`decay_table`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RotationalTreatment {
    /// Re-solve each lower level at the J″ implied by its branch (default).
    ResolveBranchJ,
    /// Use wavefunctions solved at a fixed J for every branch (faster).
    FrozenJ(u32),
}

/// One line of a decay table.
#[derive(Debug, Clone, Copy)]
pub struct DecayRow {
    pub v_lower: u32,
    pub j_lower: u32,
    pub branch: Branch,
    pub upper_parity: LevelParity,
    pub a_per_s: f64,
    pub rel_pop: f64,
}

/// Spontaneous-decay branching from one upper level into a lower-state
/// manifold: per-line Einstein A coefficients and normalized populations.
#[derive(Debug, Clone)]
pub struct DecayTable {
    pub upper_v: u32,
    pub upper_j: u32,
    pub parity: Parity,
    pub upper_label: String,
    /// Rows ordered by (v″, J″).
    pub rows: Vec<DecayRow>,
    /// Σ A over all rows (s⁻¹).
    pub total_a: f64,
    /// Σ FCF over the bound manifold; should be close to 1.
    pub fcf_sum: f64,
    /// 1 − fcf_sum, the neglected decay into the continuum.
    pub continuum_leakage: f64,
}

/// Vibrational populations regrouped as v″ = 0..10 plus Σ(11-20) and Σ(>20).
#[derive(Debug, Clone)]
pub struct DecayBuckets {
    pub per_v: Vec<(u32, f64)>,
    pub sum_11_20: f64,
    pub sum_over_20: f64,
}

impl DecayTable {
    /// Populations summed over J″ per vibrational level.
    pub fn vibrational_populations(&self) -> BTreeMap<u32, f64> {
        let mut map = BTreeMap::new();
        for row in &self.rows {
            *map.entry(row.v_lower).or_insert(0.0) += row.rel_pop;
        }
        map
    }

    pub fn bucket_populations(&self) -> DecayBuckets {
        let pops = self.vibrational_populations();
        let per_v = (0..=10)
            .map(|v| (v, pops.get(&v).copied().unwrap_or(0.0)))
            .collect();
        let range_sum = |lo: u32, hi: u32| {
            pops.iter()
                .filter(|(&v, _)| v >= lo && v <= hi)
                .map(|(_, &p)| p)
                .sum()
        };
        DecayBuckets {
            per_v,
            sum_11_20: range_sum(11, 20),
            sum_over_20: range_sum(21, u32::MAX),
        }
    }

    /// CSV export: metadata header with the upper-level identity, then
    /// columns v'', J'', branch, A_per_s, rel_pop.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# upper_level: {}", self.upper_label)?;
        writeln!(w, "# upper_v: {}", self.upper_v)?;
        writeln!(w, "# upper_J: {}", self.upper_j)?;
        writeln!(
            w,
            "# upper_parity: {}",
            match self.parity {
                Parity::E => "e",
                Parity::F => "f",
                Parity::Both => "both",
            }
        )?;
        writeln!(w, "# total_A_per_s: {}", self.total_a)?;
        writeln!(w, "# fcf_sum: {}", self.fcf_sum)?;
        writeln!(w, "# continuum_leakage: {}", self.continuum_leakage)?;
        writeln!(w, "v_lower,J_lower,branch,A_per_s,rel_pop")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{}",
                r.v_lower, r.j_lower, r.branch, r.a_per_s, r.rel_pop
            )?;
        }
        Ok(())
    }
}

/// Einstein-A decay table from `upper` into all bound lower levels reachable
/// through the parity-allowed branches. Relative populations are A/ΣA over
/// the returned rows.
pub fn decay_table(
    upper: &RovibLevel,
    lower: &mut ManifoldSolver,
    dipole: &DipoleFunction,
    parity: Parity,
    rot: RotationalTreatment,
) -> Result<DecayTable> {
    let branches = allowed_branches(upper.j, parity)?;
    let j_of = |line: &BranchLine| match rot {
        RotationalTreatment::ResolveBranchJ => line.j_lower,
        RotationalTreatment::FrozenJ(j) => j,
    };

    let mut rows: Vec<DecayRow> = Vec::new();
    let mut fcf_sum = 0.0;
    let fcf_j = j_of(&branches[0]);
    let mut v = 0u32;
    loop {
        let mut any_bound = false;
        for line in &branches {
            match lower.level(v, j_of(line)) {
                Ok(level) => {
                    any_bound = true;
                    let a = einstein_a(upper, level, line, dipole)?;
                    rows.push(DecayRow {
                        v_lower: v,
                        j_lower: line.j_lower,
                        branch: line.branch,
                        upper_parity: line.upper_parity,
                        a_per_s: a,
                        rel_pop: 0.0,
                    });
                }
                Err(Error::NotBound { .. }) => {}
                Err(e) => return Err(e),
            }
        }
        match lower.level(v, fcf_j) {
            Ok(level) => fcf_sum += franck_condon(level, upper)?,
            Err(Error::NotBound { .. }) => {}
            Err(e) => return Err(e),
        }
        if !any_bound {
            break;
        }
        v += 1;
        if v > 10_000 {
            return Err(Error::invalid("runaway vibrational count in decay table"));
        }
    }
    if rows.is_empty() {
        return Err(Error::invalid(
            "lower manifold holds no bound levels reachable from this upper level",
        ));
    }
    let total_a: f64 = rows.iter().map(|r| r.a_per_s).sum();
    if total_a <= 0.0 {
        return Err(Error::invalid("all decay rates are zero; check the dipole function"));
    }
    for r in rows.iter_mut() {
        r.rel_pop = r.a_per_s / total_a;
    }
    rows.sort_by_key(|r| (r.v_lower, r.j_lower));
    Ok(DecayTable {
        upper_v: upper.v,
        upper_j: upper.j,
        parity,
        upper_label: upper.curve_label.clone(),
        rows,
        total_a,
        fcf_sum,
        continuum_leakage: 1.0 - fcf_sum,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::solve_level;
    use approx::assert_relative_eq;

    const MU: f64 = 6.664203892;

    fn kinetic() -> f64 {
        units::hbar2_over_2mu(MU)
    }

    #[test]
    fn honl_london_emission_from_j2() {
        // lines to J″ = 1, 2, 3 carry 1.5, 2.5, 1.0; Σ = 2J′+1 = 5
        assert_relative_eq!(honl_london(Branch::R, 1).unwrap(), 1.5);
        assert_relative_eq!(honl_london(Branch::Q, 2).unwrap(), 2.5);
        assert_relative_eq!(honl_london(Branch::P, 3).unwrap(), 1.0);
        let sum: f64 = allowed_branches(2, Parity::Both)
            .unwrap()
            .iter()
            .map(|l| l.honl_london)
            .sum();
        assert_relative_eq!(sum, 5.0);
    }

    #[test]
    fn honl_london_edge_values() {
        assert_relative_eq!(honl_london(Branch::P, 1).unwrap(), 0.0); // P(1) absent
        assert_relative_eq!(honl_london(Branch::Q, 0).unwrap(), 0.5);
        assert_relative_eq!(honl_london(Branch::R, 0).unwrap(), 1.0);
        assert!(honl_london(Branch::P, 0).is_err());
    }

    #[test]
    fn honl_london_sum_rules() {
        for j_upper in 1..=20u32 {
            let sum: f64 = allowed_branches(j_upper, Parity::Both)
                .unwrap()
                .iter()
                .map(|l| l.honl_london)
                .sum();
            assert_relative_eq!(sum, (2 * j_upper + 1) as f64, epsilon = 1e-12);
        }
        // absorption direction: ΣS over P,Q,R from fixed J″ ≥ 1 is 2J″+1
        for j in 1..=20u32 {
            let s = honl_london(Branch::P, j).unwrap()
                + honl_london(Branch::Q, j).unwrap()
                + honl_london(Branch::R, j).unwrap();
            assert_relative_eq!(s, (2 * j + 1) as f64, epsilon = 1e-12);
        }
    }

    #[test]
    fn branch_selection_rules() {
        let f2: Vec<u32> = allowed_branches(2, Parity::F)
            .unwrap()
            .iter()
            .map(|l| l.j_lower)
            .collect();
        assert_eq!(f2, vec![2]);

        let both1: Vec<u32> = allowed_branches(1, Parity::Both)
            .unwrap()
            .iter()
            .map(|l| l.j_lower)
            .collect();
        assert_eq!(both1, vec![0, 1, 2]);

        let e1: Vec<u32> = allowed_branches(1, Parity::E)
            .unwrap()
            .iter()
            .map(|l| l.j_lower)
            .collect();
        assert_eq!(e1, vec![0, 2]);

        assert!(allowed_branches(0, Parity::Both).is_err());

        for l in allowed_branches(3, Parity::F).unwrap() {
            assert_eq!(l.j_lower, l.j_upper);
            assert_eq!(l.upper_parity, LevelParity::F);
        }
        for l in allowed_branches(3, Parity::E).unwrap() {
            assert_ne!(l.j_lower, l.j_upper);
            assert_eq!(l.upper_parity, LevelParity::E);
        }
    }

    #[test]
    fn decay_populations_from_j1() {
        let p = population_after_decay(1, Parity::Both).unwrap();
        assert_relative_eq!(p[&0], 1.0 / 3.0, epsilon = 1e-12);
        assert_relative_eq!(p[&1], 1.0 / 2.0, epsilon = 1e-12);
        assert_relative_eq!(p[&2], 1.0 / 6.0, epsilon = 1e-12);
        let pf = population_after_decay(2, Parity::F).unwrap();
        assert_eq!(pf.len(), 1);
        assert_relative_eq!(pf[&2], 1.0);
    }

    fn harmonic_level(k: f64, re: f64, v: u32, grid: &SolveGrid) -> RovibLevel {
        let curve = PotentialCurve::harmonic(k, re, 0.0, "h").unwrap();
        let pot = EffectivePotential::new(&curve, 0, MU).unwrap();
        solve_level(&pot, v, grid).unwrap()
    }

    #[test]
    fn fcf_identical_levels_orthonormal() {
        let curve = PotentialCurve::morse(5000.0, 0.9, 3.5, 0.0, "m").unwrap();
        let pot = EffectivePotential::new(&curve, 0, MU).unwrap();
        let grid = SolveGrid::new(1.9, 9.0, 20_001).unwrap();
        let levels: Vec<RovibLevel> = (0..=5).map(|v| solve_level(&pot, v, &grid).unwrap()).collect();
        for a in &levels {
            for b in &levels {
                let fcf = franck_condon(a, b).unwrap();
                if a.v == b.v {
                    assert!((fcf - 1.0).abs() < 1e-8);
                } else {
                    assert!(fcf < 1e-8);
                }
            }
        }
    }

    #[test]
    fn fcf_displaced_harmonic_closed_form() {
        // identical harmonics displaced by d: FCF(0,0) = exp(−d²ω̃/(4C))
        let k = 5000.0;
        let d = 0.4;
        let grid = SolveGrid::new(1.8, 6.4, 20_001).unwrap();
        let a = harmonic_level(k, 3.9, 0, &grid);
        let b = harmonic_level(k, 3.9 + d, 0, &grid);
        let omega = (2.0 * kinetic() * k).sqrt();
        let expect = (-d * d * omega / (4.0 * kinetic())).exp();
        let fcf = franck_condon(&a, &b).unwrap();
        assert_relative_eq!(fcf, expect, max_relative = 1e-5);
    }

    #[test]
    fn fcf_resampled_grids_match_same_grid_result() {
        let k = 5000.0;
        let d = 0.4;
        let shared = SolveGrid::new(1.8, 6.4, 20_001).unwrap();
        let other = SolveGrid::new(1.9, 6.8, 17_501).unwrap();
        let a = harmonic_level(k, 3.9, 0, &shared);
        let b_shared = harmonic_level(k, 3.9 + d, 0, &shared);
        let b_other = harmonic_level(k, 3.9 + d, 0, &other);
        let f1 = franck_condon(&a, &b_shared).unwrap();
        let f2 = franck_condon(&a, &b_other).unwrap();
        assert_relative_eq!(f1, f2, max_relative = 1e-4);
    }

    #[test]
    fn disjoint_grids_rejected() {
        let a = harmonic_level(5000.0, 3.9, 0, &SolveGrid::new(1.8, 6.0, 2_001).unwrap());
        let b = harmonic_level(5000.0, 8.5, 0, &SolveGrid::new(6.5, 11.0, 2_001).unwrap());
        assert!(franck_condon(&a, &b).is_err());
    }

    #[test]
    fn constant_dipole_factorizes() {
        let grid = SolveGrid::new(1.8, 6.4, 20_001).unwrap();
        let a = harmonic_level(5000.0, 3.9, 0, &grid);
        let b = harmonic_level(5000.0, 4.3, 0, &grid);
        let d0 = 2.7;
        let m = dipole_matrix_element(&a, &b, &DipoleFunction::constant(d0)).unwrap();
        let ovl = overlap(&a, &b).unwrap();
        assert_relative_eq!(m, d0 * ovl, max_relative = 1e-12);
    }

    #[test]
    fn linear_dipole_ladder_elements() {
        let k = 5000.0;
        let re = 4.0;
        let grid = SolveGrid::new(1.5, 6.5, 20_001).unwrap();
        let v0 = harmonic_level(k, re, 0, &grid);
        let v1 = harmonic_level(k, re, 1, &grid);
        let d = DipoleFunction::tabulated(
            &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0],
            &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0],
        )
        .unwrap(); // d(R) = R on the domain
        // ⟨0|R|0⟩ = Re
        let m00 = dipole_matrix_element(&v0, &v0, &d).unwrap();
        assert_relative_eq!(m00, re, epsilon = 1e-6);
        // |⟨0|R|1⟩| = √(ħ/2µω) = √(C/ω̃)
        let omega = (2.0 * kinetic() * k).sqrt();
        let m01 = dipole_matrix_element(&v0, &v1, &d).unwrap().abs();
        assert_relative_eq!(m01, (kinetic() / omega).sqrt(), max_relative = 1e-5);
    }

    #[test]
    fn einstein_prefactor_from_constants() {
        // hand-evaluated from CODATA 2018: 3.1361887e-7 s⁻¹ cm³ D⁻²
        assert_relative_eq!(einstein_a_prefactor(), 3.136188665e-7, max_relative = 1e-9);
    }

    #[test]
    fn einstein_a_scalings() {
        let grid = SolveGrid::new(1.8, 6.4, 12_001).unwrap();
        let lower = harmonic_level(5000.0, 3.9, 0, &grid);
        let mut upper = harmonic_level(5000.0, 4.1, 0, &grid);
        upper.energy += 10_000.0;
        let line = allowed_branches(1, Parity::F).unwrap()[0];
        let a1 = einstein_a(&upper, &lower, &line, &DipoleFunction::constant(1.0)).unwrap();
        // doubling the dipole quadruples A
        let a2 = einstein_a(&upper, &lower, &line, &DipoleFunction::constant(2.0)).unwrap();
        assert_relative_eq!(a2 / a1, 4.0, max_relative = 1e-12);
        // doubling ν̃ gives 8×
        let mut upper2 = upper.clone();
        upper2.energy = lower.energy + 2.0 * (upper.energy - lower.energy);
        let a3 = einstein_a(&upper2, &lower, &line, &DipoleFunction::constant(1.0)).unwrap();
        assert_relative_eq!(a3 / a1, 8.0, max_relative = 1e-12);
        // emission requires ν̃ > 0
        assert!(einstein_a(&lower, &upper, &line, &DipoleFunction::constant(1.0)).is_err());
    }

    /// Two Morse curves standing in for X (deep) and B (shallower, displaced,
    /// offset): enough structure to exercise a full decay table.
    fn decay_pair() -> (PotentialCurve, PotentialCurve) {
        let x = PotentialCurve::morse(5000.0, 0.9, 3.5, 0.0, "X-test").unwrap();
        let b = PotentialCurve::morse(2000.0, 0.8, 3.9, 12_000.0, "B-test").unwrap();
        (x, b)
    }

    #[test]
    fn decay_table_properties() {
        let (x, b) = decay_pair();
        let b_pot = EffectivePotential::new(&b, 2, MU).unwrap();
        let b_grid = SolveGrid::new(2.2, 9.5, 12_001).unwrap();
        let upper = solve_level(&b_pot, 4, &b_grid).unwrap();
        let grid = SolveGrid::new(1.9, 10.0, 16_001).unwrap();

        let mut lower = ManifoldSolver::new(&x, MU, grid);
        let dip = DipoleFunction::constant(1.0);
        let table = decay_table(&upper, &mut lower, &dip, Parity::F, RotationalTreatment::ResolveBranchJ)
            .unwrap();

        let pop_sum: f64 = table.rows.iter().map(|r| r.rel_pop).sum();
        assert!((pop_sum - 1.0).abs() < 1e-9);
        assert!(table.rows.iter().all(|r| r.a_per_s >= 0.0));
        // f-parity: Q branch only (ΔJ = 0)
        assert!(table.rows.iter().all(|r| r.j_lower == upper.j));
        assert!(table.fcf_sum > 0.999, "fcf_sum = {}", table.fcf_sum);

        // populations invariant under dipole scaling; total_A scales by κ²
        let dip3 = DipoleFunction::constant(3.0);
        let table3 = decay_table(&upper, &mut lower, &dip3, Parity::F, RotationalTreatment::ResolveBranchJ)
            .unwrap();
        assert_relative_eq!(table3.total_a / table.total_a, 9.0, max_relative = 1e-10);
        for (r1, r3) in table.rows.iter().zip(&table3.rows) {
            assert_relative_eq!(r1.rel_pop, r3.rel_pop, epsilon = 1e-12);
        }

        // e-parity rows are ΔJ = ±1 only
        let table_e = decay_table(&upper, &mut lower, &dip, Parity::E, RotationalTreatment::ResolveBranchJ)
            .unwrap();
        assert!(table_e
            .rows
            .iter()
            .all(|r| r.j_lower + 1 == upper.j || r.j_lower == upper.j + 1));
    }

    #[test]
    fn decay_table_identical_curves_is_diagonal() {
        let x = PotentialCurve::morse(5000.0, 0.9, 3.5, 0.0, "X").unwrap();
        let grid = SolveGrid::new(1.9, 9.0, 12_001).unwrap();
        let pot = EffectivePotential::new(&x, 1, MU).unwrap();
        let mut upper = solve_level(&pot, 3, &grid).unwrap();
        upper.energy += 11_000.0; // lift into an artificial upper state
        let mut lower = ManifoldSolver::new(&x, MU, grid);
        let table = decay_table(
            &upper,
            &mut lower,
            &DipoleFunction::constant(1.0),
            Parity::F,
            RotationalTreatment::FrozenJ(1),
        )
        .unwrap();
        let pops = table.vibrational_populations();
        assert!(pops[&3] > 0.999, "diagonal population {}", pops[&3]);
    }

    #[test]
    fn frozen_j_close_to_resolved() {
        let (x, b) = decay_pair();
        let b_pot = EffectivePotential::new(&b, 1, MU).unwrap();
        let upper = solve_level(&b_pot, 2, &SolveGrid::new(2.2, 9.5, 12_001).unwrap()).unwrap();
        let grid = SolveGrid::new(1.9, 10.0, 16_001).unwrap();
        let mut lower = ManifoldSolver::new(&x, MU, grid);
        let dip = DipoleFunction::constant(1.0);
        let resolved =
            decay_table(&upper, &mut lower, &dip, Parity::Both, RotationalTreatment::ResolveBranchJ)
                .unwrap();
        let frozen =
            decay_table(&upper, &mut lower, &dip, Parity::Both, RotationalTreatment::FrozenJ(0))
                .unwrap();
        let pr = resolved.vibrational_populations();
        let pf = frozen.vibrational_populations();
        for (v, p) in &pr {
            assert_relative_eq!(p, pf.get(v).unwrap_or(&0.0), epsilon = 2e-3);
        }
    }

    #[test]
    fn bucket_layout() {
        let (x, b) = decay_pair();
        let b_pot = EffectivePotential::new(&b, 2, MU).unwrap();
        let upper = solve_level(&b_pot, 4, &SolveGrid::new(2.2, 9.5, 12_001).unwrap()).unwrap();
        let mut lower = ManifoldSolver::new(&x, MU, SolveGrid::new(1.9, 10.0, 16_001).unwrap());
        let table = decay_table(
            &upper,
            &mut lower,
            &DipoleFunction::constant(1.0),
            Parity::F,
            RotationalTreatment::FrozenJ(2),
        )
        .unwrap();
        let b = table.bucket_populations();
        assert_eq!(b.per_v.len(), 11);
        let total: f64 = b.per_v.iter().map(|(_, p)| p).sum::<f64>() + b.sum_11_20 + b.sum_over_20;
        assert_relative_eq!(total, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn dipole_file_units() {
        let text = "# unit_R: bohr\n# unit_V: au\n1.0 1.0\n2.0 1.5\n3.0 2.0\n4.0 2.5\n";
        let d = DipoleFunction::from_table_str("d.dat", text).unwrap();
        // 2 bohr → Å, 1.5 au → Debye
        let r = 2.0 * units::BOHR_RADIUS_ANGSTROM;
        assert_relative_eq!(d.value(r), 1.5 * units::AU_DIPOLE_DEBYE, max_relative = 1e-10);
        // outside the table the end value is held
        assert_relative_eq!(
            d.value(100.0),
            2.5 * units::AU_DIPOLE_DEBYE,
            max_relative = 1e-12
        );
    }
}
