//! Bound-state solver for the radial Schrödinger equation on an effective
//! potential.
//!
//! Numerov integration from both ends of the grid, matched at the outer
//! classical turning point; the eigenvalue is bracketed by node-count
//! bisection and polished with the Cooley matching-derivative correction.
//! Working units: R in Å, energies in cm⁻¹, ψ normalized to ∫ψ²dR = 1.

use crate::error::{Error, Result};
use crate::math::{trapezoid, trapezoid_uniform};
use crate::potential::EffectivePotential;
use crate::units;

/// Levels closer to the asymptote than this (cm⁻¹) are flagged halo/uncertain.
const HALO_MARGIN: f64 = 1e-6;

/// Uniform radial grid for the eigensolver.
#[derive(Debug, Clone, Copy)]
pub struct SolveGrid {
    pub r_min: f64,
    pub r_max: f64,
    pub n_points: usize,
}

impl SolveGrid {
    pub fn new(r_min: f64, r_max: f64, n_points: usize) -> Result<Self> {
        if !(r_min > 0.0) || !(r_max > r_min) {
            return Err(Error::invalid(format!(
                "grid needs 0 < r_min < r_max, got [{r_min}, {r_max}]"
            )));
        }
        if n_points < 500 {
            return Err(Error::invalid(format!(
                "grid needs at least 500 points, got {n_points}"
            )));
        }
        Ok(SolveGrid {
            r_min,
            r_max,
            n_points,
        })
    }

    /// Size a grid automatically for levels up to `e_top` (cm⁻¹, same zero as
    /// the curve): inner edge where the wall towers over the well, outer edge
    /// where the least-bound wavefunction has decayed away, step from the
    /// shortest local de Broglie wavelength (`points_per_wavelength` ≥ 15).
    pub fn auto(pot: &EffectivePotential, e_top: f64, points_per_wavelength: f64) -> Result<Self> {
        if points_per_wavelength < 15.0 {
            return Err(Error::invalid(
                "points_per_wavelength must be at least 15".to_string(),
            ));
        }
        let (r_e, v_min) = pot.min_location();
        if !(e_top > v_min) {
            return Err(Error::invalid(format!(
                "e_top = {e_top} cm-1 is not above the potential minimum {v_min} cm-1"
            )));
        }
        let depth = e_top - v_min;
        let c = units::hbar2_over_2mu(pot.mu());

        // Inner edge: march down the repulsive wall until it dwarfs the well.
        let wall_target = e_top + 30.0 * depth;
        let dr_in = r_e / 512.0;
        let mut r_min = r_e;
        while pot.value(r_min) < wall_target && r_min > 2.0 * dr_in {
            r_min -= dr_in;
        }
        r_min = (r_min - dr_in).max(dr_in);

        // Outer edge: turning point of e_top plus enough WKB phase that the
        // tail has decayed below 1e-10 of its peak (capped for halo states).
        let r_cap = r_e + 500.0;
        let dr_out = r_e / 128.0;
        let mut r_t = r_e;
        while pot.value(r_t) < e_top && r_t < r_cap {
            r_t += dr_out;
        }
        let mut r_max = r_t;
        let mut phase = 0.0;
        while phase < 26.0 && r_max < r_cap {
            let v = pot.value(r_max);
            if v > e_top {
                phase += ((v - e_top) / c).sqrt() * dr_out;
            }
            r_max += dr_out;
        }

        // Step: de Broglie criterion in the well, and the Numerov stability
        // bound h²·(V−E)/(12C) < 1 on the inner wall.
        let k_max = (depth / c).sqrt();
        let h_db = 2.0 * std::f64::consts::PI / (k_max * points_per_wavelength);
        let v_wall = pot.value(r_min);
        let h_stab = (12.0 * 0.8 * c / (v_wall - v_min)).sqrt();
        let h = h_db.min(h_stab);
        let n = (((r_max - r_min) / h).ceil() as usize + 1).max(500);
        SolveGrid::new(r_min, r_max, n)
    }

    pub fn step(&self) -> f64 {
        (self.r_max - self.r_min) / (self.n_points - 1) as f64
    }

    pub fn points(&self) -> Vec<f64> {
        let h = self.step();
        (0..self.n_points)
            .map(|i| self.r_min + h * i as f64)
            .collect()
    }
}

/// One bound rovibrational level.
#[derive(Debug, Clone)]
pub struct RovibLevel {
    /// Vibrational quantum number (= node count of ψ).
    pub v: u32,
    /// Rotational quantum number of the effective potential.
    pub j: u32,
    /// Level energy (cm⁻¹, same zero as the curve).
    pub energy: f64,
    /// Radial grid (Å, uniform).
    pub r: Vec<f64>,
    /// Normalized radial wavefunction on `r`.
    pub psi: Vec<f64>,
    /// Rotational constant of this level (GHz).
    pub bv_ghz: f64,
    pub curve_label: String,
    /// Within 1e-6 cm⁻¹ of the asymptote: returned, but numerically fragile.
    pub halo: bool,
}

impl RovibLevel {
    /// Trapezoid quadrature of ψ·f(R)·ψ over the grid.
    pub fn expectation<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        let y: Vec<f64> = self
            .r
            .iter()
            .zip(&self.psi)
            .map(|(&r, &p)| p * p * f(r))
            .collect();
        trapezoid(&self.r, &y)
    }

    /// Recount the nodes of the stored wavefunction.
    pub fn node_count(&self) -> usize {
        count_nodes(&self.psi)
    }

    pub fn norm(&self) -> f64 {
        self.expectation(|_| 1.0)
    }
}

/// Expectation value ⟨ψ|f(R)|ψ⟩ of a level.
pub fn expectation<F: Fn(f64) -> f64>(level: &RovibLevel, f: F) -> f64 {
    level.expectation(f)
}

/// Rotational constant Bv = (ħ²/2µ)⟨1/R²⟩ in GHz.
pub fn rotational_constant(level: &RovibLevel, mu_amu: f64) -> f64 {
    units::hbar2_over_2mu(mu_amu) * level.expectation(|r| 1.0 / (r * r)) * units::CM1_GHZ
}

/// Batch result of [`solve_manifold`].
#[derive(Debug)]
pub struct ManifoldSolve {
    /// Successfully solved levels, ordered by v.
    pub levels: Vec<RovibLevel>,
    /// Levels that could not be solved, with the per-level error.
    pub failures: Vec<(u32, Error)>,
}

/// Solve a single level; see [`LevelSolver`] for batch work.
pub fn solve_level(pot: &EffectivePotential, v: u32, grid: &SolveGrid) -> Result<RovibLevel> {
    LevelSolver::new(*pot, grid)?.solve(v)
}

/// Solve a set of vibrational levels on a shared grid. Per-level failures
/// (e.g. v above dissociation) do not abort the batch.
pub fn solve_manifold(
    pot: &EffectivePotential,
    vs: impl IntoIterator<Item = u32>,
    grid: &SolveGrid,
) -> Result<ManifoldSolve> {
    let mut solver = LevelSolver::new(*pot, grid)?;
    let mut out = ManifoldSolve {
        levels: Vec::new(),
        failures: Vec::new(),
    };
    for v in vs {
        match solver.solve(v) {
            Ok(level) => out.levels.push(level),
            Err(e) => out.failures.push((v, e)),
        }
    }
    out.levels.sort_by(|a, b| a.v.cmp(&b.v));
    Ok(out)
}

/// Reusable eigensolver for one (potential, grid) pair: the potential is
/// evaluated on the grid once, then any number of levels can be solved.
pub struct LevelSolver<'c> {
    pot: EffectivePotential<'c>,
    r: Vec<f64>,
    vv: Vec<f64>,
    h: f64,
    c: f64,
    v_min: f64,
    e_ceiling: f64,
    depth: f64,
    n_bound: Option<usize>,
    // scratch buffers reused across iterations
    buf_out: Vec<f64>,
    buf_in: Vec<f64>,
    buf_full: Vec<f64>,
}

impl<'c> LevelSolver<'c> {
    pub fn new(pot: EffectivePotential<'c>, grid: &SolveGrid) -> Result<Self> {
        let r = grid.points();
        let vv: Vec<f64> = r.iter().map(|&x| pot.value(x)).collect();
        if vv.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid(
                "potential is not finite everywhere on the grid".to_string(),
            ));
        }
        let n = r.len();
        let h = grid.step();
        let c = units::hbar2_over_2mu(pot.mu());
        let v_min = vv.iter().cloned().fold(f64::INFINITY, f64::min);
        let v_max = vv.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let e_ceiling = vv[0].min(vv[n - 1]).min(pot.asymptote());
        if !(e_ceiling > v_min) {
            return Err(Error::invalid(
                "grid does not enclose a potential well".to_string(),
            ));
        }
        // Numerov stability: (1 − h²f/12) must stay positive everywhere.
        let f_max = (v_max - v_min) / c;
        if h * h * f_max / 12.0 >= 0.9 {
            return Err(Error::invalid(format!(
                "grid too coarse for the inner wall (h²·ΔV/(12C) = {:.2}); \
                 increase n_points or raise r_min",
                h * h * f_max / 12.0
            )));
        }
        Ok(LevelSolver {
            pot,
            r,
            vv,
            h,
            c,
            v_min,
            e_ceiling,
            depth: e_ceiling - v_min,
            n_bound: None,
            buf_out: vec![0.0; n],
            buf_in: vec![0.0; n],
            buf_full: vec![0.0; n],
        })
    }

    /// Number of bound levels supported by this potential on this grid.
    pub fn n_bound(&mut self) -> usize {
        if let Some(n) = self.n_bound {
            return n;
        }
        // Probe just below the ceiling; the margin must stay smaller than the
        // binding energy of halo levels but above f64 resolution.
        let e = self.e_ceiling - (1e-12 * self.depth).max(4.0 * f64::EPSILON * self.e_ceiling.abs());
        let mut buf = std::mem::take(&mut self.buf_full);
        let n = self.outward(e, &mut buf);
        self.buf_full = buf;
        self.n_bound = Some(n);
        n
    }

    pub fn grid_points(&self) -> &[f64] {
        &self.r
    }

    /// Solve the level with `v` nodes.
    pub fn solve(&mut self, v: u32) -> Result<RovibLevel> {
        let n_bound = self.n_bound();
        if (v as usize) >= n_bound {
            return Err(Error::NotBound {
                requested: v,
                highest_bound: n_bound.checked_sub(1).map(|x| x as u32),
            });
        }

        // Coarse scan, then node-count bisection to a bracket holding only
        // the target eigenvalue.
        let (mut e_lo, mut e_hi) = self.coarse_bracket(v);
        let mut full = std::mem::take(&mut self.buf_full);
        for _ in 0..64 {
            if e_hi - e_lo < 1e-4 * self.depth {
                break;
            }
            let e = 0.5 * (e_lo + e_hi);
            if self.outward(e, &mut full) <= v as usize {
                e_lo = e;
            } else {
                e_hi = e;
            }
        }

        // Cooley refinement with the bracket as a safety net.
        let mut out = std::mem::take(&mut self.buf_out);
        let mut inw = std::mem::take(&mut self.buf_in);
        let tol = 1e-10 * self.depth;
        let mut e = 0.5 * (e_lo + e_hi);
        let mut result = Err(Error::Convergence {
            v,
            iterations: 200,
            lo: e_lo,
            hi: e_hi,
        });
        for _ in 0..200 {
            // Keep the bracket honest while iterating.
            let nodes = self.outward(e, &mut full);
            if nodes <= v as usize {
                e_lo = e_lo.max(e);
            } else {
                e_hi = e_hi.min(e);
            }
            let Some((_m, de)) = self.matched_correction(e, &mut out, &mut inw) else {
                e = 0.5 * (e_lo + e_hi);
                continue;
            };
            if de.abs() < tol {
                result = Ok(e);
                break;
            }
            let e_next = e + de;
            e = if e_next > e_lo && e_next < e_hi {
                e_next
            } else {
                0.5 * (e_lo + e_hi)
            };
        }
        self.buf_full = full;

        let energy = match result {
            Ok(e) => e,
            Err(err) => {
                self.buf_out = out;
                self.buf_in = inw;
                return Err(err);
            }
        };

        // Final wavefunction from the matched pair at the converged energy.
        let psi = self.assemble(energy, &mut out, &mut inw)?;
        self.buf_out = out;
        self.buf_in = inw;

        let nodes = count_nodes(&psi);
        if nodes != v as usize {
            return Err(Error::Convergence {
                v,
                iterations: 200,
                lo: e_lo,
                hi: e_hi,
            });
        }

        let bv_ghz = self.c
            * trapezoid_uniform(
                self.h,
                &self
                    .r
                    .iter()
                    .zip(&psi)
                    .map(|(&r, &p)| p * p / (r * r))
                    .collect::<Vec<_>>(),
            )
            * units::CM1_GHZ;

        Ok(RovibLevel {
            v,
            j: self.pot.l(),
            energy,
            r: self.r.clone(),
            psi,
            bv_ghz,
            curve_label: self.pot.curve().label().to_string(),
            halo: self.pot.asymptote().is_finite()
                && (self.pot.asymptote() - energy) < HALO_MARGIN,
        })
    }

    /// Initial bracket from a 50-point energy scan between well bottom and
    /// ceiling, using the node count of the outward solution.
    fn coarse_bracket(&mut self, v: u32) -> (f64, f64) {
        const N_SCAN: usize = 50;
        let mut full = std::mem::take(&mut self.buf_full);
        let mut e_lo = self.v_min + 1e-12 * self.depth;
        let mut e_hi = self.e_ceiling - 1e-12 * self.depth;
        for k in 1..N_SCAN {
            let e = self.v_min + self.depth * k as f64 / N_SCAN as f64;
            let nodes = self.outward(e, &mut full);
            if nodes <= v as usize {
                e_lo = e_lo.max(e);
            } else {
                e_hi = e_hi.min(e);
                break;
            }
        }
        self.buf_full = full;
        (e_lo, e_hi)
    }

    fn f_at(&self, i: usize, e: f64) -> f64 {
        (self.vv[i] - e) / self.c
    }

    /// Outward Numerov sweep over the full grid; returns the node count
    /// (the Sturm count of eigenvalues below `e`).
    fn outward(&self, e: f64, psi: &mut [f64]) -> usize {
        let n = psi.len();
        let h2 = self.h * self.h;
        psi[0] = 0.0;
        psi[1] = 1e-100;
        let mut nodes = 0;
        let mut y_prev = 0.0;
        let mut y_cur = (1.0 - h2 * self.f_at(1, e) / 12.0) * psi[1];
        for i in 1..n - 1 {
            let y_next = 2.0 * y_cur - y_prev + h2 * self.f_at(i, e) * psi[i];
            psi[i + 1] = y_next / (1.0 - h2 * self.f_at(i + 1, e) / 12.0);
            if psi[i] * psi[i + 1] < 0.0 {
                nodes += 1;
            }
            y_prev = y_cur;
            y_cur = y_next;
            if psi[i + 1].abs() > 1e100 {
                let s = 1e-100;
                for p in psi[..=i + 1].iter_mut() {
                    *p *= s;
                }
                y_prev *= s;
                y_cur *= s;
            }
        }
        nodes
    }

    /// Outward sweep stopped at index `stop` (inclusive); no node counting.
    fn outward_to(&self, e: f64, stop: usize, psi: &mut [f64]) {
        let h2 = self.h * self.h;
        psi[0] = 0.0;
        psi[1] = 1e-100;
        let mut y_prev = 0.0;
        let mut y_cur = (1.0 - h2 * self.f_at(1, e) / 12.0) * psi[1];
        for i in 1..stop {
            let y_next = 2.0 * y_cur - y_prev + h2 * self.f_at(i, e) * psi[i];
            psi[i + 1] = y_next / (1.0 - h2 * self.f_at(i + 1, e) / 12.0);
            y_prev = y_cur;
            y_cur = y_next;
            if psi[i + 1].abs() > 1e100 {
                let s = 1e-100;
                for p in psi[..=i + 1].iter_mut() {
                    *p *= s;
                }
                y_prev *= s;
                y_cur *= s;
            }
        }
    }

    /// Inward sweep from the right edge down to index `stop` (inclusive).
    fn inward_to(&self, e: f64, stop: usize, psi: &mut [f64]) {
        let n = psi.len();
        let h2 = self.h * self.h;
        psi[n - 1] = 0.0;
        psi[n - 2] = 1e-100;
        let mut y_prev = 0.0;
        let mut y_cur = (1.0 - h2 * self.f_at(n - 2, e) / 12.0) * psi[n - 2];
        let mut i = n - 2;
        while i > stop {
            let y_next = 2.0 * y_cur - y_prev + h2 * self.f_at(i, e) * psi[i];
            psi[i - 1] = y_next / (1.0 - h2 * self.f_at(i - 1, e) / 12.0);
            y_prev = y_cur;
            y_cur = y_next;
            if psi[i - 1].abs() > 1e100 {
                let s = 1e-100;
                for p in psi[i - 1..].iter_mut() {
                    *p *= s;
                }
                y_prev *= s;
                y_cur *= s;
            }
            i -= 1;
        }
    }

    /// Outermost classical turning point index for energy `e`.
    fn turning_index(&self, e: f64) -> usize {
        let n = self.vv.len();
        let mut m = n - 3;
        while m > 2 && self.vv[m] > e {
            m -= 1;
        }
        m.clamp(2, n - 3)
    }

    /// Matched two-sided solution at energy `e`; returns the matching index
    /// and the Cooley energy correction, or None if matching degenerates
    /// (e.g. ψ ≈ 0 at every candidate matching point).
    fn matched_correction(&self, e: f64, out: &mut [f64], inw: &mut [f64]) -> Option<(usize, f64)> {
        let n = out.len();
        let m0 = self.turning_index(e);
        let win_lo = m0.saturating_sub(5).max(2);
        let win_hi = (m0 + 5).min(n - 3);
        self.outward_to(e, win_hi + 1, out);
        self.inward_to(e, win_lo.saturating_sub(1), inw);
        let m = (win_lo..=win_hi)
            .max_by(|&a, &b| (out[a] * inw[a]).abs().total_cmp(&(out[b] * inw[b]).abs()))?;
        if out[m] == 0.0 || inw[m] == 0.0 {
            return None;
        }
        let scale = out[m] / inw[m];
        let h2 = self.h * self.h;
        let yv = |i: usize, p: f64| (1.0 - h2 * self.f_at(i, e) / 12.0) * p;
        let psi_m = out[m];
        let y_m1 = yv(m - 1, out[m - 1]);
        let y_m = yv(m, psi_m);
        let y_p1 = yv(m + 1, inw[m + 1] * scale);
        let defect = (self.vv[m] - e) * psi_m - self.c * (y_p1 - 2.0 * y_m + y_m1) / h2;
        // Σψ² over the composite; guard against overflow of the squares.
        let mut peak = 0.0f64;
        for &p in &out[..=m] {
            peak = peak.max(p.abs());
        }
        for &p in &inw[m + 1..] {
            peak = peak.max((p * scale).abs());
        }
        if peak == 0.0 || !peak.is_finite() {
            return None;
        }
        let inv = 1.0 / peak;
        let mut s = 0.0;
        for &p in &out[..=m] {
            let q = p * inv;
            s += q * q;
        }
        for &p in &inw[m + 1..] {
            let q = p * scale * inv;
            s += q * q;
        }
        if s == 0.0 {
            return None;
        }
        let de = (psi_m * inv) * (defect * inv) / s;
        de.is_finite().then_some((m, de))
    }

    /// Build the normalized, sign-oriented composite wavefunction at the
    /// converged energy.
    fn assemble(&self, e: f64, out: &mut [f64], inw: &mut [f64]) -> Result<Vec<f64>> {
        let n = out.len();
        let m0 = self.turning_index(e);
        let win_lo = m0.saturating_sub(5).max(2);
        let win_hi = (m0 + 5).min(n - 3);
        self.outward_to(e, win_hi + 1, out);
        self.inward_to(e, win_lo.saturating_sub(1), inw);
        let m = (win_lo..=win_hi)
            .max_by(|&a, &b| (out[a] * inw[a]).abs().total_cmp(&(out[b] * inw[b]).abs()))
            .unwrap_or(m0);
        if out[m] == 0.0 || inw[m] == 0.0 {
            return Err(Error::invalid(
                "degenerate matching point in wavefunction assembly".to_string(),
            ));
        }
        let scale = out[m] / inw[m];
        let mut psi: Vec<f64> = Vec::with_capacity(n);
        psi.extend_from_slice(&out[..=m]);
        psi.extend(inw[m + 1..].iter().map(|&p| p * scale));

        // Pre-scale by the peak so the norm integral cannot overflow.
        let peak = psi.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        for p in psi.iter_mut() {
            *p /= peak;
        }
        let norm = trapezoid_uniform(self.h, &psi.iter().map(|p| p * p).collect::<Vec<_>>());
        let inv = 1.0 / norm.sqrt();
        for p in psi.iter_mut() {
            *p *= inv;
        }
        // Sign convention: the first significant lobe is positive.
        if let Some(&first) = psi.iter().find(|p| p.abs() > 1e-3) {
            if first < 0.0 {
                for p in psi.iter_mut() {
                    *p = -*p;
                }
            }
        }
        Ok(psi)
    }
}

/// Count strict sign changes, ignoring numerically dead samples.
fn count_nodes(psi: &[f64]) -> usize {
    let peak = psi.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let floor = 1e-12 * peak;
    let mut nodes = 0;
    let mut last_sign = 0.0f64;
    for &p in psi {
        if p.abs() <= floor {
            continue;
        }
        let s = p.signum();
        if last_sign != 0.0 && s != last_sign {
            nodes += 1;
        }
        last_sign = s;
    }
    nodes
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::PotentialCurve;
    use approx::assert_relative_eq;

    const MU: f64 = 6.664203892;

    fn kinetic() -> f64 {
        units::hbar2_over_2mu(MU)
    }

    /// ω̃ = √(2Ck) for V = ½k(R−Re)², energies in cm⁻¹.
    fn harmonic_omega(k: f64) -> f64 {
        (2.0 * kinetic() * k).sqrt()
    }

    #[test]
    fn harmonic_eigenvalues() {
        let k = 5000.0;
        let curve = PotentialCurve::harmonic(k, 4.0, 0.0, "h").unwrap();
        let pot = EffectivePotential::new(&curve, 0, MU).unwrap();
        let grid = SolveGrid::new(1.5, 6.5, 20_001).unwrap();
        let omega = harmonic_omega(k);
        let mut solver = LevelSolver::new(pot, &grid).unwrap();
        for v in 0..=10u32 {
            let level = solver.solve(v).unwrap();
            let exact = omega * (v as f64 + 0.5);
            assert_relative_eq!(level.energy, exact, max_relative = 1e-8);
            assert_eq!(level.node_count(), v as usize);
            assert_relative_eq!(level.norm(), 1.0, epsilon = 1e-10);
        }
    }

    /// Morse spectrum is exactly E_v = ωe(v+½) − ωexe(v+½)² with
    /// ωe = 2a√(C·De), ωexe = a²C.
    #[test]
    fn morse_eigenvalues() {
        let (de, a, re) = (5000.0, 0.9, 3.5);
        let curve = PotentialCurve::morse(de, a, re, 0.0, "m").unwrap();
        let pot = EffectivePotential::new(&curve, 0, MU).unwrap();
        let grid = SolveGrid::new(1.9, 9.0, 20_001).unwrap();
        let we = 2.0 * a * (kinetic() * de).sqrt();
        let wexe = a * a * kinetic();
        let mut solver = LevelSolver::new(pot, &grid).unwrap();
        for v in 0..=15u32 {
            let level = solver.solve(v).unwrap();
            let x = v as f64 + 0.5;
            let exact = we * x - wexe * x * x;
            assert_relative_eq!(level.energy, exact, max_relative = 1e-7);
        }
    }

    #[test]
    fn rigid_rotor_limit() {
        // stiff spring: B·J(J+1) with B = C/Re²
        let k = 49_414.0;
        let re = 4.0;
        let curve = PotentialCurve::harmonic(k, re, 0.0, "h").unwrap();
        let grid = SolveGrid::new(2.5, 5.5, 12_001).unwrap();
        let pot0 = EffectivePotential::new(&curve, 0, MU).unwrap();
        let pot10 = EffectivePotential::new(&curve, 10, MU).unwrap();
        let e0 = solve_level(&pot0, 0, &grid).unwrap().energy;
        let e10 = solve_level(&pot10, 0, &grid).unwrap().energy;
        let b = kinetic() / (re * re);
        assert_relative_eq!(e10 - e0, b * 110.0, max_relative = 0.01);
    }

    #[test]
    fn manifold_returns_bound_levels_and_markers() {
        // √(De/C)/a = 24.0 → 24 bound levels (v = 0..23)
        let de = kinetic() * 24.0f64.powi(2);
        let curve = PotentialCurve::morse(de, 1.0, 3.5, 0.0, "m").unwrap();
        let pot = EffectivePotential::new(&curve, 0, MU).unwrap();
        let grid = SolveGrid::new(1.8, 60.0, 24_001).unwrap();
        let res = solve_manifold(&pot, 0..=40, &grid).unwrap();
        assert_eq!(res.levels.len(), 24);
        assert_eq!(res.failures.len(), 17);
        for (v, err) in &res.failures {
            assert!(*v >= 24);
            assert!(matches!(err, Error::NotBound { highest_bound: Some(23), .. }));
        }
        // strictly increasing energies, consecutive node counts
        for w in res.levels.windows(2) {
            assert!(w[1].energy > w[0].energy);
            assert_eq!(w[1].v, w[0].v + 1);
        }
        // empty range → empty result
        let empty = solve_manifold(&pot, std::iter::empty(), &grid).unwrap();
        assert!(empty.levels.is_empty() && empty.failures.is_empty());
    }

    #[test]
    fn orthonormal_manifold() {
        let curve = PotentialCurve::morse(5000.0, 0.9, 3.5, 0.0, "m").unwrap();
        let pot = EffectivePotential::new(&curve, 0, MU).unwrap();
        let grid = SolveGrid::new(1.9, 9.0, 20_001).unwrap();
        let res = solve_manifold(&pot, 0..=8, &grid).unwrap();
        assert_eq!(res.levels.len(), 9);
        for a in &res.levels {
            for b in &res.levels {
                let dot = trapezoid(
                    &a.r,
                    &a.psi
                        .iter()
                        .zip(&b.psi)
                        .map(|(&x, &y)| x * y)
                        .collect::<Vec<_>>(),
                );
                if a.v == b.v {
                    assert_relative_eq!(dot, 1.0, epsilon = 1e-10);
                } else {
                    assert!(dot.abs() < 1e-6, "⟨{}|{}⟩ = {dot}", a.v, b.v);
                }
            }
        }
    }

    #[test]
    fn grid_refinement_converged() {
        let curve = PotentialCurve::morse(5000.0, 0.9, 3.5, 0.0, "m").unwrap();
        let pot = EffectivePotential::new(&curve, 0, MU).unwrap();
        let coarse = SolveGrid::new(1.9, 9.0, 20_001).unwrap();
        let fine = SolveGrid::new(1.9, 9.0, 40_001).unwrap();
        let e1 = solve_level(&pot, 3, &coarse).unwrap().energy;
        let e2 = solve_level(&pot, 3, &fine).unwrap().energy;
        assert!(((e2 - e1) / e2).abs() < 1e-8);
    }

    #[test]
    fn expectation_values_on_harmonic_ground_state() {
        let k = 5000.0;
        let re = 4.0;
        let curve = PotentialCurve::harmonic(k, re, 0.0, "h").unwrap();
        let pot = EffectivePotential::new(&curve, 0, MU).unwrap();
        let grid = SolveGrid::new(1.5, 6.5, 20_001).unwrap();
        let level = solve_level(&pot, 0, &grid).unwrap();
        assert_relative_eq!(level.expectation(|_| 1.0), 1.0, epsilon = 1e-10);
        assert_relative_eq!(level.expectation(|r| r), re, epsilon = 1e-6);
        // ⟨(R−Re)²⟩ = ħ/(2µω) = C/ω̃
        let var = level.expectation(|r| (r - re) * (r - re));
        assert_relative_eq!(var, kinetic() / harmonic_omega(k), max_relative = 1e-4);
    }

    #[test]
    fn rotational_constant_stiff_harmonic() {
        let re = 4.0;
        let curve = PotentialCurve::harmonic(49_414.0, re, 0.0, "h").unwrap();
        let pot = EffectivePotential::new(&curve, 0, MU).unwrap();
        let grid = SolveGrid::new(2.5, 5.5, 12_001).unwrap();
        let level = solve_level(&pot, 0, &grid).unwrap();
        let rigid = kinetic() / (re * re) * units::CM1_GHZ;
        assert_relative_eq!(level.bv_ghz, rigid, max_relative = 0.005);
        assert_relative_eq!(rotational_constant(&level, MU), level.bv_ghz, epsilon = 1e-12);
    }

    #[test]
    fn bv_decreases_with_v_on_morse() {
        let curve = PotentialCurve::morse(5000.0, 0.9, 3.5, 0.0, "m").unwrap();
        let pot = EffectivePotential::new(&curve, 0, MU).unwrap();
        let grid = SolveGrid::new(1.9, 9.0, 20_001).unwrap();
        let res = solve_manifold(&pot, 0..=6, &grid).unwrap();
        for w in res.levels.windows(2) {
            assert!(w[1].bv_ghz < w[0].bv_ghz);
        }
    }

    #[test]
    fn unbound_level_reports_highest_bound() {
        let de = kinetic() * 16.0; // √(De/C) = 4 → 4 bound levels with a = 1
        let curve = PotentialCurve::morse(de, 1.0, 3.5, 0.0, "m").unwrap();
        let pot = EffectivePotential::new(&curve, 0, MU).unwrap();
        let grid = SolveGrid::new(1.5, 40.0, 16_001).unwrap();
        match solve_level(&pot, 10, &grid) {
            Err(Error::NotBound {
                requested,
                highest_bound,
            }) => {
                assert_eq!(requested, 10);
                assert_eq!(highest_bound, Some(3));
            }
            other => panic!("expected NotBound, got {other:?}"),
        }
    }

    #[test]
    fn halo_flag_near_asymptote() {
        // Tabulated Morse with the declared asymptote pulled down to just
        // above the v=5 level: that level becomes halo/uncertain.
        let (de, a, re) = (5000.0f64, 0.9, 3.5);
        let r: Vec<f64> = (0..2400).map(|i| 1.9 + 7.1 * i as f64 / 2399.0).collect();
        let v: Vec<f64> = r
            .iter()
            .map(|&x| {
                let f = 1.0 - (-a * (x - re)).exp();
                de * f * f
            })
            .collect();
        let grid = SolveGrid::new(1.9, 9.0, 20_001).unwrap();
        let plain = PotentialCurve::tabulated(r.clone(), v.clone(), None, None, "t").unwrap();
        let pot = EffectivePotential::new(&plain, 0, MU).unwrap();
        let e5 = solve_level(&pot, 5, &grid).unwrap().energy;

        let curve = PotentialCurve::tabulated(r, v, Some(e5 + 5e-7), None, "t").unwrap();
        let pot = EffectivePotential::new(&curve, 0, MU).unwrap();
        let level = solve_level(&pot, 5, &grid).unwrap();
        assert!(level.halo, "binding {:.3e}", curve.asymptote() - level.energy);
        let deep = solve_level(&pot, 0, &grid).unwrap();
        assert!(!deep.halo);
    }

    #[test]
    fn auto_grid_solves_morse() {
        let curve = PotentialCurve::morse(5000.0, 0.9, 3.5, 0.0, "m").unwrap();
        let pot = EffectivePotential::new(&curve, 0, MU).unwrap();
        let grid = SolveGrid::auto(&pot, 4999.0, 15.0).unwrap();
        assert!(grid.n_points >= 500);
        let we = 2.0 * 0.9 * (kinetic() * 5000.0).sqrt();
        let wexe = 0.81 * kinetic();
        let level = solve_level(&pot, 2, &grid).unwrap();
        let exact = we * 2.5 - wexe * 6.25;
        assert_relative_eq!(level.energy, exact, max_relative = 1e-6);
    }
}
