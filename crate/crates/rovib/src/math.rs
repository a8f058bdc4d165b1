//! Small numerical kernels shared across the crate: natural cubic splines,
//! quadrature, golden-section search and dense linear solves.

use crate::error::{Error, Result};

/// Natural cubic spline through strictly increasing abscissae.
///
/// Reproduces the knots exactly and is C² inside the table. Evaluation
/// outside the table continues the end segments' cubics.
#[derive(Debug, Clone)]
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    y2: Vec<f64>,
}

impl CubicSpline {
    pub fn natural(x: &[f64], y: &[f64]) -> Result<Self> {
        let n = x.len();
        if n != y.len() {
            return Err(Error::invalid("spline: x and y lengths differ"));
        }
        if n < 3 {
            return Err(Error::invalid("spline needs at least 3 points"));
        }
        for i in 1..n {
            if x[i] <= x[i - 1] {
                return Err(Error::invalid(format!(
                    "spline abscissae not strictly increasing at index {i}"
                )));
            }
        }
        // Tridiagonal solve for the second derivatives, natural boundaries.
        let mut y2 = vec![0.0; n];
        let mut u = vec![0.0; n];
        for i in 1..n - 1 {
            let sig = (x[i] - x[i - 1]) / (x[i + 1] - x[i - 1]);
            let p = sig * y2[i - 1] + 2.0;
            y2[i] = (sig - 1.0) / p;
            let slope_r = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
            let slope_l = (y[i] - y[i - 1]) / (x[i] - x[i - 1]);
            u[i] = (6.0 * (slope_r - slope_l) / (x[i + 1] - x[i - 1]) - sig * u[i - 1]) / p;
        }
        for i in (0..n - 1).rev() {
            y2[i] = y2[i] * y2[i + 1] + u[i];
        }
        Ok(CubicSpline {
            x: x.to_vec(),
            y: y.to_vec(),
            y2,
        })
    }

    fn segment(&self, x: f64) -> usize {
        // partition_point returns the first index with self.x[i] > x
        let n = self.x.len();
        let k = self.x.partition_point(|&xi| xi <= x);
        k.clamp(1, n - 1) - 1
    }

    pub fn value(&self, x: f64) -> f64 {
        let i = self.segment(x);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - x) / h;
        let b = (x - self.x[i]) / h;
        a * self.y[i]
            + b * self.y[i + 1]
            + ((a * a * a - a) * self.y2[i] + (b * b * b - b) * self.y2[i + 1]) * h * h / 6.0
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let i = self.segment(x);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - x) / h;
        let b = (x - self.x[i]) / h;
        (self.y[i + 1] - self.y[i]) / h
            + ((3.0 * b * b - 1.0) * self.y2[i + 1] - (3.0 * a * a - 1.0) * self.y2[i]) * h / 6.0
    }

    pub fn x_min(&self) -> f64 {
        self.x[0]
    }

    pub fn x_max(&self) -> f64 {
        *self.x.last().unwrap()
    }
}

/// Trapezoid integral of samples `y` over abscissae `x` (may be nonuniform).
pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    let mut acc = 0.0;
    for i in 1..x.len() {
        acc += 0.5 * (y[i] + y[i - 1]) * (x[i] - x[i - 1]);
    }
    acc
}

/// Trapezoid integral on a uniform grid with step `h`.
pub fn trapezoid_uniform(h: f64, y: &[f64]) -> f64 {
    if y.len() < 2 {
        return 0.0;
    }
    let inner: f64 = y[1..y.len() - 1].iter().sum();
    h * (0.5 * (y[0] + y[y.len() - 1]) + inner)
}

/// Adaptive Simpson quadrature of `f` on [a, b] to relative tolerance
/// `rel_tol`.
///
/// The caller is responsible for placing interval boundaries near any
/// feature much narrower than (b−a)/2, so the initial error estimate sees
/// it; the recursion depth is capped to keep mis-scaled tolerances from
/// hanging.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rel_tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let eps = rel_tol * whole.abs().max(1e-300);
    // The first 3 levels split unconditionally: an error estimate from 5
    // samples of the whole interval can be fooled by a fluke cancellation
    // and silently swallow structure between the sample points.
    simpson_recurse(f, a, b, fa, fm, fb, whole, eps, 24, 3)
}

#[allow(clippy::too_many_arguments)]
fn simpson_recurse<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    eps: f64,
    depth: u32,
    force_split: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || (force_split == 0 && delta.abs() <= 15.0 * eps) {
        left + right + delta / 15.0
    } else {
        let fs = force_split.saturating_sub(1);
        simpson_recurse(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1, fs)
            + simpson_recurse(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1, fs)
    }
}

/// Golden-section maximization of `f` on [a, b]; returns (x_max, f(x_max)).
pub fn golden_section_max<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, x_tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (a, b);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > x_tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Solve A·x = b in place by Gaussian elimination with partial pivoting.
/// `a` is row-major n×n. Returns None if A is (numerically) singular.
pub fn solve_linear(a: &mut [f64], b: &mut [f64], n: usize) -> Option<Vec<f64>> {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(b.len(), n);
    for col in 0..n {
        let mut pivot = col;
        for row in col + 1..n {
            if a[row * n + col].abs() > a[pivot * n + col].abs() {
                pivot = row;
            }
        }
        if a[pivot * n + col].abs() < 1e-300 {
            return None;
        }
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
            }
            b.swap(col, pivot);
        }
        let diag = a[col * n + col];
        for row in col + 1..n {
            let factor = a[row * n + col] / diag;
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[row * n + k] -= factor * a[col * n + k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in row + 1..n {
            acc -= a[row * n + k] * x[k];
        }
        x[row] = acc / a[row * n + row];
    }
    Some(x)
}

/// Invert a small symmetric positive-definite matrix (row-major n×n) by
/// column-wise solves. Returns None if singular.
pub fn invert(a: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut inv = vec![0.0; n * n];
    for col in 0..n {
        let mut aa = a.to_vec();
        let mut e = vec![0.0; n];
        e[col] = 1.0;
        let x = solve_linear(&mut aa, &mut e, n)?;
        for row in 0..n {
            inv[row * n + col] = x[row];
        }
    }
    Some(inv)
}

/// n evenly spaced points from a to b inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2, "linspace needs at least 2 points");
    let h = (b - a) / (n - 1) as f64;
    (0..n).map(|i| a + h * i as f64).collect()
}
