//! Weighted Levenberg–Marquardt least squares with box bounds and a
//! forward-difference Jacobian. Sized for the few-parameter line fits used
//! throughout the crate.

use crate::error::{Error, Result};
use crate::math::{invert, solve_linear};

/// Options for [`least_squares`].
#[derive(Debug, Clone)]
pub struct FitOptions {
    pub max_iter: usize,
    /// Relative decrease of the weighted RSS that counts as converged.
    pub ftol: f64,
    /// Relative parameter step that counts as converged.
    pub xtol: f64,
    pub lambda_init: f64,
    /// Per-parameter box bounds.
    pub bounds: Vec<(f64, f64)>,
    /// Absolute floors for the finite-difference steps, one per parameter.
    pub diff_floor: Vec<f64>,
}

impl FitOptions {
    pub fn new(n_params: usize) -> Self {
        FitOptions {
            max_iter: 100,
            ftol: 1e-12,
            xtol: 1e-12,
            lambda_init: 1e-3,
            bounds: vec![(f64::NEG_INFINITY, f64::INFINITY); n_params],
            diff_floor: vec![1e-9; n_params],
        }
    }
}

/// Fit result. `converged == false` is not an error at this level; callers
/// decide whether to retry from another start or report failure.
#[derive(Debug, Clone)]
pub struct FitOutcome {
    pub params: Vec<f64>,
    /// Row-major p×p covariance (JᵀJ)⁻¹·s² with s² = wrss/(n−p);
    /// `None` when the normal matrix is singular.
    pub covariance: Option<Vec<f64>>,
    /// Weighted residual sum of squares at the solution.
    pub wrss: f64,
    pub iterations: usize,
    pub converged: bool,
    pub at_lower: Vec<bool>,
    pub at_upper: Vec<bool>,
}

impl FitOutcome {
    /// 1σ uncertainty of parameter `i` from the covariance diagonal.
    pub fn std_err(&self, i: usize) -> Option<f64> {
        let n = self.params.len();
        self.covariance
            .as_ref()
            .map(|c| c[i * n + i].max(0.0).sqrt())
    }

    pub fn any_at_bound(&self) -> bool {
        self.at_lower.iter().chain(&self.at_upper).any(|&b| b)
    }
}

fn clamp_params(p: &mut [f64], bounds: &[(f64, f64)]) {
    for (x, &(lo, hi)) in p.iter_mut().zip(bounds) {
        *x = x.clamp(lo, hi);
    }
}

/// Minimize |r(p)|² where `residuals` fills the weighted residual vector
/// r_i = w_i·(y_i − f(p, x_i)).
pub fn least_squares<F>(
    mut residuals: F,
    n_data: usize,
    p0: &[f64],
    opts: &FitOptions,
) -> Result<FitOutcome>
where
    F: FnMut(&[f64], &mut [f64]),
{
    let np = p0.len();
    if np == 0 || n_data == 0 {
        return Err(Error::invalid("fit needs at least one parameter and one datum"));
    }
    if opts.bounds.len() != np || opts.diff_floor.len() != np {
        return Err(Error::invalid("fit options sized for a different parameter count"));
    }
    let mut p = p0.to_vec();
    clamp_params(&mut p, &opts.bounds);

    let mut r = vec![0.0; n_data];
    let mut r_trial = vec![0.0; n_data];
    let mut jac = vec![0.0; n_data * np];

    residuals(&p, &mut r);
    let mut wrss: f64 = r.iter().map(|x| x * x).sum();
    if !wrss.is_finite() {
        return Err(Error::invalid("residuals not finite at the starting point"));
    }

    let mut lambda = opts.lambda_init;
    let mut converged = false;
    let mut iterations = 0;
    let mut small_steps = 0usize;

    for _ in 0..opts.max_iter {
        iterations += 1;

        // Forward-difference Jacobian of the residual vector.
        for j in 0..np {
            let step0 = (p[j].abs() * 1e-6).max(opts.diff_floor[j]);
            let (lo, hi) = opts.bounds[j];
            let step = if p[j] + step0 <= hi { step0 } else { -step0 };
            let saved = p[j];
            p[j] = (saved + step).clamp(lo, hi);
            let actual = p[j] - saved;
            residuals(&p, &mut r_trial);
            p[j] = saved;
            if actual == 0.0 {
                for i in 0..n_data {
                    jac[i * np + j] = 0.0;
                }
            } else {
                for i in 0..n_data {
                    jac[i * np + j] = (r_trial[i] - r[i]) / actual;
                }
            }
        }

        // Normal matrix A = JᵀJ and gradient g = Jᵀr.
        let mut a = vec![0.0; np * np];
        let mut g = vec![0.0; np];
        for i in 0..n_data {
            for j in 0..np {
                let jij = jac[i * np + j];
                g[j] += jij * r[i];
                for k in j..np {
                    a[j * np + k] += jij * jac[i * np + k];
                }
            }
        }
        for j in 0..np {
            for k in 0..j {
                a[j * np + k] = a[k * np + j];
            }
        }

        // Damped step, retried with larger λ until the RSS improves.
        let mut accepted = false;
        for _ in 0..24 {
            let mut ad = a.clone();
            for j in 0..np {
                let d = a[j * np + j];
                ad[j * np + j] = d + lambda * d.max(1e-30);
            }
            let mut rhs: Vec<f64> = g.iter().map(|x| -x).collect();
            let Some(delta) = solve_linear(&mut ad, &mut rhs, np) else {
                lambda *= 10.0;
                continue;
            };
            let mut trial: Vec<f64> = p.iter().zip(&delta).map(|(a, b)| a + b).collect();
            clamp_params(&mut trial, &opts.bounds);
            residuals(&trial, &mut r_trial);
            let wrss_trial: f64 = r_trial.iter().map(|x| x * x).sum();
            if wrss_trial.is_finite() && wrss_trial <= wrss {
                let df = wrss - wrss_trial;
                let dx = trial
                    .iter()
                    .zip(&p)
                    .map(|(a, b)| (a - b).abs() / b.abs().max(1e-30))
                    .fold(0.0f64, f64::max);
                p = trial;
                std::mem::swap(&mut r, &mut r_trial);
                let prev = wrss;
                wrss = wrss_trial;
                lambda = (lambda * 0.25).max(1e-14);
                accepted = true;
                // A single tiny improvement can be an artifact of heavy
                // damping; require two in a row before declaring victory.
                if df <= opts.ftol * prev.max(1e-300) || dx <= opts.xtol {
                    small_steps += 1;
                    if small_steps >= 2 {
                        converged = true;
                    }
                } else {
                    small_steps = 0;
                }
                break;
            }
            lambda *= 10.0;
            if lambda > 1e14 {
                break;
            }
        }
        if !accepted {
            // No downhill step exists at any damping: a (possibly noisy)
            // local optimum.
            converged = true;
            break;
        }
        if converged {
            break;
        }
    }

    // Covariance from the final Jacobian (recompute A in case p moved).
    residuals(&p, &mut r);
    for j in 0..np {
        let step0 = (p[j].abs() * 1e-6).max(opts.diff_floor[j]);
        let (lo, hi) = opts.bounds[j];
        let step = if p[j] + step0 <= hi { step0 } else { -step0 };
        let saved = p[j];
        p[j] = (saved + step).clamp(lo, hi);
        let actual = p[j] - saved;
        residuals(&p, &mut r_trial);
        p[j] = saved;
        for i in 0..n_data {
            jac[i * np + j] = if actual == 0.0 {
                0.0
            } else {
                (r_trial[i] - r[i]) / actual
            };
        }
    }
    let mut a = vec![0.0; np * np];
    for i in 0..n_data {
        for j in 0..np {
            for k in j..np {
                a[j * np + k] += jac[i * np + j] * jac[i * np + k];
            }
        }
    }
    for j in 0..np {
        for k in 0..j {
            a[j * np + k] = a[k * np + j];
        }
    }
    let dof = n_data.saturating_sub(np).max(1) as f64;
    let s2 = wrss / dof;
    let covariance = invert(&a, np).map(|inv| inv.iter().map(|x| x * s2).collect());

    let tol_bound = 1e-10;
    let at_lower = p
        .iter()
        .zip(&opts.bounds)
        .map(|(x, (lo, _))| lo.is_finite() && (x - lo).abs() <= tol_bound * (1.0 + lo.abs()))
        .collect();
    let at_upper = p
        .iter()
        .zip(&opts.bounds)
        .map(|(x, (_, hi))| hi.is_finite() && (x - hi).abs() <= tol_bound * (1.0 + hi.abs()))
        .collect();

    Ok(FitOutcome {
        params: p,
        covariance,
        wrss,
        iterations,
        converged,
        at_lower,
        at_upper,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn gaussian_peak(p: &[f64], x: f64) -> f64 {
        // p = [center, width, amplitude, baseline]
        p[3] + p[2] * (-((x - p[0]) / p[1]).powi(2) / 2.0).exp()
    }

    #[test]
    fn noiseless_recovery_is_exact() {
        let truth = [1.2, 0.8, 10.0, 3.0];
        let xs: Vec<f64> = (0..80).map(|i| -4.0 + 0.1 * i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| gaussian_peak(&truth, x)).collect();
        let resid = |p: &[f64], r: &mut [f64]| {
            for (i, (&x, &y)) in xs.iter().zip(&ys).enumerate() {
                r[i] = y - gaussian_peak(p, x);
            }
        };
        let out = least_squares(resid, xs.len(), &[0.8, 1.1, 8.0, 2.0], &FitOptions::new(4)).unwrap();
        assert!(out.converged);
        for (got, want) in out.params.iter().zip(&truth) {
            assert_relative_eq!(got, want, max_relative = 1e-6);
        }
        assert!(out.wrss < 1e-12);
    }

    #[test]
    fn noisy_recovery_within_uncertainty() {
        let truth = [0.0, 1.0, 5.0, 1.0];
        let xs: Vec<f64> = (0..200).map(|i| -5.0 + 0.05 * i as f64).collect();
        let mut rng = StdRng::seed_from_u64(3);
        let ys: Vec<f64> = xs
            .iter()
            .map(|&x| gaussian_peak(&truth, x) + 0.05 * rng.gen_range(-1.0..1.0))
            .collect();
        let resid = |p: &[f64], r: &mut [f64]| {
            for (i, (&x, &y)) in xs.iter().zip(&ys).enumerate() {
                r[i] = y - gaussian_peak(p, x);
            }
        };
        let out = least_squares(resid, xs.len(), &[0.3, 1.4, 4.0, 0.5], &FitOptions::new(4)).unwrap();
        assert!(out.converged);
        assert_relative_eq!(out.params[2], 5.0, max_relative = 0.02);
        let sigma_c = out.std_err(0).unwrap();
        assert!(sigma_c > 0.0 && (out.params[0]).abs() < 5.0 * sigma_c.max(1e-3));
    }

    #[test]
    fn bounds_pin_and_flag() {
        // data decreasing in x, model p[0]·x with p[0] bounded non-negative
        let xs: Vec<f64> = (1..30).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| -2.0 * x).collect();
        let resid = |p: &[f64], r: &mut [f64]| {
            for (i, (&x, &y)) in xs.iter().zip(&ys).enumerate() {
                r[i] = y - p[0] * x;
            }
        };
        let mut opts = FitOptions::new(1);
        opts.bounds[0] = (0.0, 10.0);
        let out = least_squares(resid, xs.len(), &[5.0], &opts).unwrap();
        assert_eq!(out.params[0], 0.0);
        assert!(out.at_lower[0]);
        assert!(!out.at_upper[0]);
    }
}
