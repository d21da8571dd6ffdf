//! Least-squares calibration of `C` and `n`.
//!
//! Levenberg-Marquardt over `θ = (ln C, n)` with a forward-difference
//! Jacobian and Marquardt diagonal scaling. The model is linear in `C`, so
//! working in `ln C` keeps the two columns of the Jacobian on comparable
//! scales even when the calibrated `C` ends up around 1e10.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::model::{ModelParams, ABSOLUTE_ZERO_C};

/// One observation used for calibration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationPoint {
    pub rh_frac: f64,
    pub temp_c: f64,
    #[serde(rename = "observed_cr_um_yr", alias = "observed_cr")]
    pub observed_cr: f64,
}

impl CalibrationPoint {
    pub fn new(rh_frac: f64, temp_c: f64, observed_cr: f64) -> Self {
        Self {
            rh_frac,
            temp_c,
            observed_cr,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.rh_frac.is_finite() && (0.0..=1.0).contains(&self.rh_frac)) {
            return Err(CoreError::Domain(format!("rh_frac {} outside [0, 1]", self.rh_frac)));
        }
        if !(self.temp_c.is_finite() && self.temp_c > ABSOLUTE_ZERO_C) {
            return Err(CoreError::Domain(format!("invalid temperature {}", self.temp_c)));
        }
        if !(self.observed_cr.is_finite() && self.observed_cr >= 0.0) {
            return Err(CoreError::Domain(format!(
                "observed corrosion rate must be finite and >= 0, got {}",
                self.observed_cr
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationOptions {
    pub max_iterations: usize,
    /// Converged once `‖Δθ‖ ≤ tolerance · (‖θ‖ + tolerance)`.
    pub tolerance: f64,
    /// Relative forward-difference step for the Jacobian.
    pub jacobian_step: f64,
    pub c_bounds: (f64, f64),
    pub n_bounds: (f64, f64),
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            tolerance: 1e-10,
            jacobian_step: 1e-6,
            c_bounds: (1e-3, 1e12),
            n_bounds: (0.01, 10.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub params: ModelParams,
    /// Sum of squared residuals, (µm/year)².
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Sum of squared residuals of `params` over `points`.
pub fn residual_norm(points: &[CalibrationPoint], params: &ModelParams) -> f64 {
    points
        .iter()
        .map(|p| {
            let r = predicted(params.c, params.n, p.rh_frac, params.arrhenius_factor(p.temp_c)) - p.observed_cr;
            r * r
        })
        .sum()
}

fn predicted(c: f64, n: f64, rh: f64, arrhenius: f64) -> f64 {
    if rh == 0.0 {
        0.0
    } else {
        c * rh.powf(n) * arrhenius
    }
}

struct Problem<'a> {
    points: &'a [CalibrationPoint],
    arrhenius: Vec<f64>,
}

impl Problem<'_> {
    fn residuals(&self, theta: [f64; 2], out: &mut [f64]) {
        let c = theta[0].exp();
        for ((r, p), a) in out.iter_mut().zip(self.points).zip(&self.arrhenius) {
            *r = predicted(c, theta[1], p.rh_frac, *a) - p.observed_cr;
        }
    }
}

fn sum_sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

/// Fits `C` and `n` to `points`, holding `Ea` and `R_gas` at `init`'s values.
///
/// Running out of iterations is not an error: the best iterate so far is
/// returned with `converged = false`.
pub fn calibrate(
    points: &[CalibrationPoint],
    init: &ModelParams,
    options: &CalibrationOptions,
) -> Result<CalibrationResult> {
    if points.len() < 2 {
        return Err(CoreError::TooFewPoints {
            needed: 2,
            got: points.len(),
        });
    }
    init.validate()?;
    for p in points {
        p.validate()?;
    }
    let lower = [options.c_bounds.0.ln(), options.n_bounds.0];
    let upper = [options.c_bounds.1.ln(), options.n_bounds.1];
    let clamp = |theta: [f64; 2]| [theta[0].clamp(lower[0], upper[0]), theta[1].clamp(lower[1], upper[1])];

    let problem = Problem {
        points,
        arrhenius: points.iter().map(|p| init.arrhenius_factor(p.temp_c)).collect(),
    };
    let m = points.len();
    let mut theta = clamp([init.c.ln(), init.n]);
    let mut r = vec![0.0; m];
    let mut r_trial = vec![0.0; m];
    let mut jac = vec![[0.0f64; 2]; m];
    problem.residuals(theta, &mut r);
    let mut cost = sum_sq(&r);

    let mut mu = 1e-3;
    let mut iterations = 0;
    let mut converged = cost == 0.0;
    let mut need_jacobian = true;
    let (mut a, mut g) = ([[0.0; 2]; 2], [0.0; 2]);

    while !converged && iterations < options.max_iterations {
        if need_jacobian {
            for j in 0..2 {
                let h = options.jacobian_step * theta[j].abs().max(1.0);
                let mut shifted = theta;
                shifted[j] += h;
                problem.residuals(shifted, &mut r_trial);
                for i in 0..m {
                    jac[i][j] = (r_trial[i] - r[i]) / h;
                }
            }
            a = [[0.0; 2]; 2];
            g = [0.0; 2];
            for (row, ri) in jac.iter().zip(&r) {
                for p in 0..2 {
                    g[p] += row[p] * ri;
                    for q in 0..2 {
                        a[p][q] += row[p] * row[q];
                    }
                }
            }
            let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
            if !(a[0][0] > 0.0 && a[1][1] > 0.0) || det <= 1e-10 * a[0][0] * a[1][1] {
                return Err(CoreError::DegenerateJacobian);
            }
            need_jacobian = false;
        }
        iterations += 1;

        // (JᵀJ + μ·diag(JᵀJ)) δ = −Jᵀr
        let d00 = a[0][0] * (1.0 + mu);
        let d11 = a[1][1] * (1.0 + mu);
        let det = d00 * d11 - a[0][1] * a[1][0];
        let step = [
            -(d11 * g[0] - a[0][1] * g[1]) / det,
            -(d00 * g[1] - a[1][0] * g[0]) / det,
        ];
        let trial = clamp([theta[0] + step[0], theta[1] + step[1]]);
        let applied = [trial[0] - theta[0], trial[1] - theta[1]];
        let step_norm = applied[0].hypot(applied[1]);
        let theta_norm = theta[0].hypot(theta[1]);

        problem.residuals(trial, &mut r_trial);
        let trial_cost = sum_sq(&r_trial);
        if trial_cost.is_finite() && trial_cost < cost {
            theta = trial;
            std::mem::swap(&mut r, &mut r_trial);
            cost = trial_cost;
            mu = (mu / 10.0).max(1e-15);
            need_jacobian = true;
            if step_norm <= options.tolerance * (theta_norm + options.tolerance) || cost == 0.0 {
                converged = true;
            }
        } else if step_norm <= options.tolerance * (theta_norm + options.tolerance) {
            // No descent left at this resolution: a stationary point.
            converged = true;
        } else {
            mu *= 10.0;
        }
    }

    Ok(CalibrationResult {
        params: ModelParams {
            c: theta[0].exp(),
            n: theta[1],
            ..*init
        },
        residual_norm: cost,
        iterations,
        converged,
    })
}
