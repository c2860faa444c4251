//! Trend-model fitting: linear, polynomial, and exponential least squares.
//!
//! Linear fits use the closed form, polynomial fits a QR solve on the
//! Vandermonde system, and the exponential model `y = A·exp(αx) + C` a
//! log-linear seed refined by damped Gauss-Newton. The offset C can be
//! pinned to zero for pure-exponential fits.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FitError {
    #[error("x and y lengths differ ({x} vs {y})")]
    LengthMismatch { x: usize, y: usize },
    #[error("too few points: need at least {needed}, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("degenerate x values (all equal)")]
    DegenerateX,
    #[error("rank-deficient design matrix")]
    RankDeficient,
    #[error("Gauss-Newton did not converge within {iterations} iterations")]
    NotConverged {
        iterations: usize,
        best: Box<FitResult>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitModel {
    Linear,
    Poly(usize),
    Exponential,
}

impl std::fmt::Display for FitModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FitModel::Linear => write!(f, "linear"),
            FitModel::Poly(n) => write!(f, "poly:{n}"),
            FitModel::Exponential => write!(f, "exp"),
        }
    }
}

impl Serialize for FitModel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Fitted parameters with goodness-of-fit summary.
///
/// Parameter order: linear `[slope, intercept]`, polynomial `[c_n, …, c_0]`
/// (highest degree first), exponential `[A, α, C]` (or `[A, α]` when the
/// offset is pinned to zero).
#[derive(Debug, Clone, Serialize)]
pub struct FitResult {
    pub model: FitModel,
    pub params: Vec<f64>,
    pub r_squared: f64,
    pub rmse: f64,
    pub max_abs_residual: f64,
    /// Degenerate-input conventions applied, e.g. `constant_y`.
    pub flags: Vec<String>,
}

impl FitResult {
    /// Evaluate the fitted model at `x`.
    pub fn predict(&self, x: f64) -> f64 {
        match self.model {
            FitModel::Linear => self.params[0] * x + self.params[1],
            FitModel::Poly(_) => self.params.iter().fold(0.0, |acc, &c| acc * x + c),
            FitModel::Exponential => {
                let a = self.params[0];
                let alpha = self.params[1];
                let c = self.params.get(2).copied().unwrap_or(0.0);
                a * (alpha * x).exp() + c
            }
        }
    }
}

fn check_lengths(x: &[f64], y: &[f64], needed: usize) -> Result<(), FitError> {
    if x.len() != y.len() {
        return Err(FitError::LengthMismatch {
            x: x.len(),
            y: y.len(),
        });
    }
    if x.len() < needed {
        return Err(FitError::TooFewPoints {
            needed,
            got: x.len(),
        });
    }
    Ok(())
}

/// R² = 1 − SS_res/SS_tot, with the SS_tot = 0 case reported as a perfect
/// fit and flagged.
fn summarize(model: FitModel, params: Vec<f64>, x: &[f64], y: &[f64], mut flags: Vec<String>) -> FitResult {
    let mut result = FitResult {
        model,
        params,
        r_squared: 1.0,
        rmse: 0.0,
        max_abs_residual: 0.0,
        flags: Vec::new(),
    };
    let n = y.len() as f64;
    let mean = y.iter().sum::<f64>() / n;
    let ss_tot: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let residuals: Vec<f64> = x
        .iter()
        .zip(y)
        .map(|(&xi, &yi)| yi - result.predict(xi))
        .collect();
    let ss_res: f64 = residuals.iter().map(|r| r * r).sum();
    result.rmse = (ss_res / n).sqrt();
    result.max_abs_residual = residuals.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    if ss_tot == 0.0 {
        flags.push("constant_y".to_string());
        result.r_squared = 1.0;
    } else {
        result.r_squared = 1.0 - ss_res / ss_tot;
    }
    result.flags = flags;
    result
}

/// Ordinary least squares line, exact closed form.
pub fn fit_linear(x: &[f64], y: &[f64]) -> Result<FitResult, FitError> {
    check_lengths(x, y, 2)?;
    let n = x.len() as f64;
    let mean_x = x.iter().sum::<f64>() / n;
    let mean_y = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mean_x).powi(2)).sum();
    if sxx == 0.0 {
        return Err(FitError::DegenerateX);
    }
    let sxy: f64 = x
        .iter()
        .zip(y)
        .map(|(&xi, &yi)| (xi - mean_x) * (yi - mean_y))
        .sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    Ok(summarize(FitModel::Linear, vec![slope, intercept], x, y, Vec::new()))
}

/// Least-squares polynomial of the given degree via QR on the Vandermonde
/// system. Coefficients come back highest degree first.
pub fn fit_poly(x: &[f64], y: &[f64], degree: usize) -> Result<FitResult, FitError> {
    check_lengths(x, y, degree + 1)?;
    let n = x.len();
    let cols = degree + 1;
    let mut design = DMatrix::<f64>::zeros(n, cols);
    for (i, &xi) in x.iter().enumerate() {
        let mut pow = 1.0;
        for j in (0..cols).rev() {
            design[(i, j)] = pow;
            pow *= xi;
        }
    }
    let qr = design.qr();
    let r = qr.r();
    let max_diag = (0..cols).map(|i| r[(i, i)].abs()).fold(0.0f64, f64::max);
    if max_diag == 0.0 || (0..cols).any(|i| r[(i, i)].abs() < 1e-12 * max_diag) {
        return Err(FitError::RankDeficient);
    }
    let qty = qr.q().transpose() * DVector::from_column_slice(y);
    let coeffs = r
        .solve_upper_triangular(&qty)
        .ok_or(FitError::RankDeficient)?;
    Ok(summarize(
        FitModel::Poly(degree),
        coeffs.iter().copied().collect(),
        x,
        y,
        Vec::new(),
    ))
}

struct ExpModel<'a> {
    x: &'a [f64],
    y: &'a [f64],
    fix_offset_zero: bool,
}

impl ExpModel<'_> {
    fn predict(&self, p: &[f64], xi: f64) -> f64 {
        let c = if self.fix_offset_zero { 0.0 } else { p[2] };
        p[0] * (p[1] * xi).exp() + c
    }

    fn sse(&self, p: &[f64]) -> f64 {
        self.x
            .iter()
            .zip(self.y)
            .map(|(&xi, &yi)| {
                let r = yi - self.predict(p, xi);
                r * r
            })
            .sum()
    }

    fn dims(&self) -> usize {
        if self.fix_offset_zero {
            2
        } else {
            3
        }
    }

    /// log-linear seed for (A, α) given a fixed offset guess.
    fn seed(&self, offset: f64) -> Vec<f64> {
        let pts: Vec<(f64, f64)> = self
            .x
            .iter()
            .zip(self.y)
            .filter_map(|(&xi, &yi)| {
                let z = yi - offset;
                (z > 0.0).then(|| (xi, z.ln()))
            })
            .collect();
        let (ln_a, alpha) = if pts.len() >= 2 {
            let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
            let zs: Vec<f64> = pts.iter().map(|p| p.1).collect();
            match fit_linear(&xs, &zs) {
                Ok(fit) => (fit.params[1], fit.params[0]),
                Err(_) => (0.0, 0.0),
            }
        } else {
            (0.0, 0.0)
        };
        let mut p = vec![ln_a.exp(), alpha];
        if !self.fix_offset_zero {
            p.push(offset);
        }
        p
    }

    /// Damped Gauss-Newton from a seed; returns the refined parameters and
    /// whether the relative-step tolerance was met.
    fn refine(&self, mut p: Vec<f64>, max_iter: usize, tol: f64) -> (Vec<f64>, bool) {
        let n = self.x.len();
        let k = self.dims();
        let mut sse = self.sse(&p);
        for _ in 0..max_iter {
            let mut jac = DMatrix::<f64>::zeros(n, k);
            let mut resid = DVector::<f64>::zeros(n);
            for (i, (&xi, &yi)) in self.x.iter().zip(self.y).enumerate() {
                let e = (p[1] * xi).exp();
                jac[(i, 0)] = e;
                jac[(i, 1)] = p[0] * xi * e;
                if k == 3 {
                    jac[(i, 2)] = 1.0;
                }
                resid[i] = yi - self.predict(&p, xi);
            }
            let jt = jac.transpose();
            let jtj = &jt * &jac;
            let jtr = &jt * &resid;
            let mut step = jtj.clone().lu().solve(&jtr);
            if step.is_none() || step.as_ref().is_some_and(|s| s.iter().any(|v| !v.is_finite())) {
                // singular normal equations: retreat to a ridge-regularized solve
                let trace = jtj.diagonal().sum().max(1e-12);
                let ridge = &jtj + DMatrix::identity(k, k) * (1e-8 * trace);
                step = ridge.lu().solve(&jtr);
            }
            let Some(step) = step else { break };
            if step.iter().any(|v| !v.is_finite()) {
                break;
            }

            // backtracking line search
            let mut t = 1.0;
            let mut improved = false;
            while t >= 1e-10 {
                let trial: Vec<f64> = p.iter().zip(step.iter()).map(|(&pi, &si)| pi + t * si).collect();
                let trial_sse = self.sse(&trial);
                if trial_sse.is_finite() && trial_sse <= sse {
                    let step_norm: f64 = step.iter().map(|s| (t * s).powi(2)).sum::<f64>().sqrt();
                    let p_norm: f64 = p.iter().map(|v| v * v).sum::<f64>().sqrt();
                    p = trial;
                    sse = trial_sse;
                    improved = true;
                    if step_norm <= tol * (p_norm + tol) {
                        return (p, true);
                    }
                    break;
                }
                t /= 2.0;
            }
            if !improved {
                // no descent direction left: treat a vanishing gradient as done
                let grad_norm = jtr.norm();
                return (p, grad_norm <= 1e-9 * (1.0 + sse));
            }
        }
        (p, false)
    }
}

/// Fit `y = A·exp(αx) + C` (or `y = A·exp(αx)` with the offset pinned).
///
/// Seeds the offset at `min(y)` minus a small margin (plus a zero-offset
/// seed when the data allows), log-linearizes for (A, α), and refines by
/// damped Gauss-Newton: at most 200 iterations, relative step tolerance
/// 1e-10. Non-convergence is an error carrying the best parameters found.
pub fn fit_exponential(x: &[f64], y: &[f64], fix_offset_zero: bool) -> Result<FitResult, FitError> {
    check_lengths(x, y, 3)?;
    let min = y.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if min == max {
        // constant data: amplitude zero at the mean offset
        let params = if fix_offset_zero {
            vec![0.0, 0.0]
        } else {
            vec![0.0, 0.0, min]
        };
        return Ok(summarize(
            FitModel::Exponential,
            params,
            x,
            y,
            vec!["constant_y".to_string()],
        ));
    }

    let model = ExpModel {
        x,
        y,
        fix_offset_zero,
    };
    let mut seeds = Vec::new();
    if fix_offset_zero {
        seeds.push(model.seed(0.0));
    } else {
        let margin = 1e-3 * (max - min);
        seeds.push(model.seed(min - margin));
        if min > 0.0 {
            seeds.push(model.seed(0.0));
        }
        seeds.push(model.seed(min - 0.25 * (max - min)));
    }

    const MAX_ITER: usize = 200;
    const STEP_TOL: f64 = 1e-10;
    let mut best: Option<(Vec<f64>, f64, bool)> = None;
    for seed in seeds {
        let (p, converged) = model.refine(seed, MAX_ITER, STEP_TOL);
        let sse = model.sse(&p);
        if best.as_ref().is_none_or(|(_, s, _)| sse < *s) {
            best = Some((p, sse, converged));
        }
    }
    let (params, _, converged) = best.expect("at least one seed");
    let result = summarize(FitModel::Exponential, params, x, y, Vec::new());
    if !converged {
        let mut flagged = result;
        flagged.flags.push("not_converged".to_string());
        return Err(FitError::NotConverged {
            iterations: MAX_ITER,
            best: Box::new(flagged),
        });
    }
    Ok(result)
}
