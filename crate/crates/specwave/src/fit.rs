//! Least-squares line fits and schedules used by the decay experiments.
//!
//! Decay exponents are always measured as the slope of log(norm) vs log(t)
//! over a stated window; the reported half-width is twice the standard error
//! of the slope (the usual ~95% band under i.i.d. residuals), which is the
//! robustness yardstick for box-doubling checks.

use crate::error::{Result, SpecError};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope estimate.
    pub slope_stderr: f64,
    /// 2× standard error: the half-width quoted with fitted exponents.
    pub halfwidth: f64,
    /// Largest absolute residual of the fit.
    pub max_residual: f64,
    pub n_samples: usize,
}

/// Ordinary least squares y ≈ a·x + b. Needs ≥ 3 samples so the standard
/// error is defined (n − 2 residual degrees of freedom).
pub fn fit_line(x: &[f64], y: &[f64]) -> Result<LineFit> {
    if x.len() != y.len() {
        return Err(SpecError::Shape(format!(
            "fit_line: {} x-values vs {} y-values",
            x.len(),
            y.len()
        )));
    }
    let n = x.len();
    if n < 3 {
        return Err(SpecError::Convergence(format!(
            "fit_line needs at least 3 samples, got {n}"
        )));
    }
    let nf = n as f64;
    let xbar = x.iter().sum::<f64>() / nf;
    let ybar = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|&v| (v - xbar) * (v - xbar)).sum();
    if sxx <= 0.0 {
        return Err(SpecError::Convergence(
            "fit_line: degenerate abscissae (zero variance)".into(),
        ));
    }
    let sxy: f64 = x
        .iter()
        .zip(y.iter())
        .map(|(&xv, &yv)| (xv - xbar) * (yv - ybar))
        .sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let mut ss_res = 0.0;
    let mut max_residual = 0.0f64;
    for (&xv, &yv) in x.iter().zip(y.iter()) {
        let r = yv - (slope * xv + intercept);
        ss_res += r * r;
        max_residual = max_residual.max(r.abs());
    }
    let sigma2 = ss_res / (nf - 2.0);
    let slope_stderr = (sigma2 / sxx).sqrt();
    Ok(LineFit {
        slope,
        intercept,
        slope_stderr,
        halfwidth: 2.0 * slope_stderr,
        max_residual,
        n_samples: n,
    })
}

/// Fit log(v) ≈ γ·log(t) + c: the decay exponent γ of v ~ t^γ.
/// All samples must be positive.
pub fn fit_loglog(t: &[f64], v: &[f64]) -> Result<LineFit> {
    if t.iter().any(|&x| x <= 0.0) || v.iter().any(|&x| x <= 0.0) {
        return Err(SpecError::Domain(
            "fit_loglog needs strictly positive samples".into(),
        ));
    }
    let lx: Vec<f64> = t.iter().map(|&x| x.ln()).collect();
    let ly: Vec<f64> = v.iter().map(|&x| x.ln()).collect();
    fit_line(&lx, &ly)
}

/// k points geometrically spaced over [t0, t1], inclusive at both ends.
pub fn geometric_schedule(t0: f64, t1: f64, k: usize) -> Result<Vec<f64>> {
    if !(t0 > 0.0 && t1 > t0) {
        return Err(SpecError::Config(format!(
            "geometric schedule needs 0 < t0 < t1, got [{t0}, {t1}]"
        )));
    }
    if k < 2 {
        return Err(SpecError::Config("schedule needs at least 2 points".into()));
    }
    let ratio = (t1 / t0).powf(1.0 / (k as f64 - 1.0));
    let mut out = Vec::with_capacity(k);
    let mut t = t0;
    for _ in 0..k {
        out.push(t);
        t *= ratio;
    }
    out[k - 1] = t1;
    Ok(out)
}
