//! Least-squares extraction of expansion limits, decay coefficients and
//! decay exponents from lambda sweeps.
//!
//! Two fit shapes cover the expansions that occur here:
//! `A + K * lambda^{-e}` and the marginal-exponent variant
//! `A + K * log(lambda) * lambda^{-e}`. On top of those,
//! [`fit_coefficient_with_tail`] models the known next-order contamination
//! `lambda^{-e-e2}` explicitly, which is what makes coefficient extraction
//! on decade-wide grids accurate to well below a percent.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Shape of the fitted expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitModel {
    Power,
    PowerLog,
}

/// Result of a two-parameter expansion fit `values ~ A + K g(lambda)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExpansionFit {
    pub model: FitModel,
    /// Fitted limit value.
    pub a: f64,
    /// Fitted decay coefficient.
    pub k: f64,
    /// Decay exponent used (fixed, not fitted).
    pub e: f64,
    pub lambda_grid: Vec<f64>,
    /// Per-point relative residuals.
    pub residuals: Vec<f64>,
}

impl ExpansionFit {
    pub fn residual_rms(&self) -> f64 {
        rms(&self.residuals)
    }
}

fn rms(v: &[f64]) -> f64 {
    (v.iter().map(|r| r * r).sum::<f64>() / v.len() as f64).sqrt()
}

fn validate_grid(lambda: &[f64], values: &[f64], min_span: f64) -> Result<()> {
    if lambda.len() != values.len() {
        return Err(Error::FitDegenerate(format!(
            "{} grid points but {} values",
            lambda.len(),
            values.len()
        )));
    }
    if lambda.len() < 4 {
        return Err(Error::FitDegenerate(format!(
            "need at least 4 grid points, got {}",
            lambda.len()
        )));
    }
    if lambda.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::FitDegenerate("lambda grid must be strictly increasing".into()));
    }
    if lambda[0] <= 0.0 {
        return Err(Error::FitDegenerate("lambda values must be positive".into()));
    }
    let span = lambda[lambda.len() - 1] / lambda[0];
    if span < min_span {
        return Err(Error::FitDegenerate(format!(
            "grid span {span:.2}x is too narrow (need >= {min_span}x)"
        )));
    }
    Ok(())
}

/// Weighted 2x2 least squares for `y ~ c0 * b0 + c1 * b1`.
fn lsq2(b0: &[f64], b1: &[f64], y: &[f64], w: &[f64]) -> Result<(f64, f64)> {
    let (mut s00, mut s01, mut s11, mut r0, mut r1) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for i in 0..y.len() {
        s00 += w[i] * b0[i] * b0[i];
        s01 += w[i] * b0[i] * b1[i];
        s11 += w[i] * b1[i] * b1[i];
        r0 += w[i] * b0[i] * y[i];
        r1 += w[i] * b1[i] * y[i];
    }
    let det = s00 * s11 - s01 * s01;
    if det.abs() <= 1e-14 * (s00 * s11).abs().max(f64::MIN_POSITIVE) {
        return Err(Error::FitDegenerate(
            "normal equations are singular (grid too narrow for the model)".into(),
        ));
    }
    Ok(((s11 * r0 - s01 * r1) / det, (s00 * r1 - s01 * r0) / det))
}

/// Fit `values ~ A + K * lambda^{-e}` (or `A + K log(lambda) lambda^{-e}`),
/// weighting in favour of large lambda where the remainders are smallest.
pub fn fit_expansion(
    lambda: &[f64],
    values: &[f64],
    e: f64,
    model: FitModel,
) -> Result<ExpansionFit> {
    validate_grid(lambda, values, 5.0)?;
    if !(e > 0.0) {
        return Err(Error::FitDegenerate(format!("decay exponent e={e} must be positive")));
    }
    let lam_max = lambda[lambda.len() - 1];
    let g: Vec<f64> = lambda
        .iter()
        .map(|&l| match model {
            FitModel::Power => l.powf(-e),
            FitModel::PowerLog => l.ln() * l.powf(-e),
        })
        .collect();
    let ones = vec![1.0; lambda.len()];
    let w: Vec<f64> = lambda.iter().map(|&l| (l / lam_max).powf(2.0 * e)).collect();
    let (a, k) = lsq2(&ones, &g, values, &w)?;
    let residuals: Vec<f64> = values
        .iter()
        .zip(&g)
        .map(|(v, gi)| (v - a - k * gi) / v.abs().max(f64::MIN_POSITIVE))
        .collect();
    Ok(ExpansionFit {
        model,
        a,
        k,
        e,
        lambda_grid: lambda.to_vec(),
        residuals,
    })
}

/// Coefficient of a pure decay channel with known next-order exponent:
/// models `values ~ K lambda^{-e} + C lambda^{-(e + e_tail)}` by linear
/// least squares on `values * lambda^e`, and returns the extrapolated `K`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TailCorrectedFit {
    pub k: f64,
    /// Coefficient of the modelled contamination term.
    pub tail_coeff: f64,
    pub e: f64,
    pub e_tail: f64,
    pub residuals: Vec<f64>,
}

pub fn fit_coefficient_with_tail(
    lambda: &[f64],
    values: &[f64],
    e: f64,
    e_tail: f64,
) -> Result<TailCorrectedFit> {
    validate_grid(lambda, values, 5.0)?;
    let y: Vec<f64> = values.iter().zip(lambda).map(|(v, l)| v * l.powf(e)).collect();
    if y.iter().all(|v| v.abs() < 1e-300) {
        return Ok(TailCorrectedFit {
            k: 0.0,
            tail_coeff: 0.0,
            e,
            e_tail,
            residuals: vec![0.0; y.len()],
        });
    }
    let ones = vec![1.0; lambda.len()];
    let w = vec![1.0; lambda.len()];
    if e_tail > 0.0 {
        let g: Vec<f64> = lambda.iter().map(|&l| l.powf(-e_tail)).collect();
        let (k, c) = lsq2(&ones, &g, &y, &w)?;
        let residuals: Vec<f64> = y
            .iter()
            .zip(&g)
            .map(|(yi, gi)| (yi - k - c * gi) / yi.abs().max(f64::MIN_POSITIVE))
            .collect();
        Ok(TailCorrectedFit {
            k,
            tail_coeff: c,
            e,
            e_tail,
            residuals,
        })
    } else {
        // no usable correction exponent: plain weighted mean of y
        let k = y.iter().sum::<f64>() / y.len() as f64;
        let residuals: Vec<f64> = y
            .iter()
            .map(|yi| (yi - k) / yi.abs().max(f64::MIN_POSITIVE))
            .collect();
        Ok(TailCorrectedFit {
            k,
            tail_coeff: 0.0,
            e,
            e_tail,
            residuals,
        })
    }
}

/// Three-column limit fit `values ~ A + K g(lambda) + C lambda^{-e_flat}`,
/// where `g` is the expansion shape and the third column models the
/// flat-geometry remainder (cutoff tails). Used to extract limits from
/// raw sweeps at an accuracy the two-column fit cannot reach.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LimitFit {
    pub a: f64,
    pub k: f64,
    pub tail_coeff: f64,
    pub residuals: Vec<f64>,
}

pub fn fit_limit_with_tail(
    lambda: &[f64],
    values: &[f64],
    e: f64,
    log_model: bool,
    e_flat: f64,
) -> Result<LimitFit> {
    validate_grid(lambda, values, 5.0)?;
    let g: Vec<f64> = lambda
        .iter()
        .map(|&l| {
            if log_model {
                l.ln() * l.powf(-e)
            } else {
                l.powf(-e)
            }
        })
        .collect();
    let t: Vec<f64> = lambda.iter().map(|&l| l.powf(-e_flat)).collect();
    let ones = vec![1.0; lambda.len()];
    let (a, k, c) = lsq3(&ones, &g, &t, values)?;
    let residuals: Vec<f64> = values
        .iter()
        .enumerate()
        .map(|(i, v)| (v - a - k * g[i] - c * t[i]) / v.abs().max(f64::MIN_POSITIVE))
        .collect();
    Ok(LimitFit {
        a,
        k,
        tail_coeff: c,
        residuals,
    })
}

/// Unweighted 3x3 least squares for `y ~ c0 b0 + c1 b1 + c2 b2`.
fn lsq3(b0: &[f64], b1: &[f64], b2: &[f64], y: &[f64]) -> Result<(f64, f64, f64)> {
    let mut m = [[0.0f64; 3]; 3];
    let mut r = [0.0f64; 3];
    let cols = [b0, b1, b2];
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = cols[i].iter().zip(cols[j]).map(|(a, b)| a * b).sum();
        }
        r[i] = cols[i].iter().zip(y).map(|(a, b)| a * b).sum();
    }
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    let scale = m[0][0] * m[1][1] * m[2][2];
    if det.abs() <= 1e-13 * scale.abs().max(f64::MIN_POSITIVE) {
        return Err(Error::FitDegenerate(
            "three-column fit is singular on this grid".into(),
        ));
    }
    let solve_col = |k: usize| -> f64 {
        let mut mm = m;
        for (row, rv) in mm.iter_mut().zip(&r) {
            row[k] = *rv;
        }
        (mm[0][0] * (mm[1][1] * mm[2][2] - mm[1][2] * mm[2][1])
            - mm[0][1] * (mm[1][0] * mm[2][2] - mm[1][2] * mm[2][0])
            + mm[0][2] * (mm[1][0] * mm[2][1] - mm[1][1] * mm[2][0]))
            / det
    };
    Ok((solve_col(0), solve_col(1), solve_col(2)))
}

/// Marginal-case channel `values ~ (K log(lambda) + B) lambda^{-e}`:
/// a straight line in `log(lambda)` after stripping the power, so the
/// slope `K` is insensitive to the unknown constant `B`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LogSlopeFit {
    pub k: f64,
    pub b: f64,
    pub e: f64,
    pub residuals: Vec<f64>,
}

pub fn fit_log_slope(lambda: &[f64], values: &[f64], e: f64) -> Result<LogSlopeFit> {
    if lambda.len() < 3 || lambda.len() != values.len() {
        return Err(Error::FitDegenerate("log-slope fit needs >= 3 points".into()));
    }
    let y: Vec<f64> = values.iter().zip(lambda).map(|(v, l)| v * l.powf(e)).collect();
    let logs: Vec<f64> = lambda.iter().map(|l| l.ln()).collect();
    let ones = vec![1.0; lambda.len()];
    let w = vec![1.0; lambda.len()];
    let (b, k) = lsq2(&ones, &logs, &y, &w)?;
    let residuals: Vec<f64> = y
        .iter()
        .zip(&logs)
        .map(|(yi, li)| (yi - b - k * li) / yi.abs().max(f64::MIN_POSITIVE))
        .collect();
    Ok(LogSlopeFit { k, b, e, residuals })
}

/// Decay exponent of a channel on a geometric lambda grid, from the
/// log-ratios of consecutive values with Aitken extrapolation of their
/// drift. Robust against a slowly decaying multiplicative correction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExponentEstimate {
    pub exponent: f64,
    /// Raw per-step estimates `log(y_i / y_{i+1}) / log(l_{i+1} / l_i)`.
    pub per_step: Vec<f64>,
}

pub fn decay_exponent(lambda: &[f64], values: &[f64]) -> Result<ExponentEstimate> {
    if lambda.len() < 3 || lambda.len() != values.len() {
        return Err(Error::FitDegenerate("exponent estimate needs >= 3 points".into()));
    }
    let mut per_step = Vec::with_capacity(lambda.len() - 1);
    for i in 0..lambda.len() - 1 {
        let y0 = values[i].abs();
        let y1 = values[i + 1].abs();
        if y0 <= 0.0 || y1 <= 0.0 {
            return Err(Error::FitDegenerate("channel values must be nonzero".into()));
        }
        per_step.push((y0 / y1).ln() / (lambda[i + 1] / lambda[i]).ln());
    }
    let m = per_step.len();
    let exponent = if m >= 3 {
        let (e0, e1, e2) = (per_step[m - 3], per_step[m - 2], per_step[m - 1]);
        let (d1, d2) = (e1 - e0, e2 - e1);
        if d1.abs() > 1e-14 && (d2 / d1).abs() < 0.95 {
            // geometric drift: extrapolate the remaining tail
            let f = d2 / d1;
            e2 + d2 * f / (1.0 - f)
        } else {
            e2
        }
    } else {
        per_step[m - 1]
    };
    Ok(ExponentEstimate { exponent, per_step })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn grid() -> Vec<f64> {
        vec![25.0, 50.0, 100.0, 200.0, 400.0]
    }

    #[test]
    fn exact_power_model_recovery() {
        let lam = grid();
        let vals: Vec<f64> = lam.iter().map(|l| 1.0 + 2.0 * l.powf(-1.0)).collect();
        let fit = fit_expansion(&lam, &vals, 1.0, FitModel::Power).unwrap();
        assert_relative_eq!(fit.a, 1.0, max_relative = 1e-10);
        assert_relative_eq!(fit.k, 2.0, max_relative = 1e-10);
        assert!(fit.residual_rms() < 1e-12);
    }

    #[test]
    fn exact_power_log_recovery() {
        let lam = grid();
        let vals: Vec<f64> = lam
            .iter()
            .map(|l| 0.3 - 1.5 * l.ln() * l.powf(-0.8))
            .collect();
        let fit = fit_expansion(&lam, &vals, 0.8, FitModel::PowerLog).unwrap();
        assert_relative_eq!(fit.a, 0.3, max_relative = 1e-9);
        assert_relative_eq!(fit.k, -1.5, max_relative = 1e-9);
    }

    #[test]
    fn contaminated_recovery_stays_close() {
        // second-order term lambda^{-2e} perturbs K by O(lambda_min^{-e})
        let lam = grid();
        let e = 1.0;
        let vals: Vec<f64> = lam
            .iter()
            .map(|l| 1.0 + 2.0 * l.powf(-e) + 5.0 * l.powf(-2.0 * e))
            .collect();
        let fit = fit_expansion(&lam, &vals, e, FitModel::Power).unwrap();
        let bound = 5.0 / 2.0 * lam[0].powf(-e) * 4.0;
        assert!(
            (fit.k - 2.0).abs() < 2.0 * bound,
            "k = {} (bound {bound})",
            fit.k
        );
        // the tail-aware fit nails it
        let pure: Vec<f64> = lam
            .iter()
            .map(|l| 2.0 * l.powf(-e) + 5.0 * l.powf(-2.0 * e))
            .collect();
        let tf = fit_coefficient_with_tail(&lam, &pure, e, e).unwrap();
        assert_relative_eq!(tf.k, 2.0, max_relative = 1e-9);
        assert_relative_eq!(tf.tail_coeff, 5.0, max_relative = 1e-8);
    }

    #[test]
    fn degenerate_grids_are_rejected() {
        let vals = vec![1.0, 1.0, 1.0, 1.0];
        assert!(matches!(
            fit_expansion(&[1.0, 2.0, 3.0], &vals[..3], 1.0, FitModel::Power),
            Err(Error::FitDegenerate(_))
        ));
        assert!(matches!(
            fit_expansion(&[10.0, 20.0, 30.0, 40.0], &vals, 1.0, FitModel::Power),
            Err(Error::FitDegenerate(_))
        ));
        assert!(matches!(
            fit_expansion(&[10.0, 9.0, 30.0, 400.0], &vals, 1.0, FitModel::Power),
            Err(Error::FitDegenerate(_))
        ));
    }

    #[test]
    fn zero_channel_fits_to_zero() {
        let lam = grid();
        let vals = vec![0.0; 5];
        let tf = fit_coefficient_with_tail(&lam, &vals, 1.2, 0.6).unwrap();
        assert_eq!(tf.k, 0.0);
    }

    #[test]
    fn log_slope_is_decade_stable() {
        let lam = grid();
        let e = 1.0;
        let vals: Vec<f64> = lam
            .iter()
            .map(|l| (3.0 * l.ln() - 2.0) * l.powf(-e))
            .collect();
        let lo = fit_log_slope(&lam[..3], &vals[..3], e).unwrap();
        let hi = fit_log_slope(&lam[2..], &vals[2..], e).unwrap();
        assert_relative_eq!(lo.k, 3.0, max_relative = 1e-10);
        assert_relative_eq!(hi.k, 3.0, max_relative = 1e-10);
    }

    #[test]
    fn exponent_estimate_with_drift() {
        let lam = grid();
        // y = l^{-1.3} (1 + l^{-0.5})
        let vals: Vec<f64> = lam
            .iter()
            .map(|l| l.powf(-1.3) * (1.0 + l.powf(-0.5)))
            .collect();
        let est = decay_exponent(&lam, &vals).unwrap();
        assert!(
            (est.exponent - 1.3).abs() < 0.02,
            "estimate {} per_step {:?}",
            est.exponent,
            est.per_step
        );
    }
}
