//! Least-squares fits in log space.

use serde::{Deserialize, Serialize};

use crate::error::{BdgError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitModel {
    /// `y = C x^p`; slope is `p`.
    PowerLaw,
    /// `y = C e^{r x}`; slope is `r`.
    Exponential,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: FitModel,
    pub slope: f64,
    pub intercept: f64,
    /// Largest `|log y - fitted log y|`.
    pub max_log_residual: f64,
    pub points: usize,
}

/// Fits `log y` against `log x` (power law) or `x` (exponential).
pub fn fit_scaling(points: &[(f64, f64)], model: FitModel) -> Result<FitResult> {
    if points.len() < 3 {
        return Err(BdgError::Domain(format!("fit needs at least 3 points, got {}", points.len())));
    }
    let mut xs = Vec::with_capacity(points.len());
    let mut ys = Vec::with_capacity(points.len());
    for &(x, y) in points {
        if !(y > 0.0) || !y.is_finite() {
            return Err(BdgError::Domain(format!("fit needs positive y, got {y} at x = {x}")));
        }
        let u = match model {
            FitModel::PowerLaw => {
                if !(x > 0.0) {
                    return Err(BdgError::Domain(format!("power-law fit needs positive x, got {x}")));
                }
                x.ln()
            }
            FitModel::Exponential => x,
        };
        if !u.is_finite() {
            return Err(BdgError::Domain(format!("non-finite abscissa {x}")));
        }
        xs.push(u);
        ys.push(y.ln());
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(BdgError::Domain("fit abscissae are all equal".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let max_log_residual = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).abs())
        .fold(0.0, f64::max);
    Ok(FitResult {
        model,
        slope,
        intercept,
        max_log_residual,
        points: points.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let pts: Vec<(f64, f64)> = [0.5, 1.0, 2.0, 4.0].iter().map(|x| (*x, x * x)).collect();
        let f = fit_scaling(&pts, FitModel::PowerLaw).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-14);
        assert!(f.max_log_residual < 1e-14);
    }

    #[test]
    fn exact_exponential() {
        let pts: Vec<(f64, f64)> = (0..10).map(|i| i as f64 * 0.3).map(|t| (t, (-3.0 * t).exp())).collect();
        let f = fit_scaling(&pts, FitModel::Exponential).unwrap();
        assert!((f.slope + 3.0).abs() < 1e-13);
        assert!(f.max_log_residual < 1e-13);
    }

    #[test]
    fn rejects_bad_data() {
        assert!(fit_scaling(&[(1.0, 1.0), (2.0, 2.0)], FitModel::PowerLaw).is_err());
        assert!(fit_scaling(&[(1.0, 1.0), (2.0, 0.0), (3.0, 1.0)], FitModel::PowerLaw).is_err());
        assert!(fit_scaling(&[(0.0, 1.0), (2.0, 1.0), (3.0, 1.0)], FitModel::PowerLaw).is_err());
        assert!(fit_scaling(&[(0.0, 1.0), (2.0, -1.0), (3.0, 1.0)], FitModel::Exponential).is_err());
    }
}
