use serde::Serialize;

use crate::error::{invalid, Result};

/// Least-squares line through a set of points with its worst deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Fit {
    pub slope: f64,
    pub intercept: f64,
    /// `max |fit − data|` in the coordinates of the fit.
    pub residual: f64,
}

impl Fit {
    pub fn at(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }
}

/// Straight line `y ≈ intercept + slope · x` by least squares.
///
/// ```
/// use krlab::experiments::fit_linear;
///
/// let f = fit_linear(&[(0.0, 1.0), (1.0, 3.0), (2.0, 5.0)]).unwrap();
/// assert!((f.slope - 2.0).abs() < 1e-12 && (f.intercept - 1.0).abs() < 1e-12);
/// ```
pub fn fit_linear(points: &[(f64, f64)]) -> Result<Fit> {
    if points.len() < 3 {
        return Err(invalid(format!("a fit needs at least 3 points, got {}", points.len())));
    }
    if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(invalid("fit data must be finite"));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx <= f64::EPSILON * points.iter().map(|p| p.0 * p.0).sum::<f64>() {
        return Err(invalid("fit abscissae are all equal"));
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = points.iter().map(|&(x, y)| (intercept + slope * x - y).abs()).fold(0.0, f64::max);
    Ok(Fit { slope, intercept, residual })
}

/// Power law `value ≈ e^intercept · parameter^slope`: a line through
/// `(log parameter, log value)`. The residual is measured in log space.
///
/// ```
/// use krlab::experiments::fit_rate;
///
/// let pairs: Vec<(f64, f64)> = [1.0, 4.0, 16.0].iter().map(|&h: &f64| (h, h.sqrt())).collect();
/// let f = fit_rate(&pairs).unwrap();
/// assert!((f.slope - 0.5).abs() < 1e-12 && f.residual < 1e-12);
/// ```
pub fn fit_rate(pairs: &[(f64, f64)]) -> Result<Fit> {
    if pairs.iter().any(|&(p, v)| !(p > 0.0) || !(v > 0.0)) {
        return Err(invalid("rate fits need positive parameters and values"));
    }
    let logs: Vec<(f64, f64)> = pairs.iter().map(|&(p, v)| (p.ln(), v.ln())).collect();
    fit_linear(&logs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_values_have_zero_slope() {
        let f = fit_rate(&[(1.0, 2.0), (2.0, 2.0), (8.0, 2.0)]).unwrap();
        assert!(f.slope.abs() < 1e-15);
        assert!((f.intercept - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(fit_rate(&[(1.0, 1.0), (2.0, 0.0), (3.0, 1.0)]).is_err());
        assert!(fit_rate(&[(1.0, 1.0), (2.0, 1.0)]).is_err());
        assert!(fit_rate(&[(-1.0, 1.0), (2.0, 1.0), (3.0, 1.0)]).is_err());
        assert!(fit_linear(&[(1.0, 1.0), (1.0, 2.0), (1.0, 3.0)]).is_err());
    }

    #[test]
    fn residual_is_the_largest_deviation() {
        let f = fit_linear(&[(0.0, 0.0), (1.0, 1.0), (2.0, 0.0)]).unwrap();
        assert!(f.slope.abs() < 1e-15);
        assert!((f.residual - 2.0 / 3.0).abs() < 1e-15);
    }
}
