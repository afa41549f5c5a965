//! Least-squares power-law fits on log-log data.

use crate::error::{Error, Result};

/// Outcome of fitting `value = prefactor * lambda^exponent`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResult {
    pub exponent: f64,
    /// Standard error of the exponent.
    pub std_error: f64,
    pub prefactor: f64,
    /// Euclidean norm of the log-residuals.
    pub residual_norm: f64,
    pub points: usize,
}

/// Ordinary least squares of `log value` against `log lambda`.
pub fn fit_exponent(pairs: &[(f64, f64)]) -> Result<FitResult> {
    if pairs.len() < 5 {
        return Err(Error::Domain(format!(
            "a power-law fit needs at least 5 points, got {}",
            pairs.len()
        )));
    }
    if let Some(p) = pairs.iter().find(|(l, v)| !(*l > 0.0 && *v > 0.0 && l.is_finite() && v.is_finite())) {
        return Err(Error::Domain(format!("non-positive or non-finite pair {p:?}")));
    }
    let n = pairs.len() as f64;
    let xs: Vec<f64> = pairs.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::Domain("all abscissae coincide".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    Ok(FitResult {
        exponent: slope,
        std_error: (rss / (n - 2.0) / sxx).sqrt(),
        prefactor: intercept.exp(),
        residual_norm: rss.sqrt(),
        points: pairs.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_square_law() {
        let pts: Vec<(f64, f64)> = (1..=8).map(|i| (i as f64, (i * i) as f64)).collect();
        let f = fit_exponent(&pts).unwrap();
        assert!((f.exponent - 2.0).abs() < 1e-12);
        assert!(f.std_error <= 1e-12);
        assert!((f.prefactor - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_data() {
        let pts: Vec<(f64, f64)> = (1..=6).map(|i| (i as f64, 3.0)).collect();
        let f = fit_exponent(&pts).unwrap();
        assert!(f.exponent.abs() < 1e-12);
    }

    #[test]
    fn rejects_short_and_nonpositive() {
        assert!(fit_exponent(&[(1.0, 1.0); 4]).is_err());
        let mut pts: Vec<(f64, f64)> = (1..=6).map(|i| (i as f64, 1.0)).collect();
        pts[2].1 = 0.0;
        assert!(fit_exponent(&pts).is_err());
    }
}
