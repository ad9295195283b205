use serde::Serialize;

use crate::error::{invalid, Result};

/// Least-squares fit of `value ≈ C e^{−λt}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecayFit {
    pub lambda: f64,
    pub c: f64,
    pub r2: f64,
}

/// Fits a line to `(t, log value)` over the points with `t ≥ t_min`.
///
/// A series with no spread in `log value` has `r2 = 1`.
pub fn decay_rate_fit(series: &[(f64, f64)], t_min: f64) -> Result<DecayFit> {
    let pts: Vec<(f64, f64)> = series.iter().copied().filter(|(t, _)| *t >= t_min).collect();
    if pts.len() < 5 {
        return invalid(format!("decay fit needs at least 5 points with t ≥ {t_min}, got {}", pts.len()));
    }
    if let Some((t, v)) = pts.iter().find(|(_, v)| !(*v > 0.0 && v.is_finite())) {
        return invalid(format!("value {v} at t = {t} is not positive"));
    }
    let n = pts.len() as f64;
    let (mt, my) = pts.iter().fold((0.0, 0.0), |(a, b), (t, v)| (a + t / n, b + v.ln() / n));
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (t, v) in &pts {
        let (dx, dy) = (t - mt, v.ln() - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return invalid("decay fit needs distinct times");
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(DecayFit { lambda: -slope, c: (my - slope * mt).exp(), r2 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_exponential() {
        let s: Vec<_> = (0..20).map(|k| (k as f64 * 0.5, 2.0 * (-3.0 * k as f64 * 0.5).exp())).collect();
        let f = decay_rate_fit(&s, 0.0).unwrap();
        assert!((f.lambda - 3.0).abs() < 1e-10);
        assert!((f.c - 2.0).abs() < 1e-9);
        assert!((f.r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn flat_series() {
        let s: Vec<_> = (0..8).map(|k| (k as f64, 0.7)).collect();
        let f = decay_rate_fit(&s, 0.0).unwrap();
        assert_eq!(f.lambda, 0.0);
        assert_eq!(f.r2, 1.0);
    }

    #[test]
    fn rejects_nonpositive_and_short() {
        assert!(decay_rate_fit(&[(0.0, 1.0), (1.0, 0.0), (2.0, 1.0), (3.0, 1.0), (4.0, 1.0)], 0.0).is_err());
        assert!(decay_rate_fit(&[(0.0, 1.0), (1.0, 1.0)], 0.0).is_err());
    }
}
