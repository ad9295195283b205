use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};
use std::io::Write;

use crate::error::{invalid, Result};
use crate::spectral::io::fmt17;

/// One Monte-Carlo estimate against its mean-field reference.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorRow {
    pub n: usize,
    pub t: f64,
    pub estimate: f64,
    pub std_error: f64,
    pub pde_reference: f64,
    pub abs_error: f64,
}

impl ErrorRow {
    pub fn new(n: usize, t: f64, estimate: f64, std_error: f64, pde_reference: f64) -> Result<Self> {
        if !(std_error >= 0.0) {
            return invalid(format!("standard error {std_error} must be nonnegative"));
        }
        Ok(Self { n, t, estimate, std_error, pde_reference, abs_error: (estimate - pde_reference).abs() })
    }
}

fn same_time(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(1.0)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ErrorTable {
    rows: Vec<ErrorRow>,
}

impl ErrorTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_rows(rows: Vec<ErrorRow>) -> Self {
        Self { rows }
    }

    pub fn push(&mut self, row: ErrorRow) {
        self.rows.push(row);
    }

    pub fn rows(&self) -> &[ErrorRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn get(&self, n: usize, t: f64) -> Option<&ErrorRow> {
        self.rows.iter().find(|r| r.n == n && same_time(r.t, t))
    }

    /// Rows recorded at time `t`.
    pub fn at_time(&self, t: f64) -> ErrorTable {
        Self { rows: self.rows.iter().filter(|r| same_time(r.t, t)).copied().collect() }
    }

    /// Rows for particle count `n`.
    pub fn at_n(&self, n: usize) -> ErrorTable {
        Self { rows: self.rows.iter().filter(|r| r.n == n).copied().collect() }
    }

    /// `N,t,estimate,std_error,pde_reference,abs_error` with 17 significant digits.
    pub fn write_csv(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "N,t,estimate,std_error,pde_reference,abs_error")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                r.n,
                fmt17(r.t),
                fmt17(r.estimate),
                fmt17(r.std_error),
                fmt17(r.pde_reference),
                fmt17(r.abs_error)
            )?;
        }
        Ok(())
    }
}

/// Least-squares line with a 95% confidence half-width on the slope.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub half_width: f64,
    pub points: usize,
}

impl FitResult {
    /// Whether `value` lies in the slope's confidence interval.
    pub fn covers(&self, value: f64) -> bool {
        (self.slope - value).abs() <= self.half_width
    }
}

/// Ordinary least squares of `y` on `x`.
pub fn line_fit(x: &[f64], y: &[f64]) -> Result<FitResult> {
    let n = x.len();
    if n != y.len() {
        return invalid("x and y lengths differ");
    }
    if n < 3 {
        return invalid(format!("a line fit needs at least 3 points, got {n}"));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return invalid("fit data must be finite");
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if !(sxx > 0.0) {
        return invalid("fit abscissae are all equal");
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let r2 = if syy > 0.0 { (1.0 - sse / syy).clamp(0.0, 1.0) } else { 1.0 };
    let se = (sse / (nf - 2.0) / sxx).sqrt();
    let q = StudentsT::new(0.0, 1.0, nf - 2.0).map_err(|e| crate::Error::InvalidInput(e.to_string()))?.inverse_cdf(0.975);
    Ok(FitResult { slope, intercept, r2, half_width: q * se, points: n })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitAxis {
    /// `log abs_error` against `log N`.
    N,
    /// `log abs_error` against `t`.
    T,
}

/// Rate fit of a table along one axis; the table should vary only along it.
pub fn rate_fit(table: &ErrorTable, axis: FitAxis) -> Result<FitResult> {
    let rows = table.rows();
    if rows.len() < 4 {
        return invalid(format!("rate fit needs at least 4 rows, got {}", rows.len()));
    }
    if let Some(r) = rows.iter().find(|r| !(r.abs_error > 0.0)) {
        return invalid(format!("error at N = {}, t = {} is not positive", r.n, r.t));
    }
    let x: Vec<f64> = rows
        .iter()
        .map(|r| match axis {
            FitAxis::N => (r.n as f64).ln(),
            FitAxis::T => r.t,
        })
        .collect();
    let y: Vec<f64> = rows.iter().map(|r| r.abs_error.ln()).collect();
    line_fit(&x, &y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn table(f: impl Fn(usize, f64) -> f64, ns: &[usize], ts: &[f64]) -> ErrorTable {
        let mut t = ErrorTable::new();
        for &n in ns {
            for &s in ts {
                t.push(ErrorRow::new(n, s, f(n, s), 0.0, 0.0).unwrap());
            }
        }
        t
    }

    #[test]
    fn exact_power_law() {
        let t = table(|n, _| 7.0 / n as f64, &[64, 128, 256, 512, 1024], &[1.0]);
        let f = rate_fit(&t, FitAxis::N).unwrap();
        assert!((f.slope + 1.0).abs() < 1e-12);
        assert!((f.intercept - 7f64.ln()).abs() < 1e-11);
        assert_eq!(f.r2, 1.0);
    }

    #[test]
    fn exact_exponential() {
        let t = table(|_, s| 5.0 * (-2.0 * s).exp(), &[100], &[0.0, 0.5, 1.0, 2.0, 3.0]);
        let f = rate_fit(&t, FitAxis::T).unwrap();
        assert!((f.slope + 2.0).abs() < 1e-12);
    }

    #[test]
    fn interval_coverage() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let ns = [64usize, 128, 256, 512, 1024, 2048];
        let mut hits = 0;
        for _ in 0..100 {
            let mut t = ErrorTable::new();
            for &n in &ns {
                // log-normal noise with σ = 5%
                let z: f64 = (0..12).map(|_| rng.gen::<f64>()).sum::<f64>() - 6.0;
                t.push(ErrorRow::new(n, 1.0, 3.0 / n as f64 * (0.05 * z).exp(), 0.0, 0.0).unwrap());
            }
            if rate_fit(&t, FitAxis::N).unwrap().covers(-1.0) {
                hits += 1;
            }
        }
        assert!(hits >= 90, "{hits}");
    }

    #[test]
    fn degenerate_data_is_rejected() {
        let t = table(|_, _| 1.0, &[64, 64, 64, 64], &[1.0]);
        assert!(rate_fit(&t, FitAxis::N).is_err());
        let t = table(|n, _| 1.0 / n as f64, &[64, 128, 256], &[1.0]);
        assert!(rate_fit(&t, FitAxis::N).is_err());
        let t = table(|n, _| if n == 64 { 0.0 } else { 1.0 }, &[64, 128, 256, 512], &[1.0]);
        assert!(rate_fit(&t, FitAxis::N).is_err());
    }

    #[test]
    fn abs_error_and_csv() {
        let r = ErrorRow::new(64, 1.0, 0.3, 0.01, 0.5).unwrap();
        assert!((r.abs_error - 0.2).abs() < 1e-15);
        assert!(ErrorRow::new(64, 1.0, 0.3, -0.01, 0.5).is_err());
        let mut buf = Vec::new();
        ErrorTable::from_rows(vec![r]).write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("N,t,estimate,std_error,pde_reference,abs_error\n64,"));
    }
}
