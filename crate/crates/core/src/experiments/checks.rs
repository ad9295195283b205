use serde::Serialize;

use super::table::{line_fit, FitResult};
use crate::drift::DriftSpec;
use crate::error::{invalid, Result};
use crate::functionals::FunctionalSpec;
use crate::pde::{
    dirac_modes, u_first_derivative, u_first_derivative_fd, u_second_mixed_derivative, u_second_mixed_derivative_fd,
    solve_nonlinear_fp, DiracSmoothing, SolverConfig,
};
use crate::spectral::{SpectralField, TorusPoint};

#[derive(Clone, Debug)]
pub struct CheckConfig {
    pub pde: SolverConfig,
    pub smoothing: DiracSmoothing,
    /// Difference step; the order is measured between `2h` and `h`.
    pub h: f64,
    pub min_order: f64,
    pub rel_tol: f64,
    /// Tolerance of the `t = 0` identity `δ𝒰/δm(0) = δΦ/δm`.
    pub identity_tol: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    /// `δ𝒰/δm(0, μ) = δΦ/δm(μ)`.
    Identity,
    First,
    Mixed,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckRow {
    pub kind: CheckKind,
    pub t: f64,
    pub z: Vec<f64>,
    pub value: f64,
    pub reference: f64,
    pub rel_error: f64,
    /// `log₂(e(2h)/e(h))`; `None` when the coarse error is below the roundoff
    /// of the difference quotient.
    pub order: Option<f64>,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckReport {
    pub rows: Vec<CheckRow>,
    pub passed: bool,
}

/// Roundoff of a difference quotient of `𝒰` with step `h` and order `k`.
fn noise_floor(u: f64, h: f64, k: i32) -> f64 {
    64.0 * f64::EPSILON * u.abs() / h.powi(k)
}

fn order(e_coarse: f64, e_fine: f64, floor: f64) -> Option<f64> {
    if e_coarse <= floor {
        return None;
    }
    Some((e_coarse / e_fine).log2())
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Finite-difference validation of the representation formulas for
/// `δ𝒰/δm` and `∂_{z₁}∂_{z₂}δ²𝒰/δm²` on a grid of times and points
/// (`d = 1` for the mixed derivative pairs, taken along consecutive points).
pub fn representation_check_suite(
    drift: &DriftSpec,
    phi: &FunctionalSpec,
    mu: &SpectralField,
    t_list: &[f64],
    z_list: &[TorusPoint],
    cfg: &CheckConfig,
) -> Result<CheckReport> {
    if z_list.is_empty() || t_list.is_empty() {
        return invalid("need at least one time and one point");
    }
    let sm = cfg.smoothing;
    let pde = &cfg.pde;
    let mut rows = Vec::new();
    for &t in t_list {
        let u = if t > 0.0 {
            phi.eval(solve_nonlinear_fp(drift, &mu.resample(pde.lattice)?, &pde.with_t_end(t))?.last())?
        } else {
            0.0
        };
        for z in z_list {
            let value = u_first_derivative(drift, phi, mu, t, z, sm, pde)?;
            if t == 0.0 {
                let delta = dirac_modes(pde.lattice, z, sm)?;
                let start = mu.resample(pde.lattice)?;
                let reference = phi.directional(&start, &delta.sub(&start)?)?.1;
                let err = (value - reference).abs();
                rows.push(CheckRow {
                    kind: CheckKind::Identity,
                    t,
                    z: z.coords().to_vec(),
                    value,
                    reference,
                    rel_error: rel(value, reference),
                    order: None,
                    passed: err <= cfg.identity_tol * reference.abs().max(1.0),
                });
                continue;
            }
            let fd = |h| u_first_derivative_fd(drift, phi, mu, t, z, h, sm, pde);
            let (coarse, fine) = (fd(2.0 * cfg.h)?, fd(cfg.h)?);
            let o = order((coarse - value).abs(), (fine - value).abs(), noise_floor(u, cfg.h, 1));
            let rel_error = rel(fine, value);
            rows.push(CheckRow {
                kind: CheckKind::First,
                t,
                z: z.coords().to_vec(),
                value,
                reference: fine,
                rel_error,
                order: o,
                passed: rel_error <= cfg.rel_tol && o.map_or(true, |o| o >= cfg.min_order),
            });
        }
        if t == 0.0 {
            continue;
        }
        for pair in z_list.windows(2) {
            let (a, b) = (&pair[0], &pair[1]);
            let value = u_second_mixed_derivative(drift, phi, mu, t, (a, 0), (b, 0), sm, pde)?;
            let fd = |h| u_second_mixed_derivative_fd(drift, phi, mu, t, (a, 0), (b, 0), h, sm, pde);
            let (coarse, fine) = (fd(2.0 * cfg.h)?, fd(cfg.h)?);
            let o = order((coarse - value).abs(), (fine - value).abs(), noise_floor(u, cfg.h, 2));
            let rel_error = rel(fine, value);
            let mut z = a.coords().to_vec();
            z.extend_from_slice(b.coords());
            rows.push(CheckRow {
                kind: CheckKind::Mixed,
                t,
                z,
                value,
                reference: fine,
                rel_error,
                order: o,
                passed: rel_error <= cfg.rel_tol && o.map_or(true, |o| o >= cfg.min_order),
            });
        }
    }
    let passed = rows.iter().all(|r| r.passed);
    Ok(CheckReport { rows, passed })
}

/// `t ↦ ∂_{z₁}∂_{z₂}δ²𝒰/δm²(t, μ)(z₁, z₂)` on a list of times.
pub fn mixed_derivative_series(
    drift: &DriftSpec,
    phi: &FunctionalSpec,
    mu: &SpectralField,
    times: &[f64],
    (z1, z2): (&TorusPoint, &TorusPoint),
    smoothing: DiracSmoothing,
    pde: &SolverConfig,
) -> Result<Vec<(f64, f64)>> {
    times
        .iter()
        .map(|&t| Ok((t, u_second_mixed_derivative(drift, phi, mu, t, (z1, 0), (z2, 0), smoothing, pde)?)))
        .collect()
}

/// `max_{t ≥ t_ref} |D(t)| / |D(t_ref)|` over a series starting at `t_ref`.
pub fn growth_factor(series: &[(f64, f64)]) -> Result<f64> {
    let Some(&(_, first)) = series.first() else {
        return invalid("empty series");
    };
    if first == 0.0 {
        return invalid("series starts at zero");
    }
    Ok(series.iter().map(|(_, v)| v.abs()).fold(0.0, f64::max) / first.abs())
}

/// Semi-log fit of `|D(t)|`; the decay rate is `−slope`.
pub fn decay_fit(series: &[(f64, f64)]) -> Result<FitResult> {
    let (x, y): (Vec<f64>, Vec<f64>) = series.iter().filter(|(_, v)| *v != 0.0).map(|(t, v)| (*t, v.abs().ln())).unzip();
    line_fit(&x, &y)
}
