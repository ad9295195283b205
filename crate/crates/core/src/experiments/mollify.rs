use serde::Serialize;

use crate::error::{invalid, Result};
use crate::functionals::FunctionalSpec;
use crate::particles::NoiseStream;
use crate::spectral::{fejer_smooth, wasserstein1_1d, EmpiricalMeasure, ModeLattice};

/// Seeded one-dimensional empirical measures ranging from a single atom to
/// a thousand, alternating spread-out and clustered configurations.
pub fn stress_set(count: usize, seed: u64, cache: ModeLattice) -> Result<Vec<EmpiricalMeasure>> {
    if cache.dim() != 1 {
        return invalid("the stress set is one-dimensional");
    }
    let noise = NoiseStream::new(seed, 0);
    (0..count)
        .map(|k| {
            let atoms = ((1000f64).powf(k as f64 / (count.max(2) - 1) as f64)).round() as usize;
            let centre = noise.uniforms(k as u32, 0, 0)[0];
            let coords = (0..atoms)
                .map(|i| {
                    let u = noise.uniforms(k as u32, i as u32 + 1, 0)[0];
                    if k % 2 == 0 {
                        u
                    } else {
                        (centre + 0.05 * (u - 0.5)).rem_euclid(1.0)
                    }
                })
                .collect();
            EmpiricalMeasure::new(coords, cache)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MollifyRow {
    pub order: usize,
    pub eps: f64,
    /// `max_μ |Φ_{N,ε}(μ) − Φ(μ)|` over the stress set.
    pub max_error: f64,
}

/// Worst-case mollification error of `phi` at each `(N, ε)`.
pub fn mollification_errors(phi: &FunctionalSpec, set: &[EmpiricalMeasure], levels: &[(usize, f64)]) -> Result<Vec<MollifyRow>> {
    let exact: Vec<f64> = set.iter().map(|mu| phi.eval(mu)).collect::<Result<_>>()?;
    levels
        .iter()
        .map(|&(order, eps)| {
            let m = phi.clone().mollify(order, eps)?;
            let mut max_error: f64 = 0.0;
            for (mu, e) in set.iter().zip(&exact) {
                max_error = max_error.max((m.eval(mu)? - e).abs());
            }
            Ok(MollifyRow { order, eps, max_error })
        })
        .collect()
}

/// `max_μ W₁(F_N μ, μ)` over the stress set, for each Fejér order.
pub fn fejer_w1_errors(set: &[EmpiricalMeasure], orders: &[usize]) -> Result<Vec<(usize, f64)>> {
    orders
        .iter()
        .map(|&n| {
            let mut worst: f64 = 0.0;
            for mu in set {
                worst = worst.max(wasserstein1_1d(&fejer_smooth(mu, n)?, mu)?);
            }
            Ok((n, worst))
        })
        .collect()
}
