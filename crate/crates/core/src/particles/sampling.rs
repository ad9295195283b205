use super::rng::{NoiseStream, TAG_INITIAL};
use crate::error::{invalid, Error, Result};
use crate::spectral::{default_grid, evaluate_on_grid, EmpiricalMeasure, FieldKind, ModeLattice, SpectralField, TOL_POS};

/// Factor by which the rejection envelope exceeds the largest grid value.
const ENVELOPE: f64 = 1.25;

fn grid_values(mu: &SpectralField) -> Result<Vec<f64>> {
    if mu.kind() != FieldKind::Density {
        return invalid("initial law must be a density");
    }
    let values = evaluate_on_grid(mu, default_grid(mu.lattice().cutoff()))?;
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if min < -TOL_POS {
        return Err(Error::NonPositiveDensity { min });
    }
    Ok(values)
}

/// Draws `n` i.i.d. particles from `μ₀`; modes are cached on `cache`.
///
/// In `d = 1` this inverts the piecewise-linear CDF through the `4M+1` grid
/// values. In higher dimensions it rejects uniform proposals against the grid
/// maximum times 1.25.
pub fn sample_initial(
    mu: &SpectralField,
    n: usize,
    stream: &NoiseStream,
    cache: ModeLattice,
) -> Result<EmpiricalMeasure> {
    if n == 0 {
        return invalid("need at least one particle");
    }
    if n > u32::MAX as usize {
        return invalid("particle count exceeds the counter range");
    }
    if cache.dim() != mu.dim() {
        return invalid("cache lattice and density dimensions differ");
    }
    let values = grid_values(mu)?;
    let coords = if mu.dim() == 1 { inverse_cdf(&values, n, stream) } else { rejection(mu, &values, n, stream)? };
    EmpiricalMeasure::new(coords, cache)
}

fn inverse_cdf(values: &[f64], n: usize, stream: &NoiseStream) -> Vec<f64> {
    let g = values.len();
    let h = 1.0 / g as f64;
    let mut cdf = Vec::with_capacity(g + 1);
    cdf.push(0.0);
    for k in 0..g {
        let (a, b) = (values[k].max(0.0), values[(k + 1) % g].max(0.0));
        cdf.push(cdf[k] + 0.5 * h * (a + b));
    }
    let total = cdf[g];
    cdf.iter_mut().for_each(|c| *c /= total);
    (0..n)
        .map(|i| {
            let u = stream.uniforms(i as u32, 0, TAG_INITIAL)[0];
            let k = cdf.partition_point(|&c| c <= u).clamp(1, g) - 1;
            let width = cdf[k + 1] - cdf[k];
            let frac = if width > 0.0 { (u - cdf[k]) / width } else { 0.5 };
            (k as f64 + frac) * h
        })
        .collect()
}

fn rejection(mu: &SpectralField, values: &[f64], n: usize, stream: &NoiseStream) -> Result<Vec<f64>> {
    let d = mu.dim();
    let bound = ENVELOPE * values.iter().copied().fold(0.0, f64::max);
    let mut coords = Vec::with_capacity(n * d);
    let mut x = vec![0.0; d];
    for i in 0..n {
        let mut attempt = 0u32;
        loop {
            for (j, pair) in x.chunks_mut(2).enumerate() {
                let u = stream.uniforms(i as u32, attempt, TAG_INITIAL + 1 + j as u32);
                pair.copy_from_slice(&u[..pair.len()]);
            }
            let accept = stream.uniforms(i as u32, attempt, TAG_INITIAL)[0] * bound;
            if accept <= mu.eval_at(&x) {
                break;
            }
            attempt = attempt.checked_add(1).ok_or_else(|| Error::InvalidInput("rejection sampler stalled".into()))?;
        }
        coords.extend_from_slice(&x);
    }
    Ok(coords)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    #[test]
    fn uniform_passes_ks() {
        let lat = ModeLattice::new(1, 4).unwrap();
        let mu = SpectralField::uniform(lat);
        let n = 2000;
        let mut fails = 0;
        for seed in 0..20 {
            let s = sample_initial(&mu, n, &NoiseStream::new(seed, 0), lat).unwrap();
            let mut x = s.coords().to_vec();
            x.sort_by(f64::total_cmp);
            let ks = x
                .iter()
                .enumerate()
                .map(|(i, v)| ((i + 1) as f64 / n as f64 - v).max(v - i as f64 / n as f64))
                .fold(0.0, f64::max);
            if ks >= 1.63 / (n as f64).sqrt() {
                fails += 1;
            }
        }
        assert!(fails <= 1, "{fails}");
    }

    #[test]
    fn concentrated_moment() {
        let lat = ModeLattice::new(1, 24).unwrap();
        let f = SpectralField::from_fn(lat, |x| (4.0 * (TAU * x[0]).cos()).exp()).unwrap();
        let mu = f.scale(1.0 / f.mass()).into_density().unwrap();
        let n = 20_000;
        let s = sample_initial(&mu, n, &NoiseStream::new(1, 0), lat).unwrap();
        let cs: Vec<f64> = s.coords().iter().map(|x| (TAU * x).cos()).collect();
        let mean = cs.iter().sum::<f64>() / n as f64;
        let var = cs.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let want = mu.coeff(&[1]).re;
        assert!((mean - want).abs() < 3.0 * (var / n as f64).sqrt(), "{mean} {want}");
    }

    #[test]
    fn singleton_and_two_dimensions() {
        let lat = ModeLattice::new(1, 3).unwrap();
        let s = sample_initial(&SpectralField::uniform(lat), 1, &NoiseStream::new(3, 0), lat).unwrap();
        assert!(s.modes().coeffs().iter().all(|c| (c.norm() - 1.0).abs() < 1e-12));
        let lat2 = ModeLattice::new(2, 3).unwrap();
        let f = SpectralField::from_fn(lat2, |x| 1.0 + 0.8 * (TAU * x[0]).cos() * (TAU * x[1]).cos()).unwrap();
        let mu = f.into_density().unwrap();
        let s = sample_initial(&mu, 20_000, &NoiseStream::new(4, 0), lat2).unwrap();
        // E cos(2πx)cos(2πy) = 0.8/4
        let m: f64 = (0..s.len())
            .map(|i| {
                let p = s.particle(i);
                (TAU * p[0]).cos() * (TAU * p[1]).cos()
            })
            .sum::<f64>()
            / s.len() as f64;
        assert!((m - 0.2).abs() < 0.015, "{m}");
    }
}
