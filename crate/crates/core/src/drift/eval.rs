use num_complex::Complex64;
use std::f64::consts::TAU;

use super::DriftSpec;
use crate::error::{invalid, Error, Result};
use crate::spectral::empirical::{fill_powers, half_table};
use crate::spectral::{EmpiricalMeasure, ModeLattice, SpectralField};

/// `δb/δm(·)(q)`, the part of the drift that depends on the measure,
/// on the lattice of `q`. The drift is affine in the measure, so this is
/// exact for any base point.
pub fn linear_part(spec: &DriftSpec, q: &SpectralField) -> Result<Vec<SpectralField>> {
    if q.dim() != spec.dim() {
        return invalid(format!("field has d={}, drift has d={}", q.dim(), spec.dim()));
    }
    let lat = q.lattice();
    if let Some((potential, kappa)) = spec.as_convolution() {
        return Ok((0..lat.dim())
            .map(|j| {
                q.map_modes(|i, c| {
                    let n = lat.component(i, j) as f64;
                    let w = potential.coeff(&lat.mode(i));
                    Complex64::new(0.0, -kappa * TAU * n * w) * c
                })
                .into_signed()
            })
            .collect());
    }
    let DriftSpec::SmallMeanField(s) = spec else { unreachable!() };
    let kl = s.kernel_lattice();
    let l = kl.len();
    // q^{-m} read off q's lattice for every kernel mode m
    let q_neg: Vec<Complex64> = (0..l).map(|m| q.coeff(&kl.mode(kl.neg_index(m)))).collect();
    Ok((0..lat.dim())
        .map(|j| {
            let mut out = vec![Complex64::default(); lat.len()];
            for n in 0..l {
                let Some(target) = lat.translate(&kl, n) else { continue };
                let row = &s.kernel(j)[n * l..(n + 1) * l];
                out[target] = s.epsilon() * row.iter().zip(&q_neg).map(|(b, q)| b * q).sum::<Complex64>();
            }
            SpectralField::signed(lat, out).expect("lattice-sized coefficients")
        })
        .collect())
}

/// Coefficients of `x ↦ b(x, m)`, one field per component, on `m`'s lattice.
pub fn drift_field(spec: &DriftSpec, m: &SpectralField) -> Result<Vec<SpectralField>> {
    let mut b = linear_part(spec, m)?;
    if let DriftSpec::SmallMeanField(s) = spec {
        for (bj, b0) in b.iter_mut().zip(s.b0()) {
            *bj = bj.combine(1.0, &b0.resample(m.lattice())?, 1.0)?;
        }
    }
    Ok(b)
}

/// Drift coefficients ready for pointwise evaluation.
#[derive(Clone, Debug)]
pub struct DriftField {
    lattice: ModeLattice,
    comps: Vec<Vec<Complex64>>,
    powers: Vec<Complex64>,
    table: Vec<(usize, bool)>,
}

impl DriftField {
    pub fn new(fields: &[SpectralField]) -> Self {
        let lattice = fields[0].lattice();
        Self {
            lattice,
            comps: fields.iter().map(|f| f.coeffs().to_vec()).collect(),
            powers: vec![Complex64::default(); lattice.dim() * (lattice.cutoff() + 1)],
            table: half_table(lattice),
        }
    }

    pub fn lattice(&self) -> ModeLattice {
        self.lattice
    }

    /// Writes `b(x)` into `out`.
    pub fn eval_at(&mut self, x: &[f64], out: &mut [f64]) {
        let mut powers = std::mem::take(&mut self.powers);
        fill_powers(x, self.lattice.cutoff(), &mut powers);
        self.eval_powers(&powers, out);
        self.powers = powers;
    }

    /// `b(x)` from the table `e^{-i2πk x_j}` of [`fill_powers`].
    pub(crate) fn eval_powers(&self, powers: &[Complex64], out: &mut [f64]) {
        let d = self.lattice.dim();
        let z = self.lattice.zero_index();
        out.iter_mut().for_each(|v| *v = 0.0);
        for (h, row) in self.table.chunks_exact(d).enumerate() {
            let mut e = Complex64::new(1.0, 0.0);
            for &(k, neg) in row {
                let p = powers[k];
                e *= if neg { p } else { p.conj() };
            }
            // modes n and −n contribute 2 Re(c e)
            let w = if h == 0 { 1.0 } else { 2.0 };
            for (o, c) in out.iter_mut().zip(&self.comps) {
                *o += w * (c[z + h] * e).re;
            }
        }
    }
}

/// Lattice carrying every mode of the drift field: the interaction support
/// and, for small mean-field drifts, the confinement modes.
pub(crate) fn drift_lattice(spec: &DriftSpec) -> Result<ModeLattice> {
    let mut cutoff = spec.support().max(1);
    if let DriftSpec::SmallMeanField(s) = spec {
        cutoff = s.b0().iter().map(|f| f.lattice().cutoff()).fold(cutoff, usize::max);
    }
    ModeLattice::new(spec.dim(), cutoff)
}

/// `b(x_i, μᴺ)` for every particle via the empirical Fourier modes, as a flat
/// `N × d` array.
pub fn eval_drift_on_particles(spec: &DriftSpec, mu: &EmpiricalMeasure) -> Result<Vec<f64>> {
    let cache = mu.lattice().cutoff();
    if cache < spec.support() {
        return Err(Error::Truncation { cache, support: spec.support() });
    }
    let lat = drift_lattice(spec)?;
    let modes = mu.modes().resample(lat)?;
    let mut field = DriftField::new(&drift_field(spec, &modes)?);
    let d = mu.dim();
    let mut out = vec![0.0; mu.len() * d];
    for (i, chunk) in out.chunks_exact_mut(d).enumerate() {
        field.eval_at(mu.particle(i), chunk);
    }
    Ok(out)
}

/// `b(x_i, μᴺ)` by direct `O(N²)` summation over particle pairs.
pub fn eval_drift_pairwise(spec: &DriftSpec, mu: &EmpiricalMeasure) -> Result<Vec<f64>> {
    let (n, d) = (mu.len(), mu.dim());
    let mut out = vec![0.0; n * d];
    match spec {
        DriftSpec::Kuramoto { kappa } => {
            for i in 0..n {
                let xi = mu.particle(i)[0];
                let s: f64 = (0..n).map(|j| (TAU * (xi - mu.particle(j)[0])).sin()).sum();
                out[i] = -TAU * kappa * s / n as f64;
            }
        }
        DriftSpec::ConvolutionGradient { potential, kappa } => {
            let lat = potential.lattice();
            let w = potential.w_hat();
            for i in 0..n {
                for j in 0..n {
                    let (xi, xj) = (mu.particle(i), mu.particle(j));
                    for idx in 0..lat.len() {
                        if w[idx] == 0.0 {
                            continue;
                        }
                        let phase: f64 = (0..d).map(|a| lat.component(idx, a) as f64 * (xi[a] - xj[a])).sum();
                        let s = (TAU * phase).sin();
                        for a in 0..d {
                            // ∂_a W = −Σ_n 2π n_a Ŵ^n sin(2π n·x)
                            out[i * d + a] += kappa * TAU * lat.component(idx, a) as f64 * w[idx] * s / n as f64;
                        }
                    }
                }
            }
        }
        DriftSpec::SmallMeanField(s) => {
            for i in 0..n {
                let xi = mu.particle(i);
                for a in 0..d {
                    let inter: f64 = (0..n).map(|j| s.kernel_at(a, xi, mu.particle(j))).sum();
                    out[i * d + a] = s.b0()[a].eval_at(xi) + s.epsilon() * inter / n as f64;
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drift::{PotentialSpec, SmallMeanField};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cloud(n: usize, d: usize, m: usize, seed: u64) -> EmpiricalMeasure {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lat = ModeLattice::new(d, m).unwrap();
        EmpiricalMeasure::new((0..n * d).map(|_| rng.gen()).collect(), lat).unwrap()
    }

    #[test]
    fn kuramoto_two_particles() {
        let lat = ModeLattice::new(1, 2).unwrap();
        let mu = EmpiricalMeasure::new(vec![0.0, 0.25], lat).unwrap();
        let b = eval_drift_on_particles(&DriftSpec::Kuramoto { kappa: 1.0 }, &mu).unwrap();
        assert!((b[0] - std::f64::consts::PI).abs() < 1e-14);
        let same = EmpiricalMeasure::new(vec![0.3; 5], lat).unwrap();
        let b = eval_drift_on_particles(&DriftSpec::Kuramoto { kappa: 2.0 }, &same).unwrap();
        assert!(b.iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn kuramoto_equals_its_convolution_form() {
        let mu = cloud(200, 1, 4, 7);
        let k = DriftSpec::Kuramoto { kappa: 1.7 };
        let c = DriftSpec::ConvolutionGradient { potential: PotentialSpec::kuramoto(), kappa: 1.7 };
        let a = eval_drift_on_particles(&k, &mu).unwrap();
        let b = eval_drift_on_particles(&c, &mu).unwrap();
        let p = eval_drift_pairwise(&k, &mu).unwrap();
        for i in 0..a.len() {
            assert!((a[i] - b[i]).abs() < 1e-13);
            assert!((a[i] - p[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn spectral_matches_pairwise_in_two_dimensions() {
        let pot = PotentialSpec::from_modes(2, &[(vec![1, 0], 0.3), (vec![1, -2], -0.1), (vec![0, 3], 0.05)]).unwrap();
        let spec = DriftSpec::ConvolutionGradient { potential: pot, kappa: 0.8 };
        let mu = cloud(128, 2, 3, 11);
        let a = eval_drift_on_particles(&spec, &mu).unwrap();
        let b = eval_drift_pairwise(&spec, &mu).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-10);
        }
        let small = cloud(16, 2, 2, 1);
        assert!(matches!(eval_drift_on_particles(&spec, &small), Err(Error::Truncation { .. })));
    }

    #[test]
    fn small_mean_field_paths_agree() {
        let s = SmallMeanField::double_well(1.3, 0.05).unwrap();
        let spec = DriftSpec::SmallMeanField(s.clone());
        let mu = cloud(64, 1, 3, 5);
        let a = eval_drift_on_particles(&spec, &mu).unwrap();
        let b = eval_drift_pairwise(&spec, &mu).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-11);
        }
        let zero = DriftSpec::SmallMeanField(s.with_epsilon(0.0));
        let c = eval_drift_on_particles(&zero, &mu).unwrap();
        for (i, v) in c.iter().enumerate() {
            assert_eq!(*v, {
                let mut f = DriftField::new(&[s.b0()[0].resample(ModeLattice::new(1, 2).unwrap()).unwrap()]);
                let mut o = [0.0];
                f.eval_at(mu.particle(i), &mut o);
                o[0]
            });
        }
    }

    #[test]
    fn uniform_measure_has_zero_drift() {
        let lat = ModeLattice::new(1, 8).unwrap();
        let spec = DriftSpec::ConvolutionGradient { potential: PotentialSpec::cosine(0.5), kappa: 3.0 };
        for f in drift_field(&spec, &SpectralField::uniform(lat)).unwrap() {
            assert!(f.coeffs().iter().all(|c| c.norm() == 0.0));
        }
    }
}
