use num_complex::Complex64 as C;

use super::rng::NoiseStream;
use crate::drift::{drift_field, eval_drift_on_particles, DriftField, DriftSpec};
use crate::error::{invalid, Result};
use crate::spectral::empirical::{dequantize, fill_powers, quantize};
use crate::spectral::{wrap_coord, EmpiricalMeasure, Measure, ModeAccumulator, ModeLattice, SpectralField};

/// One Euler-Maruyama step `x ← x + b(x, μᴺ)dt + √dt ξ` with caller-supplied
/// standard normals `noise` (flat `N × d`), followed by wrapping.
pub fn step_em(state: &EmpiricalMeasure, drift: &DriftSpec, dt: f64, noise: &[f64]) -> Result<EmpiricalMeasure> {
    if noise.len() != state.coords().len() {
        return invalid(format!("{} noise values for {} coordinates", noise.len(), state.coords().len()));
    }
    if !(dt > 0.0) {
        return invalid(format!("dt = {dt} must be positive"));
    }
    let b = eval_drift_on_particles(drift, state)?;
    let sq = dt.sqrt();
    let coords = state
        .coords()
        .iter()
        .zip(&b)
        .zip(noise)
        .map(|((x, b), z)| x + b * dt + sq * z)
        .collect();
    EmpiricalMeasure::new(coords, state.lattice())
}

/// Borrowed particle positions, usable wherever a [`Measure`] is expected.
#[derive(Clone, Copy, Debug)]
pub struct ParticleView<'a> {
    dim: usize,
    coords: &'a [f64],
}

impl<'a> ParticleView<'a> {
    pub fn new(dim: usize, coords: &'a [f64]) -> Self {
        Self { dim, coords }
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }
}

impl Measure for ParticleView<'_> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn modes_on(&self, lattice: ModeLattice) -> Result<SpectralField> {
        if lattice.dim() != self.dim {
            return invalid("lattice and particle dimensions differ");
        }
        let mut acc = ModeAccumulator::new(lattice);
        for p in self.coords.chunks_exact(self.dim) {
            acc.add(p);
        }
        Ok(SpectralField::density_unchecked(lattice, acc.coeffs()))
    }

    fn known_cutoff(&self) -> Option<usize> {
        None
    }

    fn atoms(&self) -> Option<&[f64]> {
        Some(self.coords)
    }
}

/// A particle system advanced in place with Philox noise.
///
/// Particle `i` draws its increments from stream `streams[i]`, which is `i`
/// unless reassigned with [`ParticleSystem::with_streams`].
pub struct ParticleSystem<'a> {
    drift: &'a DriftSpec,
    lattice: ModeLattice,
    dim: usize,
    coords: Vec<f64>,
    streams: Vec<u32>,
    noise: NoiseStream,
    step: u32,
    powers: Vec<C>,
    acc: ModeAccumulator,
    b: Vec<f64>,
    xi: Vec<f64>,
    first_re: i128,
    first_im: i128,
}

impl<'a> ParticleSystem<'a> {
    pub fn new(drift: &'a DriftSpec, initial: &EmpiricalMeasure, noise: NoiseStream) -> Result<Self> {
        drift.validate()?;
        if initial.dim() != drift.dim() {
            return invalid("particles and drift have different dimensions");
        }
        let lattice = crate::drift::drift_lattice(drift)?;
        let (n, d) = (initial.len(), initial.dim());
        let row = d * (lattice.cutoff() + 1);
        Ok(Self {
            drift,
            lattice,
            dim: d,
            coords: initial.coords().to_vec(),
            streams: (0..n as u32).collect(),
            noise,
            step: 0,
            powers: vec![C::default(); n * row],
            acc: ModeAccumulator::new(lattice),
            b: vec![0.0; d],
            xi: vec![0.0; d],
            first_re: 0,
            first_im: 0,
        })
    }

    pub fn with_streams(mut self, streams: Vec<u32>) -> Result<Self> {
        if streams.len() != self.len() {
            return invalid("one stream id per particle");
        }
        self.streams = streams;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn steps_taken(&self) -> u32 {
        self.step
    }

    pub fn view(&self) -> ParticleView<'_> {
        ParticleView::new(self.dim, &self.coords)
    }

    pub fn snapshot(&self, cache: ModeLattice) -> Result<EmpiricalMeasure> {
        EmpiricalMeasure::new(self.coords.clone(), cache)
    }

    /// Fills the power tables and the exact mode sums of the current state.
    fn scan(&mut self) {
        let row = self.dim * (self.lattice.cutoff() + 1);
        let m1 = self.lattice.cutoff() + 1;
        self.acc.reset();
        let (mut re, mut im) = (0i128, 0i128);
        for (x, pw) in self.coords.chunks_exact(self.dim).zip(self.powers.chunks_exact_mut(row)) {
            fill_powers(x, self.lattice.cutoff(), pw);
            self.acc.add_powers(pw);
            // mode e₁ = (1, 0, …, 0) sits at index 1 of the first row
            debug_assert!(m1 > 1);
            re += quantize(pw[1].re);
            im += quantize(pw[1].im);
        }
        self.first_re = re;
        self.first_im = im;
    }

    /// `|μ^{e₁}|` of the current state, summed exactly.
    pub fn first_mode_abs(&mut self) -> f64 {
        self.scan();
        self.first_abs_cached()
    }

    fn first_abs_cached(&self) -> f64 {
        let n = self.len();
        C::new(dequantize(self.first_re, n), dequantize(self.first_im, n)).norm()
    }

    /// One Euler-Maruyama step; returns `|μ^{e₁}|` of the state it started from.
    pub fn advance(&mut self, dt: f64) -> Result<f64> {
        self.scan();
        let before = self.first_abs_cached();
        let modes = SpectralField::density_unchecked(self.lattice, self.acc.coeffs());
        let field = DriftField::new(&drift_field(self.drift, &modes)?);
        let row = self.dim * (self.lattice.cutoff() + 1);
        let sq = dt.sqrt();
        let d = self.dim;
        for (i, x) in self.coords.chunks_exact_mut(d).enumerate() {
            field.eval_powers(&self.powers[i * row..(i + 1) * row], &mut self.b);
            self.noise.normals(self.streams[i], self.step, &mut self.xi);
            for ((x, b), z) in x.iter_mut().zip(&self.b).zip(&self.xi) {
                *x = wrap_coord(*x + b * dt + sq * z);
            }
        }
        self.step += 1;
        Ok(before)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drift::{eval_drift_pairwise, PotentialSpec, SmallMeanField};
    use crate::particles::sample_initial;
    use std::f64::consts::TAU;

    fn start(n: usize, seed: u64, lat: ModeLattice) -> EmpiricalMeasure {
        let mu = SpectralField::from_fn(lat, |x| 1.0 + 0.6 * (TAU * x[0]).cos()).unwrap().into_density().unwrap();
        sample_initial(&mu, n, &NoiseStream::new(seed, 0), lat).unwrap()
    }

    #[test]
    fn zero_drift_zero_noise_is_identity() {
        let lat = ModeLattice::new(1, 2).unwrap();
        let s = start(50, 1, lat);
        let drift = DriftSpec::ConvolutionGradient { potential: PotentialSpec::zero(1), kappa: 0.0 };
        let next = step_em(&s, &drift, 0.01, &vec![0.0; 50]).unwrap();
        assert_eq!(next.coords(), s.coords());
    }

    #[test]
    fn kuramoto_pair_by_hand() {
        let lat = ModeLattice::new(1, 1).unwrap();
        let s = EmpiricalMeasure::new(vec![0.1, 0.35], lat).unwrap();
        let (kappa, dt, z) = (1.3, 0.01, [0.4, -1.1]);
        let next = step_em(&s, &DriftSpec::Kuramoto { kappa }, dt, &z).unwrap();
        let x = [0.1f64, 0.35];
        for i in 0..2 {
            let b = -TAU * kappa * 0.5 * ((TAU * (x[i] - x[0])).sin() + (TAU * (x[i] - x[1])).sin());
            let want = wrap_coord(x[i] + b * dt + dt.sqrt() * z[i]);
            assert!((next.coords()[i] - want).abs() < 1e-14);
        }
    }

    #[test]
    fn engine_matches_public_step() {
        let lat = ModeLattice::new(1, 2).unwrap();
        let s = start(40, 2, lat);
        let drift = DriftSpec::Kuramoto { kappa: 2.0 };
        let noise = NoiseStream::new(9, 4);
        let mut sys = ParticleSystem::new(&drift, &s, noise).unwrap();
        let mut state = s.clone();
        for k in 0..20u32 {
            sys.advance(0.01).unwrap();
            let mut z = vec![0.0; 40];
            for (i, v) in z.iter_mut().enumerate() {
                noise.normals(i as u32, k, std::slice::from_mut(v));
            }
            state = step_em(&state, &drift, 0.01, &z).unwrap();
        }
        assert_eq!(sys.coords(), state.coords());
    }

    #[test]
    fn spectral_drift_tracks_pairwise_along_a_path() {
        let lat = ModeLattice::new(1, 3).unwrap();
        let drifts = [
            DriftSpec::Kuramoto { kappa: 2.0 },
            DriftSpec::SmallMeanField(SmallMeanField::double_well(1.3, 0.05).unwrap()),
        ];
        for drift in &drifts {
            let mut state = start(64, 3, lat);
            let noise = NoiseStream::new(5, 0);
            for k in 0..100u32 {
                let a = eval_drift_on_particles(drift, &state).unwrap();
                let b = eval_drift_pairwise(drift, &state).unwrap();
                let err = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
                assert!(err < 1e-8, "{err}");
                let mut z = vec![0.0; 64];
                for (i, v) in z.iter_mut().enumerate() {
                    noise.normals(i as u32, k, std::slice::from_mut(v));
                }
                state = step_em(&state, drift, 0.005, &z).unwrap();
            }
        }
    }

    #[test]
    fn permuting_particles_and_streams_commutes() {
        let lat = ModeLattice::new(1, 2).unwrap();
        let s = start(30, 4, lat);
        let perm: Vec<usize> = (0..30).map(|i| (i * 7) % 30).collect();
        let permuted: Vec<f64> = perm.iter().map(|&i| s.coords()[i]).collect();
        let sp = EmpiricalMeasure::new(permuted, lat).unwrap();
        let drift = DriftSpec::Kuramoto { kappa: 2.0 };
        let noise = NoiseStream::new(11, 0);
        let mut a = ParticleSystem::new(&drift, &s, noise).unwrap();
        let mut b = ParticleSystem::new(&drift, &sp, noise)
            .unwrap()
            .with_streams(perm.iter().map(|&i| i as u32).collect())
            .unwrap();
        for _ in 0..50 {
            a.advance(0.01).unwrap();
            b.advance(0.01).unwrap();
        }
        for (k, &i) in perm.iter().enumerate() {
            assert_eq!(a.coords()[i], b.coords()[k]);
        }
    }
}
