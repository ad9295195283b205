use num_complex::Complex64;

use super::hyperdual::{Cx, HyperDual};
use super::FunctionalSpec;
use crate::error::{invalid, Result};
use crate::spectral::{Measure, ModeLattice, SpectralField};

/// Coefficients `S^{a,b}` of a function of `(y₁, y₂)`:
/// `S(y₁, y₂) = Σ_{a,b} S^{a,b} e^{i2π(a·y₁ + b·y₂)}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModePairArray {
    lattice: ModeLattice,
    data: Vec<Complex64>,
}

impl ModePairArray {
    pub fn zeros(lattice: ModeLattice) -> Self {
        Self { lattice, data: vec![Complex64::default(); lattice.len() * lattice.len()] }
    }

    pub fn lattice(&self) -> ModeLattice {
        self.lattice
    }

    pub fn get(&self, a: usize, b: usize) -> Complex64 {
        self.data[a * self.lattice.len() + b]
    }

    fn set(&mut self, a: usize, b: usize, v: Complex64) {
        let l = self.lattice.len();
        self.data[a * l + b] = v;
    }

    /// `∫∫ S(y₁, y₂) q₁(dy₁) q₂(dy₂) = Σ S^{a,b} q₁^{-a} q₂^{-b}`.
    pub fn pair(&self, q1: &SpectralField, q2: &SpectralField) -> Result<f64> {
        let l = self.lattice.len();
        let (q1, q2) = (q1.resample(self.lattice)?, q2.resample(self.lattice)?);
        let mut s = Complex64::default();
        for a in 0..l {
            let qa = q1.coeffs()[self.lattice.neg_index(a)];
            for b in 0..l {
                s += self.data[a * l + b] * qa * q2.coeffs()[self.lattice.neg_index(b)];
            }
        }
        Ok(s.re)
    }

    /// Largest `|S^{a,b} − S^{b,a}|`.
    pub fn asymmetry(&self) -> f64 {
        let l = self.lattice.len();
        (0..l)
            .flat_map(|a| (0..l).map(move |b| (a, b)))
            .map(|(a, b)| (self.get(a, b) - self.get(b, a)).norm())
            .fold(0.0, f64::max)
    }

    /// Subtracts row and column means against `μ` so that
    /// `Σ_b S^{a,b} μ^{-b} = 0` and `Σ_a S^{a,b} μ^{-a} = 0`, assuming `μ⁰ = 1`.
    fn centre(&mut self, mu: &SpectralField) {
        let lat = self.lattice;
        let (l, z) = (lat.len(), lat.zero_index());
        let mneg = |i: usize| mu.coeffs()[lat.neg_index(i)];
        for a in (0..l).filter(|&a| a != z) {
            let row: Complex64 = (0..l).filter(|&b| b != z).map(|b| self.get(a, b) * mneg(b)).sum();
            self.set(a, z, -row);
            let col: Complex64 = (0..l).filter(|&b| b != z).map(|b| self.get(b, a) * mneg(b)).sum();
            self.set(z, a, -col);
        }
        let mut corner = Complex64::default();
        for a in (0..l).filter(|&a| a != z) {
            for b in (0..l).filter(|&b| b != z) {
                corner += self.get(a, b) * mneg(a) * mneg(b);
            }
        }
        self.set(z, z, corner);
    }
}

/// `Φ(μ)`, `δΦ/δm(μ)(·)` and `δ²Φ/δm²(μ)(·,·)`, both derivatives normalised
/// to integrate to zero against `μ` in each variable.
#[derive(Clone, Debug, PartialEq)]
pub struct FunctionalDerivatives {
    pub value: f64,
    pub first: SpectralField,
    pub second: ModePairArray,
}

fn lift(mu: &SpectralField, q1: Option<&SpectralField>, q2: Option<&SpectralField>) -> Vec<Cx<HyperDual>> {
    let zero = Complex64::default();
    (0..mu.lattice().len())
        .map(|i| {
            let m = mu.coeffs()[i];
            let a = q1.map_or(zero, |q| q.coeffs()[i]);
            let b = q2.map_or(zero, |q| q.coeffs()[i]);
            Cx::new(HyperDual::new(m.re, a.re, b.re, 0.0), HyperDual::new(m.im, a.im, b.im, 0.0))
        })
        .collect()
}

/// Real basis directions `2cos(2πa·x)` and `2sin(2πa·x)` for a mode `a`.
fn basis(lat: ModeLattice, a: usize) -> (SpectralField, SpectralField) {
    let mut c = vec![Complex64::default(); lat.len()];
    let mut s = c.clone();
    c[a] = Complex64::new(1.0, 0.0);
    c[lat.neg_index(a)] = Complex64::new(1.0, 0.0);
    s[a] = Complex64::new(0.0, -1.0);
    s[lat.neg_index(a)] = Complex64::new(0.0, 1.0);
    (SpectralField::signed_unchecked(lat, c), SpectralField::signed_unchecked(lat, s))
}

impl FunctionalSpec {
    fn native<M: Measure + ?Sized>(&self, mu: &M) -> Result<SpectralField> {
        if mu.dim() != self.dim() {
            return invalid("measure and functional dimensions differ");
        }
        mu.modes_on(self.lattice())
    }

    /// `Φ(μ)` and the directional derivative `d/dh Φ(μ + h q)` at `h = 0`.
    pub fn directional<M: Measure + ?Sized>(&self, mu: &M, q: &SpectralField) -> Result<(f64, f64)> {
        let m = self.native(mu)?;
        let q = q.resample(self.lattice())?;
        let v = self.value_t(&lift(&m, Some(&q), None));
        Ok((v.a, v.b))
    }

    /// Mixed second directional derivative `∂²/∂h₁∂h₂ Φ(μ + h₁q₁ + h₂q₂)` at 0.
    pub fn bilinear<M: Measure + ?Sized>(&self, mu: &M, q1: &SpectralField, q2: &SpectralField) -> Result<f64> {
        let m = self.native(mu)?;
        let (q1, q2) = (q1.resample(self.lattice())?, q2.resample(self.lattice())?);
        Ok(self.value_t(&lift(&m, Some(&q1), Some(&q2))).d)
    }

    /// Value and both derivatives. Linear and Sobolev functionals use closed
    /// forms; the others are differentiated exactly with hyper-dual numbers.
    pub fn derivatives<M: Measure + ?Sized>(&self, mu: &M) -> Result<FunctionalDerivatives> {
        let m = self.native(mu)?;
        let lat = m.lattice();
        match self {
            FunctionalSpec::Linear { g } => {
                let value = self.value_t(&lift(&m, None, None)).a;
                Ok(finish(value, g.clone(), ModePairArray::zeros(lat), &m))
            }
            FunctionalSpec::SobolevDualSq { s, nu0 } => {
                let value = self.value_t(&lift(&m, None, None)).a;
                let w = |i: usize| (1.0 + lat.norm_sq(i) as f64).powf(-s);
                let first = m.sub(nu0)?.map_modes(|i, c| c * (2.0 * w(i)));
                let mut second = ModePairArray::zeros(lat);
                for a in 0..lat.len() {
                    second.set(a, lat.neg_index(a), Complex64::new(2.0 * w(a), 0.0));
                }
                Ok(finish(value, first, second, &m))
            }
            _ => self.derivatives_generic(&m),
        }
    }

    /// Derivatives by hyper-dual differentiation along the real Fourier basis,
    /// for every variant.
    pub fn derivatives_generic<M: Measure + ?Sized>(&self, mu: &M) -> Result<FunctionalDerivatives> {
        let m = self.native(mu)?;
        let lat = m.lattice();
        let (l, z) = (lat.len(), lat.zero_index());
        let value = self.value_t(&lift(&m, None, None)).a;
        let dirs: Vec<(SpectralField, SpectralField)> = (z + 1..l).map(|a| basis(lat, a)).collect();
        let mut first = vec![Complex64::default(); l];
        for (k, (c, s)) in dirs.iter().enumerate() {
            let dc = self.value_t(&lift(&m, Some(c), None)).b;
            let ds = self.value_t(&lift(&m, Some(s), None)).b;
            let f = Complex64::new(0.5 * dc, -0.5 * ds);
            first[z + 1 + k] = f;
            first[z - 1 - k] = f.conj();
        }
        let mut second = ModePairArray::zeros(lat);
        for (ka, (ca, sa)) in dirs.iter().enumerate() {
            for (kb, (cb, sb)) in dirs.iter().enumerate().skip(ka) {
                let bcc = self.value_t(&lift(&m, Some(ca), Some(cb))).d;
                let bcs = self.value_t(&lift(&m, Some(ca), Some(sb))).d;
                let bsc = self.value_t(&lift(&m, Some(sa), Some(cb))).d;
                let bss = self.value_t(&lift(&m, Some(sa), Some(sb))).d;
                let (a, b) = (z + 1 + ka, z + 1 + kb);
                for sig in [1.0, -1.0] {
                    for tau in [1.0, -1.0] {
                        // coefficient of q1^{σa} q2^{τb}, which is S^{−σa,−τb}
                        let coef = Complex64::new(bcc - sig * tau * bss, tau * bcs + sig * bsc) * 0.25;
                        let ia = if sig > 0.0 { lat.neg_index(a) } else { a };
                        let ib = if tau > 0.0 { lat.neg_index(b) } else { b };
                        second.set(ia, ib, coef);
                        second.set(ib, ia, coef);
                    }
                }
            }
        }
        let first = SpectralField::signed_unchecked(lat, first);
        Ok(finish(value, first, second, &m))
    }
}

fn finish(value: f64, first: SpectralField, mut second: ModePairArray, mu: &SpectralField) -> FunctionalDerivatives {
    let lat = mu.lattice();
    let z = lat.zero_index();
    let mut f = first.into_coeffs();
    f[z] = Complex64::default();
    let mean: f64 = f.iter().zip(mu.coeffs()).map(|(a, b)| (a * b.conj()).re).sum();
    f[z] = Complex64::new(-mean, 0.0);
    second.centre(mu);
    FunctionalDerivatives {
        value,
        first: SpectralField::signed_unchecked(lat, f),
        second,
    }
}
