use super::hyperdual::{Cx, Scalar};
use super::smoothstep;
use crate::spectral::SpectralField;

pub(super) fn linear<T: Scalar>(g: &SpectralField, c: &[Cx<T>]) -> T {
    g.coeffs()
        .iter()
        .zip(c)
        .fold(T::cst(0.0), |acc, (gn, mn)| acc + mn.re * gn.re + mn.im * gn.im)
}

pub(super) fn sobolev<T: Scalar>(nu0: &SpectralField, s: f64, c: &[Cx<T>]) -> T {
    let lat = nu0.lattice();
    nu0.coeffs()
        .iter()
        .zip(c)
        .enumerate()
        .fold(T::cst(0.0), |acc, (i, (nu, mu))| {
            let w = (1.0 + lat.norm_sq(i) as f64).powf(-s);
            acc + (*mu - Cx::cst(nu.re, nu.im)).norm_sqr() * w
        })
}

pub(super) fn kuramoto<T: Scalar>(profile: &SpectralField, s: f64, delta: f64, c: &[Cx<T>]) -> T {
    let lat = profile.lattice();
    let z = lat.zero_index();
    let m1 = c[z + 1];
    let r = m1.norm_sqr().sqrt();
    let phi = smoothstep(r, delta);
    if phi.real() == 0.0 && r.real() <= 0.5 * delta {
        return T::cst(1.0);
    }
    // unit phase u = μ¹/|μ¹|; the aligned modes are μ^n conj(u)^n
    let u = Cx::new(m1.re / r, m1.im / r);
    let mut un = Cx::<T>::cst(1.0, 0.0);
    let p0 = profile.coeffs()[z];
    let mut dist = (c[z] - Cx::cst(p0.re, p0.im)).norm_sqr();
    for n in 1..=lat.cutoff() {
        un = un * u;
        let w = (1.0 + (n * n) as f64).powf(-s);
        let p = profile.coeffs()[z + n];
        let aligned = c[z + n] * un.conj();
        let aligned_neg = c[z - n] * un;
        dist = dist
            + (aligned - Cx::cst(p.re, p.im)).norm_sqr() * w
            + (aligned_neg - Cx::cst(p.re, -p.im)).norm_sqr() * w;
    }
    phi * dist + (T::cst(1.0) - phi)
}
