use nalgebra::DMatrix;
use num_complex::Complex64 as C;

use super::galerkin::Galerkin;
use crate::drift::DriftSpec;
use crate::error::{invalid, Result};
use crate::spectral::SpectralField;

fn check(drift: &DriftSpec, m: &SpectralField) -> Result<()> {
    drift.validate()?;
    if m.dim() != drift.dim() {
        return invalid("field and drift dimensions differ");
    }
    Ok(())
}

/// `L_m q = ½Δq − div(q b(·, m)) − div(m δb/δm(q))` on `q`'s lattice.
pub fn apply_linearized(drift: &DriftSpec, m: &SpectralField, q: &SpectralField) -> Result<SpectralField> {
    check(drift, m)?;
    let lat = q.lattice();
    let m = m.resample(lat)?;
    let mut g = Galerkin::new(drift, lat, true);
    let mut out = vec![C::default(); lat.len()];
    g.tangent_nonlinear(m.coeffs(), q.coeffs(), &mut out);
    for ((o, d), c) in out.iter_mut().zip(&g.diffusion).zip(q.coeffs()) {
        *o -= c * d;
    }
    Ok(SpectralField::signed_unchecked(lat, out))
}

/// Matrix of `L_m` on the nonzero modes of `m`'s lattice, in lattice order
/// with the zero mode removed.
pub fn galerkin_matrix(drift: &DriftSpec, m: &SpectralField) -> Result<DMatrix<C>> {
    check(drift, m)?;
    let lat = m.lattice();
    let (l, z) = (lat.len(), lat.zero_index());
    let mut g = Galerkin::new(drift, lat, true);
    let mut mat = DMatrix::zeros(l - 1, l - 1);
    let mut e = vec![C::default(); l];
    let mut col = vec![C::default(); l];
    let skip = |i: usize| if i < z { i } else { i - 1 };
    for k in (0..l).filter(|&k| k != z) {
        e[k] = C::new(1.0, 0.0);
        g.tangent_nonlinear(m.coeffs(), &e, &mut col);
        col[k] -= g.diffusion[k];
        for i in (0..l).filter(|&i| i != z) {
            mat[(skip(i), skip(k))] = col[i];
        }
        e[k] = C::default();
    }
    Ok(mat)
}

/// Eigenvalues of [`galerkin_matrix`], by decreasing real part.
pub fn dense_spectrum(drift: &DriftSpec, m: &SpectralField) -> Result<Vec<C>> {
    let mat = galerkin_matrix(drift, m)?;
    let (_, t) = mat.schur().unpack();
    let mut ev: Vec<C> = t.diagonal().iter().copied().collect();
    ev.sort_by(|a, b| b.re.total_cmp(&a.re));
    Ok(ev)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drift::{uniform_linearization_spectrum, PotentialSpec};
    use crate::spectral::ModeLattice;
    use std::f64::consts::TAU;

    #[test]
    fn uniform_spectrum_is_diagonal() {
        let lat = ModeLattice::new(1, 6).unwrap();
        let pot = PotentialSpec::cosine(0.2);
        let drift = DriftSpec::ConvolutionGradient { potential: pot.clone(), kappa: 1.0 };
        let ev = dense_spectrum(&drift, &SpectralField::uniform(lat)).unwrap();
        let want = uniform_linearization_spectrum(&pot, 1.0, lat);
        assert!((ev[0].re + want.gap).abs() < 1e-10, "{} {}", ev[0], want.gap);
        assert!(ev.iter().all(|e| e.im.abs() < 1e-10));
    }

    #[test]
    fn profile_derivative_is_a_zero_mode() {
        let lat = ModeLattice::new(1, 24).unwrap();
        let prof = super::super::stationary_kuramoto_profile(2.0, lat).unwrap().p;
        let dp = prof.map_modes(|i, c| C::new(0.0, TAU * lat.component(i, 0) as f64) * c).into_signed();
        let r = apply_linearized(&DriftSpec::Kuramoto { kappa: 2.0 }, &prof, &dp).unwrap();
        let n = crate::spectral::sobolev_dual_norm(&r, &SpectralField::zero(lat), 2.0).unwrap();
        assert!(n < 1e-7, "{n}");
        let ev = dense_spectrum(&DriftSpec::Kuramoto { kappa: 2.0 }, &prof).unwrap();
        assert!(ev[0].norm() < 1e-8, "{}", ev[0]);
        assert!(ev[1].re < -0.1, "{}", ev[1]);
    }
}
