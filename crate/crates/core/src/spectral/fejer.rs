use super::{field::Measure, lattice::ModeLattice, SpectralField};
use crate::error::{invalid, Result};

/// `∏_j (1 − |n_j|/N)` inside the box `max_j |n_j| < N`, zero outside.
pub fn fejer_weight(mode: &[i64], n: usize) -> f64 {
    mode.iter()
        .map(|&k| {
            let a = k.unsigned_abs() as f64;
            if a < n as f64 {
                1.0 - a / n as f64
            } else {
                0.0
            }
        })
        .product()
}

/// Convolution with the `d`-dimensional Fejér kernel of order `n`.
///
/// The result lives on the lattice of cutoff `max(n − 1, 1)` and is a
/// nonnegative density whenever `mu` is a probability measure.
pub fn fejer_smooth<M: Measure + ?Sized>(mu: &M, n: usize) -> Result<SpectralField> {
    if n < 1 {
        return invalid("Fejér order must be at least 1");
    }
    if let Some(known) = mu.known_cutoff() {
        if known + 1 < n {
            return invalid(format!(
                "Fejér order {n} needs modes up to {}, source has {known}",
                n - 1
            ));
        }
    }
    let lattice = ModeLattice::new(mu.dim(), (n - 1).max(1))?;
    let src = mu.modes_on(lattice)?;
    let coeffs = src
        .coeffs()
        .iter()
        .enumerate()
        .map(|(i, &c)| c * fejer_weight(&lattice.mode(i), n))
        .collect();
    Ok(SpectralField::density_unchecked(lattice, coeffs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{evaluate_on_grid, EmpiricalMeasure};
    use std::f64::consts::TAU;

    #[test]
    fn dirac_at_order_two() {
        let lat = ModeLattice::new(1, 4).unwrap();
        let dirac = EmpiricalMeasure::new(vec![0.0], lat).unwrap();
        let f = fejer_smooth(&dirac, 2).unwrap();
        for k in 0..9 {
            let x = k as f64 / 9.0;
            assert!((f.eval_at(&[x]) - (1.0 + (TAU * x).cos())).abs() < 1e-14);
        }
    }

    #[test]
    fn uniform_is_fixed_and_order_one_is_uniform() {
        let lat = ModeLattice::new(2, 3).unwrap();
        let u = SpectralField::uniform(lat);
        let f = fejer_smooth(&u, 4).unwrap();
        assert_eq!(f, SpectralField::uniform(lat));
        let pts = EmpiricalMeasure::new(vec![0.1, 0.7, 0.3, 0.2], lat).unwrap();
        let one = fejer_smooth(&pts, 1).unwrap();
        assert_eq!(one.coeffs().iter().filter(|c| c.norm() > 0.0).count(), 1);
        assert!(fejer_smooth(&u, 0).is_err());
        assert!(fejer_smooth(&u, 6).is_err());
    }

    #[test]
    fn positive_on_fine_grids() {
        let lat = ModeLattice::new(1, 2).unwrap();
        let pts = EmpiricalMeasure::new(vec![0.0, 0.01, 0.5, 0.77], lat).unwrap();
        let f = fejer_smooth(&pts, 12).unwrap();
        let v = evaluate_on_grid(&f, 48).unwrap();
        assert!(v.iter().all(|&x| x >= -1e-14));
    }
}
