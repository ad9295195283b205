use serde::Serialize;
use std::f64::consts::PI;

use super::PotentialSpec;
use crate::spectral::ModeLattice;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Spectrum {
    /// `(n, λ_n)` for every nonzero lattice mode, in lattice order.
    pub eigenvalues: Vec<(Vec<i64>, f64)>,
    /// `min_n −λ_n`.
    pub gap: f64,
}

/// Eigenvalues `−2π²|n|²(1 + 2κŴ^n)` of `½Δ + κΔ(W ⋆ ·)`, the linearisation
/// of the nonlinear Fokker-Planck operator at the uniform measure.
pub fn uniform_linearization_spectrum(potential: &PotentialSpec, kappa: f64, lattice: ModeLattice) -> Spectrum {
    let eigenvalues: Vec<(Vec<i64>, f64)> = (0..lattice.len())
        .filter(|&i| i != lattice.zero_index())
        .map(|i| {
            let n = lattice.mode(i);
            let w = potential.coeff(&n);
            (n, -2.0 * PI * PI * lattice.norm_sq(i) as f64 * (1.0 + 2.0 * kappa * w))
        })
        .collect();
    let gap = eigenvalues.iter().map(|(_, l)| -l).fold(f64::INFINITY, f64::min);
    Spectrum { eigenvalues, gap }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heat_gap() {
        let lat = ModeLattice::new(1, 16).unwrap();
        let s = uniform_linearization_spectrum(&PotentialSpec::zero(1), 1.0, lat);
        assert_eq!(s.gap, 2.0 * PI * PI);
        assert_eq!(s.eigenvalues.len(), 32);
    }

    #[test]
    fn h_stable_only_accelerates() {
        let lat = ModeLattice::new(2, 4).unwrap();
        let pot = PotentialSpec::from_modes(2, &[(vec![1, 1], 0.2), (vec![0, 2], 0.05)]).unwrap();
        for (n, l) in uniform_linearization_spectrum(&pot, 2.0, lat).eigenvalues {
            let n2: i64 = n.iter().map(|k| k * k).sum();
            assert!(l <= -2.0 * PI * PI * n2 as f64);
        }
    }
}
