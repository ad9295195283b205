use serde::Serialize;

use crate::error::{invalid, Result};
use crate::spectral::ModeLattice;

/// An even interaction potential given by its real Fourier coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialSpec {
    lattice: ModeLattice,
    w_hat: Vec<f64>,
}

impl PotentialSpec {
    pub fn new(lattice: ModeLattice, w_hat: Vec<f64>) -> Result<Self> {
        if w_hat.len() != lattice.len() {
            return invalid(format!("expected {} coefficients, got {}", lattice.len(), w_hat.len()));
        }
        if w_hat.iter().any(|w| !w.is_finite()) {
            return invalid("non-finite potential coefficient");
        }
        for i in 0..lattice.len() {
            let j = lattice.neg_index(i);
            if (w_hat[i] - w_hat[j]).abs() > 1e-14 * (1.0 + w_hat[i].abs()) {
                return invalid(format!("potential is not even at mode {:?}", lattice.mode(i)));
            }
        }
        Ok(Self { lattice, w_hat })
    }

    /// Potential from sparse `(mode, Ŵ)` pairs; each mode's negative is set too.
    pub fn from_modes(dim: usize, modes: &[(Vec<i64>, f64)]) -> Result<Self> {
        let cutoff = modes
            .iter()
            .flat_map(|(n, _)| n.iter().map(|k| k.unsigned_abs() as usize))
            .max()
            .unwrap_or(1)
            .max(1);
        let lattice = ModeLattice::new(dim, cutoff)?;
        let mut w = vec![0.0; lattice.len()];
        for (n, v) in modes {
            let Some(i) = lattice.index(n) else {
                return invalid(format!("mode {n:?} does not have dimension {dim}"));
            };
            w[i] = *v;
            w[lattice.neg_index(i)] = *v;
        }
        Self::new(lattice, w)
    }

    /// `W(x) = a cos(2πx)` in `d = 1`, so `Ŵ^{±1} = a/2`.
    pub fn cosine(a: f64) -> Self {
        Self::from_modes(1, &[(vec![1], a / 2.0)]).expect("valid cosine potential")
    }

    /// The Kuramoto potential `W(x) = −cos(2πx)`.
    pub fn kuramoto() -> Self {
        Self::cosine(-1.0)
    }

    pub fn zero(dim: usize) -> Self {
        let lattice = ModeLattice::new(dim, 1).expect("valid lattice");
        Self { lattice, w_hat: vec![0.0; lattice.len()] }
    }

    pub fn lattice(&self) -> ModeLattice {
        self.lattice
    }

    pub fn dim(&self) -> usize {
        self.lattice.dim()
    }

    pub fn w_hat(&self) -> &[f64] {
        &self.w_hat
    }

    /// `Ŵ^n`, zero outside the stored lattice.
    pub fn coeff(&self, mode: &[i64]) -> f64 {
        self.lattice.index(mode).map_or(0.0, |i| self.w_hat[i])
    }

    /// Largest `max_j |n_j|` with a nonzero coefficient.
    pub fn support(&self) -> usize {
        (0..self.lattice.len())
            .filter(|&i| self.w_hat[i] != 0.0 && i != self.lattice.zero_index())
            .map(|i| self.lattice.sup_norm(i) as usize)
            .max()
            .unwrap_or(0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HStability {
    pub h_stable: bool,
    pub worst_mode: Vec<i64>,
    pub worst_value: f64,
}

/// `W` is H-stable when every `Ŵ^n ≥ −1e-14`.
pub fn h_stability_check(potential: &PotentialSpec) -> HStability {
    let lat = potential.lattice();
    let (idx, &worst) = potential
        .w_hat
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
        .expect("nonempty lattice");
    HStability {
        h_stable: worst >= -1e-14,
        worst_mode: lat.mode(idx),
        worst_value: worst,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cosine_is_h_stable_kuramoto_is_not() {
        let c = h_stability_check(&PotentialSpec::cosine(1.0));
        assert!(c.h_stable);
        assert_eq!(c.worst_value, 0.0);
        let k = h_stability_check(&PotentialSpec::kuramoto());
        assert!(!k.h_stable);
        assert_eq!(k.worst_value, -0.5);
        assert_eq!(k.worst_mode.iter().map(|n| n.abs()).collect::<Vec<_>>(), vec![1]);
    }

    #[test]
    fn rejects_odd_potentials() {
        let lat = ModeLattice::new(1, 1).unwrap();
        assert!(PotentialSpec::new(lat, vec![0.1, 0.0, 0.2]).is_err());
        assert_eq!(PotentialSpec::cosine(0.5).support(), 1);
        assert_eq!(PotentialSpec::zero(2).support(), 0);
    }
}
