use std::sync::OnceLock;

use super::hyperdual::{Cx, Scalar};
use super::FunctionalSpec;
use crate::error::{invalid, Result};
use crate::spectral::{fejer_weight, ModeLattice};

const BUMP_CELLS: usize = 1 << 14;

fn bump(u: f64) -> f64 {
    if u.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - u * u)).exp()
    }
}

/// Cumulative distribution of the normalised bump on the cell edges of `[-1, 1]`.
fn bump_cdf() -> &'static (Vec<f64>, f64) {
    static TABLE: OnceLock<(Vec<f64>, f64)> = OnceLock::new();
    TABLE.get_or_init(|| {
        let h = 2.0 / BUMP_CELLS as f64;
        let mut cdf = Vec::with_capacity(BUMP_CELLS + 1);
        let mut acc = 0.0;
        cdf.push(0.0);
        for k in 0..BUMP_CELLS {
            let a = -1.0 + k as f64 * h;
            // Simpson on each cell
            acc += h / 6.0 * (bump(a) + 4.0 * bump(a + 0.5 * h) + bump(a + h));
            cdf.push(acc);
        }
        let z = acc;
        cdf.iter_mut().for_each(|v| *v /= z);
        (cdf, z)
    })
}

/// The mollifier `ρ(u) ∝ exp(−1/(1−u²))` on `[-1, 1]`, normalised.
pub fn bump_density(u: f64) -> f64 {
    bump(u) / bump_cdf().1
}

fn bump_quantile(p: f64) -> f64 {
    let cdf = &bump_cdf().0;
    let k = cdf.partition_point(|&v| v < p).clamp(1, BUMP_CELLS);
    let (lo, hi) = (cdf[k - 1], cdf[k]);
    let t = if hi > lo { (p - lo) / (hi - lo) } else { 0.5 };
    -1.0 + 2.0 * (k as f64 - 1.0 + t) / BUMP_CELLS as f64
}

/// Kronecker sequence with the generalised golden ratio in `dim` dimensions.
fn kronecker(dim: usize, count: usize) -> Vec<f64> {
    let mut phi = 2.0f64;
    for _ in 0..64 {
        phi = (1.0 + phi).powf(1.0 / (dim as f64 + 1.0));
    }
    let alpha: Vec<f64> = (1..=dim).map(|j| phi.powi(-(j as i32)).fract()).collect();
    let mut out = Vec::with_capacity(dim * count);
    for i in 1..=count {
        for a in &alpha {
            out.push((0.5 + i as f64 * a).fract());
        }
    }
    out
}

/// `Φ_{N,ε}(μ) = ∫ Φ(ε Leb + (1−ε)(F_N μ − F_N y)) ∏ ρ(y^k) dy`, where `F_N`
/// is Fejér smoothing and the real perturbations `y^k`, one per nonzero mode
/// `max_j |k_j| < N`, are drawn from a bump of half-width `(ε ∧ η)/2`. The
/// radius `η = ε / ((1−ε)(N^d − 1))` keeps every smoothed density above `ε/2`.
///
/// The integral is computed by quasi-Monte-Carlo on a Kronecker sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct Mollified {
    inner: FunctionalSpec,
    n_moll: usize,
    eps: f64,
    eta: f64,
    lattice: ModeLattice,
    weights: Vec<f64>,
    /// Lattice indices of the perturbed modes.
    perturbed: Vec<usize>,
    /// `nodes × perturbed.len()` perturbation values.
    nodes: Vec<f64>,
}

impl Mollified {
    pub fn new(inner: FunctionalSpec, n_moll: usize, eps: f64, node_count: usize) -> Result<Self> {
        if n_moll < 2 {
            return invalid("mollification order must be at least 2");
        }
        if !(eps > 0.0 && eps < 0.5) {
            return invalid(format!("mollification ε must lie in (0, 1/2), got {eps}"));
        }
        if node_count == 0 {
            return invalid("need at least one quadrature node");
        }
        let d = inner.dim();
        let lattice = ModeLattice::new(d, n_moll - 1)?;
        let nd = (n_moll as f64).powi(d as i32);
        let eta = eps / ((1.0 - eps) * (nd - 1.0));
        let half = 0.5 * eps.min(eta);
        let weights = (0..lattice.len()).map(|i| fejer_weight(&lattice.mode(i), n_moll)).collect();
        let perturbed: Vec<usize> = (0..lattice.len()).filter(|&i| i != lattice.zero_index()).collect();
        let nodes = kronecker(perturbed.len(), node_count)
            .into_iter()
            .map(|u| half * bump_quantile(u))
            .collect();
        Ok(Self { inner, n_moll, eps, eta, lattice, weights, perturbed, nodes })
    }

    /// Same functional integrated against explicit perturbation samples,
    /// each row holding one value per nonzero mode in lattice order; the
    /// result is the plain average over rows.
    pub fn with_nodes(mut self, nodes: Vec<f64>) -> Result<Self> {
        if nodes.is_empty() || nodes.len() % self.perturbed.len() != 0 {
            return invalid("node array does not match the perturbation dimension");
        }
        self.nodes = nodes;
        Ok(self)
    }

    pub fn inner(&self) -> &FunctionalSpec {
        &self.inner
    }

    pub fn order(&self) -> usize {
        self.n_moll
    }

    pub fn epsilon(&self) -> f64 {
        self.eps
    }

    /// Safety radius `η_{ε,N}`.
    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Half-width of the perturbation support, `(ε ∧ η)/2`.
    pub fn half_width(&self) -> f64 {
        0.5 * self.eps.min(self.eta)
    }

    pub fn perturbation_dim(&self) -> usize {
        self.perturbed.len()
    }

    pub fn lattice(&self) -> ModeLattice {
        self.lattice
    }

    pub(super) fn value_t<T: Scalar>(&self, c: &[Cx<T>]) -> T {
        let il = self.inner.lattice();
        let lat = self.lattice;
        let z = lat.zero_index();
        // inner-lattice slot of every mollifier mode
        let slots: Vec<Option<usize>> = (0..lat.len()).map(|i| il.translate(&lat, i)).collect();
        let mut base = vec![Cx::<T>::cst(0.0, 0.0); il.len()];
        for i in 0..lat.len() {
            if let Some(s) = slots[i] {
                base[s] = if i == z {
                    Cx::new(c[z].re * (1.0 - self.eps) + self.eps, c[z].im * (1.0 - self.eps))
                } else {
                    c[i].scale(T::cst((1.0 - self.eps) * self.weights[i]))
                };
            }
        }
        let dim = self.perturbed.len();
        let count = self.nodes.len() / dim;
        let mut acc = T::cst(0.0);
        let mut work = base.clone();
        let mut y = vec![0.0; lat.len()];
        for row in self.nodes.chunks_exact(dim) {
            for (k, &i) in self.perturbed.iter().enumerate() {
                y[i] = row[k];
            }
            work.clone_from(&base);
            for &i in &self.perturbed {
                if let Some(s) = slots[i] {
                    let shift = (1.0 - self.eps) * self.weights[i] * 0.5 * (y[i] + y[lat.neg_index(i)]);
                    work[s].re = work[s].re + (-shift);
                }
            }
            acc = acc + self.inner.value_t(&work);
        }
        acc * (1.0 / count as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_is_normalised_and_symmetric() {
        assert!((bump_cdf().1 - 0.443_993_816_168_079_4).abs() < 1e-12);
        assert!(bump_quantile(0.5).abs() < 1e-12);
        assert!((bump_quantile(0.2) + bump_quantile(0.8)).abs() < 1e-9);
        assert!(bump_quantile(0.999_999) < 1.0);
    }

    #[test]
    fn kronecker_points_fill_the_cube() {
        let pts = kronecker(3, 4096);
        for j in 0..3 {
            let mean: f64 = pts.iter().skip(j).step_by(3).sum::<f64>() / 4096.0;
            assert!((mean - 0.5).abs() < 1e-3);
        }
    }
}
