use num_complex::Complex64 as C;
use std::f64::consts::{PI, TAU};

use crate::drift::DriftSpec;
use crate::spectral::{ModeLattice, Product};

/// Sparse rows of a linear mean-field kernel: `(target, [(source, B̂)])`,
/// where the source index points at `q^{-m}`.
type KernelRows = Vec<(usize, Vec<(usize, C)>)>;

/// Mode-space pieces of the Fokker-Planck operator and its linearisations.
///
/// All arrays hold lattice coefficients. The diffusion `−2π²|n|²` is kept
/// separate so integrators can treat it exactly.
#[derive(Clone, Debug)]
pub(crate) struct Galerkin {
    dim: usize,
    /// `2π n_j` per component.
    k: Vec<Vec<f64>>,
    /// `2π²|n|²`.
    pub(crate) diffusion: Vec<f64>,
    /// Per component, the multiplier of `q^n` in `δb_j(q)^n` (convolution drifts).
    conv: Option<Vec<Vec<C>>>,
    /// Forward and transposed kernel rows per component.
    kernel: Option<(Vec<KernelRows>, Vec<KernelRows>)>,
    b0: Vec<Vec<C>>,
    product: Product,
    grid: [Vec<C>; 4],
    scratch: Vec<C>,
}

impl Galerkin {
    pub(crate) fn new(drift: &DriftSpec, lattice: ModeLattice, dealias: bool) -> Self {
        let d = lattice.dim();
        let l = lattice.len();
        let k: Vec<Vec<f64>> = (0..d)
            .map(|j| (0..l).map(|i| TAU * lattice.component(i, j) as f64).collect())
            .collect();
        let diffusion = (0..l).map(|i| 2.0 * PI * PI * lattice.norm_sq(i) as f64).collect();
        let mut conv = None;
        let mut kernel = None;
        let mut b0 = vec![vec![C::default(); l]; d];
        if let Some((pot, kappa)) = drift.as_convolution() {
            conv = Some(
                (0..d)
                    .map(|j| {
                        (0..l)
                            .map(|i| C::new(0.0, -kappa * k[j][i] * pot.coeff(&lattice.mode(i))))
                            .collect()
                    })
                    .collect(),
            );
        } else if let DriftSpec::SmallMeanField(s) = drift {
            let kl = s.kernel_lattice();
            let kn = kl.len();
            let forward = (0..d)
                .map(|j| kernel_rows(lattice, kl, |n, m| s.kernel(j)[n * kn + m] * s.epsilon()))
                .collect();
            let adjoint = (0..d)
                .map(|j| kernel_rows(lattice, kl, |n, m| s.kernel(j)[m * kn + n] * s.epsilon()))
                .collect();
            kernel = Some((forward, adjoint));
            for (j, f) in s.b0().iter().enumerate() {
                b0[j] = f.resample(lattice).expect("same dimension").into_coeffs();
            }
        }
        let product = if dealias { Product::new(lattice) } else { Product::aliased(lattice) };
        Self {
            dim: d,
            k,
            diffusion,
            conv,
            kernel,
            b0,
            product,
            grid: Default::default(),
            scratch: vec![C::default(); l],
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.diffusion.len()
    }

    /// `δb_j(q)`, the measure-dependent part of component `j`.
    pub(crate) fn linear_drift(&self, q: &[C], j: usize, out: &mut [C]) {
        if let Some(conv) = &self.conv {
            for ((o, c), qn) in out.iter_mut().zip(&conv[j]).zip(q) {
                *o = c * qn;
            }
            return;
        }
        out.iter_mut().for_each(|o| *o = C::default());
        if let Some((kernel, _)) = &self.kernel {
            apply_rows(&kernel[j], q, out);
        }
    }

    /// `b_j(m) = b₀_j + δb_j(m)`.
    pub(crate) fn drift(&self, m: &[C], j: usize, out: &mut [C]) {
        self.linear_drift(m, j, out);
        for (o, b) in out.iter_mut().zip(&self.b0[j]) {
            *o += b;
        }
    }

    /// Adds `−Σ_j i2πn_j F_j` to `out`, where `F_j` has grid values in `grid[0]`.
    fn add_divergence(&mut self, j: usize, out: &mut [C]) {
        let mut g = std::mem::take(&mut self.grid[0]);
        self.product.modes(&mut g, &mut self.scratch);
        self.grid[0] = g;
        for ((o, f), k) in out.iter_mut().zip(&self.scratch).zip(&self.k[j]) {
            *o += C::new(0.0, -k) * f;
        }
    }

    fn values(&mut self, slot: usize, coeffs: &[C]) {
        let mut g = std::mem::take(&mut self.grid[slot]);
        self.product.values(coeffs, &mut g);
        self.grid[slot] = g;
    }

    /// `−div(m b(m))`, the nonlinear Fokker-Planck term.
    pub(crate) fn fp_nonlinear(&mut self, m: &[C], out: &mut [C]) {
        out.iter_mut().for_each(|o| *o = C::default());
        let mut b = vec![C::default(); self.len()];
        self.values(1, m);
        for j in 0..self.dim {
            self.drift(m, j, &mut b);
            self.values(2, &b);
            let [g0, g1, g2, _] = &mut self.grid;
            g0.clear();
            g0.extend(g1.iter().zip(g2.iter()).map(|(x, y)| x * y));
            self.add_divergence(j, out);
        }
    }

    /// `−div(q b(m) + m δb(q))`, the first-order part of the linearised operator.
    pub(crate) fn tangent_nonlinear(&mut self, m: &[C], q: &[C], out: &mut [C]) {
        out.iter_mut().for_each(|o| *o = C::default());
        let mut b = vec![C::default(); self.len()];
        self.values(1, m);
        self.values(2, q);
        for j in 0..self.dim {
            self.drift(m, j, &mut b);
            self.values(3, &b);
            self.linear_drift(q, j, &mut b);
            let mut g = std::mem::take(&mut self.grid[0]);
            self.product.values(&b, &mut g);
            let [_, gm, gq, gb] = &self.grid;
            for (((v, m), q), bm) in g.iter_mut().zip(gm).zip(gq).zip(gb) {
                *v = q * bm + m * *v;
            }
            self.grid[0] = g;
            self.add_divergence(j, out);
        }
    }

    /// Adds `−div(q_a δb(q_b) + q_b δb(q_a))` to `out`.
    pub(crate) fn add_second_source(&mut self, qa: &[C], qb: &[C], out: &mut [C]) {
        let mut b = vec![C::default(); self.len()];
        self.values(1, qa);
        self.values(2, qb);
        for j in 0..self.dim {
            self.linear_drift(qb, j, &mut b);
            self.values(3, &b);
            self.linear_drift(qa, j, &mut b);
            let mut g = std::mem::take(&mut self.grid[0]);
            self.product.values(&b, &mut g);
            let [_, ga, gb, dbb] = &self.grid;
            for (((v, a), bq), db) in g.iter_mut().zip(ga).zip(gb).zip(dbb) {
                *v = a * db + bq * *v;
            }
            self.grid[0] = g;
            self.add_divergence(j, out);
        }
    }

    /// `Σ_j V_j ∂_j w`, with `V` given per component in mode space.
    pub(crate) fn transport(&mut self, v: &[Vec<C>], w: &[C], out: &mut [C]) {
        out.iter_mut().for_each(|o| *o = C::default());
        let mut dw = vec![C::default(); self.len()];
        for j in 0..self.dim {
            for ((d, x), k) in dw.iter_mut().zip(w).zip(&self.k[j]) {
                *d = C::new(0.0, *k) * x;
            }
            self.values(1, &dw);
            self.values(2, &v[j]);
            let mut g = std::mem::take(&mut self.grid[0]);
            g.clear();
            g.extend(self.grid[1].iter().zip(&self.grid[2]).map(|(a, b)| a * b));
            self.product.modes(&mut g, &mut self.scratch);
            self.grid[0] = g;
            for (o, s) in out.iter_mut().zip(&self.scratch) {
                *o += s;
            }
        }
    }

    /// Adds the adjoint mean-field term `∫ δb/δm(y, p)(x)·∇w(y) p(dy)` of the
    /// drift linearised at `p`.
    pub(crate) fn add_adjoint_nonlocal(&mut self, p: &[C], w: &[C], out: &mut [C]) {
        let l = self.len();
        let mut dw = vec![C::default(); l];
        let mut term = vec![C::default(); l];
        self.values(2, p);
        for j in 0..self.dim {
            for ((d, x), k) in dw.iter_mut().zip(w).zip(&self.k[j]) {
                *d = C::new(0.0, *k) * x;
            }
            self.values(1, &dw);
            let mut g = std::mem::take(&mut self.grid[0]);
            g.clear();
            g.extend(self.grid[1].iter().zip(&self.grid[2]).map(|(a, b)| a * b));
            self.product.modes(&mut g, &mut self.scratch);
            self.grid[0] = g;
            if let Some(conv) = &self.conv {
                // conv holds −iκ2πn_jŴ^n and the kernel −κ∇W(y − x) flips its sign
                for ((o, s), c) in out.iter_mut().zip(&self.scratch).zip(&conv[j]) {
                    *o -= c * s;
                }
            } else if let Some((_, adjoint)) = &self.kernel {
                apply_rows(&adjoint[j], &self.scratch, &mut term);
                for (o, t) in out.iter_mut().zip(&term) {
                    *o += t;
                }
            }
        }
    }

    /// Mean-field drift components for a density.
    pub(crate) fn drift_components(&self, m: &[C]) -> Vec<Vec<C>> {
        (0..self.dim)
            .map(|j| {
                let mut b = vec![C::default(); self.len()];
                self.drift(m, j, &mut b);
                b
            })
            .collect()
    }
}

fn kernel_rows(lattice: ModeLattice, kl: ModeLattice, get: impl Fn(usize, usize) -> C) -> KernelRows {
    (0..kl.len())
        .filter_map(|n| {
            let target = lattice.translate(&kl, n)?;
            let row: Vec<(usize, C)> = (0..kl.len())
                .filter_map(|m| {
                    let b = get(n, m);
                    let src = lattice.translate(&kl, kl.neg_index(m))?;
                    (b != C::default()).then_some((src, b))
                })
                .collect();
            (!row.is_empty()).then_some((target, row))
        })
        .collect()
}

/// Overwrites `out` with `Σ_m B̂(n, m) q^{-m}`; untouched rows are zero.
fn apply_rows(rows: &KernelRows, q: &[C], out: &mut [C]) {
    out.iter_mut().for_each(|o| *o = C::default());
    for (target, row) in rows {
        out[*target] = row.iter().map(|(src, b)| b * q[*src]).sum();
    }
}
