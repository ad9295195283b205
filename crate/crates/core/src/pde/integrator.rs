use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::spectral::ModeLattice;

/// Time-stepping scheme for the diagonal-plus-nonlinear mode systems.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Integrator {
    /// Integrating-factor Runge-Kutta 4 with the heat factor applied exactly.
    IfRk4,
    /// Explicit nonlinearity, implicit diffusion; first order.
    SemiImplicitEuler,
    /// Exponential time differencing RK4 (Cox-Matthews), with the
    /// φ-functions evaluated by contour means.
    Etdrk4,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub lattice: ModeLattice,
    pub dt: f64,
    pub t_end: f64,
    pub integrator: Integrator,
    pub dealias: bool,
    pub record_stride: usize,
}

impl SolverConfig {
    /// ETDRK4, dealiased, recording every step.
    pub fn new(lattice: ModeLattice, dt: f64, t_end: f64) -> Result<Self> {
        let cfg = Self {
            lattice,
            dt,
            t_end,
            integrator: Integrator::Etdrk4,
            dealias: true,
            record_stride: 1,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_t_end(&self, t_end: f64) -> Self {
        Self { t_end, ..self.clone() }
    }

    pub fn with_dt(&self, dt: f64) -> Self {
        Self { dt, ..self.clone() }
    }

    pub fn with_stride(&self, record_stride: usize) -> Self {
        Self { record_stride, ..self.clone() }
    }

    pub fn with_integrator(&self, integrator: Integrator) -> Self {
        Self { integrator, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt <= 0.05) {
            return invalid(format!("dt = {} must lie in (0, 0.05]", self.dt));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return invalid(format!("t_end = {} must be finite and nonnegative", self.t_end));
        }
        if self.record_stride == 0 {
            return invalid("record_stride must be at least 1");
        }
        Ok(())
    }

    /// Number of steps and the step actually taken, which divides `t_end`.
    pub fn steps(&self) -> (usize, f64) {
        if self.t_end == 0.0 {
            return (0, self.dt);
        }
        let n = (self.t_end / self.dt - 1e-9).ceil().max(1.0) as usize;
        (n, self.t_end / n as f64)
    }
}

/// Right-hand side of `y' = −D y + N(t, y)` on a stack of mode blocks.
pub(crate) trait Nonlinear {
    fn eval(&mut self, t: f64, y: &[Vec<C>], out: &mut [Vec<C>]);
}

pub(crate) struct Stepper {
    kind: Integrator,
    dt: f64,
    full: Vec<f64>,
    half: Vec<f64>,
    /// ETD weights `Q, f₁, f₂, f₃` per mode.
    etd: Vec<[f64; 4]>,
    k: [Vec<Vec<C>>; 4],
    stage: Vec<Vec<C>>,
}

impl Stepper {
    pub(crate) fn new(kind: Integrator, dt: f64, diffusion: &[f64], blocks: usize) -> Self {
        let (full, half) = match kind {
            Integrator::IfRk4 => (
                diffusion.iter().map(|d| (-d * dt).exp()).collect(),
                diffusion.iter().map(|d| (-d * dt * 0.5).exp()).collect(),
            ),
            Integrator::SemiImplicitEuler => (diffusion.iter().map(|d| 1.0 / (1.0 + d * dt)).collect(), Vec::new()),
            Integrator::Etdrk4 => (
                diffusion.iter().map(|d| (-d * dt).exp()).collect(),
                diffusion.iter().map(|d| (-d * dt * 0.5).exp()).collect(),
            ),
        };
        let etd = match kind {
            Integrator::Etdrk4 => diffusion.iter().map(|d| etd_weights(-d * dt, dt)).collect(),
            _ => Vec::new(),
        };
        let zero = vec![vec![C::default(); diffusion.len()]; blocks];
        Self {
            kind,
            dt,
            full,
            half,
            etd,
            k: [zero.clone(), zero.clone(), zero.clone(), zero.clone()],
            stage: zero,
        }
    }

    pub(crate) fn step(&mut self, rhs: &mut impl Nonlinear, t: f64, y: &mut [Vec<C>]) {
        let dt = self.dt;
        match self.kind {
            Integrator::SemiImplicitEuler => {
                rhs.eval(t, y, &mut self.k[0]);
                for (yb, kb) in y.iter_mut().zip(&self.k[0]) {
                    for ((v, k), f) in yb.iter_mut().zip(kb).zip(&self.full) {
                        *v = (*v + k * dt) * f;
                    }
                }
            }
            Integrator::Etdrk4 => {
                let (e, eh, w) = (&self.full, &self.half, &self.etd);
                let [na, nb, nc, nd] = &mut self.k;
                rhs.eval(t, y, na);
                for ((s, yb), kb) in self.stage.iter_mut().zip(y.iter()).zip(na.iter()) {
                    for (i, s) in s.iter_mut().enumerate() {
                        *s = yb[i] * eh[i] + kb[i] * w[i][0];
                    }
                }
                rhs.eval(t + 0.5 * dt, &self.stage, nb);
                // stage a is needed again for c; keep it in nd until nd is evaluated
                for (b, s) in self.stage.iter_mut().enumerate() {
                    nd[b].clone_from(s);
                    for (i, s) in s.iter_mut().enumerate() {
                        *s = y[b][i] * eh[i] + nb[b][i] * w[i][0];
                    }
                }
                rhs.eval(t + 0.5 * dt, &self.stage, nc);
                for (b, s) in self.stage.iter_mut().enumerate() {
                    for (i, s) in s.iter_mut().enumerate() {
                        *s = nd[b][i] * eh[i] + (nc[b][i] * 2.0 - na[b][i]) * w[i][0];
                    }
                }
                rhs.eval(t + dt, &self.stage, nd);
                for (b, yb) in y.iter_mut().enumerate() {
                    for (i, v) in yb.iter_mut().enumerate() {
                        let [_, f1, f2, f3] = w[i];
                        *v = *v * e[i] + na[b][i] * f1 + (nb[b][i] + nc[b][i]) * (2.0 * f2) + nd[b][i] * f3;
                    }
                }
            }
            Integrator::IfRk4 => {
                let (e, eh) = (&self.full, &self.half);
                let [k1, k2, k3, k4] = &mut self.k;
                rhs.eval(t, y, k1);
                for ((s, yb), kb) in self.stage.iter_mut().zip(y.iter()).zip(k1.iter()) {
                    for (((s, v), k), h) in s.iter_mut().zip(yb).zip(kb).zip(eh) {
                        *s = (v + k * (0.5 * dt)) * h;
                    }
                }
                rhs.eval(t + 0.5 * dt, &self.stage, k2);
                for ((s, yb), kb) in self.stage.iter_mut().zip(y.iter()).zip(k2.iter()) {
                    for (((s, v), k), h) in s.iter_mut().zip(yb).zip(kb).zip(eh) {
                        *s = v * h + k * (0.5 * dt);
                    }
                }
                rhs.eval(t + 0.5 * dt, &self.stage, k3);
                for ((s, yb), kb) in self.stage.iter_mut().zip(y.iter()).zip(k3.iter()) {
                    for ((((s, v), k), h), f) in s.iter_mut().zip(yb).zip(kb).zip(eh).zip(e) {
                        *s = v * f + k * (h * dt);
                    }
                }
                rhs.eval(t + dt, &self.stage, k4);
                for (b, yb) in y.iter_mut().enumerate() {
                    for (i, v) in yb.iter_mut().enumerate() {
                        let (f, h) = (e[i], eh[i]);
                        let incr = k1[b][i] * f + (k2[b][i] + k3[b][i]) * (2.0 * h) + k4[b][i];
                        *v = *v * f + incr * (dt / 6.0);
                    }
                }
            }
        }
    }
}

/// `Q = h φ(z/2)/2` and the three Cox-Matthews update weights for `z = hλ`,
/// as means over a circle around `z`, which avoids the cancellation near 0.
fn etd_weights(z: f64, h: f64) -> [f64; 4] {
    const POINTS: usize = 64;
    let mut acc = [0.0; 4];
    for k in 0..POINTS {
        let theta = std::f64::consts::PI * (k as f64 + 0.5) / POINTS as f64;
        let r = C::from_polar(1.0, theta) + z;
        let e = r.exp();
        let r2 = r * r;
        let r3 = r2 * r;
        let q = ((r * 0.5).exp() - 1.0) / r;
        let f1 = (-4.0 - r + e * (4.0 - r * 3.0 + r2)) / r3;
        let f2 = (2.0 + r + e * (r - 2.0)) / r3;
        let f3 = (-4.0 - r * 3.0 - r2 + e * (4.0 - r)) / r3;
        // upper half circle; the lower half contributes the conjugates
        for (a, v) in acc.iter_mut().zip([q, f1, f2, f3]) {
            *a += v.re / POINTS as f64;
        }
    }
    [h * acc[0], h * acc[1], h * acc[2], h * acc[3]]
}

/// Restores `c^{-n} = conj(c^n)` by averaging.
pub(crate) fn symmetrise(lattice: &ModeLattice, c: &mut [C]) {
    for i in 0..=lattice.zero_index() {
        let j = lattice.neg_index(i);
        let v = 0.5 * (c[i] + c[j].conj());
        c[i] = v;
        c[j] = v.conj();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Logistic;

    impl Nonlinear for Logistic {
        fn eval(&mut self, _t: f64, y: &[Vec<C>], out: &mut [Vec<C>]) {
            out[0][0] = y[0][0] * (1.0 - y[0][0]);
        }
    }

    fn run(kind: Integrator, dt: f64) -> f64 {
        let mut y = vec![vec![C::new(0.1, 0.0)]];
        // −y from the diagonal, so y' = −y + y(1 − y) = −y²
        let mut st = Stepper::new(kind, dt, &[1.0], 1);
        let n = (1.0 / dt).round() as usize;
        for k in 0..n {
            st.step(&mut Logistic, k as f64 * dt, &mut y);
        }
        y[0][0].re
    }

    #[test]
    fn rk4_is_fourth_order() {
        let exact = 0.1 / 1.1;
        let e1 = (run(Integrator::IfRk4, 0.1) - exact).abs();
        let e2 = (run(Integrator::IfRk4, 0.05) - exact).abs();
        assert!((e1 / e2).log2() > 3.8, "{e1} {e2}");
    }

    #[test]
    fn etd_is_fourth_order() {
        let exact = 0.1 / 1.1;
        let e1 = (run(Integrator::Etdrk4, 0.1) - exact).abs();
        let e2 = (run(Integrator::Etdrk4, 0.05) - exact).abs();
        assert!((e1 / e2).log2() > 3.8, "{e1} {e2}");
    }

    #[test]
    fn etd_weights_match_closed_form() {
        for z in [-3.0f64, -40.0, -0.7] {
            let h = 0.1;
            let w = etd_weights(z, h);
            let e = z.exp();
            let f1 = h * (-4.0 - z + e * (4.0 - 3.0 * z + z * z)) / z.powi(3);
            let f3 = h * (-4.0 - 3.0 * z - z * z + e * (4.0 - z)) / z.powi(3);
            assert!((w[0] - h * ((0.5 * z).exp() - 1.0) / z).abs() < 1e-14);
            assert!((w[1] - f1).abs() < 1e-14 && (w[3] - f3).abs() < 1e-14);
        }
        let w = etd_weights(0.0, 1.0);
        assert!((w[0] - 0.5).abs() < 1e-14 && (w[1] - 1.0 / 6.0).abs() < 1e-14);
        assert!((w[2] - 1.0 / 6.0).abs() < 1e-14 && (w[3] - 1.0 / 6.0).abs() < 1e-14);
    }

    #[test]
    fn euler_is_first_order() {
        let exact = 0.1 / 1.1;
        let e1 = (run(Integrator::SemiImplicitEuler, 0.01) - exact).abs();
        let e2 = (run(Integrator::SemiImplicitEuler, 0.005) - exact).abs();
        assert!(((e1 / e2).log2() - 1.0).abs() < 0.1);
    }

    #[test]
    fn step_count_divides_horizon() {
        let cfg = SolverConfig::new(ModeLattice::new(1, 4).unwrap(), 0.03, 1.0).unwrap();
        let (n, dt) = cfg.steps();
        assert_eq!(n, 34);
        assert!((n as f64 * dt - 1.0).abs() < 1e-14);
        assert!(SolverConfig::new(ModeLattice::new(1, 4).unwrap(), 0.06, 1.0).is_err());
    }
}
