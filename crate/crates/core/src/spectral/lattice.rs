use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Integer modes `n ∈ ℤ^d` with `max_j |n_j| ≤ M`.
///
/// Modes are enumerated lexicographically with the first coordinate most
/// significant: index `Σ_j (n_j + M)(2M+1)^{d-1-j}`. In this order the mode
/// `-n` sits at `len() - 1 - index(n)` and the zero mode in the middle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModeLattice {
    dim: usize,
    cutoff: usize,
}

impl ModeLattice {
    pub fn new(dim: usize, cutoff: usize) -> Result<Self> {
        if dim == 0 {
            return invalid("lattice dimension must be positive");
        }
        if cutoff == 0 {
            return invalid("lattice cutoff must be positive");
        }
        let side = 2 * cutoff + 1;
        if side.checked_pow(dim as u32).map_or(true, |n| n > 1 << 26) {
            return invalid(format!("lattice d={dim}, M={cutoff} is too large"));
        }
        Ok(Self { dim, cutoff })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    /// Points per axis, `2M + 1`.
    pub fn side(&self) -> usize {
        2 * self.cutoff + 1
    }

    pub fn len(&self) -> usize {
        self.side().pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn zero_index(&self) -> usize {
        (self.len() - 1) / 2
    }

    pub fn neg_index(&self, idx: usize) -> usize {
        self.len() - 1 - idx
    }

    pub fn index(&self, mode: &[i64]) -> Option<usize> {
        if mode.len() != self.dim {
            return None;
        }
        let m = self.cutoff as i64;
        let mut idx = 0usize;
        for &n in mode {
            if n.abs() > m {
                return None;
            }
            idx = idx * self.side() + (n + m) as usize;
        }
        Some(idx)
    }

    /// Component `j` of the mode at `idx`.
    pub fn component(&self, idx: usize, j: usize) -> i64 {
        let stride = self.side().pow((self.dim - 1 - j) as u32);
        ((idx / stride) % self.side()) as i64 - self.cutoff as i64
    }

    pub fn mode(&self, idx: usize) -> Vec<i64> {
        (0..self.dim).map(|j| self.component(idx, j)).collect()
    }

    pub fn norm_sq(&self, idx: usize) -> i64 {
        (0..self.dim).map(|j| self.component(idx, j).pow(2)).sum()
    }

    /// `max_j |n_j|` of the mode at `idx`.
    pub fn sup_norm(&self, idx: usize) -> i64 {
        (0..self.dim).map(|j| self.component(idx, j).abs()).max().unwrap_or(0)
    }

    pub fn modes(&self) -> impl Iterator<Item = Vec<i64>> + '_ {
        (0..self.len()).map(move |i| self.mode(i))
    }

    /// `|n|²` for every mode in enumeration order.
    pub fn norm_sq_table(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.norm_sq(i) as f64).collect()
    }

    /// Index in `self` of the mode stored at `idx` in `other`, if present.
    pub fn translate(&self, other: &ModeLattice, idx: usize) -> Option<usize> {
        if self.dim != other.dim {
            return None;
        }
        self.index(&other.mode(idx))
    }
}
