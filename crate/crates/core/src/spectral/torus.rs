use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// A point of `[0,1)^d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusPoint(Vec<f64>);

impl TorusPoint {
    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Shifts coordinate `i` by `h` and wraps.
    pub fn shifted(&self, i: usize, h: f64) -> TorusPoint {
        let mut c = self.0.clone();
        c[i] = wrap_coord(c[i] + h);
        TorusPoint(c)
    }
}

/// Reduces `x` modulo 1 into `[0,1)`.
#[inline]
pub fn wrap_coord(x: f64) -> f64 {
    let r = x - x.floor();
    // x slightly below an integer rounds to exactly 1.0
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

pub fn wrap(raw: &[f64]) -> Result<TorusPoint> {
    if raw.is_empty() {
        return invalid("torus point needs at least one coordinate");
    }
    if let Some(x) = raw.iter().find(|x| !x.is_finite()) {
        return invalid(format!("non-finite coordinate {x}"));
    }
    Ok(TorusPoint(raw.iter().map(|&x| wrap_coord(x)).collect()))
}

/// Euclidean norm of the coordinate-wise circle distances.
pub fn torus_distance(a: &TorusPoint, b: &TorusPoint) -> f64 {
    a.0.iter()
        .zip(&b.0)
        .map(|(x, y)| {
            let d = (x - y).abs();
            d.min(1.0 - d).powi(2)
        })
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wraps_into_unit_interval() {
        assert_eq!(wrap(&[1.25]).unwrap().coords(), &[0.25]);
        assert!((wrap(&[-0.1]).unwrap().coords()[0] - 0.9).abs() < 1e-15);
        assert_eq!(wrap(&[0.5]).unwrap().coords(), &[0.5]);
        assert_eq!(wrap_coord(-1e-18), 0.0);
        assert!(wrap(&[f64::NAN]).is_err());
        assert!(wrap(&[f64::INFINITY]).is_err());
    }

    #[test]
    fn wrap_is_idempotent() {
        for &x in &[-3.7, -1e-17, 0.0, 0.999_999_999_999, 12.5] {
            let once = wrap_coord(x);
            assert_eq!(wrap_coord(once), once);
            assert!((0.0..1.0).contains(&once));
        }
    }

    #[test]
    fn distance_is_bounded() {
        let a = wrap(&[0.0, 0.0]).unwrap();
        let b = wrap(&[0.5, 0.5]).unwrap();
        assert!((torus_distance(&a, &b) - 2f64.sqrt() / 2.0).abs() < 1e-15);
        let c = wrap(&[0.9, 0.05]).unwrap();
        assert!((torus_distance(&a, &c) - (0.01f64 + 0.0025).sqrt()).abs() < 1e-15);
    }
}
