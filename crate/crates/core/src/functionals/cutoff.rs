use super::hyperdual::Scalar;

/// Quintic smoothstep from 0 at `r = δ/2` to 1 at `r = δ`.
pub fn smoothstep<T: Scalar>(r: T, delta: f64) -> T {
    let lo = 0.5 * delta;
    let v = r.real();
    if v <= lo {
        T::cst(0.0)
    } else if v >= delta {
        T::cst(1.0)
    } else {
        let t = (r + (-lo)) * (1.0 / lo);
        let t3 = t * t * t;
        t3 * (t * (t * 6.0 + (-15.0)) + 10.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints_and_monotonicity() {
        assert_eq!(smoothstep(0.0, 0.2), 0.0);
        assert_eq!(smoothstep(0.1, 0.2), 0.0);
        assert_eq!(smoothstep(0.2, 0.2), 1.0);
        assert!((smoothstep(0.15, 0.2) - 0.5).abs() < 1e-15);
        let mut prev = 0.0;
        for k in 0..=100 {
            let v = smoothstep(0.1 + 0.001 * k as f64, 0.2);
            assert!(v >= prev);
            prev = v;
        }
    }
}
