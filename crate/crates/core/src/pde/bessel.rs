/// `I₁(x)/I₀(x)` for `x ≥ 0`: power series up to 8, Gauss continued fraction beyond.
pub fn bessel_ratio_i1_i0(x: f64) -> f64 {
    if x <= 8.0 {
        ratio_series(x)
    } else {
        ratio_fraction(x)
    }
}

pub(crate) fn ratio_series(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let q = 0.25 * x * x;
    // t_k = q^k / (k!)^2 for I₀; I₁ uses (x/2) q^k / (k!(k+1)!)
    let (mut i0, mut i1) = (1.0, 0.5 * x);
    let (mut t0, mut t1) = (1.0, 0.5 * x);
    for k in 1..200 {
        let kf = k as f64;
        t0 *= q / (kf * kf);
        t1 *= q / (kf * (kf + 1.0));
        i0 += t0;
        i1 += t1;
        if t0 < 1e-18 * i0 && t1 < 1e-18 * i1 {
            break;
        }
    }
    i1 / i0
}

/// `I₁/I₀ = 1/(2/x + 1/(4/x + 1/(6/x + …)))`, evaluated by modified Lentz.
pub(crate) fn ratio_fraction(x: f64) -> f64 {
    let tiny = 1e-300;
    let b = |k: usize| 2.0 * k as f64 / x;
    let mut f = b(1);
    let mut c = f;
    let mut d = 0.0;
    for k in 2..100_000 {
        d = b(k) + d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b(k) + 1.0 / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-17 {
            break;
        }
    }
    1.0 / f
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn branches_agree_near_the_switch() {
        for &x in &[4.0, 6.0, 7.5, 8.0, 9.0, 12.0] {
            let (s, f) = (ratio_series(x), ratio_fraction(x));
            assert!((s - f).abs() < 1e-14, "x={x}: {s} vs {f}");
        }
    }

    #[test]
    fn known_values() {
        // I1(1)/I0(1) and I1(10)/I0(10) from standard tables
        assert!((bessel_ratio_i1_i0(1.0) - 0.446_389_965_896_534_5).abs() < 1e-15);
        assert!((bessel_ratio_i1_i0(10.0) - 0.948_599_825_954_846).abs() < 1e-15);
        assert!((bessel_ratio_i1_i0(1e-3) - 5e-4).abs() < 1e-9);
        assert!(bessel_ratio_i1_i0(500.0) < 1.0);
    }
}
