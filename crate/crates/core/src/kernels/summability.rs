//! Dirichlet, Fejér and Jackson kernels.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use super::trigpoly::TrigPoly;

fn centred(x: f64) -> f64 {
    x - x.round()
}

/// D_n(x) = Σ_{|k|≤n} e(kx) by direct summation.
pub fn dirichlet_direct(n: u64, x: f64) -> f64 {
    1.0 + 2.0 * (1..=n).map(|k| (TAU * k as f64 * x).cos()).sum::<f64>()
}

/// D_n(x) = sin((2n+1)πx)/sin(πx), with the removable singularity at ℤ.
pub fn dirichlet(n: u64, x: f64) -> f64 {
    let t = centred(x);
    if t == 0.0 {
        return (2 * n + 1) as f64;
    }
    let s = (PI * t).sin();
    if s.abs() < 1e-6 {
        return dirichlet_direct(n, t);
    }
    ((2 * n + 1) as f64 * PI * t).sin() / s
}

/// F_n(x) = Σ_{|k|<n} (1 − |k|/n) e(kx), the normative coefficient form.
pub fn fejer(n: u64, x: f64) -> f64 {
    assert!(n >= 1, "Fejér kernel needs n ≥ 1");
    let nf = n as f64;
    1.0 + 2.0
        * (1..n)
            .map(|k| (1.0 - k as f64 / nf) * (TAU * k as f64 * x).cos())
            .sum::<f64>()
}

/// F_n(x) = sin²(nπx) / (n sin²(πx)).
pub fn fejer_closed(n: u64, x: f64) -> f64 {
    assert!(n >= 1, "Fejér kernel needs n ≥ 1");
    let t = centred(x);
    let s = (PI * t).sin();
    if s.abs() < 1e-6 {
        return fejer(n, t);
    }
    let num = (n as f64 * PI * t).sin();
    num * num / (n as f64 * s * s)
}

pub fn fejer_poly(n: u64) -> TrigPoly {
    assert!(n >= 1);
    let mut p = TrigPoly::new(1);
    for k in -(n as i64 - 1)..=(n as i64 - 1) {
        p.set(vec![k], Complex64::new(1.0 - k.unsigned_abs() as f64 / n as f64, 0.0));
    }
    p
}

/// Coefficients Ĵ_n(k) for k = −deg..=deg, with deg = 2⌊n/2⌋ − 2.
///
/// J_n = c_n F_m² with m = ⌊n/2⌋. The coefficients of F_m² are the
/// autocorrelation of (m − |j|)/m; the integer autocorrelation is divided by
/// its value at 0, which makes Ĵ_n(0) = 1 exactly.
pub fn jackson_coefficients(n: u64) -> Vec<f64> {
    assert!(n >= 2, "Jackson kernel needs n ≥ 2");
    let m = (n / 2) as i64;
    let deg = 2 * m - 2;
    let f = |j: i64| if j.abs() < m { (m - j.abs()) as i128 } else { 0 };
    let auto: Vec<i128> = (-deg..=deg)
        .map(|k| (-(m - 1)..=(m - 1)).map(|j| f(j) * f(k - j)).sum())
        .collect();
    let c0 = auto[deg as usize];
    auto.iter().map(|&g| g as f64 / c0 as f64).collect()
}

pub fn jackson(n: u64) -> TrigPoly {
    let c = jackson_coefficients(n);
    let deg = (c.len() / 2) as i64;
    let mut p = TrigPoly::new(1);
    for (i, v) in c.iter().enumerate() {
        p.set(vec![i as i64 - deg], Complex64::new(*v, 0.0));
    }
    p
}

/// The square d-dimensional Jackson kernel J_n(x₁)⋯J_n(x_d).
pub fn jackson_d(n: u64, d: usize) -> TrigPoly {
    assert!(d >= 1);
    let c = jackson_coefficients(n);
    let deg = (c.len() / 2) as i64;
    let mut p = TrigPoly::new(d);
    let side = c.len();
    let total = side.pow(d as u32);
    for idx in 0..total {
        let mut rest = idx;
        let mut k = Vec::with_capacity(d);
        let mut v = 1.0;
        for _ in 0..d {
            let i = rest % side;
            rest /= side;
            k.push(i as i64 - deg);
            v *= c[i];
        }
        p.set(k, Complex64::new(v, 0.0));
    }
    p
}

/// Ĵ_n(𝐤) as a product of one-dimensional coefficients.
pub fn jackson_multiplier(coeffs: &[f64], k: &[i64]) -> f64 {
    let deg = (coeffs.len() / 2) as i64;
    k.iter()
        .map(|&ki| {
            if ki.abs() > deg {
                0.0
            } else {
                coeffs[(ki + deg) as usize]
            }
        })
        .product()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixed::Fixed;
    use proptest::prelude::*;

    #[test]
    fn dirichlet_values() {
        assert_eq!(dirichlet(3, 0.0), 7.0);
        assert!((dirichlet(1, 0.5) + 1.0).abs() < 1e-15);
        assert!((dirichlet(10, 0.37) - dirichlet_direct(10, 0.37)).abs() < 1e-12);
    }

    #[test]
    fn fejer_values() {
        assert!((fejer(4, 0.0) - 4.0).abs() < 1e-15);
        assert_eq!(fejer(1, 0.3), 1.0);
        assert!((fejer(7, 0.123) - fejer_closed(7, 0.123)).abs() < 1e-12);
    }

    #[test]
    fn jackson_small_cases() {
        assert_eq!(jackson(2).len(), 1);
        assert_eq!(jackson(2).get(&[0]).re, 1.0);
        assert_eq!(jackson(3).get(&[0]).re, 1.0);
        let j8 = jackson(8);
        assert_eq!(j8.get(&[0]).re, 1.0);
        assert!(j8.degree() <= 8);
        assert!(j8.iter().all(|(_, c)| c.norm() <= 2.0));
        for i in 0..10_000 {
            let x = [Fixed::from_f64(i as f64 / 10_000.0)];
            assert!(j8.eval_real(&x) >= -1e-12);
        }
        let d1 = jackson_d(6, 1);
        assert_eq!(d1, jackson(6));
        assert_eq!(jackson_d(2, 2).len(), 1);
        let j6 = jackson_coefficients(6);
        let j62 = jackson_d(6, 2);
        assert_eq!(j62.get(&[1, -2]).re, j6[(1 + 4) as usize] * j6[(-2 + 4) as usize]);
    }

    #[test]
    fn jackson_matches_squared_fejer() {
        for n in [4u64, 9, 16] {
            let m = n / 2;
            let j = jackson(n);
            let c0 = 1.0 / (0..200).map(|i| fejer(m, i as f64 / 200.0).powi(2)).sum::<f64>() * 200.0;
            for x in [0.0, 0.1, 0.27, 0.5] {
                let direct = c0 * fejer(m, x).powi(2);
                let via = j.eval_real(&[Fixed::from_f64(x)]);
                assert!((direct - via).abs() < 1e-10 * direct.max(1.0), "n={n} x={x}");
            }
        }
    }

    proptest! {
        #[test]
        fn kernel_identities(n in 1u64..=64, x in 0.0f64..1.0) {
            let t = x - x.round();
            prop_assume!((PI * t).sin().abs() > 1e-6);
            let d = dirichlet(n, x);
            let dd = dirichlet_direct(n, x);
            prop_assert!((d - dd).abs() <= 1e-10 * dd.abs().max(1.0));
            let f = fejer(n, x);
            let fc = fejer_closed(n, x);
            prop_assert!((f - fc).abs() <= 1e-10 * fc.abs().max(1.0));
            prop_assert!(f >= -1e-12);
        }
    }
}
