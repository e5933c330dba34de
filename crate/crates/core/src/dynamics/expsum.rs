//! Averaged exponential sums and polynomial-phase character sums.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::arithmetic::ContinuedFraction;
use crate::error::{Error, Result};
use crate::fixed::{Fixed, TorusPoint};
use crate::kernels::e_fixed;
use crate::sum::ComplexNeumaier;

/// 1 − e(s), accurate for small centred s.
#[inline]
fn one_minus_e(s: Fixed) -> Complex64 {
    let t = s.to_centered_f64();
    let h = (PI * t).sin();
    Complex64::new(2.0 * h * h, -(2.0 * PI * t).sin())
}

/// 𝓔_N(t) = (1/N) Σ_{j<N} e(jt) in closed form.
pub fn exp_sum_avg(t: Fixed, n: u64) -> Complex64 {
    assert!(n >= 1, "N must be ≥ 1");
    if t.is_zero() {
        return Complex64::new(1.0, 0.0);
    }
    one_minus_e(t.mul_u64(n)) / one_minus_e(t) / n as f64
}

/// Σ_{j<N} e(jt) for N up to 2^128.
pub fn exp_sum(t: Fixed, n: u128) -> Complex64 {
    if t.is_zero() {
        return Complex64::new(n as f64, 0.0);
    }
    one_minus_e(t.mul_u128(n)) / one_minus_e(t)
}

/// |𝓔_N(t)| = |sin πNt| / (N |sin πt|).
pub fn exp_sum_avg_abs(t: Fixed, n: u64) -> f64 {
    if t.is_zero() {
        return 1.0;
    }
    let num = (PI * t.mul_u64(n).to_centered_f64()).sin().abs();
    let den = (PI * t.to_centered_f64()).sin().abs();
    num / (den * n as f64)
}

pub fn exp_sum_direct(t: Fixed, n: u64) -> Complex64 {
    let mut acc = ComplexNeumaier::new();
    let mut x = Fixed::ZERO;
    for _ in 0..n {
        acc.add(e_fixed(x));
        x += t;
    }
    acc.value()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelSum {
    pub q: u128,
    pub n: u64,
    /// Σ_{1≤|k|<q} |𝓔_N(kω)|.
    pub sum: f64,
    /// sum·N / (q log q); 0 when q = 1.
    pub ratio: f64,
}

/// The kernel sum of the Denjoy–Koksma pipeline at q = q_n.
pub fn kernel_sum(cf: &ContinuedFraction, q_index: usize, n: u64) -> Result<KernelSum> {
    if q_index > cf.certified_len {
        return Err(Error::Uncertified(format!("q_{q_index} beyond the certified prefix")));
    }
    if n < 1 {
        return Err(Error::InvalidInput("N must be ≥ 1".into()));
    }
    let q = cf.q[q_index];
    let w = cf.omega()?;
    let mut acc = crate::sum::Neumaier::new();
    let mut t = Fixed::ZERO;
    for _ in 1..q {
        t += w;
        acc.add(exp_sum_avg_abs(t, n));
    }
    let sum = 2.0 * acc.value();
    let ratio = if q >= 2 {
        sum * n as f64 / (q as f64 * (q as f64).ln())
    } else {
        0.0
    };
    Ok(KernelSum { q, n, sum, ratio })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CharSum {
    pub sum: Complex64,
    /// Degree of j ↦ 𝐤·S^j x.
    pub degree: usize,
    /// Leading coefficient a_𝐤 = k_{i₀} ω / deg!, reduced mod 1.
    pub leading_coeff: f64,
    /// The numerator k_{i₀} and denominator deg! of a_𝐤 = (k_{i₀}/deg!)·ω.
    pub leading_num: i64,
    pub leading_den: u64,
}

/// Forward-difference table of p(j) = 𝐤·S_ω^j x: c_l = Σ_i k_i x_{i+l},
/// with x_{d+1} = ω, so that p(j) = Σ_l C(j, l) c_l.
pub fn skew_phase_differences(k: &[i64], x: &[Fixed], omega: Fixed) -> Vec<Fixed> {
    let d = k.len();
    let ext: Vec<Fixed> = x.iter().copied().chain(std::iter::once(omega)).collect();
    (0..=d)
        .map(|l| {
            (0..d)
                .filter(|&i| i + l <= d)
                .fold(Fixed::ZERO, |acc, i| acc + ext[i + l].mul_i64(k[i]))
        })
        .collect()
}

/// Σ_{j<N} e(𝐤·S_ω^j x), stepping the polynomial phase by exact finite
/// differences (one fixed-point addition per register per step).
pub fn char_birkhoff_skew(omega: Fixed, k: &[i64], x: &TorusPoint, n: u64) -> Result<CharSum> {
    let d = k.len();
    if d < 2 || x.dim() != d {
        return Err(Error::InvalidInput("skew character sum needs d ≥ 2 and matching point".into()));
    }
    let i0 = k
        .iter()
        .position(|&v| v != 0)
        .ok_or_else(|| Error::InvalidInput("𝐤 must be non-zero".into()))?;
    let degree = d - i0;
    let mut reg = skew_phase_differences(k, x.coords(), omega);
    reg.truncate(degree + 1);
    let mut acc = ComplexNeumaier::new();
    for _ in 0..n {
        acc.add(e_fixed(reg[0]));
        for l in 0..degree {
            let next = reg[l + 1];
            reg[l] += next;
        }
    }
    let fact: u64 = (1..=degree as u64).product();
    let lead = (omega.mul_i64(k[i0]).to_f64() / fact as f64).fract();
    Ok(CharSum {
        sum: acc.value(),
        degree,
        leading_coeff: lead,
        leading_num: k[i0],
        leading_den: fact,
    })
}
