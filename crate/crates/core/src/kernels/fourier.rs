//! Fourier coefficients by uniform-grid quadrature, Jackson approximation and
//! coefficient-decay diagnostics.
//!
//! The quadrature (1/M^d) Σ φ(j/M) e(−𝐤·j/M) is exact for trigonometric
//! polynomials of degree < M/2 and has error O(M^{−α}) for α-Hölder φ.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::observable::Observable;
use super::summability::{jackson_coefficients, jackson_multiplier};
use super::trigpoly::TrigPoly;
use crate::error::{Error, Result};
use crate::fixed::Fixed;
use crate::sum::ComplexNeumaier;

const MAX_GRID_POINTS: usize = 1 << 26;

/// Grid point j/M as an exact-enough fixed-point angle.
fn grid_step(m: usize) -> Fixed {
    Fixed::from_ratio(&1.into(), &(m as u64).into(), 256)
}

fn check_grid(m: usize, d: usize) -> Result<usize> {
    let total = (m as u128).checked_pow(d as u32).unwrap_or(u128::MAX);
    if total > MAX_GRID_POINTS as u128 {
        return Err(Error::DimensionTooLarge(format!(
            "quadrature grid {m}^{d} exceeds {MAX_GRID_POINTS} points"
        )));
    }
    Ok(total as usize)
}

/// φ sampled on the grid {j/M}^d, first coordinate fastest.
pub fn sample_grid(phi: &Observable, m: usize) -> Result<Vec<f64>> {
    let d = phi.dim;
    let total = check_grid(m, d)?;
    let step = grid_step(m);
    let out: Vec<f64> = (0..total)
        .into_par_iter()
        .map(|idx| {
            let mut rest = idx;
            let x: Vec<Fixed> = (0..d)
                .map(|_| {
                    let j = rest % m;
                    rest /= m;
                    step.mul_u64(j as u64)
                })
                .collect();
            phi.eval(&x)
        })
        .collect();
    Ok(out)
}

/// φ̂(𝐤) by uniform quadrature with `quad_points` samples per axis.
pub fn fourier_coefficient(phi: &Observable, k: &[i64], quad_points: usize) -> Result<Complex64> {
    if k.len() != phi.dim {
        return Err(Error::InvalidInput("frequency dimension mismatch".into()));
    }
    let kmax = k.iter().map(|x| x.unsigned_abs()).max().unwrap_or(0).max(1) as usize;
    if quad_points < 4 * kmax {
        return Err(Error::InvalidInput(format!(
            "quad_points = {quad_points} below 4·max(|k|, 1) = {}",
            4 * kmax
        )));
    }
    let samples = sample_grid(phi, quad_points)?;
    Ok(coefficients_from_samples(&samples, phi.dim, quad_points, &[k.to_vec()])[0])
}

/// Coefficients at the listed frequencies from grid samples, via one
/// separable pass per axis. Deterministic: fixed summation order.
pub fn coefficients_from_samples(samples: &[f64], d: usize, m: usize, ks: &[Vec<i64>]) -> Vec<Complex64> {
    let twiddle = |k: i64| -> Vec<Complex64> {
        (0..m)
            .map(|j| {
                let t = ((k.rem_euclid(m as i64) as u128 * j as u128) % m as u128) as f64 / m as f64;
                let (s, c) = (TAU * t).sin_cos();
                Complex64::new(c, -s)
            })
            .collect()
    };
    let norm = (m as f64).powi(d as i32);
    ks.par_iter()
        .map(|k| {
            let tw: Vec<Vec<Complex64>> = k.iter().map(|&ki| twiddle(ki)).collect();
            let mut acc = ComplexNeumaier::new();
            for (idx, &v) in samples.iter().enumerate() {
                let mut rest = idx;
                let mut z = Complex64::new(v, 0.0);
                for t in &tw {
                    z *= t[rest % m];
                    rest /= m;
                }
                acc.add(z);
            }
            acc.value() / norm
        })
        .collect()
}

/// All coefficients with |𝐤|_∞ ≤ n, using a separable DFT over the grid.
pub fn coefficients_up_to(phi: &Observable, n: usize, quad_points: usize) -> Result<TrigPoly> {
    let d = phi.dim;
    if quad_points < 2 * n + 1 {
        return Err(Error::InvalidInput(format!(
            "quad_points = {quad_points} cannot resolve degree {n}"
        )));
    }
    let m = quad_points;
    let samples = sample_grid(phi, m)?;
    let side = 2 * n + 1;
    let table: Vec<Vec<Complex64>> = (0..side)
        .map(|i| {
            let k = i as i64 - n as i64;
            (0..m)
                .map(|j| {
                    let t = ((k.rem_euclid(m as i64) as u128 * j as u128) % m as u128) as f64 / m as f64;
                    let (s, c) = (TAU * t).sin_cos();
                    Complex64::new(c, -s)
                })
                .collect()
        })
        .collect();
    // Transform one axis at a time: data layout [axis0 fastest], each pass
    // replaces the fastest remaining sample axis by a frequency axis.
    let mut data: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let mut shape: Vec<usize> = vec![m; d];
    for axis in 0..d {
        let before: usize = shape[..axis].iter().product();
        let after: usize = shape[axis + 1..].iter().product();
        let len = shape[axis];
        let mut next = vec![Complex64::default(); before * side * after];
        next.par_chunks_mut(before * side).enumerate().for_each(|(a, chunk)| {
            for (fi, row) in table.iter().enumerate() {
                for b in 0..before {
                    let mut acc = ComplexNeumaier::new();
                    for j in 0..len {
                        acc.add(data[b + before * (j + len * a)] * row[j]);
                    }
                    chunk[b + before * fi] = acc.value();
                }
            }
        });
        data = next;
        shape[axis] = side;
    }
    let norm = (m as f64).powi(d as i32);
    let mut p = TrigPoly::new(d);
    for (idx, z) in data.iter().enumerate() {
        let mut rest = idx;
        let k: Vec<i64> = (0..d)
            .map(|_| {
                let i = rest % side;
                rest /= side;
                i as i64 - n as i64
            })
            .collect();
        p.set(k, z / norm);
    }
    Ok(p)
}

pub fn default_quad_points(n: usize, d: usize) -> usize {
    (8 * n * d).max(16)
}

/// φ_n = φ ∗ 𝐉_n, with coefficients Ĵ_n(𝐤)·φ̂(𝐤).
pub fn approximate(phi: &Observable, n: u64, quad_points: usize) -> Result<TrigPoly> {
    if n < 2 {
        return Err(Error::InvalidInput("Jackson approximation needs n ≥ 2".into()));
    }
    let jc = jackson_coefficients(n);
    let deg = jc.len() / 2;
    let coeffs = coefficients_up_to(phi, deg, quad_points)?;
    Ok(coeffs.multiply(|k| jackson_multiplier(&jc, k)))
}

/// max over the grid {j/M}^d of |φ − p|.
pub fn grid_sup_error(phi: &Observable, p: &TrigPoly, m: usize) -> Result<f64> {
    let samples = sample_grid(phi, m)?;
    let step = grid_step(m);
    let d = phi.dim;
    Ok(samples
        .par_iter()
        .enumerate()
        .map(|(idx, v)| {
            let mut rest = idx;
            let x: Vec<Fixed> = (0..d)
                .map(|_| {
                    let j = rest % m;
                    rest /= m;
                    step.mul_u64(j as u64)
                })
                .collect();
            (v - p.eval_real(&x)).abs()
        })
        .reduce(|| 0.0, f64::max))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub k_max: u64,
    pub quad_points: usize,
    /// max over 2 ≤ |𝐤| ≤ k_max of |φ̂(𝐤)| / (norm_est · w(1/|𝐤|)).
    pub max_ratio: f64,
    pub worst_k: Vec<i64>,
    /// Per-shell maxima, indexed by |𝐤|_∞ − 2.
    pub shell_max: Vec<f64>,
}

/// Coefficient decay against the modulus of continuity.
pub fn fc_decay_check(phi: &Observable, k_max: u64, quad_points: Option<usize>) -> Result<DecayReport> {
    if k_max < 2 {
        return Err(Error::InvalidInput("k_max must be ≥ 2".into()));
    }
    let m = quad_points.unwrap_or(default_quad_points(k_max as usize, 1).max(64 * k_max as usize));
    let coeffs = coefficients_up_to(phi, k_max as usize, m)?;
    let mut shell_max = vec![0f64; (k_max - 1) as usize];
    let mut best = (0f64, vec![0; phi.dim]);
    for (k, c) in coeffs.iter() {
        let s = k.iter().map(|x| x.unsigned_abs()).max().unwrap_or(0);
        if s < 2 {
            continue;
        }
        let r = c.norm() / (phi.norm_est * phi.modulus.evaluate(1.0 / s as f64));
        let slot = &mut shell_max[(s - 2) as usize];
        *slot = slot.max(r);
        if r > best.0 {
            best = (r, k.clone());
        }
    }
    Ok(DecayReport {
        k_max,
        quad_points: m,
        max_ratio: best.0,
        worst_k: best.1,
        shell_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::modulus::ModulusOfContinuity;
    use crate::kernels::registry::dist_pow;

    fn cosine() -> Observable {
        Observable::from_fn(
            "cos",
            1,
            |x| (TAU * x[0].to_f64()).cos(),
            ModulusOfContinuity::Holder(1.0),
            1.0 + TAU,
            1.0,
            Some(0.0),
        )
    }

    #[test]
    fn cosine_coefficients() {
        let c = cosine();
        assert!((fourier_coefficient(&c, &[1], 64).unwrap() - Complex64::new(0.5, 0.0)).norm() < 1e-14);
        assert!(fourier_coefficient(&c, &[0], 64).unwrap().norm() < 1e-14);
        assert!(fourier_coefficient(&c, &[5], 8).is_err());
    }

    #[test]
    fn bulk_and_single_agree() {
        let phi = dist_pow(0.5, 1);
        let all = coefficients_up_to(&phi, 6, 256).unwrap();
        for k in -6..=6i64 {
            let one = fourier_coefficient(&phi, &[k], 256).unwrap();
            assert!((all.get(&[k]) - one).norm() < 1e-13);
        }
        assert!(all.is_hermitian(1e-13));
    }

    #[test]
    fn dist_pow_coefficient_converges() {
        // refinement oracle: doubling the grid changes φ̂(5) by < 1e-6
        let phi = dist_pow(0.5, 1);
        let a = fourier_coefficient(&phi, &[5], 1 << 15).unwrap();
        let b = fourier_coefficient(&phi, &[5], 1 << 16).unwrap();
        assert!((a - b).norm() < 1e-6, "{a} vs {b}");
    }

    #[test]
    fn constant_is_reproduced() {
        let c = Observable::from_fn("c", 1, |_| 2.5, ModulusOfContinuity::Holder(1.0), 2.5, 2.5, Some(2.5));
        let p = approximate(&c, 10, 128).unwrap();
        assert!((p.mean() - 2.5).abs() < 1e-14);
        assert!(p.iter().filter(|(k, _)| k[0] != 0).all(|(_, v)| v.norm() < 1e-14));
    }

    #[test]
    fn two_dimensional_coefficients() {
        let mut tp = TrigPoly::new(2);
        tp.add_real_mode(vec![1, -2], Complex64::new(0.3, 0.1));
        let phi = Observable::from_trig("t", tp.clone());
        let all = coefficients_up_to(&phi, 3, 16).unwrap();
        for (k, c) in all.iter() {
            assert!((c - tp.get(k)).norm() < 1e-14, "{k:?}");
        }
    }
}
