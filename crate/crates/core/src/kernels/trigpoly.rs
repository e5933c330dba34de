use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::fixed::Fixed;

/// e(t) = exp(2πit) for a fixed-point phase, evaluated from the centred
/// representative so small phases keep full relative precision.
#[inline]
pub fn e_fixed(t: Fixed) -> Complex64 {
    let (s, c) = (TAU * t.to_centered_f64()).sin_cos();
    Complex64::new(c, s)
}

#[inline]
pub fn e_f64(t: f64) -> Complex64 {
    let (s, c) = (TAU * t).sin_cos();
    Complex64::new(c, s)
}

/// `k·x mod 1` exactly.
#[inline]
pub fn phase(k: &[i64], x: &[Fixed]) -> Fixed {
    k.iter()
        .zip(x)
        .fold(Fixed::ZERO, |acc, (&ki, &xi)| acc + xi.mul_i64(ki))
}

/// A trigonometric polynomial on 𝕋^d with finitely many non-zero
/// coefficients, keyed by frequency vector.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigPoly {
    dim: usize,
    coeffs: BTreeMap<Vec<i64>, Complex64>,
}

impl TrigPoly {
    pub fn new(dim: usize) -> TrigPoly {
        assert!(dim >= 1, "dimension must be ≥ 1");
        TrigPoly {
            dim,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, c: f64) -> TrigPoly {
        let mut p = TrigPoly::new(dim);
        p.set(vec![0; dim], Complex64::new(c, 0.0));
        p
    }

    /// Re(c·e(k·x)) as a Hermitian pair.
    pub fn real_mode(k: Vec<i64>, c: Complex64) -> TrigPoly {
        let mut p = TrigPoly::new(k.len());
        p.add_real_mode(k, c);
        p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Sup-norm degree max_𝐤 |𝐤|_∞.
    pub fn degree(&self) -> u64 {
        self.coeffs
            .keys()
            .flat_map(|k| k.iter().map(|x| x.unsigned_abs()))
            .max()
            .unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn get(&self, k: &[i64]) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or_default()
    }

    pub fn set(&mut self, k: Vec<i64>, c: Complex64) {
        assert_eq!(k.len(), self.dim, "frequency dimension mismatch");
        if c == Complex64::default() {
            self.coeffs.remove(&k);
        } else {
            self.coeffs.insert(k, c);
        }
    }

    pub fn add(&mut self, k: Vec<i64>, c: Complex64) {
        let v = self.get(&k) + c;
        self.set(k, v);
    }

    /// Adds Re(c·e(k·x)) = (c e(k·x) + c̄ e(−k·x))/2.
    pub fn add_real_mode(&mut self, k: Vec<i64>, c: Complex64) {
        if k.iter().all(|&x| x == 0) {
            self.add(k, Complex64::new(c.re, 0.0));
            return;
        }
        let neg: Vec<i64> = k.iter().map(|x| -x).collect();
        self.add(k, c / 2.0);
        self.add(neg, c.conj() / 2.0);
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vec<i64>, &Complex64)> {
        self.coeffs.iter()
    }

    /// Coefficient at 𝟎, the mean.
    pub fn mean(&self) -> f64 {
        self.get(&vec![0; self.dim]).re
    }

    pub fn eval(&self, x: &[Fixed]) -> Complex64 {
        self.coeffs.iter().map(|(k, c)| c * e_fixed(phase(k, x))).sum()
    }

    /// Real part of [`eval`](Self::eval), the value of a Hermitian polynomial.
    pub fn eval_real(&self, x: &[Fixed]) -> f64 {
        self.coeffs
            .iter()
            .map(|(k, c)| {
                let z = e_fixed(phase(k, x));
                c.re * z.re - c.im * z.im
            })
            .sum()
    }

    pub fn eval_f64(&self, x: &[f64]) -> Complex64 {
        self.coeffs
            .iter()
            .map(|(k, c)| {
                let t: f64 = k.iter().zip(x).map(|(&ki, &xi)| ki as f64 * xi).sum();
                c * e_f64(t)
            })
            .sum()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.coeffs.iter().all(|(k, c)| {
            let neg: Vec<i64> = k.iter().map(|x| -x).collect();
            (self.get(&neg) - c.conj()).norm() <= tol
        })
    }

    /// Σ |c_𝐤|, an upper bound for the sup norm.
    pub fn l1_norm(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).sum()
    }

    /// Σ |c_𝐤|·|𝐤|_1, a Lipschitz bound (divided by 2π) in the sup metric.
    pub fn weighted_l1(&self) -> f64 {
        self.coeffs
            .iter()
            .map(|(k, c)| c.norm() * k.iter().map(|x| x.unsigned_abs() as f64).sum::<f64>())
            .sum()
    }

    /// Pointwise multiplier: coefficient 𝐤 becomes m(𝐤)·c_𝐤.
    pub fn multiply(&self, m: impl Fn(&[i64]) -> f64) -> TrigPoly {
        let mut out = TrigPoly::new(self.dim);
        for (k, c) in &self.coeffs {
            out.set(k.clone(), c * m(k));
        }
        out
    }

    pub fn scale(&self, s: f64) -> TrigPoly {
        self.multiply(|_| s)
    }

    pub fn sum(&self, other: &TrigPoly) -> TrigPoly {
        assert_eq!(self.dim, other.dim);
        let mut out = self.clone();
        for (k, c) in &other.coeffs {
            out.add(k.clone(), *c);
        }
        out
    }
}

#[derive(Serialize, Deserialize)]
struct CoeffEntry {
    k: Vec<i64>,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct TrigPolyJson {
    dim: usize,
    degree: u64,
    coeffs: Vec<CoeffEntry>,
}

impl Serialize for TrigPoly {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        TrigPolyJson {
            dim: self.dim,
            degree: self.degree(),
            coeffs: self
                .coeffs
                .iter()
                .map(|(k, c)| CoeffEntry {
                    k: k.clone(),
                    re: c.re,
                    im: c.im,
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for TrigPoly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = TrigPolyJson::deserialize(d)?;
        if j.dim == 0 {
            return Err(serde::de::Error::custom("dimension must be ≥ 1"));
        }
        let mut p = TrigPoly::new(j.dim);
        for e in j.coeffs {
            if e.k.len() != j.dim {
                return Err(serde::de::Error::custom("frequency dimension mismatch"));
            }
            p.set(e.k, Complex64::new(e.re, e.im));
        }
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_mode_evaluates_to_cosine() {
        let p = TrigPoly::real_mode(vec![3], Complex64::new(2.0, 0.0));
        let x = [Fixed::from_f64(0.1)];
        assert!((p.eval_real(&x) - 2.0 * (TAU * 0.3).cos()).abs() < 1e-14);
        assert!(p.is_hermitian(0.0));
        assert_eq!(p.degree(), 3);
        assert_eq!(p.mean(), 0.0);
    }

    #[test]
    fn json_round_trip() {
        let mut p = TrigPoly::real_mode(vec![1, -2], Complex64::new(0.5, 0.25));
        p.add(vec![0, 0], Complex64::new(1.0, 0.0));
        let s = serde_json::to_string(&p).unwrap();
        assert!(s.contains("\"degree\":2"));
        let back: TrigPoly = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
    }
}
