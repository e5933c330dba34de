use std::fmt;

use num_bigint::BigUint;
use num_traits::One;

use crate::arithmetic::Frequency;
use crate::error::{Error, Result};
use crate::fixed::{check_bits, Fixed, TorusPoint, DEFAULT_BITS};

#[derive(Clone, Debug, PartialEq)]
pub enum SystemKind {
    /// x ↦ x + ω on 𝕋.
    Rotation1D,
    /// x ↦ x + 𝛚 on 𝕋^d.
    RotationD,
    /// (x₁, …, x_d) ↦ (x₁ + x₂, …, x_{d−1} + x_d, x_d + ω).
    SkewProduct { d: usize },
}

/// A dynamical system with its frequencies resolved to fixed point.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemSpec {
    pub kind: SystemKind,
    pub freqs: Vec<Frequency>,
    /// Translation vector (rotations) or the single ω (skew product).
    pub omega: Vec<Fixed>,
    pub bits: u32,
}

impl SystemSpec {
    pub fn rotation(freq: Frequency, bits: u32) -> Result<SystemSpec> {
        check_bits(bits)?;
        let w = freq.to_fixed_bits(bits)?;
        Ok(SystemSpec {
            kind: SystemKind::Rotation1D,
            freqs: vec![freq],
            omega: vec![w],
            bits,
        })
    }

    pub fn rotation_d(freqs: Vec<Frequency>, bits: u32) -> Result<SystemSpec> {
        check_bits(bits)?;
        if freqs.is_empty() {
            return Err(Error::InvalidInput("rotation needs at least one frequency".into()));
        }
        let omega = freqs.iter().map(|f| f.to_fixed_bits(bits)).collect::<Result<_>>()?;
        Ok(SystemSpec {
            kind: SystemKind::RotationD,
            freqs,
            omega,
            bits,
        })
    }

    pub fn skew(d: usize, freq: Frequency, bits: u32) -> Result<SystemSpec> {
        check_bits(bits)?;
        if d < 2 {
            return Err(Error::InvalidInput("skew product needs d ≥ 2".into()));
        }
        let w = freq.to_fixed_bits(bits)?;
        Ok(SystemSpec {
            kind: SystemKind::SkewProduct { d },
            freqs: vec![freq],
            omega: vec![w],
            bits,
        })
    }

    pub fn dim(&self) -> usize {
        match self.kind {
            SystemKind::Rotation1D => 1,
            SystemKind::RotationD => self.omega.len(),
            SystemKind::SkewProduct { d } => d,
        }
    }

    pub fn is_rotation(&self) -> bool {
        !matches!(self.kind, SystemKind::SkewProduct { .. })
    }

    /// One application of the map, in place.
    #[inline]
    pub fn step(&self, x: &mut [Fixed]) {
        match self.kind {
            SystemKind::Rotation1D | SystemKind::RotationD => {
                for (xi, wi) in x.iter_mut().zip(&self.omega) {
                    *xi += *wi;
                }
            }
            SystemKind::SkewProduct { d } => {
                for i in 0..d - 1 {
                    let next = x[i + 1];
                    x[i] += next;
                }
                x[d - 1] += self.omega[0];
            }
        }
    }

    /// The j-th iterate in closed form.
    ///
    /// For the skew product, y_i = Σ_l C(j, l) x_{i+l} with x_{d+1} = ω; the
    /// binomials are exact big integers, so there is no overflow regime.
    pub fn iterate(&self, x: &TorusPoint, j: u128) -> Result<TorusPoint> {
        if x.dim() != self.dim() {
            return Err(Error::InvalidInput(format!(
                "point has dimension {}, system has {}",
                x.dim(),
                self.dim()
            )));
        }
        let c = x.coords();
        let coords = match self.kind {
            SystemKind::Rotation1D | SystemKind::RotationD => {
                c.iter().zip(&self.omega).map(|(xi, wi)| *xi + wi.mul_u128(j)).collect()
            }
            SystemKind::SkewProduct { d } => {
                let binom = binomials(j, d);
                let ext: Vec<Fixed> = c.iter().copied().chain(std::iter::once(self.omega[0])).collect();
                (0..d)
                    .map(|i| {
                        (0..=d - i).fold(Fixed::ZERO, |acc, l| acc + ext[i + l].mul_biguint(&binom[l]))
                    })
                    .collect()
            }
        };
        TorusPoint::new(coords, x.bits())
    }

    /// Parse `rot1:<freq>`, `rotd:<f1>|<f2>|…` or `skew:<d>:<freq>`.
    pub fn parse(s: &str, bits: u32) -> Result<SystemSpec> {
        let s = s.trim();
        let bad = |msg: &str| Error::parse("system", format!("{s}: {msg}"));
        if let Some(f) = s.strip_prefix("rot1:") {
            return SystemSpec::rotation(f.parse()?, bits);
        }
        if let Some(list) = s.strip_prefix("rotd:") {
            let freqs = list.split('|').map(|f| f.parse()).collect::<Result<Vec<Frequency>>>()?;
            return SystemSpec::rotation_d(freqs, bits);
        }
        if let Some(rest) = s.strip_prefix("skew:") {
            let (d, f) = rest.split_once(':').ok_or_else(|| bad("expected skew:<d>:<freq>"))?;
            let d: usize = d.trim().parse().map_err(|_| bad("dimension must be an integer"))?;
            return SystemSpec::skew(d, f.parse()?, bits);
        }
        Err(bad("expected rot1:, rotd: or skew:"))
    }

    pub fn parse_default(s: &str) -> Result<SystemSpec> {
        SystemSpec::parse(s, DEFAULT_BITS)
    }
}

impl fmt::Display for SystemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            SystemKind::Rotation1D => write!(f, "rot1:{}", self.freqs[0]),
            SystemKind::RotationD => {
                let items: Vec<String> = self.freqs.iter().map(|x| x.to_string()).collect();
                write!(f, "rotd:{}", items.join("|"))
            }
            SystemKind::SkewProduct { d } => write!(f, "skew:{d}:{}", self.freqs[0]),
        }
    }
}

/// C(j, 0..=d).
pub fn binomials(j: u128, d: usize) -> Vec<BigUint> {
    let mut out = Vec::with_capacity(d + 1);
    let mut c = BigUint::one();
    out.push(c.clone());
    for l in 1..=d as u128 {
        if l > j {
            c = BigUint::default();
        } else {
            c = c * BigUint::from(j - l + 1) / BigUint::from(l);
        }
        out.push(c.clone());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn skew_two_steps_by_hand() {
        let sys = SystemSpec::skew(2, Frequency::golden(), 192).unwrap();
        let x = TorusPoint::from_f64s(&[0.1, 0.7], 192).unwrap();
        let y = sys.iterate(&x, 2).unwrap();
        let w = sys.omega[0];
        let (x1, x2) = (x.coords()[0], x.coords()[1]);
        assert_eq!(y.coords()[0], x1 + x2.mul_u64(2) + w);
        assert_eq!(y.coords()[1], x2 + w.mul_u64(2));
        assert_eq!(sys.iterate(&x, 0).unwrap(), x);
    }

    #[test]
    fn parse_round_trip() {
        for s in ["rot1:surd:(-1,1,5,2)", "rotd:surd:(-1,1,2,1)|surd:(-1,1,3,1)", "skew:3:pq:rule:linear"] {
            let sys = SystemSpec::parse_default(s).unwrap();
            assert_eq!(sys.to_string(), s);
        }
        assert!(SystemSpec::parse_default("skew:1:golden").is_err());
        assert!(SystemSpec::parse_default("flow:golden").is_err());
    }

    #[test]
    fn binomial_table() {
        let b = binomials(7, 4);
        let want: Vec<BigUint> = [1u32, 7, 21, 35, 35].iter().map(|&v| BigUint::from(v)).collect();
        assert_eq!(b, want);
        assert_eq!(binomials(2, 3)[3], BigUint::default());
    }
}
