//! Fixed-point angles on 𝕋 = ℝ/ℤ.
//!
//! A [`Fixed`] is an unsigned 256-bit integer `N` read as the angle `N / 2^256`.
//! Addition and integer multiplication wrap modulo 2^256, which is exactly
//! reduction modulo 1, so orbits of rotations never drift. A declared
//! precision of `b` fractional bits means the low `256 - b` bits are zero;
//! both operations preserve that.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Neg, Sub, SubAssign};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_BITS: u32 = 256;
pub const MIN_BITS: u32 = 64;
pub const DEFAULT_BITS: u32 = 192;

const TWO_POW_M128: f64 = 1.0 / 340_282_366_920_938_463_463_374_607_431_768_211_456.0;

pub fn check_bits(bits: u32) -> Result<()> {
    if (MIN_BITS..=MAX_BITS).contains(&bits) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "fractional bits must lie in {MIN_BITS}..={MAX_BITS}, got {bits}"
        )))
    }
}

/// An angle in `[0, 1)` with 256 fractional bits of storage.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Fixed([u64; 4]);

impl Fixed {
    pub const ZERO: Fixed = Fixed([0; 4]);
    pub const HALF: Fixed = Fixed([0, 0, 0, 1 << 63]);

    /// Little-endian limbs.
    pub const fn from_limbs(limbs: [u64; 4]) -> Self {
        Fixed(limbs)
    }

    pub const fn limbs(&self) -> [u64; 4] {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0 == [0; 4]
    }

    /// `frac(num / den)` rounded to nearest at `bits` fractional bits.
    pub fn from_ratio(num: &BigInt, den: &BigInt, bits: u32) -> Fixed {
        assert!(den.is_positive(), "denominator must be positive");
        let bits = bits.clamp(1, MAX_BITS);
        let r = num.mod_floor(den).to_biguint().expect("mod_floor is non-negative");
        let den = den.magnitude();
        let scaled: BigUint = (r << (bits + 1)) / den;
        let rounded: BigUint = (scaled + 1u32) >> 1u32;
        Fixed::from_biguint_mod(&(rounded << (MAX_BITS - bits)))
    }

    /// Reduce a non-negative integer modulo 2^256 into raw limbs.
    pub fn from_biguint_mod(n: &BigUint) -> Fixed {
        let digits = n.to_u64_digits();
        let mut limbs = [0u64; 4];
        for (dst, src) in limbs.iter_mut().zip(digits.iter()) {
            *dst = *src;
        }
        Fixed(limbs)
    }

    /// The raw 256-bit integer `N`.
    pub fn to_biguint(&self) -> BigUint {
        BigUint::from_slice(
            &self
                .0
                .iter()
                .flat_map(|l| [*l as u32, (*l >> 32) as u32])
                .collect::<Vec<u32>>(),
        )
    }

    /// Exact fractional part of a finite `f64` (every such value fits in 256 bits
    /// unless it lies below 2^-256, in which case it truncates).
    pub fn from_f64(t: f64) -> Fixed {
        assert!(t.is_finite(), "angle must be finite");
        if t < 0.0 {
            return Fixed::from_f64(-t).wrapping_neg();
        }
        // exact for non-negative t
        let frac = t - t.floor();
        if frac == 0.0 {
            return Fixed::ZERO;
        }
        let bits = frac.to_bits();
        let exp = ((bits >> 52) & 0x7ff) as i32;
        let (mant, e) = if exp == 0 {
            (bits & ((1 << 52) - 1), -1074)
        } else {
            ((bits & ((1 << 52) - 1)) | (1 << 52), exp - 1075)
        };
        // value = mant * 2^e, stored as mant * 2^(e + 256)
        let shift = e + MAX_BITS as i32;
        let n = BigUint::from(mant);
        let n = if shift >= 0 {
            n << shift as u32
        } else {
            n >> (-shift) as u32
        };
        Fixed::from_biguint_mod(&n)
    }

    /// Round to nearest at `bits` fractional bits (ties up), wrapping 1 to 0.
    pub fn round_to_bits(self, bits: u32) -> Fixed {
        if bits >= MAX_BITS {
            return self;
        }
        let drop = MAX_BITS - bits;
        let n = self.to_biguint();
        let half = BigUint::from(1u32) << (drop - 1);
        let rounded = ((n + half) >> drop) << drop;
        Fixed::from_biguint_mod(&rounded)
    }

    /// Nearest `f64` in `[0, 1)`.
    pub fn to_f64(self) -> f64 {
        let top = ((self.0[3] as u128) << 64) | self.0[2] as u128;
        let v = top as f64 * TWO_POW_M128;
        if v >= 1.0 {
            1.0 - f64::EPSILON / 2.0
        } else {
            v
        }
    }

    /// Signed representative in `[-1/2, 1/2)`, with full relative precision
    /// for small magnitudes.
    pub fn to_centered_f64(self) -> f64 {
        if self >= Fixed::HALF {
            -self.wrapping_neg().magnitude_f64()
        } else {
            self.magnitude_f64()
        }
    }

    fn magnitude_f64(self) -> f64 {
        let l = self.0;
        let top = (0..4).rev().find(|&i| l[i] != 0);
        match top {
            None => 0.0,
            Some(i) if i <= 1 => {
                let v = ((l[1] as u128) << 64) | l[0] as u128;
                v as f64 * TWO_POW_M128 * TWO_POW_M128
            }
            Some(i) => {
                let v = ((l[i] as u128) << 64) | l[i - 1] as u128;
                let exp = 64 * (i as i32 - 1) - MAX_BITS as i32;
                v as f64 * 2f64.powi(exp)
            }
        }
    }

    /// `‖t‖ = dist(t, ℤ)` in `[0, 1/2]`.
    pub fn dist_to_z(self) -> f64 {
        self.to_centered_f64().abs()
    }

    #[inline]
    pub fn wrapping_add(self, rhs: Fixed) -> Fixed {
        let (a, b) = (self.0, rhs.0);
        let (r0, c0) = a[0].overflowing_add(b[0]);
        let (r1, c1a) = a[1].overflowing_add(b[1]);
        let (r1, c1b) = r1.overflowing_add(c0 as u64);
        let (r2, c2a) = a[2].overflowing_add(b[2]);
        let (r2, c2b) = r2.overflowing_add((c1a | c1b) as u64);
        let r3 = a[3].wrapping_add(b[3]).wrapping_add((c2a | c2b) as u64);
        Fixed([r0, r1, r2, r3])
    }

    #[inline]
    pub fn wrapping_neg(self) -> Fixed {
        let inv = Fixed([!self.0[0], !self.0[1], !self.0[2], !self.0[3]]);
        inv.wrapping_add(Fixed([1, 0, 0, 0]))
    }

    #[inline]
    pub fn wrapping_sub(self, rhs: Fixed) -> Fixed {
        self.wrapping_add(rhs.wrapping_neg())
    }

    fn mul_limbs(self, b: [u64; 4]) -> Fixed {
        let a = self.0;
        let mut r = [0u64; 4];
        for i in 0..4 {
            if a[i] == 0 {
                continue;
            }
            let mut carry: u128 = 0;
            for j in 0..(4 - i) {
                let t = r[i + j] as u128 + (a[i] as u128) * (b[j] as u128) + carry;
                r[i + j] = t as u64;
                carry = t >> 64;
            }
        }
        Fixed(r)
    }

    /// `k·t mod 1`.
    #[inline]
    pub fn mul_u64(self, k: u64) -> Fixed {
        let a = self.0;
        let mut r = [0u64; 4];
        let mut carry: u128 = 0;
        for i in 0..4 {
            let t = (a[i] as u128) * (k as u128) + carry;
            r[i] = t as u64;
            carry = t >> 64;
        }
        Fixed(r)
    }

    pub fn mul_u128(self, k: u128) -> Fixed {
        self.mul_limbs([k as u64, (k >> 64) as u64, 0, 0])
    }

    pub fn mul_i64(self, k: i64) -> Fixed {
        let m = self.mul_u64(k.unsigned_abs());
        if k < 0 {
            m.wrapping_neg()
        } else {
            m
        }
    }

    pub fn mul_i128(self, k: i128) -> Fixed {
        let m = self.mul_u128(k.unsigned_abs());
        if k < 0 {
            m.wrapping_neg()
        } else {
            m
        }
    }

    /// `k·t mod 1` for an arbitrary-size integer; only `k mod 2^256` matters.
    pub fn mul_biguint(self, k: &BigUint) -> Fixed {
        self.mul_limbs(Fixed::from_biguint_mod(k).0)
    }

    pub fn mul_bigint(self, k: &BigInt) -> Fixed {
        let m = self.mul_biguint(k.magnitude());
        if k.sign() == Sign::Minus {
            m.wrapping_neg()
        } else {
            m
        }
    }

    /// Hex rendering of the raw integer, most significant limb first.
    pub fn to_hex(self) -> String {
        format!(
            "0x{:016x}{:016x}{:016x}{:016x}",
            self.0[3], self.0[2], self.0[1], self.0[0]
        )
    }

    pub fn from_hex(s: &str) -> Result<Fixed> {
        let body = s.strip_prefix("0x").unwrap_or(s);
        if body.is_empty() || body.len() > 64 {
            return Err(Error::parse("fixed-point hex", s));
        }
        let n = BigUint::parse_bytes(body.as_bytes(), 16)
            .ok_or_else(|| Error::parse("fixed-point hex", s))?;
        Ok(Fixed::from_biguint_mod(&n))
    }

    /// Number of trailing zero bits, i.e. the coarsest precision that represents
    /// this value exactly is `256 - trailing_zeros`.
    pub fn trailing_zeros(self) -> u32 {
        let mut tz = 0;
        for l in self.0 {
            if l == 0 {
                tz += 64;
            } else {
                return tz + l.trailing_zeros();
            }
        }
        MAX_BITS
    }
}

impl PartialOrd for Fixed {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Fixed {
    fn cmp(&self, other: &Self) -> Ordering {
        for i in (0..4).rev() {
            match self.0[i].cmp(&other.0[i]) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        Ordering::Equal
    }
}

impl Add for Fixed {
    type Output = Fixed;
    #[inline]
    fn add(self, rhs: Fixed) -> Fixed {
        self.wrapping_add(rhs)
    }
}

impl AddAssign for Fixed {
    #[inline]
    fn add_assign(&mut self, rhs: Fixed) {
        *self = self.wrapping_add(rhs);
    }
}

impl Sub for Fixed {
    type Output = Fixed;
    #[inline]
    fn sub(self, rhs: Fixed) -> Fixed {
        self.wrapping_sub(rhs)
    }
}

impl SubAssign for Fixed {
    #[inline]
    fn sub_assign(&mut self, rhs: Fixed) {
        *self = self.wrapping_sub(rhs);
    }
}

impl Neg for Fixed {
    type Output = Fixed;
    fn neg(self) -> Fixed {
        self.wrapping_neg()
    }
}

impl fmt::Debug for Fixed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Fixed({:.17} {})", self.to_f64(), self.to_hex())
    }
}

impl fmt::Display for Fixed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.17}", self.to_f64())
    }
}

impl Serialize for Fixed {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for Fixed {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Fixed::from_hex(&s).map_err(serde::de::Error::custom)
    }
}

/// `‖t‖` for a real `t`, evaluated exactly in 256-bit fixed point and
/// rounded to `bits` fractional bits.
pub fn dist_to_z(t: f64, bits: u32) -> Result<f64> {
    check_bits(bits)?;
    if !t.is_finite() {
        return Err(Error::Domain(format!("dist_to_Z of non-finite value {t}")));
    }
    Ok(Fixed::from_f64(t).round_to_bits(bits).dist_to_z())
}

/// A point of 𝕋^d with a declared fractional-bit budget.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct TorusPoint {
    coords: Vec<Fixed>,
    bits: u32,
}

impl TorusPoint {
    /// Coordinates are rounded to `bits`.
    pub fn new(coords: Vec<Fixed>, bits: u32) -> Result<Self> {
        check_bits(bits)?;
        if coords.is_empty() {
            return Err(Error::InvalidInput("torus point needs at least one coordinate".into()));
        }
        let coords = coords.into_iter().map(|c| c.round_to_bits(bits)).collect();
        Ok(TorusPoint { coords, bits })
    }

    pub fn from_f64s(xs: &[f64], bits: u32) -> Result<Self> {
        if xs.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("torus point coordinates must be finite".into()));
        }
        TorusPoint::new(xs.iter().map(|&x| Fixed::from_f64(x)).collect(), bits)
    }

    pub fn zero(dim: usize, bits: u32) -> Result<Self> {
        TorusPoint::new(vec![Fixed::ZERO; dim], bits)
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn coords(&self) -> &[Fixed] {
        &self.coords
    }

    pub fn coords_mut(&mut self) -> &mut [Fixed] {
        &mut self.coords
    }

    pub fn to_f64s(&self) -> Vec<f64> {
        self.coords.iter().map(|c| c.to_f64()).collect()
    }

    /// Coordinate-wise sum modulo 1.
    pub fn translate(&self, shift: &[Fixed]) -> TorusPoint {
        assert_eq!(shift.len(), self.dim(), "dimension mismatch");
        TorusPoint {
            coords: self
                .coords
                .iter()
                .zip(shift)
                .map(|(a, b)| *a + *b)
                .collect(),
            bits: self.bits,
        }
    }
}
