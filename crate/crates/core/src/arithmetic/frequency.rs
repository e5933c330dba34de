//! Frequencies ω ∈ (0, 1) and their exact or interval representations.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::fixed::{check_bits, Fixed, DEFAULT_BITS};

/// A partial quotient. Rule-generated sequences can produce quotients far too
/// large to materialise; those carry a lower bound on their base-2 logarithm.
#[derive(Clone, Debug, PartialEq)]
pub enum Quotient {
    Int(BigUint),
    Huge { log2_lower: f64 },
}

/// Named partial-quotient rules.
#[derive(Clone, Debug, PartialEq)]
pub enum Rule {
    /// a_m = c for all m (`ones` is c = 1).
    Const(u64),
    /// a_m = m.
    Linear,
    /// a_m = 2^(2^m).
    DoubleExp,
    /// All ones except the listed overrides.
    Spike(BTreeMap<usize, BigUint>),
    /// a_m = m² for even m, 1 for odd m.
    SqEven,
    /// a_1 = 1, a_{m+1} = ⌊e^{q_m} / q_m⌋, so q_{m+1} ≈ e^{q_m}.
    LiouvilleExp,
}

impl Rule {
    /// `a_m` given `q_{m-1}` (needed by the self-referential rules).
    pub fn quotient(&self, m: usize, q_prev: &BigUint) -> Quotient {
        assert!(m >= 1);
        match self {
            Rule::Const(c) => Quotient::Int(BigUint::from(*c)),
            Rule::Linear => Quotient::Int(BigUint::from(m)),
            Rule::DoubleExp => {
                if m >= 16 {
                    Quotient::Huge {
                        log2_lower: 2f64.powi(m as i32),
                    }
                } else {
                    Quotient::Int(BigUint::one() << (1usize << m))
                }
            }
            Rule::Spike(over) => Quotient::Int(over.get(&m).cloned().unwrap_or_else(BigUint::one)),
            Rule::SqEven => {
                if m % 2 == 0 {
                    Quotient::Int(BigUint::from(m) * BigUint::from(m))
                } else {
                    Quotient::Int(BigUint::one())
                }
            }
            Rule::LiouvilleExp => {
                if m == 1 {
                    Quotient::Int(BigUint::one())
                } else {
                    floor_exp_over(q_prev)
                }
            }
        }
    }

    fn parse(body: &str) -> Result<Rule> {
        let (name, arg) = match body.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (body, None),
        };
        let bad = |msg: &str| Error::parse("partial-quotient rule", format!("{body}: {msg}"));
        match (name, arg) {
            ("ones", None) => Ok(Rule::Const(1)),
            ("const", Some(c)) => {
                let c: u64 = c.trim().parse().map_err(|_| bad("constant must be a positive integer"))?;
                if c == 0 {
                    return Err(bad("constant must be ≥ 1"));
                }
                Ok(Rule::Const(c))
            }
            ("linear", None) => Ok(Rule::Linear),
            ("double_exp", None) => Ok(Rule::DoubleExp),
            ("sq_even", None) => Ok(Rule::SqEven),
            ("liouville_exp", None) => Ok(Rule::LiouvilleExp),
            ("spike", Some(list)) => {
                let mut over = BTreeMap::new();
                for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                    let (i, v) = item.split_once('=').ok_or_else(|| bad("expected index=value"))?;
                    let i: usize = i.trim().parse().map_err(|_| bad("bad index"))?;
                    let v: BigUint = v.trim().parse().map_err(|_| bad("bad value"))?;
                    if i == 0 || v.is_zero() {
                        return Err(bad("indices start at 1 and values must be ≥ 1"));
                    }
                    over.insert(i, v);
                }
                Ok(Rule::Spike(over))
            }
            _ => Err(bad("unknown rule")),
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rule::Const(1) => write!(f, "ones"),
            Rule::Const(c) => write!(f, "const:{c}"),
            Rule::Linear => write!(f, "linear"),
            Rule::DoubleExp => write!(f, "double_exp"),
            Rule::SqEven => write!(f, "sq_even"),
            Rule::LiouvilleExp => write!(f, "liouville_exp"),
            Rule::Spike(over) => {
                let items: Vec<String> = over.iter().map(|(i, v)| format!("{i}={v}")).collect();
                write!(f, "spike:{}", items.join(","))
            }
        }
    }
}

/// ⌊e^q / q⌋, exact for moderate q and a logarithmic lower bound beyond.
fn floor_exp_over(q: &BigUint) -> Quotient {
    let qf = q.to_f64().unwrap_or(f64::INFINITY);
    if qf > 4096.0 {
        return Quotient::Huge {
            log2_lower: qf * std::f64::consts::LOG2_E - qf.log2() - 1.0,
        };
    }
    let qi = q.to_u64().expect("bounded above");
    let qb = BigInt::from(qi);
    let mut terms = (2 * qi).max(32) + 16;
    loop {
        // Horner: v_k = 1 + q/(k+1) v_{k+1}, v_K = 1, so v_0 = Σ_{k≤K} q^k/k!.
        let mut num = BigInt::one();
        let mut den = BigInt::one();
        for k in (0..terms).rev() {
            let kk = BigInt::from(k + 1);
            num = &den * &kk + &qb * &num;
            den *= kk;
        }
        // Tail Σ_{k>K} q^k/k! ≤ 2 q^{K+1}/(K+1)! once K+2 ≥ 2q.
        let log2_tail = 1.0 + (terms + 1) as f64 * (qi as f64).log2() - log2_factorial(terms + 1);
        if log2_tail > -40.0 {
            terms *= 2;
            continue;
        }
        // tail ≤ 2^-shift
        let shift = (-log2_tail).floor() as u32 - 1;
        let lo = num.div_floor(&(&den * &qb));
        let hi = ((&num << shift) + &den).div_floor(&((&den * &qb) << shift));
        if lo == hi {
            let a = lo.to_biguint().expect("positive");
            return Quotient::Int(if a.is_zero() { BigUint::one() } else { a });
        }
        terms *= 2;
    }
}

fn log2_factorial(n: u64) -> f64 {
    (1..=n).map(|k| (k as f64).log2()).sum()
}

/// Where partial quotients come from.
#[derive(Clone, Debug, PartialEq)]
pub enum PqSource {
    Finite(Vec<BigUint>),
    Rule(Rule),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Repr {
    /// (p + q√d) / r.
    QuadraticSurd {
        p: BigInt,
        q: BigInt,
        d: BigInt,
        r: BigInt,
    },
    PartialQuotients(PqSource),
    /// A decimal literal; the value is only known to lie within one unit of
    /// the last digit.
    DecimalString(String),
    /// Exact rational, accepted for testing.
    Rational { num: BigInt, den: BigInt },
    /// A closed interval known to contain the value.
    Interval { lo: BigRational, hi: BigRational },
}

/// An irrational (or test-rational) frequency in (0, 1).
#[derive(Clone, Debug, PartialEq)]
pub struct Frequency {
    repr: Repr,
    fractional_bits: u32,
}

/// The quotient stream of a continued-fraction expansion.
pub(crate) enum Step {
    Quotient(Quotient),
    /// The expansion terminated (rational value).
    End,
    /// The representation cannot certify the next quotient; it is at least
    /// the carried value.
    Unknown(BigUint),
}

pub(crate) struct QuotientStream {
    state: StreamState,
    m: usize,
    q_prev: BigUint,
    q_prev2: BigUint,
}

enum StreamState {
    Surd { p: BigInt, q: BigInt, d: BigInt },
    Seq(PqSource),
    Rational { num: BigInt, den: BigInt },
    Interval { lo: BigRational, hi: BigRational },
    Done,
}

impl QuotientStream {
    pub(crate) fn next(&mut self) -> Step {
        let step = match &mut self.state {
            StreamState::Done => Step::End,
            StreamState::Seq(PqSource::Finite(list)) => match list.get(self.m) {
                Some(a) => Step::Quotient(Quotient::Int(a.clone())),
                None => Step::End,
            },
            StreamState::Seq(PqSource::Rule(rule)) => Step::Quotient(rule.quotient(self.m + 1, &self.q_prev)),
            StreamState::Surd { p, q, d } => {
                // x = (p + √d)/q with q | d − p², always irrational.
                let s = d.sqrt();
                let a = if q.is_positive() {
                    (&*p + &s).div_floor(q)
                } else {
                    {
                    let nq: BigInt = -&*q;
                    let t: BigInt = &*p + &s;
                    let f: BigInt = t.div_floor(&nq) + 1;
                    -f
                }
                };
                let p_next = &a * &*q - &*p;
                let q_next = (&*d - &p_next * &p_next) / &*q;
                *p = p_next;
                *q = q_next;
                Step::Quotient(Quotient::Int(a.to_biguint().expect("partial quotients are positive")))
            }
            StreamState::Rational { num, den } => {
                if num.is_zero() {
                    Step::End
                } else {
                    let a = den.div_floor(num);
                    let rem = &*den - &a * &*num;
                    *den = num.clone();
                    *num = rem;
                    Step::Quotient(Quotient::Int(a.to_biguint().expect("positive")))
                }
            }
            StreamState::Interval { lo, hi } => {
                if lo.is_zero() || hi.is_zero() || lo.is_negative() {
                    Step::Unknown(BigUint::one())
                } else {
                    let rlo = hi.recip();
                    let rhi = lo.recip();
                    let a = rlo.floor();
                    if a != rhi.floor() || rlo == a {
                        Step::Unknown(a.to_integer().to_biguint().unwrap_or_default().max(BigUint::one()))
                    } else {
                        *lo = &rlo - &a;
                        *hi = &rhi - &a;
                        Step::Quotient(Quotient::Int(a.to_integer().to_biguint().expect("positive")))
                    }
                }
            }
        };
        match &step {
            Step::Quotient(Quotient::Int(a)) => {
                let q_next = a * &self.q_prev + &self.q_prev2;
                self.q_prev2 = std::mem::replace(&mut self.q_prev, q_next);
                self.m += 1;
            }
            Step::Quotient(Quotient::Huge { .. }) | Step::End | Step::Unknown(_) => {
                self.state = StreamState::Done;
            }
        }
        step
    }
}

impl Frequency {
    pub fn new(repr: Repr) -> Result<Frequency> {
        let f = Frequency {
            repr,
            fractional_bits: DEFAULT_BITS,
        };
        f.validate()?;
        Ok(f)
    }

    pub fn with_bits(mut self, bits: u32) -> Result<Frequency> {
        check_bits(bits)?;
        self.fractional_bits = bits;
        Ok(self)
    }

    pub fn surd(p: i64, q: i64, d: i64, r: i64) -> Result<Frequency> {
        Frequency::new(Repr::QuadraticSurd {
            p: p.into(),
            q: q.into(),
            d: d.into(),
            r: r.into(),
        })
    }

    /// (√5 − 1)/2.
    pub fn golden() -> Frequency {
        Frequency::surd(-1, 1, 5, 2).expect("valid surd")
    }

    /// √2 − 1.
    pub fn silver() -> Frequency {
        Frequency::surd(-1, 1, 2, 1).expect("valid surd")
    }

    pub fn rule(rule: Rule) -> Frequency {
        Frequency {
            repr: Repr::PartialQuotients(PqSource::Rule(rule)),
            fractional_bits: DEFAULT_BITS,
        }
    }

    pub fn rational(num: i64, den: i64) -> Result<Frequency> {
        Frequency::new(Repr::Rational {
            num: num.into(),
            den: den.into(),
        })
    }

    pub fn repr(&self) -> &Repr {
        &self.repr
    }

    pub fn fractional_bits(&self) -> u32 {
        self.fractional_bits
    }

    pub fn is_rational(&self) -> bool {
        matches!(
            self.repr,
            Repr::Rational { .. } | Repr::PartialQuotients(PqSource::Finite(_))
        )
    }

    fn validate(&self) -> Result<()> {
        let unit = |lo: &BigRational, hi: &BigRational| lo.is_positive() && hi < &BigRational::one();
        match &self.repr {
            Repr::QuadraticSurd { q, d, r, .. } => {
                if !d.is_positive() || &(d.sqrt() * d.sqrt()) == d {
                    return Err(Error::InvalidInput(format!("surd radicand {d} must be a positive non-square")));
                }
                if q.is_zero() || r.is_zero() {
                    return Err(Error::InvalidInput("surd needs q ≠ 0 and r ≠ 0".into()));
                }
                let (lo, hi) = self.enclosure(64)?;
                if !unit(&lo, &hi) {
                    return Err(Error::InvalidInput(format!("surd value {} outside (0, 1)", self.to_f64())));
                }
            }
            Repr::PartialQuotients(PqSource::Finite(list)) => {
                if list.is_empty() || list.iter().any(|a| a.is_zero()) {
                    return Err(Error::InvalidInput("partial quotients must be a non-empty list of integers ≥ 1".into()));
                }
            }
            Repr::PartialQuotients(PqSource::Rule(_)) => {}
            Repr::DecimalString(s) => {
                let digits = s.trim_start_matches("0.").trim_start_matches('0');
                if digits.len() < 80 {
                    return Err(Error::InvalidInput(format!(
                        "decimal frequencies need at least 80 significant digits, got {}",
                        digits.len()
                    )));
                }
                let (lo, hi) = decimal_interval(s)?;
                if !unit(&lo, &hi) {
                    return Err(Error::InvalidInput("decimal frequency not inside (0, 1)".into()));
                }
            }
            Repr::Rational { num, den } => {
                if !den.is_positive() || !num.is_positive() || num >= den {
                    return Err(Error::InvalidInput(format!("rational {num}/{den} must lie in (0, 1)")));
                }
            }
            Repr::Interval { lo, hi } => {
                if lo > hi || !unit(lo, hi) {
                    return Err(Error::InvalidInput("interval must be ordered and inside (0, 1)".into()));
                }
            }
        }
        Ok(())
    }

    pub(crate) fn stream(&self) -> QuotientStream {
        let state = match &self.repr {
            Repr::QuadraticSurd { p, q, d, r } => {
                let (mut pp, mut dd, mut qq) = (p.clone(), q * q * d, r.clone());
                if q.is_negative() {
                    pp = -pp;
                    qq = -qq;
                }
                // Make the denominator divide d − p².
                let abs = qq.abs();
                pp *= &abs;
                dd *= &abs * &abs;
                qq *= &abs;
                // ω ∈ (0,1) has a_0 = 0; start from 1/ω = (p' + √d')/q'.
                let p1 = -pp;
                let q1 = (&dd - &p1 * &p1) / &qq;
                StreamState::Surd { p: p1, q: q1, d: dd }
            }
            Repr::PartialQuotients(src) => StreamState::Seq(src.clone()),
            Repr::Rational { num, den } => StreamState::Rational {
                num: num.clone(),
                den: den.clone(),
            },
            Repr::DecimalString(s) => {
                let (lo, hi) = decimal_interval(s).expect("validated");
                StreamState::Interval { lo, hi }
            }
            Repr::Interval { lo, hi } => StreamState::Interval {
                lo: lo.clone(),
                hi: hi.clone(),
            },
        };
        QuotientStream {
            state,
            m: 0,
            q_prev: BigUint::one(),
            q_prev2: BigUint::zero(),
        }
    }

    /// A rational interval of width ≤ 2^-bits containing ω (exact when
    /// the value is rational). Errors when the representation is too coarse.
    pub fn enclosure(&self, bits: u32) -> Result<(BigRational, BigRational)> {
        let target = BigRational::new(BigInt::one(), BigInt::one() << bits);
        match &self.repr {
            Repr::Rational { num, den } => {
                let v = BigRational::new(num.clone(), den.clone());
                Ok((v.clone(), v))
            }
            Repr::QuadraticSurd { .. } => {
                let scale = BigInt::one() << bits;
                let f = self.floor_scaled(bits as usize)?;
                Ok((
                    BigRational::new(f.clone(), scale.clone()),
                    BigRational::new(f + 1, scale),
                ))
            }
            Repr::DecimalString(s) => {
                let (lo, hi) = decimal_interval(s)?;
                if &hi - &lo > target {
                    return Err(Error::Uncertified(format!(
                        "decimal literal cannot resolve 2^-{bits}"
                    )));
                }
                Ok((lo, hi))
            }
            Repr::Interval { lo, hi } => {
                if hi - lo > target {
                    return Err(Error::Uncertified(format!("interval cannot resolve 2^-{bits}")));
                }
                Ok((lo.clone(), hi.clone()))
            }
            Repr::PartialQuotients(_) => {
                let mut s = self.stream();
                let (mut p0, mut q0) = (BigInt::one(), BigInt::zero());
                let (mut p1, mut q1) = (BigInt::zero(), BigInt::one());
                loop {
                    match s.next() {
                        Step::Quotient(Quotient::Int(a)) => {
                            let a = BigInt::from(a);
                            let p2 = &a * &p1 + &p0;
                            let q2 = &a * &q1 + &q0;
                            (p0, q0, p1, q1) = (p1, q1, p2, q2);
                            // ω lies between consecutive convergents.
                            if !q0.is_zero() {
                                let width = BigRational::new(BigInt::one(), &q0 * &q1);
                                if width <= target {
                                    let x = BigRational::new(p0.clone(), q0.clone());
                                    let y = BigRational::new(p1.clone(), q1.clone());
                                    return Ok(if x < y { (x, y) } else { (y, x) });
                                }
                            }
                        }
                        Step::Quotient(Quotient::Huge { log2_lower }) => {
                            // |ω − p/q| < 1/(q² a_{n+1}).
                            let c = BigRational::new(p1.clone(), q1.clone());
                            let lq = q1.bits() as f64 * 2.0;
                            if log2_lower + lq - 2.0 < bits as f64 + 1.0 {
                                return Err(Error::Uncertified(
                                    "quotient bound too weak for requested precision".into(),
                                ));
                            }
                            let eps = BigRational::new(BigInt::one(), BigInt::one() << bits) / BigRational::from_integer(BigInt::from(2));
                            return Ok((&c - &eps, &c + &eps));
                        }
                        Step::End => {
                            let v = BigRational::new(p1.clone(), q1.clone());
                            return Ok((v.clone(), v));
                        }
                        Step::Unknown(_) => unreachable!("sequences are always certified"),
                    }
                }
            }
        }
    }

    /// ⌊ω·2^shift⌋ exactly, for surds.
    fn floor_scaled(&self, shift: usize) -> Result<BigInt> {
        match &self.repr {
            Repr::QuadraticSurd { p, q, d, r } => Ok(floor_surd(p, q, d, r, shift)),
            _ => Err(Error::InvalidInput("exact floor only for surds".into())),
        }
    }

    /// Round-to-nearest fixed-point value at the frequency's bit budget.
    pub fn to_fixed(&self) -> Result<Fixed> {
        self.to_fixed_bits(self.fractional_bits)
    }

    pub fn to_fixed_bits(&self, bits: u32) -> Result<Fixed> {
        check_bits(bits)?;
        let scale = bits as usize + 1;
        let floor = match &self.repr {
            Repr::QuadraticSurd { .. } => self.floor_scaled(scale)?,
            Repr::Rational { num, den } => {
                return Ok(Fixed::from_ratio(num, den, bits));
            }
            _ => {
                let mut extra = 8;
                loop {
                    let (lo, hi) = self.enclosure(bits + extra)?;
                    let s = BigRational::from_integer(BigInt::one() << scale);
                    let a = (&lo * &s).floor().to_integer();
                    let b = (&hi * &s).floor().to_integer();
                    if a == b {
                        break a;
                    }
                    if extra > 512 || matches!(self.repr, Repr::DecimalString(_) | Repr::Interval { .. }) {
                        return Err(Error::Uncertified(format!(
                            "cannot round to {bits} bits: value sits on a rounding boundary"
                        )));
                    }
                    extra *= 2;
                }
            }
        };
        let rounded: BigInt = (floor + 1) >> 1u32;
        let n = rounded.mod_floor(&(BigInt::one() << bits)).to_biguint().expect("non-negative");
        Ok(Fixed::from_biguint_mod(&(n << (256 - bits))))
    }

    /// Double-precision value, for display and diagnostics only.
    pub fn to_f64(&self) -> f64 {
        match self.enclosure(64) {
            Ok((lo, hi)) => {
                let m = (lo + hi) / BigRational::from_integer(2.into());
                m.numer().to_f64().unwrap_or(f64::NAN) / m.denom().to_f64().unwrap_or(f64::NAN)
            }
            Err(_) => f64::NAN,
        }
    }

    /// frac(num·ω/den). Surds and rationals stay exact; other
    /// representations become a certified interval.
    pub fn scaled(&self, num: i64, den: u64) -> Result<Frequency> {
        if num == 0 || den == 0 {
            return Err(Error::InvalidInput("scale factor must be a non-zero fraction".into()));
        }
        let (n, dd) = (BigInt::from(num), BigInt::from(den));
        let repr = match &self.repr {
            Repr::QuadraticSurd { p, q, d, r } => {
                let (p2, q2, r2) = (p * &n, q * &n, r * &dd);
                let fl = floor_surd(&p2, &q2, d, &r2, 0);
                Repr::QuadraticSurd {
                    p: p2 - fl * &r2,
                    q: q2,
                    d: d.clone(),
                    r: r2,
                }
            }
            Repr::Rational { num: a, den: b } => {
                let v = BigRational::new(a * &n, b * &dd);
                let fr = &v - v.floor();
                Repr::Rational {
                    num: fr.numer().clone(),
                    den: fr.denom().clone(),
                }
            }
            _ => {
                let bits = self.fractional_bits + 64 + 2 * (num.unsigned_abs().max(den).ilog2() + 1);
                let (lo, hi) = self.enclosure(bits)?;
                let k = BigRational::new(n, dd);
                let (mut a, mut b) = (&lo * &k, &hi * &k);
                if a > b {
                    std::mem::swap(&mut a, &mut b);
                }
                if a.floor() != b.floor() {
                    return Err(Error::Uncertified("scaled value straddles an integer".into()));
                }
                let fl = a.floor();
                Repr::Interval { lo: a - &fl, hi: b - fl }
            }
        };
        let f = Frequency {
            repr,
            fractional_bits: self.fractional_bits,
        };
        if f.is_rational() {
            if let Repr::Rational { num, .. } = &f.repr {
                if num.is_zero() {
                    return Err(Error::NotIrrational("scaled frequency is an integer".into()));
                }
            }
        }
        Ok(f)
    }
}

/// ⌊2^shift (p + q√d)/r⌋ for non-square d > 0.
fn floor_surd(p: &BigInt, q: &BigInt, d: &BigInt, r: &BigInt, shift: usize) -> BigInt {
    let a = p << shift;
    let big_d = (q * q * d) << (2 * shift);
    let s = big_d.sqrt();
    // ⌊A ± √D⌋, √D irrational.
    let floor_x = if q.is_positive() { &a + &s } else { &a - &s - 1 };
    if r.is_positive() {
        floor_x.div_floor(r)
    } else {
        // x/r = (−x)/(−r), ⌊−x⌋ = −⌊x⌋ − 1.
        let t: BigInt = -floor_x - 1;
        let nr: BigInt = -r;
        t.div_floor(&nr)
    }
}

fn decimal_interval(s: &str) -> Result<(BigRational, BigRational)> {
    let t = s.trim();
    let (int, frac) = t.split_once('.').unwrap_or((t, ""));
    if int.chars().any(|c| !c.is_ascii_digit()) || frac.chars().any(|c| !c.is_ascii_digit()) || frac.is_empty() {
        return Err(Error::parse("decimal frequency", t));
    }
    let den = BigInt::from(10u32).pow(frac.len() as u32);
    let num: BigInt = format!("{int}{frac}").parse().map_err(|_| Error::parse("decimal frequency", t))?;
    let v = BigRational::new(num, den.clone());
    let ulp = BigRational::new(BigInt::one(), den);
    Ok((&v - &ulp, v + ulp))
}

impl std::str::FromStr for Frequency {
    type Err = Error;

    fn from_str(s: &str) -> Result<Frequency> {
        let s = s.trim();
        let bad = |msg: &str| Error::parse("frequency", format!("{s}: {msg}"));
        match s {
            "golden" => return Ok(Frequency::golden()),
            "silver" => return Ok(Frequency::silver()),
            _ => {}
        }
        if let Some(body) = s.strip_prefix("surd:") {
            let inner = body
                .trim()
                .strip_prefix('(')
                .and_then(|b| b.strip_suffix(')'))
                .ok_or_else(|| bad("expected surd:(p,q,d,r)"))?;
            let parts: Vec<BigInt> = inner
                .split(',')
                .map(|x| x.trim().parse::<BigInt>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| bad("surd components must be integers"))?;
            if parts.len() != 4 {
                return Err(bad("expected four integers"));
            }
            return Frequency::new(Repr::QuadraticSurd {
                p: parts[0].clone(),
                q: parts[1].clone(),
                d: parts[2].clone(),
                r: parts[3].clone(),
            });
        }
        if let Some(body) = s.strip_prefix("pq:") {
            if let Some(rule) = body.strip_prefix("rule:") {
                return Frequency::new(Repr::PartialQuotients(PqSource::Rule(Rule::parse(rule)?)));
            }
            let inner = body
                .trim()
                .strip_prefix('[')
                .and_then(|b| b.strip_suffix(']'))
                .ok_or_else(|| bad("expected pq:[a1,a2,...] or pq:rule:<name>"))?;
            let list: Vec<BigUint> = inner
                .split(',')
                .map(|x| x.trim().parse::<BigUint>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| bad("partial quotients must be positive integers"))?;
            return Frequency::new(Repr::PartialQuotients(PqSource::Finite(list)));
        }
        if let Some(body) = s.strip_prefix("dec:") {
            return Frequency::new(Repr::DecimalString(body.trim().to_string()));
        }
        if let Some(body) = s.strip_prefix("rat:") {
            let (n, d) = body.split_once('/').ok_or_else(|| bad("expected rat:p/q"))?;
            let num: BigInt = n.trim().parse().map_err(|_| bad("bad numerator"))?;
            let den: BigInt = d.trim().parse().map_err(|_| bad("bad denominator"))?;
            return Frequency::new(Repr::Rational { num, den });
        }
        Err(bad("unknown frequency syntax"))
    }
}

impl fmt::Display for Frequency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            Repr::QuadraticSurd { p, q, d, r } => write!(f, "surd:({p},{q},{d},{r})"),
            Repr::PartialQuotients(PqSource::Rule(rule)) => write!(f, "pq:rule:{rule}"),
            Repr::PartialQuotients(PqSource::Finite(list)) => {
                let items: Vec<String> = list.iter().map(|a| a.to_string()).collect();
                write!(f, "pq:[{}]", items.join(","))
            }
            Repr::DecimalString(s) => write!(f, "dec:{s}"),
            Repr::Rational { num, den } => write!(f, "rat:{num}/{den}"),
            Repr::Interval { lo, hi } => write!(f, "interval:[{lo},{hi}]"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quotients(f: &Frequency, n: usize) -> Vec<BigUint> {
        let mut s = f.stream();
        let mut out = Vec::new();
        while out.len() < n {
            match s.next() {
                Step::Quotient(Quotient::Int(a)) => out.push(a),
                _ => break,
            }
        }
        out
    }

    fn ints(v: &[u64]) -> Vec<BigUint> {
        v.iter().map(|&x| BigUint::from(x)).collect()
    }

    #[test]
    fn surd_expansions() {
        assert_eq!(quotients(&Frequency::golden(), 8), ints(&[1; 8]));
        assert_eq!(quotients(&Frequency::silver(), 8), ints(&[2; 8]));
        // √3 − 1 = [0; 1, 2, 1, 2, ...]
        let f = Frequency::surd(-1, 1, 3, 1).unwrap();
        assert_eq!(quotients(&f, 6), ints(&[1, 2, 1, 2, 1, 2]));
        // (5 − √5)/10 ≈ 0.276: negative q
        let g = Frequency::surd(5, -1, 5, 10).unwrap();
        let v = g.to_f64();
        assert!((v - (5.0 - 5f64.sqrt()) / 10.0).abs() < 1e-15);
        let mut x = v;
        let mut expected = Vec::new();
        for _ in 0..6 {
            let y = 1.0 / x;
            expected.push(y.floor() as u64);
            x = y - y.floor();
        }
        assert_eq!(quotients(&g, 6), ints(&expected));
    }

    #[test]
    fn fixed_conversion_matches_f64() {
        let g = Frequency::golden().to_fixed().unwrap();
        assert!((g.to_f64() - (5f64.sqrt() - 1.0) / 2.0).abs() < 1e-16);
        let r = Frequency::rule(Rule::Linear).to_fixed().unwrap();
        // [0;1,2,3,4,...] = I_1(2)/I_0(2) ≈ 0.697774657964
        assert!((r.to_f64() - 0.697_774_657_964_008).abs() < 1e-15);
    }

    #[test]
    fn rule_and_surd_fixed_points_agree() {
        let a = Frequency::golden().to_fixed_bits(256).unwrap();
        let b = Frequency::rule(Rule::Const(1)).to_fixed_bits(256).unwrap();
        assert_eq!(a, b);
        let c = Frequency::silver().to_fixed_bits(200).unwrap();
        let d = Frequency::rule(Rule::Const(2)).to_fixed_bits(200).unwrap();
        assert_eq!(c, d);
    }

    #[test]
    fn liouville_rule_quotients() {
        let f = Frequency::rule(Rule::LiouvilleExp);
        // q: 1, 3, 19; a_4 = ⌊e^19/19⌋
        let a = quotients(&f, 4);
        assert_eq!(a[..3], ints(&[1, 2, 6])[..]);
        let expect = (19f64.exp() / 19.0).floor();
        assert!((a[3].to_f64().unwrap() - expect).abs() <= 1.0);
    }

    #[test]
    fn parse_round_trip() {
        for s in [
            "surd:(-1,1,5,2)",
            "pq:[1,2,3]",
            "pq:rule:linear",
            "pq:rule:spike:7=1000",
            "pq:rule:const:3",
            "rat:1/3",
        ] {
            let f: Frequency = s.parse().unwrap();
            assert_eq!(f.to_string(), s);
        }
        assert!("surd:(1,1,4,3)".parse::<Frequency>().is_err());
        assert!("surd:(0,1,5,1)".parse::<Frequency>().is_err());
        assert!("dec:0.618".parse::<Frequency>().is_err());
        assert!("rat:3/2".parse::<Frequency>().is_err());
    }

    #[test]
    fn scaled_surd_is_exact() {
        let g = Frequency::golden();
        let h = g.scaled(1, 2).unwrap();
        assert!((h.to_f64() - g.to_f64() / 2.0).abs() < 1e-16);
        let t = g.scaled(3, 2).unwrap();
        let expect = (3.0 * g.to_f64() / 2.0).fract();
        assert!((t.to_f64() - expect).abs() < 1e-15);
        let r = Frequency::rule(Rule::Linear).scaled(1, 6).unwrap();
        assert!((r.to_f64() - 0.697_774_657_964_008 / 6.0).abs() < 1e-15);
    }
}
