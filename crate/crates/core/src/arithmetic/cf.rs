//! Continued-fraction expansions, convergents and best approximations.

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::frequency::{Frequency, Quotient, Step};
use crate::error::{Error, Result};
use crate::fixed::Fixed;

/// Partial quotients `a_1..a_M` with convergents `p_0/q_0 .. p_M/q_M`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuedFraction {
    pub a: Vec<u128>,
    pub p: Vec<u128>,
    pub q: Vec<u128>,
    pub certified_len: usize,
    /// The expansion is complete (rational input).
    #[serde(default)]
    pub terminated: bool,
    /// ω in fixed point, for distance computations.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<Fixed>,
}

/// Expand ω until the next denominator would exceed `max_q`.
pub fn expand_cf(omega: &Frequency, max_q: u128) -> Result<ContinuedFraction> {
    let (cf, exhausted) = expand_cf_partial(omega, max_q)?;
    if exhausted {
        return Err(Error::PrecisionExhausted {
            certified: cf.certified_len,
            last_q: *cf.q.last().expect("q_0 present"),
            max_q,
        });
    }
    Ok(cf)
}

/// Like [`expand_cf`] but returns the certified prefix together with a flag
/// saying whether the representation ran out of precision before `max_q`.
pub fn expand_cf_partial(omega: &Frequency, max_q: u128) -> Result<(ContinuedFraction, bool)> {
    if max_q < 1 {
        return Err(Error::InvalidInput("max_q must be ≥ 1".into()));
    }
    let mut cf = ContinuedFraction {
        a: Vec::new(),
        p: vec![0],
        q: vec![1],
        certified_len: 0,
        terminated: false,
        omega: omega.to_fixed().ok(),
    };
    let (mut p_prev, mut q_prev) = (1u128, 0u128);
    let mut stream = omega.stream();
    let exhausted = loop {
        match stream.next() {
            Step::Quotient(Quotient::Int(a)) => {
                let (p_n, q_n) = (*cf.p.last().unwrap(), *cf.q.last().unwrap());
                let next = a
                    .to_u128()
                    .and_then(|a| a.checked_mul(q_n).and_then(|x| x.checked_add(q_prev)).map(|q| (a, q)));
                let Some((a, q_next)) = next.filter(|(_, q)| *q <= max_q) else {
                    break false;
                };
                let p_next = a * p_n + p_prev;
                cf.a.push(a);
                cf.p.push(p_next);
                cf.q.push(q_next);
                p_prev = p_n;
                q_prev = q_n;
            }
            Step::Quotient(Quotient::Huge { .. }) => break false,
            Step::End => {
                cf.terminated = true;
                break false;
            }
            Step::Unknown(a_min) => {
                // Still certified complete if every admissible quotient overshoots.
                let q_n = BigUint::from(*cf.q.last().unwrap());
                break a_min * q_n + BigUint::from(q_prev) <= BigUint::from(max_q);
            }
        }
    };
    cf.certified_len = cf.a.len();
    Ok((cf, exhausted))
}

impl ContinuedFraction {
    /// `q_1..q_M`.
    pub fn denominators(&self) -> &[u128] {
        &self.q[1..]
    }

    /// `p_1..p_M`.
    pub fn numerators(&self) -> &[u128] {
        &self.p[1..]
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    /// Largest certified denominator.
    pub fn max_certified_q(&self) -> u128 {
        self.q[self.certified_len]
    }

    pub fn omega(&self) -> Result<Fixed> {
        self.omega
            .ok_or_else(|| Error::InvalidInput("continued fraction carries no fixed-point frequency".into()))
    }

    /// `q_n ω − p_n`, using the fixed-point frequency.
    pub fn signed_error(&self, n: usize) -> Result<f64> {
        let w = self.omega()?;
        if n == 0 {
            return Ok(w.to_f64());
        }
        Ok(w.mul_u128(self.q[n]).to_centered_f64())
    }

    /// Index n with `q_n = q` (n ≥ 1), if any.
    pub fn index_of(&self, q: u128) -> Option<usize> {
        self.q[..=self.certified_len].iter().skip(1).position(|&x| x == q).map(|i| i + 1)
    }

    /// Checks the recurrence, coprimality, growth, alternation and sandwich
    /// laws over the certified prefix. Returns a list of violations.
    pub fn verify(&self) -> Vec<String> {
        let mut bad = Vec::new();
        if self.p[0] != 0 || self.q[0] != 1 {
            bad.push("p_0/q_0 must be 0/1".into());
        }
        let n_max = self.certified_len;
        for n in 1..=n_max {
            let a = self.a[n - 1];
            let (pp, qp) = if n >= 2 { (self.p[n - 2], self.q[n - 2]) } else { (1, 0) };
            if self.p[n] != a * self.p[n - 1] + pp || self.q[n] != a * self.q[n - 1] + qp {
                bad.push(format!("recurrence fails at n={n}"));
            }
            if num_integer::gcd(self.p[n], self.q[n]) != 1 {
                bad.push(format!("p_{n}, q_{n} not coprime"));
            }
            if n >= 2 && self.q[n] <= self.q[n - 1] {
                bad.push(format!("q not increasing at n={n}"));
            }
            if (self.q[n] as f64) < 2f64.powf((n as f64 - 1.0) / 2.0) {
                bad.push(format!("q_{n} below 2^((n-1)/2)"));
            }
            if n >= 2 && self.q[n] < 2 * self.q[n - 2] {
                bad.push(format!("doubling q_{n} ≥ 2 q_{} fails", n - 2));
            }
        }
        if let Some(w) = self.omega.filter(|_| !self.terminated) {
            let mut prev: Option<f64> = None;
            for n in 0..n_max {
                let e = if n == 0 { w.to_f64() } else { w.mul_u128(self.q[n]).to_centered_f64() };
                let q_next = self.q[n + 1] as f64;
                let abs = e.abs();
                if !(abs > 1.0 / (2.0 * q_next) && abs < 1.0 / q_next) {
                    bad.push(format!("sandwich fails at n={n}: |q_n ω − p_n| = {abs:e}, q_(n+1) = {q_next}"));
                }
                if let Some(pe) = prev {
                    if abs >= pe.abs() {
                        bad.push(format!("|q_n ω − p_n| not decreasing at n={n}"));
                    }
                    if e.signum() == pe.signum() {
                        bad.push(format!("sign does not alternate at n={n}"));
                    }
                }
                prev = Some(e);
            }
        }
        bad
    }
}

/// `q` is a best-approximation denominator iff it is a certified convergent
/// denominator.
pub fn is_best_approximation(q: u128, cf: &ContinuedFraction) -> Result<bool> {
    if q < 1 {
        return Err(Error::InvalidInput("q must be ≥ 1".into()));
    }
    if q > cf.max_certified_q() && !cf.terminated {
        return Err(Error::Uncertified(format!(
            "q = {q} exceeds the certified range (max q = {})",
            cf.max_certified_q()
        )));
    }
    Ok(q == 1 || cf.index_of(q).is_some())
}

/// Exhaustive oracle: ‖jω‖ > ‖qω‖ for all 1 ≤ j < q.
pub fn exhaustive_best_check(omega: Fixed, q: u64) -> bool {
    let target = omega.mul_u64(q).dist_to_z();
    let mut x = Fixed::ZERO;
    for _ in 1..q {
        x += omega;
        if x.dist_to_z() <= target {
            return false;
        }
    }
    true
}

/// Outcome of [`gap_lower_bound_check`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapCheck {
    pub holds: bool,
    pub exhaustive: bool,
    /// Number of j values tested.
    pub checked: u64,
    /// Largest q checked exhaustively.
    pub threshold: u64,
    /// Smallest observed ‖jω‖·2q_n.
    pub min_ratio: f64,
}

pub const GAP_EXHAUSTIVE_THRESHOLD: u64 = 100_000;
const GAP_SAMPLES: u64 = 20_000;

/// ‖jω‖ > 1/(2 q_n) for 1 ≤ j < q_n.
pub fn gap_lower_bound_check(cf: &ContinuedFraction, n: usize) -> Result<GapCheck> {
    if n == 0 || n > cf.certified_len {
        return Err(Error::Uncertified(format!(
            "index {n} outside certified range 1..={}",
            cf.certified_len
        )));
    }
    let w = cf.omega()?;
    let q = u64::try_from(cf.q[n]).map_err(|_| Error::InvalidInput("q_n too large for the scan".into()))?;
    let bound = 1.0 / (2.0 * q as f64);
    let mut min_ratio = f64::INFINITY;
    let mut record = |d: f64| min_ratio = min_ratio.min(d / bound);
    if q <= GAP_EXHAUSTIVE_THRESHOLD {
        let mut x = Fixed::ZERO;
        for _ in 1..q {
            x += w;
            record(x.dist_to_z());
        }
        Ok(GapCheck {
            holds: q <= 1 || min_ratio > 1.0,
            exhaustive: true,
            checked: q.saturating_sub(1),
            threshold: GAP_EXHAUSTIVE_THRESHOLD,
            min_ratio,
        })
    } else {
        // The previous denominator is the closest return; always include it.
        let mut rng = ChaCha8Rng::seed_from_u64(q);
        let mut checked = 0;
        let qp = cf.q[n - 1] as u64;
        for j in std::iter::once(qp).chain((0..GAP_SAMPLES).map(|_| rng.gen_range(1..q))) {
            record(w.mul_u64(j).dist_to_z());
            checked += 1;
        }
        Ok(GapCheck {
            holds: min_ratio > 1.0,
            exhaustive: false,
            checked,
            threshold: GAP_EXHAUSTIVE_THRESHOLD,
            min_ratio,
        })
    }
}

/// The convergent with the smallest `q ≥ N`.
pub fn find_convergent_at_scale(cf: &ContinuedFraction, n: u128) -> Result<(u128, u128)> {
    if n < 2 {
        return Err(Error::InvalidInput("N must be ≥ 2".into()));
    }
    (1..=cf.certified_len)
        .find(|&i| cf.q[i] >= n)
        .map(|i| (cf.p[i], cf.q[i]))
        .ok_or_else(|| {
            Error::Uncertified(format!(
                "no certified convergent reaches N = {n} (max q = {})",
                cf.max_certified_q()
            ))
        })
}

/// `(1/γ) N log²(N+1)`, the upper end of the window guaranteed under (sDC).
pub fn sdc_window(n: u128, gamma: f64) -> f64 {
    let nf = n as f64;
    nf * (nf + 1.0).ln().powi(2) / gamma
}

/// Denominators as arbitrary-precision integers, convenient for callers
/// multiplying against fixed-point values.
pub fn big_denominators(cf: &ContinuedFraction) -> Vec<BigUint> {
    cf.q.iter().map(|&q| BigUint::from(q)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arithmetic::frequency::Rule;

    #[test]
    fn golden_fibonacci() {
        let cf = expand_cf(&Frequency::golden(), 13).unwrap();
        assert_eq!(cf.a, vec![1; 6]);
        assert_eq!(cf.denominators(), &[1, 2, 3, 5, 8, 13]);
        assert_eq!(cf.numerators(), &[1, 1, 2, 3, 5, 8]);
        assert_eq!(cf.certified_len, 6);
        assert!(cf.verify().is_empty(), "{:?}", cf.verify());
    }

    #[test]
    fn rational_terminates() {
        let cf = expand_cf(&Frequency::rational(1, 3).unwrap(), 1000).unwrap();
        assert_eq!(cf.a, vec![3]);
        assert_eq!(cf.denominators(), &[3]);
        assert!(cf.terminated);
    }

    #[test]
    fn linear_rule() {
        let cf = expand_cf(&Frequency::rule(Rule::Linear), 100).unwrap();
        // q_{n+1} = (n+1) q_n + q_{n-1} by hand
        let mut q = vec![1u128, 1];
        for n in 2..=4u128 {
            let next = n * q[q.len() - 1] + q[q.len() - 2];
            q.push(next);
        }
        assert_eq!(cf.denominators(), &q[1..]);
        assert_eq!(cf.denominators(), &[1, 3, 10, 43]);
    }

    #[test]
    fn best_approximations() {
        let cf = expand_cf(&Frequency::golden(), 1000).unwrap();
        assert!(is_best_approximation(3, &cf).unwrap());
        assert!(!is_best_approximation(4, &cf).unwrap());
        assert!(is_best_approximation(1, &cf).unwrap());
        assert!(is_best_approximation(5000, &cf).is_err());
        let w = cf.omega.unwrap();
        assert!(exhaustive_best_check(w, 3));
        assert!(!exhaustive_best_check(w, 4));
        let d: Vec<f64> = (1..=3).map(|j| w.mul_u64(j).dist_to_z()).collect();
        assert!((d[0] - 0.381966).abs() < 1e-6);
        assert!((d[1] - 0.236068).abs() < 1e-6);
        assert!((d[2] - 0.145898).abs() < 1e-6);
    }

    #[test]
    fn gap_bound_golden() {
        let cf = expand_cf(&Frequency::golden(), 1000).unwrap();
        let n5 = cf.index_of(5).unwrap();
        let g = gap_lower_bound_check(&cf, n5).unwrap();
        assert!(g.holds && g.exhaustive && g.checked == 4);
        let n2 = cf.index_of(2).unwrap();
        assert!(gap_lower_bound_check(&cf, n2).unwrap().holds);
    }

    #[test]
    fn convergent_at_scale() {
        let cf = expand_cf(&Frequency::golden(), 1000).unwrap();
        assert_eq!(find_convergent_at_scale(&cf, 10).unwrap(), (8, 13));
        assert_eq!(find_convergent_at_scale(&cf, 13).unwrap(), (8, 13));
        assert!(find_convergent_at_scale(&cf, 2000).is_err());
        let lin = expand_cf(&Frequency::rule(Rule::Linear), 1000).unwrap();
        assert_eq!(find_convergent_at_scale(&lin, 11).unwrap().1, 43);
    }

    #[test]
    fn decimal_exhausts_precision() {
        // 80 digits of 1/7: the enclosure straddles 1/7, so a_1 ∈ {6, 7}
        let digits = format!("0.{}14", "142857".repeat(13));
        let f: Frequency = format!("dec:{digits}").parse().unwrap();
        let (cf, exhausted) = expand_cf_partial(&f, u128::MAX).unwrap();
        assert!(exhausted);
        assert!(cf.a.is_empty());
        assert!(matches!(expand_cf(&f, 100), Err(Error::PrecisionExhausted { .. })));
        assert!(expand_cf(&f, 5).is_ok());
    }

    #[test]
    fn hidden_quotient_is_certified_large() {
        // 0.1 plus a perturbation at the 81st digit: a_3 is unknown but
        // certainly overshoots any u128 denominator
        let digits = format!("0.1{}123456", "0".repeat(77));
        let f: Frequency = format!("dec:{digits}").parse().unwrap();
        let (cf, exhausted) = expand_cf_partial(&f, u128::MAX).unwrap();
        assert!(!exhausted);
        assert_eq!(cf.a, vec![9, 1]);
    }

    #[test]
    fn json_shape() {
        let cf = expand_cf(&Frequency::golden(), 3).unwrap();
        let v: serde_json::Value = serde_json::to_value(&cf).unwrap();
        assert_eq!(v["a"], serde_json::json!([1, 1, 1]));
        assert_eq!(v["certified_len"], 3);
        let back: ContinuedFraction = serde_json::from_value(v).unwrap();
        assert_eq!(back, cf);
    }
}
