//! Lacunary lower-bound constructions for circle rotations.
//!
//! φ(x) = Re Σ_{k=1}^K w_k e(q_k x) with q_k the convergent denominators of
//! ω. Along the rotation, (1/N)φ^{(N)}(x) = Re Σ_k w_k 𝓔_N(q_kω) e(q_k x),
//! and at N = q_m this splits into the resonant mode k = m, the modes
//! above it and the modes below it.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::arithmetic::{bb_witnesses, ContinuedFraction};
use crate::dynamics::{exp_sum_avg, exp_sum_avg_abs};
use crate::error::{Error, Result};
use crate::fixed::Fixed;
use crate::kernels::{e_fixed, ModulusOfContinuity, Observable, TrigPoly};
use crate::sum::{ComplexNeumaier, Neumaier};

pub const DEFAULT_TAIL_TOL: f64 = 1e-12;

/// Largest N for which Birkhoff averages are summed along the orbit;
/// beyond it the closed form is used.
pub const DIRECT_LIMIT: u64 = 1 << 22;

#[derive(Clone, Debug, PartialEq)]
pub enum Weight {
    /// q^{−α}.
    Holder(f64),
    /// w(1/q).
    Modulus(ModulusOfContinuity),
    /// e^{−q}.
    Analytic,
}

impl Weight {
    pub fn at(&self, q: f64) -> f64 {
        match self {
            Weight::Holder(a) => q.powf(-a),
            Weight::Modulus(w) => w.evaluate(1.0 / q),
            Weight::Analytic => (-q).exp(),
        }
    }

    fn holder_exponent(&self) -> Option<f64> {
        match self {
            Weight::Holder(a) => Some(*a),
            Weight::Modulus(w) => w.holder_exponent(),
            Weight::Analytic => None,
        }
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Weight::Holder(a) => write!(f, "holder:{a}"),
            Weight::Modulus(w) => write!(f, "modulus:{}", w.label()),
            Weight::Analytic => f.write_str("analytic"),
        }
    }
}

impl FromStr for Weight {
    type Err = Error;

    fn from_str(s: &str) -> Result<Weight> {
        let s = s.trim();
        let bad = |msg: &str| Error::parse("weight", format!("{s}: {msg}"));
        if s == "analytic" {
            return Ok(Weight::Analytic);
        }
        if let Some(a) = s.strip_prefix("holder:") {
            let a: f64 = a.trim().parse().map_err(|_| bad("exponent must be a number"))?;
            if !(a > 0.0 && a <= 1.0) {
                return Err(bad("exponent must lie in (0, 1]"));
            }
            return Ok(Weight::Holder(a));
        }
        if let Some(w) = s.strip_prefix("modulus:") {
            return Ok(Weight::Modulus(w.parse()?));
        }
        Err(bad("expected holder:α, modulus:<w> or analytic"))
    }
}

#[derive(Clone, Debug)]
pub struct LacunaryObservable {
    pub cf: ContinuedFraction,
    pub weight: Weight,
    /// q_1..q_K.
    pub freqs: Vec<u128>,
    /// w_1..w_K.
    pub weights: Vec<f64>,
    pub omega: Fixed,
    /// Upper bound for Σ_{k>K} w_k.
    pub tail_bound: f64,
}

/// Σ_{k>K} w(q_k), with exact q_k up to the certified prefix and the
/// minimal growth q_{k+1} ≥ q_k + q_{k−1} beyond it.
fn tail_sum(cf: &ContinuedFraction, weight: &Weight, k_terms: usize) -> Option<f64> {
    let l = cf.certified_len;
    let mut acc = Neumaier::new();
    let mut prev2 = cf.q[l.saturating_sub(1)] as f64;
    let mut prev = cf.q[l] as f64;
    for k in k_terms + 1..=l {
        acc.add(weight.at(cf.q[k] as f64));
    }
    let mut last = f64::INFINITY;
    for _ in 0..100_000 {
        let q = prev + prev2;
        let t = weight.at(q);
        acc.add(t);
        if t == 0.0 || (t < 1e-6 * acc.value().max(1e-300) && t < last) {
            // Fibonacci growth: the remaining terms decay at least as fast as
            // the last step ratio allows, bounded here by one more term
            // scaled by the observed ratio.
            let r = if last.is_finite() && last > 0.0 { t / last } else { 0.0 };
            if r < 1.0 {
                acc.add(t * r / (1.0 - r));
                return Some(acc.value());
            }
        }
        last = t;
        prev2 = prev;
        prev = q;
        if !q.is_finite() {
            return Some(acc.value());
        }
    }
    None
}

/// Build the truncated lacunary series with tail below `tol`.
pub fn build_lacunary(cf: &ContinuedFraction, weight: Weight, tol: f64) -> Result<LacunaryObservable> {
    if cf.certified_len < 1 {
        return Err(Error::Uncertified("empty continued fraction".into()));
    }
    let omega = cf.omega()?;
    let mut k_terms = None;
    for k in 1..=cf.certified_len {
        match tail_sum(cf, &weight, k) {
            Some(t) if t <= tol => {
                k_terms = Some((k, t));
                break;
            }
            None => break,
            _ => {}
        }
    }
    let (k, tail) = k_terms.ok_or_else(|| {
        Error::Uncertified(format!(
            "tail of the {weight} series does not reach {tol:e} within {} certified denominators",
            cf.certified_len
        ))
    })?;
    let freqs: Vec<u128> = cf.q[1..=k].to_vec();
    let weights = freqs.iter().map(|&q| weight.at(q as f64)).collect();
    Ok(LacunaryObservable {
        cf: cf.clone(),
        weight,
        freqs,
        weights,
        omega,
        tail_bound: tail,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Summed along the orbit.
    Direct,
    /// From the exponential-sum formula.
    ClosedForm,
}

impl LacunaryObservable {
    pub fn k_terms(&self) -> usize {
        self.freqs.len()
    }

    /// q_m for 1 ≤ m ≤ certified_len.
    pub fn q(&self, m: usize) -> Result<u128> {
        if m == 0 || m > self.cf.certified_len {
            return Err(Error::Uncertified(format!("q_{m} is not certified")));
        }
        Ok(self.cf.q[m])
    }

    pub fn eval(&self, x: Fixed) -> f64 {
        let mut acc = Neumaier::new();
        for (&q, &w) in self.freqs.iter().zip(&self.weights) {
            acc.add(w * e_fixed(x.mul_u128(q)).re);
        }
        acc.value()
    }

    /// The k-th mode's contribution to (1/N)φ^{(N)}(x).
    fn mode_average(&self, k: usize, n: u64, x: Fixed) -> f64 {
        let q = self.freqs[k - 1];
        let t = self.omega.mul_u128(q);
        self.weights[k - 1] * (exp_sum_avg(t, n) * e_fixed(x.mul_u128(q))).re
    }

    /// (1/N)φ^{(N)}(x) − ∫φ from the exponential-sum formula.
    pub fn average_closed(&self, n: u64, x: Fixed) -> f64 {
        (1..=self.k_terms()).map(|k| self.mode_average(k, n, x)).collect::<Neumaier>().value()
    }

    /// (1/N)φ^{(N)}(x) − ∫φ summed along the orbit.
    pub fn average_direct(&self, n: u64, x: Fixed) -> f64 {
        let mut acc = ComplexNeumaier::new();
        for (&q, &w) in self.freqs.iter().zip(&self.weights) {
            let step = self.omega.mul_u128(q);
            let mut ph = x.mul_u128(q);
            let mut s = Neumaier::new();
            for _ in 0..n {
                s.add(e_fixed(ph).re);
                ph += step;
            }
            acc.add(Complex64::new(w * s.value(), 0.0));
        }
        acc.value().re / n as f64
    }

    /// Orbit sum when N is small enough, closed form otherwise.
    pub fn average(&self, n: u64, x: Fixed) -> (f64, Method) {
        if n <= DIRECT_LIMIT {
            (self.average_direct(n, x), Method::Direct)
        } else {
            (self.average_closed(n, x), Method::ClosedForm)
        }
    }

    /// Norm bound for the Hölder case: Σw plus the seminorm bound
    /// 4π/(1 − 2^{α−1}) + 4/(1 − 2^{−α}) from q_{k+2} ≥ 2q_k.
    fn holder_norm(&self, alpha: f64) -> Option<f64> {
        if alpha >= 1.0 {
            return None;
        }
        let sup: f64 = self.weights.iter().sum();
        let semi = 4.0 * std::f64::consts::PI / (1.0 - 2f64.powf(alpha - 1.0)) + 4.0 / (1.0 - 2f64.powf(-alpha));
        Some(sup + semi)
    }

    /// The series as an [`Observable`] on 𝕋. Modes that fit an i64 key go
    /// to the spectral part; the rest, if any, are evaluated pointwise.
    pub fn observable(&self) -> Observable {
        let mut p = TrigPoly::new(1);
        let mut big: Vec<(u128, f64)> = Vec::new();
        for (&q, &w) in self.freqs.iter().zip(&self.weights) {
            match i64::try_from(q) {
                Ok(k) => p.add_real_mode(vec![k], Complex64::new(w, 0.0)),
                Err(_) => big.push((q, w)),
            }
        }
        let mut o = Observable::from_trig(format!("lacunary:{}", self.weight), p);
        if !big.is_empty() {
            o.pointwise = Some(std::sync::Arc::new(move |x: &[Fixed]| {
                big.iter().map(|&(q, w)| w * e_fixed(x[0].mul_u128(q)).re).sum()
            }));
        }
        let sup: f64 = self.weights.iter().sum();
        o.sup_bound = sup;
        o.mean_hint = Some(0.0);
        match (&self.weight, self.weight.holder_exponent().and_then(|a| self.holder_norm(a))) {
            (Weight::Holder(a), Some(norm)) => o.with_modulus(ModulusOfContinuity::Holder(*a), norm),
            (Weight::Analytic, _) => {
                let lip: f64 = self.freqs.iter().zip(&self.weights).map(|(&q, &w)| w * q as f64).sum();
                o.with_modulus(ModulusOfContinuity::Holder(1.0), sup + std::f64::consts::TAU * lip)
            }
            (Weight::Holder(a), None) => o
                .with_modulus(ModulusOfContinuity::Holder(*a), 0.0)
                .with_sampled_norm(20_000, 1),
            (Weight::Modulus(w), _) => o.with_modulus(w.clone(), 0.0).with_sampled_norm(20_000, 1),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SharpnessReport {
    pub m: usize,
    pub q_m: u128,
    pub q_next: Option<u128>,
    pub x: f64,
    pub sigma_m: f64,
    pub sigma_gt: f64,
    pub sigma_lt: f64,
    /// Measured (1/q_m)φ^{(q_m)}(x) − ∫φ.
    pub lower_dev: f64,
    pub method: Method,
    /// |σ_m + σ_{>m} + σ_{<m} − lower_dev|.
    pub identity_error: f64,
    pub n_m: Option<u64>,
    pub lower_dev_nm: Option<f64>,
}

/// (σ_m, σ_{>m}, σ_{<m}) of the q_m-step average at x.
pub fn partial_sums(phi: &LacunaryObservable, m: usize, x: Fixed) -> Result<(f64, f64, f64)> {
    let k = phi.k_terms();
    if m < 1 || m > k {
        return Err(Error::InvalidInput(format!("m must lie in 1..={k}")));
    }
    let n = u64::try_from(phi.q(m)?).map_err(|_| Error::InvalidInput("q_m exceeds u64".into()))?;
    let part = |r: std::ops::Range<usize>| r.map(|j| phi.mode_average(j, n, x)).collect::<Neumaier>().value();
    Ok((part(m..m + 1), part(m + 1..k + 1), part(1..m)))
}

/// Split the q_m-step average at x into the three partial sums.
pub fn decompose(phi: &LacunaryObservable, m: usize, x: Fixed) -> Result<SharpnessReport> {
    let k = phi.k_terms();
    if m < 1 || m > k {
        return Err(Error::InvalidInput(format!("m must lie in 1..={k}")));
    }
    let q_m = phi.q(m)?;
    let n = u64::try_from(q_m).map_err(|_| Error::InvalidInput("q_m exceeds u64".into()))?;
    let (sigma_m, sigma_gt, sigma_lt) = partial_sums(phi, m, x)?;
    let (lower_dev, method) = phi.average(n, x);
    Ok(SharpnessReport {
        m,
        q_m,
        q_next: phi.q(m + 1).ok(),
        x: x.to_f64(),
        sigma_m,
        sigma_gt,
        sigma_lt,
        lower_dev,
        method,
        identity_error: (sigma_m + sigma_gt + sigma_lt - lower_dev).abs(),
        n_m: None,
        lower_dev_nm: None,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SharpnessParams {
    /// Gap hypothesis q_{m+1} ≥ C·m·q_m.
    pub c_gap: f64,
    /// Range 0 ≤ l ≤ c·q_{m+1}/q_m.
    pub c_range: f64,
    pub ratio_floor: f64,
}

impl Default for SharpnessParams {
    fn default() -> Self {
        SharpnessParams {
            c_gap: 10.0,
            c_range: 0.125,
            ratio_floor: 0.1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundReport {
    pub m: usize,
    pub q_m: u128,
    pub q_next: u128,
    /// (l, lower_dev) for each tested l.
    pub points: Vec<(u64, f64)>,
    pub all_positive: bool,
    /// min over tested l of lower_dev / w(q_m).
    pub min_ratio: f64,
    /// Largest l such that every tested l' ≤ l has ratio ≥ ratio_floor.
    pub l_bar: Option<u64>,
    /// First tested l where the average is not positive.
    pub breakdown: Option<u64>,
    pub method: Method,
}

fn gap_holds(phi: &LacunaryObservable, m: usize, c_gap: f64) -> Result<(u128, u128)> {
    let q_m = phi.q(m)?;
    let q_next = phi.q(m + 1)?;
    if (q_next as f64) < c_gap * m as f64 * q_m as f64 {
        return Err(Error::HypothesisNotMet(format!(
            "q_{} = {q_next} < {c_gap}·{m}·q_{m} = {}",
            m + 1,
            c_gap * m as f64 * q_m as f64
        )));
    }
    Ok((q_m, q_next))
}

/// The default l-range 0..=⌊c·q_{m+1}/q_m⌋.
pub fn default_l_values(q_m: u128, q_next: u128, c_range: f64) -> Vec<u64> {
    let top = (c_range * q_next as f64 / q_m as f64).floor() as u64;
    (0..=top).collect()
}

/// Measure the q_m-step average at x = l·q_mω for each l.
pub fn verify_lower_bound(
    phi: &LacunaryObservable,
    m: usize,
    l_values: Option<&[u64]>,
    params: &SharpnessParams,
) -> Result<LowerBoundReport> {
    let (q_m, q_next) = gap_holds(phi, m, params.c_gap)?;
    let owned;
    let ls = match l_values {
        Some(v) => v,
        None => {
            owned = default_l_values(q_m, q_next, params.c_range);
            &owned
        }
    };
    let n = u64::try_from(q_m).map_err(|_| Error::InvalidInput("q_m exceeds u64".into()))?;
    let base = phi.omega.mul_u128(q_m);
    let scale = phi.weight.at(q_m as f64);
    let mut method = Method::Direct;
    let points: Vec<(u64, f64)> = ls
        .iter()
        .map(|&l| {
            let (v, how) = phi.average(n, base.mul_u64(l));
            method = how;
            (l, v)
        })
        .collect();
    let mut l_bar = None;
    for &(l, v) in &points {
        if v / scale >= params.ratio_floor {
            l_bar = Some(l);
        } else {
            break;
        }
    }
    Ok(LowerBoundReport {
        m,
        q_m,
        q_next,
        all_positive: points.iter().all(|&(_, v)| v > 0.0),
        min_ratio: points.iter().map(|&(_, v)| v / scale).fold(f64::INFINITY, f64::min),
        breakdown: points.iter().find(|&&(_, v)| v <= 0.0).map(|&(l, _)| l),
        points,
        l_bar,
        method,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NmReport {
    pub m: usize,
    pub q_m: u128,
    pub l_bar: u64,
    pub n_m: u64,
    /// (1/N_m)φ^{(N_m)}(0) − ∫φ.
    pub lower_dev_nm: f64,
    /// lower_dev_nm / w(q_m).
    pub ratio: f64,
    pub passes: bool,
    pub method: Method,
}

/// The N_m = (l̄+1)q_m average at 0.
pub fn verify_nm_bound(phi: &LacunaryObservable, m: usize, params: &SharpnessParams) -> Result<NmReport> {
    let lb = verify_lower_bound(phi, m, None, params)?;
    let l_bar = lb
        .l_bar
        .ok_or_else(|| Error::HypothesisNotMet(format!("no l passes the ratio floor at m = {m}")))?;
    let n_m = (l_bar + 1) * lb.q_m as u64;
    let (v, method) = phi.average(n_m, Fixed::ZERO);
    let ratio = v / phi.weight.at(lb.q_m as f64);
    Ok(NmReport {
        m,
        q_m: lb.q_m,
        l_bar,
        n_m,
        lower_dev_nm: v,
        ratio,
        passes: ratio >= params.ratio_floor,
        method,
    })
}

/// Indices m with a_{m+1} ≥ C·m among the certified quotients.
pub fn borel_bernstein_schedule(cf: &ContinuedFraction, c: f64) -> Vec<usize> {
    bb_witnesses(cf, c)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlowRateReport {
    pub m: usize,
    pub q_m: u128,
    pub q_next: u128,
    pub n_m: u64,
    /// Largest |(1/N_m)φ^{(N_m)}(x) − ∫φ| over the probe points.
    pub deviation: f64,
    pub argmax_x: f64,
    /// w(q_m).
    pub weight_m: f64,
}

/// The deviation at N_m = (⌊c·q_{m+1}/q_m⌋ + 1)·q_m, maximised over a grid
/// of `grid` points; a lower bound for ρ(N_m).
pub fn slow_rate(phi: &LacunaryObservable, m: usize, c_range: f64, grid: usize) -> Result<SlowRateReport> {
    let q_m = phi.q(m)?;
    let q_next = phi.q(m + 1)?;
    let l = (c_range * q_next as f64 / q_m as f64).floor() as u128;
    let n_m = u64::try_from((l + 1) * q_m).map_err(|_| Error::InvalidInput("N_m exceeds u64".into()))?;
    let step = Fixed::from_ratio(&1.into(), &(grid as u64).into(), 256);
    let factors: Vec<Complex64> = (1..=phi.k_terms())
        .map(|k| phi.weights[k - 1] * exp_sum_avg(phi.omega.mul_u128(phi.freqs[k - 1]), n_m))
        .collect();
    let (mut best, mut arg) = (-1.0, 0.0);
    for j in 0..grid {
        let x = step.mul_u64(j as u64);
        let v: f64 = factors
            .iter()
            .zip(&phi.freqs)
            .map(|(f, &q)| (f * e_fixed(x.mul_u128(q))).re)
            .collect::<Neumaier>()
            .value()
            .abs();
        if v > best {
            best = v;
            arg = x.to_f64();
        }
    }
    Ok(SlowRateReport {
        m,
        q_m,
        q_next,
        n_m,
        deviation: best,
        argmax_x: arg,
        weight_m: phi.weight.at(q_m as f64),
    })
}

/// Upper bound for |σ_{<m}| at N = q_m from |𝓔_N(t)| ≤ 1/(2N‖t‖).
pub fn past_mode_bound(phi: &LacunaryObservable, m: usize) -> Result<f64> {
    let q_m = phi.q(m)?;
    let n = u64::try_from(q_m).map_err(|_| Error::InvalidInput("q_m exceeds u64".into()))?;
    Ok((1..m.min(phi.k_terms() + 1))
        .map(|k| phi.weights[k - 1] * exp_sum_avg_abs(phi.omega.mul_u128(phi.freqs[k - 1]), n))
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arithmetic::{expand_cf, Frequency, Rule};
    use crate::kernels::fourier_coefficient;
    use num_bigint::BigUint;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeMap;

    fn golden_cf() -> ContinuedFraction {
        expand_cf(&Frequency::golden(), u128::MAX >> 2).unwrap()
    }

    fn spike_cf() -> ContinuedFraction {
        let over = BTreeMap::from([(7usize, BigUint::from(1000u32))]);
        expand_cf(&Frequency::rule(Rule::Spike(over)), u128::MAX >> 2).unwrap()
    }

    #[test]
    fn holder_one_at_zero() {
        let phi = build_lacunary(&golden_cf(), Weight::Holder(1.0), DEFAULT_TAIL_TOL).unwrap();
        assert_eq!(&phi.freqs[..5], &[1, 2, 3, 5, 8]);
        assert_eq!(phi.weights[1], 0.5);
        let total: f64 = phi.weights.iter().sum();
        assert!((phi.eval(Fixed::ZERO) - total).abs() < 1e-12);
        assert!(phi.tail_bound <= DEFAULT_TAIL_TOL);
    }

    #[test]
    fn coefficients_split_evenly() {
        let mut phi = build_lacunary(&golden_cf(), Weight::Holder(0.5), DEFAULT_TAIL_TOL).unwrap();
        let spectral = phi.observable().spectral.unwrap();
        for (&q, &w) in phi.freqs.iter().zip(&phi.weights).take(60) {
            let q = q as i64;
            assert_eq!(spectral.get(&[q]), Complex64::new(w / 2.0, 0.0));
            assert_eq!(spectral.get(&[-q]), Complex64::new(w / 2.0, 0.0));
        }
        // quadrature oracle on a truncation that the grid resolves
        phi.freqs.truncate(6);
        phi.weights.truncate(6);
        let o = phi.observable();
        for k in 1..=6 {
            let q = phi.freqs[k - 1] as i64;
            for s in [q, -q] {
                let c = fourier_coefficient(&o, &[s], 64).unwrap();
                assert!((c.re - phi.weights[k - 1] / 2.0).abs() < 1e-12 && c.im.abs() < 1e-12);
            }
        }
        assert!(fourier_coefficient(&o, &[4], 64).unwrap().norm() < 1e-12);
    }

    #[test]
    fn analytic_truncation() {
        let cf = golden_cf();
        let phi = build_lacunary(&cf, Weight::Analytic, DEFAULT_TAIL_TOL).unwrap();
        assert!(phi.k_terms() <= 40);
        // oracle: the next omitted term alone
        let k = phi.k_terms();
        assert!((-(cf.q[k + 1] as f64)).exp() <= DEFAULT_TAIL_TOL);
        assert!((-(cf.q[k] as f64)).exp() > DEFAULT_TAIL_TOL / 10.0);
    }

    #[test]
    fn log_holder_tail_is_uncertified() {
        let w = Weight::Modulus(ModulusOfContinuity::LogHolder);
        assert!(matches!(build_lacunary(&golden_cf(), w, 1e-12), Err(Error::Uncertified(_))));
    }

    #[test]
    fn decomposition_identity() {
        let phi = build_lacunary(&golden_cf(), Weight::Holder(0.5), DEFAULT_TAIL_TOL).unwrap();
        let r = decompose(&phi, 8, Fixed::ZERO).unwrap();
        assert!(r.identity_error <= 1e-10, "{}", r.identity_error);
        assert_eq!(decompose(&phi, 1, Fixed::from_f64(0.3)).unwrap().sigma_lt, 0.0);
        let last = decompose(&phi, phi.k_terms(), Fixed::from_f64(0.3));
        if let Ok(r) = last {
            assert_eq!(r.sigma_gt, 0.0);
        }
    }

    #[test]
    fn tail_domination() {
        // |σ_{>m}| never exceeds the weight mass above m, which is a bounded
        // multiple of q_{m+1}^{−α}
        for cf in [spike_cf(), golden_cf()] {
            let phi = build_lacunary(&cf, Weight::Holder(0.5), DEFAULT_TAIL_TOL).unwrap();
            for m in 2..12 {
                let q_next = phi.q(m + 1).unwrap() as f64;
                let mass: f64 = phi.weights[m..].iter().sum::<f64>() + phi.tail_bound;
                assert!(mass * q_next.sqrt() <= 6.0);
                for j in 0..256u64 {
                    let x = Fixed::from_ratio(&j.into(), &256u64.into(), 256);
                    let (_, gt, _) = partial_sums(&phi, m, x).unwrap();
                    assert!(gt.abs() <= mass);
                }
            }
        }
    }

    #[test]
    fn sharp_lower_bound_on_spike() {
        let phi = build_lacunary(&spike_cf(), Weight::Holder(0.5), DEFAULT_TAIL_TOL).unwrap();
        let params = SharpnessParams::default();
        let lb = verify_lower_bound(&phi, 6, Some(&[0]), &params).unwrap();
        assert!(lb.points[0].1 * 13f64.sqrt() >= 0.4);
        let nm = verify_nm_bound(&phi, 6, &params).unwrap();
        assert!(nm.passes, "{nm:?}");
    }

    #[test]
    fn single_mode_is_exact_and_telescopes() {
        let cf = spike_cf();
        let mut phi = build_lacunary(&cf, Weight::Holder(0.5), DEFAULT_TAIL_TOL).unwrap();
        let m = 6;
        phi.freqs = vec![phi.freqs[m - 1]];
        phi.weights = vec![phi.weights[m - 1]];
        let q_m = cf.q[m];
        let base = phi.omega.mul_u128(q_m);
        let params = SharpnessParams {
            c_gap: 0.0,
            ..Default::default()
        };
        // single mode: the m-th q is now the first frequency
        let lb = verify_lower_bound(&phi, m, Some(&[0, 1, 2, 3]), &params);
        let t = phi.omega.mul_u128(q_m);
        let want = |l: u64| phi.weights[0] * (exp_sum_avg(t, q_m as u64) * e_fixed(base.mul_u64(l).mul_u128(q_m))).re;
        let lb = lb.unwrap();
        for &(l, v) in &lb.points {
            assert!((v - want(l)).abs() < 1e-13);
        }
        let n4 = 4 * q_m as u64;
        let avg = phi.average_direct(n4, Fixed::ZERO);
        let mean: f64 = lb.points.iter().map(|p| p.1).sum::<f64>() / 4.0;
        assert!((avg - mean).abs() < 1e-13);
    }

    #[test]
    fn closed_form_average_matches_orbit() {
        let cf = expand_cf(&Frequency::rule(Rule::Linear), u128::MAX >> 2).unwrap();
        let phi = build_lacunary(&cf, Weight::Holder(0.5), DEFAULT_TAIL_TOL).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [1u64, 7, 43, 1000, 9976] {
            for _ in 0..4 {
                let x = Fixed::from_limbs(rng.gen());
                let (d, c) = (phi.average_direct(n, x), phi.average_closed(n, x));
                assert!((d - c).abs() < 1e-10, "N={n}: {d} vs {c}");
            }
        }
    }

    #[test]
    fn golden_fails_gap_hypothesis() {
        let phi = build_lacunary(&golden_cf(), Weight::Holder(0.5), DEFAULT_TAIL_TOL).unwrap();
        let e = verify_nm_bound(&phi, 8, &SharpnessParams::default());
        assert!(matches!(e, Err(Error::HypothesisNotMet(_))));
    }

    #[test]
    fn schedules() {
        let lin = expand_cf(&Frequency::rule(Rule::Linear), 1u128 << 100).unwrap();
        let s = borel_bernstein_schedule(&lin, 1.0);
        assert_eq!(s, (1..lin.certified_len).collect::<Vec<_>>());
        assert_eq!(borel_bernstein_schedule(&golden_cf(), 1.0), vec![1]);
        let sq = expand_cf(&Frequency::rule(Rule::SqEven), 1u128 << 100).unwrap();
        // a_{m+1} = (m+1)² ≥ m exactly when m + 1 is even
        let want: Vec<usize> = (1..sq.certified_len).filter(|m| (m + 1) % 2 == 0).collect();
        assert_eq!(borel_bernstein_schedule(&sq, 1.0), want);
    }

    #[test]
    fn holder_quotient_bounded() {
        let phi = build_lacunary(&golden_cf(), Weight::Holder(0.5), DEFAULT_TAIL_TOL).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut worst = 0f64;
        for _ in 0..1000 {
            let x = Fixed::from_limbs(rng.gen());
            for e in 4..=20 {
                let h = 2f64.powi(-e);
                let d = (phi.eval(x + Fixed::from_f64(h)) - phi.eval(x)).abs();
                worst = worst.max(d / h.sqrt());
            }
        }
        assert!(worst <= phi.observable().norm_est, "{worst}");
    }
}
