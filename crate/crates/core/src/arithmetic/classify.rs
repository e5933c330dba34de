//! Diophantine / Liouville classification of a frequency from its
//! continued fraction.

use serde::{Deserialize, Serialize};

use super::cf::ContinuedFraction;
use super::frequency::Frequency;
use crate::error::{Error, Result};
use crate::fixed::Fixed;
use crate::stats::least_squares;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifyOptions {
    pub k_max: u64,
    /// Borel–Bernstein witness constant C in a_{m+1} ≥ C·m.
    pub bb_constant: f64,
    /// Fixed exponents A for which a dominating γ is reported, besides the
    /// free least-squares fit.
    pub fixed_exponents: Vec<f64>,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            k_max: 10_000,
            bb_constant: 1.0,
            fixed_exponents: vec![1.5, 2.0, 3.0],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaAFit {
    pub a: f64,
    /// γ from the least-squares intercept (not necessarily dominating).
    pub gamma_fit: Option<f64>,
    /// Largest γ with q_{n+1} ≤ (1/γ) q_n^A on every certified n.
    pub gamma_bound: f64,
    /// Index attaining `gamma_bound`.
    pub worst_n: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiophantineReport {
    /// min over 1 ≤ k ≤ k_max of ‖kω‖·k·log²(k+1).
    pub gamma_sdc: f64,
    pub gamma_sdc_worst_k: u64,
    pub k_max: u64,
    /// Free (γ, A) fit followed by fixed-A dominating values.
    pub gamma_a_pairs: Vec<GammaAFit>,
    /// max of log q_{n+1} / q_n over the trailing third of the certified
    /// prefix; tracks the lim sup and decays to 0 for bounded-type ω.
    pub beta_estimate: f64,
    /// Running maximum of log q_{n+1} / q_n, one entry per certified n.
    pub beta_running_max: Vec<f64>,
    /// Indices m with a_{m+1} ≥ C·m.
    pub bb_witnesses: Vec<usize>,
    pub bb_constant: f64,
    pub certified_len: usize,
}

pub fn classify(omega: &Frequency, cf: &ContinuedFraction, opts: &ClassifyOptions) -> Result<DiophantineReport> {
    if omega.is_rational() || cf.terminated {
        return Err(Error::NotIrrational(omega.to_string()));
    }
    if opts.k_max < 2 {
        return Err(Error::InvalidInput("k_max must be ≥ 2".into()));
    }
    let w = cf.omega.map_or_else(|| omega.to_fixed(), Ok)?;
    let (gamma_sdc, gamma_sdc_worst_k) = sdc_gamma(w, opts.k_max);

    let m = cf.certified_len;
    let pairs: Vec<(usize, f64, f64)> = (1..m)
        .filter(|&n| cf.q[n] >= 2)
        .map(|n| (n, (cf.q[n] as f64).ln(), (cf.q[n + 1] as f64).ln()))
        .collect();
    let mut gamma_a_pairs = Vec::new();
    let fit = least_squares(&pairs.iter().map(|&(_, x, y)| (x, y)).collect::<Vec<_>>());
    if let Some((slope, intercept)) = fit {
        let (g, n) = dominating_gamma(&pairs, slope);
        gamma_a_pairs.push(GammaAFit {
            a: slope,
            gamma_fit: Some((-intercept).exp()),
            gamma_bound: g,
            worst_n: n,
        });
    }
    for &a in &opts.fixed_exponents {
        let (g, n) = dominating_gamma(&pairs, a);
        gamma_a_pairs.push(GammaAFit {
            a,
            gamma_fit: None,
            gamma_bound: g,
            worst_n: n,
        });
    }

    let ratios: Vec<f64> = (1..m).map(|n| (cf.q[n + 1] as f64).ln() / cf.q[n] as f64).collect();
    let mut beta_running_max = Vec::with_capacity(ratios.len());
    let mut run = 0f64;
    for r in &ratios {
        run = run.max(*r);
        beta_running_max.push(run);
    }
    let tail_start = ratios.len() - ratios.len() / 3;
    let beta_estimate = if ratios.len() >= 3 {
        ratios[tail_start.min(ratios.len() - 1)..].iter().cloned().fold(0.0, f64::max)
    } else {
        run
    };

    Ok(DiophantineReport {
        gamma_sdc,
        gamma_sdc_worst_k,
        k_max: opts.k_max,
        gamma_a_pairs,
        beta_estimate,
        beta_running_max,
        bb_witnesses: bb_witnesses(cf, opts.bb_constant),
        bb_constant: opts.bb_constant,
        certified_len: m,
    })
}

/// Exact minimum of ‖kω‖·k·log²(k+1) over 1 ≤ k ≤ k_max, and its argmin.
pub fn sdc_gamma(w: Fixed, k_max: u64) -> (f64, u64) {
    let mut x = Fixed::ZERO;
    let mut best = (f64::INFINITY, 1);
    for k in 1..=k_max {
        x += w;
        let kf = k as f64;
        let v = x.dist_to_z() * kf * (kf + 1.0).ln().powi(2);
        if v < best.0 {
            best = (v, k);
        }
    }
    best
}

fn dominating_gamma(pairs: &[(usize, f64, f64)], a: f64) -> (f64, usize) {
    pairs
        .iter()
        .map(|&(n, lx, ly)| ((a * lx - ly).exp(), n))
        .fold((f64::INFINITY, 0), |acc, v| if v.0 < acc.0 { v } else { acc })
}

/// Indices m ≥ 1 with a_{m+1} ≥ C·m among certified quotients.
pub fn bb_witnesses(cf: &ContinuedFraction, c: f64) -> Vec<usize> {
    (1..cf.certified_len)
        .filter(|&m| cf.a[m] as f64 >= c * m as f64)
        .collect()
}
