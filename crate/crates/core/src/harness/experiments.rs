//! Experiment runners. Each takes a validated config and returns rows
//! ready for emission.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, ExperimentKind};
use crate::arithmetic::{expand_cf, find_convergent_at_scale, Frequency};
use crate::dynamics::{char_birkhoff_skew, default_grid, kernel_sum, sup_deviation_schedule, SupOptions};
use crate::envelopes::{envelope_value, fit_scale, Envelope, ScaleFit};
use crate::error::{Error, Result};
use crate::fixed::TorusPoint;
use crate::kernels::{approximate, grid_sup_error, lookup};
use crate::sharpness::{
    build_lacunary, decompose, verify_lower_bound, verify_nm_bound, SharpnessParams, Weight, DEFAULT_TAIL_TOL,
};
use crate::stats::log_log_slope;

const CF_LIMIT: u128 = u128::MAX >> 2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub system: String,
    #[serde(rename = "N")]
    pub n: u64,
    pub grid: usize,
    pub sup_dev: f64,
    /// Grid point attaining the maximum, coordinates joined by `;`.
    pub argmax: String,
    pub envelope: Option<f64>,
    pub wall_ms: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateSeries {
    pub system: String,
    pub observable: String,
    pub rows: Vec<RateRow>,
    /// Least-squares slope of log sup_dev against log N.
    pub slope: Option<f64>,
    pub fit: Option<ScaleFit>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelRow {
    pub frequency: String,
    pub q: u128,
    #[serde(rename = "N")]
    pub n: u64,
    pub sum: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SharpRow {
    pub m: usize,
    pub q_m: Option<u128>,
    pub q_next: Option<u128>,
    pub identity_error: Option<f64>,
    pub min_ratio: Option<f64>,
    pub l_bar: Option<u64>,
    pub n_m: Option<u64>,
    pub nm_ratio: Option<f64>,
    /// Decomposition identity holds to 1e-10.
    pub identity_ok: bool,
    /// Every tested l gives a positive average with ratio ≥ ratio_floor.
    pub positivity_ok: bool,
    /// The N_m average clears ratio_floor.
    pub nm_ok: bool,
    pub passes: bool,
    /// Why the row could not be computed (hypothesis or certification).
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkewRow {
    #[serde(rename = "N")]
    pub n: u64,
    /// max over the starting points of |Σ_{j<N} e(𝐤·S^j x)|.
    pub max_abs: f64,
    pub q: u128,
    pub weyl_bound: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApproxRow {
    pub degree: u64,
    pub quad_points: usize,
    pub sup_error: f64,
}

/// Output of any experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExperimentOutput {
    Rate(RateSeries),
    Kernel { rows: Vec<KernelRow> },
    Sharp { rows: Vec<SharpRow> },
    Skew { rows: Vec<SkewRow>, fit: Option<ScaleFit> },
    Approx { rows: Vec<ApproxRow>, slope: Option<f64> },
}

/// Run the experiment a config describes. With `budget_secs` set, a run
/// that overruns returns [`Error::Timeout`] instead of its output.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let start = Instant::now();
    let out = dispatch(cfg)?;
    if let Some(budget) = cfg.budget_secs {
        if start.elapsed().as_secs_f64() > budget {
            return Err(Error::Timeout {
                scenario: cfg.label(),
                budget_secs: budget,
            });
        }
    }
    Ok(out)
}

fn dispatch(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    Ok(match cfg.experiment {
        ExperimentKind::Rate => ExperimentOutput::Rate(run_rate_experiment(cfg)?),
        ExperimentKind::Kernel => ExperimentOutput::Kernel {
            rows: run_kernel_experiment(cfg)?,
        },
        ExperimentKind::Sharp => ExperimentOutput::Sharp {
            rows: run_sharpness_experiment(cfg)?,
        },
        ExperimentKind::Skew => {
            let (rows, fit) = run_skew_experiment(cfg)?;
            ExperimentOutput::Skew { rows, fit }
        }
        ExperimentKind::Approx => {
            let rows = run_approx_experiment(cfg)?;
            let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.degree as f64, r.sup_error)).collect();
            ExperimentOutput::Approx {
                slope: log_log_slope(&pts),
                rows,
            }
        }
    })
}

fn missing(field: &str) -> Error {
    Error::InvalidInput(format!("missing `{field}`"))
}

/// Sup-deviation sweep over the schedule, with an optional envelope fit.
pub fn run_rate_experiment(cfg: &ExperimentConfig) -> Result<RateSeries> {
    let sys = cfg.system_spec()?;
    let ctx = ExperimentConfig::registry_context(&sys)?;
    let key = cfg.observable.as_deref().ok_or_else(|| missing("observable"))?;
    let phi = lookup(key, &ctx)?;
    let ns = cfg.schedule_or_default(&sys).resolve(ctx.cf.as_ref())?;
    let grid = cfg.grid.unwrap_or_else(|| default_grid(sys.dim()));
    let env = cfg.envelope.as_deref().map(str::parse::<Envelope>).transpose()?;

    let start = Instant::now();
    let results = sup_deviation_schedule(&sys, &phi, &ns, grid, &SupOptions::default())?;
    let wall_ms = if cfg.record_timing {
        start.elapsed().as_millis() as u64
    } else {
        0
    };

    let system = sys.to_string();
    let mut rows = Vec::with_capacity(results.len());
    for r in &results {
        let envelope = match &env {
            Some(e) if r.n >= 3 => Some(envelope_value(e, r.n, ctx.cf.as_ref())?.value),
            _ => None,
        };
        let argmax: Vec<String> = r.argmax_x.to_f64s().iter().map(|v| format!("{v:.9}")).collect();
        rows.push(RateRow {
            system: system.clone(),
            n: r.n,
            grid: r.grid_size,
            sup_dev: r.sup_dev,
            argmax: argmax.join(";"),
            envelope,
            wall_ms,
        });
    }
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.n as f64, r.sup_dev)).collect();
    let fit = match &env {
        Some(e) => {
            let usable: Vec<(u64, f64)> = rows.iter().filter(|r| r.n >= 3).map(|r| (r.n, r.sup_dev)).collect();
            if usable.len() >= 3 {
                Some(fit_scale(&usable, e)?)
            } else {
                None
            }
        }
        None => None,
    };
    Ok(RateSeries {
        system,
        observable: phi.name.clone(),
        rows,
        slope: log_log_slope(&pts),
        fit,
    })
}

/// Kernel sums at every certified q in [2, q_max], for each frequency and N.
pub fn run_kernel_experiment(cfg: &ExperimentConfig) -> Result<Vec<KernelRow>> {
    let freqs = cfg.frequencies.as_ref().ok_or_else(|| missing("frequencies"))?;
    let ns = cfg.n_values.as_ref().ok_or_else(|| missing("n_values"))?;
    let q_max = cfg.q_max.unwrap_or(10_000) as u128;
    let mut rows = Vec::new();
    for f in freqs {
        let freq: Frequency = f.parse()?;
        let cf = expand_cf(&freq, q_max.max(2))?;
        for i in 1..=cf.certified_len {
            let q = cf.q[i];
            if q < 2 || (i > 1 && cf.q[i - 1] == q) {
                continue;
            }
            for &n in ns {
                let ks = kernel_sum(&cf, i, n)?;
                rows.push(KernelRow {
                    frequency: f.clone(),
                    q,
                    n,
                    sum: ks.sum,
                    ratio: ks.ratio,
                });
            }
        }
    }
    Ok(rows)
}

/// Lower-bound verification for each requested m. Rows that fail a
/// hypothesis are kept with `passes = false` and a note.
pub fn run_sharpness_experiment(cfg: &ExperimentConfig) -> Result<Vec<SharpRow>> {
    let freq: Frequency = cfg.frequency.as_deref().ok_or_else(|| missing("frequency"))?.parse()?;
    let weight: Weight = cfg.weight.as_deref().ok_or_else(|| missing("weight"))?.parse()?;
    let cf = expand_cf(&freq, CF_LIMIT)?;
    let phi = build_lacunary(&cf, weight, DEFAULT_TAIL_TOL)?;
    let defaults = SharpnessParams::default();
    let params = SharpnessParams {
        c_gap: cfg.c_gap.unwrap_or(defaults.c_gap),
        c_range: cfg.c_range.unwrap_or(defaults.c_range),
        ratio_floor: cfg.ratio_floor.unwrap_or(defaults.ratio_floor),
    };
    let ms = match &cfg.m_values {
        Some(v) => v.clone(),
        None => crate::sharpness::borel_bernstein_schedule(&cf, cfg.bb_constant.unwrap_or(1.0)),
    };
    let mut rows = Vec::new();
    for m in ms {
        rows.push(sharp_row(&phi, m, &params));
    }
    Ok(rows)
}

fn sharp_row(phi: &crate::sharpness::LacunaryObservable, m: usize, params: &SharpnessParams) -> SharpRow {
    let mut row = SharpRow {
        m,
        q_m: phi.q(m).ok(),
        q_next: phi.q(m + 1).ok(),
        identity_error: None,
        min_ratio: None,
        l_bar: None,
        n_m: None,
        nm_ratio: None,
        identity_ok: false,
        positivity_ok: false,
        nm_ok: false,
        passes: false,
        note: None,
    };
    let result = (|| -> Result<()> {
        let id = decompose(phi, m, crate::fixed::Fixed::ZERO)?.identity_error;
        row.identity_error = Some(id);
        row.identity_ok = id <= 1e-10;
        let lb = verify_lower_bound(phi, m, None, params)?;
        row.min_ratio = Some(lb.min_ratio);
        row.l_bar = lb.l_bar;
        row.positivity_ok = lb.all_positive && lb.min_ratio >= params.ratio_floor;
        let nm = verify_nm_bound(phi, m, params)?;
        row.n_m = Some(nm.n_m);
        row.nm_ratio = Some(nm.ratio);
        row.nm_ok = nm.passes;
        row.passes = row.identity_ok && row.positivity_ok && row.nm_ok;
        Ok(())
    })();
    if let Err(e) = result {
        row.note = Some(e.to_string());
    }
    row
}

/// Character sums for the skew product at seeded random starting points,
/// compared with the Weyl bound at the smallest convergent q ≥ N of the
/// leading coefficient.
pub fn run_skew_experiment(cfg: &ExperimentConfig) -> Result<(Vec<SkewRow>, Option<ScaleFit>)> {
    let sys = cfg.system_spec()?;
    let k = cfg.k.as_ref().ok_or_else(|| missing("k"))?;
    let ns = cfg.schedule.as_ref().ok_or_else(|| missing("schedule"))?.resolve(None)?;
    let points = cfg.points.unwrap_or(8);
    let eps = cfg.eps.unwrap_or(0.05);
    let d = sys.dim();
    let omega = sys.omega[0];

    let i0 = k.iter().position(|&v| v != 0).ok_or_else(|| missing("non-zero k"))?;
    let degree = d - i0;
    let fact: i64 = (1..=degree as i64).product();
    let lead = sys.freqs[0].scaled(k[i0], fact as u64)?;
    let lead_cf = expand_cf(&lead, CF_LIMIT)?;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let starts: Vec<TorusPoint> = (0..points)
        .map(|_| {
            let xs: Vec<f64> = (0..d).map(|_| rng.gen::<f64>()).collect();
            TorusPoint::from_f64s(&xs, sys.bits)
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    for &n in &ns {
        let mut max_abs: f64 = 0.0;
        for x in &starts {
            max_abs = max_abs.max(char_birkhoff_skew(omega, k, x, n)?.sum.norm());
        }
        let (_, q) = find_convergent_at_scale(&lead_cf, (n as u128).max(2))?;
        let bound = crate::envelopes::weyl_bound(degree, q as f64, n as f64, eps);
        rows.push(SkewRow {
            n,
            max_abs,
            q,
            weyl_bound: bound,
            ratio: max_abs / bound,
        });
    }
    let fit = match cfg.envelope.as_deref() {
        Some(e) => {
            let env: Envelope = e.parse()?;
            let pts: Vec<(u64, f64)> = rows.iter().filter(|r| r.n >= 3).map(|r| (r.n, r.max_abs)).collect();
            if pts.len() >= 3 {
                Some(fit_scale(&pts, &env)?)
            } else {
                None
            }
        }
        None => None,
    };
    Ok((rows, fit))
}

/// Jackson approximation error at each degree.
pub fn run_approx_experiment(cfg: &ExperimentConfig) -> Result<Vec<ApproxRow>> {
    let sys = cfg.system_spec()?;
    let ctx = ExperimentConfig::registry_context(&sys)?;
    let phi = lookup(cfg.observable.as_deref().ok_or_else(|| missing("observable"))?, &ctx)?;
    let degrees = cfg.degrees.as_ref().ok_or_else(|| missing("degrees"))?;
    let factor = cfg.quad_factor.unwrap_or(64);
    let check = cfg.grid.unwrap_or(8192);
    degrees
        .iter()
        .map(|&n| {
            let quad = factor * n as usize;
            let p = approximate(&phi, n, quad)?;
            Ok(ApproxRow {
                degree: n,
                quad_points: quad,
                sup_error: grid_sup_error(&phi, &p, check)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rate_rows_are_reproducible() {
        let text = r#"
experiment = "rate"
system = "rot1:golden"
observable = "cos"
schedule = "list:10,100,1000"
grid = 32
envelope = "sdc:alpha=1"
"#;
        let cfg = ExperimentConfig::parse(text).unwrap();
        let a = run_rate_experiment(&cfg).unwrap();
        let b = run_rate_experiment(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.rows.len(), 3);
        assert!(a.rows.iter().all(|r| r.wall_ms == 0 && r.envelope.is_some()));
        assert!(a.fit.is_some());
        // cos 2πx has average bounded by 1/(N |sin πω|).
        let w = (5f64.sqrt() - 1.0) / 2.0;
        for r in &a.rows {
            assert!(r.sup_dev <= 1.0 / (r.n as f64 * (std::f64::consts::PI * w).sin()) + 1e-12);
        }
    }

    #[test]
    fn rate_schedule_defaults_to_convergents() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::Rate);
        cfg.system = Some("rot1:silver".into());
        cfg.observable = Some("cos".into());
        cfg.grid = Some(16);
        let s = run_rate_experiment(&cfg).unwrap();
        let ns: Vec<u64> = s.rows.iter().map(|r| r.n).collect();
        assert_eq!(&ns[..4], &[2, 5, 12, 29]);
        assert_eq!(*ns.last().unwrap(), 470_832);
    }

    #[test]
    fn budget_overrun_is_a_timeout() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::Approx);
        cfg.system = Some("rot1:golden".into());
        cfg.observable = Some("dist_pow:0.5".into());
        cfg.degrees = Some(vec![64]);
        cfg.budget_secs = Some(0.0);
        assert!(matches!(run_experiment(&cfg), Err(Error::Timeout { .. })));
    }

    #[test]
    fn sharp_rows_keep_failures() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::Sharp);
        cfg.frequency = Some("golden".into());
        cfg.weight = Some("holder:0.5".into());
        cfg.m_values = Some(vec![5]);
        let rows = run_sharpness_experiment(&cfg).unwrap();
        assert!(!rows[0].passes);
        assert!(rows[0].identity_ok && !rows[0].positivity_ok);
        assert!(rows[0].note.as_deref().unwrap().contains("q_6"));
    }

    #[test]
    fn skew_sums_respect_trivial_bound() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::Skew);
        cfg.system = Some("skew:2:golden".into());
        cfg.k = Some(vec![1, 0]);
        cfg.schedule = Some("list:10,100".parse().unwrap());
        cfg.points = Some(3);
        let (rows, _) = run_skew_experiment(&cfg).unwrap();
        assert!(rows.iter().all(|r| r.max_abs <= r.n as f64 + 1e-9));
    }
}
