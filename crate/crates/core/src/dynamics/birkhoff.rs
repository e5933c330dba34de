//! Birkhoff sums along fixed-point orbits and grid estimates of the sup
//! deviation ρ_N = ‖S_Nφ/N − ∫φ‖_∞.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::expsum::exp_sum;
use super::system::SystemSpec;
use crate::error::{Error, Result};
use crate::fixed::{Fixed, TorusPoint};
use crate::kernels::{e_fixed, phase, Observable, TrigPoly};
use crate::sum::Neumaier;

/// Per-axis grid resolution used when nothing else is requested.
pub fn default_grid(d: usize) -> usize {
    if d == 1 {
        1 << 10
    } else {
        1 << 6
    }
}

const MAX_GRID_TOTAL: u128 = 1 << 24;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BirkhoffResult {
    pub n: u64,
    /// Points per axis.
    pub grid_size: usize,
    /// max over the grid of |S_Nφ(x)/N − mean|; a lower bound for ρ_N.
    pub sup_dev: f64,
    pub argmax_x: TorusPoint,
    pub mean_used: f64,
    /// sup_dev plus the modulus bound on the gap between grid and torus.
    pub upper_bound: f64,
}

fn check_dims(sys: &SystemSpec, phi: &Observable) -> Result<usize> {
    let d = sys.dim();
    if phi.dim != d {
        return Err(Error::InvalidInput(format!(
            "observable on 𝕋^{} but system on 𝕋^{d}",
            phi.dim
        )));
    }
    Ok(d)
}

/// φ(x) + φ(Tx) + … + φ(T^{N−1}x), orbit advanced in place.
pub fn birkhoff_sum(sys: &SystemSpec, phi: &Observable, x: &TorusPoint, n: u64) -> Result<f64> {
    check_dims(sys, phi)?;
    if n < 1 {
        return Err(Error::InvalidInput("N must be ≥ 1".into()));
    }
    if x.dim() != sys.dim() {
        return Err(Error::InvalidInput("point dimension mismatch".into()));
    }
    let mut state = x.coords().to_vec();
    let mut acc = Neumaier::new();
    for _ in 0..n {
        acc.add(phi.eval(&state));
        sys.step(&mut state);
    }
    Ok(acc.value())
}

/// Birkhoff sums at every N of an increasing schedule, one orbit pass.
pub fn birkhoff_sums_at(sys: &SystemSpec, phi: &Observable, x: &TorusPoint, ns: &[u64]) -> Result<Vec<f64>> {
    check_dims(sys, phi)?;
    check_schedule(ns)?;
    let mut state = x.coords().to_vec();
    Ok(orbit_partial_sums(sys, |s| phi.eval(s), &mut state, ns))
}

fn check_schedule(ns: &[u64]) -> Result<()> {
    if ns.is_empty() || ns[0] < 1 || ns.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput("schedule must be non-empty, ≥ 1 and strictly increasing".into()));
    }
    Ok(())
}

fn orbit_partial_sums(sys: &SystemSpec, f: impl Fn(&[Fixed]) -> f64, state: &mut [Fixed], ns: &[u64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(ns.len());
    let mut acc = Neumaier::new();
    let mut done = 0u64;
    for &n in ns {
        while done < n {
            acc.add(f(state));
            sys.step(state);
            done += 1;
        }
        out.push(acc.value());
    }
    out
}

/// Orbit sums of the spectral part of a rotation: for each mode 𝐤,
/// c_𝐤 Σ_{j<N} e(𝐤·(x + j𝛚)) = c_𝐤 e(𝐤·x) (1 − e(N𝐤·𝛚))/(1 − e(𝐤·𝛚)).
struct SpectralRotation {
    modes: Vec<(Vec<i64>, Vec<Complex64>)>,
}

impl SpectralRotation {
    fn new(p: &TrigPoly, omega: &[Fixed], ns: &[u64]) -> SpectralRotation {
        let modes = p
            .iter()
            .filter(|(_, c)| c.norm() > 0.0)
            .map(|(k, c)| {
                let t = phase(k, omega);
                let factors = ns.iter().map(|&n| c * exp_sum(t, n as u128) / n as f64).collect();
                (k.clone(), factors)
            })
            .collect();
        SpectralRotation { modes }
    }

    /// Re Σ_𝐤 (averaged factor) e(𝐤·x) at schedule slot i.
    fn averages(&self, x: &[Fixed], slots: usize) -> Vec<f64> {
        let mut out = vec![Neumaier::new(); slots];
        for (k, factors) in &self.modes {
            let ex = e_fixed(phase(k, x));
            for (acc, f) in out.iter_mut().zip(factors) {
                acc.add((f * ex).re);
            }
        }
        out.iter().map(Neumaier::value).collect()
    }
}

/// ∫φ from the hint or by midpoint quadrature on a fine grid.
pub fn mean_of(phi: &Observable) -> Result<f64> {
    if let Some(m) = phi.mean_hint {
        return Ok(m);
    }
    let spectral = phi.spectral.as_ref().map_or(0.0, TrigPoly::mean);
    let Some(f) = &phi.pointwise else {
        return Ok(spectral);
    };
    let per_axis: usize = match phi.dim {
        1 => 1 << 20,
        2 => 1 << 10,
        3 => 1 << 7,
        _ => return Err(Error::DimensionTooLarge("mean quadrature needs d ≤ 3".into())),
    };
    let total = per_axis.pow(phi.dim as u32);
    let half = Fixed::from_ratio(&1.into(), &(2 * per_axis as u64).into(), 256);
    let step = half.mul_u64(2);
    let parts: Vec<f64> = (0..total)
        .into_par_iter()
        .with_min_len(4096)
        .map(|idx| {
            let mut rest = idx;
            let x: Vec<Fixed> = (0..phi.dim)
                .map(|_| {
                    let j = rest % per_axis;
                    rest /= per_axis;
                    step.mul_u64(j as u64) + half
                })
                .collect();
            f(&x)
        })
        .collect();
    let s: Neumaier = parts.into_iter().collect();
    Ok(s.value() / total as f64 + spectral)
}

#[derive(Clone, Debug, Default)]
pub struct SupOptions {
    /// Overrides the observable's mean.
    pub mean: Option<f64>,
    /// Sum the spectral part along the orbit instead of in closed form.
    pub force_direct: bool,
}

pub fn sup_deviation(sys: &SystemSpec, phi: &Observable, n: u64, grid: usize) -> Result<BirkhoffResult> {
    Ok(sup_deviation_schedule(sys, phi, &[n], grid, &SupOptions::default())?.remove(0))
}

/// sup_deviation for every N of an increasing schedule. Each grid point
/// is visited by one orbit pass; grid points run in parallel and are
/// merged in index order, so the result is deterministic.
pub fn sup_deviation_schedule(
    sys: &SystemSpec,
    phi: &Observable,
    ns: &[u64],
    grid: usize,
    opts: &SupOptions,
) -> Result<Vec<BirkhoffResult>> {
    let d = check_dims(sys, phi)?;
    check_schedule(ns)?;
    if grid < 16 {
        return Err(Error::InvalidInput("grid must be ≥ 16".into()));
    }
    if d > 3 {
        return Err(Error::DimensionTooLarge(format!("grid sweeps need d ≤ 3, got {d}")));
    }
    let total = (grid as u128).pow(d as u32);
    if total > MAX_GRID_TOTAL {
        return Err(Error::DimensionTooLarge(format!("{grid}^{d} grid points exceed the budget")));
    }
    let total = total as usize;
    let mean = match opts.mean {
        Some(m) => m,
        None => mean_of(phi)?,
    };
    let closed = sys.is_rotation() && !opts.force_direct;
    let spectral = match (&phi.spectral, closed) {
        (Some(p), true) => Some(SpectralRotation::new(p, &sys.omega, ns)),
        _ => None,
    };
    let pointwise = phi.pointwise.clone();
    let orbit_fn = |s: &[Fixed]| -> f64 {
        if closed {
            pointwise.as_ref().map_or(0.0, |f| f(s))
        } else {
            phi.eval(s)
        }
    };
    let needs_orbit = !closed || pointwise.is_some();
    let step = Fixed::from_ratio(&1.into(), &(grid as u64).into(), 256);
    let bits = sys.bits;

    let per_point: Vec<Vec<f64>> = (0..total)
        .into_par_iter()
        .map(|idx| {
            let mut rest = idx;
            let mut x: Vec<Fixed> = (0..d)
                .map(|_| {
                    let j = rest % grid;
                    rest /= grid;
                    step.mul_u64(j as u64).round_to_bits(bits)
                })
                .collect();
            let start = x.clone();
            let mut avgs: Vec<f64> = if needs_orbit {
                orbit_partial_sums(sys, orbit_fn, &mut x, ns)
                    .into_iter()
                    .zip(ns)
                    .map(|(s, &n)| s / n as f64)
                    .collect()
            } else {
                vec![0.0; ns.len()]
            };
            if let Some(sp) = &spectral {
                for (a, v) in avgs.iter_mut().zip(sp.averages(&start, ns.len())) {
                    *a += v;
                }
            }
            avgs.iter().map(|a| (a - mean).abs()).collect()
        })
        .collect();

    let gap = phi.norm_est * phi.modulus.evaluate(0.5 / grid as f64);
    let mut out = Vec::with_capacity(ns.len());
    for (slot, &n) in ns.iter().enumerate() {
        let (mut best, mut arg) = (-1.0f64, 0usize);
        for (idx, devs) in per_point.iter().enumerate() {
            if devs[slot] > best {
                best = devs[slot];
                arg = idx;
            }
        }
        let mut rest = arg;
        let coords: Vec<Fixed> = (0..d)
            .map(|_| {
                let j = rest % grid;
                rest /= grid;
                step.mul_u64(j as u64)
            })
            .collect();
        out.push(BirkhoffResult {
            n,
            grid_size: grid,
            sup_dev: best,
            argmax_x: TorusPoint::new(coords, bits)?,
            mean_used: mean,
            upper_bound: best + gap,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arithmetic::{expand_cf, Frequency};
    use crate::kernels::registry::{coboundary, constant, dist_pow, mode};
    use crate::kernels::ModulusOfContinuity;
    use num_bigint::BigUint;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn golden_rot() -> SystemSpec {
        SystemSpec::rotation(Frequency::golden(), 192).unwrap()
    }

    #[test]
    fn trivial_sums() {
        let sys = golden_rot();
        let x = TorusPoint::from_f64s(&[0.3], 192).unwrap();
        let phi = dist_pow(0.5, 1);
        assert_eq!(birkhoff_sum(&sys, &phi, &x, 1).unwrap(), phi.eval(x.coords()));
        let c = constant(2.5, 1);
        assert!((birkhoff_sum(&sys, &c, &x, 1000).unwrap() - 2500.0).abs() < 1e-9);
        let zero = sup_deviation(&sys, &constant(0.0, 1), 100, 64).unwrap();
        assert_eq!(zero.sup_dev, 0.0);
    }

    #[test]
    fn cosine_orbit_against_rational_oracle() {
        // oracle: frac(jω) from exact 80-digit rationals of the golden mean
        let sys = golden_rot();
        let phi = mode(vec![1]);
        let sum = birkhoff_sum(&sys, &phi, &TorusPoint::zero(1, 192).unwrap(), 1000).unwrap();
        let (lo, _) = Frequency::golden().enclosure(270).unwrap();
        let oracle: f64 = (0..1000u32)
            .map(|j| {
                let v = &lo * num_rational::BigRational::from_integer(j.into());
                let frac = v.clone() - v.floor();
                let f: f64 = num_traits::ToPrimitive::to_f64(&frac).unwrap();
                (std::f64::consts::TAU * f).cos()
            })
            .sum();
        assert!((sum - oracle).abs() < 1e-10, "{sum} vs {oracle}");
    }

    #[test]
    fn closed_form_matches_direct() {
        let sys = SystemSpec::parse_default("rotd:surd:(-1,1,2,1)|surd:(-1,1,3,1)").unwrap();
        let phi = crate::kernels::registry::translation_test();
        let ns = [10, 37, 200];
        let a = sup_deviation_schedule(&sys, &phi, &ns, 16, &SupOptions::default()).unwrap();
        let opts = SupOptions {
            force_direct: true,
            ..Default::default()
        };
        let b = sup_deviation_schedule(&sys, &phi, &ns, 16, &opts).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x.sup_dev - y.sup_dev).abs() < 1e-11);
            assert_eq!(x.argmax_x, y.argmax_x);
        }
    }

    #[test]
    fn coboundary_rate() {
        let sys = golden_rot();
        let phi = coboundary(&sys.omega);
        for n in [10, 100, 1000] {
            let r = sup_deviation(&sys, &phi, n, 128).unwrap();
            assert!(r.sup_dev <= 2.0 / n as f64 + 1e-12);
        }
    }

    #[test]
    fn denjoy_koksma_small() {
        let sys = golden_rot();
        let phi = dist_pow(0.5, 1);
        let cf = expand_cf(&Frequency::golden(), 10_000).unwrap();
        let qs: Vec<u64> = cf.denominators().iter().map(|&q| q as u64).filter(|&q| q >= 2).collect();
        let mut qs = qs;
        qs.dedup();
        let res = sup_deviation_schedule(&sys, &phi, &qs, 1024, &SupOptions::default()).unwrap();
        for r in res {
            assert!(r.sup_dev * (r.n as f64).sqrt() <= phi.norm_est, "q = {}", r.n);
            assert!(r.sup_dev <= 2.0 * phi.sup_bound);
        }
    }

    #[test]
    fn n_one_is_grid_oscillation() {
        let sys = golden_rot();
        let phi = dist_pow(1.0, 1);
        let r = sup_deviation(&sys, &phi, 1, 64).unwrap();
        let mean = phi.mean_hint.unwrap();
        let want = (0..64).map(|j| (phi.eval_f64(&[j as f64 / 64.0]) - mean).abs()).fold(0.0, f64::max);
        assert!((r.sup_dev - want).abs() < 1e-15);
    }

    #[test]
    fn quadrature_mean() {
        let mut phi = dist_pow(0.5, 1);
        let hint = phi.mean_hint.take().unwrap();
        assert!((mean_of(&phi).unwrap() - hint).abs() < 1e-8);
    }

    #[test]
    fn additivity() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let systems = [
            golden_rot(),
            SystemSpec::parse_default("skew:3:golden").unwrap(),
        ];
        for sys in systems {
            let d = sys.dim();
            let phi = if d == 1 {
                dist_pow(0.5, 1)
            } else {
                Observable::from_fn(
                    "s",
                    d,
                    |x: &[Fixed]| x.iter().map(|c| c.dist_to_z()).sum(),
                    ModulusOfContinuity::Holder(1.0),
                    4.0,
                    1.5,
                    None,
                )
            };
            for _ in 0..10 {
                let x = TorusPoint::new((0..d).map(|_| Fixed::from_limbs(rng.gen())).collect(), 192).unwrap();
                let (n, m) = (rng.gen_range(1..500u64), rng.gen_range(1..500u64));
                let whole = birkhoff_sum(&sys, &phi, &x, n + m).unwrap();
                let y = sys.iterate(&x, n as u128).unwrap();
                let parts = birkhoff_sum(&sys, &phi, &x, n).unwrap() + birkhoff_sum(&sys, &phi, &y, m).unwrap();
                assert!((whole - parts).abs() <= 1e-10 * whole.abs().max(1.0));
            }
        }
    }

    #[test]
    fn closed_form_equals_composition() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let systems = [
            golden_rot(),
            SystemSpec::parse_default("rotd:golden|silver").unwrap(),
            SystemSpec::parse_default("skew:2:golden").unwrap(),
            SystemSpec::parse_default("skew:3:golden").unwrap(),
        ];
        for sys in &systems {
            for _ in 0..20 {
                let x = TorusPoint::new((0..sys.dim()).map(|_| Fixed::from_limbs(rng.gen())).collect(), 192).unwrap();
                let mut s = x.coords().to_vec();
                for j in 0..=200u128 {
                    assert_eq!(sys.iterate(&x, j).unwrap().coords(), &s[..], "{sys} j={j}");
                    sys.step(&mut s);
                }
            }
        }
    }

    #[test]
    fn rotation_orbit_has_no_drift() {
        let sys = golden_rot();
        let x = TorusPoint::from_f64s(&[0.25], 192).unwrap();
        let mut s = x.coords().to_vec();
        let n = 10_000_000u64;
        for _ in 0..n {
            sys.step(&mut s);
        }
        let direct = x.coords()[0] + sys.omega[0].mul_biguint(&BigUint::from(n));
        assert_eq!(s[0], direct);
    }
}
