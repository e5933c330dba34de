//! Built-in observables, addressed by string keys.
//!
//! | key | observable |
//! |-----|------------|
//! | `dist_pow:α` | ‖x₁‖^α |
//! | `cos` | cos 2πx₁ |
//! | `mode:k₁,…,k_d` | cos 2π𝐤·x |
//! | `coboundary` | ψ(x + ω) − ψ(x), ψ = cos 2πx₁ |
//! | `weierstrass_w:α` | Σ 2^{−αk} cos(2π 2^k x₁) |
//! | `translation_test` | fixed degree-8 polynomial on 𝕋² plus ‖x₁‖^{1/2} |
//! | `lacunary:holder:α`, `lacunary:modulus:<w>`, `lacunary:analytic` | lacunary series on the convergent denominators |
//! | `zero`, `const:c` | constants |

use std::f64::consts::TAU;

use num_complex::Complex64;

use super::modulus::ModulusOfContinuity;
use super::observable::Observable;
use super::trigpoly::TrigPoly;
use crate::arithmetic::ContinuedFraction;
use crate::error::{Error, Result};
use crate::fixed::Fixed;
use crate::sharpness::{build_lacunary, Weight, DEFAULT_TAIL_TOL};

/// What a key may need beyond its own parameters.
#[derive(Clone, Debug, Default)]
pub struct RegistryContext {
    pub dim: usize,
    /// Translation vector of the system, for coboundaries.
    pub omega: Option<Vec<Fixed>>,
    /// Continued fraction supplying q_k for lacunary series.
    pub cf: Option<ContinuedFraction>,
}

impl RegistryContext {
    pub fn dim(dim: usize) -> RegistryContext {
        RegistryContext {
            dim,
            ..Default::default()
        }
    }
}

/// ‖x₁‖^α on 𝕋^d with ‖φ‖_α = 1 + 2^{−α} and mean 2^{−α}/(1 + α).
pub fn dist_pow(alpha: f64, dim: usize) -> Observable {
    assert!(alpha > 0.0 && alpha <= 1.0);
    let sup = 2f64.powf(-alpha);
    let f: Box<dyn Fn(f64) -> f64 + Send + Sync> = if alpha == 0.5 {
        Box::new(f64::sqrt)
    } else if alpha == 1.0 {
        Box::new(|t| t)
    } else {
        Box::new(move |t: f64| t.powf(alpha))
    };
    Observable::from_fn(
        format!("dist_pow:{alpha}"),
        dim,
        move |x| f(x[0].dist_to_z()),
        ModulusOfContinuity::Holder(alpha),
        1.0 + sup,
        sup,
        Some(sup / (1.0 + alpha)),
    )
}

pub fn mode(k: Vec<i64>) -> Observable {
    let name = format!(
        "mode:{}",
        k.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
    );
    Observable::from_trig(name, TrigPoly::real_mode(k, Complex64::new(1.0, 0.0)))
}

/// ψ∘T − ψ for ψ = cos 2πx₁ and the translation by ω.
pub fn coboundary(omega: &[Fixed]) -> Observable {
    let d = omega.len();
    let mut k = vec![0; d];
    k[0] = 1;
    let rot = super::trigpoly::e_fixed(omega[0]);
    let mut o = Observable::from_trig("coboundary", TrigPoly::real_mode(k, rot - 1.0));
    o.sup_bound = o.sup_bound.min(2.0);
    o
}

/// Σ_{k≥0} 2^{−αk} cos(2π 2^k x₁), truncated once the tail is below 1e−12.
pub fn weierstrass(alpha: f64, dim: usize) -> Observable {
    assert!(alpha > 0.0 && alpha < 1.0, "Weierstrass exponent must lie in (0, 1)");
    let r = 2f64.powf(-alpha);
    let mut p = TrigPoly::new(dim);
    let mut k = 0u32;
    while r.powi(k as i32) / (1.0 - r) > 1e-12 && k < 62 {
        let mut f = vec![0i64; dim];
        f[0] = 1i64 << k;
        p.add_real_mode(f, Complex64::new(r.powi(k as i32), 0.0));
        k += 1;
    }
    let s = 2f64.powf(1.0 - alpha);
    let norm = 1.0 / (1.0 - r) + TAU * s / (s - 1.0) + 2.0 / (1.0 - r);
    Observable::from_trig(format!("weierstrass_w:{alpha}"), p)
        .with_modulus(ModulusOfContinuity::Holder(alpha), norm)
}

/// The two-dimensional test observable: a fixed real trigonometric
/// polynomial of degree 8 plus ‖x₁‖^{1/2}.
pub fn translation_test() -> Observable {
    let modes: [([i64; 2], f64, f64); 9] = [
        ([1, 0], 0.30, 0.00),
        ([0, 1], 0.25, 0.05),
        ([1, 1], 0.20, -0.10),
        ([2, -1], 0.00, 0.15),
        ([3, 2], 0.10, 0.00),
        ([-4, 5], 0.08, 0.03),
        ([8, 0], 0.05, 0.00),
        ([0, 8], 0.00, 0.05),
        ([5, -8], 0.04, 0.02),
    ];
    let mut p = TrigPoly::new(2);
    for (k, re, im) in modes {
        p.add_real_mode(k.to_vec(), Complex64::new(re, im));
    }
    // |e(t) − e(s)| ≤ min(2, 2π|t − s|) ≤ √(4π|t − s|): the half-Hölder
    // seminorm of each pair is at most |c|·√(4π|𝐤|₁).
    let trig_norm: f64 = p.l1_norm()
        + p.iter()
            .map(|(k, c)| c.norm() * (2.0 * TAU * k.iter().map(|x| x.unsigned_abs() as f64).sum::<f64>()).sqrt())
            .sum::<f64>();
    let trig = Observable::from_trig("trig8", p).with_modulus(ModulusOfContinuity::Holder(0.5), trig_norm);
    let mut o = trig.plus(dist_pow(0.5, 2), ModulusOfContinuity::Holder(0.5));
    o.name = "translation_test".into();
    o
}

pub fn constant(c: f64, dim: usize) -> Observable {
    let mut o = Observable::from_trig(format!("const:{c}"), TrigPoly::constant(dim, c));
    o.norm_est = c.abs();
    o
}

fn parse_f64(key: &str, s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::parse("observable", format!("{key}: bad number `{s}`")))
}

/// Resolve a registry key.
pub fn lookup(key: &str, ctx: &RegistryContext) -> Result<Observable> {
    let key = key.trim();
    let dim = ctx.dim.max(1);
    let bad = |msg: &str| Error::parse("observable", format!("{key}: {msg}"));
    let (name, arg) = key.split_once(':').unwrap_or((key, ""));
    match name {
        "dist_pow" => {
            let a = parse_f64(key, arg)?;
            if !(a > 0.0 && a <= 1.0) {
                return Err(bad("exponent must lie in (0, 1]"));
            }
            Ok(dist_pow(a, dim))
        }
        "cos" => {
            let mut k = vec![0; dim];
            k[0] = 1;
            let mut o = mode(k);
            o.name = "cos".into();
            Ok(o)
        }
        "mode" => {
            let k: Vec<i64> = arg
                .split(',')
                .map(|s| s.trim().parse::<i64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| bad("expected integers"))?;
            if k.len() != dim {
                return Err(bad(&format!("expected {dim} components")));
            }
            if k.iter().all(|&x| x == 0) {
                return Err(bad("mode must be non-zero"));
            }
            Ok(mode(k))
        }
        "coboundary" => {
            let w = ctx.omega.as_ref().ok_or_else(|| bad("needs the system frequency"))?;
            Ok(coboundary(w))
        }
        "weierstrass_w" => {
            let a = parse_f64(key, arg)?;
            if !(a > 0.0 && a < 1.0) {
                return Err(bad("exponent must lie in (0, 1)"));
            }
            Ok(weierstrass(a, dim))
        }
        "translation_test" => {
            if dim != 2 {
                return Err(bad("defined on 𝕋² only"));
            }
            Ok(translation_test())
        }
        "zero" => Ok(constant(0.0, dim)),
        "const" => Ok(constant(parse_f64(key, arg)?, dim)),
        "lacunary" => {
            if dim != 1 {
                return Err(bad("lacunary series live on 𝕋"));
            }
            let cf = ctx.cf.as_ref().ok_or_else(|| bad("needs a continued fraction"))?;
            let weight = arg.parse::<Weight>()?;
            Ok(build_lacunary(cf, weight, DEFAULT_TAIL_TOL)?.observable())
        }
        _ => Err(bad("unknown observable")),
    }
}
