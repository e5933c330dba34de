use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::modulus::ModulusOfContinuity;
use super::trigpoly::TrigPoly;
use crate::fixed::Fixed;

pub type PointFn = Arc<dyn Fn(&[Fixed]) -> f64 + Send + Sync>;

/// A real function on 𝕋^d.
///
/// The value is the sum of an optional pointwise part and an optional
/// trigonometric-polynomial part. Keeping the spectral part separate lets
/// orbit sums of characters be evaluated in closed form.
#[derive(Clone)]
pub struct Observable {
    pub name: String,
    pub dim: usize,
    pub pointwise: Option<PointFn>,
    pub spectral: Option<TrigPoly>,
    pub modulus: ModulusOfContinuity,
    /// ‖φ‖_w = ‖φ‖_∞ + sup |φ(x) − φ(y)| / w(|x − y|).
    pub norm_est: f64,
    /// `norm_est` came from sampling and is only a lower bound.
    pub norm_is_estimate: bool,
    pub mean_hint: Option<f64>,
    /// Upper bound for ‖φ‖_∞.
    pub sup_bound: f64,
}

impl Observable {
    pub fn from_fn(
        name: impl Into<String>,
        dim: usize,
        f: impl Fn(&[Fixed]) -> f64 + Send + Sync + 'static,
        modulus: ModulusOfContinuity,
        norm_est: f64,
        sup_bound: f64,
        mean_hint: Option<f64>,
    ) -> Observable {
        Observable {
            name: name.into(),
            dim,
            pointwise: Some(Arc::new(f)),
            spectral: None,
            modulus,
            norm_est,
            norm_is_estimate: false,
            mean_hint,
            sup_bound,
        }
    }

    /// A real trigonometric polynomial with Lipschitz modulus and the
    /// analytic bound Σ|c| + 2π Σ|c||𝐤|_1.
    pub fn from_trig(name: impl Into<String>, p: TrigPoly) -> Observable {
        let sup = p.l1_norm();
        Observable {
            name: name.into(),
            dim: p.dim(),
            pointwise: None,
            modulus: ModulusOfContinuity::Holder(1.0),
            norm_est: sup + std::f64::consts::TAU * p.weighted_l1(),
            norm_is_estimate: false,
            mean_hint: Some(p.mean()),
            sup_bound: sup,
            spectral: Some(p),
        }
    }

    /// Declare a different modulus and its norm bound.
    pub fn with_modulus(mut self, modulus: ModulusOfContinuity, norm_est: f64) -> Observable {
        self.modulus = modulus;
        self.norm_est = norm_est;
        self
    }

    #[inline]
    pub fn eval(&self, x: &[Fixed]) -> f64 {
        let mut v = 0.0;
        if let Some(f) = &self.pointwise {
            v += f(x);
        }
        if let Some(p) = &self.spectral {
            v += p.eval_real(x);
        }
        v
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        let fx: Vec<Fixed> = x.iter().map(|&t| Fixed::from_f64(t)).collect();
        self.eval(&fx)
    }

    /// Sum of two observables on the same torus. Moduli must agree in
    /// kind; the norm bound is the sum of the two.
    pub fn plus(self, other: Observable, modulus: ModulusOfContinuity) -> Observable {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let pointwise: Option<PointFn> = match (self.pointwise, other.pointwise) {
            (Some(a), Some(b)) => Some(Arc::new(move |x: &[Fixed]| a(x) + b(x))),
            (a, b) => a.or(b),
        };
        let spectral = match (self.spectral, other.spectral) {
            (Some(a), Some(b)) => Some(a.sum(&b)),
            (a, b) => a.or(b),
        };
        Observable {
            name: format!("{}+{}", self.name, other.name),
            dim: self.dim,
            pointwise,
            spectral,
            modulus,
            norm_est: self.norm_est + other.norm_est,
            norm_is_estimate: self.norm_is_estimate || other.norm_is_estimate,
            mean_hint: self.mean_hint.zip(other.mean_hint).map(|(a, b)| a + b),
            sup_bound: self.sup_bound + other.sup_bound,
        }
    }

    /// Sampled ‖φ‖_∞ + sup |φ(x) − φ(y)|/w(|x − y|) over random pairs,
    /// including short-range pairs. A lower bound for the true norm.
    pub fn sampled_norm(&self, pairs: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sup = 0f64;
        let mut quot = 0f64;
        for i in 0..pairs {
            let x: Vec<Fixed> = (0..self.dim).map(|_| Fixed::from_limbs(rng.gen())).collect();
            let scale = 2f64.powi(-((i % 30) as i32));
            let h: Vec<f64> = (0..self.dim).map(|_| rng.gen_range(-0.5..0.5) * scale).collect();
            let y: Vec<Fixed> = x.iter().zip(&h).map(|(a, &d)| *a + Fixed::from_f64(d)).collect();
            let dist = h.iter().fold(0f64, |m, d| m.max(d.abs()));
            let (fx, fy) = (self.eval(&x), self.eval(&y));
            sup = sup.max(fx.abs()).max(fy.abs());
            let w = self.modulus.evaluate(dist);
            if w > 0.0 {
                quot = quot.max((fx - fy).abs() / w);
            }
        }
        sup + quot
    }

    /// Replace the declared norm by a sampled estimate.
    pub fn with_sampled_norm(mut self, pairs: usize, seed: u64) -> Observable {
        self.norm_est = self.sampled_norm(pairs, seed);
        self.norm_is_estimate = true;
        self
    }
}

impl fmt::Debug for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Observable")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("modulus", &self.modulus)
            .field("norm_est", &self.norm_est)
            .field("norm_is_estimate", &self.norm_is_estimate)
            .field("mean_hint", &self.mean_hint)
            .field("spectral_terms", &self.spectral.as_ref().map(|p| p.len()))
            .finish()
    }
}
