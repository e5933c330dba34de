use std::fmt;
use std::sync::Arc;

/// A modulus of continuity w: increasing, sub-additive, continuous, w(0) = 0.
///
/// The built-in kinds are normalised to w(1) = 1 and continued linearly with
/// their left slope beyond h = 1, which keeps them concave.
#[derive(Clone)]
pub enum ModulusOfContinuity {
    /// h^α, α ∈ (0, 1].
    Holder(f64),
    /// exp(α − α(1 + log(1/h))^κ), κ ∈ (0, 1]; κ = 1 is h^α and smaller κ is
    /// weaker than every Hölder modulus.
    WeakHolder { alpha: f64, kappa: f64 },
    /// 2 / (2 + log(1/h)).
    LogHolder,
    Custom {
        name: String,
        w: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    },
}

impl ModulusOfContinuity {
    pub fn evaluate(&self, h: f64) -> f64 {
        if h <= 0.0 {
            return 0.0;
        }
        match self {
            ModulusOfContinuity::Holder(a) => h.powf(*a),
            ModulusOfContinuity::WeakHolder { alpha, kappa } => {
                if h <= 1.0 {
                    (alpha - alpha * (1.0 + (1.0 / h).ln()).powf(*kappa)).exp()
                } else {
                    1.0 + alpha * kappa * (h - 1.0)
                }
            }
            ModulusOfContinuity::LogHolder => {
                if h <= 1.0 {
                    2.0 / (2.0 + (1.0 / h).ln())
                } else {
                    1.0 + 0.5 * (h - 1.0)
                }
            }
            ModulusOfContinuity::Custom { w, .. } => w(h),
        }
    }

    /// The Hölder exponent when the modulus is a pure power.
    pub fn holder_exponent(&self) -> Option<f64> {
        match self {
            ModulusOfContinuity::Holder(a) => Some(*a),
            ModulusOfContinuity::WeakHolder { alpha, kappa } if *kappa == 1.0 => Some(*alpha),
            _ => None,
        }
    }

    pub fn label(&self) -> String {
        match self {
            ModulusOfContinuity::Holder(a) => format!("holder:{a}"),
            ModulusOfContinuity::WeakHolder { alpha, kappa } => format!("weak_holder:{alpha}:{kappa}"),
            ModulusOfContinuity::LogHolder => "log_holder".into(),
            ModulusOfContinuity::Custom { name, .. } => format!("custom:{name}"),
        }
    }
}

impl PartialEq for ModulusOfContinuity {
    fn eq(&self, other: &Self) -> bool {
        self.label() == other.label()
    }
}

impl fmt::Debug for ModulusOfContinuity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl std::str::FromStr for ModulusOfContinuity {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        let bad = || crate::Error::parse("modulus of continuity", s);
        let parts: Vec<&str> = s.trim().split(':').collect();
        let num = |i: usize| -> crate::Result<f64> {
            let v: f64 = parts.get(i).ok_or_else(bad)?.parse().map_err(|_| bad())?;
            if v > 0.0 && v <= 1.0 {
                Ok(v)
            } else {
                Err(bad())
            }
        };
        match parts[0] {
            "holder" => Ok(ModulusOfContinuity::Holder(num(1)?)),
            "weak_holder" => Ok(ModulusOfContinuity::WeakHolder {
                alpha: num(1)?,
                kappa: num(2)?,
            }),
            "log_holder" => Ok(ModulusOfContinuity::LogHolder),
            _ => Err(bad()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn kinds() -> Vec<ModulusOfContinuity> {
        vec![
            ModulusOfContinuity::Holder(0.3),
            ModulusOfContinuity::Holder(1.0),
            ModulusOfContinuity::WeakHolder { alpha: 0.5, kappa: 0.5 },
            ModulusOfContinuity::WeakHolder { alpha: 1.0, kappa: 0.3 },
            ModulusOfContinuity::LogHolder,
        ]
    }

    #[test]
    fn normalised_at_one() {
        for w in kinds() {
            assert!((w.evaluate(1.0) - 1.0).abs() < 1e-15, "{w:?}");
            assert_eq!(w.evaluate(0.0), 0.0);
        }
        let a = ModulusOfContinuity::WeakHolder { alpha: 0.4, kappa: 1.0 };
        assert!((a.evaluate(0.01) - 0.01f64.powf(0.4)).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn increasing_and_subadditive(h1 in 1e-12f64..2.0, h2 in 1e-12f64..2.0) {
            for w in kinds() {
                let (a, b) = (w.evaluate(h1), w.evaluate(h2));
                prop_assert!(w.evaluate(h1 + h2) <= a + b + 1e-12, "{:?} at {} {}", w, h1, h2);
                if h1 < h2 {
                    prop_assert!(a < b, "{:?} not increasing", w);
                }
            }
        }
    }
}
