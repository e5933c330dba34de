//! Closed-form rate envelopes and fitted dominating scales.
//!
//! Envelope strings look like `sdc:alpha=0.5,gamma=0.1` and may carry a
//! `scale=` entry; the scale defaults to 1.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::arithmetic::ContinuedFraction;
use crate::error::{Error, Result};
use crate::kernels::ModulusOfContinuity;

#[derive(Clone, Debug, PartialEq)]
pub enum EnvelopeKind {
    /// q^{−α}, meaningful at best-approximation denominators only.
    DenjoyKoksma { alpha: f64 },
    /// log^{3α}N / N^α.
    Sdc { alpha: f64, gamma: f64 },
    /// (log N / N)^{α/A}.
    Dc { alpha: f64, gamma: f64, a: f64 },
    /// 1 / log^α N.
    Beta { alpha: f64, beta: f64 },
    /// w(log⁴N / N).
    Modulus { w: ModulusOfContinuity, gamma: f64 },
    /// N^{−α/(A+d)}.
    TranslationD { alpha: f64, gamma: f64, a: f64, d: usize },
    /// N^{−αδ/(δ+d)+ε}, δ = 2^{1−d}.
    Skew { alpha: f64, gamma: f64, d: usize, eps: f64 },
    /// N^{1+ε}(1/q + 1/N + q/N^d)^δ, δ = 2^{1−d}: a bound on a character
    /// sum of degree d, not a rate.
    WeylBound { d: usize, q: f64, eps: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Envelope {
    pub kind: EnvelopeKind,
    pub scale: f64,
}

/// δ = 2^{1−d}.
pub fn weyl_delta(d: usize) -> f64 {
    2f64.powi(1 - d as i32)
}

/// β(d) = αδ/(δ + d), the skew-product rate exponent without the ε loss.
pub fn skew_exponent(alpha: f64, d: usize) -> f64 {
    let delta = weyl_delta(d);
    alpha * delta / (delta + d as f64)
}

pub fn weyl_bound(d: usize, q: f64, n: f64, eps: f64) -> f64 {
    n.powf(1.0 + eps) * (1.0 / q + 1.0 / n + q / n.powi(d as i32)).powf(weyl_delta(d))
}

impl Envelope {
    pub fn new(kind: EnvelopeKind) -> Envelope {
        Envelope { kind, scale: 1.0 }
    }

    pub fn with_scale(mut self, scale: f64) -> Envelope {
        self.scale = scale;
        self
    }

    /// The envelope without its scale.
    pub fn shape(&self, n: f64) -> Result<f64> {
        if n.is_nan() || n < 3.0 {
            return Err(Error::Domain(format!("envelopes need N ≥ 3, got {n}")));
        }
        let l = n.ln();
        Ok(match &self.kind {
            EnvelopeKind::DenjoyKoksma { alpha } => n.powf(-alpha),
            EnvelopeKind::Sdc { alpha, .. } => l.powf(3.0 * alpha) / n.powf(*alpha),
            EnvelopeKind::Dc { alpha, a, .. } => (l / n).powf(alpha / a),
            EnvelopeKind::Beta { alpha, .. } => l.powf(-alpha),
            EnvelopeKind::Modulus { w, .. } => w.evaluate(l.powi(4) / n),
            EnvelopeKind::TranslationD { alpha, a, d, .. } => n.powf(-alpha / (a + *d as f64)),
            EnvelopeKind::Skew { alpha, d, eps, .. } => n.powf(-skew_exponent(*alpha, *d) + eps),
            EnvelopeKind::WeylBound { d, q, eps } => weyl_bound(*d, *q, n, *eps),
        })
    }

    pub fn value(&self, n: f64) -> Result<f64> {
        Ok(self.scale * self.shape(n)?)
    }

    pub fn label(&self) -> &'static str {
        match self.kind {
            EnvelopeKind::DenjoyKoksma { .. } => "dk",
            EnvelopeKind::Sdc { .. } => "sdc",
            EnvelopeKind::Dc { .. } => "dc",
            EnvelopeKind::Beta { .. } => "beta",
            EnvelopeKind::Modulus { .. } => "modulus",
            EnvelopeKind::TranslationD { .. } => "translation",
            EnvelopeKind::Skew { .. } => "skew",
            EnvelopeKind::WeylBound { .. } => "weyl",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopePoint {
    pub value: f64,
    /// Set when a Denjoy–Koksma envelope is evaluated away from a
    /// convergent denominator.
    pub flagged: bool,
}

/// Evaluate an envelope at N. A Denjoy–Koksma envelope is flagged unless
/// N is one of the certified q_n of `cf`.
pub fn envelope_value(env: &Envelope, n: u64, cf: Option<&ContinuedFraction>) -> Result<EnvelopePoint> {
    let value = env.value(n as f64)?;
    let flagged = match env.kind {
        EnvelopeKind::DenjoyKoksma { .. } => {
            !cf.is_some_and(|cf| cf.q[..=cf.certified_len.min(cf.q.len() - 1)].contains(&(n as u128)))
        }
        _ => false,
    };
    Ok(EnvelopePoint { value, flagged })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleFit {
    /// Smallest scale with scale·shape ≥ measured at every point.
    pub scale: f64,
    /// max measured/(scale·shape); 1 unless every point is zero.
    pub max_ratio: f64,
    /// The same ratio restricted to the last third of the points.
    pub tail_ratio: f64,
    /// Scale fitted on the first two thirds, ratio taken on the rest.
    pub heldout_ratio: f64,
}

/// Fit the dominating scale of an envelope to (N, measured) points.
pub fn fit_scale(points: &[(u64, f64)], env: &Envelope) -> Result<ScaleFit> {
    if points.len() < 3 {
        return Err(Error::InvalidInput("fit_scale needs at least 3 points".into()));
    }
    let ratios: Vec<f64> = points
        .iter()
        .map(|&(n, v)| Ok(v / env.shape(n as f64)?))
        .collect::<Result<_>>()?;
    let max = |r: &[f64]| r.iter().copied().fold(0.0, f64::max);
    let scale = max(&ratios);
    let split = points.len() - points.len() / 3;
    let tail = &ratios[split..];
    let head_scale = max(&ratios[..split]);
    let norm = |r: f64, s: f64| if s > 0.0 { r / s } else { 0.0 };
    Ok(ScaleFit {
        scale,
        max_ratio: norm(scale, scale),
        tail_ratio: norm(max(tail), scale),
        heldout_ratio: norm(max(tail), head_scale),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum SumRegime {
    /// (1/γ) log(1/γ) n^{1−α} log³n.
    Sdc { gamma: f64 },
    /// n^{A−α} log n.
    Dc { gamma: f64, a: f64 },
    /// e^{βn} n^{1−α}.
    Beta { beta: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SumQs {
    pub s: usize,
    /// n = q_s.
    pub n: u128,
    /// Σ_{j=1}^s q_{j+1} log q_{j+1} / q_j^α.
    pub exact: f64,
    /// The regime's right-hand side at n.
    pub shape: f64,
    /// exact / shape, absent when the shape vanishes.
    pub ratio: Option<f64>,
}

pub fn sum_qs_bound(cf: &ContinuedFraction, s: usize, alpha: f64, regime: &SumRegime) -> Result<SumQs> {
    if s < 1 {
        return Err(Error::InvalidInput("s must be ≥ 1".into()));
    }
    if s + 1 > cf.certified_len {
        return Err(Error::Uncertified(format!("q_{} is not certified", s + 1)));
    }
    let exact: f64 = crate::sum::compensated_sum((1..=s).map(|j| {
        let next = cf.q[j + 1] as f64;
        next * next.ln() / (cf.q[j] as f64).powf(alpha)
    }));
    let n = cf.q[s];
    let nf = n as f64;
    let shape = match regime {
        SumRegime::Sdc { gamma } => (1.0 / gamma) * (1.0 / gamma).ln().max(1.0) * nf.powf(1.0 - alpha) * nf.ln().powi(3),
        SumRegime::Dc { a, .. } => nf.powf(a - alpha) * nf.ln(),
        SumRegime::Beta { beta } => (beta * nf).exp() * nf.powf(1.0 - alpha),
    };
    let ratio = (shape > 0.0 && shape.is_finite()).then(|| exact / shape);
    Ok(SumQs {
        s,
        n,
        exact,
        shape,
        ratio,
    })
}

fn fmt_kv(f: &mut fmt::Formatter<'_>, name: &str, pairs: &[(&str, String)], scale: f64) -> fmt::Result {
    write!(f, "{name}:")?;
    let mut items: Vec<String> = pairs.iter().map(|(k, v)| format!("{k}={v}")).collect();
    if scale != 1.0 {
        items.push(format!("scale={scale}"));
    }
    write!(f, "{}", items.join(","))
}

impl fmt::Display for Envelope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = |x: &f64| x.to_string();
        let name = self.label();
        let pairs: Vec<(&str, String)> = match &self.kind {
            EnvelopeKind::DenjoyKoksma { alpha } => vec![("alpha", s(alpha))],
            EnvelopeKind::Sdc { alpha, gamma } => vec![("alpha", s(alpha)), ("gamma", s(gamma))],
            EnvelopeKind::Dc { alpha, gamma, a } => vec![("alpha", s(alpha)), ("gamma", s(gamma)), ("a", s(a))],
            EnvelopeKind::Beta { alpha, beta } => vec![("alpha", s(alpha)), ("beta", s(beta))],
            EnvelopeKind::Modulus { w, gamma } => vec![("w", w.label()), ("gamma", s(gamma))],
            EnvelopeKind::TranslationD { alpha, gamma, a, d } => vec![
                ("alpha", s(alpha)),
                ("gamma", s(gamma)),
                ("a", s(a)),
                ("d", d.to_string()),
            ],
            EnvelopeKind::Skew { alpha, gamma, d, eps } => vec![
                ("alpha", s(alpha)),
                ("gamma", s(gamma)),
                ("d", d.to_string()),
                ("eps", s(eps)),
            ],
            EnvelopeKind::WeylBound { d, q, eps } => vec![("d", d.to_string()), ("q", s(q)), ("eps", s(eps))],
        };
        fmt_kv(f, name, &pairs, self.scale)
    }
}

impl FromStr for Envelope {
    type Err = Error;

    fn from_str(s: &str) -> Result<Envelope> {
        let s = s.trim();
        let bad = |msg: String| Error::parse("envelope", format!("{s}: {msg}"));
        let (name, rest) = s.split_once(':').unwrap_or((s, ""));
        let mut kv = std::collections::BTreeMap::new();
        for item in rest.split(',').filter(|t| !t.trim().is_empty()) {
            let (k, v) = item.split_once('=').ok_or_else(|| bad(format!("`{item}` is not key=value")))?;
            kv.insert(k.trim().to_string(), v.trim().to_string());
        }
        let num = |k: &str, default: Option<f64>| -> Result<f64> {
            match kv.get(k) {
                Some(v) => v
                    .parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| bad(format!("{k} must be a number"))),
                None => default.ok_or_else(|| bad(format!("missing {k}"))),
            }
        };
        let int = |k: &str| -> Result<usize> {
            kv.get(k)
                .ok_or_else(|| bad(format!("missing {k}")))?
                .parse::<usize>()
                .map_err(|_| bad(format!("{k} must be an integer")))
        };
        let alpha = || num("alpha", None);
        let gamma = || num("gamma", Some(1.0));
        let kind = match name {
            "dk" => EnvelopeKind::DenjoyKoksma { alpha: alpha()? },
            "sdc" => EnvelopeKind::Sdc {
                alpha: alpha()?,
                gamma: gamma()?,
            },
            "dc" => EnvelopeKind::Dc {
                alpha: alpha()?,
                gamma: gamma()?,
                a: num("a", None)?,
            },
            "beta" => EnvelopeKind::Beta {
                alpha: alpha()?,
                beta: num("beta", Some(0.0))?,
            },
            "modulus" => EnvelopeKind::Modulus {
                w: kv.get("w").ok_or_else(|| bad("missing w".into()))?.parse()?,
                gamma: gamma()?,
            },
            "translation" => EnvelopeKind::TranslationD {
                alpha: alpha()?,
                gamma: gamma()?,
                a: num("a", None)?,
                d: int("d")?,
            },
            "skew" => EnvelopeKind::Skew {
                alpha: alpha()?,
                gamma: gamma()?,
                d: int("d")?,
                eps: num("eps", Some(0.05))?,
            },
            "weyl" => EnvelopeKind::WeylBound {
                d: int("d")?,
                q: num("q", None)?,
                eps: num("eps", Some(0.05))?,
            },
            _ => return Err(bad("unknown envelope".into())),
        };
        let known = ["alpha", "gamma", "a", "beta", "w", "d", "eps", "q", "scale"];
        if let Some(k) = kv.keys().find(|k| !known.contains(&k.as_str())) {
            return Err(bad(format!("unknown key {k}")));
        }
        match &kind {
            EnvelopeKind::Skew { d, .. } | EnvelopeKind::TranslationD { d, .. } | EnvelopeKind::WeylBound { d, .. }
                if *d < 1 =>
            {
                return Err(bad("d must be ≥ 1".into()))
            }
            _ => {}
        }
        Ok(Envelope {
            kind,
            scale: num("scale", Some(1.0))?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arithmetic::{expand_cf, Frequency, Rule};

    #[test]
    fn plug_in_values() {
        let env = Envelope::new(EnvelopeKind::Sdc { alpha: 1.0, gamma: 1.0 }).with_scale(2.0);
        let n = 3f64.exp();
        assert!((env.value(n).unwrap() - 2.0 * 27.0 / n).abs() < 1e-12);
        assert!(env.value(2.0).is_err());
        let b = Envelope::new(EnvelopeKind::Beta { alpha: 0.5, beta: 0.0 });
        let n = 1e100f64;
        assert!((b.value(n * n).unwrap() / b.value(n).unwrap() - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn skew_exponents_by_hand() {
        assert!((skew_exponent(1.0, 2) - 0.2).abs() < 1e-12);
        let hand = [(2, 0.5 / 2.5), (3, 0.25 / 3.25), (4, 0.125 / 4.125), (5, 0.0625 / 5.0625), (6, 0.03125 / 6.03125)];
        for (d, want) in hand {
            assert!((skew_exponent(0.7, d) - 0.7 * want).abs() < 1e-12);
        }
    }

    #[test]
    fn shapes_decrease_past_the_log_hump() {
        let envs = [
            "dk:alpha=0.5",
            "sdc:alpha=0.5",
            "dc:alpha=0.5,a=2",
            "beta:alpha=0.5",
            "modulus:w=holder:0.5",
            "modulus:w=log_holder",
            "translation:alpha=0.5,a=3,d=2",
            "skew:alpha=1,d=2",
        ];
        for s in envs {
            let e: Envelope = s.parse().unwrap();
            let mut prev = f64::INFINITY;
            let mut n = 55.0;
            while n < 1e12 {
                let v = e.value(n).unwrap();
                assert!(v > 0.0 && v < prev, "{s} at {n}");
                prev = v;
                n *= 1.1;
            }
        }
    }

    #[test]
    fn parse_round_trip() {
        for s in [
            "sdc:alpha=0.5,gamma=0.1",
            "dc:alpha=0.5,gamma=1,a=2,scale=3",
            "modulus:w=weak_holder:0.5:0.5,gamma=1",
            "weyl:d=2,q=89,eps=0.05",
        ] {
            let e: Envelope = s.parse().unwrap();
            assert_eq!(e.to_string(), s);
        }
        assert!("sdc:gamma=0.1".parse::<Envelope>().is_err());
        assert!("sdc:alpha=0.5,foo=1".parse::<Envelope>().is_err());
        assert!("nope".parse::<Envelope>().is_err());
    }

    #[test]
    fn fit_examples() {
        let env: Envelope = "sdc:alpha=0.5".parse().unwrap();
        let ns = [100u64, 1000, 10_000, 100_000];
        let on: Vec<(u64, f64)> = ns.iter().map(|&n| (n, 3.0 * env.shape(n as f64).unwrap())).collect();
        let fit = fit_scale(&on, &env).unwrap();
        assert!((fit.scale - 3.0).abs() < 1e-12 && (fit.max_ratio - 1.0).abs() < 1e-15);
        let mut out = on.clone();
        out[1].1 *= 2.0;
        assert!((fit_scale(&out, &env).unwrap().scale - 6.0).abs() < 1e-12);
        assert!(fit_scale(&on[..2], &env).is_err());
    }

    #[test]
    fn dk_flags_off_convergent() {
        let cf = expand_cf(&Frequency::golden(), 1000).unwrap();
        let env: Envelope = "dk:alpha=0.5".parse().unwrap();
        assert!(!envelope_value(&env, 89, Some(&cf)).unwrap().flagged);
        assert!(envelope_value(&env, 90, Some(&cf)).unwrap().flagged);
    }

    #[test]
    fn sum_qs_examples() {
        let g = expand_cf(&Frequency::golden(), 1 << 40).unwrap();
        let one = sum_qs_bound(&g, 1, 0.5, &SumRegime::Sdc { gamma: 0.5 }).unwrap();
        let q2 = g.q[2] as f64;
        assert!((one.exact - q2 * q2.ln() / (g.q[1] as f64).sqrt()).abs() < 1e-12);
        let mut prev = 0.0;
        for s in 2..=20 {
            let r = sum_qs_bound(&g, s, 0.5, &SumRegime::Sdc { gamma: 1.0 }).unwrap();
            assert!(r.exact > prev);
            prev = r.exact;
            assert!(r.ratio.unwrap() <= 50.0, "s={s}: {}", r.ratio.unwrap());
        }
        let lin = expand_cf(&Frequency::rule(Rule::Linear), 1 << 60).unwrap();
        assert!(sum_qs_bound(&lin, lin.certified_len, 0.5, &SumRegime::Beta { beta: 0.1 }).is_err());
    }
}
