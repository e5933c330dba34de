//! Experiment configuration: a flat TOML table.
//!
//! ```toml
//! experiment = "rate"
//! system = "rot1:golden"
//! observable = "dist_pow:0.5"
//! schedule = "geometric:100:1000000:1.78"
//! envelope = "sdc:alpha=0.5"
//! ```
//!
//! Only top-level `key = value` pairs are accepted; unknown keys are
//! rejected with the offending line.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::arithmetic::{expand_cf_partial, ContinuedFraction, Frequency};
use crate::dynamics::SystemSpec;
use crate::envelopes::Envelope;
use crate::error::{Error, Result};
use crate::fixed::DEFAULT_BITS;
use crate::kernels::{lookup, RegistryContext};
use crate::sharpness::Weight;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Rate,
    Kernel,
    Sharp,
    Skew,
    Approx,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
    #[default]
    Both,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<OutputFormat> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            "both" => Ok(OutputFormat::Both),
            _ => Err(Error::parse("format", format!("{s}: expected csv, json or both"))),
        }
    }
}

/// Values of N at which to measure.
#[derive(Clone, Debug, PartialEq)]
pub enum Schedule {
    /// round(N_min·factor^i) up to N_max.
    Geometric { min: u64, max: u64, factor: f64 },
    /// Distinct convergent denominators 2 ≤ q ≤ q_max.
    Convergents { q_max: u64 },
    List(Vec<u64>),
}

impl Schedule {
    /// The concrete increasing list of N.
    pub fn resolve(&self, cf: Option<&ContinuedFraction>) -> Result<Vec<u64>> {
        let ns = match self {
            Schedule::Geometric { min, max, factor } => {
                let mut out = Vec::new();
                let mut x = *min as f64;
                while x.round() as u64 <= *max {
                    let n = x.round() as u64;
                    if out.last() != Some(&n) {
                        out.push(n);
                    }
                    x *= factor;
                }
                out
            }
            Schedule::Convergents { q_max } => {
                let cf = cf.ok_or_else(|| {
                    Error::InvalidInput("a convergent schedule needs a one-frequency system".into())
                })?;
                let mut out: Vec<u64> = cf.q[..=cf.certified_len]
                    .iter()
                    .filter(|&&q| q >= 2 && q <= *q_max as u128)
                    .map(|&q| q as u64)
                    .collect();
                out.dedup();
                out
            }
            Schedule::List(v) => v.clone(),
        };
        if ns.is_empty() || ns[0] < 1 || ns.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput(format!(
                "schedule `{self}` must be non-empty, ≥ 1 and strictly increasing"
            )));
        }
        Ok(ns)
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Schedule::Geometric { min, max, factor } => write!(f, "geometric:{min}:{max}:{factor}"),
            Schedule::Convergents { q_max } => write!(f, "convergents:{q_max}"),
            Schedule::List(v) => {
                let items: Vec<String> = v.iter().map(u64::to_string).collect();
                write!(f, "list:{}", items.join(","))
            }
        }
    }
}

impl FromStr for Schedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Schedule> {
        let bad = |msg: &str| Error::parse("schedule", format!("{s}: {msg}"));
        let int = |t: &str| t.trim().parse::<u64>().map_err(|_| bad("expected an integer"));
        let (kind, rest) = s.trim().split_once(':').ok_or_else(|| bad("expected kind:args"))?;
        match kind {
            "geometric" => {
                let parts: Vec<&str> = rest.split(':').collect();
                let [lo, hi, fac] = parts[..] else {
                    return Err(bad("expected geometric:min:max:factor"));
                };
                let factor: f64 = fac.trim().parse().map_err(|_| bad("factor must be a number"))?;
                if factor.is_nan() || factor <= 1.0 {
                    return Err(bad("factor must exceed 1"));
                }
                Ok(Schedule::Geometric {
                    min: int(lo)?,
                    max: int(hi)?,
                    factor,
                })
            }
            "convergents" => Ok(Schedule::Convergents { q_max: int(rest)? }),
            "list" => Ok(Schedule::List(rest.split(',').map(int).collect::<Result<_>>()?)),
            _ => Err(bad("expected geometric, convergents or list")),
        }
    }
}

impl Serialize for Schedule {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Schedule {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Schedule, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn default_bits() -> u32 {
    DEFAULT_BITS
}

fn is_default_bits(b: &u32) -> bool {
    *b == DEFAULT_BITS
}

fn is_zero(v: &u64) -> bool {
    *v == 0
}

fn is_false(v: &bool) -> bool {
    !*v
}

fn is_both(v: &OutputFormat) -> bool {
    *v == OutputFormat::Both
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,

    /// `rot1:<freq>`, `rotd:<f>|<f>…` or `skew:<d>:<freq>`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<String>,
    /// Registry key.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observable: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<Schedule>,
    /// Points per axis.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub envelope: Option<String>,
    #[serde(default = "default_bits", skip_serializing_if = "is_default_bits")]
    pub precision_bits: u32,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<String>,
    #[serde(default, skip_serializing_if = "is_both")]
    pub format: OutputFormat,
    /// Write wall-clock times into the CSV (otherwise 0, keeping output
    /// byte-identical across runs).
    #[serde(default, skip_serializing_if = "is_false")]
    pub record_timing: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget_secs: Option<f64>,

    /// Kernel sweeps: frequencies, the largest q and the N values.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frequencies: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_max: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_values: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio_cap: Option<f64>,

    /// Sharpness runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frequency: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_values: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_gap: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_range: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio_floor: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bb_constant: Option<f64>,

    /// Skew character sums: the frequency vector 𝐤, ε and the number of
    /// random starting points.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,

    /// Jackson approximation: degrees and quadrature points per degree.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degrees: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quad_factor: Option<usize>,
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentKind) -> ExperimentConfig {
        ExperimentConfig {
            experiment,
            name: None,
            system: None,
            observable: None,
            schedule: None,
            grid: None,
            envelope: None,
            precision_bits: DEFAULT_BITS,
            seed: 0,
            out_dir: None,
            format: OutputFormat::Both,
            record_timing: false,
            budget_secs: None,
            frequencies: None,
            q_max: None,
            n_values: None,
            ratio_cap: None,
            frequency: None,
            weight: None,
            m_values: None,
            c_gap: None,
            c_range: None,
            ratio_floor: None,
            bb_constant: None,
            k: None,
            eps: None,
            points: None,
            degrees: None,
            quad_factor: None,
        }
    }

    /// Parse and validate.
    pub fn parse(text: &str) -> Result<ExperimentConfig> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| config_error(text, &e))?;
        cfg.validate(text)?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| {
            format!("{:?}", self.experiment).to_lowercase()
        })
    }

    fn require<'a, T>(&self, v: &'a Option<T>, field: &str, text: &str) -> Result<&'a T> {
        v.as_ref().ok_or_else(|| Error::Config {
            line: line_of(text, field),
            field: field.into(),
            msg: format!("required for a {:?} experiment", self.experiment).to_lowercase(),
        })
    }

    /// The configured schedule, else convergent denominators up to 10^6 for
    /// a circle rotation and a geometric 10^2..10^5 sweep otherwise.
    pub fn schedule_or_default(&self, sys: &SystemSpec) -> Schedule {
        self.schedule.clone().unwrap_or(if sys.dim() == 1 {
            Schedule::Convergents { q_max: 1_000_000 }
        } else {
            Schedule::Geometric {
                min: 100,
                max: 100_000,
                factor: 10f64.sqrt(),
            }
        })
    }

    /// Resolve the system string.
    pub fn system_spec(&self) -> Result<SystemSpec> {
        let s = self.system.as_deref().ok_or_else(|| Error::InvalidInput("missing system".into()))?;
        SystemSpec::parse(s, self.precision_bits)
    }

    /// Registry context for a system: its dimension, translation vector and,
    /// for one frequency, its continued fraction.
    pub fn registry_context(sys: &SystemSpec) -> Result<RegistryContext> {
        let cf = if sys.freqs.len() == 1 {
            Some(expand_cf_partial(&sys.freqs[0], u128::MAX >> 2)?.0)
        } else {
            None
        };
        Ok(RegistryContext {
            dim: sys.dim(),
            omega: Some(sys.omega.clone()),
            cf,
        })
    }

    fn validate(&self, text: &str) -> Result<()> {
        let field_err = |field: &str, e: Error| Error::Config {
            line: line_of(text, field),
            field: field.into(),
            msg: e.to_string(),
        };
        crate::fixed::check_bits(self.precision_bits).map_err(|e| field_err("precision_bits", e))?;
        if let Some(g) = self.grid {
            if g < 16 {
                return Err(field_err("grid", Error::InvalidInput("grid must be ≥ 16".into())));
            }
        }
        if let Some(env) = &self.envelope {
            env.parse::<Envelope>().map_err(|e| field_err("envelope", e))?;
        }
        match self.experiment {
            ExperimentKind::Rate | ExperimentKind::Approx => {
                let s = self.require(&self.system, "system", text)?;
                let sys = SystemSpec::parse(s, self.precision_bits).map_err(|e| field_err("system", e))?;
                let key = self.require(&self.observable, "observable", text)?;
                let ctx = Self::registry_context(&sys).map_err(|e| field_err("system", e))?;
                lookup(key, &ctx).map_err(|e| field_err("observable", e))?;
                if self.experiment == ExperimentKind::Rate {
                    self.schedule_or_default(&sys)
                        .resolve(ctx.cf.as_ref())
                        .map_err(|e| field_err("schedule", e))?;
                } else {
                    self.require(&self.degrees, "degrees", text)?;
                }
            }
            ExperimentKind::Kernel => {
                for f in self.require(&self.frequencies, "frequencies", text)? {
                    f.parse::<Frequency>().map_err(|e| field_err("frequencies", e))?;
                }
                self.require(&self.n_values, "n_values", text)?;
            }
            ExperimentKind::Sharp => {
                let f = self.require(&self.frequency, "frequency", text)?;
                f.parse::<Frequency>().map_err(|e| field_err("frequency", e))?;
                let w = self.require(&self.weight, "weight", text)?;
                w.parse::<Weight>().map_err(|e| field_err("weight", e))?;
            }
            ExperimentKind::Skew => {
                let s = self.require(&self.system, "system", text)?;
                let sys = SystemSpec::parse(s, self.precision_bits).map_err(|e| field_err("system", e))?;
                let k = self.require(&self.k, "k", text)?;
                if k.len() != sys.dim() || sys.is_rotation() {
                    return Err(field_err(
                        "k",
                        Error::InvalidInput("k must match the dimension of a skew system".into()),
                    ));
                }
                let sched = self.require(&self.schedule, "schedule", text)?;
                sched.resolve(None).map_err(|e| field_err("schedule", e))?;
            }
        }
        Ok(())
    }
}

/// 1-based line of the first `field = …` assignment, 0 when absent.
fn line_of(text: &str, field: &str) -> usize {
    text.lines()
        .position(|l| l.split('=').next().is_some_and(|k| k.trim() == field))
        .map_or(0, |i| i + 1)
}

fn config_error(text: &str, e: &toml::de::Error) -> Error {
    let (line, field) = match e.span() {
        Some(span) => {
            let line = text[..span.start.min(text.len())].matches('\n').count() + 1;
            let field = text
                .lines()
                .nth(line - 1)
                .and_then(|l| l.split_once('='))
                .map(|(k, _)| k.trim().to_string())
                .unwrap_or_default();
            (line, field)
        }
        None => (0, String::new()),
    };
    Error::Config {
        line,
        field,
        msg: e.message().to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const RATE: &str = r#"
experiment = "rate"
system = "rot1:golden"
observable = "dist_pow:0.5"
schedule = "geometric:100:10000:10"
grid = 64
envelope = "sdc:alpha=0.5"
"#;

    #[test]
    fn parse_and_round_trip() {
        let cfg = ExperimentConfig::parse(RATE).unwrap();
        assert_eq!(cfg.grid, Some(64));
        assert_eq!(cfg.precision_bits, 192);
        let back = ExperimentConfig::parse(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn diagnostics_name_line_and_field() {
        let text = RATE.replace("grid = 64", "grid = \"wide\"");
        match ExperimentConfig::parse(&text) {
            Err(Error::Config { line, field, .. }) => {
                assert_eq!((line, field.as_str()), (6, "grid"));
            }
            other => panic!("{other:?}"),
        }
        let text = format!("{RATE}colour = 3\n");
        assert!(matches!(ExperimentConfig::parse(&text), Err(Error::Config { line: 8, .. })));
        let text = RATE.replace("dist_pow:0.5", "nope");
        match ExperimentConfig::parse(&text) {
            Err(Error::Config { line, field, .. }) => assert_eq!((line, field.as_str()), (4, "observable")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn schedules() {
        let g: Schedule = "geometric:100:1000:2".parse().unwrap();
        assert_eq!(g.resolve(None).unwrap(), vec![100, 200, 400, 800]);
        assert!("list:5,3".parse::<Schedule>().unwrap().resolve(None).is_err());
        let cf = crate::arithmetic::expand_cf(&Frequency::golden(), 100).unwrap();
        let c: Schedule = "convergents:50".parse().unwrap();
        assert_eq!(c.resolve(Some(&cf)).unwrap(), vec![2, 3, 5, 8, 13, 21, 34]);
        for s in ["geometric:10:100:1.5", "convergents:10", "list:1,2,3"] {
            assert_eq!(s.parse::<Schedule>().unwrap().to_string(), s);
        }
    }
}
