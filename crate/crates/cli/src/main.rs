use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use torusrate::arithmetic::{classify, expand_cf, expand_cf_partial, ostrowski_digits, ClassifyOptions, Frequency};
use torusrate::fixed::DEFAULT_BITS;
use torusrate::harness::{
    out_dir, run_experiment, run_scenario, scenario_ids, to_csv, write_outputs, ExperimentConfig, ExperimentKind,
    OutputFormat,
};

#[derive(Parser)]
#[command(name = "torusrate", version, about = "Rates of convergence of Birkhoff averages on tori")]
struct Cli {
    /// Experiment config (flat TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Fractional bits of the fixed-point carrier (64..=256).
    #[arg(long, global = true)]
    precision_bits: Option<u32>,
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
    Both,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> OutputFormat {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
            Format::Both => OutputFormat::Both,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Continued-fraction expansion with convergents.
    Cf {
        frequency: String,
        #[arg(long, default_value_t = 1_000_000_000)]
        max_q: u128,
    },
    /// Diophantine classification.
    Classify {
        frequency: String,
        #[arg(long, default_value_t = 10_000)]
        k_max: u64,
        #[arg(long, default_value_t = 1.0)]
        bb_constant: f64,
    },
    /// Ostrowski digits of n.
    Ostrowski { frequency: String, n: u128 },
    /// Sup-deviation sweep of Birkhoff averages.
    Rate(ExpArgs),
    /// Kernel-sum ratios at convergent denominators.
    Kernel(ExpArgs),
    /// Jackson approximation errors.
    Approx(ExpArgs),
    /// Lacunary lower-bound verification.
    Sharp(ExpArgs),
    /// Character sums of the skew product.
    Skew(ExpArgs),
    /// Run a named scenario, or `all`.
    Scenario { id: String },
}

/// Overrides for config fields; lists are comma-separated.
#[derive(Args, Default)]
struct ExpArgs {
    #[arg(long)]
    system: Option<String>,
    #[arg(long)]
    observable: Option<String>,
    #[arg(long)]
    schedule: Option<String>,
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    envelope: Option<String>,
    #[arg(long)]
    name: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    frequencies: Option<Vec<String>>,
    #[arg(long)]
    q_max: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    n_values: Option<Vec<u64>>,
    #[arg(long)]
    frequency: Option<String>,
    #[arg(long)]
    weight: Option<String>,
    #[arg(long, value_delimiter = ',')]
    m_values: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    k: Option<Vec<i64>>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    degrees: Option<Vec<u64>>,
    #[arg(long)]
    record_timing: bool,
}

fn main() {
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    let bits = cli.precision_bits.unwrap_or(DEFAULT_BITS);
    torusrate::fixed::check_bits(bits)?;
    let format = cli.format.map(OutputFormat::from);
    match &cli.command {
        Command::Cf { frequency, max_q } => {
            let f = parse_freq(frequency, bits)?;
            let (cf, exhausted) = expand_cf_partial(&f, *max_q)?;
            let rows: Vec<_> = (1..=cf.certified_len)
                .map(|n| {
                    json!({
                        "n": n,
                        "a": cf.a[n - 1].to_string(),
                        "p": cf.p[n].to_string(),
                        "q": cf.q[n].to_string(),
                        "error": cf.signed_error(n).ok(),
                    })
                })
                .collect();
            if matches!(format, Some(OutputFormat::Csv)) {
                println!("n,a,p,q,error");
                for n in 1..=cf.certified_len {
                    let e = cf.signed_error(n).map(|e| format!("{e:e}")).unwrap_or_default();
                    println!("{n},{},{},{},{e}", cf.a[n - 1], cf.p[n], cf.q[n]);
                }
            } else {
                let out = json!({
                    "frequency": f.to_string(),
                    "certified_len": cf.certified_len,
                    "precision_exhausted": exhausted,
                    "terms": rows,
                });
                println!("{}", serde_json::to_string_pretty(&out)?);
            }
        }
        Command::Classify {
            frequency,
            k_max,
            bb_constant,
        } => {
            let f = parse_freq(frequency, bits)?;
            let cf = expand_cf(&f, u128::MAX >> 2)?;
            let opts = ClassifyOptions {
                k_max: *k_max,
                bb_constant: *bb_constant,
                ..Default::default()
            };
            println!("{}", serde_json::to_string_pretty(&classify(&f, &cf, &opts)?)?);
        }
        Command::Ostrowski { frequency, n } => {
            let f = parse_freq(frequency, bits)?;
            let cf = expand_cf(&f, u128::MAX >> 2)?;
            let digits = ostrowski_digits(&cf, *n)?;
            let digits: Vec<String> = digits.iter().map(u128::to_string).collect();
            println!("{}", serde_json::to_string(&json!({ "n": n.to_string(), "digits": digits }))?);
        }
        Command::Rate(a) => experiment(&cli, ExperimentKind::Rate, a)?,
        Command::Kernel(a) => experiment(&cli, ExperimentKind::Kernel, a)?,
        Command::Approx(a) => experiment(&cli, ExperimentKind::Approx, a)?,
        Command::Sharp(a) => experiment(&cli, ExperimentKind::Sharp, a)?,
        Command::Skew(a) => experiment(&cli, ExperimentKind::Skew, a)?,
        Command::Scenario { id } => {
            let ids: Vec<&str> = if id.eq_ignore_ascii_case("all") {
                scenario_ids()
            } else {
                vec![id.as_str()]
            };
            let mut failed = false;
            for id in ids {
                let o = run_scenario(id)?;
                let status = if o.passed { "PASS" } else { "FAIL" };
                let note = if o.unattainable { " [unattainable]" } else { "" };
                println!("{:<4} {status}{note}  {} ({:.1}s): {}", o.id, o.title, o.elapsed_secs, o.detail);
                failed |= !o.passed;
            }
            if failed {
                std::process::exit(2);
            }
        }
    }
    Ok(())
}

fn parse_freq(s: &str, bits: u32) -> Result<Frequency> {
    let f: Frequency = s.parse()?;
    Ok(f.with_bits(bits)?)
}

/// Load the config (or start from defaults), apply flag overrides and
/// re-validate through the TOML parser.
fn build_config(cli: &Cli, kind: ExperimentKind, a: &ExpArgs) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let cfg = ExperimentConfig::parse(&text).with_context(|| format!("in {}", path.display()))?;
            if cfg.experiment != kind {
                bail!("{} describes a {:?} experiment", path.display(), cfg.experiment);
            }
            cfg
        }
        None => ExperimentConfig::new(kind),
    };
    macro_rules! set {
        ($($f:ident),*) => { $( if let Some(v) = &a.$f { cfg.$f = Some(v.clone()); } )* };
    }
    set!(system, observable, envelope, name, frequencies, n_values, frequency, weight, m_values, k, degrees);
    if let Some(s) = &a.schedule {
        cfg.schedule = Some(s.parse()?);
    }
    if let Some(g) = a.grid {
        cfg.grid = Some(g);
    }
    if let Some(q) = a.q_max {
        cfg.q_max = Some(q);
    }
    if let Some(e) = a.eps {
        cfg.eps = Some(e);
    }
    if let Some(p) = a.points {
        cfg.points = Some(p);
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if a.record_timing {
        cfg.record_timing = true;
    }
    if let Some(b) = cli.precision_bits {
        cfg.precision_bits = b;
    }
    if let Some(f) = cli.format {
        cfg.format = f.into();
    }
    Ok(ExperimentConfig::parse(&cfg.to_toml())?)
}

fn experiment(cli: &Cli, kind: ExperimentKind, a: &ExpArgs) -> Result<()> {
    let cfg = build_config(cli, kind, a)?;
    let out = run_experiment(&cfg)?;
    let dir = out_dir(&cfg, cli.out_dir.as_deref());
    let manifest = write_outputs(&cfg, &out, &dir)?;
    for f in &manifest.files {
        eprintln!("wrote {} ({} bytes)", dir.join(&f.name).display(), f.bytes);
    }
    if cfg.format != OutputFormat::Json {
        print!("{}", String::from_utf8(to_csv(&out)?)?);
    }
    Ok(())
}
