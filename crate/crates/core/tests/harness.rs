use std::fs;

use proptest::prelude::*;
use torusrate::dynamics::{char_birkhoff_skew, SystemSpec};
use torusrate::harness::{
    run_experiment, run_rate_experiment, sha256_hex, write_outputs, ExperimentConfig, ExperimentKind, ExperimentOutput,
    OutputFormat, RateRow, Schedule,
};
use torusrate::{Error, TorusPoint};

fn rate_cfg(system: &str, observable: &str, schedule: &str, grid: usize) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(ExperimentKind::Rate);
    cfg.system = Some(system.into());
    cfg.observable = Some(observable.into());
    cfg.schedule = Some(schedule.parse().unwrap());
    cfg.grid = Some(grid);
    cfg
}

fn schedule_strategy() -> impl Strategy<Value = Schedule> {
    prop_oneof![
        (1u64..1000, 2u64..50, 1.1f64..4.0).prop_map(|(lo, k, f)| Schedule::Geometric {
            min: lo,
            max: lo * k,
            factor: f,
        }),
        (2u64..100_000).prop_map(|q| Schedule::Convergents { q_max: q }),
        prop::collection::btree_set(1u64..1_000_000, 1..8).prop_map(|s| Schedule::List(s.into_iter().collect())),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn rate_config_round_trips(
        sched in schedule_strategy(),
        grid in 16usize..2048,
        seed in any::<u64>(),
        bits in 64u32..=256,
        alpha in 0.05f64..1.0,
        timing in any::<bool>(),
        fmt in prop_oneof![Just(OutputFormat::Csv), Just(OutputFormat::Json), Just(OutputFormat::Both)],
    ) {
        let mut cfg = rate_cfg("rot1:golden", &format!("dist_pow:{alpha}"), "list:1", grid);
        cfg.schedule = Some(sched);
        cfg.seed = seed;
        cfg.precision_bits = bits;
        cfg.record_timing = timing;
        cfg.format = fmt;
        cfg.envelope = Some(format!("sdc:alpha={alpha},gamma=0.25"));
        let text = cfg.to_toml();
        let back = ExperimentConfig::parse(&text).unwrap();
        prop_assert_eq!(back, cfg);
    }
}

#[test]
fn other_kinds_round_trip() {
    let texts = [
        "experiment = \"kernel\"\nfrequencies = [\"golden\", \"pq:rule:linear\"]\nn_values = [1000, 10000]\nq_max = 6765\n",
        "experiment = \"sharp\"\nfrequency = \"pq:rule:spike:7=1000\"\nweight = \"holder:0.5\"\nm_values = [6]\nc_gap = 10.0\n",
        "experiment = \"skew\"\nsystem = \"skew:2:golden\"\nk = [1, 0]\nschedule = \"list:10,100\"\neps = 0.05\npoints = 4\n",
        "experiment = \"approx\"\nsystem = \"rot1:golden\"\nobservable = \"dist_pow:0.5\"\ndegrees = [16, 32]\nquad_factor = 32\n",
    ];
    for t in texts {
        let cfg = ExperimentConfig::parse(t).unwrap();
        assert_eq!(ExperimentConfig::parse(&cfg.to_toml()).unwrap(), cfg, "{t}");
    }
}

#[test]
fn missing_field_is_reported_with_its_name() {
    match ExperimentConfig::parse("experiment = \"kernel\"\nn_values = [10]\n") {
        Err(Error::Config { field, .. }) => assert_eq!(field, "frequencies"),
        other => panic!("{other:?}"),
    }
    match ExperimentConfig::parse("experiment = \"rate\"\nsystem = \"rot1:golden\"\nobservable = \"cos\"\nschedule = \"list:9,3\"\n") {
        Err(Error::Config { line, field, .. }) => assert_eq!((line, field.as_str()), (4, "schedule")),
        other => panic!("{other:?}"),
    }
}

#[test]
fn outputs_are_byte_identical_and_checksummed() {
    let mut cfg = rate_cfg("rot1:silver", "dist_pow:0.5", "geometric:10:1000:3", 64);
    cfg.envelope = Some("sdc:alpha=0.5".into());
    cfg.name = Some("silver".into());
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let out = run_experiment(&cfg).unwrap();
    let ma = write_outputs(&cfg, &out, a.path()).unwrap();
    let mb = write_outputs(&cfg, &run_experiment(&cfg).unwrap(), b.path()).unwrap();
    assert_eq!(ma, mb);
    for name in ["silver.csv", "silver.json", "silver.manifest.json"] {
        assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap());
    }
    for f in &ma.files {
        assert_eq!(sha256_hex(&fs::read(a.path().join(&f.name)).unwrap()), f.sha256);
    }
    assert_eq!(ma.config_sha256, sha256_hex(ma.config.as_bytes()));

    let mut rdr = csv::Reader::from_path(a.path().join("silver.csv")).unwrap();
    let rows: Vec<RateRow> = rdr.deserialize().collect::<Result<_, _>>().unwrap();
    let json: ExperimentOutput = serde_json::from_slice(&fs::read(a.path().join("silver.json")).unwrap()).unwrap();
    match (out, json) {
        (ExperimentOutput::Rate(s), ExperimentOutput::Rate(j)) => {
            assert_eq!(rows, s.rows);
            assert_eq!(j, s);
        }
        _ => panic!("wrong output kind"),
    }
}

#[test]
fn coboundary_rate_is_one_over_n() {
    let cfg = rate_cfg("rot1:golden", "coboundary", "geometric:10:100000:3.16", 64);
    let s = run_rate_experiment(&cfg).unwrap();
    assert!(s.slope.unwrap() <= -0.9, "{:?}", s.slope);
}

#[test]
fn convergent_schedule_sits_under_denjoy_koksma() {
    let mut cfg = rate_cfg("rot1:golden", "dist_pow:0.5", "convergents:10000", 1024);
    cfg.envelope = Some("dk:alpha=0.5".into());
    let s = run_rate_experiment(&cfg).unwrap();
    let norm = 1.0 + 2f64.powf(-0.5);
    assert!(s.fit.unwrap().scale <= norm);
    assert!(s.rows.iter().all(|r| r.sup_dev <= norm * (r.n as f64).powf(-0.5)));
}

#[test]
fn skew_single_mode_matches_char_sum() {
    let cfg = rate_cfg("skew:2:golden", "mode:1,0", "list:50,400", 16);
    let s = run_rate_experiment(&cfg).unwrap();
    let sys = SystemSpec::parse("skew:2:golden", 192).unwrap();
    for r in &s.rows {
        // Oracle: max over the same grid of |Re Σ e(k·S^j x)| / N.
        let mut best: f64 = 0.0;
        for i in 0..16 {
            for j in 0..16 {
                let x = TorusPoint::from_f64s(&[i as f64 / 16.0, j as f64 / 16.0], 192).unwrap();
                let c = char_birkhoff_skew(sys.omega[0], &[1, 0], &x, r.n).unwrap();
                best = best.max(c.sum.re.abs() / r.n as f64);
            }
        }
        assert!((r.sup_dev - best).abs() < 1e-9, "N={} {} vs {}", r.n, r.sup_dev, best);
    }
}
