use std::fs;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_torusrate"))
}

#[test]
fn cf_prints_convergents() {
    let out = bin().args(["cf", "silver", "--max-q", "100", "--format", "csv"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let qs: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').nth(3).unwrap()).collect();
    assert_eq!(qs, ["2", "5", "12", "29", "70"]);
}

#[test]
fn ostrowski_digits_reconstruct() {
    let out = bin().args(["ostrowski", "golden", "100"]).output().unwrap();
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    // 100 = 89 + 8 + 3 in Fibonacci (Zeckendorf) form.
    let digits: Vec<u64> = v["digits"].as_array().unwrap().iter().map(|d| d.as_str().unwrap().parse().unwrap()).collect();
    let fib = [1u64, 1, 2, 3, 5, 8, 13, 21, 34, 55, 89];
    let total: u64 = digits.iter().zip(fib).map(|(d, q)| d * q).sum();
    assert_eq!(total, 100);
}

#[test]
fn config_file_runs_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("k.toml");
    fs::write(
        &cfg,
        "experiment = \"kernel\"\nname = \"k\"\nfrequencies = [\"golden\"]\nn_values = [100, 1000]\nq_max = 100\n",
    )
    .unwrap();
    for sub in ["a", "b"] {
        let status = bin()
            .args(["kernel", "--config"])
            .arg(&cfg)
            .arg("--out-dir")
            .arg(dir.path().join(sub))
            .output()
            .unwrap()
            .status;
        assert!(status.success());
    }
    for f in ["k.csv", "k.json", "k.manifest.json"] {
        assert_eq!(
            fs::read(dir.path().join("a").join(f)).unwrap(),
            fs::read(dir.path().join("b").join(f)).unwrap()
        );
    }
}

#[test]
fn bad_config_reports_line_and_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "experiment = \"rate\"\nsystem = \"rot1:golden\"\ngrid = \"wide\"\n").unwrap();
    let out = bin().arg("rate").arg("--config").arg(&cfg).output().unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 3") && err.contains("grid"), "{err}");
}

#[test]
fn kind_mismatch_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("k.toml");
    fs::write(&cfg, "experiment = \"kernel\"\nfrequencies = [\"golden\"]\nn_values = [10]\n").unwrap();
    let out = bin().arg("rate").arg("--config").arg(&cfg).output().unwrap();
    assert!(!out.status.success());
}

#[test]
fn scenario_subcommand() {
    let out = bin().args(["scenario", "C6"]).output().unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("C6   PASS"));
}

#[test]
fn precision_bits_are_validated() {
    let out = bin().args(["--precision-bits", "8", "cf", "golden"]).output().unwrap();
    assert!(!out.status.success());
}
