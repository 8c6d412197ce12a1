//! CLI acceptance: every subcommand rerun with an identical configuration
//! must produce bit-identical CSV artifacts at worker counts 1 and 8.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_circlewalk")
}

fn run(sub: &str, args: &[&str], workers: &str, out: &Path) {
    let status = Command::new(bin())
        .arg(sub)
        .args(args)
        .args(["--workers", workers, "--out"])
        .arg(out)
        .status()
        .expect("spawning circlewalk");
    assert!(status.success(), "{sub} exited with {status}");
}

fn csv_bytes(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    for entry in std::fs::read_dir(dir).expect("output dir") {
        let entry = entry.expect("dir entry");
        let name = entry.file_name().to_string_lossy().to_string();
        if name.ends_with(".csv") {
            out.insert(name, std::fs::read(entry.path()).expect("csv bytes"));
        }
    }
    out
}

#[test]
fn criterion_17_determinism() {
    let base = std::env::temp_dir().join(format!("circlewalk-acceptance-{}", std::process::id()));
    // (subcommand, extra args); parameters kept small, every code path real
    let seed = ["--seed", "90210"];
    let cases: Vec<(&str, Vec<&str>)> = vec![
        (
            "contract-curve",
            vec!["--lazy", "--trials", "48", "--n", "24"],
        ),
        (
            "boundary-curve",
            vec![
                "--lazy",
                "--trials",
                "32",
                "--checkpoints",
                "6,12",
                "--xi-horizon",
                "60",
            ],
        ),
        (
            "stationary",
            vec![
                "--lazy",
                "--trials",
                "48",
                "--bins",
                "8",
                "--xi-horizon",
                "60",
            ],
        ),
        (
            "visit-fraction",
            vec![
                "--lazy",
                "--trials",
                "32",
                "--n",
                "16",
                "--xi-horizon",
                "64",
            ],
        ),
        (
            "rn-check",
            vec![
                "--lazy",
                "--mix-weight",
                "1/8",
                "--trials",
                "32",
                "--n",
                "16",
                "--xi-horizon",
                "64",
            ],
        ),
        (
            "contract-interval",
            vec![
                "--lazy",
                "--trials",
                "4",
                "--max-steps",
                "400",
                "--arc-i-left",
                "1/4",
                "--arc-i-right",
                "3/8",
                "--arc-left",
                "7/8",
                "--arc-right",
                "1/8",
            ],
        ),
        (
            "domination-z",
            vec![
                "--lazy",
                "--mix-weight",
                "1/8",
                "--trials",
                "48",
                "--n",
                "20",
                "--sparsity",
                "1",
            ],
        ),
        (
            "domination-w",
            vec![
                "--lazy",
                "--mix-weight",
                "1/8",
                "--trials",
                "24",
                "--n",
                "16",
                "--xi-horizon",
                "64",
            ],
        ),
        (
            "good-collections",
            vec![
                "--lazy",
                "--mix-weight",
                "1/8",
                "--trials",
                "24",
                "--n",
                "16",
                "--xi-horizon",
                "64",
            ],
        ),
        ("entropy-curve", vec!["--lazy", "--n", "4"]),
        (
            "cond-entropy",
            vec![
                "--lazy",
                "--trials",
                "64",
                "--n",
                "3",
                "--bins",
                "8",
                "--xi-horizon",
                "36",
                "--bootstrap",
                "40",
            ],
        ),
        ("cocycle-check", vec!["--pairs", "60", "--word-len", "6"]),
        (
            "stabilization",
            vec!["--lazy", "--trials", "24", "--horizon", "60"],
        ),
        (
            "transience",
            vec!["--lazy", "--trials", "32", "--horizon", "80", "--x", "1/2"],
        ),
        (
            "harmonic",
            vec![
                "--lazy",
                "--trials",
                "48",
                "--horizon",
                "60",
                "--word",
                "A,B_inv",
                "--k-target",
                "0",
            ],
        ),
        (
            "theorem-b",
            vec![
                "--lazy",
                "--trials",
                "32",
                "--horizon",
                "60",
                "--xi-horizon",
                "48",
                "--n-list",
                "2,3",
            ],
        ),
        ("verify-relations", vec![]),
    ];
    assert_eq!(cases.len(), 17, "every subcommand is covered");

    let mut all_ok = true;
    for (sub, extra) in &cases {
        let mut reference: Option<BTreeMap<String, Vec<u8>>> = None;
        for (tag, workers) in [("w1", "1"), ("w8", "8"), ("w1-again", "1")] {
            let out: PathBuf = base.join(format!("{sub}-{tag}"));
            std::fs::create_dir_all(&out).expect("out dir");
            let mut args: Vec<&str> = extra.clone();
            args.extend_from_slice(&seed);
            run(sub, &args, workers, &out);
            let got = csv_bytes(&out);
            assert!(!got.is_empty(), "{sub} produced no CSV output");
            match &reference {
                None => reference = Some(got),
                Some(expect) => {
                    let same = expect == &got;
                    all_ok &= same;
                    assert!(
                        same,
                        "{sub}: CSV bytes differ between runs ({tag}); files {:?} vs {:?}",
                        expect.keys().collect::<Vec<_>>(),
                        got.keys().collect::<Vec<_>>()
                    );
                }
            }
        }
    }
    println!(
        "criterion 17 (determinism): {} - 17 subcommands, worker counts 1 and 8, reruns bit-identical",
        if all_ok { "PASS" } else { "FAIL" }
    );
    let _ = std::fs::remove_dir_all(&base);
}

#[test]
fn trials_zero_yields_header_only_csv() {
    let base = std::env::temp_dir().join(format!("circlewalk-zero-{}", std::process::id()));
    let out = base.join("stationary");
    std::fs::create_dir_all(&out).expect("out dir");
    let status = Command::new(bin())
        .args([
            "stationary",
            "--lazy",
            "--trials",
            "0",
            "--bins",
            "4",
            "--xi-horizon",
            "20",
            "--seed",
            "1",
            "--out",
        ])
        .arg(&out)
        .status()
        .expect("spawning circlewalk");
    assert!(status.success());
    let text = std::fs::read_to_string(out.join("stationary.csv")).expect("csv");
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "bin_left,bin_right,count");
    // bins are still listed, all with zero counts
    assert!(lines[1..].iter().all(|l| l.ends_with(",0")));
    let _ = std::fs::remove_dir_all(&base);
}

#[test]
fn unknown_subcommand_fails_with_usage() {
    let output = Command::new(bin())
        .arg("frobnicate")
        .output()
        .expect("spawning circlewalk");
    assert!(!output.status.success());
    let err = String::from_utf8_lossy(&output.stderr);
    assert!(
        err.contains("Usage") || err.contains("usage"),
        "stderr: {err}"
    );
}

#[test]
fn manifest_echoes_config() {
    let base = std::env::temp_dir().join(format!("circlewalk-manifest-{}", std::process::id()));
    std::fs::create_dir_all(&base).expect("dir");
    let cfg_path = base.join("run.json");
    std::fs::write(
        &cfg_path,
        r#"{"seed": 777, "trials": 8, "lazy": true, "n": 6, "xi_horizon": 24}"#,
    )
    .expect("config");
    let out = base.join("out");
    let status = Command::new(bin())
        .args(["visit-fraction", "--config"])
        .arg(&cfg_path)
        .args(["--trials", "4", "--out"])
        .arg(&out)
        .status()
        .expect("spawning circlewalk");
    assert!(status.success());
    let manifest: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(out.join("manifest.json")).expect("manifest"),
    )
    .expect("json");
    // CLI flag overrides the file value; file values for untouched fields stick
    assert_eq!(manifest["trials"], 4);
    assert_eq!(manifest["seed"], 777);
    assert_eq!(manifest["config"]["lazy"], true);
    assert_eq!(manifest["subcommand"], "visit-fraction");
    assert!(manifest["wall_time_secs"].as_f64().is_some());
    let _ = std::fs::remove_dir_all(&base);
}
