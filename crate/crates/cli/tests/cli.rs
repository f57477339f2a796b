use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const FIXTURES: [&str; 5] = ["spider3_thirds", "kale_2pi", "kale_3pi", "open_book_3_2", "petersen_cone"];
const COMMANDS: [&str; 10] = [
    "mean",
    "derivs",
    "classify",
    "perturb",
    "wasserstein",
    "divergence",
    "sample-sim",
    "modulation",
    "clt",
    "prismatic",
];

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(format!("{name}.json"))
}

fn stickygeom(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stickygeom"))
        .args(args)
        .env_remove("STICKYGEOM_THREADS")
        .output()
        .expect("binary runs")
}

fn run_json(command: &str, name: &str) -> serde_json::Value {
    let out = stickygeom(&[command, "--config", fixture(name).to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn classify_spider_thirds() {
    let v = run_json("classify", "spider3_thirds");
    assert_eq!(v["label"], "sticky");
    assert!((v["c_min"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-15);
}

#[test]
fn plane_is_not_prismatic() {
    assert_eq!(run_json("prismatic", "kale_2pi")["prismatic"], false);
    for name in ["spider3_thirds", "kale_3pi", "open_book_3_2", "petersen_cone"] {
        assert_eq!(run_json("prismatic", name)["prismatic"], true, "{name}");
    }
}

#[test]
fn perturbation_threshold_on_the_thirds_fixture() {
    let v = run_json("perturb", "spider3_thirds");
    assert!((v["threshold"].as_f64().unwrap() - 1.0 / 7.0).abs() < 1e-12);
}

#[test]
fn every_fixture_runs_every_applicable_command() {
    let dir = tempfile::tempdir().unwrap();
    for name in FIXTURES {
        for command in COMMANDS {
            for format in ["csv", "json"] {
                let out_path = dir.path().join(format!("{name}-{command}.{format}"));
                let out = stickygeom(&[
                    command,
                    "--config",
                    fixture(name).to_str().unwrap(),
                    "--format",
                    format,
                    "--out",
                    out_path.to_str().unwrap(),
                ]);
                let stderr = String::from_utf8_lossy(&out.stderr);
                if command == "modulation" && name == "open_book_3_2" {
                    assert_eq!(out.status.code(), Some(2), "{stderr}");
                    assert!(stderr.contains("not supported"), "{stderr}");
                    continue;
                }
                assert!(out.status.success(), "{name} {command}: {stderr}");
                let summary = String::from_utf8(out.stdout).unwrap();
                assert_eq!(summary.lines().count(), 1, "{summary}");
                assert!(summary.starts_with(command), "{summary}");
                let body = std::fs::read_to_string(&out_path).unwrap();
                if format == "json" {
                    serde_json::from_str::<serde_json::Value>(&body).unwrap();
                } else {
                    let width = body.lines().next().unwrap().split(',').count();
                    assert!(width >= 2 && body.lines().count() >= 2, "{body}");
                }
            }
        }
    }
}

#[test]
fn sample_sim_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let config = fixture("spider3_thirds");
    let mut bodies = Vec::new();
    for (i, threads) in ["1", "1", "3"].iter().enumerate() {
        let path = dir.path().join(format!("run{i}.csv"));
        let out = stickygeom(&[
            "sample-sim",
            "--config",
            config.to_str().unwrap(),
            "--seed",
            "42",
            "--format",
            "csv",
            "--threads",
            threads,
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success());
        bodies.push(std::fs::read(&path).unwrap());
    }
    assert_eq!(bodies[0], bodies[1]);
    assert_eq!(bodies[0], bodies[2]);
    let text = String::from_utf8(bodies[0].clone()).unwrap();
    assert_eq!(text.lines().next().unwrap(), "n,trials,p_hat,se,bound");
}

#[test]
fn thread_count_from_the_environment() {
    let config = fixture("kale_2pi");
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_stickygeom"))
            .args(["sample-sim", "--config", config.to_str().unwrap(), "--format", "csv"])
            .env("STICKYGEOM_THREADS", threads)
            .output()
            .unwrap()
    };
    let (a, b) = (run("1"), run("2"));
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn csv_headers_follow_the_table_layouts() {
    let header = |command: &str, name: &str| {
        let out = stickygeom(&[command, "--config", fixture(name).to_str().unwrap(), "--format", "csv"]);
        assert!(out.status.success());
        String::from_utf8(out.stdout).unwrap().lines().next().unwrap().to_string()
    };
    assert_eq!(header("modulation", "kale_2pi"), "n,q,m_hat,se");
    assert_eq!(header("clt", "spider3_thirds"), "i,j,uncentered_cov,centered_cov,empirical_cov,se");
    assert_eq!(header("classify", "spider3_thirds"), "field,value");
}

#[test]
fn exit_codes_for_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.json");
    let out = stickygeom(&["mean", "--config", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        r#"{"space": {"kind": "spider", "K": 3}, "measure": [{"point": {"dir": 0, "r": -1}, "weight": 0.8}]}"#,
    )
    .unwrap();
    let out = stickygeom(&["mean", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("/measure/0/point/r"), "{stderr}");
    assert!(stderr.contains("weights must sum to 1"), "{stderr}");

    // stochastic commands need a seed
    let unseeded = dir.path().join("unseeded.json");
    std::fs::write(
        &unseeded,
        r#"{"space": {"kind": "spider", "K": 3}, "measure": [{"point": {"dir": 0, "r": 1}, "weight": 1}]}"#,
    )
    .unwrap();
    let out = stickygeom(&["sample-sim", "--config", unseeded.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed"));
    let out = stickygeom(&["sample-sim", "--config", unseeded.to_str().unwrap(), "--seed", "7"]);
    assert!(out.status.success());

    let out = stickygeom(&["frobnicate", "--config", unseeded.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}
