use std::process::Command;

use coupled_painleve_cli::run;
use serde_json::Value;

fn cli(args: &[&str]) -> coupled_painleve_cli::Outcome {
    run(std::iter::once("painleve-verify").chain(args.iter().copied()))
}

fn json_lines(s: &str) -> Vec<Value> {
    s.lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

fn scratch(name: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("painleve-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn help_and_version_exit_cleanly() {
    let out = cli(&["--help"]);
    assert_eq!(out.code, 0);
    assert!(out.stdout.contains("characterize"));
    assert_eq!(cli(&["--version"]).code, 0);
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(cli(&["frobnicate"]).code, 2);
    assert_eq!(cli(&["verify", "symmetry"]).code, 2);
    let out = cli(&["verify", "symmetry", "--system", "d3", "--generator", "s9"]);
    assert_eq!(out.code, 2);
    assert!(out.stderr.contains("s9"));
    assert_eq!(cli(&["verify", "symmetry", "--system", "d7"]).code, 2);
    assert_eq!(
        cli(&[
            "integrate",
            "--system",
            "d3",
            "--alpha",
            "1/4,x",
            "--state",
            "1,0,1,0",
            "--t-end",
            "1"
        ])
        .code,
        2
    );
}

#[test]
fn json_reports_one_per_line() {
    let out = cli(&["--format", "json", "verify", "symmetry", "--system", "d5"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let reports = json_lines(&out.stdout);
    let subjects: Vec<&str> = reports
        .iter()
        .map(|r| r["subject"].as_str().unwrap())
        .collect();
    assert_eq!(subjects, ["s0", "s1", "s2", "s3", "s4", "pi"]);
    assert!(reports
        .iter()
        .all(|r| r["status"] == "pass" && r["task"] == "symmetry"));
}

#[test]
fn text_reports_carry_the_status() {
    let out = cli(&["verify", "divisors", "--system", "d3"]);
    assert_eq!(out.code, 0);
    assert_eq!(out.stdout.lines().count(), 3);
    assert!(out.stdout.lines().all(|l| l.starts_with("PASS")));
}

#[test]
fn a_non_identity_word_fails() {
    let out = cli(&[
        "verify",
        "relations",
        "--system",
        "d3",
        "--word",
        "s0,s1",
        "--expect-identity",
    ]);
    assert_eq!(out.code, 1);
    let out = cli(&[
        "verify",
        "relations",
        "--system",
        "d3",
        "--word",
        "s0,s1,s0,s1,s0,s1,s0,s1",
    ]);
    assert_eq!(out.code, 0);
}

#[test]
fn config_file_supplies_defaults() {
    let path = scratch("reg.conf");
    std::fs::write(&path, "system = d5\nformat = json\ngenerator = pi\n").unwrap();
    let out = cli(&["--config", path.to_str().unwrap(), "verify", "symmetry"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let reports = json_lines(&out.stdout);
    assert_eq!(reports.len(), 1);
    assert_eq!(reports[0]["system"], "d5");
    // flags win over the file
    let out = cli(&[
        "--config",
        path.to_str().unwrap(),
        "--format",
        "text",
        "verify",
        "symmetry",
        "--system",
        "d3",
        "--generator",
        "s1",
    ]);
    assert!(out.stdout.starts_with("PASS") && out.stdout.contains("d3"));
    std::fs::write(&path, "system d5\n").unwrap();
    assert_eq!(
        cli(&["--config", path.to_str().unwrap(), "verify", "symmetry"]).code,
        2
    );
}

#[test]
fn integrate_writes_csv() {
    let path = scratch("traj.csv");
    let out = cli(&[
        "--format",
        "json",
        "integrate",
        "--system",
        "d3",
        "--alpha",
        "1/4,1/8",
        "--state",
        "1,0,1,0",
        "--t-end",
        "0.25",
        "--csv",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let r = &json_lines(&out.stdout)[0];
    assert_eq!(r["status"], "report-only");
    assert_eq!(r["payload"]["alpha"]["alpha2"], "1/8");
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().next().unwrap(), "t,q1,p1,q2,p2,H,f0,f1,f2");
    assert_eq!(
        text.lines().count() as u64,
        r["payload"]["steps"].as_u64().unwrap() + 2
    );
}

#[test]
fn integration_into_a_pole_is_inconclusive() {
    let out = cli(&[
        "--format",
        "json",
        "integrate",
        "--system",
        "d3",
        "--alpha",
        "1/4,1/8",
        "--state",
        "1,0,1,0",
        "--t-end",
        "1",
    ]);
    assert_eq!(out.code, 0);
    assert_eq!(json_lines(&out.stdout)[0]["status"], "inconclusive");
}

#[test]
fn check_backlund_defaults_to_a_generic_start() {
    let out = cli(&[
        "--format",
        "json",
        "check-backlund",
        "--system",
        "d5",
        "--generator",
        "pi",
    ]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    assert!(
        json_lines(&out.stdout)[0]["payload"]["max_deviation"]
            .as_f64()
            .unwrap()
            < 1e-6
    );
    assert_eq!(cli(&["check-backlund", "--system", "d5"]).code, 2);
}

#[test]
fn search_integrals_on_the_autonomous_subsystem() {
    let out = cli(&["--format", "json", "search-integrals", "--system", "auto"]);
    assert_eq!(out.code, 0);
    assert_eq!(json_lines(&out.stdout)[0]["payload"]["dimension"], 2);
}

#[test]
fn chart_subset_must_exist() {
    assert_eq!(
        cli(&["characterize", "--system", "d3", "--charts", "r0,r9"]).code,
        2
    );
    let out = cli(&[
        "--format",
        "json",
        "characterize",
        "--system",
        "d3",
        "--samples",
        "1",
        "--charts",
        "r0,r1",
    ]);
    assert_eq!(out.code, 1);
}

fn seed_of(envseed: Option<&str>, args: &[&str]) -> String {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_painleve-verify"));
    cmd.args([
        "--format",
        "json",
        "search-integrals",
        "--system",
        "auto",
        "--samples",
        "1",
    ])
    .args(args);
    match envseed {
        Some(s) => cmd.env("PAINLEVE_SEED", s),
        None => cmd.env_remove("PAINLEVE_SEED"),
    };
    let out = cmd.output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let r = &json_lines(&String::from_utf8(out.stdout).unwrap())[0];
    r["payload"]["samples"][0].as_str().unwrap().to_string()
}

#[test]
fn seed_precedence() {
    let default = seed_of(None, &[]);
    let from_env = seed_of(Some("7"), &[]);
    assert_ne!(default, from_env);
    assert_eq!(seed_of(Some("7"), &["--seed", "7"]), from_env);
    assert_eq!(seed_of(Some("7"), &["--seed", "20240615"]), default);
}
