//! End-to-end behaviour of the command-line binary.

use std::process::{Command, Output};

use burgers_split::engine::{integrate, StepperConfig};
use burgers_split::harness::parse_report;
use burgers_split::{Method, Preset, ProblemSpec};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_burgers-split"))
        .args(args)
        .output()
        .unwrap()
}

#[test]
fn schemes_list_shows_effective_orders() {
    let out = cli(&["schemes", "list"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("(6,2)") && text.contains("(6,4)"));
    for name in ["Strang", "ML62", "RC4", "O4", "SM4", "SM64", "EXT4", "EXT6"] {
        assert!(text.contains(name), "{name}");
    }
}

#[test]
fn converge_writes_all_method_groups() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig1.csv");
    let out = cli(&[
        "converge",
        "--preset",
        "example1",
        "--nu",
        "0.03",
        "--resolution",
        "32",
        "--methods",
        "strang,ml62,rc4,o4,sm4,sm64,ext4,ext6",
        "--h",
        "2pi/10,2pi/20,2pi/40",
        "--reference-dt",
        "1e-3",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = parse_report(&path).unwrap();
    let mut groups: Vec<&str> = report.rows.iter().map(|r| r.method.as_str()).collect();
    groups.dedup();
    assert_eq!(groups.len(), 8);
    assert_eq!(report.rows.len(), 24);
}

#[test]
fn run_line_agrees_with_engine() {
    let out = cli(&["run", "--preset", "example2", "--nu", "0.1", "--method", "ext6", "--h", "0.05"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 1);
    let field = |key: &str| -> String {
        text.split_whitespace()
            .find_map(|kv| kv.strip_prefix(key))
            .unwrap()
            .to_string()
    };
    let p = ProblemSpec::<f64>::preset(Preset::Example2, false);
    let r = integrate(&p, &StepperConfig::new(Method::by_name("ext6").unwrap(), 0.05)).unwrap();
    assert_eq!(field("work_a_evals="), r.work.to_string());
    let err: f64 = field("error_inf=").parse().unwrap();
    assert_eq!(err, r.error_inf.unwrap());
}

#[test]
fn configuration_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "preset = example1\nviscosity = 0.1\n").unwrap();
    let out = cli(&["converge", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("viscosity"));

    let out = cli(&["run", "--preset", "example1", "--method", "strang", "--h", "0.3"]);
    assert_eq!(out.status.code(), Some(2));
    let out = cli(&["run", "--preset", "example1", "--method", "rk45", "--h", "2pi/10"]);
    assert_eq!(out.status.code(), Some(2));
    let out = cli(&["converge", "--preset", "example3", "--methods", "strang,rc4"]);
    assert_eq!(out.status.code(), Some(2));
    let unwritable = dir.path().join("missing").join("out.csv");
    let out = cli(&[
        "converge", "--preset", "example1", "--resolution", "16", "--h", "2pi/8,2pi/16", "--output",
        unwritable.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn numerical_failures_exit_with_three() {
    let out = cli(&["exact", "--t", "0.01"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn config_file_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("study.cfg");
    let out_path = dir.path().join("out.csv");
    std::fs::write(
        &cfg,
        format!(
            "# periodic study\npreset = example1\nresolution = 32\nmethods = strang\nh = 2pi/8, 2pi/16, 2pi/32\noutput = {}\n",
            out_path.display()
        ),
    )
    .unwrap();
    let out = cli(&["converge", "--config", cfg.to_str().unwrap(), "--methods", "strang,rc4"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = parse_report(&out_path).unwrap();
    assert_eq!(report.rows.len(), 6);
    assert!(report.rows.iter().all(|r| r.runtime_ms == 0.0));
}

#[test]
fn exact_samples_include_boundaries() {
    let out = cli(&["exact", "--example", "example3", "--nu", "0.1", "--t", "1", "--points", "9"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x,u");
    assert_eq!(lines.len(), 12);
    assert!(lines[1].ends_with(",0.0000000000000000e0"));
    assert!(lines[11].ends_with(",0.0000000000000000e0"));
    let out = cli(&["exact", "--example", "example1"]);
    assert_eq!(out.status.code(), Some(2));
}
