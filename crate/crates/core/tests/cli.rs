use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn invmean(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_invmean"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn first_number(o: &Output) -> f64 {
    stdout(o).lines().next().unwrap().trim().parse().unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli");
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn eval_prints_the_log_mean() {
    let o = invmean(&["eval", "--mean", "L", "--args", "1,2"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "1.442695");
}

#[test]
fn construct_arithmetic_base_gives_the_average() {
    let o = invmean(&["construct", "--base", "A2", "--args", "1,2,3"]);
    assert_eq!(o.status.code(), Some(0));
    assert!((first_number(&o) - 2.0).abs() < 1e-12);
}

#[test]
fn construct_trace_lists_every_state() {
    let o = invmean(&[
        "construct",
        "--base",
        "G2",
        "--args",
        "1,2,3",
        "--trace",
        "--format",
        "json",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let states = v["states"].as_array().unwrap();
    assert_eq!(states.len() as u64, v["iterations"].as_u64().unwrap() + 1);
    assert!((v["limit"].as_f64().unwrap() - 6f64.cbrt()).abs() < 1e-14);
}

#[test]
fn type2_check_of_l3_reports_a_positive_violation() {
    let o = invmean(&[
        "check", "--type", "2", "--mean3", "L3", "--mean2", "L", "--args", "1,2", "--format", "csv",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    let row = text.lines().find(|l| l.starts_with("check,residual,")).unwrap();
    let r: f64 = row.rsplit(',').next().unwrap().parse().unwrap();
    assert!((r - 1.3e-5).abs() < 5e-6, "{r}");
}

#[test]
fn type1_check_passes_for_classical_pair() {
    let o = invmean(&[
        "check", "--type", "1", "--mean3", "G3", "--mean2", "G2", "--args", "1,2,3",
    ]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn machine_output_round_trips() {
    let o = invmean(&["eval", "--mean", "L3", "--args", "1,2,3", "--format", "csv"]);
    let text = stdout(&o);
    let printed = text.lines().nth(1).unwrap().rsplit(',').next().unwrap();
    let v: f64 = printed.parse().unwrap();
    assert_eq!(format!("{v:.16e}"), printed);
    let j = invmean(&["eval", "--mean", "L3", "--args", "1,2,3", "--format", "json"]);
    let jv: serde_json::Value = serde_json::from_slice(&j.stdout).unwrap();
    assert_eq!(jv["value"].as_f64().unwrap(), v);
}

#[test]
fn scan_files_are_byte_identical_across_runs_and_schedules() {
    let a = scratch("a.json");
    let b = scratch("b.json");
    let args = |p: &PathBuf| {
        vec![
            "scan",
            "--claim",
            "conj1",
            "--samples",
            "300",
            "--seed",
            "9",
            "--box",
            "0.2:5",
        ]
        .into_iter()
        .map(String::from)
        .chain(["--out".into(), p.display().to_string()])
        .collect::<Vec<String>>()
    };
    let run = |v: Vec<String>| Command::new(env!("CARGO_BIN_EXE_invmean")).args(v).output().unwrap();
    assert_eq!(run(args(&a)).status.code(), Some(0));
    let mut seq = args(&b);
    seq.push("--sequential".into());
    assert_eq!(run(seq).status.code(), Some(0));
    let (ta, tb) = (fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_eq!(ta, tb);
    let v: serde_json::Value = serde_json::from_slice(&ta).unwrap();
    assert_eq!(v["claim"], "conj1");
    assert_eq!(v["verdict"], "evidence-only");
    assert_eq!(v["config"]["box"], serde_json::json!([0.2, 5.0]));
    assert_eq!(v["config"]["seed"], 9);
    for key in ["samples", "tolerance", "generator"] {
        assert!(v["config"].get(key).is_some(), "{key}");
    }
    for key in [
        "excluded_near_diagonal",
        "violations",
        "max_residual",
        "artifact_version",
    ] {
        assert!(v.get(key).is_some(), "{key}");
    }
}

#[test]
fn csv_scan_ends_with_a_summary_row() {
    let p = scratch("lehmer.csv");
    let o = invmean(&["scan", "--claim", "lehmer", "--out", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(&p).unwrap();
    assert_eq!(text.lines().next().unwrap(), "kind,label,point,lhs,rhs,gap,verdict");
    assert!(text.lines().last().unwrap().starts_with("summary,lehmer,"));
    assert!(text.trim_end().ends_with(",pass"));
}

#[test]
fn config_file_is_read_and_flags_override_it() {
    let cfg = scratch("scan.conf");
    fs::write(
        &cfg,
        "# scan defaults\nsamples = 40\nseed = 5\nbox = 0.5:2\nformat = json\n",
    )
    .unwrap();
    let o = invmean(&[
        "--config",
        cfg.to_str().unwrap(),
        "scan",
        "--claim",
        "conj2",
        "--seed",
        "6",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["config"]["samples"], 40);
    assert_eq!(v["config"]["seed"], 6);
    assert_eq!(v["config"]["box"], serde_json::json!([0.5, 2.0]));
}

#[test]
fn unknown_config_key_is_a_usage_error() {
    let cfg = scratch("bad.conf");
    fs::write(&cfg, "samples = 10\nspeed = fast\n").unwrap();
    let o = invmean(&[
        "--config",
        cfg.to_str().unwrap(),
        "eval",
        "--mean",
        "A2",
        "--args",
        "1,2",
    ]);
    assert_eq!(o.status.code(), Some(3));
    let err = String::from_utf8(o.stderr).unwrap();
    assert_eq!(err.lines().count(), 1);
    assert!(err.contains("speed"));
}

#[test]
fn exit_codes_follow_the_error_kind() {
    assert_eq!(
        invmean(&["eval", "--mean", "A2", "--args", "1,x"]).status.code(),
        Some(3)
    );
    assert_eq!(
        invmean(&["eval", "--mean", "nope", "--args", "1,2"]).status.code(),
        Some(3)
    );
    assert_eq!(
        invmean(&["construct", "--base", "min", "--args", "1,2,3"])
            .status
            .code(),
        Some(3)
    );
    assert_eq!(
        invmean(&["scan", "--claim", "conj1", "--box", "3:1"]).status.code(),
        Some(3)
    );
    let o = invmean(&["--max-iter", "5", "construct", "--base", "L", "--args", "1,2,3"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(String::from_utf8(o.stderr).unwrap().lines().count(), 1);
    assert_eq!(invmean(&["--version"]).status.code(), Some(0));
}

#[test]
fn non_isotone_base_needs_the_flag() {
    assert_eq!(
        invmean(&["construct", "--base", "lh:2", "--args", "1,2,3"])
            .status
            .code(),
        Some(3)
    );
    let o = invmean(&["--allow-non-isotone", "construct", "--base", "lh:2", "--args", "1,2,3"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(first_number(&o) < 7.0 / 3.0);
}

#[test]
fn extract_extend_and_taylor_commands() {
    let o = invmean(&["extract", "--mean3", "LH:2", "--args", "1,2", "--seed-mean", "max"]);
    assert_eq!(o.status.code(), Some(0));
    assert!((first_number(&o) - 5.0 / 3.0).abs() < 1e-6);

    let o = invmean(&["extend", "--base", "W:2/3", "--n", "WG:2/3", "--args", "1,2,3"]);
    assert_eq!(o.status.code(), Some(0));

    let o = invmean(&[
        "taylor",
        "--base",
        "L",
        "--order",
        "3",
        "--args",
        "0.9,1,1.1",
        "--format",
        "json",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["value"].as_f64().unwrap() - 449.0 / 450.0).abs() < 1e-12);
    let o = invmean(&["taylor", "--base", "G2", "--order", "2", "--args", "2,2,2", "--rescale"]);
    assert!((first_number(&o) - 2.0).abs() < 1e-6);
    assert_eq!(
        invmean(&["taylor", "--base", "L", "--order", "5", "--args", "1,1,1"])
            .status
            .code(),
        Some(3)
    );
}

#[test]
fn demo_runs() {
    let o = invmean(&["demo"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("16/18225"));
}
