use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bloch-teleport"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Column names and records of a CSV output, header block stripped.
fn parse_csv(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let body: String = text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    let mut r = csv::Reader::from_reader(body.as_bytes());
    let cols = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect();
    (cols, rows)
}

fn column(cols: &[String], rows: &[Vec<String>], name: &str) -> Vec<f64> {
    let i = cols.iter().position(|c| c == name).unwrap();
    rows.iter().map(|r| r[i].parse().unwrap()).collect()
}

#[test]
fn teleport_error_beats_qse_at_every_n() {
    let out = run(&["teleport-error", "--n", "10:100:10", "--k1-cut", "0"]);
    assert!(out.status.success());
    let (cols, rows) = parse_csv(&stdout(&out));
    assert_eq!(&cols[..5], ["N", "k1_cut", "epsilon", "epsilon_qse", "epsilon_comm"]);
    assert_eq!(rows.len(), 10);
    let eps = column(&cols, &rows, "epsilon");
    let qse = column(&cols, &rows, "epsilon_qse");
    for (n, (e, q)) in column(&cols, &rows, "N").iter().zip(eps.iter().zip(&qse)) {
        assert_eq!(*q, 1.0 / (n + 2.0).sqrt());
        assert!(e < q, "N={n}: {e} >= {q}");
    }
}

#[test]
fn bounds_is_one_row_with_reference_values() {
    let out = run(&["bounds", "--n", "100"]);
    assert!(out.status.success());
    let (cols, rows) = parse_csv(&stdout(&out));
    assert_eq!(rows.len(), 1);
    assert_eq!(column(&cols, &rows, "epsilon_qse")[0], 1.0 / 102f64.sqrt());
    assert!((column(&cols, &rows, "epsilon_comm")[0] - 0.47).abs() <= 0.005);
}

#[test]
fn oracle_check_passes_at_n4() {
    let out = run(&["oracle-check", "--n", "4"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let (cols, rows) = parse_csv(&stdout(&out));
    assert_eq!(rows.len(), 6);
    let pass = cols.iter().position(|c| c == "pass").unwrap();
    assert!(rows.iter().all(|r| r[pass] == "true"));
    assert!(column(&cols, &rows, "max_deviation").iter().all(|&d| d < 1e-10));
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["oracle-check", "--n", "13"]).status.code(), Some(3));
    assert_eq!(run(&["bounds", "--n", "1:5:0"]).status.code(), Some(2));
    assert_eq!(run(&["bounds", "--bogus"]).status.code(), Some(2));
    assert_eq!(run(&["peaks", "--theta", "4"]).status.code(), Some(2));
    assert_eq!(run(&["nonsense"]).status.code(), Some(2));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    let io = run(&["bounds", "--out", "/nonexistent-dir/x.csv"]);
    assert_eq!(io.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&io.stderr).contains("/nonexistent-dir/x.csv"));
}

#[test]
fn empty_selection_writes_header_only() {
    let out = run(&["success-prob", "--n", "4", "--k1-cut", "7"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(body, ["N,theta,phi,k1_cut,k1_cut_ratio,success_prob,epsilon"]);
    let json = run(&["success-prob", "--n", "4", "--k1-cut", "7", "--format", "json"]);
    let v: Value = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(v["rows"], Value::Array(vec![]));
}

#[test]
fn same_settings_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let args = |p: &Path| {
        vec![
            "dephasing".to_string(),
            "--n".into(),
            "4".into(),
            "--gamma".into(),
            "0:1:0.5".into(),
            "--grid-phi".into(),
            "8".into(),
            "--quad-nodes".into(),
            "20".into(),
            "--out".into(),
            p.display().to_string(),
        ]
    };
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for p in [&a, &b] {
        let argv = args(p);
        let refs: Vec<&str> = argv.iter().map(String::as_str).collect();
        assert!(run(&refs).status.success());
    }
    let (ta, tb) = (fs::read_to_string(&a).unwrap(), fs::read_to_string(&b).unwrap());
    let strip = |s: &str| s.lines().filter(|l| !l.starts_with("# out=")).collect::<Vec<_>>().join("\n");
    assert_eq!(strip(&ta), strip(&tb));

    let mc = ["oracle-check", "--n", "2", "--gamma", "0.5", "--trajectories", "300", "--seed", "9"];
    assert_eq!(run(&mc).stdout, run(&mc).stdout);
}

#[test]
fn thread_count_does_not_change_values() {
    let base = ["teleport-error", "--n", "6", "--grid-theta", "6", "--grid-phi", "12"];
    let one = run(&[&base[..], &["--threads", "1"]].concat());
    let all = run(&base);
    let body = |o: &Output| parse_csv(&stdout(o));
    assert_eq!(body(&one), body(&all));
    assert!(stdout(&one).contains("# threads=1\n"));
}

#[test]
fn json_and_csv_carry_identical_values() {
    let common = ["peaks", "--n", "6", "--theta", "0:pi:pi/2", "--phi", "0.3", "--grid-theta", "16", "--grid-phi", "16"];
    let csv_out = run(&common);
    let json_out = run(&[&common[..], &["--format", "json"]].concat());
    let (cols, rows) = parse_csv(&stdout(&csv_out));
    let doc: Value = serde_json::from_slice(&json_out.stdout).unwrap();
    let jrows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), jrows.len());
    assert_eq!(rows.len(), 3 * 7);
    let mut saw_missing = false;
    for (r, j) in rows.iter().zip(jrows) {
        for (c, cell) in cols.iter().zip(r) {
            let v = &j[c.as_str()];
            match v {
                Value::Null => {
                    assert_eq!(cell, "");
                    saw_missing = true;
                }
                Value::Number(x) => assert_eq!(cell.parse::<f64>().unwrap(), x.as_f64().unwrap(), "{c}"),
                Value::String(s) => assert_eq!(cell, s),
                other => panic!("unexpected {other}"),
            }
        }
    }
    // theta = 0 makes phi_peak undefined.
    assert!(saw_missing);
    assert_eq!(doc["config"]["command"], "peaks");
    assert_eq!(doc["config"]["theta"], "0:pi:pi/2");
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# shared settings\nn = 6\ntheta = 1.0\nk1_cut = 1\n").unwrap();
    let out = run(&["success-prob", "--config", cfg.to_str().unwrap(), "--n", "8"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("# n=8\n"));
    assert!(text.contains("# theta=1.0\n"));
    let (cols, rows) = parse_csv(&text);
    assert_eq!(rows.len(), 1);
    assert_eq!(column(&cols, &rows, "N"), [8.0]);
    assert_eq!(column(&cols, &rows, "k1_cut"), [1.0]);

    fs::write(&cfg, "colour = blue\n").unwrap();
    assert_eq!(run(&["bounds", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn distributions_are_normalized() {
    for gamma in ["0", "0.7"] {
        let out = run(&["distributions", "--n", "5", "--theta", "2.0", "--phi", "-1.1", "--gamma", gamma]);
        assert!(out.status.success());
        let (cols, rows) = parse_csv(&stdout(&out));
        assert_eq!(rows.len(), 216);
        let p = column(&cols, &rows, "prob");
        assert!(p.iter().all(|&x| x >= 0.0));
        let total: f64 = p.iter().sum();
        assert!((total - 1.0).abs() < 1e-6, "gamma={gamma}: {total}");
    }
    let slice = run(&["distributions", "--n", "5", "--k1", "5"]);
    let (cols, rows) = parse_csv(&stdout(&slice));
    assert_eq!(&cols[5..], ["k2", "k3", "prob"]);
    assert_eq!(rows.len(), 36);
    assert_eq!(run(&["distributions", "--n", "5", "--k1", "6"]).status.code(), Some(2));
}

#[test]
fn success_prob_is_one_when_unconditional() {
    let out = run(&["success-prob", "--n", "10", "--theta", "0.4", "--phi", "-pi/3"]);
    let (cols, rows) = parse_csv(&stdout(&out));
    let p = column(&cols, &rows, "success_prob");
    assert_eq!(p.len(), 6);
    assert!(p.windows(2).all(|w| w[1] >= w[0]));
    assert!((p[5] - 1.0).abs() < 1e-12);
}
