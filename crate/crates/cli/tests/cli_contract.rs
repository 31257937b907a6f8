use std::path::Path;
use std::process::{Command, Output};

use nhspec_cli::runner::{run_spectrum, SpectrumRow};
use nhspec_cli::{Command as Sub, FileConfig, Flags, ModelKind, RunConfig};

fn nhspec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nhspec"))
        .args(args)
        .env_remove("NHSPEC_THREADS")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect()
}

fn header(text: &str) -> Vec<String> {
    text.lines().next().unwrap().split(',').map(String::from).collect()
}

#[test]
fn ring_sweep_has_one_row_per_level_and_phi() {
    let o = nhspec(&["spectrum", "--model", "ring", "--size", "20", "--alpha", "1", "--beta", "1", "--sweep-phi", "0:0.5:50"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(
        header(&text),
        ["phi", "J", "index", "k_re", "k_im", "re_E", "im_E", "abs_E", "oracle_re", "oracle_im", "oracle_abs"]
    );
    assert_eq!(csv_rows(&text).len(), 20 * 50);
}

#[test]
fn chain_levels_are_real_and_defect_levels_complex() {
    let o = nhspec(&["spectrum", "--model", "chain", "--size", "20", "--alpha", "1.1025", "--beta", "1"]);
    let rows = csv_rows(&stdout(&o));
    assert!(rows.iter().all(|r| r[9].parse::<f64>().unwrap().abs() < 1e-10));

    let o = nhspec(&["spectrum", "--model", "defect-ring", "--size", "20", "--J", "-1", "--alpha", "1.1025", "--beta", "1"]);
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 20);
    assert!(rows.iter().all(|r| r[9].parse::<f64>().unwrap().abs() > 1e-6));
}

#[test]
fn csv_and_json_reproduce_in_memory_rows() {
    let args = ["spectrum", "--model", "defect-ring", "--size", "9", "--alpha", "1.3", "--beta", "0.8", "--J", "0.7"];
    let flags = Flags {
        model: Some(ModelKind::DefectRing),
        size: Some(9),
        alpha: Some(1.3),
        beta: Some(0.8),
        j: Some(0.7),
        ..Flags::default()
    };
    let cfg = RunConfig::merge(Sub::Spectrum, flags, FileConfig::default(), None).unwrap();
    let expected = run_spectrum(&cfg).unwrap();

    let json = nhspec(&[&args[..], &["--format", "json"]].concat());
    let parsed: Vec<SpectrumRow> = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(parsed, expected);

    let rows = csv_rows(&stdout(&nhspec(&args)));
    for (row, want) in rows.iter().zip(&expected) {
        assert_eq!(row[8].parse::<f64>().unwrap(), want.oracle_re);
        assert_eq!(row[9].parse::<f64>().unwrap(), want.oracle_im);
        assert_eq!(row[3].parse::<f64>().unwrap(), want.k_re.unwrap());
    }
}

#[test]
fn config_errors_exit_two() {
    for args in [
        &["phase-diagram", "--sweep-J", "-1:1:5", "--sweep-phi", "0:1:0"][..],
        &["phase-diagram", "--sweep-J", "-1:1:5"],
        &["spectrum", "--model", "torus"],
        &["spectrum", "--size", "1"],
        &["spectrum", "--alpha", "-1"],
        &["eigenstates", "--model", "ring"],
        &["verify", "--only", "nothing"],
        &["ipr-scaling", "--N-list", "8,1"],
        &["ipr-scaling", "--N-list", "8,x"],
    ] {
        let o = nhspec(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn compute_failure_exits_three() {
    let o = nhspec(&["eigenstates", "--model", "chain", "--size", "1000", "--alpha", "1e6", "--beta", "1e-6"]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn thread_count_precedence() {
    let bin = env!("CARGO_BIN_EXE_nhspec");
    let env_only = Command::new(bin).args(["spectrum", "--size", "4"]).env("NHSPEC_THREADS", "0").output().unwrap();
    assert_eq!(env_only.status.code(), Some(2));
    let flag_wins = Command::new(bin)
        .args(["spectrum", "--size", "4", "--threads", "2"])
        .env("NHSPEC_THREADS", "0")
        .output()
        .unwrap();
    assert!(flag_wins.status.success());
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    std::fs::write(&path, "model = \"chain\"\nsize = 12\nalpha = 4.0\nformat = \"csv\"\n").unwrap();
    let p = path.to_str().unwrap();
    assert_eq!(csv_rows(&stdout(&nhspec(&["spectrum", "--config", p]))).len(), 12);
    assert_eq!(csv_rows(&stdout(&nhspec(&["spectrum", "--config", p, "--size", "7"]))).len(), 7);
}

#[test]
fn phase_diagram_writes_boundaries_for_multiples_of_four() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("pd.csv");
    let phi = format!("{0}:{0}:1", 1.05f64.ln());
    let o = nhspec(&[
        "phase-diagram", "--size", "20", "--sweep-J", "-5:5:401", "--sweep-phi", &phi, "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let cells = std::fs::read_to_string(&out).unwrap();
    assert_eq!(header(&cells), ["J", "phi", "n_complex", "degree", "entirely_real", "valid"]);
    assert_eq!(csv_rows(&cells).len(), 401);
    let bounds = std::fs::read_to_string(dir.path().join("pd.boundaries.csv")).unwrap();
    let rows = csv_rows(&bounds);
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r[3].parse::<f64>().unwrap() < 0.01));

    let out10 = dir.path().join("pd10.csv");
    let o = nhspec(&["phase-diagram", "--size", "10", "--sweep-J", "-3:3:7", "--sweep-phi", "0:0.1:2", "--out", out10.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(!Path::new(&dir.path().join("pd10.boundaries.csv")).exists());
}

#[test]
fn ipr_scaling_table() {
    let o = nhspec(&["ipr-scaling", "--sweep-phi", "0:0.9162907318741551:2", "--N-list", "10,40,200"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(
        header(&text),
        ["phi", "ratio", "N", "averaged_ipr", "averaged_biorth_ipr", "chi_c", "abs_ratio_minus_one", "chi_c_small_phi"]
    );
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 6);
    let first: f64 = rows[0][3].parse().unwrap();
    assert!((first - 1.5 / 11.0).abs() < 1e-12);
    let plateau: f64 = rows[5][3].parse().unwrap();
    let chi_c: f64 = rows[5][5].parse().unwrap();
    assert!((plateau / chi_c - 1.0).abs() < 0.02);
}

#[test]
fn eigenstates_json() {
    let o = nhspec(&["eigenstates", "--size", "5", "--alpha", "2", "--beta", "0.5", "--format", "json"]);
    assert!(o.status.success());
    let rows: Vec<serde_json::Value> = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(rows.len(), 25);
    assert!(rows[0].get("biorth_prob").is_some());
}

#[test]
fn verify_only_filter_and_json_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let o = nhspec(&["verify", "--only", "ipr", "--format", "json", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[..lines.len() - 1].iter().all(|l| l.starts_with("ipr/") && l.ends_with("PASS")));
    let report: nhspec_cli::verify::VerifyReport = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(report.passed());
    assert_eq!(report.results.len(), lines.len() - 1);
}
