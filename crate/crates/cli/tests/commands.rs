use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ghzwit_cli::{named_state, NamedState, StateFile};
use tempfile::TempDir;

fn ghzwit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ghzwit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn field(text: &str, key: &str) -> String {
    let prefix = format!("{key}: ");
    text.lines()
        .find_map(|l| l.strip_prefix(&prefix))
        .unwrap_or_else(|| panic!("no {key} in\n{text}"))
        .to_string()
}

fn num(text: &str, key: &str) -> f64 {
    field(text, key).parse().unwrap()
}

fn export(dir: &TempDir, state: NamedState, p: f64) -> PathBuf {
    let path = dir.path().join("state.json");
    let rho = named_state(state, p, 3, None, 0).unwrap();
    std::fs::write(&path, StateFile::from_state(&rho, None).to_json()).unwrap();
    path
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn eval_ghz_full_and_fast() {
    let dir = TempDir::new().unwrap();
    let path = export(&dir, NamedState::Ghz, 1.0);
    let o = ghzwit(&["eval", p(&path), "--mode", "full"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!((num(&text, "value") - 1.0).abs() < 1e-12);
    assert!(field(&text, "coords_opt").starts_with("(0.5, 0.43301"));

    let o = ghzwit(&["eval", p(&path), "--mode", "fast"]);
    assert!(o.status.success());
    assert!((num(&stdout(&o), "value") - 1.0).abs() < 1e-12);
}

#[test]
fn eval_w_state_reports_zero_normal_form() {
    let dir = TempDir::new().unwrap();
    let path = export(&dir, NamedState::W, 1.0);
    let o = ghzwit(&["eval", p(&path), "--json"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 1);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["value"], 0.0);
    assert_eq!(v["normal_form_status"], "zero");
}

#[test]
fn eval_witness_mode_prints_signed_value() {
    let dir = TempDir::new().unwrap();
    let path = export(&dir, NamedState::Rho3, 0.5);
    let o = ghzwit(&["eval", p(&path), "--mode", "witness"]);
    assert!(o.status.success());
    assert!((num(&stdout(&o), "value") + 1.0).abs() < 1e-12);
}

#[test]
fn eval_error_codes() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("missing.json");
    let o = ghzwit(&["eval", p(&missing)]);
    assert_eq!(o.status.code(), Some(3));

    let garbage = dir.path().join("garbage.json");
    std::fs::write(&garbage, "{ not json").unwrap();
    assert_eq!(ghzwit(&["eval", p(&garbage)]).status.code(), Some(3));

    let bad = dir.path().join("bad.json");
    let mut file = StateFile::from_state(
        &named_state(NamedState::PhiPlus, 1.0, 2, None, 0).unwrap(),
        None,
    );
    file.matrix[0][0] = [2.0, 0.0];
    std::fs::write(&bad, file.to_json()).unwrap();
    let o = ghzwit(&["eval", p(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("trace"), "{err}");

    file.matrix[0][1] = [0.0, 0.3];
    std::fs::write(&bad, file.to_json()).unwrap();
    let o = ghzwit(&["eval", p(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8(o.stderr).unwrap().contains("Hermitian"));
}

#[test]
fn demo_families() {
    let o = ghzwit(&["demo", "rho3", "--p", "0.5"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let v = num(&text, "value");
    assert!((0.495..=0.505).contains(&v), "{v}");
    assert_eq!(num(&text, "reference"), 0.5);

    let o = ghzwit(&["demo", "rho2", "--p", "0.9"]);
    assert!((num(&stdout(&o), "value") - 0.6).abs() < 1e-6);

    let o = ghzwit(&["demo", "rho1", "--p", "0.72"]);
    let text = stdout(&o);
    assert_eq!(num(&text, "value"), 0.0);
    assert!(text.contains("(0.19, 0.31)"));
    assert!(text.contains("known underestimate"));

    assert_eq!(
        ghzwit(&["demo", "rho3", "--p", "1.5"]).status.code(),
        Some(2)
    );
}

fn read_scan(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header: Vec<String> = r.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, ["p", "fast", "raw", "full", "linear", "oracle"]);
    r.records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect()
}

#[test]
fn scan_rho3_tracks_p() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("rho3.csv");
    let o = ghzwit(&[
        "scan",
        "rho3",
        "--pmin",
        "0",
        "--pmax",
        "1",
        "--steps",
        "11",
        "--out",
        p(&out),
    ]);
    assert!(o.status.success());
    let rows = read_scan(&out);
    assert_eq!(rows.len(), 11);
    for row in rows {
        let p: f64 = row[0].parse().unwrap();
        let full: f64 = row[3].parse().unwrap();
        if p >= 1e-5 {
            assert!((full - p).abs() <= 1e-2 * p, "p={p} full={full}");
        }
    }
}

#[test]
fn scan_rho2_and_rho1() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("rho2.csv");
    assert!(ghzwit(&["scan", "rho2", "--steps", "5", "--out", p(&out)])
        .status
        .success());
    for row in read_scan(&out) {
        let p: f64 = row[0].parse().unwrap();
        let full: f64 = row[3].parse().unwrap();
        assert!((full - (4.0 * p - 3.0).max(0.0)).abs() < 1e-6, "p={p}");
    }

    let out = dir.path().join("rho1.csv");
    let args = [
        "scan",
        "rho1",
        "--pmin",
        "0.70",
        "--pmax",
        "0.74",
        "--steps",
        "5",
        "--out",
        p(&out),
    ];
    assert!(ghzwit(&args).status.success());
    for row in read_scan(&out) {
        assert_eq!(row[3].parse::<f64>().unwrap(), 0.0);
        assert_eq!(row[5], "");
    }
}

#[test]
fn scan_is_deterministic() {
    let a = ghzwit(&["scan", "rho1", "--steps", "4", "--seed", "7"]);
    let b = ghzwit(&["scan", "rho1", "--steps", "4", "--seed", "7"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn scan_errors() {
    assert_eq!(
        ghzwit(&["scan", "rho3", "--steps", "1"]).status.code(),
        Some(2)
    );
    assert_eq!(
        ghzwit(&["scan", "rho3", "--pmin", "0.8", "--pmax", "0.2"])
            .status
            .code(),
        Some(2)
    );
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("no/such/dir/out.csv");
    assert_eq!(
        ghzwit(&["scan", "rho3", "--steps", "2", "--out", p(&out)])
            .status
            .code(),
        Some(3)
    );
}

#[test]
fn oracle_matches_wootters() {
    let dir = TempDir::new().unwrap();
    let cases = [
        (NamedState::PsiMinus, 1.0, 1.0),
        (NamedState::Mixed2, 1.0, 0.0),
        (NamedState::Werner, 0.5, 0.25),
    ];
    for (state, p_, expected) in cases {
        let path = dir.path().join("two.json");
        let rho = named_state(state, p_, 2, None, 0).unwrap();
        std::fs::write(&path, StateFile::from_state(&rho, None).to_json()).unwrap();
        let o = ghzwit(&["oracle", p(&path)]);
        assert!(o.status.success());
        let text = stdout(&o);
        assert!((num(&text, "wootters") - expected).abs() < 1e-6);
        assert!((num(&text, "pipeline") - expected).abs() < 1e-6);
        assert!(num(&text, "diff") < 1e-6);
    }

    let three = export(&dir, NamedState::Ghz, 1.0);
    assert_eq!(ghzwit(&["oracle", p(&three)]).status.code(), Some(2));
}

#[test]
fn export_round_trips_bit_identically() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("r.json");
    let o = ghzwit(&[
        "export",
        "random",
        "--nqubits",
        "3",
        "--rank",
        "4",
        "--seed",
        "9",
        "--out",
        p(&path),
    ]);
    assert!(o.status.success());
    let file = StateFile::parse(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let expected = named_state(NamedState::Random, 1.0, 3, Some(4), 9).unwrap();
    let got = file.to_state().unwrap();
    for (a, b) in got
        .matrix()
        .entries()
        .iter()
        .zip(expected.matrix().entries())
    {
        assert_eq!(a.re.to_bits(), b.re.to_bits());
        assert_eq!(a.im.to_bits(), b.im.to_bits());
    }
}
