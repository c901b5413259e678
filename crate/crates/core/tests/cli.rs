use std::process::Command;

use qscatter::cli::{main_with_args, EXIT_CONVERGENCE, EXIT_DOMAIN, EXIT_USAGE};

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("qscatter").chain(args.iter().copied());
    let code = main_with_args(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn direct_qfi_at_center() {
    let (code, out, _) = run(&["qfi", "--strategy", "direct", "--r", "0", "--theta", "1.0", "--basis", "polar"]);
    assert_eq!(code, 0);
    let rows = rows(&out);
    assert_eq!(rows.len(), 10);
    for row in &rows[..9] {
        let (i, j) = (row[0].as_str(), row[1].as_str());
        let want = if (i, j) == ("0", "0") { 1.0 } else { 0.0 };
        assert!((num(&row[2]) - want).abs() < 1e-12);
        assert!((num(&row[3]) - want).abs() < 1e-12);
    }
    assert_eq!(rows[9][0], "max_abs_diff");
}

#[test]
fn header_records_flags_and_columns() {
    let (code, out, _) = run(&["qfi", "--strategy", "ea", "--mode", "r", "--vz", "0.3", "--omega", "0.9"]);
    assert_eq!(code, 0);
    let mut lines = out.lines();
    let first = lines.next().unwrap();
    assert!(first.starts_with("# qscatter qfi"));
    for flag in ["--strategy ea", "--mode reflection", "--omega 0.9", "--vz 0.3", "--basis cartesian"] {
        assert!(first.contains(flag), "{first}");
    }
    assert_eq!(lines.next().unwrap(), "# row,col,numeric,closed_form,abs_diff");
    let last = rows(&out).pop().unwrap();
    assert!(num(&last[1]) < 1e-10);
}

#[test]
fn figure_three_optimum() {
    let (code, out, _) = run(&["figure", "3"]);
    assert_eq!(code, 0);
    let rows = rows(&out);
    let best = rows
        .iter()
        .min_by(|a, b| num(&a[2]).total_cmp(&num(&b[2])))
        .unwrap();
    assert!((num(&best[0]) - 0.616).abs() <= 0.005, "{best:?}");
    assert!((num(&best[2]) - 1.52).abs() <= 0.01);
}

#[test]
fn omega_scan_single_interior_maximum() {
    let (code, out, _) = run(&["scan", "--strategy", "ea", "--mode", "both", "--r", "0.3", "--param", "omega"]);
    assert_eq!(code, 0);
    let h: Vec<f64> = rows(&out).iter().map(|r| num(&r[1])).collect();
    assert_eq!(h.len(), 200);
    let peak = h
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .unwrap()
        .0;
    assert!(peak > 0 && peak < h.len() - 1);
    assert!(h[..=peak].windows(2).all(|w| w[1] > w[0]));
    assert!(h[peak..].windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn optimize_reports_and_reevaluates() {
    let (code, out, _) = run(&["optimize", "--strategy", "nea", "--mode", "t", "--vz", "0.5"]);
    assert_eq!(code, 0);
    let rows = rows(&out);
    let get = |k: &str| num(&rows.iter().find(|r| r[0] == k).unwrap()[1]);
    let h = qscatter::closedform::nea_qfi(0.5, get("theta_a"), get("omega"), qscatter::DetectionMode::Transmission)
        .unwrap();
    assert!((h - get("value")).abs() < 1e-10 * h);
    assert_eq!(rows.iter().find(|r| r[0] == "converged").unwrap()[1], "true");
}

#[test]
fn bounds_for_parameters_and_functions() {
    let (code, out, _) = run(&["bound", "--strategy", "direct", "--r", "0.5", "--theta", "1", "--param", "r", "--m", "10"]);
    assert_eq!(code, 0);
    let r = rows(&out);
    assert!((num(&r[0][1]) - 0.075).abs() < 1e-12);

    let (code, out, _) = run(&["bound", "--strategy", "ea", "--omega", "0.7", "--r", "0.4", "--theta", "0.8", "--param", "all"]);
    assert_eq!(code, 0);
    assert_eq!(rows(&out).len(), 9);

    let (code, out, _) = run(&["bound", "--strategy", "nea", "--omega", "0.7", "--theta-a", "0.3", "--vz", "0.4", "--param", "z"]);
    assert_eq!(code, 0);
    let r = rows(&out);
    assert!((num(&r[0][1]) - num(&r[0][2])).abs() < 1e-9 * num(&r[0][2]));
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["frobnicate"]).0, EXIT_USAGE);
    assert_eq!(run(&["figure", "9"]).0, EXIT_USAGE);
    assert_eq!(run(&["qfi", "--strategy", "ea", "--vz", "0.3"]).0, EXIT_USAGE);
    assert_eq!(run(&["qfi", "--strategy", "nea", "--vz", "0.3", "--omega", "1"]).0, EXIT_USAGE);
    assert_eq!(run(&["optimize", "--omega-min", "2", "--omega-max", "1"]).0, EXIT_USAGE);

    let (code, _, err) = run(&["qfi", "--strategy", "ea", "--vz", "1.2", "--omega", "1"]);
    assert_eq!(code, EXIT_DOMAIN);
    assert_eq!(err.lines().count(), 1);
    assert_eq!(run(&["qfi", "--strategy", "ea", "--vz", "0.2", "--omega", "-1"]).0, EXIT_DOMAIN);
    assert_eq!(
        run(&["qfi", "--strategy", "nea", "--vx", "0.2", "--vz", "0.2", "--omega", "1", "--theta-a", "0"]).0,
        EXIT_DOMAIN
    );
    assert_eq!(run(&["optimize", "--strategy", "nea", "--vz", "1"]).0, EXIT_DOMAIN);
    assert_ne!(EXIT_CONVERGENCE, EXIT_DOMAIN);
}

#[test]
fn binary_is_deterministic_and_writes_files() {
    let bin = env!("CARGO_BIN_EXE_qscatter");
    let once = || Command::new(bin).args(["figure", "7", "--points", "21"]).output().unwrap();
    let (a, b) = (once(), once());
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);

    let dir = std::env::temp_dir().join(format!("qscatter-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("fig7.csv");
    let status = Command::new(bin)
        .args(["figure", "7", "--points", "21", "--output"])
        .arg(&path)
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(std::fs::read(&path).unwrap(), a.stdout);
    std::fs::remove_dir_all(&dir).unwrap();

    let bad = Command::new(bin).args(["qfi", "--strategy", "ea", "--vz", "2", "--omega", "1"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(EXIT_DOMAIN));
}
