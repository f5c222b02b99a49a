use std::collections::HashMap;
use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use photon_echo_cli::{RunRecord, ScanOutcome};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_photon-echo")).args(args).output().expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = bin(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn run_json(args: &[&str]) -> RunRecord {
    let mut argv = vec!["run", "--format", "json"];
    argv.extend_from_slice(args);
    serde_json::from_str(&stdout(&argv)).unwrap()
}

fn sweep_json(args: &[&str]) -> Vec<RunRecord> {
    let mut argv = vec!["sweep", "--format", "json"];
    argv.extend_from_slice(args);
    serde_json::from_str(&stdout(&argv)).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    dir.join(format!("{}-{name}", std::process::id()))
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs()
}

#[test]
fn two_level_single_photon_report() {
    let r = run_json(&["--protocol", "two-level-3pe", "--single-photon"]);
    assert!(close(r.report.snr, 0.5, 1e-9));
    assert!(close(r.report.fidelity, 0.6, 1e-9));
    assert!(close(r.report.efficiency_bound, 0.25, 1e-9));
    assert_eq!(r.classical_fidelity_limit, 2.0 / 3.0);
    assert_eq!(r.protocol, "two-level-3pe");
}

#[test]
fn three_level_single_photon_report() {
    let r = run_json(&["--protocol", "three-level-3pe", "--single-photon"]);
    assert!(close(r.report.snr, 0.375, 1e-9));
    assert!(close(r.report.fidelity, 11.0 / 19.0, 1e-9));
    assert!(close(r.report.efficiency_bound, 0.140625, 1e-9));
    assert_eq!(r.theta2, Some(std::f64::consts::PI));
}

#[test]
fn ham_variant_report_matches_three_level() {
    let a = run_json(&["--protocol", "three-level-3pe", "--single-photon"]);
    let mut b = run_json(&["--protocol", "ham-variant", "--single-photon"]);
    b.protocol = a.protocol.clone();
    assert_eq!(a, b);
}

#[test]
fn table_values_match_json_exactly() {
    let args = ["--protocol", "two-level-3pe", "--epsilon", "3e-4", "--separation", "1.5", "--theta2", "1.1"];
    let mut table_args = vec!["run", "--format", "table"];
    table_args.extend_from_slice(&args);
    let table = stdout(&table_args);
    let cells: HashMap<&str, &str> = table
        .lines()
        .map(|l| {
            let mut it = l.split_whitespace();
            (it.next().unwrap(), it.next().unwrap())
        })
        .collect();
    let r = run_json(&args);
    let value = |k: &str| cells[k].parse::<f64>().unwrap().to_bits();
    let expect = [
        ("n_atoms", r.n_atoms),
        ("epsilon", r.epsilon),
        ("separation", r.separation.unwrap()),
        ("theta2", r.theta2.unwrap()),
        ("polarization_initial_re", r.report.polarization_initial.re),
        ("polarization_initial_im", r.report.polarization_initial.im),
        ("polarization_echo_re", r.report.polarization_echo.re),
        ("polarization_echo_im", r.report.polarization_echo.im),
        ("i_echo", r.report.i_echo),
        ("i_input", r.report.i_input),
        ("i_noise", r.report.i_noise),
        ("snr", r.report.snr),
        ("efficiency_bound", r.report.efficiency_bound),
        ("fidelity", r.report.fidelity),
        ("classical_fidelity_limit", r.classical_fidelity_limit),
    ];
    for (k, v) in expect {
        assert_eq!(value(k), v.to_bits(), "{k}");
    }
}

#[test]
fn csv_output_has_header_and_one_row() {
    let text = stdout(&["run", "--format", "csv", "--protocol", "three-level-3pe"]);
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header = rdr.headers().unwrap().clone();
    assert_eq!(&header[0], "protocol");
    assert!(header.iter().any(|h| h == "fidelity"));
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 1);
    assert_eq!(&rows[0][0], "three-level-3pe");
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        &["run", "--protocol", "bogus"][..],
        &["run", "--separation", "0"],
        &["run", "--separation", "-1"],
        &["run", "--epsilon", "1e-3", "--single-photon"],
        &["run", "--protocol", "ham-variant", "--theta2", "1"],
        &["sweep", "--param", "bogus", "--values", "1"],
        &["sweep", "--param", "theta2_r", "--values", "1"],
        &["scan-phase-matching", "--protocol", "three-level-3pe", "--m", "10"],
    ] {
        assert_eq!(bin(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn bad_directions_file_is_a_usage_error() {
    let path = scratch("bad-directions.csv");
    fs::write(&path, "1,0,0\nnot a direction\n").unwrap();
    let out = bin(&["scan-phase-matching", "--m", "10", "--directions", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains(":2:"));
    let missing = scratch("missing.csv");
    let out = bin(&["scan-phase-matching", "--m", "10", "--directions", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn numerical_failure_exits_with_three() {
    // the echo bandwidth needs more quadrature nodes than allowed
    assert_eq!(bin(&["run", "--storage", "1e6"]).status.code(), Some(3));
}

#[test]
fn theta2_sweep_peaks_at_half_pi() {
    let rows = sweep_json(&["--param", "theta2", "--range", "0", "6.283185307179586", "33", "--storage", "5"]);
    assert_eq!(rows.len(), 33);
    let best = rows.iter().max_by(|a, b| a.report.i_echo.total_cmp(&b.report.i_echo)).unwrap();
    assert!((best.theta2.unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
}

#[test]
fn epsilon_sweep_snr_is_quadratic() {
    let rows = sweep_json(&["--param", "epsilon", "--values", "1e-4,2e-4,5e-4,1e-3"]);
    for r in &rows {
        assert!(close(r.report.snr / (r.epsilon * r.epsilon), rows[0].report.snr / 1e-8, 1e-8));
    }
    // output order follows input order
    let eps: Vec<f64> = rows.iter().map(|r| r.epsilon).collect();
    assert_eq!(eps, [1e-4, 2e-4, 5e-4, 1e-3]);
}

#[test]
fn separation_sweep_decreases_to_asymptote() {
    let rows = sweep_json(&["--param", "separation", "--range", "0.1", "20", "25"]);
    let asym = (1e6f64 * 1e-3).powi(2) / 4.0;
    for pair in rows.windows(2) {
        assert!(pair[1].report.i_echo <= pair[0].report.i_echo * (1.0 + 1e-12));
    }
    for r in &rows {
        let t = r.separation.unwrap();
        assert!(close(r.report.i_echo, asym * (1.0 + (-2.0 * t * t).exp()).powi(2), 1e-9));
    }
}

#[test]
fn scan_puts_matched_direction_first() {
    let path = scratch("scan.csv");
    let out = bin(&["scan-phase-matching", "--m", "10000", "--format", "csv", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let mut rdr = csv::Reader::from_path(&path).unwrap();
    assert_eq!(rdr.headers().unwrap(), vec!["direction_x", "direction_y", "direction_z", "intensity"]);
    let rows: Vec<[f64; 4]> = rdr.deserialize().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 101);
    let tilt: f64 = 0.3;
    assert!((rows[0][0] - tilt.sin()).abs() < 1e-15 && rows[0][1] == 0.0 && (rows[0][2] - tilt.cos()).abs() < 1e-15);
    let mut rest: Vec<f64> = rows[1..].iter().map(|r| r[3]).collect();
    rest.sort_by(f64::total_cmp);
    let median = (rest[49] + rest[50]) / 2.0;
    assert!(rows[0][3] / median >= 1e4 / 10.0);
}

#[test]
fn scan_of_one_atom_is_flat() {
    let scan: ScanOutcome =
        serde_json::from_str(&stdout(&["scan-phase-matching", "--m", "1", "--format", "json"])).unwrap();
    let i0 = scan.rows[0].intensity;
    assert!(scan.rows.iter().all(|r| (r.intensity - i0).abs() <= 1e-12 * i0));
}

#[test]
fn scan_single_photon_snr() {
    let text = stdout(&["scan-phase-matching", "--m", "10000", "--single-photon", "--format", "json", "--seed", "3"]);
    let scan: ScanOutcome = serde_json::from_str(&text).unwrap();
    assert!((scan.matched_snr - 0.5).abs() <= 0.025, "{}", scan.matched_snr);
    assert_eq!(scan.epsilon, 0.01);
}

#[test]
fn scan_reads_directions_file() {
    let path = scratch("dirs.txt");
    fs::write(&path, "# observation directions\n0 0 2\n1,0,0\n\n0 1 0\n").unwrap();
    let scan: ScanOutcome = serde_json::from_str(&stdout(&[
        "scan-phase-matching",
        "--m",
        "200",
        "--format",
        "json",
        "--directions",
        path.to_str().unwrap(),
    ]))
    .unwrap();
    assert_eq!(scan.rows.len(), 4);
    assert_eq!(scan.rows[1].direction(), photon_echo::Vector3::z());
}

#[test]
fn scan_is_deterministic_in_seed() {
    let a = stdout(&["scan-phase-matching", "--m", "500", "--format", "csv", "--seed", "9"]);
    let b = stdout(&["scan-phase-matching", "--m", "500", "--format", "csv", "--seed", "9"]);
    let c = stdout(&["scan-phase-matching", "--m", "500", "--format", "csv", "--seed", "10"]);
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn protocol_file_input() {
    let protocol = photon_echo::two_level_3pe(photon_echo::Timing::default(), 2e-3, 1.0, 1.2).unwrap();
    let path = scratch("protocol.json");
    fs::write(&path, protocol.to_json()).unwrap();
    let r = run_json(&["--protocol-file", path.to_str().unwrap()]);
    assert_eq!(r.protocol, "custom");
    assert_eq!(r.epsilon, 1e-3);
    let named = run_json(&["--theta2", "1.0", "--theta3", "1.2"]);
    assert_eq!(r.report, named.report);
    fs::write(&path, "{\"dim\": 2}").unwrap();
    assert_eq!(bin(&["run", "--protocol-file", path.to_str().unwrap()]).status.code(), Some(2));
}
