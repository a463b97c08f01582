//! End-to-end checks of every subcommand through the real binary.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ellsq"))
}

fn run_ok(args: &[&str]) -> Output {
    let out = bin().args(args).output().expect("spawn");
    assert!(
        out.status.success(),
        "ellsq {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn stdout_of(args: &[&str]) -> String {
    String::from_utf8(run_ok(args).stdout).unwrap()
}

#[test]
fn moments_values_at_rho_one_are_even_catalan() {
    let out = stdout_of(&["moments", "--k", "4", "--rho", "1"]);
    assert_eq!(out, "k,value\n0,1\n1,2\n2,14\n3,132\n4,1430\n");
}

#[test]
fn moments_k_zero_single_row() {
    let out = stdout_of(&["moments", "--k", "0"]);
    assert_eq!(out, "k,coeff_0\n0,1\n");
}

#[test]
fn moments_coefficients_are_padded_csv() {
    let out = stdout_of(&["moments", "--k", "2"]);
    assert_eq!(
        out,
        "k,coeff_0,coeff_1,coeff_2,coeff_3,coeff_4\n\
         0,1,0,0,0,0\n\
         1,1,0,1,0,0\n\
         2,3,0,8,0,3\n"
    );
}

#[test]
fn moments_json_uses_decimal_strings() {
    let out = stdout_of(&["moments", "--k", "1", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v[1]["coeffs"], serde_json::json!(["1", "0", "1"]));
}

#[test]
fn cumulants_are_type_b_narayana_in_rho() {
    let out = stdout_of(&["cumulants", "--n", "3"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v[0]["order"], 2);
    assert_eq!(v[0]["coeffs"], serde_json::json!(["1", "0", "1"]));
    assert_eq!(v[1]["coeffs"], serde_json::json!(["1", "0", "4", "0", "1"]));
    assert_eq!(
        v[2]["coeffs"],
        serde_json::json!(["1", "0", "9", "0", "9", "0", "1"])
    );
    // values at rho = 1 are central binomials
    let out = stdout_of(&["cumulants", "--n", "2", "--rho", "1"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v[0]["value"], 2.0);
    assert_eq!(v[1]["value"], 6.0);
}

#[test]
fn identities_exit_zero() {
    let out = run_ok(&["identities", "--n", "12"]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("hold exactly"));
}

#[test]
fn diagrams_match_printed_moment() {
    let out = stdout_of(&["diagrams", "--half-size", "4", "--coloring", "u"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["count"], 14);
    assert_eq!(
        v["partition_function"]["coeffs"],
        serde_json::json!(["3", "0", "8", "0", "3"])
    );
}

#[test]
fn atomic_diagrams_match_type_b() {
    let out = stdout_of(&["diagrams", "--half-size", "4", "--coloring", "u", "--atomic"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["count"], 6);
    assert_eq!(
        v["partition_function"]["coeffs"],
        serde_json::json!(["1", "0", "4", "0", "1"])
    );
    // atomic is only defined on 4n vertices with the u coloring
    assert!(!bin()
        .args(["diagrams", "--half-size", "3", "--coloring", "u", "--atomic"])
        .output()
        .unwrap()
        .status
        .success());
}

#[test]
fn ncpart_counts_and_stats() {
    let out = stdout_of(&["ncpart", "--type", "a", "--n", "4", "--stats"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["count"], 14);
    assert_eq!(
        v["block_count_histogram"]["coeffs"],
        serde_json::json!(["0", "1", "6", "6", "1"])
    );
    let out = stdout_of(&["ncpart", "--type", "b", "--n", "2", "--stats"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["count"], 6);
    assert_eq!(v["with_zero_block"], 3);
    assert_eq!(
        v["half_nonzero_block_histogram"]["coeffs"],
        serde_json::json!(["1", "4", "1"])
    );
    assert_eq!(
        v["zero_block_histogram"]["coeffs"],
        serde_json::json!(["1", "2"])
    );
}

#[test]
fn density_csv_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let svg_path = dir.path().join("curve.svg");
    let out = stdout_of(&[
        "density",
        "--rho",
        "0.5",
        "--dist",
        "f",
        "--xmin",
        "0.1",
        "--xmax",
        "8",
        "--points",
        "40",
        "--svg",
        svg_path.to_str().unwrap(),
    ]);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("x,density"));
    let rows: Vec<(f64, f64)> = lines
        .map(|l| {
            let (x, d) = l.split_once(',').unwrap();
            (x.parse().unwrap(), d.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 40);
    assert!(rows.iter().all(|(_, d)| d.is_finite() && *d >= -1e-9));
    // density should be visibly positive in the bulk
    assert!(rows.iter().any(|(_, d)| *d > 0.05));
    let svg = std::fs::read_to_string(&svg_path).unwrap();
    assert!(svg.starts_with("<svg"));
    assert!(svg.contains("<path"));
}

#[test]
fn simulate_writes_csvs_and_is_thread_count_invariant() {
    let dir1 = tempfile::tempdir().unwrap();
    let dir2 = tempfile::tempdir().unwrap();
    let dir3 = tempfile::tempdir().unwrap();
    let mut runs = Vec::new();
    for (dir, threads) in [(&dir1, "1"), (&dir2, "2"), (&dir3, "0")] {
        let out = bin()
            .args([
                "simulate",
                "--size",
                "48",
                "--rho",
                "0.5",
                "--trials",
                "4",
                "--seed",
                "2024",
                "--kmax",
                "2",
                "--bins",
                "16",
                "--out",
                dir.path().to_str().unwrap(),
            ])
            .env("ELLIPTIC_THREADS", threads)
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        runs.push(read_outputs(dir.path()));
    }
    assert_eq!(runs[0], runs[1], "1 vs 2 threads");
    assert_eq!(runs[0], runs[2], "1 vs auto threads");
    let (eig, mom, hist) = &runs[0];
    assert!(eig.starts_with("trial,index,lambda\n"));
    assert_eq!(eig.lines().count(), 1 + 4 * 48);
    assert!(mom.starts_with("k,empirical,stderr,theory\n"));
    assert_eq!(mom.lines().count(), 4);
    assert!(hist.starts_with("bin_lo,bin_hi,density,theory_density\n"));
    assert_eq!(hist.lines().count(), 17);
    // theory column of moments.csv carries M_k(1/2)
    let m1_row: Vec<&str> = mom.lines().nth(2).unwrap().split(',').collect();
    assert_eq!(m1_row[0], "1");
    assert_eq!(m1_row[3], "1.25");
}

fn read_outputs(dir: &Path) -> (String, String, String) {
    (
        std::fs::read_to_string(dir.join("eigenvalues.csv")).unwrap(),
        std::fs::read_to_string(dir.join("moments.csv")).unwrap(),
        std::fs::read_to_string(dir.join("histogram.csv")).unwrap(),
    )
}

#[test]
fn verify_subset_reports_and_exits_zero() {
    let out = bin()
        .args(["verify", "--only", "1,2,6"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("moment-table"));
    assert!(text.contains("endpoint-sequences"));
    assert!(text.contains("identity-suite"));
    assert!(text.contains("3 checks, 0 failed"));
    assert_eq!(text.matches("PASS").count(), 3);
}

#[test]
fn bad_flags_use_distinct_exit_code() {
    let out = bin().args(["moments"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin().args(["nonsense"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    // numerical/domain failures exit 1 with a diagnostic
    let out = bin()
        .args(["diagrams", "--half-size", "40", "--coloring", "u"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("half-size"));
}
