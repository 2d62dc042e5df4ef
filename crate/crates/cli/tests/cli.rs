//! End-to-end tests of the `apl` binary: exit codes, report round-trips,
//! and golden-store behavior.

use std::path::{Path, PathBuf};
use std::process::Command;

fn apl() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_apl"));
    // run from the workspace root so the default golden path resolves
    c.current_dir(Path::new(env!("CARGO_MANIFEST_DIR")).join("../.."));
    c
}

fn tmp_path(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("apl_test_{}_{name}", std::process::id()))
}

#[test]
fn omega_prints_value_and_exits_zero() {
    let out = apl().args(["omega", "--u", "1.5"]).output().unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.starts_with("0.666666666667"), "got {stdout}");
    // domain error exits 1
    let out = apl().args(["omega", "--u", "0.5"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unknown_subcommand_is_usage_error() {
    let out = apl().arg("frobnicate").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = apl().args(["sieve", "--no-such-flag"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn thm3_constant_passes_against_repo_golden() {
    let out = apl().arg("thm3-constant").output().unwrap();
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(out.status.success(), "{stdout}");
    assert!(stdout.starts_with("0.163020"), "got {stdout}");
    assert!(stdout.contains("PASS"));
}

#[test]
fn golden_record_then_check_then_drift() {
    let golden = tmp_path("golden.txt");
    let _ = std::fs::remove_file(&golden);
    let g = golden.to_str().unwrap();
    // missing key without --record fails with instruction
    let out = apl().args(["verify", "fsum", "--qmax", "8", "--golden", g]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stdout).unwrap().contains("MISSING"));
    // --record seeds it
    let out = apl()
        .args(["verify", "fsum", "--qmax", "8", "--golden", g, "--record"])
        .output()
        .unwrap();
    assert!(out.status.success());
    // re-run passes
    let out = apl().args(["verify", "fsum", "--qmax", "8", "--golden", g]).output().unwrap();
    assert!(out.status.success());
    // tamper the stored value: drift detected, never silently overwritten
    let text = std::fs::read_to_string(&golden).unwrap();
    let tampered = text.replacen('\t', "\t9", 1);
    std::fs::write(&golden, tampered).unwrap();
    let out = apl().args(["verify", "fsum", "--qmax", "8", "--golden", g]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stdout).unwrap().contains("FAIL"));
    std::fs::remove_file(&golden).unwrap();
}

#[test]
fn discrepancy_csv_roundtrip_exact() {
    let csv_path = tmp_path("disc.csv");
    let golden = tmp_path("disc_golden.txt");
    let out = apl()
        .args([
            "discrepancy",
            "--x",
            "10000",
            "--q1",
            "2:4",
            "--q2",
            "3:6",
            "--weight",
            "lambda",
            "--out",
            csv_path.to_str().unwrap(),
            "--golden",
            golden.to_str().unwrap(),
            "--record",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("\"total\""));
    assert!(stdout.contains("\"trivial_bound\""));
    assert!(stdout.contains("\"ratio\""));

    // re-parse reproduces the in-memory report exactly
    let table = apl_core::sieve::PrimeTable::build(10_000).unwrap();
    let cfg = apl_core::equidist::ExperimentConfig::new(
        10_000,
        (2, 4),
        (3, 6),
        None,
        apl_core::equidist::ExpWeight::Lambda,
    )
    .unwrap();
    let rep = apl_core::equidist::discrepancy_sum(&cfg, &table).unwrap();
    let parsed =
        apl_cli::fmt::discrepancy_from_csv(&std::fs::read_to_string(&csv_path).unwrap()).unwrap();
    assert_eq!(parsed.records.len(), rep.records.len());
    for (a, b) in parsed.records.iter().zip(&rep.records) {
        assert_eq!(a.q_parts, b.q_parts);
        assert_eq!(a.q, b.q);
        assert_eq!(a.sup_disc.to_bits(), b.sup_disc.to_bits());
        assert_eq!(a.argmax_a, b.argmax_a);
        assert_eq!(a.main_mass.to_bits(), b.main_mass.to_bits());
    }
    assert_eq!(parsed.total.to_bits(), rep.total.to_bits());
    std::fs::remove_file(&csv_path).unwrap();
    let _ = std::fs::remove_file(&golden);
}

#[test]
fn harman_csv_identities_all_ok() {
    let csv_path = tmp_path("harman.csv");
    let out = apl()
        .args(["harman", "--x", "2000", "--delta", "0.004", "--out", csv_path.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = std::fs::read_to_string(&csv_path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("n,s1,s2,s3"));
    assert!(header.ends_with("identity_ok"));
    let mut rows = 0;
    for line in lines {
        assert!(line.ends_with(",1"), "identity not ok: {line}");
        rows += 1;
    }
    assert_eq!(rows, 2000);
    std::fs::remove_file(&csv_path).unwrap();
}

#[test]
fn sieve_stats_smoke() {
    let out = apl().args(["sieve", "--limit", "100000", "--stats"]).output().unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("pi(100000) = 9592"));
    assert!(stdout.contains("mertens"));
    assert!(stdout.contains("chebyshev_psi"));
}
