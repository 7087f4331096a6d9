//! Acceptance gate: every criterion runs at its pinned tolerance and
//! prints one pass/fail line.

use spikelab_core::accept::{run_criterion, CriterionResult};

fn check(id: u32) {
    let threads = 4;
    let r: CriterionResult = run_criterion(id, threads);
    println!(
        "{} criterion {:2}: {}: {} ({:.2}s)",
        if r.pass { "PASS" } else { "FAIL" },
        r.id,
        r.name,
        r.details,
        r.seconds
    );
    assert!(r.pass, "criterion {} failed: {}", r.id, r.details);
}

#[test]
fn criterion_01_oracle_equivalence() {
    check(1);
}

#[test]
fn criterion_02_quasi_metric_laws() {
    check(2);
}

#[test]
fn criterion_03_dimension_battery() {
    check(3);
}

#[test]
fn criterion_04_excursion_identities() {
    check(4);
}

#[test]
fn criterion_05_offset_sigma_floor() {
    check(5);
}

#[test]
fn criterion_06_mass_distribution_and_slopes() {
    check(6);
}

#[test]
fn criterion_07_scan_contrast() {
    check(7);
}

#[test]
fn criterion_08_correspondence_consistency() {
    check(8);
}

#[test]
fn criterion_09_covering_budget() {
    check(9);
}

#[test]
fn criterion_10_convex_body_solutions() {
    check(10);
}

#[test]
fn criterion_11_determinism() {
    check(11);
}
