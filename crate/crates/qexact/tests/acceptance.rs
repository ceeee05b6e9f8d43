//! Acceptance gate: one test per criterion, each printing a pass/fail line
//! with the observed extremes.  The lines are written straight to the
//! process's stdout so they show up in plain `cargo test` output instead of
//! being swallowed by the harness's capture.  Every test asserts both the
//! check's verdict and its time budget.

use qexact::acceptance::{run_criterion, CriterionReport};
use std::io::Write;

fn gate(id: u32) {
    let report: CriterionReport = run_criterion(id);
    let line = format!(
        "criterion {:02} {:<38} {} ({:.2}s / {:.0}s budget) — {}\n",
        report.id,
        report.name,
        if report.pass { "PASS" } else { "FAIL" },
        report.seconds,
        report.budget_seconds,
        report.details
    );
    std::io::stdout()
        .lock()
        .write_all(line.as_bytes())
        .expect("writing the verdict line");
    assert!(report.pass, "criterion {id} failed: {}", report.details);
    assert!(
        report.seconds <= report.budget_seconds,
        "criterion {id} exceeded its budget: {:.2}s > {:.0}s",
        report.seconds,
        report.budget_seconds
    );
}

#[test]
fn criterion_01_cyclotomic_product_and_evaluation() {
    gate(1);
}

#[test]
fn criterion_02_substitution_evaluation_exchange() {
    gate(2);
}

#[test]
fn criterion_03_jet_head_and_truncated_products() {
    gate(3);
}

#[test]
fn criterion_04_averaging_section_idempotents() {
    gate(4);
}

#[test]
fn criterion_05_crossed_product_representation() {
    gate(5);
}

#[test]
fn criterion_06_diagonal_operator_twist_exchange() {
    gate(6);
}

#[test]
fn criterion_07_partition_function_closed_form() {
    gate(7);
}

#[test]
fn criterion_08_gibbs_trace_vs_series() {
    gate(8);
}

#[test]
fn criterion_09_low_temperature_limit() {
    gate(9);
}

#[test]
fn criterion_10_label_preimage_count() {
    gate(10);
}

#[test]
fn criterion_11_hnf_census_and_zeta_product() {
    gate(11);
}

#[test]
fn criterion_12_ghost_transport_ring_laws() {
    gate(12);
}

#[test]
fn criterion_13_frobenius_congruence() {
    gate(13);
}

#[test]
fn criterion_14_cone_zeta_and_channel_scaling() {
    gate(14);
}

#[test]
fn criterion_15_twist_composition_law() {
    gate(15);
}
