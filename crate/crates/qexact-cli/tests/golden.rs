//! End-to-end checks against the compiled binary.
//!
//! Each test replays a documented invocation and compares the emitted JSON or
//! CSV with independently computed values: closed-form constants, direct
//! library calls, or hand-checked worked examples.  Exit codes are pinned:
//! 0 success, 1 domain error or failed reproduction, 2 usage error.

use serde_json::Value;
use std::process::{Command, Output};

/// Runs the binary with a scrubbed environment (plus the given overrides) so
/// ambient `QEXACT_*` variables cannot leak into the tests.
fn run_with(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_qexact"));
    cmd.args(args);
    for name in ["QEXACT_LEVEL", "QEXACT_NMAX", "QEXACT_MMAX"] {
        cmd.env_remove(name);
    }
    for (key, value) in envs {
        cmd.env(key, value);
    }
    cmd.output().expect("the binary should run")
}

fn run(args: &[&str]) -> Output {
    run_with(args, &[])
}

fn assert_success(out: &Output) {
    assert!(
        out.status.success(),
        "expected exit 0, got {:?}; stderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn json_stdout(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}",
            String::from_utf8_lossy(&out.stdout)
        )
    })
}

fn text_stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("stdout is UTF-8")
}

fn as_f64(v: &Value) -> f64 {
    v.as_f64().unwrap_or_else(|| panic!("expected a number, got {v}"))
}

fn i64_matrix(v: &Value) -> Vec<Vec<i64>> {
    v["rows"]
        .as_array()
        .expect("matrix rows")
        .iter()
        .map(|row| {
            row.as_array()
                .expect("matrix row")
                .iter()
                .map(|e| e.as_str().expect("string entry").parse().expect("integer"))
                .collect()
        })
        .collect()
}

fn mat_mul(a: &[Vec<i64>], b: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum())
                .collect()
        })
        .collect()
}

// ---------------------------------------------------------------------------
// habiro
// ---------------------------------------------------------------------------

#[test]
fn habiro_ev_reports_exact_cyclotomic_coordinates() {
    let out = run(&["habiro", "ev", "--f", "q", "--level", "4", "--zeta", "1/4"]);
    assert_success(&out);
    let v = json_stdout(&out);
    assert_eq!(v["schema"], "qexact/1");
    assert_eq!(v["command"], "habiro.ev");
    assert_eq!(v["config"]["f"], "q");
    assert_eq!(v["config"]["level"], 4);
    assert_eq!(v["config"]["zeta"], "1/4");
    assert_eq!(v["result"]["order"], 4);
    assert_eq!(v["result"]["coeffs"], serde_json::json!(["0", "1"]));
    assert_eq!(v["result"]["exact"], true);
}

#[test]
fn level_default_comes_from_the_environment() {
    let out = run_with(
        &["habiro", "ev", "--f", "q", "--zeta", "1/4"],
        &[("QEXACT_LEVEL", "4")],
    );
    assert_success(&out);
    let v = json_stdout(&out);
    assert_eq!(v["config"]["level"], 4);
    assert_eq!(v["result"]["coeffs"], serde_json::json!(["0", "1"]));

    // Without the variable the documented default applies.
    let out = run(&["habiro", "ev", "--f", "q", "--zeta", "1/4"]);
    assert_success(&out);
    assert_eq!(json_stdout(&out)["config"]["level"], 8);
}

// ---------------------------------------------------------------------------
// qsm
// ---------------------------------------------------------------------------

#[test]
fn qsm_partition_defaults_match_documented_truncations() {
    let out = run(&["qsm", "partition", "--hbar", "0.5", "--beta", "2"]);
    assert_success(&out);
    let v = json_stdout(&out);
    assert_eq!(v["config"]["nmax"], 200);
    assert_eq!(v["config"]["mmax"], 40);
    let value = as_f64(&v["result"]["value"]);
    let tail = as_f64(&v["result"]["tail_bound"]);
    // Closed form: ζ(2) / (1 − (1/2)²).
    let exact = std::f64::consts::PI.powi(2) / 6.0 / 0.75;
    assert!(
        (value - exact).abs() <= tail,
        "value {value}, exact {exact}, tail {tail}"
    );
    assert!(tail < 1e-2);
    assert_eq!(v["result"]["exact"], false);
}

#[test]
fn truncation_flags_beat_environment_variables() {
    let envs = [("QEXACT_NMAX", "50"), ("QEXACT_MMAX", "10")];
    let out = run_with(&["qsm", "partition", "--hbar", "0.5", "--beta", "2"], &envs);
    assert_success(&out);
    let v = json_stdout(&out);
    assert_eq!(v["config"]["nmax"], 50);
    assert_eq!(v["config"]["mmax"], 10);

    let out = run_with(
        &["qsm", "partition", "--hbar", "0.5", "--beta", "2", "--nmax", "75"],
        &envs,
    );
    assert_success(&out);
    let v = json_stdout(&out);
    assert_eq!(v["config"]["nmax"], 75);
    assert_eq!(v["config"]["mmax"], 10);
}

#[test]
fn beta_grid_csv_has_config_comment_and_verifiable_rows() {
    let out = run(&[
        "qsm", "partition", "--hbar", "0.5", "--beta-grid", "2,4", "--format", "csv",
    ]);
    assert_success(&out);
    let text = text_stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert!(
        lines[0].starts_with("# config: hbar=0.5 beta-grid=2,4"),
        "comment line: {}",
        lines[0]
    );
    assert_eq!(lines[1], "beta,value,tail_bound");
    assert_eq!(lines.len(), 4);
    let zetas = [
        std::f64::consts::PI.powi(2) / 6.0,
        std::f64::consts::PI.powi(4) / 90.0,
    ];
    for (line, (beta, zeta)) in lines[2..].iter().zip([(2.0f64, zetas[0]), (4.0, zetas[1])]) {
        let fields: Vec<f64> = line.split(',').map(|t| t.parse().unwrap()).collect();
        assert_eq!(fields[0], beta);
        let exact = zeta / (1.0 - 0.5f64.powf(beta));
        assert!(
            (fields[1] - exact).abs() <= fields[2],
            "row {line} vs closed form {exact}"
        );
    }
}

#[test]
fn qsm_gibbs_agrees_with_the_series_route() {
    let out = run(&[
        "qsm", "gibbs", "--hbar", "0.5", "--beta", "2", "--f", "q", "--level", "8",
        "--zeta", "1/2", "--ell", "1",
    ]);
    assert_success(&out);
    let v = json_stdout(&out);
    let cfg = qexact::qsm::QSMConfig {
        hbar: 0.5,
        beta: 2.0,
        ..qexact::qsm::QSMConfig::default()
    };
    let f = qexact::habiro::HabiroElt::parse("q", 8).unwrap();
    let zeta = qexact::cyclotomic::RootOfUnity::new(1, 2);
    let series = qexact::qsm::gibbs_series(zeta, &f, 1, &cfg).unwrap();
    assert!((as_f64(&v["result"]["value_re"]) - series.re).abs() < 1e-12);
    assert!((as_f64(&v["result"]["value_im"]) - series.im).abs() < 1e-12);
}

#[test]
fn kms_limit_reports_the_exact_ground_state_value() {
    let out = run(&["qsm", "kms-limit", "--f", "q", "--zeta", "1/2"]);
    assert_success(&out);
    let v = json_stdout(&out);
    assert_eq!(v["result"]["order"], 2);
    assert_eq!(v["result"]["coeffs"], serde_json::json!(["-1"]));
    assert!((as_f64(&v["result"]["value_re"]) + 1.0).abs() < 1e-12);
    assert!(as_f64(&v["result"]["value_im"]).abs() < 1e-12);
}

#[test]
fn beta_below_threshold_is_a_domain_error() {
    let out = run(&["qsm", "partition", "--hbar", "0.5", "--beta", "0.5"]);
    assert_eq!(out.status.code(), Some(1));
    let v = json_stdout(&out);
    assert_eq!(v["error"]["kind"], "BetaOutOfRange");
    assert!(v["error"]["message"].as_str().unwrap().contains("0.5"));
    // The config echo survives so the failing run can still be replayed.
    assert_eq!(v["config"]["beta"], 0.5);
}

// ---------------------------------------------------------------------------
// multi
// ---------------------------------------------------------------------------

#[test]
fn multi_hnf_census_counts_and_csv_sweep() {
    let out = run(&["multi", "hnf", "--n", "2", "--det", "6"]);
    assert_success(&out);
    let v = json_stdout(&out);
    assert_eq!(v["result"]["count"], 12);
    assert_eq!(v["result"]["matrices"].as_array().unwrap().len(), 12);

    let out = run(&["multi", "hnf", "--n", "2", "--det-cap", "6", "--format", "csv"]);
    assert_success(&out);
    let text = text_stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "# config: n=2 det-cap=6");
    assert_eq!(lines[1], "det,count");
    // Divisor sums: 1, 3, 4, 7, 6, 12.
    assert_eq!(&lines[2..], &["1,1", "2,3", "3,4", "4,7", "5,6", "6,12"]);
}

#[test]
fn multi_snf_factors_multiply_back() {
    let out = run(&["multi", "snf", "--matrix", "2,1;0,3"]);
    assert_success(&out);
    let v = json_stdout(&out);
    let u = i64_matrix(&v["result"]["u"]);
    let d = i64_matrix(&v["result"]["d"]);
    let w = i64_matrix(&v["result"]["v"]);
    assert_eq!(mat_mul(&mat_mul(&u, &d), &w), vec![vec![2, 1], vec![0, 3]]);
    // Diagonal with the divisibility chain.
    assert_eq!(d[0][1], 0);
    assert_eq!(d[1][0], 0);
    assert_eq!(d[1][1] % d[0][0], 0);
}

#[test]
fn multi_partition_matches_the_library_and_the_zeta_product() {
    let out = run(&["multi", "partition", "--n", "2", "--beta", "4", "--cap", "200"]);
    assert_success(&out);
    let v = json_stdout(&out);
    let value = as_f64(&v["result"]["value"]);
    let tail = as_f64(&v["result"]["tail_bound"]);
    let direct = qexact::multivar::partition_ii1(2, 4.0, 200).unwrap();
    assert_eq!(value, direct.value);
    assert_eq!(tail, direct.tail_bound);
    // Untruncated closed form ζ(4)·ζ(3).
    let exact = std::f64::consts::PI.powi(4) / 90.0 * 1.202_056_903_159_594_3;
    assert!((value - exact).abs() <= tail, "value {value} vs {exact} ± {tail}");
}

// ---------------------------------------------------------------------------
// witt
// ---------------------------------------------------------------------------

#[test]
fn witt_ghost_and_unghost_round_trip_the_worked_example() {
    let out = run(&["witt", "ghost", "--w", "2,-1,-2,-4"]);
    assert_success(&out);
    let v = json_stdout(&out);
    assert_eq!(v["result"]["psi"], serde_json::json!(["2", "2", "2", "2"]));

    let out = run(&["witt", "unghost", "--psi", "2,2,2,2"]);
    assert_success(&out);
    let v = json_stdout(&out);
    assert_eq!(
        v["result"]["components"],
        serde_json::json!(["2", "-1", "-2", "-4"])
    );
    assert_eq!(v["result"]["integral"], true);
}

#[test]
fn witt_add_is_integral_on_integral_input() {
    let out = run(&["witt", "add", "--a", "1,0", "--b", "1,0"]);
    assert_success(&out);
    let v = json_stdout(&out);
    // Ghost coordinates (1,1) + (1,1) = (2,2) pull back to (2,−1).
    assert_eq!(v["result"]["components"], serde_json::json!(["2", "-1"]));
    assert_eq!(v["result"]["integral"], true);
}

#[test]
fn witt_truncation_mismatch_is_a_domain_error() {
    let out = run(&["witt", "add", "--a", "1,2", "--b", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json_stdout(&out)["error"]["kind"], "TruncationMismatch");
}

#[test]
fn witt_frobcheck_divides_the_difference() {
    let out = run(&["witt", "frobcheck", "--k", "6", "--p", "2", "--x", "1,1"]);
    assert_success(&out);
    let v = json_stdout(&out);
    assert_eq!(v["result"]["holds"], true);
    assert_eq!(
        v["result"]["difference"],
        serde_json::json!(["0", "-2", "0", "0", "0", "0"])
    );
    assert_eq!(
        v["result"]["quotient"],
        serde_json::json!(["0", "-1", "0", "0", "0", "0"])
    );
}

// ---------------------------------------------------------------------------
// mzv
// ---------------------------------------------------------------------------

#[test]
fn mzv_half_line_matches_the_classical_value() {
    let out = run(&[
        "mzv", "cone", "--gens", "1", "--forms", "1|1", "--theta", "0", "--hmax", "1000",
    ]);
    assert_success(&out);
    let v = json_stdout(&out);
    assert_eq!(v["config"]["theta"], "0");
    assert_eq!(v["result"]["points"], 1000);
    let re = as_f64(&v["result"]["value_re"]);
    let tail = as_f64(&v["result"]["tail"]);
    let exact = std::f64::consts::PI.powi(2) / 6.0;
    assert!((re - exact).abs() <= tail, "value {re} vs {exact} ± {tail}");
    assert!(tail < 1e-2);
    assert_eq!(as_f64(&v["result"]["value_im"]), 0.0);
}

#[test]
fn mzv_convergence_guard_and_forced_override() {
    let args = ["mzv", "cone", "--gens", "1", "--forms", "2", "--theta", "0", "--hmax", "100"];
    let out = run(&args);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json_stdout(&out)["error"]["kind"], "ConvergenceWarning");

    let forced: Vec<&str> = args.iter().copied().chain(["--force"]).collect();
    let out = run(&forced);
    assert_success(&out);
    let v = json_stdout(&out);
    // Σ_{x ≤ 100} 1/(2x), with no finite tail bound available.
    let harmonic: f64 = (1..=100).map(|x| 1.0 / (2.0 * x as f64)).sum();
    assert!((as_f64(&v["result"]["value_re"]) - harmonic).abs() < 1e-12);
    assert!(v["result"]["tail"].is_null());
    assert_eq!(v["result"]["points"], 100);
}

// ---------------------------------------------------------------------------
// braid
// ---------------------------------------------------------------------------

#[test]
fn braid_rho_twists_by_the_writhe() {
    let out = run(&["braid", "rho", "--n", "3", "--word", "s1 s2", "--m", "1"]);
    assert_success(&out);
    let v = json_stdout(&out);
    assert_eq!(v["config"]["n"], 3);
    assert_eq!(v["config"]["word"], "s1 s2");
    assert_eq!(v["config"]["center"], 0);
    assert_eq!(v["config"]["m"], 1);
    assert_eq!(v["result"]["writhe"], 2);
    assert_eq!(v["result"]["image"]["word"], "s1 s2 T^2");
    assert_eq!(v["result"]["image"]["center_exp"], 2);
    // Letters contribute 2, the twist contributes 2·3·(3−1) = 12.
    assert_eq!(v["result"]["image"]["writhe"], 14);
}

#[test]
fn braid_word_errors_are_usage_errors() {
    let out = run(&["braid", "rho", "--n", "3", "--word", "s9", "--m", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("s9"));
}

// ---------------------------------------------------------------------------
// repro and the shared error contract
// ---------------------------------------------------------------------------

#[test]
fn repro_suite_reports_pin_their_budgets() {
    let out = run(&["repro", "--suite", "braid"]);
    assert_success(&out);
    let v = json_stdout(&out);
    assert_eq!(v["result"]["pass"], true);
    let report = &v["result"]["reports"][0];
    assert_eq!(report["id"], 15);
    assert_eq!(report["name"], "twist-composition-law");
    assert!(as_f64(&report["seconds"]) <= as_f64(&report["budget_seconds"]));

    let out = run(&["repro", "--suite", "braid", "--format", "csv"]);
    assert_success(&out);
    let text = text_stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "# config: suite=braid format=csv");
    assert_eq!(lines[1], "id,name,pass,seconds,budget_seconds");
    assert!(lines[2].starts_with("15,twist-composition-law,true,"));
}

#[test]
fn unknown_suites_and_subcommands_exit_with_usage_code() {
    let out = run(&["repro", "--suite", "nonsense"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nonsense"));

    let out = run(&["qsm", "nonsense"]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&["frobulate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_environment_values_are_usage_errors() {
    let out = run_with(
        &["habiro", "ev", "--f", "q", "--zeta", "1/2"],
        &[("QEXACT_LEVEL", "zz")],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("QEXACT_LEVEL"));
}
