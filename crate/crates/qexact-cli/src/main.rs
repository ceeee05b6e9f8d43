//! Command-line front end for the `qexact` library.
//!
//! Every subcommand prints a single document to stdout.  JSON output uses the
//! envelope
//!
//! ```text
//! {"schema": "qexact/1", "command": "<group.verb>", "config": {..}, "result": {..}}
//! ```
//!
//! where `config` echoes every flag after defaults and environment variables
//! have been resolved, so a run can be replayed from its own output.  CSV
//! output (sweeps and the reproduction table) starts with a `# config: ..`
//! comment line followed by a header row.
//!
//! Conventions:
//! - exact integers and rationals are reported as decimal strings, never as
//!   floats; floating-point results carry an `"exact": false` marker and,
//!   where applicable, a rigorous `tail_bound` (or `tail`) field;
//! - an unbounded tail estimate is reported as JSON `null`;
//! - exit code 0 means success, 1 means a domain error (reported as a JSON
//!   envelope with the error kind and message, or a failed reproduction
//!   suite), 2 means a usage error (malformed flags, reported on stderr).
//!
//! The environment variables `QEXACT_LEVEL`, `QEXACT_NMAX`, and `QEXACT_MMAX`
//! change the default truncation level and operator cutoffs; explicit flags
//! always win over the environment.

use clap::{Args, Parser, Subcommand, ValueEnum};
use num::{BigInt, BigRational, Zero};
use qexact::arith::is_prime;
use qexact::braids::{parse_word, rho_endo, BraidWord};
use qexact::cyclotomic::RootOfUnity;
use qexact::habiro::HabiroElt;
use qexact::multivar::{hnf_enumerate, partition_ii1, snf, IntMatrix};
use qexact::mzv_channels::{mzv_cone, mzv_cone_unchecked, ConeState, RationalCone};
use qexact::qsm::{
    delta_star_op, gibbs_state, kms_infinity, partition_function, taylor_op, QSMConfig,
};
use qexact::witt_lambda::{
    frobenius_lift_check, ghost, unghost, witt_add, witt_mul, GroupRingModP, WittVector,
};
use qexact::{acceptance, Error};
use serde_json::{json, Value};
use std::process::ExitCode;

const SCHEMA: &str = "qexact/1";

#[derive(Parser)]
#[command(
    name = "qexact",
    version,
    about = "Exact cyclotomic evaluations, truncated partition sums with tail bounds, \
             lattice censuses, Witt arithmetic, cone zeta values, braid twists, and \
             the reproduction suites",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    group: Group,
}

#[derive(Subcommand)]
enum Group {
    /// Finite-level elements in the variable q
    #[command(subcommand)]
    Habiro(HabiroCmd),
    /// The multiplicity-free quantum statistical model
    #[command(subcommand)]
    Qsm(QsmCmd),
    /// Integer matrices: Smith form, Hermite census, determinant zeta
    #[command(subcommand)]
    Multi(MultiCmd),
    /// Truncated big Witt vectors and the Frobenius congruence
    #[command(subcommand)]
    Witt(WittCmd),
    /// Cone zeta values with characters and channel transforms
    #[command(subcommand)]
    Mzv(MzvCmd),
    /// Braid words and the writhe-twist endomorphisms
    #[command(subcommand)]
    Braid(BraidCmd),
    /// Replay the pinned acceptance checks
    Repro(ReproArgs),
}

#[derive(Subcommand)]
enum HabiroCmd {
    /// Evaluate an element at a root of unity, exactly
    Ev {
        /// Element as an integer polynomial in q, e.g. "q^2 - 3*q + 1"
        #[arg(long)]
        f: String,
        /// Truncation level (default: QEXACT_LEVEL or 8)
        #[arg(long)]
        level: Option<u32>,
        /// Root of unity as a fraction of a full turn, e.g. "1/4"
        #[arg(long)]
        zeta: String,
    },
}

#[derive(Subcommand)]
enum QsmCmd {
    /// Truncated partition function with a tail bound
    Partition {
        /// Spectral parameter in (0, 1)
        #[arg(long)]
        hbar: f64,
        /// Inverse temperature (must exceed 1)
        #[arg(long, required_unless_present = "beta_grid", conflicts_with = "beta_grid")]
        beta: Option<f64>,
        /// Comma-separated sweep of inverse temperatures, e.g. "2,4,8"
        #[arg(long)]
        beta_grid: Option<String>,
        /// Energy-index cutoff (default: QEXACT_NMAX or 200)
        #[arg(long)]
        nmax: Option<u32>,
        /// Filtration cutoff (default: QEXACT_MMAX or 40)
        #[arg(long)]
        mmax: Option<u32>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Equilibrium expectation of a jet observable
    Gibbs {
        /// Spectral parameter in (0, 1); default 1/e
        #[arg(long)]
        hbar: Option<f64>,
        /// Inverse temperature (must exceed 1)
        #[arg(long)]
        beta: f64,
        /// Observable as an integer polynomial in q
        #[arg(long)]
        f: String,
        /// Truncation level (default: QEXACT_LEVEL or 8)
        #[arg(long)]
        level: Option<u32>,
        /// Root of unity as a fraction of a full turn
        #[arg(long)]
        zeta: String,
        /// Jet order of the observable
        #[arg(long, default_value_t = 0)]
        ell: u32,
        /// Energy-index cutoff (default: QEXACT_NMAX or 200)
        #[arg(long)]
        nmax: Option<u32>,
        /// Filtration cutoff (default: QEXACT_MMAX or 40)
        #[arg(long)]
        mmax: Option<u32>,
    },
    /// Zero-temperature limit: the ground-state matrix element, exactly
    KmsLimit {
        /// Observable as an integer polynomial in q
        #[arg(long)]
        f: String,
        /// Truncation level (default: QEXACT_LEVEL or 8)
        #[arg(long)]
        level: Option<u32>,
        /// Root of unity as a fraction of a full turn
        #[arg(long)]
        zeta: String,
    },
}

#[derive(Subcommand)]
enum MultiCmd {
    /// Exact Smith decomposition matrix = u * d * v
    Snf {
        /// Square integer matrix, semicolon-separated rows, e.g. "2,1;0,3"
        #[arg(long)]
        matrix: String,
    },
    /// Column Hermite forms of a fixed determinant
    Hnf {
        /// Matrix size
        #[arg(long)]
        n: usize,
        /// Determinant to enumerate
        #[arg(long, required_unless_present = "det_cap", conflicts_with = "det_cap")]
        det: Option<u64>,
        /// Sweep: census for every determinant 1..=cap
        #[arg(long)]
        det_cap: Option<u64>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Determinant-weighted zeta sum with a tail bound
    Partition {
        /// Matrix size
        #[arg(long)]
        n: usize,
        /// Inverse temperature (must exceed n)
        #[arg(long)]
        beta: f64,
        /// Determinant cutoff (at least 3)
        #[arg(long, default_value_t = 200)]
        cap: u64,
    },
}

#[derive(Subcommand)]
enum WittCmd {
    /// Ghost coordinates of a truncated Witt vector
    Ghost {
        /// Components as comma-separated rationals, e.g. "2,-1,-2,-4"
        #[arg(long)]
        w: String,
    },
    /// Witt components recovered from ghost coordinates
    Unghost {
        /// Ghost coordinates as comma-separated rationals
        #[arg(long)]
        psi: String,
    },
    /// Witt sum of two vectors of equal truncation
    Add {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
    },
    /// Witt product of two vectors of equal truncation
    Mul {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
    },
    /// Check the substitution-vs-power congruence modulo a prime
    Frobcheck {
        /// Group-ring modulus: coefficients live in Z[t]/(t^k - 1)
        #[arg(long)]
        k: usize,
        /// The prime p
        #[arg(long)]
        p: u64,
        /// Element as comma-separated integer coefficients, constant term first
        #[arg(long)]
        x: String,
    },
}

#[derive(Subcommand)]
enum MzvCmd {
    /// Truncated cone zeta value with an explicit tail bound
    Cone {
        /// Generators: semicolon-separated vectors of comma-separated rationals
        #[arg(long)]
        gens: String,
        /// Linear forms: '|'-separated vectors of comma-separated rationals
        #[arg(long)]
        forms: String,
        /// Character exponents mod 1, comma-separated (default: all zero)
        #[arg(long)]
        theta: Option<String>,
        /// Height cutoff for the truncated sum
        #[arg(long)]
        hmax: u64,
        /// Evaluate even when the convergence heuristic objects
        #[arg(long)]
        force: bool,
    },
}

#[derive(Subcommand)]
enum BraidCmd {
    /// Apply the writhe-twist endomorphism to a braid word
    Rho {
        /// Number of strands (at least 2)
        #[arg(long)]
        n: usize,
        /// Space-separated letters, e.g. "s1 s2^-1"; empty means the identity
        #[arg(long)]
        word: String,
        /// Full-twist exponent carried by the input word
        #[arg(long, default_value_t = 0)]
        center: i64,
        /// Twist parameter of the endomorphism
        #[arg(long)]
        m: i64,
    },
}

#[derive(Args)]
struct ReproArgs {
    /// Suite: algebra, qsm, multivar, witt, mzv, braid, or all
    #[arg(long, default_value = "all")]
    suite: String,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

impl Format {
    fn name(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

/// A rendered document plus whether the run should exit nonzero (used by
/// `repro` when a criterion fails).
struct Output {
    text: String,
    failed: bool,
}

impl Output {
    fn ok(text: String) -> Self {
        Output { text, failed: false }
    }
}

enum Failure {
    /// Malformed input: message for stderr, exit code 2.
    Usage(String),
    /// Library-reported domain error: rendered JSON envelope, exit code 1.
    Domain(String),
}

/// Prints to stdout, swallowing broken-pipe errors so that piping into
/// `head` and friends terminates quietly instead of panicking.
fn emit(text: &str) {
    use std::io::Write;
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            emit(&out.text);
            if out.failed {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Domain(text)) => {
            emit(&text);
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<Output, Failure> {
    match cli.group {
        Group::Habiro(HabiroCmd::Ev { f, level, zeta }) => run_habiro_ev(f, level, zeta),
        Group::Qsm(QsmCmd::Partition {
            hbar,
            beta,
            beta_grid,
            nmax,
            mmax,
            format,
        }) => run_qsm_partition(hbar, beta, beta_grid, nmax, mmax, format),
        Group::Qsm(QsmCmd::Gibbs {
            hbar,
            beta,
            f,
            level,
            zeta,
            ell,
            nmax,
            mmax,
        }) => run_qsm_gibbs(hbar, beta, f, level, zeta, ell, nmax, mmax),
        Group::Qsm(QsmCmd::KmsLimit { f, level, zeta }) => run_qsm_kms_limit(f, level, zeta),
        Group::Multi(MultiCmd::Snf { matrix }) => run_multi_snf(matrix),
        Group::Multi(MultiCmd::Hnf {
            n,
            det,
            det_cap,
            format,
        }) => run_multi_hnf(n, det, det_cap, format),
        Group::Multi(MultiCmd::Partition { n, beta, cap }) => run_multi_partition(n, beta, cap),
        Group::Witt(WittCmd::Ghost { w }) => run_witt_ghost(w),
        Group::Witt(WittCmd::Unghost { psi }) => run_witt_unghost(psi),
        Group::Witt(WittCmd::Add { a, b }) => run_witt_binop(a, b, false),
        Group::Witt(WittCmd::Mul { a, b }) => run_witt_binop(a, b, true),
        Group::Witt(WittCmd::Frobcheck { k, p, x }) => run_witt_frobcheck(k, p, x),
        Group::Mzv(MzvCmd::Cone {
            gens,
            forms,
            theta,
            hmax,
            force,
        }) => run_mzv_cone(gens, forms, theta, hmax, force),
        Group::Braid(BraidCmd::Rho { n, word, center, m }) => run_braid_rho(n, word, center, m),
        Group::Repro(args) => run_repro(args.suite, args.format),
    }
}

// ---------------------------------------------------------------------------
// Shared plumbing: envelopes, environment defaults, flag-value parsers.
// ---------------------------------------------------------------------------

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("JSON values serialize")
}

fn envelope(command: &str, config: &Value, result: Value) -> String {
    pretty(&json!({
        "schema": SCHEMA,
        "command": command,
        "config": config,
        "result": result,
    }))
}

fn domain(command: &str, config: &Value, e: Error) -> Failure {
    Failure::Domain(pretty(&json!({
        "schema": SCHEMA,
        "command": command,
        "config": config,
        "error": {"kind": e.kind(), "message": e.to_string()},
    })))
}

/// Library parse errors triggered by flag text are usage errors, not domain
/// errors: the input never made it into the model.
fn reject_input(e: Error) -> Failure {
    Failure::Usage(e.to_string())
}

fn env_override(name: &str) -> Result<Option<u32>, Failure> {
    match std::env::var(name) {
        Err(_) => Ok(None),
        Ok(raw) => raw.trim().parse().map(Some).map_err(|_| {
            Failure::Usage(format!(
                "environment variable {name} must be an unsigned integer, got {raw:?}"
            ))
        }),
    }
}

fn resolve_u32(flag: Option<u32>, env_name: &str, fallback: u32) -> Result<u32, Failure> {
    match flag {
        Some(v) => Ok(v),
        None => Ok(env_override(env_name)?.unwrap_or(fallback)),
    }
}

fn parse_root(text: &str) -> Result<RootOfUnity, Failure> {
    let t = text.trim();
    let bad = || {
        Failure::Usage(format!(
            "root of unity must be a fraction of a full turn like \"1/4\", got {t:?}"
        ))
    };
    let (a, b) = match t.split_once('/') {
        Some((a, b)) => (
            a.trim().parse::<u64>().map_err(|_| bad())?,
            b.trim().parse::<u64>().map_err(|_| bad())?,
        ),
        None => (t.parse::<u64>().map_err(|_| bad())?, 1),
    };
    if b == 0 {
        return Err(Failure::Usage(format!("zero denominator in {t:?}")));
    }
    Ok(RootOfUnity::new(a, b))
}

fn parse_rat(text: &str) -> Result<BigRational, Failure> {
    let t = text.trim();
    let bad = || Failure::Usage(format!("expected a rational like \"-3/4\", got {t:?}"));
    match t.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(Failure::Usage(format!("zero denominator in {t:?}")));
            }
            Ok(BigRational::new(n, d))
        }
        None => Ok(BigRational::from(
            t.parse::<BigInt>().map_err(|_| bad())?,
        )),
    }
}

fn parse_rat_vec(text: &str) -> Result<Vec<BigRational>, Failure> {
    text.split(',').map(parse_rat).collect()
}

fn parse_rat_rows(text: &str, sep: char) -> Result<Vec<Vec<BigRational>>, Failure> {
    text.split(sep).map(parse_rat_vec).collect()
}

fn parse_bigint_vec(text: &str) -> Result<Vec<BigInt>, Failure> {
    text.split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<BigInt>()
                .map_err(|_| Failure::Usage(format!("expected an integer, got {t:?}")))
        })
        .collect()
}

fn parse_f64_vec(text: &str) -> Result<Vec<f64>, Failure> {
    text.split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<f64>()
                .map_err(|_| Failure::Usage(format!("expected a number, got {t:?}")))
        })
        .collect()
}

/// Parses a square integer matrix: semicolon-separated rows of
/// comma-separated entries.
fn parse_square_matrix(text: &str) -> Result<Vec<Vec<i64>>, Failure> {
    let rows: Vec<Vec<i64>> = text
        .split(';')
        .map(|row| {
            row.split(',')
                .map(|t| {
                    let t = t.trim();
                    t.parse::<i64>()
                        .map_err(|_| Failure::Usage(format!("expected an integer, got {t:?}")))
                })
                .collect()
        })
        .collect::<Result<_, _>>()?;
    if rows.is_empty() || rows.iter().any(|r| r.len() != rows.len()) {
        return Err(Failure::Usage(
            "matrix must be square and nonempty, e.g. \"2,1;0,3\"".into(),
        ));
    }
    Ok(rows)
}

fn rat_strings(values: &[BigRational]) -> Vec<String> {
    values.iter().map(|v| v.to_string()).collect()
}

fn int_strings(values: &[BigInt]) -> Vec<String> {
    values.iter().map(|v| v.to_string()).collect()
}

/// `f64::INFINITY` has no JSON representation; report unbounded tails as null.
fn tail_json(tail: f64) -> Value {
    if tail.is_finite() {
        json!(tail)
    } else {
        Value::Null
    }
}

// ---------------------------------------------------------------------------
// habiro
// ---------------------------------------------------------------------------

fn run_habiro_ev(f: String, level: Option<u32>, zeta: String) -> Result<Output, Failure> {
    let cmd = "habiro.ev";
    let level = resolve_u32(level, "QEXACT_LEVEL", 8)?;
    let config = json!({"f": f, "level": level, "zeta": zeta});
    let root = parse_root(&zeta)?;
    let elt = HabiroElt::parse(&f, level).map_err(reject_input)?;
    let value = elt.ev(root).map_err(|e| domain(cmd, &config, e))?;
    Ok(Output::ok(envelope(
        cmd,
        &config,
        json!({
            "order": value.order(),
            "coeffs": int_strings(value.coeffs()),
            "exact": true,
        }),
    )))
}

// ---------------------------------------------------------------------------
// qsm
// ---------------------------------------------------------------------------

fn run_qsm_partition(
    hbar: f64,
    beta: Option<f64>,
    beta_grid: Option<String>,
    nmax: Option<u32>,
    mmax: Option<u32>,
    format: Format,
) -> Result<Output, Failure> {
    let cmd = "qsm.partition";
    let nmax = resolve_u32(nmax, "QEXACT_NMAX", 200)?;
    let mmax = resolve_u32(mmax, "QEXACT_MMAX", 40)?;
    let cfg_for = |beta: f64| QSMConfig {
        hbar,
        beta,
        nmax,
        mmax,
        ..QSMConfig::default()
    };
    if let Some(grid) = beta_grid {
        let betas = parse_f64_vec(&grid)?;
        let config = json!({
            "hbar": hbar, "beta-grid": grid, "nmax": nmax, "mmax": mmax,
            "format": format.name(),
        });
        let mut rows = Vec::new();
        for beta in betas {
            let est = partition_function(&cfg_for(beta)).map_err(|e| domain(cmd, &config, e))?;
            rows.push((beta, est));
        }
        let text = match format {
            Format::Json => envelope(
                cmd,
                &config,
                json!({
                    "rows": rows
                        .iter()
                        .map(|(beta, est)| json!({
                            "beta": beta, "value": est.value, "tail_bound": est.tail_bound,
                        }))
                        .collect::<Vec<_>>(),
                    "exact": false,
                }),
            ),
            Format::Csv => {
                let mut text = format!(
                    "# config: hbar={hbar} beta-grid={grid} nmax={nmax} mmax={mmax}\n\
                     beta,value,tail_bound"
                );
                for (beta, est) in &rows {
                    text.push_str(&format!("\n{beta},{},{}", est.value, est.tail_bound));
                }
                text
            }
        };
        return Ok(Output::ok(text));
    }
    let beta = beta.expect("clap requires --beta when --beta-grid is absent");
    let config = json!({
        "hbar": hbar, "beta": beta, "nmax": nmax, "mmax": mmax, "format": format.name(),
    });
    let est = partition_function(&cfg_for(beta)).map_err(|e| domain(cmd, &config, e))?;
    let text = match format {
        Format::Json => envelope(
            cmd,
            &config,
            json!({"value": est.value, "tail_bound": est.tail_bound, "exact": false}),
        ),
        Format::Csv => format!(
            "# config: hbar={hbar} beta={beta} nmax={nmax} mmax={mmax}\n\
             beta,value,tail_bound\n{beta},{},{}",
            est.value, est.tail_bound
        ),
    };
    Ok(Output::ok(text))
}

#[allow(clippy::too_many_arguments)]
fn run_qsm_gibbs(
    hbar: Option<f64>,
    beta: f64,
    f: String,
    level: Option<u32>,
    zeta: String,
    ell: u32,
    nmax: Option<u32>,
    mmax: Option<u32>,
) -> Result<Output, Failure> {
    let cmd = "qsm.gibbs";
    let hbar = hbar.unwrap_or((-1.0f64).exp());
    let level = resolve_u32(level, "QEXACT_LEVEL", 8)?;
    let nmax = resolve_u32(nmax, "QEXACT_NMAX", 200)?;
    let mmax = resolve_u32(mmax, "QEXACT_MMAX", 40)?;
    let config = json!({
        "hbar": hbar, "beta": beta, "f": f, "level": level, "zeta": zeta,
        "ell": ell, "nmax": nmax, "mmax": mmax,
    });
    let root = parse_root(&zeta)?;
    let elt = HabiroElt::parse(&f, level).map_err(reject_input)?;
    let depth = ell
        .checked_add(1)
        .ok_or_else(|| Failure::Usage("--ell is too large".into()))?;
    let cfg = QSMConfig {
        hbar,
        beta,
        nmax,
        mmax,
        ..QSMConfig::default()
    };
    let jets = taylor_op(root, &elt, depth, &cfg).map_err(|e| domain(cmd, &config, e))?;
    let observable = delta_star_op(ell, &cfg).compose(&jets);
    let value = gibbs_state(&observable, &cfg).map_err(|e| domain(cmd, &config, e))?;
    Ok(Output::ok(envelope(
        cmd,
        &config,
        json!({"value_re": value.re, "value_im": value.im, "exact": false}),
    )))
}

fn run_qsm_kms_limit(f: String, level: Option<u32>, zeta: String) -> Result<Output, Failure> {
    let cmd = "qsm.kms-limit";
    let level = resolve_u32(level, "QEXACT_LEVEL", 8)?;
    let config = json!({"f": f, "level": level, "zeta": zeta});
    let root = parse_root(&zeta)?;
    let elt = HabiroElt::parse(&f, level).map_err(reject_input)?;
    // Exact route: the limit state is evaluation at the root of unity.
    let value = elt.ev(root).map_err(|e| domain(cmd, &config, e))?;
    // Operator route for the floating-point coordinates: the ground-state
    // matrix element of the jet operator.
    let cfg = QSMConfig {
        nmax: 1,
        mmax: 0,
        ..QSMConfig::default()
    };
    let op = taylor_op(root, &elt, 1, &cfg).map_err(|e| domain(cmd, &config, e))?;
    let embedded = kms_infinity(&op);
    Ok(Output::ok(envelope(
        cmd,
        &config,
        json!({
            "order": value.order(),
            "coeffs": int_strings(value.coeffs()),
            "value_re": embedded.re,
            "value_im": embedded.im,
            "exact": true,
        }),
    )))
}

// ---------------------------------------------------------------------------
// multi
// ---------------------------------------------------------------------------

fn run_multi_snf(matrix: String) -> Result<Output, Failure> {
    let cmd = "multi.snf";
    let rows = parse_square_matrix(&matrix)?;
    let config = json!({"matrix": matrix});
    let alpha = IntMatrix::new(rows);
    let (u, d, v) = snf(&alpha).map_err(|e| domain(cmd, &config, e))?;
    let ser = |m: &IntMatrix| serde_json::to_value(m).expect("matrices serialize");
    Ok(Output::ok(envelope(
        cmd,
        &config,
        json!({
            "u": ser(&u),
            "d": ser(&d),
            "v": ser(&v),
            "relation": "matrix = u * d * v",
            "exact": true,
        }),
    )))
}

fn run_multi_hnf(
    n: usize,
    det: Option<u64>,
    det_cap: Option<u64>,
    format: Format,
) -> Result<Output, Failure> {
    let cmd = "multi.hnf";
    if n == 0 {
        return Err(Failure::Usage("--n must be at least 1".into()));
    }
    if let Some(cap) = det_cap {
        if cap == 0 {
            return Err(Failure::Usage("--det-cap must be at least 1".into()));
        }
        let config = json!({"n": n, "det-cap": cap, "format": format.name()});
        let counts: Vec<(u64, usize)> = (1..=cap).map(|d| (d, hnf_enumerate(n, d).len())).collect();
        let total: usize = counts.iter().map(|(_, c)| c).sum();
        let text = match format {
            Format::Json => envelope(
                cmd,
                &config,
                json!({
                    "rows": counts
                        .iter()
                        .map(|(det, count)| json!({"det": det, "count": count}))
                        .collect::<Vec<_>>(),
                    "total": total,
                    "exact": true,
                }),
            ),
            Format::Csv => {
                let mut text = format!("# config: n={n} det-cap={cap}\ndet,count");
                for (det, count) in &counts {
                    text.push_str(&format!("\n{det},{count}"));
                }
                text
            }
        };
        return Ok(Output::ok(text));
    }
    let det = det.expect("clap requires --det when --det-cap is absent");
    if det == 0 {
        return Err(Failure::Usage("--det must be at least 1".into()));
    }
    let config = json!({"n": n, "det": det, "format": format.name()});
    let matrices = hnf_enumerate(n, det);
    let text = match format {
        Format::Json => envelope(
            cmd,
            &config,
            json!({
                "count": matrices.len(),
                "matrices": matrices
                    .iter()
                    .map(|m| serde_json::to_value(m).expect("matrices serialize"))
                    .collect::<Vec<_>>(),
                "exact": true,
            }),
        ),
        Format::Csv => format!(
            "# config: n={n} det={det}\ndet,count\n{det},{}",
            matrices.len()
        ),
    };
    Ok(Output::ok(text))
}

fn run_multi_partition(n: usize, beta: f64, cap: u64) -> Result<Output, Failure> {
    let cmd = "multi.partition";
    if n == 0 {
        return Err(Failure::Usage("--n must be at least 1".into()));
    }
    if cap < 3 {
        return Err(Failure::Usage("--cap must be at least 3".into()));
    }
    let config = json!({"n": n, "beta": beta, "cap": cap});
    let est = partition_ii1(n, beta, cap).map_err(|e| domain(cmd, &config, e))?;
    Ok(Output::ok(envelope(
        cmd,
        &config,
        json!({"value": est.value, "tail_bound": est.tail_bound, "exact": false}),
    )))
}

// ---------------------------------------------------------------------------
// witt
// ---------------------------------------------------------------------------

fn nonempty_rat_vec(flag: &str, text: &str) -> Result<Vec<BigRational>, Failure> {
    let v = parse_rat_vec(text)?;
    if v.is_empty() {
        return Err(Failure::Usage(format!("{flag} needs at least one entry")));
    }
    Ok(v)
}

fn run_witt_ghost(w: String) -> Result<Output, Failure> {
    let components = nonempty_rat_vec("--w", &w)?;
    let config = json!({"w": w});
    let psi = ghost(&WittVector::new(components));
    Ok(Output::ok(envelope(
        "witt.ghost",
        &config,
        json!({"psi": rat_strings(&psi), "exact": true}),
    )))
}

fn run_witt_unghost(psi: String) -> Result<Output, Failure> {
    let coords = nonempty_rat_vec("--psi", &psi)?;
    let config = json!({"psi": psi});
    let w = unghost(&coords);
    Ok(Output::ok(envelope(
        "witt.unghost",
        &config,
        json!({
            "components": rat_strings(w.components()),
            "integral": w.is_integral(),
            "exact": true,
        }),
    )))
}

fn run_witt_binop(a: String, b: String, multiply: bool) -> Result<Output, Failure> {
    let cmd = if multiply { "witt.mul" } else { "witt.add" };
    let wa = WittVector::new(nonempty_rat_vec("--a", &a)?);
    let wb = WittVector::new(nonempty_rat_vec("--b", &b)?);
    let config = json!({"a": a, "b": b});
    let result = if multiply {
        witt_mul(&wa, &wb)
    } else {
        witt_add(&wa, &wb)
    }
    .map_err(|e| domain(cmd, &config, e))?;
    Ok(Output::ok(envelope(
        cmd,
        &config,
        json!({
            "components": rat_strings(result.components()),
            "integral": result.is_integral(),
            "exact": true,
        }),
    )))
}

fn run_witt_frobcheck(k: usize, p: u64, x: String) -> Result<Output, Failure> {
    let cmd = "witt.frobcheck";
    if k == 0 {
        return Err(Failure::Usage("--k must be at least 1".into()));
    }
    if !is_prime(p) {
        return Err(Failure::Usage(format!("--p must be a prime, got {p}")));
    }
    let coeffs = parse_bigint_vec(&x)?;
    let config = json!({"k": k, "p": p, "x": x});
    let ring = GroupRingModP::new(k, p);
    // Wrap exponents modulo k so short or long coefficient lists both land in
    // the ring before the congruence check.
    let element = ring.reduce(&qexact::IntPoly::new(coeffs));
    let witness = frobenius_lift_check(&ring, &element);
    Ok(Output::ok(envelope(
        cmd,
        &config,
        json!({
            "holds": witness.holds,
            "difference": int_strings(&witness.difference),
            "quotient": witness.quotient.as_deref().map(int_strings),
            "exact": true,
        }),
    )))
}

// ---------------------------------------------------------------------------
// mzv
// ---------------------------------------------------------------------------

/// Rank of the rows as vectors over the rationals; used to reject dependent
/// generator sets that do not span the ambient space before the membership
/// oracle would fail on them.
fn span_rank(rows: &[Vec<BigInt>]) -> usize {
    let mut m: Vec<Vec<BigRational>> = rows
        .iter()
        .map(|r| r.iter().map(|x| BigRational::from(x.clone())).collect())
        .collect();
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..cols {
        let Some(pivot) = (rank..m.len()).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, pivot);
        for r in rank + 1..m.len() {
            if m[r][col].is_zero() {
                continue;
            }
            let factor = &m[r][col] / &m[rank][col];
            for c in col..cols {
                let delta = &factor * &m[rank][c];
                m[r][c] = &m[r][c] - &delta;
            }
        }
        rank += 1;
        if rank == m.len() {
            break;
        }
    }
    rank
}

fn run_mzv_cone(
    gens: String,
    forms: String,
    theta: Option<String>,
    hmax: u64,
    force: bool,
) -> Result<Output, Failure> {
    let cmd = "mzv.cone";
    if hmax == 0 {
        return Err(Failure::Usage("--hmax must be at least 1".into()));
    }
    let gen_rows = parse_rat_rows(&gens, ';')?;
    let dim = gen_rows.first().map_or(0, Vec::len);
    if dim == 0 {
        return Err(Failure::Usage("--gens needs at least one nonempty vector".into()));
    }
    if gen_rows.iter().any(|g| g.len() != dim) {
        return Err(Failure::Usage("all generators must have the same length".into()));
    }
    if gen_rows.iter().any(|g| g.iter().all(Zero::is_zero)) {
        return Err(Failure::Usage("generators must be nonzero".into()));
    }
    let form_rows = parse_rat_rows(&forms, '|')?;
    if form_rows.is_empty() {
        return Err(Failure::Usage("--forms needs at least one form".into()));
    }
    if form_rows.iter().any(|f| f.len() != dim) {
        return Err(Failure::Usage(format!(
            "every form must have {dim} coefficients to match the generators"
        )));
    }
    let theta_echo = theta
        .clone()
        .unwrap_or_else(|| vec!["0"; dim].join(","));
    let theta_vec = match &theta {
        Some(t) => parse_rat_vec(t)?,
        None => vec![BigRational::zero(); dim],
    };
    if theta_vec.len() != dim {
        return Err(Failure::Usage(format!(
            "--theta must have {dim} entries to match the generators"
        )));
    }
    let config = json!({
        "gens": gens, "forms": forms, "theta": theta_echo, "hmax": hmax, "force": force,
    });
    let cone = RationalCone::new(dim, gen_rows);
    if !cone.is_simplicial() && span_rank(cone.generators()) < dim {
        return Err(Failure::Usage(
            "dependent generator sets must span the ambient space; drop redundant \
             generators or restate the cone inside its span"
                .into(),
        ));
    }
    let state = ConeState::new(cone, form_rows, theta_vec).map_err(|e| domain(cmd, &config, e))?;
    let result = if force {
        mzv_cone_unchecked(&state, hmax)
    } else {
        mzv_cone(&state, hmax)
    }
    .map_err(|e| domain(cmd, &config, e))?;
    Ok(Output::ok(envelope(
        cmd,
        &config,
        json!({
            "value_re": result.value.re,
            "value_im": result.value.im,
            "tail": tail_json(result.tail_bound),
            "points": result.points,
            "exact": false,
        }),
    )))
}

// ---------------------------------------------------------------------------
// braid
// ---------------------------------------------------------------------------

fn run_braid_rho(n: usize, word: String, center: i64, m: i64) -> Result<Output, Failure> {
    let cmd = "braid.rho";
    if n < 2 {
        return Err(Failure::Usage("--n must be at least 2".into()));
    }
    let config = json!({"n": n, "word": word, "center": center, "m": m});
    let parsed = parse_word(n, &word).map_err(reject_input)?;
    let base = BraidWord::new(n, parsed.letters().to_vec(), center);
    let image = rho_endo(&base, m);
    Ok(Output::ok(envelope(
        cmd,
        &config,
        json!({
            "writhe": base.writhe(),
            "image": {
                "word": image.to_string(),
                "center_exp": image.center_exp(),
                "writhe": image.writhe(),
            },
            "exact": true,
        }),
    )))
}

// ---------------------------------------------------------------------------
// repro
// ---------------------------------------------------------------------------

fn run_repro(suite: String, format: Format) -> Result<Output, Failure> {
    let reports = acceptance::run_suite(&suite).ok_or_else(|| {
        Failure::Usage(format!(
            "unknown suite {suite:?} (expected algebra, qsm, multivar, witt, mzv, braid, or all)"
        ))
    })?;
    let pass = reports.iter().all(|r| r.pass);
    let config = json!({"suite": suite, "format": format.name()});
    let text = match format {
        Format::Json => envelope(
            "repro",
            &config,
            json!({
                "pass": pass,
                "reports": serde_json::to_value(&reports).expect("reports serialize"),
            }),
        ),
        Format::Csv => {
            let mut text = format!(
                "# config: suite={suite} format=csv\nid,name,pass,seconds,budget_seconds"
            );
            for r in &reports {
                text.push_str(&format!(
                    "\n{},{},{},{:.3},{:.0}",
                    r.id, r.name, r.pass, r.seconds, r.budget_seconds
                ));
            }
            text
        }
    };
    Ok(Output { text, failed: !pass })
}
