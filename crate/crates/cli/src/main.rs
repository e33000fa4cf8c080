//! Command-line front end: classification, region computation and rendering,
//! scheme verification, MISO runs, and invariant sweeps.
//!
//! Exit codes: 0 success, 1 validation error, 2 invariant or consistency
//! violation, 3 I/O error.

use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use dof_core::config::{AntennaConfig, MisoConfig};
use dof_core::geometry::rat_str;
use dof_core::regions;
use dof_core::schemes::{self, SchemeSpec};
use dof_core::simulator;
use dof_core::streams::MatrixSource;
use dof_core::PrimeField;

/// Default master seed used by every randomized command unless --seed is
/// given; fixed so that identical commands produce byte-identical output.
const DEFAULT_SEED: u64 = 24601;

#[derive(Parser)]
#[command(
    name = "dof",
    about = "Degrees-of-freedom toolkit for the two-user MIMO interference channel with delayed local CSIT",
    after_help = "Set DOF_THREADS to bound worker threads (execution is currently sequential).\nExit codes: 0 success, 1 validation error, 2 invariant violation, 3 I/O error."
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
    Svg,
}

#[derive(Subcommand)]
enum Cmd {
    /// Classify an antenna configuration and print derived parameters.
    Classify {
        m1: u32,
        m2: u32,
        n1: u32,
        n2: u32,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Compute all DoF regions, corner points, and the tightness verdict.
    Region {
        m1: u32,
        m2: u32,
        n1: u32,
        n2: u32,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run the prescribed corner scheme and verify exact decoding.
    VerifyCorner {
        m1: u32,
        m2: u32,
        n1: u32,
        n2: u32,
        /// Corner label (Q3, P3, S3, T4..T9) or "symmetric" when the class
        /// has a single prescribed corner.
        corner: String,
        #[arg(long, default_value_t = 100)]
        trials: u64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Evaluate the counting constraints and rank formulas for explicit
    /// (W, W1, W2), and check them against realized matrix ranks.
    VerifyRank {
        m1: u32,
        m2: u32,
        n1: u32,
        n2: u32,
        #[arg(long = "W", alias = "w")]
        w: u32,
        #[arg(long = "W1", alias = "w1")]
        w1: u32,
        #[arg(long = "W2", alias = "w2")]
        w2: u32,
        #[arg(long, default_value_t = 100)]
        trials: u64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run the K-user MISO interference-alignment scheme.
    Miso {
        k: u32,
        m: u32,
        #[arg(long, default_value_t = 100)]
        trials: u64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Run the full invariant suite over every configuration up to a bound;
    /// nonzero exit on any violation.
    Sweep {
        #[arg(default_value_t = 6)]
        max_antennas: u32,
        #[arg(default_value_t = 50)]
        trials: u64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
}

enum Failure {
    Validation(String),
    Invariant(String),
    Io(std::io::Error),
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

fn emit(content: &str, output: Option<&PathBuf>) -> Result<(), Failure> {
    match output {
        Some(path) => std::fs::write(path, content)?,
        None => {
            std::io::stdout().write_all(content.as_bytes())?;
            if !content.ends_with('\n') {
                println!();
            }
        }
    }
    Ok(())
}

fn config(m1: u32, m2: u32, n1: u32, n2: u32) -> Result<AntennaConfig, Failure> {
    AntennaConfig::normalize(m1, m2, n1, n2).map_err(|e| Failure::Validation(e.to_string()))
}

fn check_threads_env() -> Result<(), Failure> {
    if let Ok(v) = std::env::var("DOF_THREADS") {
        let n: u64 = v
            .parse()
            .map_err(|_| Failure::Validation(format!("DOF_THREADS must be a positive integer, got {v:?}")))?;
        if n == 0 {
            return Err(Failure::Validation("DOF_THREADS must be at least 1".into()));
        }
    }
    Ok(())
}

fn cmd_classify(m1: u32, m2: u32, n1: u32, n2: u32, format: Format) -> Result<(), Failure> {
    let cfg = config(m1, m2, n1, n2)?;
    let d = cfg.derived();
    match format {
        Format::Json => {
            let v = json!({
                "input": {"m1": m1, "m2": m2, "n1": n1, "n2": n2},
                "normalized": {"m1": cfg.m1(), "m2": cfg.m2(), "n1": cfg.n1(), "n2": cfg.n2()},
                "swapped": cfg.swapped(),
                "class": cfg.classify().label(),
                "m1_prime": cfg.m1_prime(),
                "m2_prime": cfg.m2_prime(),
                "delta": d.delta.map(rat_str),
                "delta_prime": d.delta_prime.map(rat_str),
                "lambda": d.lambda,
            });
            emit(&serde_json::to_string_pretty(&v).unwrap(), None)
        }
        _ => {
            println!("class: {}", cfg.classify().label());
            println!(
                "normalized (M1,M2,N1,N2) = ({},{},{},{}){}",
                cfg.m1(),
                cfg.m2(),
                cfg.n1(),
                cfg.n2(),
                if cfg.swapped() { " [users swapped]" } else { "" }
            );
            println!("M1' = {}, M2' = {}", cfg.m1_prime(), cfg.m2_prime());
            println!(
                "delta = {}, delta' = {}, lambda = {}",
                d.delta.map(rat_str).unwrap_or_else(|| "undefined".into()),
                d.delta_prime.map(rat_str).unwrap_or_else(|| "undefined".into()),
                d.lambda
            );
            Ok(())
        }
    }
}

fn cmd_region(
    m1: u32,
    m2: u32,
    n1: u32,
    n2: u32,
    format: Format,
    output: Option<&PathBuf>,
) -> Result<(), Failure> {
    let cfg = config(m1, m2, n1, n2)?;
    let b = regions::bundle(&cfg).map_err(|e| Failure::Invariant(e.to_string()))?;
    match format {
        Format::Svg => emit(&b.to_svg(), output),
        Format::Json => emit(&serde_json::to_string_pretty(&b.to_json()).unwrap(), output),
        Format::Csv => Err(Failure::Validation("region has no CSV form; use json, svg, or text".into())),
        Format::Text => {
            let mut s = String::new();
            s.push_str(&format!(
                "class {} — {}\n",
                b.class.label(),
                if b.tight {
                    format!(
                        "achievable region is TIGHT (case {})",
                        b.tightness_case.map(|c| c.label()).unwrap_or("?")
                    )
                } else {
                    "achievable region does NOT meet the outer bound".into()
                }
            ));
            for (name, poly) in [
                ("achievable", &b.achievable),
                ("outer", &b.outer),
                ("perfect CSIT", &b.perfect_csit),
                ("BC delayed", &b.bc_delayed),
                ("no CSIT", &b.no_csit),
            ] {
                let vs: Vec<String> = poly
                    .vertices()
                    .iter()
                    .map(|p| format!("({}, {})", rat_str(p.d1), rat_str(p.d2)))
                    .collect();
                s.push_str(&format!("{name}: {}\n", vs.join(" ")));
            }
            for (label, p) in &b.corner_points {
                s.push_str(&format!("corner {label} = ({}, {})\n", rat_str(p.d1), rat_str(p.d2)));
            }
            emit(&s, output)
        }
    }
}

fn resolve_corner(cfg: &AntennaConfig, corner: &str) -> Result<SchemeSpec, Failure> {
    let label = if corner == "symmetric" {
        let labels = schemes::scheme_labels(cfg.classify());
        match labels.as_slice() {
            [only] => only.to_string(),
            _ => {
                return Err(Failure::Validation(format!(
                    "\"symmetric\" is ambiguous for class {}; choose one of {:?}",
                    cfg.classify().label(),
                    labels
                )))
            }
        }
    } else {
        corner.to_string()
    };
    schemes::corner_scheme(cfg, &label).map_err(|e| Failure::Validation(e.to_string()))
}

fn cmd_verify_corner(
    m1: u32,
    m2: u32,
    n1: u32,
    n2: u32,
    corner: &str,
    trials: u64,
    seed: u64,
    format: Format,
    output: Option<&PathBuf>,
) -> Result<(), Failure> {
    let cfg = config(m1, m2, n1, n2)?;
    let spec = resolve_corner(&cfg, corner)?;
    if format == Format::Csv {
        let mut s = String::from(simulator::TrialReport::csv_header());
        s.push('\n');
        for i in 0..trials {
            s.push_str(&simulator::run_scheme(&spec, seed.wrapping_add(i)).csv_row());
            s.push('\n');
        }
        return emit(&s, output);
    }
    let agg = simulator::monte_carlo(&spec, trials, seed);
    let content = match format {
        Format::Json => {
            let v = json!({
                "config": {"m1": cfg.m1(), "m2": cfg.m2(), "n1": cfg.n1(), "n2": cfg.n2()},
                "class": cfg.classify().label(),
                "corner": spec.corner,
                "w": spec.w, "w1": spec.w1, "w2": spec.w2,
                "target_dof": {"d1": rat_str(spec.point.d1), "d2": rat_str(spec.point.d2)},
                "aggregate": agg.to_json(),
            });
            serde_json::to_string_pretty(&v).unwrap()
        }
        _ => format!(
            "corner {} of class {}: W={}, W1={}, W2={}\n\
             decode rate rx1 = {}/{t}, rx2 = {}/{t}\n\
             achieved DoF: {}\n",
            spec.corner,
            cfg.classify().label(),
            spec.w,
            spec.w1,
            spec.w2,
            agg.decoded[0],
            agg.decoded[1],
            match agg.dof {
                Some(p) => format!("({}, {})", rat_str(p.d1), rat_str(p.d2)),
                None => format!("not achieved; failing seeds {:?}", agg.failing_seeds),
            },
            t = trials,
        ),
    };
    emit(&content, output)?;
    if !agg.all_decoded() {
        return Err(Failure::Invariant(format!(
            "prescribed corner scheme failed to decode; failing seeds {:?}",
            agg.failing_seeds
        )));
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_verify_rank(
    m1: u32,
    m2: u32,
    n1: u32,
    n2: u32,
    w: u32,
    w1: u32,
    w2: u32,
    trials: u64,
    seed: u64,
    format: Format,
    output: Option<&PathBuf>,
) -> Result<(), Failure> {
    let cfg = config(m1, m2, n1, n2)?;
    if w == 0 || w1 == 0 || w2 == 0 || w1 > w || w2 > w {
        return Err(Failure::Validation(format!(
            "need 1 <= W1,W2 <= W; got W={w}, W1={w1}, W2={w2}"
        )));
    }
    let spec = SchemeSpec::generic(cfg, w, w1, w2);
    let (l1, r1, l2, r2) = schemes::count_constraints(&spec);
    let (c1, c2) = schemes::rank_condition(&spec);
    let terms = [schemes::rank_terms(&spec, 1), schemes::rank_terms(&spec, 2)];
    // Check the closed form against realized matrix ranks.
    let mut mismatches: Vec<(u64, usize, usize, u64)> = Vec::new();
    for i in 0..trials {
        let s = seed.wrapping_add(i);
        let src = MatrixSource::new(s);
        for rx in 1..=2usize {
            let p = schemes::build_coefficient_matrix::<PrimeField>(&spec, rx, &src).unwrap();
            let rank = p.matrix.rank();
            if rank as u64 != terms[rx - 1].predicted_rank {
                mismatches.push((s, rx, rank, terms[rx - 1].predicted_rank));
            }
        }
    }
    let content = match format {
        Format::Json => {
            let per_rx: Vec<_> = terms
                .iter()
                .zip([c1, c2])
                .map(|(t, cond)| {
                    json!({
                        "r1": t.r1, "r2": t.r2, "r3": t.r3,
                        "unknowns": t.unknowns,
                        "predicted_rank": t.predicted_rank,
                        "rank_condition": cond,
                    })
                })
                .collect();
            serde_json::to_string_pretty(&json!({
                "counting": {"lhs1": l1, "rhs1": r1, "lhs2": l2, "rhs2": r2,
                             "holds": l1 <= r1 && l2 <= r2},
                "receivers": per_rx,
                "trials": trials,
                "rank_mismatches": mismatches.len(),
            }))
            .unwrap()
        }
        _ => {
            let mut s = format!(
                "counting: {l1} <= {r1} {} ; {l2} <= {r2} {}\n",
                if l1 <= r1 { "OK" } else { "VIOLATED" },
                if l2 <= r2 { "OK" } else { "VIOLATED" }
            );
            for (rx, (t, cond)) in terms.iter().zip([c1, c2]).enumerate() {
                s.push_str(&format!(
                    "receiver {}: r1+r2+r3 = {}+{}+{} = {}, unknowns = {}, predicted rank = {} — rank condition {}\n",
                    rx + 1,
                    t.r1,
                    t.r2,
                    t.r3,
                    t.r1 + t.r2 + t.r3,
                    t.unknowns,
                    t.predicted_rank,
                    if cond { "HOLDS" } else { "FAILS" }
                ));
            }
            s.push_str(&format!(
                "realized ranks matched the prediction in {}/{} trials x 2 receivers\n",
                trials * 2 - mismatches.len() as u64,
                trials * 2
            ));
            s
        }
    };
    emit(&content, output)?;
    if !mismatches.is_empty() {
        let (s, rx, got, want) = mismatches[0];
        return Err(Failure::Invariant(format!(
            "rank formula mismatch at seed {s}, receiver {rx}: realized {got}, predicted {want}"
        )));
    }
    Ok(())
}

fn cmd_miso(k: u32, m: u32, trials: u64, seed: u64, format: Format) -> Result<(), Failure> {
    let mc = MisoConfig::new(k, m).map_err(|e| Failure::Validation(e.to_string()))?;
    let (achievable, upper) = regions::miso_bounds(&mc);
    let agg = simulator::monte_carlo_miso(&mc, trials, seed);
    match format {
        Format::Json => {
            let v = json!({
                "k": k, "m": m,
                "sum_dof": rat_str(achievable),
                "upper_bound": rat_str(upper),
                "aggregate": agg.to_json(),
            });
            emit(&serde_json::to_string_pretty(&v).unwrap(), None)?;
        }
        _ => {
            println!(
                "K = {k}, M = {m}: sum-DoF {} over {} slots per block, upper bound {}",
                rat_str(achievable),
                k * k - k + 1,
                rat_str(upper)
            );
            println!(
                "decoded all {} users in {}/{} trials",
                k,
                agg.decoded.iter().min().copied().unwrap_or(0),
                trials
            );
        }
    }
    if !agg.all_decoded() {
        return Err(Failure::Invariant(format!(
            "MISO scheme failed to decode; failing seeds {:?}",
            agg.failing_seeds
        )));
    }
    Ok(())
}

fn cmd_sweep(max_antennas: u32, trials: u64, seed: u64) -> Result<(), Failure> {
    let mut configs = 0u64;
    let mut corners = 0u64;
    let mut violations: Vec<String> = Vec::new();
    for m1 in 1..=max_antennas {
        for m2 in 1..=max_antennas {
            for n1 in 1..=max_antennas {
                for n2 in 1..=max_antennas {
                    let cfg = config(m1, m2, n1, n2)?;
                    configs += 1;
                    let b = match regions::bundle(&cfg) {
                        Ok(b) => b,
                        Err(e) => {
                            violations.push(e.to_string());
                            continue;
                        }
                    };
                    if !b.no_csit.subset_of(&b.achievable)
                        || !b.achievable.subset_of(&b.outer)
                        || !b.outer.subset_of(&b.perfect_csit)
                    {
                        violations.push(format!("{cfg:?}: region inclusion chain broken"));
                    }
                    for label in schemes::scheme_labels(cfg.classify()) {
                        let Ok(spec) = schemes::corner_scheme(&cfg, label) else { continue };
                        corners += 1;
                        if spec.is_generic_like() && schemes::rank_condition(&spec) != (true, true) {
                            violations.push(format!("{cfg:?} {label}: rank condition fails"));
                            continue;
                        }
                        let agg = simulator::monte_carlo(&spec, trials, seed);
                        if !agg.all_decoded() {
                            violations.push(format!(
                                "{cfg:?} {label}: decode failures at seeds {:?}",
                                agg.failing_seeds
                            ));
                        } else if agg.dof != Some(spec.point) {
                            violations.push(format!("{cfg:?} {label}: achieved DoF differs"));
                        }
                    }
                }
            }
        }
    }
    println!(
        "swept {configs} configurations, {corners} corner schemes, {trials} trials each: {} violations",
        violations.len()
    );
    for v in violations.iter().take(20) {
        println!("  {v}");
    }
    if !violations.is_empty() {
        return Err(Failure::Invariant(format!("{} sweep violations", violations.len())));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    check_threads_env()?;
    match cli.cmd {
        Cmd::Classify { m1, m2, n1, n2, format } => cmd_classify(m1, m2, n1, n2, format),
        Cmd::Region { m1, m2, n1, n2, format, output } => {
            cmd_region(m1, m2, n1, n2, format, output.as_ref())
        }
        Cmd::VerifyCorner { m1, m2, n1, n2, corner, trials, seed, format, output } => {
            cmd_verify_corner(m1, m2, n1, n2, &corner, trials, seed, format, output.as_ref())
        }
        Cmd::VerifyRank { m1, m2, n1, n2, w, w1, w2, trials, seed, format, output } => {
            cmd_verify_rank(m1, m2, n1, n2, w, w1, w2, trials, seed, format, output.as_ref())
        }
        Cmd::Miso { k, m, trials, seed, format } => cmd_miso(k, m, trials, seed, format),
        Cmd::Sweep { max_antennas, trials, seed } => cmd_sweep(max_antennas, trials, seed),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Invariant(msg)) => {
            eprintln!("invariant violation: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Io(e)) => {
            eprintln!("I/O error: {e}");
            ExitCode::from(3)
        }
    }
}
