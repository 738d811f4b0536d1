//! `qprym`: command-line front end for the period map and theta-constant checks.
//!
//! Reports go to stdout as JSON, a human summary goes to stderr. Exit codes:
//! 0 success, 1 a verification failed, 2 bad input.

mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use quartic_prym::exact::{Q, QMat};
use quartic_prym::f2geom::{self, Shape};
use quartic_prym::periods::{self, cmat6_rows};
use quartic_prym::theta::{ThetaKernel, ThetaOptions};
use quartic_prym::verify::{self, VerifyOptions, SCHEMA_VERSION};
use quartic_prym::{forms, lattice, Characteristic, Precision};
use serde_json::json;

use config::{Overrides, RunConfig};

/// Input the user has to fix; maps to exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Parser)]
#[command(name = "qprym", version, about = "Periods, theta constants and the 105-form check for 4-fold covers of P¹ branched at 8 real points")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ShapeArg {
    #[value(name = "2222")]
    Pairs,
    #[value(name = "44")]
    Halves,
}

#[derive(Clone, Copy, ValueEnum)]
enum PrecisionArg {
    Double,
    Extended,
}

#[derive(Args, Clone, Default)]
struct RunArgs {
    /// JSON or TOML file with any of: points, theta_tol, quad_tol, nodes, precision, suites, seed.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Eight strictly increasing branch points, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    points: Option<Vec<f64>>,
    #[arg(long)]
    theta_tol: Option<f64>,
    #[arg(long)]
    quad_tol: Option<f64>,
    /// Gauss–Jacobi nodes per interval before refinement.
    #[arg(long)]
    nodes: Option<usize>,
    #[arg(long, value_enum)]
    precision: Option<PrecisionArg>,
    #[arg(long)]
    seed: Option<u64>,
}

impl RunArgs {
    fn resolve(&self, suites: Option<Vec<String>>) -> Result<RunConfig, UsageError> {
        let o = Overrides {
            points: self.points.clone(),
            theta_tol: self.theta_tol,
            quad_tol: self.quad_tol,
            nodes: self.nodes,
            precision: self.precision.map(|p| match p {
                PrecisionArg::Double => Precision::Double,
                PrecisionArg::Extended => Precision::Extended,
            }),
            suites,
            seed: self.seed,
        };
        RunConfig::resolve(self.config.as_deref(), o)
    }
}

#[derive(Subcommand)]
enum Command {
    /// List the 105 pairings with coset words and translation data, or the 35 splits.
    Enum {
        #[arg(long, value_enum, default_value = "2222")]
        shape: ShapeArg,
        /// Emit JSON instead of a plain table.
        #[arg(long)]
        json: bool,
    },
    /// Period matrix, τ₁, the ball point and the period relations.
    Periods {
        #[command(flatten)]
        run: RunArgs,
        /// Also recompute with twice the nodes and report the change.
        #[arg(long)]
        refine: bool,
    },
    /// Theta constants at τ₁: the quadruple, the vanishing table, or given characteristics.
    Theta {
        #[command(flatten)]
        run: RunArgs,
        /// Characteristic as 12 comma-separated rationals, e.g. 1/2,0,...; repeatable.
        #[arg(long = "char", value_name = "M")]
        chars: Vec<String>,
    },
    /// Run verification suites; exit 1 if any check fails.
    Verify {
        #[command(flatten)]
        run: RunArgs,
        /// combinatorics, lattice, periods, theta, forms or full; repeatable.
        #[arg(long = "suite")]
        suites: Vec<String>,
        /// Skip the seeded random configurations.
        #[arg(long)]
        quick: bool,
        /// Run with a corrupted U matrix (negative control for the verifier).
        #[arg(long, hide = true)]
        corrupt_u: bool,
    },
    /// All 105 squared forms compared with the pairing polynomials.
    Map {
        #[command(flatten)]
        run: RunArgs,
    },
}

enum Outcome {
    Ok,
    Failed,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Failed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            let usage = e.downcast_ref::<UsageError>().is_some()
                || matches!(e.downcast_ref::<quartic_prym::Error>(), Some(quartic_prym::Error::Usage(_)));
            ExitCode::from(if usage { 2 } else { 1 })
        }
    }
}

fn print_json(v: &impl serde::Serialize) -> anyhow::Result<()> {
    emit(&serde_json::to_string_pretty(v)?)
}

/// Writes one line to stdout; a closed pipe (`qprym ... | head`) is not an error.
fn emit(line: &str) -> anyhow::Result<()> {
    use std::io::Write;
    match writeln!(std::io::stdout().lock(), "{line}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn run(cli: Cli) -> anyhow::Result<Outcome> {
    match cli.command {
        Command::Enum { shape, json } => cmd_enum(shape, json),
        Command::Periods { run, refine } => cmd_periods(&run.resolve(None)?, refine),
        Command::Theta { run, chars } => cmd_theta(&run.resolve(None)?, &chars),
        Command::Verify { run, suites, quick, corrupt_u } => {
            let rc = run.resolve(if suites.is_empty() { None } else { Some(suites) })?;
            cmd_verify(&rc, quick, corrupt_u)
        }
        Command::Map { run } => cmd_map(&run.resolve(None)?),
    }
}

fn cmd_enum(shape: ShapeArg, json: bool) -> anyhow::Result<Outcome> {
    match shape {
        ShapeArg::Pairs => {
            let audit = lattice::audit_table()?;
            if json {
                print_json(&json!({ "schema_version": SCHEMA_VERSION, "shape": "2222", "rows": audit }))?;
            } else {
                for a in &audit {
                    let word: Vec<String> = a.word.iter().map(|w| w.to_string()).collect();
                    emit(&format!("{}\t{}\t[{}]\t{}\t{}", a.partition, a.permutation, word.join(" "), a.delta_g, a.half_delta_class))?;
                }
            }
            eprintln!("{} pairings", audit.len());
        }
        ShapeArg::Halves => {
            let rows: Vec<_> = f2geom::enumerate_partitions(Shape::Halves);
            if json {
                let v: Vec<_> = rows
                    .iter()
                    .map(|p| match p {
                        f2geom::Partition::Halves(h) => json!({ "split": h, "class": h.class().to_string() }),
                        f2geom::Partition::Pairs(r) => json!({ "split": r }),
                    })
                    .collect();
                print_json(&json!({ "schema_version": SCHEMA_VERSION, "shape": "44", "rows": v }))?;
            } else {
                for p in &rows {
                    match p {
                        f2geom::Partition::Halves(h) => emit(&format!("{h}\t{}", h.class()))?,
                        other => emit(&other.to_string())?,
                    }
                }
            }
            eprintln!("{} splits", rows.len());
        }
    }
    Ok(Outcome::Ok)
}

fn cmd_periods(rc: &RunConfig, refine: bool) -> anyhow::Result<Outcome> {
    let pm = periods::period_matrix(&rc.cfg, &rc.tol)?;
    let tau1 = periods::tau1(&pm)?;
    let ball = periods::ball_point(&pm)?;
    let det = periods::shift_determinant(&tau1.tau);
    let refinement = if refine {
        let doubled = quartic_prym::Tolerances { nodes: rc.tol.nodes * 2, ..rc.tol };
        let pm2 = periods::period_matrix(&rc.cfg, &doubled)?;
        let delta = (0..8)
            .flat_map(|j| (0..6).map(move |k| (j, k)))
            .map(|(j, k)| (pm.alpha[j][k] - pm2.alpha[j][k]).norm() / pm2.alpha[j][k].norm().max(1e-300))
            .fold(0.0, f64::max);
        Some(json!({ "nodes": doubled.nodes, "max_relative_change": delta }))
    } else {
        None
    };
    let report = json!({
        "schema_version": SCHEMA_VERSION,
        "points": rc.cfg.points(),
        "tolerances": rc.tol,
        "periods": periods::export(&pm),
        "nodes": pm.nodes,
        "tau1": cmat6_rows(&tau1.tau),
        "checks": {
            "tau_symmetric": tau1.symmetry_residual < 1e-8,
            "im_tau_positive": tau1.min_im_eigenvalue > 0.0,
            "symmetry_residual": tau1.symmetry_residual,
            "min_im_eigenvalue": tau1.min_im_eigenvalue,
            "rho_residual": tau1.rho_residual(),
            "boundary_residual": pm.boundary_residual(),
            "rho_chain_residual": pm.rho_chain_residual(),
            "root7_residual": pm.root7_residual(),
            "alpha8_route_gap": pm.alpha8_route_gap(),
            "shift_determinant": [det.re, det.im],
        },
        "ball_point": ball,
        "refine": refinement,
    });
    print_json(&report)?;
    eprintln!(
        "τ₁: symmetry {:.2e}, min eig Im {:.3e}, ‖(τU)²+I‖ {:.2e}; ball norm {:.4e}",
        tau1.symmetry_residual,
        tau1.min_im_eigenvalue,
        tau1.rho_residual(),
        ball.norm
    );
    Ok(Outcome::Ok)
}

fn parse_characteristic(s: &str) -> Result<Characteristic, UsageError> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 12 {
        return Err(UsageError(format!("characteristic needs 12 entries, got {}", parts.len())));
    }
    let v = parts
        .iter()
        .map(|p| p.parse::<Q>().map_err(|_| UsageError(format!("cannot parse {p:?} as a rational"))))
        .collect::<Result<Vec<Q>, _>>()?;
    Ok(Characteristic::new(v))
}

fn cmd_theta(rc: &RunConfig, chars: &[String]) -> anyhow::Result<Outcome> {
    let opts = ThetaOptions::from_tolerances(&rc.tol);
    let chars = chars.iter().map(|c| parse_characteristic(c)).collect::<Result<Vec<_>, _>>()?;
    let pm = periods::period_matrix(&rc.cfg, &rc.tol)?;
    let tau1 = periods::tau1(&pm)?;
    let k = ThetaKernel::new(&tau1.tau)?;
    let values = chars
        .iter()
        .map(|m| k.theta_constant(m, &opts).map(|v| json!({ "characteristic": m, "value": [v.value.re, v.value.im], "tail_bound": v.tail_bound, "terms": v.terms })))
        .collect::<Result<Vec<_>, _>>()?;
    let quad = forms::theta_quadruple(&tau1, &opts)?;
    let cross = forms::cross_ratio_from(&rc.cfg, quad)?;
    let table = forms::vanishing_table(&tau1.tau, &opts)?;
    let c2: Vec<[f64; 2]> = quad.iter().map(|z: &Complex64| [z.re, z.im]).collect();
    print_json(&json!({
        "schema_version": SCHEMA_VERSION,
        "points": rc.cfg.points(),
        "tolerances": rc.tol,
        "quadruple": c2,
        "cross_ratio": { "lhs": [cross.lhs.re, cross.lhs.im], "rhs": cross.rhs, "residual": cross.residual,
                         "product_residual": cross.product_residual, "conjugate_residual": cross.conjugate_residual },
        "vanishing_table": table,
        "characteristics": values,
    }))?;
    eprintln!("cross-ratio residual {:.2e}; vanishing margins {:?}", cross.residual, table.margins());
    Ok(Outcome::Ok)
}

/// `U` with the sign of the swapped pair flipped.
fn corrupted_u() -> QMat {
    let mut u = lattice::u_matrix();
    u[(2, 3)] = -u[(2, 3)].clone();
    u[(3, 2)] = -u[(3, 2)].clone();
    u
}

fn cmd_verify(rc: &RunConfig, quick: bool, corrupt_u: bool) -> anyhow::Result<Outcome> {
    let o = VerifyOptions {
        cfg: rc.cfg,
        tol: rc.tol,
        seed: rc.seed,
        batches: !quick,
        u_matrix: if corrupt_u { corrupted_u() } else { lattice::u_matrix() },
    };
    let report = verify::verify(&rc.suites, &o);
    print_json(&report)?;
    for c in &report.criteria {
        eprintln!("{}", verify::summary_line(c));
    }
    Ok(if report.passed { Outcome::Ok } else { Outcome::Failed })
}

fn cmd_map(rc: &RunConfig) -> anyhow::Result<Outcome> {
    let start = std::time::Instant::now();
    let r = forms::theta_map(&rc.cfg, &rc.tol).context("theta map")?;
    let seconds = start.elapsed().as_secs_f64();
    let entries: Vec<_> = r
        .entries
        .iter()
        .map(|e| json!({ "partition": e.partition, "word": e.word, "p_ratio": e.p_ratio,
                         "t_ratio": [e.t_ratio.re, e.t_ratio.im], "residual": e.residual, "tau_path_gap": e.tau_path_gap }))
        .collect();
    print_json(&json!({
        "schema_version": SCHEMA_VERSION,
        "points": r.points,
        "tolerances": rc.tol,
        "reference": r.reference,
        "max_residual": r.max_residual,
        "max_tau_path_gap": r.max_tau_path_gap,
        "seconds": seconds,
        "entries": entries,
    }))?;
    let ok = r.max_residual < 1e-5 && r.max_tau_path_gap < 1e-6;
    eprintln!(
        "{}: max |T²ᵣ/T²₁ − Pᵣ/P₁| = {:.3e}, τ# route gap {:.2e}, {:.1}s",
        if ok { "PASS" } else { "FAIL" },
        r.max_residual,
        r.max_tau_path_gap,
        seconds
    );
    Ok(if ok { Outcome::Ok } else { Outcome::Failed })
}
