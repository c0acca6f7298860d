//! Command-line front end. Every subcommand writes one JSON document (or a
//! CSV table for `sweep --out csv`) to the output stream.

use std::f64::consts::TAU;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use holodisc_core::discs::{self, GeodesicParams};
use holodisc_core::domain::{self, DomainParams, Point2, DEFAULT_EPSILON};
use holodisc_core::kobayashi;
use holodisc_core::rhfactor::{self, Side};
use holodisc_core::solver;
use holodisc_core::stationary::{self, LiftedDisc};
use holodisc_core::{Complex64, Error};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::format::{self, number};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Boundary samples used by `verify-geodesic`.
const GEODESIC_SAMPLES: usize = 1024;

#[derive(Debug, Parser)]
#[command(name = "holodisc", version, about = "Holomorphic discs in the domains Omega_lambda")]
struct Cli {
    /// Size parameter of the domain.
    #[arg(long, global = true, default_value_t = DEFAULT_EPSILON, allow_negative_numbers = true)]
    eps: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Convention {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SweepFormat {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Checks the geodesic through (0,0) and (z0,z1) with z0 = x0 e^{i theta0}.
    #[command(allow_negative_numbers = true)]
    VerifyGeodesic {
        #[arg(long)]
        theta0: f64,
        #[arg(long)]
        x0: f64,
        #[arg(long)]
        z1_re: f64,
        #[arg(long)]
        z1_im: f64,
        #[arg(long)]
        b_re: f64,
        #[arg(long)]
        b_im: f64,
    },
    /// Kobayashi distance from the origin with independent bounds.
    #[command(allow_negative_numbers = true)]
    Distance {
        #[arg(long)]
        z0_re: f64,
        #[arg(long)]
        z0_im: f64,
        #[arg(long)]
        z1_re: f64,
        #[arg(long)]
        z1_im: f64,
    },
    /// Searches for the largest disc through the origin in a fixed direction.
    #[command(allow_negative_numbers = true)]
    Extremal {
        #[arg(long)]
        c: f64,
        #[arg(long)]
        z0_re: f64,
        #[arg(long)]
        z0_im: f64,
        #[arg(long)]
        degree: usize,
        #[arg(long)]
        budget: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
    },
    /// Decides whether the disc stored in a JSON file is stationary.
    #[command(allow_negative_numbers = true)]
    StationaryTest {
        #[arg(long)]
        disc_file: PathBuf,
        #[arg(long)]
        lambda: f64,
        /// Degree of the real multiplier; defaults to 2N+2.
        #[arg(long)]
        multiplier_degree: Option<usize>,
        /// Boundary samples; defaults to 8(N+K).
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Partial indices and Maslov index of the linearized problem at the axis.
    #[command(allow_negative_numbers = true)]
    Indices {
        #[arg(long)]
        lambda: f64,
        #[arg(long, default_value_t = rhfactor::DEFAULT_TRUNCATION)]
        truncation: usize,
        #[arg(long, default_value_t = rhfactor::DEFAULT_RANK_TOL)]
        rank_tol: f64,
        /// `left` factors Theta A = Lambda conj(Theta), `right` factors A = A_- Lambda A_+.
        #[arg(long, value_enum, default_value_t = Convention::Left)]
        convention: Convention,
    },
    /// Solves for the stationary lift near the axis with eight pinned coordinates.
    #[command(allow_negative_numbers = true)]
    Solve {
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        pins_file: PathBuf,
        #[arg(long, default_value_t = solver::DEFAULT_DEGREE)]
        degree: usize,
        #[arg(long, default_value_t = solver::DEFAULT_TOL)]
        tol: f64,
    },
    /// Tangent dimension and smallest partial index on a grid of lambdas.
    #[command(allow_negative_numbers = true)]
    Sweep {
        #[arg(long)]
        lambda_min: f64,
        #[arg(long)]
        lambda_max: f64,
        /// Number of intervals; the grid has steps + 1 points.
        #[arg(long)]
        steps: usize,
        #[arg(long, value_enum)]
        out: SweepFormat,
        #[arg(long, default_value_t = solver::DEFAULT_DEGREE)]
        degree: usize,
    },
}

/// Parses `args` (program name first), runs the subcommand and returns the
/// exit code: 0 on success, 2 on invalid input, 3 on numerical failure.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    match execute(&cli) {
        Ok(text) => match writeln!(out, "{text}") {
            Ok(()) => EXIT_OK,
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                EXIT_INVALID
            }
        },
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &anyhow::Error) -> i32 {
    match e.downcast_ref::<Error>() {
        Some(core) if core.is_numerical() => EXIT_NUMERICAL,
        _ => EXIT_INVALID,
    }
}

fn execute(cli: &Cli) -> Result<String> {
    let eps = cli.eps;
    let doc = match &cli.command {
        Command::VerifyGeodesic { theta0, x0, z1_re, z1_im, b_re, b_im } => verify_geodesic(
            eps,
            &GeodesicParams::new(*theta0, *x0, Complex64::new(*z1_re, *z1_im), Complex64::new(*b_re, *b_im)),
        )?,
        Command::Distance { z0_re, z0_im, z1_re, z1_im } => {
            distance(eps, Complex64::new(*z0_re, *z0_im), Complex64::new(*z1_re, *z1_im))?
        }
        Command::Extremal { c, z0_re, z0_im, degree, budget, seed, lambda } => {
            let params = DomainParams::new(eps, *lambda)?;
            let z0 = Complex64::new(*z0_re, *z0_im);
            let report = kobayashi::extremal_search(&params, *c, z0, *degree, *budget, *seed)?;
            format::extremal_to_json(&report)
        }
        Command::StationaryTest { disc_file, lambda, multiplier_degree, samples } => {
            stationary_test(eps, *lambda, disc_file, *multiplier_degree, *samples)?
        }
        Command::Indices { lambda, truncation, rank_tol, convention } => {
            DomainParams::new(eps, *lambda)?;
            let side = match convention {
                Convention::Left => Side::Left,
                Convention::Right => Side::Right,
            };
            let symbol = rhfactor::build_symbol_a(*lambda);
            let report = rhfactor::partial_indices(&symbol, *truncation, *rank_tol, side)?;
            let mut doc = format::index_report_to_json(*lambda, &report);
            doc["globevnik"] = json!(rhfactor::globevnik_criterion(&report));
            doc
        }
        Command::Solve { lambda, pins_file, degree, tol } => {
            let params = DomainParams::new(eps, *lambda)?;
            let pins = format::pins_from_json(&read_json(pins_file)?)?;
            let m = solver::default_collocation(*degree);
            let report = solver::solve_near(&params, &LiftedDisc::axis(), &pins, *degree, m, *tol)?;
            format::solve_report_to_json(*lambda, &report)
        }
        Command::Sweep { lambda_min, lambda_max, steps, out, degree } => {
            let rows = sweep(eps, *lambda_min, *lambda_max, *steps, *degree)?;
            return match out {
                SweepFormat::Csv => Ok(format::sweep_to_csv(&rows)?.trim_end().to_owned()),
                SweepFormat::Json => Ok(format::to_json_string(&Value::Array(
                    rows.iter().map(format::sweep_row_to_json).collect(),
                ))),
            };
        }
    };
    Ok(format::to_json_string(&doc))
}

fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn point(p: &Point2) -> Value {
    json!([format::complex(p.z), format::complex(p.w)])
}

fn verify_geodesic(eps: f64, g: &GeodesicParams) -> Result<Value> {
    let params = DomainParams::new(eps, 1.0)?;
    let disc = discs::disc_geodesic(eps, g)?;
    let residual = discs::boundary_residual(&params, &disc, GEODESIC_SAMPLES)?;
    let z0 = g.z0();
    let origin = disc.eval(Complex64::new(0.0, 0.0))?;
    let at_x0 = disc.eval(Complex64::new(g.x0, 0.0))?;
    let interpolation_error = at_x0.dist(&Point2::new(z0, g.z1));
    let (z1, b) = discs::recover_params(&disc, z0)?;
    let roundtrip_error = (z1 - g.z1).norm().max((b - g.b).norm());
    Ok(json!({
        "boundary_residual": number(residual),
        "f_origin": point(&origin),
        "f_x0": point(&at_x0),
        "interpolation_error": number(interpolation_error),
        "recovered": { "z1": format::complex(z1), "b": format::complex(b) },
        "roundtrip_error": number(roundtrip_error),
        "disc": format::disc_to_json(&disc),
    }))
}

fn distance(eps: f64, z0: Complex64, z1: Complex64) -> Result<Value> {
    let params = DomainParams::new(eps, 1.0)?;
    let exact = kobayashi::distance_from_origin(&params, z0, z1)?;
    let target = Point2::new(z0, z1);
    let lower = kobayashi::bound_via_projection(&params, &Point2::default(), &target)?;
    let upper = geodesic_upper_bound(eps, &params, z0, z1);
    let (upper_value, upper_error) = match upper {
        Ok(u) => (number(u), Value::Null),
        Err(e) => (Value::Null, json!(format!("{e}"))),
    };
    Ok(json!({
        "distance": number(exact),
        "lower_bound": number(lower),
        "upper_bound": upper_value,
        "upper_bound_error": upper_error,
    }))
}

/// Upper bound from the geodesic through the two points whose free parameter
/// `b` is the smallest one making the chart coordinate real.
fn geodesic_upper_bound(eps: f64, params: &DomainParams, z0: Complex64, z1: Complex64) -> Result<f64> {
    let x0 = z0.norm();
    let theta0 = z0.arg().rem_euclid(TAU);
    let theta0 = if theta0 >= TAU { 0.0 } else { theta0 };
    let ratio = z1 / (z0 * z0);
    let b = Complex64::new(0.0, -ratio.im / (1.0 - x0.powi(4)));
    let disc = discs::disc_geodesic(eps, &GeodesicParams::new(theta0, x0, z1, b))?;
    let reached = disc.eval(Complex64::new(x0, 0.0))?;
    if reached.dist(&Point2::new(z0, z1)) > 1e-12 {
        return Err(anyhow!("geodesic misses the target point"));
    }
    Ok(kobayashi::bound_via_disc(params, &disc, Complex64::new(0.0, 0.0), Complex64::new(x0, 0.0))?)
}

fn stationary_test(
    eps: f64,
    lambda: f64,
    path: &Path,
    multiplier_degree: Option<usize>,
    samples: Option<usize>,
) -> Result<Value> {
    let params = DomainParams::new(eps, lambda)?;
    let disc = format::disc_from_json(&read_json(path)?)?;
    let n = disc.degree();
    let k = multiplier_degree.unwrap_or_else(|| stationary::default_multiplier_degree(n));
    let m = samples.unwrap_or_else(|| stationary::min_samples(n, k));
    let attachment = discs::boundary_residual(&params, &disc, m.max(4 * n + 1))?;
    let outcome = stationary::stationarity_test_fourier(&params, &disc, m, k)?;
    let origin_inside = domain::in_domain(&params, &disc.eval(Complex64::new(0.0, 0.0))?);
    Ok(json!({
        "lambda": number(lambda),
        "is_stationary": outcome.is_stationary,
        "residual": number(outcome.residual),
        "attachment_residual": number(attachment),
        "center_in_domain": origin_inside,
        "multiplier_degree": k,
        "samples": m,
        "multiplier": format::multiplier_to_json(&outcome.multiplier),
    }))
}

/// Grid `lambda_i = min + (max - min) i / steps`, evaluated in parallel and
/// returned in grid order.
fn sweep(eps: f64, lo: f64, hi: f64, steps: usize, degree: usize) -> Result<Vec<solver::SweepRow>> {
    DomainParams::new(eps, lo)?;
    DomainParams::new(eps, hi)?;
    if lo > hi {
        return Err(anyhow!("invalid parameter lambda-min: must not exceed lambda-max"));
    }
    if degree == 0 {
        return Err(anyhow!("invalid parameter degree: must be at least 1"));
    }
    let lambdas: Vec<f64> = if steps == 0 {
        vec![lo]
    } else {
        (0..=steps).map(|i| lo + (hi - lo) * i as f64 / steps as f64).collect()
    };
    let m = solver::default_collocation(degree);
    Ok(lambdas
        .par_iter()
        .map(|&l| solver::sweep_point(eps, l, degree, m))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("holodisc").chain(args.iter().copied());
        let code = run(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn unknown_flag_is_a_usage_error() {
        let (code, out, err) = run_str(&["distance", "--bogus", "1"]);
        assert_eq!(code, EXIT_INVALID);
        assert!(out.is_empty());
        assert!(err.contains("Usage"));
    }

    #[test]
    fn help_goes_to_output() {
        let (code, out, _) = run_str(&["--help"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("verify-geodesic"));
    }

    #[test]
    fn invalid_parameter_exits_two() {
        let (code, _, err) = run_str(&["distance", "--z0-re", "1.5", "--z0-im", "0", "--z1-re", "0", "--z1-im", "0"]);
        assert_eq!(code, EXIT_INVALID);
        assert!(err.contains("z0"));
    }

    #[test]
    fn numerical_failure_exits_three() {
        let (code, _, err) = run_str(&["indices", "--lambda", "1", "--rank-tol", "0.5"]);
        assert_eq!(code, EXIT_NUMERICAL, "{err}");
    }

    #[test]
    fn negative_eps_is_rejected() {
        let (code, _, _) = run_str(&["--eps", "-1", "distance", "--z0-re", "0.5", "--z0-im", "0", "--z1-re", "0", "--z1-im", "0"]);
        assert_eq!(code, EXIT_INVALID);
    }

    #[test]
    fn sweep_grid_is_ordered() {
        let rows = sweep(0.01, 0.0, 0.5, 2, 4).unwrap();
        let lambdas: Vec<f64> = rows.iter().map(|r| r.lambda).collect();
        assert_eq!(lambdas, vec![0.0, 0.25, 0.5]);
        assert!(sweep(0.01, 0.5, 0.0, 2, 4).is_err());
    }
}
