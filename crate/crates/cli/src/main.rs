//! `floatberg` command-line front end.
//!
//! Exit status: 0 on success, 1 when a check is violated or a computation
//! fails, 2 on invalid input.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use floatberg::floating::{build, default_directions, direction_grid};
use floatberg::invariants::{
    affine_invariance_check, blocki_consequence_check, nazarov_check, sandwich_check,
    theta_estimate,
};
use floatberg::report::{
    cuts_csv, floating_figure, kernel_csv, nested_figure, sandwich_csv, scheme_figure, sci,
    square_octant, theta_csv,
};
use floatberg::{kernel, Body, Direction, Error, Matrix, Point, QuadratureConfig};

#[derive(Parser)]
#[command(name = "floatberg", version, about = "Convex floating bodies and tube-domain Bergman kernels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Bergman kernel values at given points.
    Kernel {
        #[command(flatten)]
        common: Common,
        /// Comma-separated coordinates; repeat for several points.
        #[arg(long = "point", value_parser = parse_list, required = true)]
        points: Vec<Vec<f64>>,
    },
    /// Cuts and barycenters of the floating body model.
    Floatbody {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        delta: f64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Boundary extrema of δ²K and the extrapolated invariant θ.
    Theta {
        #[command(flatten)]
        common: Common,
        /// Comma-separated, strictly descending.
        #[arg(long, value_delimiter = ',', required = true)]
        deltas: Vec<f64>,
    },
    /// Sandwich, lower-bound, Nazarov, Santaló and equivariance checks.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// SVG figures: 1 cut scheme, 2 floating body, 3 nested triangles.
    Figure {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(1..=3))]
        figure: u8,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Svg,
}

#[derive(Args)]
struct Common {
    /// Body JSON file.
    #[arg(long)]
    body: PathBuf,
    /// Direction count (720 in the plane, 2000 in space by default).
    #[arg(long)]
    directions: Option<usize>,
    /// Relative kernel tolerance.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Truncation tolerance.
    #[arg(long, default_value_t = 1e-14)]
    trunc: f64,
    #[arg(long = "max-subdiv", default_value_t = 40)]
    max_subdiv: u32,
    /// Gauss–Legendre nodes per panel.
    #[arg(long, default_value_t = 32)]
    nodes: usize,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}")))
        .collect()
}

/// A failure with its exit status.
struct Failure {
    code: u8,
    message: String,
}

fn input(field: &str, e: impl std::fmt::Display) -> Failure {
    Failure {
        code: 2,
        message: format!("{field}: {e}"),
    }
}

/// Library errors: invalid inputs exit with 2, numerical failures with 1.
fn library(field: &str, e: Error) -> Failure {
    let code = match e {
        Error::QuadratureNotConverged { .. }
        | Error::TooManyFlagged { .. }
        | Error::IndeterminateAtTolerance { .. } => 1,
        _ => 2,
    };
    Failure {
        code,
        message: format!("{field}: {e}"),
    }
}

struct Context {
    body: Body,
    cfg: QuadratureConfig,
    directions: Vec<Direction>,
    out: Option<PathBuf>,
}

fn context(c: &Common) -> Result<Context, Failure> {
    let text = fs::read_to_string(&c.body).map_err(|e| input("--body", e))?;
    let body = Body::from_json(&text).map_err(|e| input("--body", e))?;
    let cfg = QuadratureConfig {
        rel_tol: c.tol,
        trunc_tol: c.trunc,
        max_subdivisions: c.max_subdiv,
        base_nodes: c.nodes,
    };
    cfg.validate().map_err(|e| input("--tol/--trunc/--max-subdiv/--nodes", e))?;
    let n = body.dim();
    let directions = match c.directions {
        Some(k) => direction_grid(n, k),
        None => default_directions(n),
    }
    .map_err(|e| input("--directions", e))?;
    Ok(Context {
        body,
        cfg,
        directions,
        out: c.out.clone(),
    })
}

fn check_delta(body: &Body, delta: f64) -> Result<(), Failure> {
    let max = 0.5 * body.volume();
    if !(delta > 0.0 && delta <= max) {
        return Err(input("--delta", Error::DeltaOutOfRange { delta, max }));
    }
    Ok(())
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => write_file(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn write_file(p: &Path, text: &str) -> Result<(), Failure> {
    fs::write(p, text).map_err(|e| input("--out", e))
}

fn run_kernel(ctx: &Context, points: &[Vec<f64>]) -> Result<(), Failure> {
    let n = ctx.body.dim();
    let mut rows = Vec::with_capacity(points.len());
    for p in points {
        if p.len() != n {
            return Err(input(
                "--point",
                Error::DimensionMismatch {
                    expected: n,
                    got: p.len(),
                },
            ));
        }
        let x = Point::from_column_slice(p);
        let k = kernel(&ctx.body, &x, &ctx.cfg).map_err(|e| library("--point", e))?;
        rows.push((x, k.value, k.error));
    }
    emit(&ctx.out, &kernel_csv(&rows))
}

fn run_floatbody(ctx: &Context, delta: f64, format: Format) -> Result<(), Failure> {
    check_delta(&ctx.body, delta)?;
    let fba = build(&ctx.body, delta, &ctx.directions).map_err(|e| library("--delta", e))?;
    let text = match format {
        Format::Csv => cuts_csv(&fba),
        Format::Svg => floating_svg(&fba)?,
    };
    emit(&ctx.out, &text)
}

fn floating_svg(fba: &floatberg::FloatingBodyApprox) -> Result<String, Failure> {
    let highlight = fba.body == Body::unit_square();
    floating_figure(fba, |b| highlight && square_octant(b)).map_err(|e| input("--body", e))
}

fn run_theta(ctx: &Context, deltas: &[f64]) -> Result<(), Failure> {
    if deltas.is_empty() {
        return Err(input("--deltas", "at least one value is required"));
    }
    let r = theta_estimate(&ctx.body, deltas, &ctx.directions, &ctx.cfg)
        .map_err(|e| library("--deltas", e))?;
    emit(&ctx.out, &theta_csv(&r))
}

/// `check,delta,value,bound,status` rows; returns whether everything held.
fn run_verify(ctx: &Context, delta: f64, samples: usize, seed: u64) -> Result<bool, Failure> {
    check_delta(&ctx.body, delta)?;
    let body = &ctx.body;
    let n = body.dim();
    let mut rows = Vec::new();
    let mut ok = true;
    let mut row = |name: &str, value: f64, bound: f64, pass: bool| {
        ok &= pass;
        rows.push(format!(
            "{name},{},{},{},{}",
            sci(delta),
            sci(value),
            sci(bound),
            if pass { "pass" } else { "fail" }
        ));
    };
    let s = sandwich_check(body, delta, &ctx.directions, &ctx.cfg, samples, seed)
        .map_err(|e| library("--delta", e))?;
    row("sandwich_violations_lower", s.violations_lower as f64, 0.0, s.violations_lower == 0);
    row("sandwich_violations_upper", s.violations_upper as f64, 0.0, s.violations_upper == 0);
    row("sandwich_worst_margin", s.worst_margin(), 1.0, s.worst_margin() >= 1.0);
    let b = blocki_consequence_check(body, delta, &ctx.directions, &ctx.cfg)
        .map_err(|e| library("--delta", e))?;
    row("blocki_min_scaled_kernel", b.min_scaled, b.bound, b.holds());
    if body.is_origin_symmetric() {
        let r = nazarov_check(body, &ctx.cfg).map_err(|e| library("--body", e))?;
        row("nazarov_ratio", r.ratio, 1.0, r.holds());
        row("santalo_product", r.santalo_product, r.santalo_bound, r.santalo_holds());
    }
    let mut maps = vec![("affine_scale2", Matrix::identity(n, n) * 2.0)];
    if n >= 2 {
        let mut shear = Matrix::identity(n, n);
        shear[(0, 1)] = 0.5;
        maps.push(("affine_shear", shear));
    }
    for (name, a) in maps {
        let r = affine_invariance_check(body, &a, &Point::zeros(n), delta, &ctx.directions, &ctx.cfg)
            .map_err(|e| library("--delta", e))?;
        row(&format!("{name}_kernel"), r.kernel_deviation, r.kernel_tolerance, r.kernel_deviation <= r.kernel_tolerance);
        row(&format!("{name}_radial_gap"), r.radial_gap, r.gap_tolerance, r.radial_gap <= r.gap_tolerance);
    }
    let mut text = String::from("check,delta,value,bound,status\n");
    for r in &rows {
        text.push_str(r);
        text.push('\n');
    }
    emit(&ctx.out, &text)?;
    if let Some(p) = &ctx.out {
        let sandwich = p.with_extension("sandwich.csv");
        write_file(&sandwich, &sandwich_csv(&[s]))?;
    }
    Ok(ok)
}

fn run_figure(ctx: &Context, delta: f64, figure: u8) -> Result<(), Failure> {
    if ctx.body.dim() != 2 {
        return Err(input("--body", Error::UnsupportedDimension(ctx.body.dim())));
    }
    check_delta(&ctx.body, delta)?;
    let svg = match figure {
        1 => {
            let down = Direction::from_slice(&[0.0, -1.0]).expect("unit vector");
            scheme_figure(&ctx.body, &down, delta).map_err(|e| library("--delta", e))?
        }
        2 => {
            let fba = build(&ctx.body, delta, &ctx.directions).map_err(|e| library("--delta", e))?;
            floating_svg(&fba)?
        }
        _ => nested_figure(delta).map_err(|e| input("--delta", e))?,
    };
    emit(&ctx.out, &svg)
}

fn configure_threads() -> Result<(), Failure> {
    if let Ok(v) = std::env::var("FLOATBERG_THREADS") {
        let k: usize = v
            .parse()
            .ok()
            .filter(|&k| k > 0)
            .ok_or_else(|| input("FLOATBERG_THREADS", format!("expected a positive integer, got {v:?}")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| input("FLOATBERG_THREADS", e))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool, Failure> {
    configure_threads()?;
    match cli.command {
        Command::Kernel { common, points } => run_kernel(&context(&common)?, &points).map(|_| true),
        Command::Floatbody {
            common,
            delta,
            format,
        } => run_floatbody(&context(&common)?, delta, format).map(|_| true),
        Command::Theta { common, deltas } => run_theta(&context(&common)?, &deltas).map(|_| true),
        Command::Verify {
            common,
            delta,
            samples,
            seed,
        } => {
            if samples == 0 {
                return Err(input("--samples", "must be positive"));
            }
            run_verify(&context(&common)?, delta, samples, seed)
        }
        Command::Figure {
            common,
            delta,
            figure,
        } => run_figure(&context(&common)?, delta, figure).map(|_| true),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
