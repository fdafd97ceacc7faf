//! `fif` — fractal interpolation from the command line.
//!
//! Exit codes: 0 success, 1 validation or usage error, 2 non-convergence.
//! All output files are written atomically (temp file + rename) and are
//! byte-identical across repeated runs with the same arguments.

use std::fs::File;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use fifs::attractor::{chaos_game, deterministic_attractor, rasterize, ChaosGameConfig, PointSet};
use fifs::fif1d::{
    compare_with_classical, endpoint_violation_experiment, fixed_point, integrate_closed_form,
    integrate_quadrature, FixedPointConfig,
};
use fifs::fis2d::{
    bilinear_start, build_ifs2d, check_collinearity, fixed_point_2d, integrate2d_closed_form,
    integrate2d_quadrature, rb2_apply, seam_jump_report, GridData2D, Ifs2D, SeamPolicy,
};
use fifs::io;
use fifs::{Error, Result};

#[derive(Parser)]
#[command(
    name = "fif",
    version,
    about = "Construct, evaluate, integrate, and render affine fractal interpolants",
    long_about = "Constructs iterated function systems whose attractors interpolate given \
                  data, evaluates the interpolants as operator fixed points, integrates them \
                  in closed form, renders attractors, and runs the endpoint-violation and \
                  surface seam-policy experiments."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the system maps for a data set and write them as JSON.
    Construct(ConstructArgs),
    /// Evaluate the converged interpolant on a uniform grid or at points.
    Eval(EvalArgs),
    /// Integrate the interpolant (closed form and/or quadrature).
    Integrate(IntegrateArgs),
    /// Render the attractor as a point list or PGM raster.
    Attractor(AttractorArgs),
    /// Compare the interpolant with classical piecewise-linear interpolation.
    Compare(CompareArgs),
    /// Perturb one endpoint condition and report the consequences.
    Violate(ViolateArgs),
    /// Solve a 2D surface system for rectangular grid data.
    Fis2dBuild(Fis2dBuildArgs),
    /// Evaluate the converged surface under a seam policy.
    Fis2dEval(Fis2dEvalArgs),
    /// Report boundary collinearity and the raw one-step seam jumps.
    Fis2dCheck(Fis2dCheckArgs),
    /// Integrate the surface (closed form and/or quadrature).
    Fis2dIntegrate(Fis2dIntegrateArgs),
}

/// Fixed-point iteration controls shared by most commands.
#[derive(Args, Clone, Copy)]
struct IterArgs {
    /// Convergence tolerance for the sup-norm change per iteration.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Iteration cap; exceeding it is a non-convergence error (exit 2).
    #[arg(long = "max-iter", default_value_t = 200)]
    max_iter: usize,
}

impl IterArgs {
    fn config(&self, resolution: usize) -> FixedPointConfig {
        FixedPointConfig {
            tol: self.tol,
            max_iter: self.max_iter,
            resolution,
        }
    }
}

#[derive(Args)]
struct ConstructArgs {
    /// Interpolation data as `t,x` CSV (header optional, t strictly increasing).
    #[arg(long)]
    data: PathBuf,
    /// Vertical scaling factors: one value broadcasts, or a comma list with
    /// one value per subinterval. Each must satisfy |alpha| < 1.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "alpha_file")]
    alpha: Option<String>,
    /// File with one scaling factor per line instead of --alpha.
    #[arg(long = "alpha-file")]
    alpha_file: Option<PathBuf>,
    /// Output path for the system JSON.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    /// System JSON produced by `construct`.
    #[arg(long)]
    ifs: PathBuf,
    /// Grid panels; the output has resolution + 1 samples.
    #[arg(long, default_value_t = 4096)]
    resolution: usize,
    #[command(flatten)]
    iter: IterArgs,
    /// Evaluate only at these comma-separated t values instead of the grid.
    #[arg(long, allow_hyphen_values = true)]
    points: Option<String>,
    /// Output format for the samples.
    #[arg(long, value_enum, default_value_t = EvalFormat::Csv)]
    format: EvalFormat,
    /// Output path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum EvalFormat {
    /// `t,f` rows.
    Csv,
    /// `{"t": [...], "f": [...]}`.
    Json,
}

#[derive(Args)]
struct IntegrateArgs {
    /// System JSON produced by `construct`.
    #[arg(long)]
    ifs: PathBuf,
    /// Which integral(s) to compute.
    #[arg(long, value_enum, default_value_t = Method::Both)]
    method: Method,
    /// Quadrature grid panels.
    #[arg(long, default_value_t = 65536)]
    resolution: usize,
    #[command(flatten)]
    iter: IterArgs,
    /// Output path for the JSON report.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Method {
    Closed,
    Quadrature,
    Both,
}

#[derive(Args)]
struct AttractorArgs {
    /// System JSON produced by `construct`.
    #[arg(long)]
    ifs: PathBuf,
    /// Deterministic set iteration or the stochastic chaos game.
    #[arg(long, value_enum, default_value_t = Mode::Deterministic)]
    mode: Mode,
    /// Hutchinson steps from the data points (deterministic mode).
    #[arg(long, default_value_t = 12)]
    depth: usize,
    /// RNG seed (chaos mode); fixed seed gives byte-identical output.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Total chaos-game iterations including burn-in (chaos mode).
    #[arg(long, default_value_t = 100_000)]
    iterations: usize,
    /// Leading iterations discarded before points are recorded (chaos mode).
    #[arg(long = "burn-in", default_value_t = 100)]
    burn_in: usize,
    /// Choose maps proportionally to their horizontal widths (chaos mode).
    #[arg(long, default_value_t = false)]
    weighted: bool,
    /// Point list CSV or occupancy raster PGM.
    #[arg(long, value_enum, default_value_t = AttractorFormat::Csv)]
    format: AttractorFormat,
    /// Raster width in cells (pgm format).
    #[arg(long, default_value_t = 512)]
    width: usize,
    /// Raster height in cells (pgm format).
    #[arg(long, default_value_t = 512)]
    height: usize,
    /// Write ASCII `P2` instead of binary `P5` (pgm format).
    #[arg(long, default_value_t = false)]
    ascii: bool,
    /// Output path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Mode {
    Deterministic,
    Chaos,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum AttractorFormat {
    /// `t,x` rows in canonical (sorted, deduplicated) order.
    Csv,
    /// Occupancy raster over the tight bounding box.
    Pgm,
}

#[derive(Args)]
struct CompareArgs {
    /// System JSON produced by `construct` (uniform knots required).
    #[arg(long)]
    ifs: PathBuf,
    /// Grid panels for both interpolants.
    #[arg(long, default_value_t = 4096)]
    resolution: usize,
    #[command(flatten)]
    iter: IterArgs,
    /// Output path for the JSON report.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ViolateArgs {
    /// System JSON produced by `construct`.
    #[arg(long)]
    ifs: PathBuf,
    /// 0-based map index whose constant term q0 is perturbed.
    #[arg(long, default_value_t = 0)]
    map: usize,
    /// Perturbation added to q0.
    #[arg(long, default_value_t = 0.1, allow_hyphen_values = true)]
    delta: f64,
    /// Grid panels for the operator iteration.
    #[arg(long, default_value_t = 4096)]
    resolution: usize,
    #[command(flatten)]
    iter: IterArgs,
    /// Output path for the JSON report.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct Fis2dBuildArgs {
    /// Grid data: `{xs, ys, zs}` JSON or `x,y,z` CSV (by file extension).
    #[arg(long)]
    grid: PathBuf,
    /// Scaling factors: one value broadcasts to all cells, or a row-major
    /// comma list with one value per cell. Each must satisfy |alpha| < 1.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "alpha_file")]
    alpha: Option<String>,
    /// CSV file with one row of scaling factors per x-cell instead of --alpha.
    #[arg(long = "alpha-file")]
    alpha_file: Option<PathBuf>,
    /// Output path for the system JSON.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct Fis2dEvalArgs {
    /// Surface system JSON produced by `fis2d-build`.
    #[arg(long)]
    ifs: PathBuf,
    /// Seam policy for the operator.
    #[arg(long, value_enum)]
    policy: Policy,
    /// Lattice panels per axis; the output has (resolution + 1)^2 samples.
    #[arg(long, default_value_t = 512)]
    resolution: usize,
    #[command(flatten)]
    iter: IterArgs,
    /// Also write the per-seam jump report to this JSON path.
    #[arg(long = "seam-report")]
    seam_report: Option<PathBuf>,
    /// Output path for the `x,y,f` CSV.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Policy {
    /// Raw branches with half-open dispatch (ill-defined at seams).
    Raw,
    /// Average the adjacent branch values on seam lines.
    Average,
    /// Raw branches after verifying boundary collinearity.
    Collinear,
}

impl From<Policy> for SeamPolicy {
    fn from(p: Policy) -> Self {
        match p {
            Policy::Raw => SeamPolicy::RawF,
            Policy::Average => SeamPolicy::AverageG,
            Policy::Collinear => SeamPolicy::CollinearBoundary,
        }
    }
}

#[derive(Args)]
struct Fis2dCheckArgs {
    /// Grid data: `{xs, ys, zs}` JSON or `x,y,z` CSV (by file extension).
    #[arg(long)]
    grid: PathBuf,
    /// Scaling factor used for the one-step raw seam probe.
    #[arg(long, default_value_t = 0.3, allow_hyphen_values = true)]
    alpha: f64,
    /// Lattice panels per axis for the probe step.
    #[arg(long, default_value_t = 64)]
    resolution: usize,
    /// Output path for the JSON report.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct Fis2dIntegrateArgs {
    /// Surface system JSON produced by `fis2d-build`.
    #[arg(long)]
    ifs: PathBuf,
    /// Seam policy; closed-form integration refuses `raw` because the
    /// surface is then not well defined.
    #[arg(long, value_enum)]
    policy: Policy,
    /// Which integral(s) to compute.
    #[arg(long, value_enum, default_value_t = Method::Both)]
    method: Method,
    /// Lattice panels per axis for quadrature.
    #[arg(long, default_value_t = 512)]
    resolution: usize,
    #[command(flatten)]
    iter: IterArgs,
    /// Output path for the JSON report.
    #[arg(long)]
    out: PathBuf,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help / --version are not usage errors.
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                std::process::exit(0);
            }
            eprint!("{e}");
            std::process::exit(1);
        }
    };
    if let Err(e) = run(cli.command) {
        eprintln!("error: {e}");
        let code = match e {
            Error::NonConvergence { .. } => 2,
            _ => 1,
        };
        std::process::exit(code);
    }
}

fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Construct(a) => construct(a),
        Command::Eval(a) => eval(a),
        Command::Integrate(a) => integrate(a),
        Command::Attractor(a) => attractor(a),
        Command::Compare(a) => compare(a),
        Command::Violate(a) => violate(a),
        Command::Fis2dBuild(a) => fis2d_build(a),
        Command::Fis2dEval(a) => fis2d_eval(a),
        Command::Fis2dCheck(a) => fis2d_check(a),
        Command::Fis2dIntegrate(a) => fis2d_integrate(a),
    }
}

/// Write via a temp file in the destination directory plus rename, so no
/// partial file survives an error.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

fn parse_number_list(s: &str, what: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|e| Error::InvalidData(format!("bad {what} value {p:?}: {e}")))
        })
        .collect()
}

/// --alpha / --alpha-file for 1D: comma list or one value per line.
fn alpha_values_1d(alpha: &Option<String>, alpha_file: &Option<PathBuf>) -> Result<Vec<f64>> {
    match (alpha, alpha_file) {
        (Some(s), None) => parse_number_list(s, "alpha"),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)?;
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .map(|l| {
                    l.parse::<f64>()
                        .map_err(|e| Error::InvalidData(format!("bad alpha value {l:?}: {e}")))
                })
                .collect()
        }
        _ => Err(Error::InvalidData(
            "provide exactly one of --alpha or --alpha-file".into(),
        )),
    }
}

fn construct(a: ConstructArgs) -> Result<()> {
    let alphas = alpha_values_1d(&a.alpha, &a.alpha_file)?;
    let file = File::open(&a.data)?;
    let ifs = io::build_ifs_from_csv(file, &alphas)?;
    io::ifs1d_roundtrip(&ifs)?;
    write_atomic(&a.out, io::ifs1d_to_json(&ifs).as_bytes())
}

fn load_ifs(path: &Path) -> Result<fifs::ifs1d::Ifs1D> {
    io::ifs1d_from_json(File::open(path)?)
}

fn eval(a: EvalArgs) -> Result<()> {
    let ifs = load_ifs(&a.ifs)?;
    let f = fixed_point(&ifs, &a.iter.config(a.resolution))?;
    let samples: Vec<(f64, f64)> = match &a.points {
        Some(list) => {
            let ts = parse_number_list(list, "t")?;
            for &t in &ts {
                if t < f.t0() || t > f.tn() {
                    return Err(Error::Domain(format!(
                        "t = {t} outside the data interval [{}, {}]",
                        f.t0(),
                        f.tn()
                    )));
                }
            }
            ts.iter().map(|&t| (t, f.value_at(t))).collect()
        }
        None => (0..=f.resolution())
            .map(|i| (f.node(i), f.samples()[i]))
            .collect(),
    };
    let bytes = match a.format {
        EvalFormat::Csv => {
            let mut buf = Vec::new();
            io::write_eval_csv(&mut buf, &samples)?;
            buf
        }
        EvalFormat::Json => {
            let ts: Vec<f64> = samples.iter().map(|s| s.0).collect();
            let fs: Vec<f64> = samples.iter().map(|s| s.1).collect();
            io::serialize_report(&serde_json::json!({ "t": ts, "f": fs })).into_bytes()
        }
    };
    write_atomic(&a.out, &bytes)
}

fn integrate(a: IntegrateArgs) -> Result<()> {
    let ifs = load_ifs(&a.ifs)?;
    let mut report = serde_json::Map::new();
    let closed = match a.method {
        Method::Closed | Method::Both => {
            let v = integrate_closed_form(&ifs)?;
            report.insert("closed_form".into(), v.into());
            Some(v)
        }
        Method::Quadrature => None,
    };
    if matches!(a.method, Method::Quadrature | Method::Both) {
        let v = integrate_quadrature(&ifs, &a.iter.config(a.resolution))?;
        report.insert("quadrature".into(), v.into());
        if let Some(c) = closed {
            report.insert("difference".into(), (v - c).abs().into());
        }
    }
    write_atomic(&a.out, io::serialize_report(&report.into()).as_bytes())
}

fn attractor(a: AttractorArgs) -> Result<()> {
    let ifs = load_ifs(&a.ifs)?;
    let mut points = match a.mode {
        Mode::Deterministic => deterministic_attractor(&ifs, &PointSet::from_data(&ifs), a.depth)?,
        Mode::Chaos => chaos_game(
            &ifs,
            &ChaosGameConfig {
                seed: a.seed,
                iterations: a.iterations,
                burn_in: a.burn_in,
                weighted: a.weighted,
            },
        )?,
    };
    points.canonicalize();
    let bytes = match a.format {
        AttractorFormat::Csv => {
            let mut buf = Vec::new();
            writeln!(buf, "t,x")?;
            for &(t, x) in points.points() {
                writeln!(buf, "{t},{x}")?;
            }
            buf
        }
        AttractorFormat::Pgm => {
            let raster = rasterize(&points, a.width, a.height)?;
            let mut buf = Vec::new();
            io::write_pgm(&mut buf, &raster, !a.ascii)?;
            buf
        }
    };
    write_atomic(&a.out, &bytes)
}

fn compare(a: CompareArgs) -> Result<()> {
    let ifs = load_ifs(&a.ifs)?;
    let rep = compare_with_classical(ifs.data(), &ifs, &a.iter.config(a.resolution))?;
    let report = serde_json::json!({
        "sup_diff": rep.sup_diff,
        "w_f": rep.w_f,
        "alpha_inf": rep.alpha_inf,
        "f_inf": rep.f_inf,
        "bound_rhs": rep.bound_rhs,
        "bound_holds": rep.bound_holds,
    });
    write_atomic(&a.out, io::serialize_report(&report).as_bytes())
}

fn violate(a: ViolateArgs) -> Result<()> {
    let ifs = load_ifs(&a.ifs)?;
    let rep = endpoint_violation_experiment(&ifs, a.map, a.delta, &a.iter.config(a.resolution))?;
    let report = serde_json::json!({
        "knot_residual": rep.knot_residual,
        "max_jump": rep.max_jump,
        "integral_shift": rep.integral_shift,
    });
    write_atomic(&a.out, io::serialize_report(&report).as_bytes())
}

fn load_grid(path: &Path) -> Result<GridData2D> {
    let is_json = path
        .extension()
        .map(|e| e.eq_ignore_ascii_case("json"))
        .unwrap_or(false);
    let file = File::open(path)?;
    if is_json {
        io::parse_grid2d_json(file)
    } else {
        io::parse_grid2d_csv(file)
    }
}

/// --alpha / --alpha-file for 2D: scalar broadcast, row-major comma list,
/// or a CSV matrix file with one row per x-cell.
fn alpha_matrix_2d(
    alpha: &Option<String>,
    alpha_file: &Option<PathBuf>,
    nx: usize,
    ny: usize,
) -> Result<Vec<Vec<f64>>> {
    match (alpha, alpha_file) {
        (Some(s), None) => {
            let vals = parse_number_list(s, "alpha")?;
            if vals.len() == 1 {
                Ok(vec![vec![vals[0]; ny]; nx])
            } else if vals.len() == nx * ny {
                Ok(vals.chunks(ny).map(<[f64]>::to_vec).collect())
            } else {
                Err(Error::InvalidData(format!(
                    "expected 1 or {} alpha values for a {nx}x{ny} cell grid, got {}",
                    nx * ny,
                    vals.len()
                )))
            }
        }
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)?;
            let rows: Vec<Vec<f64>> = text
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .map(|l| parse_number_list(l, "alpha"))
                .collect::<Result<_>>()?;
            if rows.len() != nx || rows.iter().any(|r| r.len() != ny) {
                return Err(Error::InvalidData(format!(
                    "alpha file must hold a {nx}x{ny} matrix"
                )));
            }
            Ok(rows)
        }
        _ => Err(Error::InvalidData(
            "provide exactly one of --alpha or --alpha-file".into(),
        )),
    }
}

fn fis2d_build(a: Fis2dBuildArgs) -> Result<()> {
    let grid = load_grid(&a.grid)?;
    let alphas = alpha_matrix_2d(&a.alpha, &a.alpha_file, grid.n_cells_x(), grid.n_cells_y())?;
    let ifs = build_ifs2d(&grid, &alphas)?;
    write_atomic(&a.out, io::ifs2d_to_json(&ifs).as_bytes())
}

fn load_ifs2d(path: &Path) -> Result<Ifs2D> {
    io::ifs2d_from_json(File::open(path)?)
}

fn fis2d_eval(a: Fis2dEvalArgs) -> Result<()> {
    let ifs = load_ifs2d(&a.ifs)?;
    let f = fixed_point_2d(&ifs, a.policy.into(), &a.iter.config(a.resolution))?;
    let (p, q) = f.resolution();
    let mut samples = Vec::with_capacity((p + 1) * (q + 1));
    for i in 0..=p {
        for j in 0..=q {
            samples.push((f.node_x(i), f.node_y(j), f.at(i, j)));
        }
    }
    let mut buf = Vec::new();
    io::write_eval2d_csv(&mut buf, &samples)?;
    if let Some(path) = &a.seam_report {
        let jumps = seam_jump_report(&f, &ifs)?;
        let report: serde_json::Map<String, serde_json::Value> =
            jumps.into_iter().map(|(k, v)| (k, v.into())).collect();
        write_atomic(path, io::serialize_report(&report.into()).as_bytes())?;
    }
    write_atomic(&a.out, &buf)
}

fn fis2d_check(a: Fis2dCheckArgs) -> Result<()> {
    let grid = load_grid(&a.grid)?;
    let tol = 1e-9 * (1.0 + grid.z_scale());
    let coll = check_collinearity(&grid, tol);

    let alphas = vec![vec![a.alpha; grid.n_cells_y()]; grid.n_cells_x()];
    let ifs = build_ifs2d(&grid, &alphas)?;
    let start = bilinear_start(&grid, a.resolution, a.resolution)?;
    let image = rb2_apply(&ifs, &start, SeamPolicy::RawF)?;
    let jumps = seam_jump_report(&image, &ifs)?;

    let sides: serde_json::Map<String, serde_json::Value> = coll
        .sides
        .iter()
        .map(|(k, v)| (k.clone(), (*v).into()))
        .collect();
    let jump_map: serde_json::Map<String, serde_json::Value> =
        jumps.into_iter().map(|(k, v)| (k, v.into())).collect();
    let report = serde_json::json!({
        "collinearity": {
            "sides": sides,
            "max_deviation": coll.max_deviation,
            "tol": coll.tol,
            "pass": coll.pass,
        },
        "raw_seam_jumps": jump_map,
    });
    write_atomic(&a.out, io::serialize_report(&report).as_bytes())
}

fn fis2d_integrate(a: Fis2dIntegrateArgs) -> Result<()> {
    let ifs = load_ifs2d(&a.ifs)?;
    let policy: SeamPolicy = a.policy.into();
    if policy == SeamPolicy::RawF && matches!(a.method, Method::Closed | Method::Both) {
        return Err(Error::Policy(
            "closed-form integration requires a well-defined surface; \
             use --policy average or --policy collinear, or --method quadrature"
                .into(),
        ));
    }
    let mut report = serde_json::Map::new();
    let closed = match a.method {
        Method::Closed | Method::Both => {
            let v = integrate2d_closed_form(&ifs)?;
            report.insert("closed_form".into(), v.into());
            Some(v)
        }
        Method::Quadrature => None,
    };
    if matches!(a.method, Method::Quadrature | Method::Both) {
        let v = integrate2d_quadrature(&ifs, policy, &a.iter.config(a.resolution))?;
        report.insert("quadrature".into(), v.into());
        if let Some(c) = closed {
            report.insert("difference".into(), (v - c).abs().into());
        }
    }
    write_atomic(&a.out, io::serialize_report(&report.into()).as_bytes())
}
