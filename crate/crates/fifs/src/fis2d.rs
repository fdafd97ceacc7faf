//! Fractal interpolation surfaces over rectangular grids.
//!
//! Each grid cell gets a map (x, y, z) -> (phi_n(x), psi_m(y), F_{n,m})
//! with F_{n,m}(x, y, z) = alpha_{n,m} z + q_{n,m}(x, y) and bilinear
//! q_{n,m}(x, y) = e x + f y + g xy + k solved from the four corner
//! conditions. Along interior cell boundaries the two adjacent branches of
//! the induced operator generally disagree, so the operator is not well
//! defined as stated; `SeamPolicy` selects one of three treatments:
//!
//! * `RawF` — keep the raw branches and the half-open dispatch, and record
//!   the disagreement (the instructive broken baseline);
//! * `AverageG` — emit the arithmetic mean of the adjacent branch values on
//!   seam lines (four-way at interior corners), which makes the operator
//!   single-valued on any data;
//! * `CollinearBoundary` — use the raw branches after verifying the data's
//!   boundary rows/columns are collinear, which provably makes the
//!   branches agree.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::fif1d::FixedPointConfig;
use crate::ifs1d::AffineMap1D;

/// Rectangular interpolation data: z[n][m] is the height at (xs[n], ys[m]).
#[derive(Debug, Clone, PartialEq)]
pub struct GridData2D {
    xs: Vec<f64>,
    ys: Vec<f64>,
    zs: Vec<Vec<f64>>,
}

impl GridData2D {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>, zs: Vec<Vec<f64>>) -> Result<Self> {
        if xs.len() < 2 || ys.len() < 2 {
            return Err(Error::InvalidData("need at least 2 knots per axis".into()));
        }
        for k in xs.iter().chain(ys.iter()) {
            if !k.is_finite() {
                return Err(Error::InvalidData(format!("non-finite knot {k}")));
            }
        }
        if !xs.windows(2).all(|w| w[0] < w[1]) || !ys.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidData(
                "axis knots not strictly increasing".into(),
            ));
        }
        if zs.len() != xs.len() || zs.iter().any(|row| row.len() != ys.len()) {
            return Err(Error::InvalidData(format!(
                "z matrix must be {}x{}",
                xs.len(),
                ys.len()
            )));
        }
        if zs.iter().flatten().any(|z| !z.is_finite()) {
            return Err(Error::InvalidData("non-finite z value".into()));
        }
        Ok(Self { xs, ys, zs })
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn zs(&self) -> &[Vec<f64>] {
        &self.zs
    }

    pub fn n_cells_x(&self) -> usize {
        self.xs.len() - 1
    }

    pub fn n_cells_y(&self) -> usize {
        self.ys.len() - 1
    }

    pub fn z_scale(&self) -> f64 {
        self.zs.iter().flatten().fold(0.0, |m, z| m.max(z.abs()))
    }

    /// Piecewise-bilinear interpolation of the data (the 2D analog of the
    /// polyline through the points).
    pub fn bilinear_at(&self, x: f64, y: f64) -> f64 {
        let n = cell_of(&self.xs, x);
        let m = cell_of(&self.ys, y);
        let tx = ((x - self.xs[n]) / (self.xs[n + 1] - self.xs[n])).clamp(0.0, 1.0);
        let ty = ((y - self.ys[m]) / (self.ys[m + 1] - self.ys[m])).clamp(0.0, 1.0);
        let z = &self.zs;
        (1.0 - tx) * (1.0 - ty) * z[n][m]
            + tx * (1.0 - ty) * z[n + 1][m]
            + (1.0 - tx) * ty * z[n][m + 1]
            + tx * ty * z[n + 1][m + 1]
    }
}

/// Half-open cell dispatch: knots[i] <= v < knots[i+1], last cell closed.
fn cell_of(knots: &[f64], v: f64) -> usize {
    let i = knots.partition_point(|k| *k <= v);
    i.clamp(1, knots.len() - 1) - 1
}

/// Same closed form as the 1D domain contractions, per axis.
pub fn build_axis_maps(knots: &[f64]) -> Result<Vec<AffineMap1D>> {
    if knots.len() < 2 || !knots.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::InvalidData(
            "axis knots not strictly increasing".into(),
        ));
    }
    let (k0, kn) = (knots[0], *knots.last().unwrap());
    let span = kn - k0;
    Ok(knots
        .windows(2)
        .map(|w| AffineMap1D {
            a: (w[1] - w[0]) / span,
            b: (kn * w[0] - k0 * w[1]) / span,
        })
        .collect())
}

/// Coefficients of q(x, y) = e x + f y + g xy + k for one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QCoeffs {
    pub e: f64,
    pub f: f64,
    pub g: f64,
    pub k: f64,
}

impl QCoeffs {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.e * x + self.f * y + self.g * x * y + self.k
    }
}

/// Solve the per-cell 4x4 corner-condition systems. The conditions say
/// q_{n,m} must take the value z_target - alpha z_corner at the four domain
/// corners; since a bilinear function on a rectangle is determined by its
/// corner values, the solution is the bilinear interpolant of those four
/// numbers, expanded here into (e, f, g, k). Nonsingular because
/// x0 != xN and y0 != yM.
pub fn solve_qnm(grid: &GridData2D, alphas: &[Vec<f64>]) -> Result<Vec<Vec<QCoeffs>>> {
    let (nx, ny) = (grid.n_cells_x(), grid.n_cells_y());
    if alphas.len() != nx || alphas.iter().any(|r| r.len() != ny) {
        return Err(Error::InvalidScaling(format!(
            "alpha matrix must be {nx}x{ny}"
        )));
    }
    for a in alphas.iter().flatten() {
        if !a.is_finite() || a.abs() >= 1.0 {
            return Err(Error::InvalidScaling(format!(
                "alpha = {a} not strictly inside (-1, 1)"
            )));
        }
    }
    let (x0, xn) = (grid.xs[0], *grid.xs.last().unwrap());
    let (y0, ym) = (grid.ys[0], *grid.ys.last().unwrap());
    let (w, h) = (xn - x0, ym - y0);
    let z = &grid.zs;
    let (nn, mm) = (grid.xs.len() - 1, grid.ys.len() - 1);
    let mut out = Vec::with_capacity(nx);
    for n in 0..nx {
        let mut row = Vec::with_capacity(ny);
        for m in 0..ny {
            let al = alphas[n][m];
            // Targets at domain corners (x0,y0), (xN,y0), (x0,yM), (xN,yM).
            let t00 = z[n][m] - al * z[0][0];
            let t10 = z[n + 1][m] - al * z[nn][0];
            let t01 = z[n][m + 1] - al * z[0][mm];
            let t11 = z[n + 1][m + 1] - al * z[nn][mm];
            let denom = w * h;
            let g = (t00 - t10 - t01 + t11) / denom;
            let e = ((t10 - t00) * ym + (t01 - t11) * y0) / denom;
            let f = ((t01 - t00) * xn + (t10 - t11) * x0) / denom;
            let k = (t00 * xn * ym - t10 * x0 * ym - t01 * xn * y0 + t11 * x0 * y0) / denom;
            row.push(QCoeffs { e, f, g, k });
        }
        out.push(row);
    }
    Ok(out)
}

/// Per-cell maps for the surface system.
#[derive(Debug, Clone, PartialEq)]
pub struct Ifs2D {
    grid: GridData2D,
    phis: Vec<AffineMap1D>,
    psis: Vec<AffineMap1D>,
    alphas: Vec<Vec<f64>>,
    qcoeffs: Vec<Vec<QCoeffs>>,
}

pub fn build_ifs2d(grid: &GridData2D, alphas: &[Vec<f64>]) -> Result<Ifs2D> {
    let qcoeffs = solve_qnm(grid, alphas)?;
    Ok(Ifs2D {
        grid: grid.clone(),
        phis: build_axis_maps(&grid.xs)?,
        psis: build_axis_maps(&grid.ys)?,
        alphas: alphas.to_vec(),
        qcoeffs,
    })
}

impl Ifs2D {
    pub fn grid(&self) -> &GridData2D {
        &self.grid
    }

    pub fn phis(&self) -> &[AffineMap1D] {
        &self.phis
    }

    pub fn psis(&self) -> &[AffineMap1D] {
        &self.psis
    }

    pub fn alphas(&self) -> &[Vec<f64>] {
        &self.alphas
    }

    pub fn qcoeffs(&self) -> &[Vec<QCoeffs>] {
        &self.qcoeffs
    }

    pub fn vertical_factor(&self) -> f64 {
        self.alphas
            .iter()
            .flatten()
            .fold(0.0, |m, a| m.max(a.abs()))
    }

    /// Branch value of cell (n, m) at domain coordinates (X, Y) reading z.
    fn branch(&self, n: usize, m: usize, x_dom: f64, y_dom: f64, z: f64) -> f64 {
        self.alphas[n][m] * z + self.qcoeffs[n][m].eval(x_dom, y_dom)
    }
}

/// How the operator resolves its seam ambiguity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeamPolicy {
    RawF,
    AverageG,
    CollinearBoundary,
}

/// Max deviation of each boundary row/column of z from the straight line
/// through its two corner values.
#[derive(Debug, Clone)]
pub struct CollinearityReport {
    /// Keyed "x=min" / "x=max" / "y=min" / "y=max".
    pub sides: BTreeMap<String, f64>,
    pub max_deviation: f64,
    pub tol: f64,
    pub pass: bool,
}

/// The well-definedness condition for the raw branches: each of the four
/// boundary sides of the data grid must lie on a straight line. Every
/// boundary value is compared with the convex combination of its side's
/// corner values.
pub fn check_collinearity(grid: &GridData2D, tol: f64) -> CollinearityReport {
    let dev_along = |knots: &[f64], values: &mut dyn Iterator<Item = f64>| -> f64 {
        let vals: Vec<f64> = values.collect();
        let (k0, kn) = (knots[0], *knots.last().unwrap());
        let (v0, vn) = (vals[0], *vals.last().unwrap());
        knots
            .iter()
            .zip(&vals)
            .map(|(&k, &v)| {
                let lam = (k - k0) / (kn - k0);
                (v - ((1.0 - lam) * v0 + lam * vn)).abs()
            })
            .fold(0.0, f64::max)
    };
    let nn = grid.xs.len() - 1;
    let mm = grid.ys.len() - 1;
    let mut sides = BTreeMap::new();
    sides.insert(
        "x=min".into(),
        dev_along(&grid.ys, &mut grid.zs[0].iter().copied()),
    );
    sides.insert(
        "x=max".into(),
        dev_along(&grid.ys, &mut grid.zs[nn].iter().copied()),
    );
    sides.insert(
        "y=min".into(),
        dev_along(&grid.xs, &mut grid.zs.iter().map(|r| r[0])),
    );
    sides.insert(
        "y=max".into(),
        dev_along(&grid.xs, &mut grid.zs.iter().map(|r| r[mm])),
    );
    let max_deviation = sides.values().fold(0.0f64, |m, v| m.max(*v));
    CollinearityReport {
        sides,
        max_deviation,
        tol,
        pass: max_deviation <= tol,
    }
}

/// Max branch disagreement recorded along each interior seam line during an
/// operator application, under the active policy (so averaging reports
/// zero by construction).
#[derive(Debug, Clone, Default)]
pub struct SeamDiagnostics {
    /// (knot index, max jump) per interior x = xs[k] seam.
    pub x_seams: Vec<(usize, f64)>,
    /// (knot index, max jump) per interior y = ys[k] seam.
    pub y_seams: Vec<(usize, f64)>,
}

/// Samples of a surface on a uniform (P+1) x (Q+1) lattice over the data
/// rectangle, plus the seam diagnostics of the operator application that
/// produced it (absent for directly constructed lattices).
#[derive(Debug, Clone)]
pub struct GridFunction2D {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    nx: usize,
    ny: usize,
    /// Row-major over x: samples[i * (ny + 1) + j] is the value at
    /// (node_x(i), node_y(j)).
    samples: Vec<f64>,
    seams: Option<SeamDiagnostics>,
}

impl GridFunction2D {
    pub fn new(
        (x0, x1): (f64, f64),
        (y0, y1): (f64, f64),
        (nx, ny): (usize, usize),
        samples: Vec<f64>,
    ) -> Result<Self> {
        if !(x0 < x1 && y0 < y1) || nx == 0 || ny == 0 {
            return Err(Error::InvalidData("bad lattice geometry".into()));
        }
        if samples.len() != (nx + 1) * (ny + 1) {
            return Err(Error::InvalidData(format!(
                "expected {} samples, got {}",
                (nx + 1) * (ny + 1),
                samples.len()
            )));
        }
        Ok(Self {
            x0,
            x1,
            y0,
            y1,
            nx,
            ny,
            samples,
            seams: None,
        })
    }

    pub fn resolution(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn x_range(&self) -> (f64, f64) {
        (self.x0, self.x1)
    }

    pub fn y_range(&self) -> (f64, f64) {
        (self.y0, self.y1)
    }

    pub fn node_x(&self, i: usize) -> f64 {
        let u = i as f64 / self.nx as f64;
        (1.0 - u) * self.x0 + u * self.x1
    }

    pub fn node_y(&self, j: usize) -> f64 {
        let u = j as f64 / self.ny as f64;
        (1.0 - u) * self.y0 + u * self.y1
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.samples[i * (self.ny + 1) + j]
    }

    /// Bilinear interpolation with clamping; exact at lattice nodes.
    pub fn value_at(&self, x: f64, y: f64) -> f64 {
        let px = ((x - self.x0) / (self.x1 - self.x0)).clamp(0.0, 1.0) * self.nx as f64;
        let py = ((y - self.y0) / (self.y1 - self.y0)).clamp(0.0, 1.0) * self.ny as f64;
        let i = (px.floor() as usize).min(self.nx - 1);
        let j = (py.floor() as usize).min(self.ny - 1);
        let (fx, fy) = (px - i as f64, py - j as f64);
        let v00 = self.at(i, j);
        let v10 = self.at(i + 1, j);
        let v01 = self.at(i, j + 1);
        let v11 = self.at(i + 1, j + 1);
        (1.0 - fx) * (1.0 - fy) * v00
            + fx * (1.0 - fy) * v10
            + (1.0 - fx) * fy * v01
            + fx * fy * v11
    }

    pub fn sup_distance(&self, other: &GridFunction2D) -> f64 {
        assert_eq!(self.samples.len(), other.samples.len(), "lattice mismatch");
        self.samples
            .iter()
            .zip(&other.samples)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn seam_diagnostics(&self) -> Option<&SeamDiagnostics> {
        self.seams.as_ref()
    }
}

/// The data's bilinear interpolant sampled on a (p+1) x (q+1) lattice: the
/// canonical starting iterate.
pub fn bilinear_start(grid: &GridData2D, p: usize, q: usize) -> Result<GridFunction2D> {
    let (x0, x1) = (grid.xs[0], *grid.xs.last().unwrap());
    let (y0, y1) = (grid.ys[0], *grid.ys.last().unwrap());
    let mut samples = Vec::with_capacity((p + 1) * (q + 1));
    for i in 0..=p {
        let u = i as f64 / p as f64;
        let x = (1.0 - u) * x0 + u * x1;
        for j in 0..=q {
            let v = j as f64 / q as f64;
            let y = (1.0 - v) * y0 + v * y1;
            samples.push(grid.bilinear_at(x, y));
        }
    }
    GridFunction2D::new((x0, x1), (y0, y1), (p, q), samples)
}

/// Which cells contribute to the operator value at (x, y) under a policy:
/// the dispatch cell, widened to the seam-adjacent cells when averaging.
fn contributing_cells(knots: &[f64], v: f64, averaging: bool) -> (usize, Option<usize>) {
    let c = cell_of(knots, v);
    if averaging && c > 0 && v == knots[c] {
        (c - 1, Some(c))
    } else {
        (c, None)
    }
}

/// One application of the surface operator on the lattice. Also records
/// per-seam branch disagreements; under `AverageG` both sides emit the same
/// averaged expression, so the recorded jumps are identically zero.
pub fn rb2_apply(ifs: &Ifs2D, f: &GridFunction2D, policy: SeamPolicy) -> Result<GridFunction2D> {
    let grid = ifs.grid();
    if policy == SeamPolicy::CollinearBoundary {
        let tol = 1e-9 * (1.0 + grid.z_scale());
        let rep = check_collinearity(grid, tol);
        if !rep.pass {
            return Err(Error::Policy(format!(
                "collinear policy on non-collinear data: max boundary deviation {:e} > {:e}",
                rep.max_deviation, tol
            )));
        }
    }
    let (x0, xn) = (grid.xs[0], *grid.xs.last().unwrap());
    let (y0, ym) = (grid.ys[0], *grid.ys.last().unwrap());
    let averaging = policy == SeamPolicy::AverageG;
    let (p, q) = (f.nx, f.ny);

    let mut samples = Vec::with_capacity((p + 1) * (q + 1));
    for i in 0..=p {
        let x = f.node_x(i);
        let (cx, cx2) = contributing_cells(&grid.xs, x, averaging);
        for j in 0..=q {
            let y = f.node_y(j);
            let (cy, cy2) = contributing_cells(&grid.ys, y, averaging);
            let mut sum = 0.0;
            let mut count = 0.0;
            for &n in [Some(cx), cx2].iter().flatten() {
                for &m in [Some(cy), cy2].iter().flatten() {
                    let xd = ifs.phis[n].inverse(x).clamp(x0, xn);
                    let yd = ifs.psis[m].inverse(y).clamp(y0, ym);
                    sum += ifs.branch(n, m, xd, yd, f.value_at(xd, yd));
                    count += 1.0;
                }
            }
            samples.push(sum / count);
        }
    }

    // Seam diagnostics: sample each interior seam line at lattice
    // resolution and compare the two adjacent branch emissions.
    let mut diag = SeamDiagnostics::default();
    for k in 1..grid.xs.len() - 1 {
        let mut worst = 0.0f64;
        for j in 0..=q {
            let y = f.node_y(j);
            let m = cell_of(&grid.ys, y);
            let yd = ifs.psis[m].inverse(y).clamp(y0, ym);
            let left = ifs.branch(k - 1, m, xn, yd, f.value_at(xn, yd));
            let right = ifs.branch(k, m, x0, yd, f.value_at(x0, yd));
            if !averaging {
                worst = worst.max((left - right).abs());
            }
        }
        diag.x_seams.push((k, worst));
    }
    for k in 1..grid.ys.len() - 1 {
        let mut worst = 0.0f64;
        for i in 0..=p {
            let x = f.node_x(i);
            let n = cell_of(&grid.xs, x);
            let xd = ifs.phis[n].inverse(x).clamp(x0, xn);
            let down = ifs.branch(n, k - 1, xd, ym, f.value_at(xd, ym));
            let up = ifs.branch(n, k, xd, y0, f.value_at(xd, y0));
            if !averaging {
                worst = worst.max((down - up).abs());
            }
        }
        diag.y_seams.push((k, worst));
    }
    let mut out = GridFunction2D::new((x0, xn), (y0, ym), (p, q), samples)?;
    out.seams = Some(diag);
    Ok(out)
}

/// Iterate from the bilinear data interpolant until the sup-norm change
/// drops below cfg.tol. cfg.resolution is the panel count per axis.
pub fn fixed_point_2d(
    ifs: &Ifs2D,
    policy: SeamPolicy,
    cfg: &FixedPointConfig,
) -> Result<GridFunction2D> {
    let grid = ifs.grid();
    if cfg.tol.is_nan() || cfg.tol <= 0.0 || cfg.max_iter == 0 {
        return Err(Error::Domain(
            "tol must be positive and max_iter at least 1".into(),
        ));
    }
    if cfg.resolution < grid.n_cells_x().max(grid.n_cells_y()) {
        return Err(Error::Domain(format!(
            "resolution {} below cell count {}x{}",
            cfg.resolution,
            grid.n_cells_x(),
            grid.n_cells_y()
        )));
    }
    let mut f = bilinear_start(grid, cfg.resolution, cfg.resolution)?;
    let mut last = f64::NAN;
    for _ in 0..cfg.max_iter {
        let next = rb2_apply(ifs, &f, policy)?;
        last = f.sup_distance(&next);
        f = next;
        if last <= cfg.tol {
            return Ok(f);
        }
    }
    Err(Error::NonConvergence {
        iterations: cfg.max_iter,
        last_residual: last,
    })
}

/// Per-seam max branch jumps of the operator application that produced f,
/// keyed "x=k" / "y=k" by interior knot index.
pub fn seam_jump_report(f: &GridFunction2D, _ifs: &Ifs2D) -> Result<BTreeMap<String, f64>> {
    let Some(diag) = f.seam_diagnostics() else {
        return Err(Error::Domain(
            "no seam diagnostics: the surface is not an operator image".into(),
        ));
    };
    let mut out = BTreeMap::new();
    for &(k, jump) in &diag.x_seams {
        out.insert(format!("x={k}"), jump);
    }
    for &(k, jump) in &diag.y_seams {
        out.insert(format!("y={k}"), jump);
    }
    Ok(out)
}

/// Exact integral of the surface over the data rectangle by the same
/// change-of-variables argument as in one dimension:
/// I = [sum_{n,m} a_n c_m II(q_{n,m})] / (1 - sum_{n,m} a_n c_m alpha_{n,m}).
/// Meaningful when the surface is well defined (pair with `AverageG` or
/// `CollinearBoundary`; the CLI refuses to combine it with `RawF`).
pub fn integrate2d_closed_form(ifs: &Ifs2D) -> Result<f64> {
    let grid = ifs.grid();
    let (x0, xn) = (grid.xs[0], *grid.xs.last().unwrap());
    let (y0, ym) = (grid.ys[0], *grid.ys.last().unwrap());
    let (lx, ly) = (xn - x0, ym - y0);
    let (sx, sy) = ((xn * xn - x0 * x0) / 2.0, (ym * ym - y0 * y0) / 2.0);
    let mut num = 0.0;
    let mut den = 1.0;
    for n in 0..grid.n_cells_x() {
        for m in 0..grid.n_cells_y() {
            let ac = ifs.phis[n].a * ifs.psis[m].a;
            let qc = &ifs.qcoeffs[n][m];
            let int_q = qc.e * sx * ly + qc.f * sy * lx + qc.g * sx * sy + qc.k * lx * ly;
            num += ac * int_q;
            den -= ac * ifs.alphas[n][m];
        }
    }
    if den <= 0.0 {
        return Err(Error::Domain(format!(
            "self-similar integral denominator {den} <= 0"
        )));
    }
    Ok(num / den)
}

/// 2D composite midpoint quadrature of the converged lattice (each cell
/// contributes the mean of its four corner samples).
pub fn integrate2d_quadrature(
    ifs: &Ifs2D,
    policy: SeamPolicy,
    cfg: &FixedPointConfig,
) -> Result<f64> {
    let f = fixed_point_2d(ifs, policy, cfg)?;
    let (p, q) = f.resolution();
    let hx = (f.x1 - f.x0) / p as f64;
    let hy = (f.y1 - f.y0) / q as f64;
    let mut sum = 0.0;
    for i in 0..p {
        for j in 0..q {
            sum += 0.25 * (f.at(i, j) + f.at(i + 1, j) + f.at(i, j + 1) + f.at(i + 1, j + 1));
        }
    }
    Ok(sum * hx * hy)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_knots() -> Vec<f64> {
        vec![0.0, 0.5, 1.0]
    }

    /// z = xy on the 3x3 unit grid: boundaries are linear, and the surface
    /// itself is globally bilinear.
    fn xy_grid() -> GridData2D {
        let xs = unit_knots();
        let ys = unit_knots();
        let zs = xs
            .iter()
            .map(|&x| ys.iter().map(|&y| x * y).collect())
            .collect();
        GridData2D::new(xs, ys, zs).unwrap()
    }

    fn bumped_grid() -> GridData2D {
        let mut zs: Vec<Vec<f64>> = xy_grid().zs().to_vec();
        zs[0][1] += 0.1; // boundary knot (x0, y1): breaks x=min collinearity
        GridData2D::new(unit_knots(), unit_knots(), zs).unwrap()
    }

    fn alpha_matrix(a: f64) -> Vec<Vec<f64>> {
        vec![vec![a; 2]; 2]
    }

    fn cfg(resolution: usize) -> FixedPointConfig {
        FixedPointConfig {
            tol: 1e-12,
            max_iter: 100,
            resolution,
        }
    }

    #[test]
    fn axis_maps_examples() {
        let m = build_axis_maps(&[0.0, 0.5, 1.0]).unwrap();
        assert!(m.iter().all(|l| l.a == 0.5));
        let m = build_axis_maps(&[0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0]).unwrap();
        assert!(m.iter().all(|l| (l.a - 1.0 / 3.0).abs() <= 1e-15));
        let m = build_axis_maps(&[0.0, 0.2, 1.0]).unwrap();
        assert_eq!((m[0].a, m[1].a), (0.2, 0.8));
        for (i, l) in m.iter().enumerate() {
            let knots = [0.0, 0.2, 1.0];
            assert!((l.apply(0.0) - knots[i]).abs() <= 1e-15);
            assert!((l.apply(1.0) - knots[i + 1]).abs() <= 1e-15);
        }
    }

    #[test]
    fn qnm_corner_conditions_hold() {
        // alpha = 0 on the bilinear surface: q reproduces the targets.
        let grid = xy_grid();
        let q = solve_qnm(&grid, &alpha_matrix(0.0)).unwrap();
        for (n, row) in q.iter().enumerate() {
            for (m, qc) in row.iter().enumerate() {
                assert!((qc.eval(0.0, 0.0) - grid.zs()[n][m]).abs() <= 1e-12);
                assert!((qc.eval(1.0, 0.0) - grid.zs()[n + 1][m]).abs() <= 1e-12);
                assert!((qc.eval(0.0, 1.0) - grid.zs()[n][m + 1]).abs() <= 1e-12);
                assert!((qc.eval(1.0, 1.0) - grid.zs()[n + 1][m + 1]).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn qnm_zero_surface() {
        let zs = vec![vec![0.0; 3]; 3];
        let grid = GridData2D::new(unit_knots(), unit_knots(), zs).unwrap();
        for qc in solve_qnm(&grid, &alpha_matrix(0.7))
            .unwrap()
            .iter()
            .flatten()
        {
            assert_eq!((qc.e, qc.f, qc.g, qc.k), (0.0, 0.0, 0.0, 0.0));
        }
    }

    #[test]
    fn qnm_random_grid_residuals() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let xs = vec![0.0, 0.4, 1.0];
        let ys = vec![-1.0, 0.3, 2.0];
        let zs: Vec<Vec<f64>> = (0..3)
            .map(|_| (0..3).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let grid = GridData2D::new(xs.clone(), ys.clone(), zs.clone()).unwrap();
        let q = solve_qnm(&grid, &alpha_matrix(0.2)).unwrap();
        let (x0, xn, y0, ym) = (xs[0], xs[2], ys[0], ys[2]);
        for n in 0..2 {
            for m in 0..2 {
                let check = |xd: f64, yd: f64, zc: f64, zt: f64| {
                    ((0.2 * zc + q[n][m].eval(xd, yd)) - zt).abs()
                };
                assert!(check(x0, y0, zs[0][0], zs[n][m]) <= 1e-10);
                assert!(check(xn, y0, zs[2][0], zs[n + 1][m]) <= 1e-10);
                assert!(check(x0, ym, zs[0][2], zs[n][m + 1]) <= 1e-10);
                assert!(check(xn, ym, zs[2][2], zs[n + 1][m + 1]) <= 1e-10);
            }
        }
    }

    #[test]
    fn collinearity_verdicts() {
        assert!(check_collinearity(&xy_grid(), 1e-12).pass);

        let rep = check_collinearity(&bumped_grid(), 1e-9);
        assert!(!rep.pass);
        assert!((rep.sides["x=min"] - 0.1).abs() <= 1e-15);

        // z = x^2 y: the y=max side carries z = x^2, which is not linear.
        let xs = unit_knots();
        let zs: Vec<Vec<f64>> = xs
            .iter()
            .map(|&x| xs.iter().map(|&y| x * x * y).collect())
            .collect();
        let grid = GridData2D::new(xs.clone(), xs.clone(), zs).unwrap();
        let rep = check_collinearity(&grid, 1e-9);
        assert!(!rep.pass);
        assert!((rep.sides["y=max"] - 0.25).abs() <= 1e-15);
    }

    #[test]
    fn collinear_branches_agree_with_convex_combination() {
        let ifs = build_ifs2d(&xy_grid(), &alpha_matrix(0.3)).unwrap();
        let f = bilinear_start(ifs.grid(), 64, 64).unwrap();
        let tf = rb2_apply(&ifs, &f, SeamPolicy::CollinearBoundary).unwrap();
        // Along the seam x = 0.5 the operator must emit
        // (1 - lam) z_{1,m} + lam z_{1,m+1} regardless of branch.
        for j in 0..=64 {
            let y = tf.node_y(j);
            let m = cell_of(&[0.0, 0.5, 1.0], y);
            let lam = (y - [0.0, 0.5][m]) / 0.5;
            let expect = (1.0 - lam) * ifs.grid().zs()[1][m] + lam * ifs.grid().zs()[1][m + 1];
            assert!((tf.value_at(0.5, y) - expect).abs() <= 1e-12, "y = {y}");
        }
        for (_, jump) in seam_jump_report(&tf, &ifs).unwrap() {
            assert!(jump <= 1e-12);
        }
    }

    #[test]
    fn collinear_policy_rejects_noncollinear_data() {
        let ifs = build_ifs2d(&bumped_grid(), &alpha_matrix(0.3)).unwrap();
        let f = bilinear_start(ifs.grid(), 16, 16).unwrap();
        assert!(matches!(
            rb2_apply(&ifs, &f, SeamPolicy::CollinearBoundary),
            Err(Error::Policy(_))
        ));
    }

    #[test]
    fn raw_branches_disagree_on_bumped_grid() {
        let ifs = build_ifs2d(&bumped_grid(), &alpha_matrix(0.3)).unwrap();
        let f = bilinear_start(ifs.grid(), 64, 64).unwrap();
        let tf = rb2_apply(&ifs, &f, SeamPolicy::RawF).unwrap();
        let report = seam_jump_report(&tf, &ifs).unwrap();
        // The bump moves one x-seam branch by alpha * delta = 0.03.
        assert!(
            (report["x=1"] - 0.03).abs() <= 1e-12,
            "got {}",
            report["x=1"]
        );
        assert!(report["y=1"] <= 1e-12);
    }

    #[test]
    fn averaging_reports_zero_jumps() {
        let ifs = build_ifs2d(&bumped_grid(), &alpha_matrix(0.3)).unwrap();
        let f = bilinear_start(ifs.grid(), 32, 32).unwrap();
        let tf = rb2_apply(&ifs, &f, SeamPolicy::AverageG).unwrap();
        for (_, jump) in seam_jump_report(&tf, &ifs).unwrap() {
            assert_eq!(jump, 0.0);
        }
    }

    #[test]
    fn alpha_zero_fixed_point_is_bilinear_interpolant() {
        let ifs = build_ifs2d(&xy_grid(), &alpha_matrix(0.0)).unwrap();
        let f = fixed_point_2d(&ifs, SeamPolicy::RawF, &cfg(64)).unwrap();
        for i in 0..=64 {
            for j in 0..=64 {
                let (x, y) = (f.node_x(i), f.node_y(j));
                assert!((f.at(i, j) - x * y).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn collinear_fixed_point_interpolates_knots() {
        let ifs = build_ifs2d(&xy_grid(), &alpha_matrix(0.3)).unwrap();
        let f = fixed_point_2d(&ifs, SeamPolicy::CollinearBoundary, &cfg(64)).unwrap();
        for (n, &x) in ifs.grid().xs().iter().enumerate() {
            for (m, &y) in ifs.grid().ys().iter().enumerate() {
                assert!((f.value_at(x, y) - ifs.grid().zs()[n][m]).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn averaged_fixed_point_interpolates_bumped_knots() {
        let grid = bumped_grid();
        let ifs = build_ifs2d(&grid, &alpha_matrix(0.3)).unwrap();
        let f = fixed_point_2d(&ifs, SeamPolicy::AverageG, &cfg(64)).unwrap();
        for (n, &x) in grid.xs().iter().enumerate() {
            for (m, &y) in grid.ys().iter().enumerate() {
                assert!(
                    (f.value_at(x, y) - grid.zs()[n][m]).abs() <= 1e-10,
                    "knot ({n},{m})"
                );
            }
        }
        for (_, jump) in seam_jump_report(&f, &ifs).unwrap() {
            assert_eq!(jump, 0.0);
        }
    }

    #[test]
    fn operator_contracts_in_z() {
        let ifs = build_ifs2d(&xy_grid(), &alpha_matrix(0.4)).unwrap();
        let u = bilinear_start(ifs.grid(), 32, 32).unwrap();
        let mut samples = u.samples().to_vec();
        for (idx, s) in samples.iter_mut().enumerate() {
            *s += ((idx % 7) as f64 - 3.0) * 0.1;
        }
        let v = GridFunction2D::new((0.0, 1.0), (0.0, 1.0), (32, 32), samples).unwrap();
        let tu = rb2_apply(&ifs, &u, SeamPolicy::AverageG).unwrap();
        let tv = rb2_apply(&ifs, &v, SeamPolicy::AverageG).unwrap();
        assert!(tu.sup_distance(&tv) <= 0.4 * u.sup_distance(&v) + 1e-12);
    }

    #[test]
    fn closed_form_integral_examples() {
        let ifs = build_ifs2d(&xy_grid(), &alpha_matrix(0.0)).unwrap();
        assert!((integrate2d_closed_form(&ifs).unwrap() - 0.25).abs() <= 1e-15);

        let c = 3.25;
        let zs = vec![vec![c; 3]; 3];
        let grid = GridData2D::new(unit_knots(), unit_knots(), zs).unwrap();
        let ifs = build_ifs2d(&grid, &alpha_matrix(0.0)).unwrap();
        assert!((integrate2d_closed_form(&ifs).unwrap() - c).abs() <= 1e-12);
    }

    #[test]
    fn quadrature_matches_closed_form_on_collinear_grid() {
        let ifs = build_ifs2d(&xy_grid(), &alpha_matrix(0.2)).unwrap();
        let closed = integrate2d_closed_form(&ifs).unwrap();
        let quad = integrate2d_quadrature(&ifs, SeamPolicy::CollinearBoundary, &cfg(256)).unwrap();
        assert!((closed - quad).abs() <= 1e-3, "closed {closed} quad {quad}");
        // z = xy is itself the fixed point for any constant alpha, so both
        // integrals sit at 1/4.
        assert!((closed - 0.25).abs() <= 1e-12);
    }

    #[test]
    fn quadrature_trivials() {
        let ifs = build_ifs2d(&xy_grid(), &alpha_matrix(0.0)).unwrap();
        let q = integrate2d_quadrature(&ifs, SeamPolicy::RawF, &cfg(256)).unwrap();
        assert!((q - 0.25).abs() <= 1e-6);

        let zs = vec![vec![1.0; 3]; 3];
        let grid = GridData2D::new(unit_knots(), unit_knots(), zs).unwrap();
        let ifs = build_ifs2d(&grid, &alpha_matrix(0.0)).unwrap();
        let q = integrate2d_quadrature(&ifs, SeamPolicy::RawF, &cfg(64)).unwrap();
        assert!((q - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn contraction_rate_observed() {
        // Collinearity only constrains the boundary, so bumping the interior
        // knot keeps the policy legal while moving the start off the fixed
        // point.
        let mut zs: Vec<Vec<f64>> = xy_grid().zs().to_vec();
        zs[1][1] += 0.2;
        let grid = GridData2D::new(unit_knots(), unit_knots(), zs).unwrap();
        let ifs = build_ifs2d(&grid, &alpha_matrix(0.3)).unwrap();
        let mut f = bilinear_start(ifs.grid(), 64, 64).unwrap();
        let mut prev_delta = f64::NAN;
        for step in 0..8 {
            let next = rb2_apply(&ifs, &f, SeamPolicy::CollinearBoundary).unwrap();
            let delta = f.sup_distance(&next);
            if step > 0 && delta > 0.0 && prev_delta > 0.0 {
                assert!(delta / prev_delta <= 0.3 + 1e-6);
            }
            prev_delta = delta;
            f = next;
            if delta == 0.0 {
                break;
            }
        }
    }
}
