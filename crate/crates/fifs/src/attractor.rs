//! The attractor of the system as a point set: deterministic set-valued
//! iteration, the stochastic chaos game, exact Hausdorff distances between
//! point sets, and rasterization for image export.
//!
//! For a solved system the attractor is the graph of the fractal
//! interpolant, which `graph_coincidence_check` verifies numerically.

use crate::error::{Error, Result};
use crate::fif1d::GridFunction1D;
use crate::ifs1d::Ifs1D;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Finite set of (t, x) points.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    points: Vec<(f64, f64)>,
}

impl PointSet {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.iter().any(|(t, x)| !t.is_finite() || !x.is_finite()) {
            return Err(Error::InvalidData("non-finite point".into()));
        }
        Ok(Self { points })
    }

    /// The data points of a system: the canonical starting set, since every
    /// data point is mapped back onto a data point.
    pub fn from_data(ifs: &Ifs1D) -> Self {
        let d = ifs.data();
        Self {
            points: d
                .knots()
                .iter()
                .copied()
                .zip(d.values().iter().copied())
                .collect(),
        }
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Sort by (t, x) and drop exact duplicates. Canonical form for
    /// comparisons and deterministic output.
    pub fn canonicalize(&mut self) {
        self.points
            .sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        self.points.dedup_by(|a, b| a == b);
    }

    /// Tight bounding box (tmin, tmax, xmin, xmax).
    pub fn bounds(&self) -> Option<(f64, f64, f64, f64)> {
        if self.points.is_empty() {
            return None;
        }
        let mut b = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for &(t, x) in &self.points {
            b.0 = b.0.min(t);
            b.1 = b.1.max(t);
            b.2 = b.2.min(x);
            b.3 = b.3.max(x);
        }
        Some(b)
    }

    /// Euclidean diameter of the bounding box.
    pub fn diameter(&self) -> f64 {
        match self.bounds() {
            Some((t0, t1, x0, x1)) => ((t1 - t0).powi(2) + (x1 - x0).powi(2)).sqrt(),
            None => 0.0,
        }
    }
}

/// Apply every map of the system to every point. Output has exactly
/// N * |B| points; deduplication is the caller's business.
pub fn hutchinson_step(ifs: &Ifs1D, b: &PointSet) -> Result<PointSet> {
    if b.is_empty() {
        return Err(Error::Domain("empty point set".into()));
    }
    let mut out = Vec::with_capacity(ifs.n_maps() * b.len());
    for n in 0..ifs.n_maps() {
        for &(t, x) in b.points() {
            out.push(ifs.map_point(n, t, x));
        }
    }
    Ok(PointSet { points: out })
}

/// Controls for the deterministic iteration's memory use.
#[derive(Debug, Clone, Copy)]
pub struct DeterministicConfig {
    /// Snap points to a 2^snap_bits x 2^snap_bits lattice over the current
    /// bounding box once a step exceeds `snap_threshold` candidate points;
    /// None disables snapping entirely.
    pub snap_bits: Option<u32>,
    pub snap_threshold: usize,
    /// Hard cap on the point count after dedup; exceeding it is an error.
    pub max_points: usize,
}

impl Default for DeterministicConfig {
    fn default() -> Self {
        Self {
            snap_bits: Some(12),
            snap_threshold: 1_000_000,
            max_points: 10_000_000,
        }
    }
}

/// k Hutchinson steps from b0 with exact deduplication after every step,
/// using the default memory policy.
pub fn deterministic_attractor(ifs: &Ifs1D, b0: &PointSet, k: usize) -> Result<PointSet> {
    deterministic_attractor_with(ifs, b0, k, &DeterministicConfig::default())
}

pub fn deterministic_attractor_with(
    ifs: &Ifs1D,
    b0: &PointSet,
    k: usize,
    cfg: &DeterministicConfig,
) -> Result<PointSet> {
    if b0.is_empty() {
        return Err(Error::Domain("empty starting set".into()));
    }
    let mut b = b0.clone();
    b.canonicalize();
    for _ in 0..k {
        let candidates = ifs.n_maps() * b.len();
        if candidates > cfg.max_points {
            return Err(Error::Resource(format!(
                "step would produce {candidates} points (cap {})",
                cfg.max_points
            )));
        }
        let mut next = hutchinson_step(ifs, &b)?;
        if candidates > cfg.snap_threshold {
            if let Some(bits) = cfg.snap_bits {
                snap_to_lattice(&mut next, bits);
            }
        }
        next.canonicalize();
        b = next;
    }
    Ok(b)
}

/// Round each coordinate to a 2^bits-cell lattice over the set's bounding
/// box. Bounded-resolution dedup: afterwards at most (2^bits + 1)^2
/// distinct points can survive.
fn snap_to_lattice(set: &mut PointSet, bits: u32) {
    let Some((tmin, tmax, xmin, xmax)) = set.bounds() else {
        return;
    };
    let cells = (1u64 << bits) as f64;
    let snap = |v: f64, lo: f64, hi: f64| {
        if hi > lo {
            lo + ((v - lo) / (hi - lo) * cells).round() / cells * (hi - lo)
        } else {
            v
        }
    };
    for p in &mut set.points {
        p.0 = snap(p.0, tmin, tmax);
        p.1 = snap(p.1, xmin, xmax);
    }
}

/// Stochastic attractor sampling.
#[derive(Debug, Clone, Copy)]
pub struct ChaosGameConfig {
    pub seed: u64,
    /// Total points generated, including the discarded prefix.
    pub iterations: usize,
    pub burn_in: usize,
    /// Pick maps proportionally to their horizontal contraction instead of
    /// uniformly. Changes rendering density only, not the limit set.
    pub weighted: bool,
}

impl Default for ChaosGameConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            iterations: 100_000,
            burn_in: 100,
            weighted: false,
        }
    }
}

/// Random orbit of the joint maps from (t0, x0); the first `burn_in`
/// points are discarded. Deterministic for a fixed seed.
pub fn chaos_game(ifs: &Ifs1D, cfg: &ChaosGameConfig) -> Result<PointSet> {
    if cfg.iterations <= cfg.burn_in {
        return Err(Error::Domain(format!(
            "iterations ({}) must exceed burn_in ({})",
            cfg.iterations, cfg.burn_in
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let weights: Vec<f64> = if cfg.weighted {
        let total: f64 = ifs.lmaps().iter().map(|l| l.a.abs()).sum();
        let mut acc = 0.0;
        ifs.lmaps()
            .iter()
            .map(|l| {
                acc += l.a.abs() / total;
                acc
            })
            .collect()
    } else {
        Vec::new()
    };
    let mut points = Vec::with_capacity(cfg.iterations - cfg.burn_in);
    let (mut t, mut x) = (ifs.data().t0(), ifs.data().x0());
    for i in 0..cfg.iterations {
        let n = if cfg.weighted {
            let u: f64 = rng.random();
            weights.partition_point(|&w| w < u).min(ifs.n_maps() - 1)
        } else {
            rng.random_range(0..ifs.n_maps())
        };
        let (nt, nx) = ifs.map_point(n, t, x);
        t = nt;
        x = nx;
        if i >= cfg.burn_in {
            points.push((t, x));
        }
    }
    Ok(PointSet { points })
}

/// Exact symmetric Hausdorff distance in the Euclidean plane.
///
/// Brute force over pairs, pruned: with both sets sorted by t, a candidate
/// further than the best distance found so far along the t axis alone
/// cannot improve the minimum, so each nearest-point search only scans a
/// window around the query's t position. The result is exact.
pub fn hausdorff_distance(a: &PointSet, b: &PointSet) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Domain("Hausdorff distance of an empty set".into()));
    }
    let mut sa = a.points().to_vec();
    let mut sb = b.points().to_vec();
    sa.sort_by(|p, q| p.0.total_cmp(&q.0));
    sb.sort_by(|p, q| p.0.total_cmp(&q.0));
    Ok(directed(&sa, &sb).max(directed(&sb, &sa)).sqrt())
}

/// max over `from` of the squared distance to the nearest point of `to`;
/// both slices sorted by t.
fn directed(from: &[(f64, f64)], to: &[(f64, f64)]) -> f64 {
    let mut worst = 0.0f64;
    for &(t, x) in from {
        let start = to.partition_point(|p| p.0 < t);
        let mut best = f64::MAX;
        // Expand outwards; stop a side once its t-gap alone exceeds best.
        let (mut l, mut r) = (start, start);
        loop {
            let left_gap = if l > 0 { t - to[l - 1].0 } else { f64::MAX };
            let right_gap = if r < to.len() { to[r].0 - t } else { f64::MAX };
            if left_gap * left_gap > best && right_gap * right_gap > best {
                break;
            }
            if left_gap <= right_gap {
                l -= 1;
                let d = sq_dist((t, x), to[l]);
                best = best.min(d);
            } else {
                let d = sq_dist((t, x), to[r]);
                best = best.min(d);
                r += 1;
            }
        }
        worst = worst.max(best);
    }
    worst
}

fn sq_dist(p: (f64, f64), q: (f64, f64)) -> f64 {
    (p.0 - q.0).powi(2) + (p.1 - q.1).powi(2)
}

/// Max vertical deviation of the depth-k attractor approximation (started
/// from the data points) from the converged grid interpolant: the numeric
/// form of "the graph is the attractor".
pub fn graph_coincidence_check(ifs: &Ifs1D, f: &GridFunction1D, k: usize) -> Result<f64> {
    let b = deterministic_attractor(ifs, &PointSet::from_data(ifs), k)?;
    Ok(b.points()
        .iter()
        .map(|&(t, x)| (x - f.value_at(t)).abs())
        .fold(0.0, f64::max))
}

/// Occupancy/intensity grid over a bounding box in (t, x) space.
/// Cells are row-major, top row first (large x at row 0).
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    pub width: usize,
    pub height: usize,
    /// Visit counts, length width * height.
    pub cells: Vec<u32>,
    /// (tmin, tmax, xmin, xmax)
    pub bounds: (f64, f64, f64, f64),
}

impl Raster {
    pub fn occupied(&self) -> usize {
        self.cells.iter().filter(|&&c| c > 0).count()
    }

    pub fn max_count(&self) -> u32 {
        self.cells.iter().copied().max().unwrap_or(0)
    }

    /// Cells where exactly one of the two rasters is occupied. Requires
    /// identical dimensions and bounds.
    pub fn occupancy_mismatch(&self, other: &Raster) -> Result<usize> {
        if self.width != other.width || self.height != other.height || self.bounds != other.bounds {
            return Err(Error::Domain("raster dimensions/bounds differ".into()));
        }
        Ok(self
            .cells
            .iter()
            .zip(&other.cells)
            .filter(|(a, b)| (**a > 0) != (**b > 0))
            .count())
    }

    /// Gray levels for export: zero stays zero, any occupied cell maps to
    /// at least 1, the busiest cell to 255.
    pub fn normalized(&self) -> Vec<u8> {
        let max = self.max_count();
        self.cells
            .iter()
            .map(|&c| {
                if c == 0 || max == 0 {
                    0
                } else {
                    ((c as f64 / max as f64 * 255.0).round() as u8).max(1)
                }
            })
            .collect()
    }
}

/// Bin points over their tight bounding box. A degenerate box dimension is
/// expanded by 0.5 on each side so binning stays well defined.
pub fn rasterize(points: &PointSet, width: usize, height: usize) -> Result<Raster> {
    let Some(mut b) = points.bounds() else {
        return Err(Error::Domain("empty point set".into()));
    };
    if b.0 == b.1 {
        b.0 -= 0.5;
        b.1 += 0.5;
    }
    if b.2 == b.3 {
        b.2 -= 0.5;
        b.3 += 0.5;
    }
    rasterize_with_bounds(points, width, height, b)
}

/// Bin points over an explicit bounding box (points outside are clamped to
/// the border cells). Lets two point sets share one cell grid.
pub fn rasterize_with_bounds(
    points: &PointSet,
    width: usize,
    height: usize,
    bounds: (f64, f64, f64, f64),
) -> Result<Raster> {
    if width == 0 || height == 0 {
        return Err(Error::Domain("raster dimensions must be positive".into()));
    }
    let (tmin, tmax, xmin, xmax) = bounds;
    if !(tmin < tmax && xmin < xmax) {
        return Err(Error::Domain(format!("degenerate bounds {bounds:?}")));
    }
    let mut cells = vec![0u32; width * height];
    for &(t, x) in points.points() {
        let col = (((t - tmin) / (tmax - tmin) * width as f64) as usize).min(width - 1);
        let row_up = (((x - xmin) / (xmax - xmin) * height as f64) as usize).min(height - 1);
        let row = height - 1 - row_up;
        cells[row * width + col] += 1;
    }
    Ok(Raster {
        width,
        height,
        cells,
        bounds,
    })
}
