//! File formats: CSV data sets, JSON system descriptions and reports, and
//! PGM rasters.
//!
//! All emitters are deterministic: JSON objects are serialized with sorted
//! keys and every report ends with a single trailing newline, so repeated
//! runs produce byte-identical files. Floating-point numbers use the
//! shortest representation that round-trips.

use std::collections::HashMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::attractor::Raster;
use crate::error::{Error, Result};
use crate::fis2d::{build_ifs2d, GridData2D, Ifs2D, QCoeffs};
use crate::ifs1d::{build_ifs, validate_ifs, AffineMap1D, DataSet1D, Ifs1D, VerticalMap1D};

/// Parse `t,x` interpolation data. A single non-numeric first row is
/// accepted as a header; rows must be sorted by strictly increasing t.
pub fn parse_dataset1d<R: Read>(reader: R) -> Result<DataSet1D> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut knots = Vec::new();
    let mut values = Vec::new();
    for (idx, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse {
            line: e.position().map_or(idx + 1, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(idx + 1, |p| p.line() as usize);
        if rec.len() != 2 {
            if rec.len() == 1 && rec[0].is_empty() {
                continue; // blank line
            }
            return Err(Error::Parse {
                line,
                message: format!("expected 2 fields `t,x`, got {}", rec.len()),
            });
        }
        let parsed: std::result::Result<(f64, f64), _> =
            rec[0].parse().and_then(|t| rec[1].parse().map(|x| (t, x)));
        match parsed {
            Ok((t, x)) => {
                if let Some(&prev) = knots.last() {
                    if t <= prev {
                        return Err(Error::Parse {
                            line,
                            message: format!("t = {t} not greater than previous t = {prev}"),
                        });
                    }
                }
                knots.push(t);
                values.push(x);
            }
            Err(_) if idx == 0 => continue, // header row
            Err(e) => {
                return Err(Error::Parse {
                    line,
                    message: format!("bad number: {e}"),
                });
            }
        }
    }
    DataSet1D::new(knots, values)
}

pub fn write_dataset1d<W: Write>(mut w: W, data: &DataSet1D) -> Result<()> {
    writeln!(w, "t,x")?;
    for (t, x) in data.knots().iter().zip(data.values()) {
        writeln!(w, "{t},{x}")?;
    }
    Ok(())
}

/// Write evaluation samples as `t,f` CSV.
pub fn write_eval_csv<W: Write>(mut w: W, samples: &[(f64, f64)]) -> Result<()> {
    writeln!(w, "t,f")?;
    for (t, f) in samples {
        writeln!(w, "{t},{f}")?;
    }
    Ok(())
}

/// Write surface samples as `x,y,f` CSV.
pub fn write_eval2d_csv<W: Write>(mut w: W, samples: &[(f64, f64, f64)]) -> Result<()> {
    writeln!(w, "x,y,f")?;
    for (x, y, f) in samples {
        writeln!(w, "{x},{y},{f}")?;
    }
    Ok(())
}

/// Canonical JSON report: sorted keys (serde_json's default map is ordered)
/// plus a trailing newline.
pub fn serialize_report(value: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serialization");
    s.push('\n');
    s
}

#[derive(Debug, Serialize, Deserialize)]
struct VerticalMapFile {
    alpha: f64,
    q1: f64,
    q0: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct Ifs1DFile {
    knots: Vec<f64>,
    values: Vec<f64>,
    alphas: Vec<f64>,
    lmaps: Vec<AffineMap1D>,
    vmaps: Vec<VerticalMapFile>,
}

/// JSON description of a constructed 1D system.
pub fn ifs1d_to_json(ifs: &Ifs1D) -> String {
    let file = Ifs1DFile {
        knots: ifs.data().knots().to_vec(),
        values: ifs.data().values().to_vec(),
        alphas: ifs.vmaps().iter().map(|v| v.alpha).collect(),
        lmaps: ifs.lmaps().to_vec(),
        vmaps: ifs
            .vmaps()
            .iter()
            .map(|v| VerticalMapFile {
                alpha: v.alpha,
                q1: v.q1,
                q0: v.q0,
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&file).expect("ifs serialization");
    s.push('\n');
    s
}

/// Load a 1D system and verify the stored maps actually solve the endpoint
/// conditions for the stored data.
pub fn ifs1d_from_json<R: Read>(reader: R) -> Result<Ifs1D> {
    let file: Ifs1DFile = serde_json::from_reader(reader)?;
    let data = DataSet1D::new(file.knots, file.values)?;
    let n = data.knots().len() - 1;
    if file.lmaps.len() != n || file.vmaps.len() != n || file.alphas.len() != n {
        return Err(Error::InvalidData(format!(
            "expected {n} maps for {} knots",
            n + 1
        )));
    }
    for (v, a) in file.vmaps.iter().zip(&file.alphas) {
        if v.alpha != *a {
            return Err(Error::InvalidData(
                "alphas field disagrees with vmaps".into(),
            ));
        }
    }
    let vmaps: Vec<VerticalMap1D> = file
        .vmaps
        .iter()
        .map(|v| VerticalMap1D {
            alpha: v.alpha,
            q1: v.q1,
            q0: v.q0,
        })
        .collect();
    let ifs = Ifs1D::from_parts(data, file.lmaps, vmaps)?;
    let tol = 1e-9 * (1.0 + ifs.data().value_scale());
    let check = validate_ifs(&ifs, tol);
    if check.max_residual > tol {
        return Err(Error::InvalidData(format!(
            "stored maps do not satisfy the endpoint conditions: residual {:e}",
            check.max_residual
        )));
    }
    Ok(ifs)
}

/// Round-trip check used by the CLI after construction.
pub fn ifs1d_roundtrip(ifs: &Ifs1D) -> Result<()> {
    let json = ifs1d_to_json(ifs);
    let back = ifs1d_from_json(json.as_bytes())?;
    let same = ifs.lmaps() == back.lmaps() && ifs.vmaps() == back.vmaps();
    if !same {
        return Err(Error::InvalidData("ifs JSON round-trip mismatch".into()));
    }
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct Grid2DFile {
    xs: Vec<f64>,
    ys: Vec<f64>,
    /// zs[n][m] is the height at (xs[n], ys[m]).
    zs: Vec<Vec<f64>>,
}

/// Parse grid data from JSON `{xs, ys, zs}`.
pub fn parse_grid2d_json<R: Read>(reader: R) -> Result<GridData2D> {
    let file: Grid2DFile = serde_json::from_reader(reader)?;
    GridData2D::new(file.xs, file.ys, file.zs)
}

pub fn grid2d_to_json(grid: &GridData2D) -> String {
    let file = Grid2DFile {
        xs: grid.xs().to_vec(),
        ys: grid.ys().to_vec(),
        zs: grid.zs().to_vec(),
    };
    let mut s = serde_json::to_string_pretty(&file).expect("grid serialization");
    s.push('\n');
    s
}

/// Parse grid data from `x,y,z` CSV triples (header optional, any row
/// order). Every (x, y) combination must appear exactly once.
pub fn parse_grid2d_csv<R: Read>(reader: R) -> Result<GridData2D> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut triples: Vec<(f64, f64, f64, usize)> = Vec::new();
    for (idx, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse {
            line: e.position().map_or(idx + 1, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(idx + 1, |p| p.line() as usize);
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        if rec.len() != 3 {
            return Err(Error::Parse {
                line,
                message: format!("expected 3 fields `x,y,z`, got {}", rec.len()),
            });
        }
        let nums: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse).collect();
        match nums {
            Ok(v) => triples.push((v[0], v[1], v[2], line)),
            Err(_) if idx == 0 => continue, // header row
            Err(e) => {
                return Err(Error::Parse {
                    line,
                    message: format!("bad number: {e}"),
                })
            }
        }
    }
    if triples.is_empty() {
        return Err(Error::InvalidData("no grid rows".into()));
    }
    let mut xs: Vec<f64> = triples.iter().map(|t| t.0).collect();
    let mut ys: Vec<f64> = triples.iter().map(|t| t.1).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    ys.sort_by(f64::total_cmp);
    ys.dedup();
    let mut seen: HashMap<(u64, u64), f64> = HashMap::new();
    for &(x, y, z, line) in &triples {
        if seen.insert((x.to_bits(), y.to_bits()), z).is_some() {
            return Err(Error::Parse {
                line,
                message: format!("duplicate grid value at (x={x}, y={y})"),
            });
        }
    }
    let mut zs = vec![vec![0.0; ys.len()]; xs.len()];
    for (n, &x) in xs.iter().enumerate() {
        for (m, &y) in ys.iter().enumerate() {
            match seen.get(&(x.to_bits(), y.to_bits())) {
                Some(&z) => zs[n][m] = z,
                None => {
                    return Err(Error::InvalidData(format!(
                        "missing grid value at (x={x}, y={y})"
                    )))
                }
            }
        }
    }
    GridData2D::new(xs, ys, zs)
}

#[derive(Debug, Serialize, Deserialize)]
struct QCoeffsFile {
    e: f64,
    f: f64,
    g: f64,
    k: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct Ifs2DFile {
    xs: Vec<f64>,
    ys: Vec<f64>,
    zs: Vec<Vec<f64>>,
    alphas: Vec<Vec<f64>>,
    qcoeffs: Vec<Vec<QCoeffsFile>>,
}

pub fn ifs2d_to_json(ifs: &Ifs2D) -> String {
    let file = Ifs2DFile {
        xs: ifs.grid().xs().to_vec(),
        ys: ifs.grid().ys().to_vec(),
        zs: ifs.grid().zs().to_vec(),
        alphas: ifs.alphas().to_vec(),
        qcoeffs: ifs
            .qcoeffs()
            .iter()
            .map(|row| {
                row.iter()
                    .map(|q| QCoeffsFile {
                        e: q.e,
                        f: q.f,
                        g: q.g,
                        k: q.k,
                    })
                    .collect()
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&file).expect("ifs2d serialization");
    s.push('\n');
    s
}

/// Load a 2D system; the stored coefficients are recomputed from the grid
/// and scalings and must agree.
pub fn ifs2d_from_json<R: Read>(reader: R) -> Result<Ifs2D> {
    let file: Ifs2DFile = serde_json::from_reader(reader)?;
    let grid = GridData2D::new(file.xs, file.ys, file.zs)?;
    let ifs = build_ifs2d(&grid, &file.alphas)?;
    let scale = 1e-9 * (1.0 + grid.z_scale());
    let stored: Vec<&QCoeffsFile> = file.qcoeffs.iter().flatten().collect();
    let fresh: Vec<&QCoeffs> = ifs.qcoeffs().iter().flatten().collect();
    if stored.len() != fresh.len() {
        return Err(Error::InvalidData("qcoeffs shape mismatch".into()));
    }
    for (s, f) in stored.iter().zip(&fresh) {
        let dev = (s.e - f.e)
            .abs()
            .max((s.f - f.f).abs())
            .max((s.g - f.g).abs())
            .max((s.k - f.k).abs());
        if dev > scale {
            return Err(Error::InvalidData(format!(
                "stored q coefficients do not solve the corner conditions: deviation {dev:e}"
            )));
        }
    }
    Ok(ifs)
}

/// Write a raster as PGM, either ASCII (`P2`) or binary (`P5`), with the
/// data bounds recorded in a comment line `# bbox t0 tN xmin xmax`.
pub fn write_pgm<W: Write>(mut w: W, raster: &Raster, binary: bool) -> Result<()> {
    let (w_px, h_px) = (raster.width, raster.height);
    let (t0, tn, x_min, x_max) = raster.bounds;
    let gray = raster.normalized();
    writeln!(w, "{}", if binary { "P5" } else { "P2" })?;
    writeln!(w, "# bbox {t0} {tn} {x_min} {x_max}")?;
    writeln!(w, "{w_px} {h_px}")?;
    writeln!(w, "255")?;
    if binary {
        w.write_all(&gray)?;
    } else {
        for row in gray.chunks(w_px) {
            let line: Vec<String> = row.iter().map(|g| g.to_string()).collect();
            writeln!(w, "{}", line.join(" "))?;
        }
    }
    Ok(())
}

/// Construct a 1D system directly from CSV data and scaling factors; a
/// single factor is broadcast across all subintervals.
pub fn build_ifs_from_csv<R: Read>(reader: R, alphas: &[f64]) -> Result<Ifs1D> {
    let data = parse_dataset1d(reader)?;
    let sv = if alphas.len() == 1 {
        crate::ifs1d::ScalingVector::broadcast(alphas[0], data.knots().len() - 1)?
    } else {
        crate::ifs1d::ScalingVector::new(alphas.to_vec())?
    };
    build_ifs(&data, &sv)
}
