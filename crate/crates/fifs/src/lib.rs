//! Affine fractal interpolation: curves, surfaces, and their attractors.
//!
//! Given data points (t_0, x_0), ..., (t_N, x_N) and vertical scaling
//! factors |alpha_n| < 1, this crate solves for the unique iterated
//! function system of affine maps
//!
//! ```text
//! w_n(t, x) = (L_n(t), F_n(t, x)) = (a_n t + b_n, alpha_n x + q_n(t))
//! ```
//!
//! whose attractor is the graph of a continuous function interpolating the
//! data. The crate covers:
//!
//! * construction and validation of the maps ([`ifs1d`]);
//! * evaluation of the interpolant as the fixed point of the associated
//!   operator, closed-form integration, and a comparison with classical
//!   piecewise-linear interpolation ([`fif1d`]);
//! * attractor geometry: deterministic set iteration, the chaos game,
//!   Hausdorff distances, and occupancy rasters ([`attractor`]);
//! * rectangular fractal surfaces, where the operator is only well defined
//!   after choosing a seam policy ([`fis2d`]);
//! * file formats for data, systems, reports, and images ([`io`]).
//!
//! ```
//! use fifs::ifs1d::{build_ifs, DataSet1D, ScalingVector};
//! use fifs::fif1d::{fixed_point, integrate_closed_form, FixedPointConfig};
//!
//! let data = DataSet1D::new(vec![0.0, 0.5, 1.0], vec![0.0, 1.0, 0.0])?;
//! let ifs = build_ifs(&data, &ScalingVector::broadcast(0.3, 2)?)?;
//! let f = fixed_point(&ifs, &FixedPointConfig::default())?;
//! assert!((f.value_at(0.5) - 1.0).abs() < 1e-9);
//! assert!((integrate_closed_form(&ifs)? - 5.0 / 7.0).abs() < 1e-12);
//! # Ok::<(), fifs::Error>(())
//! ```

pub mod attractor;
pub mod error;
pub mod fif1d;
pub mod fis2d;
pub mod ifs1d;
pub mod io;

pub use error::{Error, Result};
