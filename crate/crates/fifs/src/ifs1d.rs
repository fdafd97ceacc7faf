//! Construction of one-dimensional affine iterated function systems from
//! interpolation data.
//!
//! Given knots t0 < t1 < ... < tN with values x0..xN and vertical scalings
//! |alpha_n| < 1, each subinterval gets a pair of maps
//!
//! ```text
//! L_n(t) = a_n t + b_n          (domain contraction onto [t_{n-1}, t_n])
//! F_n(t, x) = alpha_n x + q_n1 t + q_n0
//! ```
//!
//! with coefficients solved so that L_n fixes the subinterval endpoints and
//! F_n carries the extreme data points onto the subinterval's data points.
//! The graph of the interpolant is the attractor of {(L_n, F_n)}.

use crate::error::{Error, Result};

/// Interpolation data: strictly increasing knots with one value per knot.
/// At least two subintervals are required.
#[derive(Debug, Clone, PartialEq)]
pub struct DataSet1D {
    knots: Vec<f64>,
    values: Vec<f64>,
}

impl DataSet1D {
    pub fn new(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if knots.len() != values.len() {
            return Err(Error::InvalidData(format!(
                "knot/value length mismatch: {} vs {}",
                knots.len(),
                values.len()
            )));
        }
        if knots.len() < 3 {
            return Err(Error::InvalidData(format!(
                "need at least 3 points (2 subintervals), got {}",
                knots.len()
            )));
        }
        for v in knots.iter().chain(values.iter()) {
            if !v.is_finite() {
                return Err(Error::InvalidData(format!("non-finite entry {v}")));
            }
        }
        if !knots.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidData("knots not strictly increasing".into()));
        }
        Ok(Self { knots, values })
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Number of subintervals N.
    pub fn n_intervals(&self) -> usize {
        self.knots.len() - 1
    }

    pub fn t0(&self) -> f64 {
        self.knots[0]
    }

    pub fn tn(&self) -> f64 {
        *self.knots.last().unwrap()
    }

    pub fn x0(&self) -> f64 {
        self.values[0]
    }

    pub fn xn(&self) -> f64 {
        *self.values.last().unwrap()
    }

    pub fn span(&self) -> f64 {
        self.tn() - self.t0()
    }

    /// Largest absolute ordinate; used to scale relative tolerances.
    pub fn value_scale(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Index n of the subinterval [t_{n-1}, t_n) containing t, 0-based
    /// (returns 0..N-1). The convention is half-open with the last
    /// subinterval closed, so every t in [t0, tN] has exactly one owner.
    pub fn subinterval_of(&self, t: f64) -> usize {
        let n = self.knots.partition_point(|k| *k <= t);
        n.clamp(1, self.n_intervals()) - 1
    }
}

/// Per-subinterval vertical scaling factors, each strictly inside (-1, 1).
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingVector(Vec<f64>);

impl ScalingVector {
    pub fn new(alphas: Vec<f64>) -> Result<Self> {
        for (i, a) in alphas.iter().enumerate() {
            if !a.is_finite() || a.abs() >= 1.0 {
                return Err(Error::InvalidScaling(format!(
                    "alpha[{i}] = {a} not strictly inside (-1, 1)"
                )));
            }
        }
        Ok(Self(alphas))
    }

    /// Same scalar for every subinterval.
    pub fn broadcast(alpha: f64, n: usize) -> Result<Self> {
        Self::new(vec![alpha; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Affine map t -> a t + b. Used both as the domain contraction L_n and as
/// an axis map for surfaces.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct AffineMap1D {
    pub a: f64,
    pub b: f64,
}

impl AffineMap1D {
    pub fn apply(&self, t: f64) -> f64 {
        self.a * t + self.b
    }

    /// Inverse map; panics only if a == 0, which construction rejects.
    pub fn inverse(&self, t: f64) -> f64 {
        (t - self.b) / self.a
    }
}

/// Vertical map F_n(t, x) = alpha x + q1 t + q0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerticalMap1D {
    pub alpha: f64,
    pub q1: f64,
    pub q0: f64,
}

impl VerticalMap1D {
    pub fn apply(&self, t: f64, x: f64) -> f64 {
        self.alpha * x + self.q1 * t + self.q0
    }

    /// The shear part q(t) = q1 t + q0 alone.
    pub fn q(&self, t: f64) -> f64 {
        self.q1 * t + self.q0
    }
}

/// A complete iterated function system over interpolation data: one
/// (L_n, F_n) pair per subinterval.
#[derive(Debug, Clone, PartialEq)]
pub struct Ifs1D {
    data: DataSet1D,
    lmaps: Vec<AffineMap1D>,
    vmaps: Vec<VerticalMap1D>,
}

/// Domain contractions: L_n(t0) = t_{n-1}, L_n(tN) = t_n for every n.
pub fn build_lmaps(data: &DataSet1D) -> Vec<AffineMap1D> {
    let (t0, tn, span) = (data.t0(), data.tn(), data.span());
    data.knots()
        .windows(2)
        .map(|w| AffineMap1D {
            a: (w[1] - w[0]) / span,
            b: (tn * w[0] - t0 * w[1]) / span,
        })
        .collect()
}

/// Vertical maps solved from the endpoint conditions
/// F_n(t0, x0) = x_{n-1} and F_n(tN, xN) = x_n.
pub fn solve_qn(data: &DataSet1D, alphas: &ScalingVector) -> Result<Vec<VerticalMap1D>> {
    if alphas.len() != data.n_intervals() {
        return Err(Error::InvalidScaling(format!(
            "expected {} scaling factors, got {}",
            data.n_intervals(),
            alphas.len()
        )));
    }
    let (t0, x0, xn, span) = (data.t0(), data.x0(), data.xn(), data.span());
    Ok(data
        .values()
        .windows(2)
        .zip(alphas.as_slice())
        .map(|(w, &alpha)| {
            let q1 = (w[1] - w[0] - alpha * (xn - x0)) / span;
            let q0 = w[0] - alpha * x0 - q1 * t0;
            VerticalMap1D { alpha, q1, q0 }
        })
        .collect())
}

/// Solve both map families and assemble the system.
pub fn build_ifs(data: &DataSet1D, alphas: &ScalingVector) -> Result<Ifs1D> {
    let lmaps = build_lmaps(data);
    let vmaps = solve_qn(data, alphas)?;
    Ok(Ifs1D {
        data: data.clone(),
        lmaps,
        vmaps,
    })
}

impl Ifs1D {
    /// Assemble from raw coefficients without solving or validating the
    /// endpoint conditions. Escape hatch for experiments that deliberately
    /// break the construction (see the endpoint-violation experiment);
    /// `validate` reports how broken the result is.
    pub fn from_parts(
        data: DataSet1D,
        lmaps: Vec<AffineMap1D>,
        vmaps: Vec<VerticalMap1D>,
    ) -> Result<Self> {
        if lmaps.len() != data.n_intervals() || vmaps.len() != data.n_intervals() {
            return Err(Error::InvalidData(format!(
                "expected {} maps per family, got {} lmaps / {} vmaps",
                data.n_intervals(),
                lmaps.len(),
                vmaps.len()
            )));
        }
        for (i, m) in lmaps.iter().enumerate() {
            if m.a == 0.0 || !m.a.is_finite() || !m.b.is_finite() {
                return Err(Error::InvalidData(format!(
                    "lmap[{i}] not invertible: {m:?}"
                )));
            }
        }
        for (i, m) in vmaps.iter().enumerate() {
            if ![m.alpha, m.q1, m.q0].iter().all(|v| v.is_finite()) {
                return Err(Error::InvalidData(format!(
                    "vmap[{i}] has non-finite coefficient"
                )));
            }
        }
        Ok(Self { data, lmaps, vmaps })
    }

    pub fn data(&self) -> &DataSet1D {
        &self.data
    }

    pub fn lmaps(&self) -> &[AffineMap1D] {
        &self.lmaps
    }

    pub fn vmaps(&self) -> &[VerticalMap1D] {
        &self.vmaps
    }

    pub fn n_maps(&self) -> usize {
        self.lmaps.len()
    }

    /// Horizontal contractivity factor s = max_n a_n.
    pub fn horizontal_factor(&self) -> f64 {
        self.lmaps.iter().fold(0.0, |m, l| m.max(l.a.abs()))
    }

    /// Vertical contraction factor delta = max_n |alpha_n|; the rate of the
    /// interpolation operator.
    pub fn vertical_factor(&self) -> f64 {
        self.vmaps.iter().fold(0.0, |m, v| m.max(v.alpha.abs()))
    }

    /// Apply the n-th joint map w_n(t, x) = (L_n(t), F_n(t, x)).
    pub fn map_point(&self, n: usize, t: f64, x: f64) -> (f64, f64) {
        (self.lmaps[n].apply(t), self.vmaps[n].apply(t, x))
    }
}

/// Residuals of the four endpoint conditions for one subinterval map pair.
#[derive(Debug, Clone, Copy)]
pub struct MapResiduals {
    /// |L_n(t0) - t_{n-1}|
    pub l_left: f64,
    /// |L_n(tN) - t_n|
    pub l_right: f64,
    /// |F_n(t0, x0) - x_{n-1}|
    pub f_left: f64,
    /// |F_n(tN, xN) - x_n|
    pub f_right: f64,
    pub a_abs: f64,
    pub alpha_abs: f64,
}

impl MapResiduals {
    pub fn max_residual(&self) -> f64 {
        self.l_left
            .max(self.l_right)
            .max(self.f_left)
            .max(self.f_right)
    }

    pub fn contractive(&self) -> bool {
        self.a_abs < 1.0 && self.alpha_abs < 1.0
    }
}

/// Per-map endpoint residuals plus an overall verdict.
#[derive(Debug, Clone)]
pub struct IfsValidation {
    pub per_map: Vec<MapResiduals>,
    pub max_residual: f64,
    pub contractive: bool,
    pub pass: bool,
}

/// Check every endpoint condition and contraction factor against `tol`.
/// Reporting only; never fails.
pub fn validate_ifs(ifs: &Ifs1D, tol: f64) -> IfsValidation {
    let d = ifs.data();
    let per_map: Vec<MapResiduals> = (0..ifs.n_maps())
        .map(|n| {
            let l = &ifs.lmaps()[n];
            let f = &ifs.vmaps()[n];
            MapResiduals {
                l_left: (l.apply(d.t0()) - d.knots()[n]).abs(),
                l_right: (l.apply(d.tn()) - d.knots()[n + 1]).abs(),
                f_left: (f.apply(d.t0(), d.x0()) - d.values()[n]).abs(),
                f_right: (f.apply(d.tn(), d.xn()) - d.values()[n + 1]).abs(),
                a_abs: l.a.abs(),
                alpha_abs: f.alpha.abs(),
            }
        })
        .collect();
    let max_residual = per_map
        .iter()
        .map(MapResiduals::max_residual)
        .fold(0.0, f64::max);
    let contractive = per_map.iter().all(MapResiduals::contractive);
    IfsValidation {
        per_map,
        max_residual,
        contractive,
        pass: max_residual <= tol && contractive,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn tent(alpha: f64) -> Ifs1D {
        let data = DataSet1D::new(vec![0.0, 0.5, 1.0], vec![0.0, 1.0, 0.0]).unwrap();
        let alphas = ScalingVector::broadcast(alpha, 2).unwrap();
        build_ifs(&data, &alphas).unwrap()
    }

    #[test]
    fn lmaps_bisect_unit_interval() {
        let ifs = tent(0.3);
        assert_eq!(ifs.lmaps()[0], AffineMap1D { a: 0.5, b: 0.0 });
        assert_eq!(ifs.lmaps()[1], AffineMap1D { a: 0.5, b: 0.5 });
    }

    #[test]
    fn single_subinterval_rejected() {
        assert!(DataSet1D::new(vec![0.0, 1.0], vec![0.0, 1.0]).is_err());
    }

    #[test]
    fn lmaps_nonuniform_endpoint_images() {
        let data = DataSet1D::new(vec![0.0, 0.25, 1.0], vec![0.0, 1.0, 0.0]).unwrap();
        let lmaps = build_lmaps(&data);
        assert_eq!(lmaps[0].a, 0.25);
        assert_eq!(lmaps[1].a, 0.75);
        for (n, l) in lmaps.iter().enumerate() {
            assert!((l.apply(0.0) - data.knots()[n]).abs() <= 1e-15);
            assert!((l.apply(1.0) - data.knots()[n + 1]).abs() <= 1e-15);
        }
    }

    #[test]
    fn tent_qn_alpha_zero_gives_chords() {
        let data = DataSet1D::new(vec![0.0, 0.5, 1.0], vec![0.0, 1.0, 0.0]).unwrap();
        let vmaps = solve_qn(&data, &ScalingVector::broadcast(0.0, 2).unwrap()).unwrap();
        assert_eq!((vmaps[0].q1, vmaps[0].q0), (2.0 * 0.5, 0.0));
        assert_eq!((vmaps[1].q1, vmaps[1].q0), (-1.0, 1.0));
    }

    #[test]
    fn tent_qn_alpha_03() {
        let ifs = tent(0.3);
        let v = ifs.vmaps();
        // x_N = x_0 = 0 makes the alpha term drop out of q1.
        assert_eq!((v[0].q1, v[0].q0), (1.0, 0.0));
        assert_eq!((v[1].q1, v[1].q0), (-1.0, 1.0));
        // Endpoint conditions by substitution.
        assert_eq!(v[0].apply(0.0, 0.0), 0.0);
        assert_eq!(v[0].apply(1.0, 0.0), 1.0);
        assert_eq!(v[1].apply(0.0, 0.0), 1.0);
        assert_eq!(v[1].apply(1.0, 0.0), 0.0);
    }

    #[test]
    fn line_through_origin_zero_residuals() {
        let data = DataSet1D::new(vec![0.0, 1.0, 2.0], vec![0.0, 1.5, 3.0]).unwrap();
        let alphas = ScalingVector::new(vec![0.4, -0.7]).unwrap();
        let ifs = build_ifs(&data, &alphas).unwrap();
        let report = validate_ifs(&ifs, 1e-12);
        assert!(report.pass, "max residual {}", report.max_residual);
    }

    #[test]
    fn tent_factors() {
        let ifs = tent(0.3);
        assert_eq!(ifs.horizontal_factor(), 0.5);
        assert_eq!(ifs.vertical_factor(), 0.3);
    }

    #[test]
    fn scaling_vector_rejects_boundary() {
        assert!(ScalingVector::new(vec![1.0]).is_err());
        assert!(ScalingVector::new(vec![-1.0]).is_err());
        assert!(ScalingVector::new(vec![0.999]).is_ok());
    }

    #[test]
    fn validate_flags_perturbed_q0() {
        let ifs = tent(0.3);
        let mut vmaps = ifs.vmaps().to_vec();
        vmaps[0].q0 += 0.1;
        let broken = Ifs1D::from_parts(ifs.data().clone(), ifs.lmaps().to_vec(), vmaps).unwrap();
        let report = validate_ifs(&broken, 1e-9);
        assert!(!report.pass);
        assert!((report.per_map[0].f_left - 0.1).abs() <= 1e-15);
    }

    #[test]
    fn validate_flags_noncontractive_alpha() {
        let ifs = tent(0.3);
        let mut vmaps = ifs.vmaps().to_vec();
        vmaps[0].alpha = 1.0;
        let broken = Ifs1D::from_parts(ifs.data().clone(), ifs.lmaps().to_vec(), vmaps).unwrap();
        let report = validate_ifs(&broken, 1e-3);
        assert!(!report.contractive);
        assert!(!report.pass);
    }

    #[test]
    fn subinterval_dispatch_half_open() {
        let data = DataSet1D::new(vec![0.0, 0.25, 1.0], vec![0.0, 1.0, 0.0]).unwrap();
        assert_eq!(data.subinterval_of(0.0), 0);
        assert_eq!(data.subinterval_of(0.2), 0);
        assert_eq!(data.subinterval_of(0.25), 1); // knot belongs to the right side
        assert_eq!(data.subinterval_of(1.0), 1); // except the last knot
    }

    #[test]
    fn mismatched_alpha_count_rejected() {
        let data = DataSet1D::new(vec![0.0, 0.5, 1.0], vec![0.0, 1.0, 0.0]).unwrap();
        let alphas = ScalingVector::broadcast(0.3, 3).unwrap();
        assert!(solve_qn(&data, &alphas).is_err());
    }
}
