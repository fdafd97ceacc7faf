//! Plain-Rust demo operations behind the wasm bindings; everything here is
//! testable on the host.

use fifs::attractor::{chaos_game, ChaosGameConfig};
use fifs::fif1d::{
    endpoint_violation_experiment, fixed_point, integrate_closed_form, FixedPointConfig,
};
use fifs::ifs1d::{build_ifs, DataSet1D, Ifs1D, ScalingVector};

#[derive(Debug)]
pub struct Demo {
    ifs: Ifs1D,
}

fn stringify(e: fifs::Error) -> String {
    e.to_string()
}

impl Demo {
    pub fn new(knots: Vec<f64>, values: Vec<f64>, alphas: Vec<f64>) -> Result<Self, String> {
        let data = DataSet1D::new(knots, values).map_err(stringify)?;
        let sv = if alphas.len() == 1 {
            ScalingVector::broadcast(alphas[0], data.knots().len() - 1)
        } else {
            ScalingVector::new(alphas)
        }
        .map_err(stringify)?;
        let ifs = build_ifs(&data, &sv).map_err(stringify)?;
        Ok(Self { ifs })
    }

    /// Converged interpolant on `resolution` panels, interleaved as
    /// [t0, f0, t1, f1, ...] for direct canvas plotting.
    pub fn curve(&self, resolution: usize) -> Result<Vec<f64>, String> {
        let cfg = FixedPointConfig {
            resolution: resolution.clamp(self.ifs.n_maps(), 1 << 15),
            ..FixedPointConfig::default()
        };
        let f = fixed_point(&self.ifs, &cfg).map_err(stringify)?;
        let mut out = Vec::with_capacity(2 * (f.resolution() + 1));
        for (i, &v) in f.samples().iter().enumerate() {
            out.push(f.node(i));
            out.push(v);
        }
        Ok(out)
    }

    /// Chaos-game sample of the attractor, interleaved [t0, x0, t1, x1, ...].
    pub fn chaos(&self, seed: u32, iterations: usize, burn_in: usize) -> Result<Vec<f64>, String> {
        let cfg = ChaosGameConfig {
            seed: seed as u64,
            iterations: iterations.clamp(burn_in + 1, 1_000_000),
            burn_in,
            weighted: false,
        };
        let pts = chaos_game(&self.ifs, &cfg).map_err(stringify)?;
        let mut out = Vec::with_capacity(2 * pts.len());
        for &(t, x) in pts.points() {
            out.push(t);
            out.push(x);
        }
        Ok(out)
    }

    /// Exact self-similar integral over the data interval.
    pub fn integral(&self) -> Result<f64, String> {
        integrate_closed_form(&self.ifs).map_err(stringify)
    }

    /// Endpoint-violation experiment as a JSON report string.
    pub fn violation_report(&self, map: usize, delta: f64) -> Result<String, String> {
        let cfg = FixedPointConfig::default();
        let rep = endpoint_violation_experiment(&self.ifs, map, delta, &cfg).map_err(stringify)?;
        let v = serde_json::json!({
            "knot_residual": rep.knot_residual,
            "max_jump": rep.max_jump,
            "integral_shift": rep.integral_shift,
        });
        Ok(fifs::io::serialize_report(&v))
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.ifs.data().t0(), self.ifs.data().tn())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tent() -> Demo {
        Demo::new(vec![0.0, 0.5, 1.0], vec![0.0, 1.0, 0.0], vec![0.3]).unwrap()
    }

    #[test]
    fn curve_interpolates_data() {
        let demo = tent();
        let pts = demo.curve(1024).unwrap();
        assert_eq!(pts.len(), 2 * 1025);
        let at = |t: f64| {
            pts.chunks(2)
                .min_by(|a, b| (a[0] - t).abs().total_cmp(&(b[0] - t).abs()))
                .unwrap()[1]
        };
        assert!((at(0.0)).abs() <= 1e-9);
        assert!((at(0.5) - 1.0).abs() <= 1e-9);
        assert!((at(1.0)).abs() <= 1e-9);
    }

    #[test]
    fn chaos_lands_on_the_graph() {
        let demo = tent();
        let pts = demo.chaos(7, 4000, 50).unwrap();
        assert_eq!(pts.len(), 2 * (4000 - 50));
        let curve = demo.curve(4096).unwrap();
        let samples: Vec<f64> = curve.chunks(2).map(|c| c[1]).collect();
        for pair in pts.chunks(2) {
            let (t, x) = (pair[0], pair[1]);
            let idx = (t * 4096.0).round() as usize;
            assert!(
                (x - samples[idx.min(4096)]).abs() <= 1e-2,
                "({t}, {x}) off the graph"
            );
        }
    }

    #[test]
    fn integral_matches_closed_form() {
        assert!((tent().integral().unwrap() - 5.0 / 7.0).abs() <= 1e-12);
    }

    #[test]
    fn violation_report_is_json() {
        let rep = tent().violation_report(0, 0.1).unwrap();
        let v: serde_json::Value = serde_json::from_str(&rep).unwrap();
        assert!((v["integral_shift"].as_f64().unwrap() - 1.0 / 14.0).abs() <= 1e-12);
    }

    #[test]
    fn bad_data_is_reported_as_text() {
        let err = Demo::new(vec![0.0, 0.0, 1.0], vec![0.0, 1.0, 0.0], vec![0.3]).unwrap_err();
        assert!(err.contains("increasing"), "{err}");
    }
}
