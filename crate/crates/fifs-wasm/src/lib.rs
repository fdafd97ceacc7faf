//! wasm-bindgen surface for the browser demo: construct a system from data
//! and scaling factors, plot the interpolant, sample the attractor, and run
//! the integral/violation experiments. See `www/index.html` for the page.

mod demo;

use wasm_bindgen::prelude::*;

#[wasm_bindgen]
pub struct FifDemo {
    inner: demo::Demo,
}

#[wasm_bindgen]
impl FifDemo {
    /// Solve the interpolation system. `alphas` is either one factor per
    /// subinterval or a single factor broadcast across all of them.
    #[wasm_bindgen(constructor)]
    pub fn new(knots: Vec<f64>, values: Vec<f64>, alphas: Vec<f64>) -> Result<FifDemo, JsValue> {
        demo::Demo::new(knots, values, alphas)
            .map(|inner| FifDemo { inner })
            .map_err(|e| JsValue::from_str(&e))
    }

    /// Interleaved [t, f(t), ...] samples of the converged interpolant.
    pub fn curve(&self, resolution: usize) -> Result<Vec<f64>, JsValue> {
        self.inner
            .curve(resolution)
            .map_err(|e| JsValue::from_str(&e))
    }

    /// Interleaved [t, x, ...] chaos-game points after burn-in.
    pub fn chaos(&self, seed: u32, iterations: usize, burn_in: usize) -> Result<Vec<f64>, JsValue> {
        self.inner
            .chaos(seed, iterations, burn_in)
            .map_err(|e| JsValue::from_str(&e))
    }

    /// Closed-form integral over the data interval.
    pub fn integral(&self) -> Result<f64, JsValue> {
        self.inner.integral().map_err(|e| JsValue::from_str(&e))
    }

    /// JSON report of the endpoint-violation experiment on one map.
    #[wasm_bindgen(js_name = violationReport)]
    pub fn violation_report(&self, map: usize, delta: f64) -> Result<String, JsValue> {
        self.inner
            .violation_report(map, delta)
            .map_err(|e| JsValue::from_str(&e))
    }

    #[wasm_bindgen(js_name = tMin)]
    pub fn t_min(&self) -> f64 {
        self.inner.bounds().0
    }

    #[wasm_bindgen(js_name = tMax)]
    pub fn t_max(&self) -> f64 {
        self.inner.bounds().1
    }
}
