//! Browser bindings for the Hardy-experiment simulator. Every function
//! returns a flat `Float64Array`; see `www/index.html` for the page that
//! drives them.

pub mod curves;

use wasm_bindgen::prelude::*;

fn js(e: hardy_core::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen(js_name = coincidenceTable)]
pub fn coincidence_table(
    p_disting: f64,
    phase_plus: f64,
    phase_minus: f64,
) -> Result<Vec<f64>, JsError> {
    curves::coincidence_table(p_disting, phase_plus, phase_minus).map_err(js)
}

#[wasm_bindgen(js_name = fringeCurve)]
pub fn fringe_curve(points: usize) -> Result<Vec<f64>, JsError> {
    curves::fringe_curve(points).map_err(js)
}

#[wasm_bindgen(js_name = thresholdCurve)]
pub fn threshold_curve(
    phase_plus: f64,
    phase_minus: f64,
    points: usize,
) -> Result<Vec<f64>, JsError> {
    curves::threshold_curve(phase_plus, phase_minus, points).map_err(js)
}

#[wasm_bindgen(js_name = thresholdRoot)]
pub fn threshold_root(phase_plus: f64, phase_minus: f64) -> Result<f64, JsError> {
    curves::threshold_root(phase_plus, phase_minus).map_err(js)
}

#[wasm_bindgen(js_name = delayCurve)]
pub fn delay_curve(
    floor: f64,
    coherence_time_fs: f64,
    delay_max_fs: f64,
    points: usize,
) -> Result<Vec<f64>, JsError> {
    curves::delay_curve(floor, coherence_time_fs, delay_max_fs, points).map_err(js)
}
