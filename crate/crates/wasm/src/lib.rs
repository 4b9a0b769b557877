//! WebAssembly bindings for the demo page in `www/`.
//!
//! Every export takes plain numbers and strings and returns a JSON string;
//! the same functions are available natively through [`demo`].

use wasm_bindgen::prelude::*;

pub mod demo;

fn to_js(r: Result<String, String>) -> Result<String, JsValue> {
    r.map_err(|e| JsValue::from_str(&e))
}

/// Plants an `n × n` instance, multiplies it with λ doubling and returns the
/// run summary.
#[wasm_bindgen(js_name = multiplyRun)]
pub fn multiply_run(n: usize, ell: usize, plant: &str, seed: u64) -> Result<String, JsValue> {
    to_js(demo::multiply_run(n, ell, plant, seed))
}

#[wasm_bindgen(js_name = lemmaFrequency)]
pub fn lemma_frequency(
    n: usize,
    r: usize,
    ell: usize,
    trials: usize,
    seed: u64,
    family: &str,
) -> Result<String, JsValue> {
    to_js(demo::lemma_frequency(n, r, ell, trials, seed, family))
}

/// `ells` is a comma-separated list.
#[wasm_bindgen(js_name = scalingCurve)]
pub fn scaling_curve(
    n: usize,
    ells: &str,
    trials: usize,
    seed: u64,
    known_lambda: bool,
) -> Result<String, JsValue> {
    to_js(demo::scaling_curve(n, ells, trials, seed, known_lambda))
}
