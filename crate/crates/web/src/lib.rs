//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Each export returns a JSON string so the page needs no generated
//! TypeScript types. The `*_json` functions carry the logic and are what
//! the native tests exercise.

use mvlab::additive::{default_z_grid, gaussian_comparison};
use mvlab::builtins::{big_omega_additive, omega_additive, one};
use mvlab::local_laws::{local_law_report, HistogramMode};
use mvlab::mean_values::mean_value_series;
use mvlab::registry::{parse_rule_of_kind, RuleContext};
use mvlab::{PrimeSet, RuleKind, Streaming};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Largest `x` the page may request; keeps a single call under a few seconds.
pub const MAX_X: u32 = 5_000_000;
const MAX_POINTS: u32 = 2_000;

fn check_x(x: u32) -> Result<u64, String> {
    if !(2..=MAX_X).contains(&x) {
        return Err(format!("x must be in [2, {MAX_X}], got {x}"));
    }
    Ok(x as u64)
}

fn to_json<T: Serialize>(v: &T) -> Result<String, String> {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct LocalLaw {
    x: u64,
    e_of_x: f64,
    counts: Vec<u64>,
    crude: Vec<f64>,
    refined: Vec<f64>,
    window: Vec<usize>,
}

pub fn local_law_json(x: u32, kappa: f64) -> Result<String, String> {
    let x = check_x(x)?;
    let rep = local_law_report(&PrimeSet::all(), x, kappa, HistogramMode::BigOmega, &Streaming::default()).map_err(|e| e.to_string())?;
    let window = rep.window().collect();
    to_json(&LocalLaw { x, e_of_x: rep.e_of_x, counts: rep.counts, crude: rep.crude, refined: rep.refined, window })
}

#[derive(Serialize)]
struct ErdosKac {
    x: u64,
    center: f64,
    scale: f64,
    kolmogorov_distance: f64,
    z: Vec<f64>,
    empirical: Vec<f64>,
    normal: Vec<f64>,
}

pub fn erdos_kac_json(x: u32, big_omega: bool) -> Result<String, String> {
    let x = check_x(x)?;
    let h = if big_omega { big_omega_additive() } else { omega_additive() };
    let (rep, cdf) = gaussian_comparison(&h, &one(), x, &Streaming::default()).map_err(|e| e.to_string())?;
    let table = cdf.comparison_table(rep.e_h, rep.d_h, &default_z_grid());
    to_json(&ErdosKac {
        x,
        center: rep.e_h,
        scale: rep.d_h,
        kolmogorov_distance: rep.kolmogorov_distance,
        z: table.iter().map(|r| r[0]).collect(),
        empirical: table.iter().map(|r| r[1]).collect(),
        normal: table.iter().map(|r| r[2]).collect(),
    })
}

#[derive(Serialize)]
struct Curve {
    rule: String,
    x: Vec<u64>,
    re: Vec<f64>,
    im: Vec<f64>,
}

/// `M(y; f) / y` at `points` log-spaced `y` up to `x`.
pub fn mean_value_curve_json(rule: &str, x: u32, points: u32) -> Result<String, String> {
    let x = check_x(x)?;
    if !(2..=MAX_POINTS).contains(&points) {
        return Err(format!("points must be in [2, {MAX_POINTS}], got {points}"));
    }
    let mut ctx = RuleContext::new(0, x);
    let f = parse_rule_of_kind(rule, RuleKind::Multiplicative, &mut ctx).map_err(|e| e.to_string())?;
    let lx = (x as f64).ln();
    let mut ys: Vec<u64> = (0..points).map(|i| (lx * i as f64 / (points - 1) as f64).exp().round() as u64).map(|y| y.clamp(1, x)).collect();
    ys.dedup();
    let series = mean_value_series(&f, &ys, &Streaming::default()).map_err(|e| e.to_string())?;
    let scaled: Vec<_> = ys.iter().zip(&series.m_values).map(|(&y, m)| m / y as f64).collect();
    to_json(&Curve { rule: f.name().to_string(), re: scaled.iter().map(|z| z.re).collect(), im: scaled.iter().map(|z| z.im).collect(), x: ys })
}

#[wasm_bindgen]
pub fn local_law(x: u32, kappa: f64) -> Result<String, JsError> {
    local_law_json(x, kappa).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn erdos_kac(x: u32, big_omega: bool) -> Result<String, JsError> {
    erdos_kac_json(x, big_omega).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn mean_value_curve(rule: &str, x: u32, points: u32) -> Result<String, JsError> {
    mean_value_curve_json(rule, x, points).map_err(|e| JsError::new(&e))
}

/// The rule catalog, for the page's dropdown.
#[wasm_bindgen]
pub fn registry() -> String {
    serde_json::to_string(&mvlab::registry::list_registry()).expect("registry serializes")
}
