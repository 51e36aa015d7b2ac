//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Every export returns a JSON string; the `*_json` functions carry the
//! logic and are callable natively.

use drp_core::acoustic1d::{self, Acoustic1DConfig, Scheme};
use drp_core::dispersion::{self, DispersionCurve};
use drp_core::stencil::presets;
use drp_core::{optimize_family, taylor_constraint_family, Extent, GridKind};
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Serialize)]
struct Curve {
    label: String,
    symbol: Vec<f64>,
    lambda_min_in_dx: Option<f64>,
}

#[derive(Serialize)]
struct Curves {
    kappa: Vec<f64>,
    ideal: Vec<f64>,
    curves: Vec<Curve>,
}

/// Second-derivative dispersion curves of the stock collocated stencils.
pub fn dispersion_curves_json(samples: usize, tolerance: f64) -> Result<String, String> {
    let stencils = [
        presets::conventional_second(2),
        presets::conventional_second(4),
        presets::conventional_second(6),
        presets::optimized_second4(),
    ];
    let sampled: Vec<DispersionCurve> = stencils.iter().map(|s| DispersionCurve::sample(s, samples)).collect();
    let kappa = sampled[0].kappa.clone();
    let ideal = kappa.iter().map(|&k| dispersion::ideal(2, k)).collect();
    let curves = stencils
        .iter()
        .zip(sampled)
        .map(|(s, c)| Curve {
            label: s.label().to_string(),
            symbol: c.symbol,
            lambda_min_in_dx: dispersion::resolution_limit(s, tolerance).ok().map(|r| r.lambda_min_in_dx),
        })
        .collect();
    serde_json::to_string(&Curves { kappa, ideal, curves }).map_err(|e| e.to_string())
}

fn parse_kind(kind: &str) -> Result<GridKind, String> {
    match kind {
        "collocated" => Ok(GridKind::Collocated),
        "staggered_forward" | "a" => Ok(GridKind::StaggeredForward),
        "staggered_backward" | "b" => Ok(GridKind::StaggeredBackward),
        other => Err(format!("unknown grid kind `{other}`")),
    }
}

/// Optimized stencil report: label, offsets, coefficients and `E`.
pub fn optimize_json(derivative: u32, kind: &str, extent: u32, order: u32, window: f64) -> Result<String, String> {
    let kind = parse_kind(kind)?;
    let extent = match kind {
        GridKind::Collocated => Extent::symmetric(extent),
        k => Extent::staggered(k, extent),
    };
    let family = taylor_constraint_family(derivative, kind, extent, order).map_err(|e| e.to_string())?;
    let stencil = optimize_family(&family, window).map_err(|e| e.to_string())?;
    let report = stencil.report(window).map_err(|e| e.to_string())?;
    serde_json::to_string(&report).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct Acoustic1DResult {
    scheme: String,
    dx: f64,
    t: Vec<f64>,
    error: Vec<f64>,
    x: Vec<f64>,
    numeric: Vec<f64>,
    analytic: Vec<f64>,
}

/// 1D standing-wave run: error trace plus the final wavefield.
pub fn run_acoustic1d_json(n_cells: usize, scheme: &str, t_end: f64, courant: f64) -> Result<String, String> {
    let scheme: Scheme = scheme.parse().map_err(|e: drp_core::Error| e.to_string())?;
    let config = Acoustic1DConfig { n_cells, scheme, t_end, courant, ..Acoustic1DConfig::default() };
    let run = acoustic1d::run(&config, &scheme.stencil(), &[t_end]).map_err(|e| e.to_string())?;
    let last = run.snapshots.into_iter().last().ok_or("no final snapshot")?;
    let result = Acoustic1DResult {
        scheme: scheme.name().to_string(),
        dx: config.dx(),
        t: run.trace.times().collect(),
        error: run.trace.values().collect(),
        x: last.x,
        numeric: last.numeric,
        analytic: last.analytic,
    };
    serde_json::to_string(&result).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn dispersion_curves(samples: usize, tolerance: f64) -> Result<String, JsValue> {
    dispersion_curves_json(samples, tolerance).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn optimize(derivative: u32, kind: &str, extent: u32, order: u32, window: f64) -> Result<String, JsValue> {
    optimize_json(derivative, kind, extent, order, window).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn run_acoustic1d(n_cells: usize, scheme: &str, t_end: f64, courant: f64) -> Result<String, JsValue> {
    run_acoustic1d_json(n_cells, scheme, t_end, courant).map_err(|e| JsValue::from_str(&e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    #[test]
    fn curves_have_matching_lengths() {
        let v: Value = serde_json::from_str(&dispersion_curves_json(64, 1e-2).unwrap()).unwrap();
        assert_eq!(v["kappa"].as_array().unwrap().len(), 64);
        for c in v["curves"].as_array().unwrap() {
            assert_eq!(c["symbol"].as_array().unwrap().len(), 64);
        }
        assert_eq!(v["curves"][3]["label"], "optimized4");
    }

    #[test]
    fn optimize_reports_coefficients() {
        let v: Value = serde_json::from_str(&optimize_json(2, "collocated", 3, 4, 1.0).unwrap()).unwrap();
        assert_eq!(v["coefficients"].as_array().unwrap().len(), 7);
        assert!(optimize_json(2, "hexagonal", 3, 4, 1.0).is_err());
        assert!(optimize_json(2, "collocated", 3, 6, 1.0).is_err());
    }

    #[test]
    fn acoustic_run_returns_trace_and_field() {
        let v: Value = serde_json::from_str(&run_acoustic1d_json(100, "conventional2", 1.0, 0.5).unwrap()).unwrap();
        assert_eq!(v["x"].as_array().unwrap().len(), 101);
        assert_eq!(v["t"].as_array().unwrap().len(), v["error"].as_array().unwrap().len());
        assert!(run_acoustic1d_json(100, "bogus", 1.0, 0.5).is_err());
    }
}
