//! Browser bindings for the interactive demo page: spectrum + Weyl chambers,
//! Bowen-body polygons with their volume decay, and the slow-entropy curve
//! over the unit-volume weighted-box family.
//!
//! Each operation takes the generator matrices as a JSON array (the same
//! shape as the CLI config's `action.generators`) and returns a JSON string;
//! the page does all rendering. The `_json` functions are plain Rust and are
//! what the host-side tests exercise.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use slowent_core::{
    bowen_constraints, compute_spectrum, emit_svg_chambers, enumerate_chambers, geometry,
    lyapunov_hyperplanes, minimize_over_norm_family, slow_entropy, verify_action, Chamber,
    GammaAssignment, IntegerMatrixAction, LyapunovFunctional, NormFamily, NormSpec,
    DEFAULT_GROUPING_TOL,
};

fn parse_generators(json: &str) -> Result<IntegerMatrixAction, String> {
    let generators: Vec<Vec<Vec<i64>>> =
        serde_json::from_str(json).map_err(|e| format!("generators: {e}"))?;
    verify_action(&generators).map_err(|e| e.to_string())
}

fn norm_by_name(name: &str) -> Result<NormSpec, String> {
    match name {
        "l1" => Ok(NormSpec::L1),
        "l2" => Ok(NormSpec::L2),
        "linf" => Ok(NormSpec::Linf),
        other => Err(format!("unknown norm \"{other}\" (expected l1, l2, linf)")),
    }
}

#[derive(Serialize)]
struct AnalyzeOut {
    dim: usize,
    rank: usize,
    spectrum: Vec<LyapunovFunctional>,
    /// Δ under each of the three ℓq norms, Haar gammas.
    delta_l1: f64,
    delta_l2: f64,
    delta_linf: f64,
    chambers: Option<Vec<Chamber>>,
    hyperplane_count: Option<usize>,
    svg: Option<String>,
}

/// Spectrum, formula values and (for rank 2) the chamber picture.
pub fn analyze_json(generators: &str) -> Result<String, String> {
    let action = parse_generators(generators)?;
    let spec = compute_spectrum(&action, DEFAULT_GROUPING_TOL).map_err(|e| e.to_string())?;
    let gammas = GammaAssignment::haar(&spec);
    let delta = |n: &NormSpec| -> Result<f64, String> {
        Ok(slow_entropy(&spec, &gammas, n).map_err(|e| e.to_string())?.total)
    };
    let (chambers, hyperplane_count, svg) = match lyapunov_hyperplanes(&spec) {
        Ok(arr) => {
            let chambers = enumerate_chambers(&arr).map_err(|e| e.to_string())?;
            let svg = if spec.rank == 2 {
                Some(emit_svg_chambers(&arr, &chambers).map_err(|e| e.to_string())?)
            } else {
                None
            };
            (Some(chambers), Some(arr.normals.len()), svg)
        }
        Err(_) => (None, None, None),
    };
    let out = AnalyzeOut {
        dim: action.dim(),
        rank: action.rank(),
        spectrum: spec.functionals.clone(),
        delta_l1: delta(&NormSpec::L1)?,
        delta_l2: delta(&NormSpec::L2)?,
        delta_linf: delta(&NormSpec::Linf)?,
        chambers,
        hyperplane_count,
        svg,
    };
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct BowenPolygon {
    s: f64,
    vertices: Vec<[f64; 2]>,
    area: f64,
    constraints: usize,
}

#[derive(Serialize)]
struct BowenOut {
    eps: f64,
    polygons: Vec<BowenPolygon>,
    /// Least-squares slope of −log(area) over the radii past the transient.
    slope: Option<f64>,
    formula_total: f64,
    /// Radius at which the numerically linear regime ended, if it did.
    wraparound_at: Option<f64>,
}

/// Bowen bodies of a d = 2 action as explicit polygons over s = 0..=s_max,
/// with the decay slope against the formula value.
pub fn bowen_json(generators: &str, norm_name: &str, eps: f64, s_max: f64) -> Result<String, String> {
    let action = parse_generators(generators)?;
    if action.dim() != 2 {
        return Err(format!(
            "Bowen polygons need a torus of dimension 2, got {}",
            action.dim()
        ));
    }
    let norm = norm_by_name(norm_name)?;
    let spec = compute_spectrum(&action, DEFAULT_GROUPING_TOL).map_err(|e| e.to_string())?;
    let gammas = GammaAssignment::haar(&spec);
    let formula_total = slow_entropy(&spec, &gammas, &norm)
        .map_err(|e| e.to_string())?
        .total;

    let mut polygons = Vec::new();
    let mut wraparound_at = None;
    let mut s = 0.0f64;
    while s <= s_max + 1e-9 {
        match bowen_constraints(&action, &norm, s, eps) {
            Ok(body) => {
                let mut poly = vec![[-eps, -eps], [eps, -eps], [eps, eps], [-eps, eps]];
                for c in &body.constraints {
                    for row in 0..2 {
                        let n = [c.matrix[(row, 0)], c.matrix[(row, 1)]];
                        poly = geometry::clip_halfplane(&poly, n, eps);
                        poly = geometry::clip_halfplane(&poly, [-n[0], -n[1]], eps);
                    }
                }
                polygons.push(BowenPolygon {
                    s,
                    area: geometry::polygon_area(&poly),
                    vertices: poly,
                    constraints: body.constraints.len(),
                });
            }
            Err(slowent_core::BowenError::WraparoundRisk { .. }) => {
                wraparound_at = Some(s);
                break;
            }
            Err(e) => return Err(e.to_string()),
        }
        s += 1.0;
    }

    // Decay slope over the tail (skip s = 0, it is the bare cube).
    let tail: Vec<(f64, f64)> = polygons
        .iter()
        .filter(|p| p.s >= 1.0 && p.area > 0.0)
        .map(|p| (p.s, -p.area.ln()))
        .collect();
    let slope = if tail.len() >= 2 {
        let n = tail.len() as f64;
        let mx = tail.iter().map(|(x, _)| x).sum::<f64>() / n;
        let my = tail.iter().map(|(_, y)| y).sum::<f64>() / n;
        let sxx: f64 = tail.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
        let sxy: f64 = tail.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
        (sxx > 0.0).then(|| sxy / sxx)
    } else {
        None
    };

    serde_json::to_string(&BowenOut {
        eps,
        polygons,
        slope,
        formula_total,
        wraparound_at,
    })
    .map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct BoxFamilyOut {
    w1: Vec<f64>,
    delta: Vec<f64>,
    best_w1: f64,
    best_w2: f64,
    best_value: f64,
    linf_value: f64,
}

/// Δ along the unit-volume weighted-box family of a rank-2 action: the curve
/// w₁ ↦ Δ(w₁, 1/(4w₁)) and the pattern-search optimum.
pub fn box_family_json(generators: &str, steps: usize) -> Result<String, String> {
    let action = parse_generators(generators)?;
    if action.rank() != 2 {
        return Err(format!(
            "the box-family curve needs a rank-2 action, got rank {}",
            action.rank()
        ));
    }
    let spec = compute_spectrum(&action, DEFAULT_GROUPING_TOL).map_err(|e| e.to_string())?;
    let gammas = GammaAssignment::haar(&spec);
    let steps = steps.clamp(16, 4096);
    let mut w1 = Vec::with_capacity(steps);
    let mut delta = Vec::with_capacity(steps);
    for i in 0..steps {
        // Log-spaced sweep over two decades centered at 1/2.
        let t = i as f64 / (steps - 1) as f64;
        let w = 0.5 * 10f64.powf(2.0 * t - 1.0);
        let norm = NormSpec::WeightedBox {
            weights: vec![w, 1.0 / (4.0 * w)],
        };
        let value = slow_entropy(&spec, &gammas, &norm)
            .map_err(|e| e.to_string())?
            .total;
        w1.push(w);
        delta.push(value);
    }
    let result = minimize_over_norm_family(&spec, &gammas, NormFamily::WeightedBox, 4000, 42)
        .map_err(|e| e.to_string())?;
    let NormSpec::WeightedBox { weights } = &result.best_norm else {
        return Err("family search returned a non-box norm".to_string());
    };
    let linf_value = slow_entropy(&spec, &gammas, &NormSpec::Linf)
        .map_err(|e| e.to_string())?
        .total;
    serde_json::to_string(&BoxFamilyOut {
        w1,
        delta,
        best_w1: weights[0],
        best_w2: weights[1],
        best_value: result.best_value,
        linf_value,
    })
    .map_err(|e| e.to_string())
}

#[wasm_bindgen(start)]
pub fn start() {
    console_error_panic_hook::set_once();
}

#[wasm_bindgen]
pub fn analyze(generators: &str) -> Result<String, JsError> {
    analyze_json(generators).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn bowen_polygons(generators: &str, norm: &str, eps: f64, s_max: f64) -> Result<String, JsError> {
    bowen_json(generators, norm, eps, s_max).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn box_family(generators: &str, steps: usize) -> Result<String, JsError> {
    box_family_json(generators, steps).map_err(|e| JsError::new(&e))
}
