//! Browser demo bindings. Each export returns a JSON string; the `*_json`
//! functions are the same operations callable from native code and tests.

use qptycho::campaign::{simulate_dataset, trial_rng, NoiseSpec};
use qptycho::optics::{envelope_contrast, far_field_profile, near_field_profile, Profile};
use qptycho::{
    build_family, detector_positions, fidelity, haar_random_state, reconstruct, sample_at_detectors, validate_set,
    Envelope, FamilyKind, OpticalGeometry, PieConfig, StateVector,
};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

fn pairs(psi: &StateVector) -> Value {
    psi.amplitudes().iter().map(|c| json!([c.re, c.im])).collect()
}

fn profile(p: &Profile) -> Value {
    json!({ "x": p.x, "intensity": p.intensity })
}

/// Near- and far-field intensities of a Haar-random state behind the
/// laboratory slit array, plus the far-field detector readings.
pub fn optics_profile_json(dim: usize, seed: u64, points: usize) -> qptycho::Result<String> {
    let psi = haar_random_state(dim, &mut trial_rng(seed, 1))?;
    let geom = OpticalGeometry::laboratory(dim);
    let layout = detector_positions(&geom);
    Ok(json!({
        "state": pairs(&psi),
        "geometry": geom,
        "near": profile(&near_field_profile(&psi, &geom, points)),
        "far": profile(&far_field_profile(&psi, &geom, points)),
        "detectors": {
            "x": layout.positions,
            "ideal": sample_at_detectors(&psi, &geom, Envelope::Off)?,
            "with_envelope": sample_at_detectors(&psi, &geom, Envelope::On)?,
        },
        "envelope_contrast": envelope_contrast(&geom),
    })
    .to_string())
}

/// Simulates one trial and reconstructs it. `noise` is `none`, `shot`
/// (`level` = photons per projector), `purity` (`level` = pure weight) or
/// `envelope`.
pub fn reconstruct_json(dim: usize, family: &str, noise: &str, level: f64, seed: u64) -> qptycho::Result<String> {
    let kind: FamilyKind = family.parse()?;
    let noise = match noise {
        "none" => NoiseSpec::None,
        "shot" => NoiseSpec::Shot { exposure: level },
        "purity" => NoiseSpec::Purity { p: level },
        "envelope" => NoiseSpec::Envelope,
        other => return Err(qptycho::Error::Config(format!("unknown noise model '{other}'"))),
    };
    let fam = build_family(dim, kind)?;
    let source = haar_random_state(dim, &mut trial_rng(seed, 1))?;
    let data = simulate_dataset(&source, &fam, noise, seed)?;
    let result = reconstruct(&data, &fam, &PieConfig::default().with_seed(seed))?;
    // Remove the unobservable global phase so the amplitudes can be compared.
    let overlap = result.estimate.inner(&source)?;
    let aligned = if overlap.norm() > 0.0 {
        result.estimate.clone().scale(overlap / overlap.norm())
    } else {
        result.estimate.clone()
    };
    Ok(json!({
        "fidelity": fidelity(&result.estimate, &source)?,
        "converged": result.converged,
        "sweeps": result.sweeps_used,
        "restarts": result.restarts_used,
        "residual": result.residual,
        "source": pairs(&source),
        "estimate": pairs(&aligned),
    })
    .to_string())
}

/// Supports, per-level coverage and overlap graph of a standard family.
pub fn family_coverage_json(dim: usize, family: &str) -> qptycho::Result<String> {
    let fam = build_family(dim, family.parse()?)?;
    let report = validate_set(&fam);
    let supports: Vec<&[usize]> = fam.projectors().iter().map(|p| p.support()).collect();
    Ok(json!({
        "dim": dim,
        "family": fam.kind(),
        "supports": supports,
        "coverage": report.coverage,
        "overlaps": report.overlaps,
        "ok": report.ok,
    })
    .to_string())
}

fn to_js(r: qptycho::Result<String>) -> Result<String, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = opticsProfile)]
pub fn optics_profile(dim: usize, seed: u32, points: usize) -> Result<String, JsError> {
    to_js(optics_profile_json(dim, seed.into(), points))
}

#[wasm_bindgen(js_name = reconstructDemo)]
pub fn reconstruct_demo(dim: usize, family: &str, noise: &str, level: f64, seed: u32) -> Result<String, JsError> {
    to_js(reconstruct_json(dim, family, noise, level, seed.into()))
}

#[wasm_bindgen(js_name = familyCoverage)]
pub fn family_coverage(dim: usize, family: &str) -> Result<String, JsError> {
    to_js(family_coverage_json(dim, family))
}
