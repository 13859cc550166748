//! wasm-bindgen bindings for the static demo page in `www/`.
//!
//! Each export returns a JSON string. The plain functions carry the logic
//! so they can be tested natively; the `js_*` wrappers only convert errors.

use serde_json::json;
use slag_core::census::{census_with, fit_exponent, isotropic_vectors, CensusFit, CensusOptions};
use slag_core::exponents::{delta_chain_with, PipelineConstants};
use slag_core::harish_chandra::xi_decay_fit;
use slag_core::lie::IntegrabilityTable;
use slag_core::rational::{to_f64, to_fraction_string};
use slag_core::{GramLattice, GroupSpec, LatticeVector, PositivePlane, Rational};
use wasm_bindgen::prelude::*;

/// Rough cap on `vmax^rank`, the size of the searched ball, so a click
/// cannot freeze the tab.
pub const MAX_WORK: f64 = 2e8;

fn fraction(r: &Rational) -> serde_json::Value {
    json!({ "exact": to_fraction_string(r), "decimal": to_f64(r) })
}

/// Constant chain for `SO(p,q)`; `p_pi = 0` looks the exponent up in the
/// built-in table.
pub fn constants(p: u32, q: u32, p_pi: u32) -> Result<String, String> {
    let spec = GroupSpec::new(p, q).map_err(|e| e.to_string())?;
    let p_pi = match p_pi {
        0 => IntegrabilityTable::default()
            .get(spec)
            .ok_or_else(|| format!("p(pi) not tabulated for SO({p},{q}); enter a value"))?,
        v => v,
    };
    let r = delta_chain_with(&PipelineConstants::new(spec), p_pi).map_err(|e| e.to_string())?;
    let rows = json!([
        ["dim G", json!({ "exact": r.dims.dim_g.to_string(), "decimal": r.dims.dim_g })],
        ["dim K", json!({ "exact": r.dims.dim_k.to_string(), "decimal": r.dims.dim_k })],
        ["dim Y", json!({ "exact": r.dims.dim_y.to_string(), "decimal": r.dims.dim_y })],
        ["p(pi)", json!({ "exact": p_pi.to_string(), "decimal": p_pi })],
        ["rho(H)", fraction(&r.rho_h)],
        ["l0'", json!({ "exact": r.l0_prime.to_string(), "decimal": r.l0_prime })],
        ["l0", json!({ "exact": r.l0.to_string(), "decimal": r.l0 })],
        ["delta0' sup", fraction(&r.delta0_prime_sup)],
        ["C_l0", fraction(&r.c_l0)],
        ["delta0 sup", fraction(&r.delta0_sup)],
        ["d_l0", fraction(&r.d_l0)],
        ["delta = delta0/d_l0", fraction(&r.delta_section5)],
        ["delta = delta0/(d_l0+1)", fraction(&r.delta_eq22)],
    ]);
    Ok(json!({ "rows": rows, "delta0_of_p_prime": r.delta0_of_p_prime }).to_string())
}

/// `Ξ(a_t)` samples and both decay fits.
pub fn xi_curve(p: u32, q: u32, t_min: f64, t_max: f64, samples: u32) -> Result<String, String> {
    let spec = GroupSpec::new(p, q).map_err(|e| e.to_string())?;
    let report = xi_decay_fit(spec, [t_min, t_max], samples as usize).map_err(|e| e.to_string())?;
    serde_json::to_string(&report).map_err(|e| e.to_string())
}

fn lattice_and_plane(lattice: &str, seed: u32) -> Result<(GramLattice, PositivePlane), String> {
    let l = GramLattice::parse(lattice).map_err(|e| e.to_string())?;
    let plane = PositivePlane::random(&l, seed as u64).map_err(|e| e.to_string())?;
    Ok((l, plane))
}

fn check_budget(l: &GramLattice, vmax: f64) -> Result<(), String> {
    if vmax.powi(l.rank() as i32) > MAX_WORK {
        return Err(format!(
            "V = {vmax} is too large for rank {} in the browser; use the command-line tool",
            l.rank()
        ));
    }
    Ok(())
}

/// Census at `points` bounds halving down from `vmax`, with the fit.
pub fn census(lattice: &str, seed: u32, vmax: f64, points: u32) -> Result<String, String> {
    let (l, plane) = lattice_and_plane(lattice, seed)?;
    check_budget(&l, vmax)?;
    let k = points.clamp(1, 16) as i32;
    let vs: Vec<f64> = (0..k).map(|i| vmax / 2f64.powi(k - 1 - i)).collect();
    let records = census_with(&l, &plane, &vs, CensusOptions { record_timing: false }).map_err(|e| e.to_string())?;
    let fit = fit_exponent(&records).ok().map(|f| CensusFit::new(f, l.rank()));
    Ok(json!({ "rank": l.rank(), "records": records, "fit": fit }).to_string())
}

/// Coordinates of `(v)_P` in a `Q`-orthonormal basis of the plane, for every
/// counted vector at bound `v`.
pub fn projections(lattice: &str, seed: u32, v: f64) -> Result<String, String> {
    let (l, plane) = lattice_and_plane(lattice, seed)?;
    check_budget(&l, v)?;
    let found = isotropic_vectors(&l, &plane, v).map_err(|e| e.to_string())?;
    let qb = l.gram_f64() * plane.basis();
    let points: Vec<Vec<f64>> = found
        .iter()
        .map(|(coords, _)| {
            let x = LatticeVector::new(coords.clone()).to_f64();
            (qb.transpose() * x).iter().copied().collect()
        })
        .collect();
    Ok(json!({ "plane_dim": plane.dim(), "points": points }).to_string())
}

fn js<T>(r: Result<T, String>) -> Result<T, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = constants)]
pub fn js_constants(p: u32, q: u32, p_pi: u32) -> Result<String, JsError> {
    js(constants(p, q, p_pi))
}

#[wasm_bindgen(js_name = xiCurve)]
pub fn js_xi_curve(p: u32, q: u32, t_min: f64, t_max: f64, samples: u32) -> Result<String, JsError> {
    js(xi_curve(p, q, t_min, t_max, samples))
}

#[wasm_bindgen(js_name = census)]
pub fn js_census(lattice: &str, seed: u32, vmax: f64, points: u32) -> Result<String, JsError> {
    js(census(lattice, seed, vmax, points))
}

#[wasm_bindgen(js_name = projections)]
pub fn js_projections(lattice: &str, seed: u32, v: f64) -> Result<String, JsError> {
    js(projections(lattice, seed, v))
}
