//! Browser bindings for the interactive demo in `www/`.
//!
//! Each exported function has a plain Rust counterpart returning
//! `Result<_, String>` so the numerics can be tested natively.

use qscatter::closedform::{ea_rescaled, nea_qfi};
use qscatter::optimize::{maximize_ea, maximize_nea, NeaGrid, DEFAULT_OMEGA_BRACKET};
use qscatter::strategy::{closed_qfi, nea_pair, numeric_qfi, Strategy, Target};
use qscatter::{Basis, BlochVector, DetectionMode};
use wasm_bindgen::prelude::*;

const MAX_POINTS: usize = 4096;

fn mode(s: &str) -> Result<DetectionMode, String> {
    s.parse().map_err(|e: qscatter::Error| e.to_string())
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>, String> {
    if !(lo > 0.0 && lo < hi && hi.is_finite()) {
        return Err(format!("need 0 < lo < hi, got [{lo}, {hi}]"));
    }
    if !(2..=MAX_POINTS).contains(&n) {
        return Err(format!("point count {n} not in 2..={MAX_POINTS}"));
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect())
}

/// `[Ω₀, q₀, Ω₁, q₁, …]` with `q = (1 − r²) c_r`, followed by `[Ω*, q*]`.
pub fn ea_curve_values(r: f64, mode_name: &str, lo: f64, hi: f64, n: usize) -> Result<Vec<f64>, String> {
    let m = mode(mode_name)?;
    let mut out = Vec::with_capacity(2 * n + 2);
    for w in log_grid(lo, hi, n)? {
        out.push(w);
        out.push(ea_rescaled(r, w, m).map_err(|e| e.to_string())?);
    }
    let best = maximize_ea(r, (lo, hi), m).map_err(|e| e.to_string())?;
    let w = best.get("omega").unwrap_or(f64::NAN);
    out.push(w);
    out.push((1.0 - r * r) * best.value);
    Ok(out)
}

/// Row-major NEA information over `θ_A ∈ [0, π]` (rows) × log `Ω` (columns),
/// followed by `[θ_A*, Ω*, H*]`.
pub fn nea_landscape_values(
    v_z: f64,
    mode_name: &str,
    n_theta: usize,
    n_omega: usize,
) -> Result<Vec<f64>, String> {
    let m = mode(mode_name)?;
    if !(2..=512).contains(&n_theta) {
        return Err(format!("theta count {n_theta} not in 2..=512"));
    }
    let omegas = log_grid(DEFAULT_OMEGA_BRACKET.0, DEFAULT_OMEGA_BRACKET.1, n_omega)?;
    let mut out = Vec::with_capacity(n_theta * n_omega + 3);
    for i in 0..n_theta {
        let theta = std::f64::consts::PI * i as f64 / (n_theta - 1) as f64;
        for &w in &omegas {
            out.push(nea_qfi(v_z, theta, w, m).map_err(|e| e.to_string())?);
        }
    }
    let best = maximize_nea(v_z, DEFAULT_OMEGA_BRACKET, m, NeaGrid::default()).map_err(|e| e.to_string())?;
    out.push(best.get("theta_a").unwrap_or(f64::NAN));
    out.push(best.get("omega").unwrap_or(f64::NAN));
    out.push(best.value);
    Ok(out)
}

/// 18 numbers: the numeric Cartesian matrix then the closed form, row-major.
/// For NEA only the `zz` entries are defined; the rest are NaN.
#[allow(clippy::too_many_arguments)]
pub fn qfi_matrix_values(
    strategy: &str,
    mode_name: &str,
    vx: f64,
    vy: f64,
    vz: f64,
    omega: f64,
    theta_a: f64,
) -> Result<Vec<f64>, String> {
    let s: Strategy = strategy.parse().map_err(|e: qscatter::Error| e.to_string())?;
    let m = mode(mode_name)?;
    let v = BlochVector::new(vx, vy, vz).map_err(|e| e.to_string())?;
    if s == Strategy::Nea {
        let (n, c) = nea_pair(&v, theta_a, omega, m).map_err(|e| e.to_string())?;
        let mut out = vec![f64::NAN; 18];
        out[8] = n;
        out[17] = c;
        return Ok(out);
    }
    let t = Target::Cartesian(v);
    let n = numeric_qfi(s, &t, theta_a, omega, m, Basis::Cartesian).map_err(|e| e.to_string())?;
    let c = closed_qfi(s, &t, omega, m, Basis::Cartesian).map_err(|e| e.to_string())?;
    Ok(n.h.iter().chain(c.h.iter()).flatten().copied().collect())
}

#[wasm_bindgen]
pub fn ea_curve(r: f64, mode: &str, lo: f64, hi: f64, n: usize) -> Result<Vec<f64>, JsError> {
    ea_curve_values(r, mode, lo, hi, n).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn nea_landscape(v_z: f64, mode: &str, n_theta: usize, n_omega: usize) -> Result<Vec<f64>, JsError> {
    nea_landscape_values(v_z, mode, n_theta, n_omega).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn qfi_matrix(
    strategy: &str,
    mode: &str,
    vx: f64,
    vy: f64,
    vz: f64,
    omega: f64,
    theta_a: f64,
) -> Result<Vec<f64>, JsError> {
    qfi_matrix_values(strategy, mode, vx, vy, vz, omega, theta_a).map_err(|e| JsError::new(&e))
}
