//! Maximization of Fisher information over the probe momentum `Ω` and probe
//! orientation `θ_A`.
//!
//! Objectives are not known to be unimodal, so every search starts from a
//! dense grid scan; each grid local maximum is refined by golden-section
//! search and the best refined candidate wins.

use std::f64::consts::PI;

use crate::closedform::{ea_polar, nea_qfi};
use crate::error::{Error, Result};
use crate::scatter::DetectionMode;

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_OMEGA_BRACKET: (f64, f64) = (0.05, 10.0);
const SCAN_POINTS: usize = 64;
const MAX_GOLDEN_ITERS: usize = 300;
const MAX_CANDIDATES: usize = 8;
const MAX_SWEEPS: usize = 400;
const STALL_TOL: f64 = 1e-6;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Clone, Debug, PartialEq)]
pub struct OptResult {
    pub argmax: Vec<(String, f64)>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl OptResult {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.argmax.iter().find(|(n, _)| n == name).map(|&(_, v)| v)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnvelopePoint {
    pub v_z: f64,
    pub best_qfi: f64,
    pub omega_star: f64,
    /// Only for strategies with a tunable pure probe.
    pub theta_a_star: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NeaGrid {
    pub n_theta: usize,
    pub n_omega: usize,
}

impl Default for NeaGrid {
    fn default() -> Self {
        Self {
            n_theta: 181,
            n_omega: 121,
        }
    }
}

/// Search coordinate: logarithmic for strictly positive brackets.
#[derive(Clone, Copy)]
enum Axis {
    Linear,
    Log,
}

impl Axis {
    fn for_bracket(lo: f64) -> Self {
        if lo > 0.0 {
            Axis::Log
        } else {
            Axis::Linear
        }
    }

    fn to_u(self, x: f64) -> f64 {
        match self {
            Axis::Linear => x,
            Axis::Log => x.ln(),
        }
    }

    fn to_x(self, u: f64) -> f64 {
        match self {
            Axis::Linear => u,
            Axis::Log => u.exp(),
        }
    }
}

fn checked(y: f64, x: f64) -> Result<f64> {
    if y.is_finite() {
        Ok(y)
    } else {
        Err(Error::NonFinite(format!("objective at {x}")))
    }
}

struct Golden {
    x: f64,
    value: f64,
    iterations: usize,
    converged: bool,
}

/// Golden-section maximization on `[ua, ub]` in the axis coordinate.
fn golden_max<F>(f: &F, axis: Axis, mut ua: f64, mut ub: f64, tol: f64) -> Result<Golden>
where
    F: Fn(f64) -> f64,
{
    let eval = |u: f64| {
        let x = axis.to_x(u);
        checked(f(x), x)
    };
    let mut u1 = ub - INV_PHI * (ub - ua);
    let mut u2 = ua + INV_PHI * (ub - ua);
    let mut f1 = eval(u1)?;
    let mut f2 = eval(u2)?;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < MAX_GOLDEN_ITERS {
        let (xa, xb) = (axis.to_x(ua), axis.to_x(ub));
        let mid = 0.5 * (xa + xb);
        if (xb - xa).abs() <= tol * (1.0 + mid.abs()) {
            converged = true;
            break;
        }
        iterations += 1;
        if f1 >= f2 {
            ub = u2;
            u2 = u1;
            f2 = f1;
            u1 = ub - INV_PHI * (ub - ua);
            f1 = eval(u1)?;
        } else {
            ua = u1;
            u1 = u2;
            f1 = f2;
            u2 = ua + INV_PHI * (ub - ua);
            f2 = eval(u2)?;
        }
    }
    let (u, value) = if f1 >= f2 { (u1, f1) } else { (u2, f2) };
    Ok(Golden {
        x: axis.to_x(u),
        value,
        iterations,
        converged,
    })
}

/// Maximizes `objective` on `[lo, hi]`: a 64-point scan (log-spaced when
/// `lo > 0`) followed by golden-section refinement of each scan peak.
pub fn maximize_1d<F>(objective: F, bracket: (f64, f64), tol: f64) -> Result<OptResult>
where
    F: Fn(f64) -> f64,
{
    let (lo, hi) = bracket;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::DegenerateBracket(lo, hi));
    }
    let axis = Axis::for_bracket(lo);
    let (ulo, uhi) = (axis.to_u(lo), axis.to_u(hi));
    let step = (uhi - ulo) / (SCAN_POINTS - 1) as f64;
    let us: Vec<f64> = (0..SCAN_POINTS).map(|i| ulo + step * i as f64).collect();
    let ys = us
        .iter()
        .map(|&u| {
            let x = axis.to_x(u);
            checked(objective(x), x)
        })
        .collect::<Result<Vec<f64>>>()?;

    let mut peaks: Vec<usize> = (0..SCAN_POINTS)
        .filter(|&i| {
            let left = i == 0 || ys[i - 1] <= ys[i];
            let right = i + 1 == SCAN_POINTS || ys[i + 1] <= ys[i];
            left && right
        })
        .collect();
    peaks.sort_by(|&a, &b| ys[b].total_cmp(&ys[a]).then(a.cmp(&b)));
    peaks.truncate(MAX_CANDIDATES);

    let mut best: Option<(f64, f64)> = None;
    let mut iterations = 0;
    let mut converged = true;
    for &i in &peaks {
        let ua = if i == 0 { us[0] } else { us[i - 1] };
        let ub = if i + 1 == SCAN_POINTS { us[i] } else { us[i + 1] };
        let g = golden_max(&objective, axis, ua, ub, tol)?;
        iterations += g.iterations;
        converged &= g.converged;
        let (x, y) = if g.value >= ys[i] { (g.x, g.value) } else { (axis.to_x(us[i]), ys[i]) };
        if best.is_none_or(|(_, by)| y > by) {
            best = Some((x, y));
        }
    }
    let (x, value) = best.expect("at least one scan peak");
    Ok(OptResult {
        argmax: vec![("x".into(), x)],
        value,
        iterations,
        converged,
    })
}

/// Minimizes by maximizing `-objective`; the reported value is the minimum.
pub fn minimize_1d<F>(objective: F, bracket: (f64, f64), tol: f64) -> Result<OptResult>
where
    F: Fn(f64) -> f64,
{
    let mut r = maximize_1d(|x| -objective(x), bracket, tol)?;
    r.value = -r.value;
    Ok(r)
}

fn renamed(mut r: OptResult, name: &str) -> OptResult {
    r.argmax[0].0 = name.to_string();
    r
}

/// Best EA Fisher information for `v_z` on the z axis, over `Ω`.
pub fn maximize_ea(v_z: f64, omega_bracket: (f64, f64), mode: DetectionMode) -> Result<OptResult> {
    let r = v_z.abs();
    if r >= 1.0 {
        return Err(Error::OutOfDomain(format!("|v_z| = {r} must be < 1")));
    }
    ea_polar(r, omega_bracket.0.max(f64::MIN_POSITIVE), mode)?;
    let r = maximize_1d(
        |omega| ea_polar(r, omega, mode).map(|c| c.c_r).unwrap_or(f64::NAN),
        omega_bracket,
        DEFAULT_TOL,
    )?;
    Ok(renamed(r, "omega"))
}

/// Best NEA Fisher information for `v_z` over `(θ_A, Ω)`: grid scan on
/// `θ_A ∈ [0, π]` × log `Ω`, then coordinate-wise golden refinement.
/// Ties are broken toward the smallest `θ_A`.
pub fn maximize_nea(
    v_z: f64,
    omega_bracket: (f64, f64),
    mode: DetectionMode,
    grid: NeaGrid,
) -> Result<OptResult> {
    if !v_z.is_finite() || v_z.abs() >= 1.0 {
        return Err(Error::OutOfDomain(format!("|v_z| = {} must be < 1", v_z.abs())));
    }
    let (lo, hi) = omega_bracket;
    if !(lo > 0.0 && hi.is_finite() && lo < hi) {
        return Err(Error::DegenerateBracket(lo, hi));
    }
    if grid.n_theta < 3 || grid.n_omega < 3 {
        return Err(Error::OutOfDomain("NEA grid needs at least 3x3 points".into()));
    }
    let f = |theta: f64, omega: f64| nea_qfi(v_z, theta, omega, mode).unwrap_or(f64::NAN);

    let (ulo, uhi) = (lo.ln(), hi.ln());
    let dtheta = PI / (grid.n_theta - 1) as f64;
    let du = (uhi - ulo) / (grid.n_omega - 1) as f64;
    let thetas: Vec<f64> = (0..grid.n_theta).map(|i| dtheta * i as f64).collect();
    let us: Vec<f64> = (0..grid.n_omega).map(|j| ulo + du * j as f64).collect();
    let mut values = vec![0.0; grid.n_theta * grid.n_omega];
    for (i, &t) in thetas.iter().enumerate() {
        for (j, &u) in us.iter().enumerate() {
            values[i * grid.n_omega + j] = checked(f(t, u.exp()), u.exp())?;
        }
    }
    let at = |i: usize, j: usize| values[i * grid.n_omega + j];

    let mut peaks = Vec::new();
    for i in 0..grid.n_theta {
        for j in 0..grid.n_omega {
            let y = at(i, j);
            let mut is_peak = true;
            'nb: for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    let (ni, nj) = (i as i64 + di, j as i64 + dj);
                    if (di, dj) == (0, 0)
                        || ni < 0
                        || nj < 0
                        || ni >= grid.n_theta as i64
                        || nj >= grid.n_omega as i64
                    {
                        continue;
                    }
                    if at(ni as usize, nj as usize) > y {
                        is_peak = false;
                        break 'nb;
                    }
                }
            }
            if is_peak {
                peaks.push((i, j));
            }
        }
    }
    peaks.sort_by(|a, b| at(b.0, b.1).total_cmp(&at(a.0, a.1)).then(a.cmp(b)));
    peaks.truncate(MAX_CANDIDATES);

    let mut candidates = Vec::new();
    let mut iterations = 0;
    for &(i, j) in &peaks {
        let (mut theta, mut u) = (thetas[i], us[j]);
        let mut value = at(i, j);
        let mut converged = false;
        for _ in 0..MAX_SWEEPS {
            iterations += 1;
            let start_value = value;
            let g = golden_max(
                &|t| f(t, u.exp()),
                Axis::Linear,
                (theta - 2.0 * dtheta).max(0.0),
                (theta + 2.0 * dtheta).min(PI),
                DEFAULT_TOL,
            )?;
            let moved_theta = if g.value >= value {
                let d = (g.x - theta).abs();
                theta = g.x;
                value = g.value;
                d
            } else {
                0.0
            };
            let g = golden_max(
                &|x| f(theta, x),
                Axis::Log,
                (u - 2.0 * du).max(ulo),
                (u + 2.0 * du).min(uhi),
                DEFAULT_TOL,
            )?;
            let omega = u.exp();
            let moved_omega = if g.value >= value {
                let d = (g.x - omega).abs();
                u = g.x.ln();
                value = g.value;
                d
            } else {
                0.0
            };
            let small = |moved: f64, x: f64, tol: f64| moved <= tol * (1.0 + x);
            let omega = u.exp();
            // Near a flat maximum the argmax is only resolvable to ~sqrt(eps);
            // stop once a sweep no longer changes the value.
            let stalled = value - start_value <= 4.0 * f64::EPSILON * value.abs();
            if (small(moved_theta, theta, DEFAULT_TOL) && small(moved_omega, omega, DEFAULT_TOL))
                || (stalled && small(moved_theta, theta, STALL_TOL) && small(moved_omega, omega, STALL_TOL))
            {
                converged = true;
                break;
            }
        }
        candidates.push((theta, u.exp(), value, converged));
    }

    let best_value = candidates
        .iter()
        .map(|c| c.2)
        .fold(f64::NEG_INFINITY, f64::max);
    let tie = 1e-12 * best_value.abs().max(1e-300);
    let (theta, omega, value, converged) = candidates
        .into_iter()
        .filter(|c| c.2 >= best_value - tie)
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .expect("at least one grid peak");
    Ok(OptResult {
        argmax: vec![("theta_a".into(), theta), ("omega".into(), omega)],
        value,
        iterations,
        converged,
    })
}

pub fn ea_envelope(
    v_zs: &[f64],
    omega_bracket: (f64, f64),
    mode: DetectionMode,
) -> Result<Vec<EnvelopePoint>> {
    v_zs.iter()
        .map(|&v_z| {
            let r = maximize_ea(v_z, omega_bracket, mode)?;
            Ok(EnvelopePoint {
                v_z,
                best_qfi: r.value,
                omega_star: r.get("omega").expect("omega"),
                theta_a_star: None,
            })
        })
        .collect()
}

pub fn nea_envelope(
    v_zs: &[f64],
    omega_bracket: (f64, f64),
    mode: DetectionMode,
    grid: NeaGrid,
) -> Result<Vec<EnvelopePoint>> {
    // Independent per point; evaluated on scoped threads and reassembled in order.
    let results: Vec<Result<OptResult>> = std::thread::scope(|scope| {
        let handles: Vec<_> = v_zs
            .iter()
            .map(|&v_z| scope.spawn(move || maximize_nea(v_z, omega_bracket, mode, grid)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("optimizer thread panicked"))
            .collect()
    });
    v_zs.iter()
        .zip(results)
        .map(|(&v_z, r)| {
            let r = r?;
            Ok(EnvelopePoint {
                v_z,
                best_qfi: r.value,
                omega_star: r.get("omega").expect("omega"),
                theta_a_star: r.get("theta_a"),
            })
        })
        .collect()
}

/// Range of per-`r` optimal momenta for the EA radial information `c_r`.
pub fn ea_optimality_intervals(
    mode: DetectionMode,
    r_grid: &[f64],
    omega_bracket: (f64, f64),
) -> Result<(f64, f64)> {
    if r_grid.is_empty() {
        return Err(Error::OutOfDomain("empty r grid".into()));
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &r in r_grid {
        if !(0.0..=0.99).contains(&r) {
            return Err(Error::OutOfDomain(format!("r = {r} not in [0, 0.99]")));
        }
        let opt = maximize_ea(r, omega_bracket, mode)?;
        let w = opt.get("omega").expect("omega");
        lo = lo.min(w);
        hi = hi.max(w);
    }
    Ok((lo, hi))
}
