//! Closed-form Fisher information for direct, entanglement-assisted (EA) and
//! non-entanglement-assisted (NEA) estimation, and the purity and phase bounds
//! built on them.
//!
//! All expressions are rational functions of `w = Ω²`; they are checked
//! against [`crate::qfi::qfi_numeric`] in the test suites.

use crate::error::{check_omega, Error, Result};
use crate::qfi::{Basis, QfiMatrix};
use crate::scatter::DetectionMode;
use crate::states::BlochVector;

/// Radial and angular coefficients of a polar QFI `diag(c_r, c_θ, c_θ sin²θ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QfiPolarCoeffs {
    pub c_r: f64,
    pub c_theta: f64,
}

impl QfiPolarCoeffs {
    pub fn matrix(&self, theta: f64) -> QfiMatrix {
        let s2 = theta.sin().powi(2);
        QfiMatrix::diag(Basis::Polar, [self.c_r, self.c_theta, self.c_theta * s2])
    }
}

fn check_radius(r: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::OutOfDomain(format!("r = {r} not in [0, 1]")));
    }
    Ok(())
}

/// `1/(1 − r²)` with an explicit `+∞` on the sphere surface.
fn radial_divergence(r: f64) -> f64 {
    if r >= 1.0 {
        f64::INFINITY
    } else {
        1.0 / (1.0 - r * r)
    }
}

pub fn direct_qfi(r: f64, _theta: f64) -> Result<QfiPolarCoeffs> {
    check_radius(r)?;
    Ok(QfiPolarCoeffs {
        c_r: radial_divergence(r),
        c_theta: r * r,
    })
}

/// Direct-access Fisher matrix in Cartesian form, `𝟙 + v vᵀ/(1 − |v|²)`.
pub fn direct_cartesian(v: &BlochVector) -> Result<QfiMatrix> {
    let s = v.norm_sqr();
    if s >= 1.0 {
        return Err(Error::OutOfDomain(format!("|v| = {} must be < 1", s.sqrt())));
    }
    let c = v.components();
    let mut h = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            h[i][j] = c[i] * c[j] / (1.0 - s) + if i == j { 1.0 } else { 0.0 };
        }
    }
    Ok(QfiMatrix::new(Basis::Cartesian, h))
}

/// `(1 − r²) c_r` for each detection mode; finite at `r = 1`.
fn ea_rescaled_radial(r2: f64, w: f64, mode: DetectionMode) -> f64 {
    let w2 = w * w;
    match mode {
        DetectionMode::Both => {
            8.0 * w * (1.0 + 18.0 * w + 63.0 * w2)
                / ((1.0 + w) * (1.0 + 5.0 * w) * (1.0 + 9.0 * w).powi(2))
        }
        DetectionMode::Transmission => {
            2.0 * w
                * (3.0 * (1.0 + 3.0 * w) * (11.0 + 76.0 * w + 117.0 * w2)
                    - 2.0 * r2 * (9.0 + 50.0 * w + 45.0 * w2))
                / ((1.0 + w)
                    * (1.0 + 5.0 * w)
                    * (1.0 + 9.0 * w)
                    * (9.0 * (1.0 + 3.0 * w).powi(2) - 4.0 * r2))
        }
        DetectionMode::Reflection => {
            2.0 * w
                * ((1.0 + 7.0 * w) * (1.0 + 36.0 * w + 207.0 * w2)
                    - 2.0 * r2 * w * (1.0 + 18.0 * w + 117.0 * w2))
                / ((1.0 + w)
                    * (1.0 + 9.0 * w).powi(2)
                    * ((1.0 + 7.0 * w).powi(2) - 4.0 * r2 * w2))
        }
    }
}

fn ea_angular(r2: f64, w: f64, mode: DetectionMode) -> f64 {
    let w2 = w * w;
    match mode {
        DetectionMode::Both => {
            let lead = 1.0 / ((1.0 + w) * (1.0 + 9.0 * w));
            let bracket = 4.0
                * (1.0 + 5.0 * w)
                * (1.0 + 9.0 * w)
                * (1.0 + 18.0 * w + 63.0 * w2)
                - r2 * (1.0 + 4.0 * w + 68.0 * w2 + 720.0 * w2 * w + 1863.0 * w2 * w2);
            let tail = 32.0 * r2 * w
                / ((4.0 * (1.0 + 9.0 * w).powi(2) - r2 * (1.0 - 9.0 * w).powi(2))
                    * (4.0 * (1.0 + 5.0 * w).powi(2) - r2 * (1.0 + 3.0 * w).powi(2)));
            lead * bracket * tail
        }
        DetectionMode::Transmission => {
            4.0 * r2
                * w
                * (2.0 * (1.0 + 5.0 * w) * (11.0 + 76.0 * w + 117.0 * w2)
                    - r2 * (1.0 + 3.0 * w).powi(2))
                / (3.0
                    * (1.0 + w)
                    * (1.0 + 3.0 * w)
                    * (1.0 + 9.0 * w)
                    * (4.0 * (1.0 + 5.0 * w).powi(2) - r2 * (1.0 + 3.0 * w).powi(2)))
        }
        DetectionMode::Reflection => {
            4.0 * r2
                * w
                * (2.0 * (1.0 + 9.0 * w) * (1.0 + 36.0 * w + 207.0 * w2)
                    - r2 * w * (1.0 - 9.0 * w).powi(2))
                / ((1.0 + w)
                    * (1.0 + 7.0 * w)
                    * (1.0 + 9.0 * w)
                    * (4.0 * (1.0 + 9.0 * w).powi(2) - r2 * (1.0 - 9.0 * w).powi(2)))
        }
    }
}

/// Polar QFI coefficients of the EA strategy with a maximally entangled probe.
pub fn ea_polar(r: f64, omega: f64, mode: DetectionMode) -> Result<QfiPolarCoeffs> {
    check_radius(r)?;
    check_omega(omega)?;
    let (r2, w) = (r * r, omega * omega);
    Ok(QfiPolarCoeffs {
        c_r: ea_rescaled_radial(r2, w, mode) * radial_divergence(r),
        c_theta: ea_angular(r2, w, mode),
    })
}

/// `(1 − r²) c_r`, the radial information with the surface divergence removed.
pub fn ea_rescaled(r: f64, omega: f64, mode: DetectionMode) -> Result<f64> {
    check_radius(r)?;
    check_omega(omega)?;
    Ok(ea_rescaled_radial(r * r, omega * omega, mode))
}

/// Fisher information for `v_z` with `v = (0, 0, v_z)`, a pure probe at polar
/// angle `theta_a` in the x-z plane, and no ancilla.
pub fn nea_qfi(v_z: f64, theta_a: f64, omega: f64, mode: DetectionMode) -> Result<f64> {
    if !v_z.is_finite() || v_z.abs() >= 1.0 {
        return Err(Error::OutOfDomain(format!("|v_z| = {} must be < 1", v_z.abs())));
    }
    if !theta_a.is_finite() {
        return Err(Error::NonFinite("theta_a".into()));
    }
    check_omega(omega)?;
    let w = omega * omega;
    let w2 = w * w;
    let z = v_z;
    let z2 = z * z;
    let c1 = theta_a.cos();
    let c2 = (2.0 * theta_a).cos();
    let c3 = (3.0 * theta_a).cos();
    let c4 = (4.0 * theta_a).cos();

    // Recurring factors.
    let d_t = 4.0 * (1.0 + 5.0 * w) - z2 * (1.0 + 17.0 * w) - z * (1.0 + w) * (4.0 * c1 - z * c2);
    let d_r = 4.0 - z2 - 4.0 * z * c1 + z2 * c2;
    let f_t = 3.0 + 9.0 * w - 2.0 * z * c1;
    let f_r = 1.0 + 7.0 * w + 2.0 * z * w * c1;

    let value = match mode {
        DetectionMode::Transmission => {
            let num = 4.0 * (11.0 + 96.0 * w + 181.0 * w2)
                - z2 * (1.0 + w) * (1.0 + 33.0 * w)
                - 4.0 * z * (8.0 + 43.0 * w + 3.0 * w2) * c1
                - 4.0 * (1.0 - w + 8.0 * z2 * w) * (1.0 + w) * c2
                - 4.0 * z * w * (1.0 + w) * c3
                + z2 * (1.0 + w).powi(2) * c4;
            num / d_t * w / ((1.0 + w) * f_t * f_r)
        }
        DetectionMode::Reflection => {
            let num = 4.0 * (5.0 + 23.0 * w) - z2 * (1.0 + w) - 4.0 * z * (3.0 - 2.0 * w) * c1
                + 4.0 * (1.0 - 5.0 * w) * c2
                - 4.0 * z * (1.0 + 2.0 * w) * c3
                + z2 * (1.0 + w) * c4;
            let den = 3.0 * (1.0 + 3.0 * w) * (1.0 + 7.0 * w)
                - 2.0 * z2 * w
                - 2.0 * z * (1.0 + 4.0 * w - 9.0 * w2) * c1
                - 2.0 * z2 * w * c2;
            num / den * w / ((1.0 + w) * d_r)
        }
        DetectionMode::Both => {
            let first = f_r
                * d_t
                * (4.0 * (5.0 + 27.0 * w) - z2 + 4.0 * (1.0 - 9.0 * w) * c2
                    - 16.0 * z * c1.powi(3)
                    + z2 * c4);
            let second = d_r
                * (3.0 * (1.0 + 3.0 * w) - 2.0 * z * c1)
                * (4.0 * (3.0 + 48.0 * w + 181.0 * w2)
                    - z2 * w * (1.0 + 33.0 * w)
                    - 12.0 * z * w * (1.0 + w) * c1
                    - 4.0 * (1.0 + 8.0 * w - w2 + 8.0 * z2 * w2) * c2
                    - z * w * (1.0 + w) * (4.0 * c3 - z * c4));
            (first + second) / (d_t * d_r * f_t) * w / ((1.0 + w) * (1.0 + 9.0 * w) * f_r)
        }
    };
    Ok(value)
}

/// Cartesian EA Fisher matrix for a general target Bloch vector.
pub fn ea_cartesian(v: &BlochVector, omega: f64, mode: DetectionMode) -> Result<QfiMatrix> {
    let s = v.norm_sqr();
    if !(s < 1.0) {
        return Err(Error::OutOfDomain(format!("|v| = {} must be < 1", s.sqrt())));
    }
    check_omega(omega)?;
    let w = omega * omega;
    let w2 = w * w;
    let c = v.components();

    let a9 = 4.0 * (1.0 + 9.0 * w).powi(2) - s * (1.0 - 9.0 * w).powi(2);
    let a5 = 4.0 * (1.0 + 5.0 * w).powi(2) - s * (1.0 + 3.0 * w).powi(2);
    let t3 = 9.0 * (1.0 + 3.0 * w).powi(2) - 4.0 * s;
    let r7 = (1.0 + 7.0 * w).powi(2) - 4.0 * s * w2;

    let mut h = [[0.0; 3]; 3];
    for i in 0..3 {
        let vi2 = c[i] * c[i];
        // Squared norm of the two other components.
        let rest = s - vi2;
        for j in 0..3 {
            if i == j {
                continue;
            }
            let vij = c[i] * c[j];
            h[i][j] = match mode {
                DetectionMode::Both => {
                    2.0 * vij * w
                        / ((1.0 - s) * (1.0 + w) * (1.0 + 5.0 * w) * (1.0 + 9.0 * w).powi(2))
                        * ((1.0 + 7.0 * w) * (1.0 + 9.0 * w) * (3.0 + 13.0 * w).powi(2) * a9
                            + 3.0 * (1.0 + 3.0 * w) * (1.0 + 5.0 * w) * (1.0 + 27.0 * w).powi(2) * a5)
                        / (a9 * a5)
                }
                DetectionMode::Transmission => {
                    2.0 * vij * w
                        / (3.0
                            * (1.0 - s)
                            * (1.0 + w)
                            * (1.0 + 3.0 * w)
                            * (1.0 + 5.0 * w)
                            * (1.0 + 9.0 * w))
                        * (3.0 * (1.0 + 3.0 * w) * (1.0 + 7.0 * w) * (3.0 + 13.0 * w).powi(2) * t3
                            + 8.0 * (1.0 - s) * (1.0 + 5.0 * w) * a5)
                        / (t3 * a5)
                }
                DetectionMode::Reflection => {
                    2.0 * vij * w
                        / ((1.0 - s) * (1.0 + w) * (1.0 + 7.0 * w) * (1.0 + 9.0 * w).powi(2))
                        * (3.0 * (1.0 + 3.0 * w) * (1.0 + 7.0 * w) * (1.0 + 27.0 * w).powi(2) * r7
                            + 8.0 * (1.0 - s) * w2 * w * (1.0 + 9.0 * w) * a9)
                        / (r7 * a9)
                }
            };
        }
        h[i][i] = match mode {
            DetectionMode::Both => {
                2.0 * w / ((1.0 - s) * (1.0 + w) * (1.0 + 5.0 * w) * (1.0 + 9.0 * w).powi(2))
                    * ((1.0 + 9.0 * w)
                        * (3.0 + 13.0 * w)
                        * a9
                        * (vi2 * (1.0 + 7.0 * w) * (3.0 + 13.0 * w)
                            + 4.0 * (1.0 - s) * (1.0 + 5.0 * w).powi(2))
                        + (1.0 + 5.0 * w)
                            * (1.0 + 27.0 * w)
                            * a5
                            * (3.0 * vi2 * (1.0 + 3.0 * w) * (1.0 + 27.0 * w)
                                + 4.0 * (1.0 - s) * (1.0 + 9.0 * w).powi(2)))
                    / (a9 * a5)
            }
            DetectionMode::Transmission => {
                2.0 * w
                    / (3.0
                        * (1.0 - s)
                        * (1.0 + w)
                        * (1.0 + 3.0 * w)
                        * (1.0 + 5.0 * w)
                        * (1.0 + 9.0 * w))
                    * (2.0
                        * (1.0 - s)
                        * (1.0 + 5.0 * w)
                        * a5
                        * (9.0 * (1.0 + 3.0 * w).powi(2) - 4.0 * rest)
                        + 3.0
                            * (1.0 + 3.0 * w)
                            * (3.0 + 13.0 * w)
                            * t3
                            * (4.0 * (1.0 + 5.0 * w).powi(2) * (1.0 - rest)
                                - (1.0 + 3.0 * w).powi(2) * vi2))
                    / (t3 * a5)
            }
            DetectionMode::Reflection => {
                2.0 * w / ((1.0 - s) * (1.0 + w) * (1.0 + 7.0 * w) * (1.0 + 9.0 * w).powi(2))
                    * ((1.0 + 7.0 * w)
                        * (1.0 + 27.0 * w)
                        * r7
                        * (4.0 * (1.0 + 9.0 * w).powi(2) * (1.0 - rest)
                            - vi2 * (1.0 - 9.0 * w).powi(2))
                        + 2.0
                            * (1.0 - s)
                            * w
                            * (1.0 + 9.0 * w)
                            * a9
                            * ((1.0 + 7.0 * w).powi(2) - 4.0 * w2 * rest))
                    / (r7 * a9)
            }
        };
    }
    Ok(QfiMatrix::new(Basis::Cartesian, h))
}

/// Lower bound on `Var[r]` for the EA strategy (θ, φ known).
pub fn purity_bound(r: f64, omega: f64, m_copies: u32, mode: DetectionMode) -> Result<f64> {
    if m_copies == 0 {
        return Err(Error::OutOfDomain("number of copies must be positive".into()));
    }
    let c = ea_polar(r, omega, mode)?;
    Ok(1.0 / (m_copies as f64 * c.c_r))
}

/// Direct-access counterpart of [`purity_bound`], `(1 − r²)/M`.
pub fn direct_purity_bound(r: f64, m_copies: u32) -> Result<f64> {
    if m_copies == 0 {
        return Err(Error::OutOfDomain("number of copies must be positive".into()));
    }
    let c = direct_qfi(r, 0.0)?;
    Ok(1.0 / (m_copies as f64 * c.c_r))
}

/// Lower bound on `Var[φ]` for a pure equatorial target (`r = 1`, `θ = π/2`),
/// EA strategy collecting both arms.
pub fn phase_bound(omega: f64, m_copies: u32) -> Result<f64> {
    check_omega(omega)?;
    if m_copies == 0 {
        return Err(Error::OutOfDomain("number of copies must be positive".into()));
    }
    let w = omega * omega;
    let num = 3.0 * (1.0 + w) * (1.0 + 3.0 * w) * (1.0 + 7.0 * w) * (1.0 + 9.0 * w);
    let den = 32.0 * w * (1.0 + 10.0 * w + 27.0 * w * w);
    Ok(num / den / m_copies as f64)
}
