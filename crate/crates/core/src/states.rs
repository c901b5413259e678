//! Input states: the target qubit in Bloch or polar form, pure probe states
//! and maximally entangled probe-ancilla states.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{pauli, tensor, CMatrix, ZERO};

const NORM_TOL: f64 = 1e-12;
const UNITARY_TOL: f64 = 1e-10;

/// Bloch vector of the target qubit, `ρ = (𝟙 + v·σ)/2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    /// Validated constructor: rejects non-finite components and `‖v‖ > 1 + 1e-12`.
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let v = Self { x, y, z };
        if !(x.is_finite() && y.is_finite() && z.is_finite()) {
            return Err(Error::NonFinite("Bloch vector".into()));
        }
        if v.norm() > 1.0 + NORM_TOL {
            return Err(Error::InvalidBloch(v.norm()));
        }
        Ok(v)
    }

    pub fn on_z(z: f64) -> Result<Self> {
        Self::new(0.0, 0.0, z)
    }

    pub fn components(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.x * self.x + self.y * self.y + self.z * self.z
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }
}

/// Spherical coordinates of a Bloch vector: radius `r`, polar angle `theta`, azimuth `phi`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolarCoords {
    pub r: f64,
    pub theta: f64,
    pub phi: f64,
}

impl PolarCoords {
    pub fn new(r: f64, theta: f64, phi: f64) -> Result<Self> {
        if !(r.is_finite() && theta.is_finite() && phi.is_finite()) {
            return Err(Error::NonFinite("polar coordinates".into()));
        }
        if !(0.0..=1.0 + NORM_TOL).contains(&r) {
            return Err(Error::OutOfDomain(format!("r = {r} not in [0, 1]")));
        }
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::OutOfDomain(format!("theta = {theta} not in [0, pi]")));
        }
        Ok(Self {
            r,
            theta,
            phi: phi.rem_euclid(2.0 * PI),
        })
    }
}

/// Which probe preparation is used.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbeConfig {
    /// Polar angle of the pure probe Bloch vector `n = (sin θ_A, 0, cos θ_A)`; unused when entangled.
    pub theta_a: f64,
    /// Probe maximally entangled with an ancilla (singlet) instead of a pure product state.
    pub entangled: bool,
}

impl ProbeConfig {
    pub fn nea(theta_a: f64) -> Self {
        Self {
            theta_a,
            entangled: false,
        }
    }

    pub fn ea() -> Self {
        Self {
            theta_a: 0.0,
            entangled: true,
        }
    }
}

pub fn bloch_to_density(v: &BlochVector) -> Result<CMatrix> {
    if v.norm() > 1.0 + NORM_TOL {
        return Err(Error::InvalidBloch(v.norm()));
    }
    let [sx, sy, sz] = pauli();
    let mut rho = CMatrix::identity(2);
    for (s, c) in [sx, sy, sz].iter().zip(v.components()) {
        rho = &rho + &s.scale_re(c);
    }
    Ok(rho.scale_re(0.5))
}

pub fn polar_to_bloch(p: &PolarCoords) -> BlochVector {
    let (st, ct) = p.theta.sin_cos();
    let (sp, cp) = p.phi.sin_cos();
    BlochVector {
        x: p.r * st * cp,
        y: p.r * st * sp,
        z: p.r * ct,
    }
}

/// Inverse of [`polar_to_bloch`]; `theta = 0` at the origin and `phi = 0` on the z axis.
pub fn bloch_to_polar(v: &BlochVector) -> PolarCoords {
    let r = v.norm();
    if r == 0.0 {
        return PolarCoords {
            r: 0.0,
            theta: 0.0,
            phi: 0.0,
        };
    }
    let theta = (v.z / r).clamp(-1.0, 1.0).acos();
    let phi = if v.x == 0.0 && v.y == 0.0 {
        0.0
    } else {
        v.y.atan2(v.x).rem_euclid(2.0 * PI)
    };
    PolarCoords { r, theta, phi }
}

/// |Ψ⁻⟩ = (|01⟩ − |10⟩)/√2 on A ⊗ B.
pub fn singlet_vector() -> [Complex64; 4] {
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    [ZERO, h, -h, ZERO]
}

pub fn singlet() -> CMatrix {
    let psi = singlet_vector();
    CMatrix::outer(&psi, &psi)
}

fn unitarity_defect(u: &CMatrix) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    (&(&u.adjoint() * u) - &CMatrix::identity(u.rows())).max_abs()
}

/// Projector onto `(U† ⊗ W†)|Ψ⁻⟩`, the general maximally entangled two-qubit state.
pub fn max_entangled(u: &CMatrix, w: &CMatrix) -> Result<CMatrix> {
    for m in [u, w] {
        if m.rows() != 2 || m.cols() != 2 {
            return Err(Error::DimensionMismatch(format!(
                "expected a 2x2 unitary, got {}x{}",
                m.rows(),
                m.cols()
            )));
        }
        let d = unitarity_defect(m);
        if d > UNITARY_TOL {
            return Err(Error::NotUnitary(d));
        }
    }
    let op = tensor(&u.adjoint(), &w.adjoint());
    let psi = op.matvec(&singlet_vector());
    Ok(CMatrix::outer(&psi, &psi))
}

/// Pure NEA probe `(𝟙 + n·σ)/2` with `n = (sin θ_A, 0, cos θ_A)`, or the singlet for EA.
pub fn probe_state(cfg: &ProbeConfig) -> CMatrix {
    if cfg.entangled {
        return singlet();
    }
    let (s, c) = cfg.theta_a.sin_cos();
    let half = |x: f64| Complex64::new(0.5 * x, 0.0);
    CMatrix::from_vec(
        2,
        2,
        vec![half(1.0 + c), half(s), half(s), half(1.0 - c)],
    )
    .expect("finite probe state")
}

/// Single-qubit unitary `e^{iγ}[[a, −b*], [b, a*]]` with `|a|² + |b|² = 1`.
pub fn su2(a: Complex64, b: Complex64, global_phase: f64) -> Result<CMatrix> {
    let n = (a.norm_sqr() + b.norm_sqr()).sqrt();
    if n == 0.0 || !n.is_finite() {
        return Err(Error::OutOfDomain("zero SU(2) parameters".into()));
    }
    let (a, b) = (a / n, b / n);
    let g = Complex64::from_polar(1.0, global_phase);
    CMatrix::from_vec(2, 2, vec![a * g, -b.conj() * g, b * g, a.conj() * g])
}
