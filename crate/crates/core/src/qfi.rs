//! Numerical quantum Fisher information of a branch state, and Cramér-Rao
//! bounds derived from it.
//!
//! Each block is diagonalized once; with `ρ = Σ ρ_n |ψ_n⟩⟨ψ_n|` the
//! information matrix is
//!
//! ```text
//! H_jk = Σ_{n,m: ρ_n+ρ_m > eps} 2 Re[⟨ψ_n|∂_j ρ|ψ_m⟩⟨ψ_m|∂_k ρ|ψ_n⟩] / (ρ_n + ρ_m)
//! ```
//!
//! summed over blocks. This needs only matrix elements of `∂ρ`, never
//! eigenvector derivatives, so it stays well conditioned at degeneracies.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{herm_eig, CMatrix};
use crate::scatter::{Block, BranchDerivatives, BranchState};
use crate::states::PolarCoords;

pub const DEFAULT_EPS: f64 = 1e-12;
const NEG_EIG_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Basis {
    /// `(v_x, v_y, v_z)`
    Cartesian,
    /// `(r, θ, φ)`
    Polar,
    /// Any other parameter set reached through a Jacobian.
    Custom,
}

pub type Mat3 = [[f64; 3]; 3];

/// Symmetric 3×3 Fisher information matrix tagged with its parameter basis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QfiMatrix {
    pub basis: Basis,
    pub h: Mat3,
}

impl QfiMatrix {
    pub fn new(basis: Basis, h: Mat3) -> Self {
        Self { basis, h }
    }

    pub fn diag(basis: Basis, d: [f64; 3]) -> Self {
        let mut h = [[0.0; 3]; 3];
        for i in 0..3 {
            h[i][i] = d[i];
        }
        Self { basis, h }
    }

    pub fn max_abs(&self) -> f64 {
        self.h.iter().flatten().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    pub fn max_abs_diff(&self, other: &QfiMatrix) -> f64 {
        let mut d = 0.0_f64;
        for i in 0..3 {
            for j in 0..3 {
                d = d.max((self.h[i][j] - other.h[i][j]).abs());
            }
        }
        d
    }

    /// `max|A − B| / max|B|`, with `other` as the reference.
    pub fn rel_diff(&self, other: &QfiMatrix) -> f64 {
        let scale = other.max_abs();
        if scale == 0.0 {
            self.max_abs()
        } else {
            self.max_abs_diff(other) / scale
        }
    }

    pub fn asymmetry(&self) -> f64 {
        let mut d = 0.0_f64;
        for i in 0..3 {
            for j in (i + 1)..3 {
                d = d.max((self.h[i][j] - self.h[j][i]).abs());
            }
        }
        d
    }

    /// Smallest eigenvalue (via the Hermitian eigensolver on the real matrix).
    pub fn min_eigenvalue(&self) -> f64 {
        let flat: Vec<f64> = self.h.iter().flatten().copied().collect();
        let m = CMatrix::from_real(3, 3, &flat).expect("finite QFI");
        herm_eig(&m.hermitian_part())
            .map(|e| e.eigenvalues[2])
            .unwrap_or(f64::NAN)
    }

    pub fn determinant(&self) -> f64 {
        det3(&self.h)
    }
}

fn det3(m: &Mat3) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

fn inverse3(m: &Mat3) -> Option<Mat3> {
    let det = det3(m);
    if !det.is_finite() || det.abs() <= 1e-12 {
        return None;
    }
    let mut inv = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let (r0, r1) = match j {
                0 => (1, 2),
                1 => (0, 2),
                _ => (0, 1),
            };
            let (c0, c1) = match i {
                0 => (1, 2),
                1 => (0, 2),
                _ => (0, 1),
            };
            let minor = m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            inv[i][j] = sign * minor / det;
        }
    }
    Some(inv)
}

fn check_alignment(state: &BranchState, derivs: &BranchDerivatives) -> Result<()> {
    for (j, blocks) in derivs.per_param.iter().enumerate() {
        if blocks.len() != state.blocks.len() {
            return Err(Error::LabelMismatch(format!(
                "parameter {j}: {} derivative blocks for {} state blocks",
                blocks.len(),
                state.blocks.len()
            )));
        }
        for (a, b) in state.blocks.iter().zip(blocks) {
            if a.label != b.label || a.op.rows() != b.op.rows() || a.op.cols() != b.op.cols() {
                return Err(Error::LabelMismatch(format!(
                    "parameter {j}: {:?} vs {:?}",
                    a.label, b.label
                )));
            }
        }
    }
    Ok(())
}

/// Accumulates the contribution of one block into `h` for the listed parameters.
fn accumulate_block(
    block: &CMatrix,
    derivs: &[(usize, &Block)],
    eps: f64,
    h: &mut Mat3,
) -> Result<()> {
    let eig = herm_eig(block)?;
    if let Some(&low) = eig.eigenvalues.last() {
        if low < -NEG_EIG_TOL {
            return Err(Error::NegativeEigenvalue(low));
        }
    }
    let lambda: Vec<f64> = eig.eigenvalues.iter().map(|&x| x.max(0.0)).collect();
    let v = &eig.eigenvectors;
    let vd = v.adjoint();
    // ∂_j ρ in the eigenbasis of ρ.
    let rotated: Vec<(usize, CMatrix)> = derivs
        .iter()
        .map(|&(j, b)| (j, &(&vd * &b.op) * v))
        .collect();
    let n = lambda.len();
    for a in 0..rotated.len() {
        for b in a..rotated.len() {
            let (j, dj) = (&rotated[a].0, &rotated[a].1);
            let (k, dk) = (&rotated[b].0, &rotated[b].1);
            let mut acc = 0.0;
            for p in 0..n {
                for q in 0..n {
                    let s = lambda[p] + lambda[q];
                    if s > eps {
                        let z: Complex64 = dj[(p, q)] * dk[(q, p)];
                        acc += 2.0 * z.re / s;
                    }
                }
            }
            h[*j][*k] += acc;
            if j != k {
                h[*k][*j] += acc;
            }
        }
    }
    Ok(())
}

/// Full Cartesian Fisher matrix of a branch state.
pub fn qfi_numeric(state: &BranchState, derivs: &BranchDerivatives, eps: f64) -> Result<QfiMatrix> {
    qfi_for_params(state, derivs, &[0, 1, 2], eps).map(|h| QfiMatrix::new(Basis::Cartesian, h))
}

/// Fisher information of the one-parameter family varying only `v_axis`.
pub fn qfi_single(
    state: &BranchState,
    derivs: &BranchDerivatives,
    axis: usize,
    eps: f64,
) -> Result<f64> {
    if axis > 2 {
        return Err(Error::OutOfDomain(format!("axis {axis} not in 0..3")));
    }
    qfi_for_params(state, derivs, &[axis], eps).map(|h| h[axis][axis])
}

fn qfi_for_params(
    state: &BranchState,
    derivs: &BranchDerivatives,
    params: &[usize],
    eps: f64,
) -> Result<Mat3> {
    if !(eps > 0.0) {
        return Err(Error::OutOfDomain(format!("eps = {eps} must be positive")));
    }
    check_alignment(state, derivs)?;
    let mut h = [[0.0; 3]; 3];
    for (idx, block) in state.blocks.iter().enumerate() {
        let d: Vec<(usize, &Block)> = params
            .iter()
            .map(|&j| (j, &derivs.per_param[j][idx]))
            .collect();
        accumulate_block(&block.op, &d, eps, &mut h)?;
    }
    Ok(h)
}

/// `B_jk = ∂v_k/∂ṽ_j`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jacobian {
    pub b: Mat3,
    /// Basis of the new parameters `ṽ`.
    pub target: Basis,
}

impl Jacobian {
    pub fn identity(target: Basis) -> Self {
        Self {
            b: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            target,
        }
    }

    /// Cartesian → polar: rows are `∂v/∂r`, `∂v/∂θ`, `∂v/∂φ`.
    pub fn spherical(p: &PolarCoords) -> Self {
        let (st, ct) = p.theta.sin_cos();
        let (sp, cp) = p.phi.sin_cos();
        let r = p.r;
        Self {
            b: [
                [st * cp, st * sp, ct],
                [r * ct * cp, r * ct * sp, -r * st],
                [-r * st * sp, r * st * cp, 0.0],
            ],
            target: Basis::Polar,
        }
    }
}

/// `H̃ = B H Bᵀ`.
pub fn reparameterize(h: &QfiMatrix, jac: &Jacobian) -> Result<QfiMatrix> {
    if jac.b.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("Jacobian".into()));
    }
    let b = &jac.b;
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let mut s = 0.0;
            for k in 0..3 {
                for l in 0..3 {
                    s += b[i][k] * h.h[k][l] * b[j][l];
                }
            }
            out[i][j] = s;
        }
    }
    // Exact symmetry.
    for i in 0..3 {
        for j in (i + 1)..3 {
            let m = 0.5 * (out[i][j] + out[j][i]);
            out[i][j] = m;
            out[j][i] = m;
        }
    }
    Ok(QfiMatrix::new(jac.target, out))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BoundTarget {
    /// Full covariance bound `H⁻¹/M`.
    Matrix,
    /// `(H⁻¹)_jj / M`: component `j` with the others unknown.
    Component(usize),
    /// `1/(M H_jj)`: component `j` with the others known.
    SingleParameter(usize),
    /// `((B H Bᵀ)⁻¹)_11 / M` for a function placed first in a new parameter set.
    Function(Jacobian),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CrBound {
    Matrix { m_copies: u32, cov: Mat3 },
    Scalar { m_copies: u32, var: f64 },
}

impl CrBound {
    pub fn scalar(&self) -> Option<f64> {
        match self {
            CrBound::Scalar { var, .. } => Some(*var),
            CrBound::Matrix { .. } => None,
        }
    }
}

/// Variance of component `j` from `H`, treating directions with no information as decoupled.
fn component_inverse(h: &Mat3, j: usize) -> f64 {
    if let Some(inv) = inverse3(h) {
        return inv[j][j];
    }
    let tiny = 1e-14 * h.iter().flatten().fold(0.0_f64, |m, x| m.max(x.abs()));
    if h[j][j] <= tiny {
        return f64::INFINITY;
    }
    let informative: Vec<usize> = (0..3).filter(|&i| h[i][i] > tiny).collect();
    match informative.len() {
        1 => 1.0 / h[j][j],
        2 => {
            let (a, b) = (informative[0], informative[1]);
            let det = h[a][a] * h[b][b] - h[a][b] * h[b][a];
            if det.abs() <= 1e-12 {
                f64::INFINITY
            } else if j == a {
                h[b][b] / det
            } else {
                h[a][a] / det
            }
        }
        _ => f64::INFINITY,
    }
}

pub fn cr_bound(h: &QfiMatrix, m_copies: u32, target: BoundTarget) -> Result<CrBound> {
    if m_copies == 0 {
        return Err(Error::OutOfDomain("number of copies must be positive".into()));
    }
    let m = m_copies as f64;
    let check_index = |j: usize| {
        if j > 2 {
            Err(Error::OutOfDomain(format!("parameter index {j} not in 0..3")))
        } else {
            Ok(())
        }
    };
    match target {
        BoundTarget::Matrix => {
            let inv = inverse3(&h.h).ok_or(Error::SingularFisher(h.determinant()))?;
            let mut cov = inv;
            cov.iter_mut().flatten().for_each(|x| *x /= m);
            Ok(CrBound::Matrix { m_copies, cov })
        }
        BoundTarget::Component(j) => {
            check_index(j)?;
            Ok(CrBound::Scalar {
                m_copies,
                var: component_inverse(&h.h, j) / m,
            })
        }
        BoundTarget::SingleParameter(j) => {
            check_index(j)?;
            let hjj = h.h[j][j];
            let var = if hjj > 0.0 { 1.0 / (m * hjj) } else { f64::INFINITY };
            Ok(CrBound::Scalar { m_copies, var })
        }
        BoundTarget::Function(jac) => {
            let ht = reparameterize(h, &jac)?;
            Ok(CrBound::Scalar {
                m_copies,
                var: component_inverse(&ht.h, 0) / m,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scatter::{
        apply_channel, channel_derivatives, direct_branch, BlockLabel, DetectionMode,
    };
    use crate::states::{bloch_to_density, BlochVector, ProbeConfig};

    #[test]
    fn direct_on_axis_matches_closed_form() {
        let (st, d) = direct_branch(&BlochVector::on_z(0.5).unwrap()).unwrap();
        let h = qfi_numeric(&st, &d, DEFAULT_EPS).unwrap();
        assert!((h.h[2][2] - 4.0 / 3.0).abs() < 1e-12);
        assert!((h.h[0][0] - 1.0).abs() < 1e-12);
        assert!(h.h[0][2].abs() < 1e-14);
        let single = qfi_single(&st, &d, 2, DEFAULT_EPS).unwrap();
        assert!((single - 4.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn zero_derivative_block_contributes_nothing() {
        let st = BranchState {
            blocks: vec![Block {
                label: BlockLabel::Target,
                op: CMatrix::identity(2).scale_re(0.5),
            }],
        };
        let zero = || {
            vec![Block {
                label: BlockLabel::Target,
                op: CMatrix::zeros(2, 2),
            }]
        };
        let d = BranchDerivatives {
            per_param: [zero(), zero(), zero()],
        };
        assert_eq!(qfi_numeric(&st, &d, DEFAULT_EPS).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn no_interaction_gives_no_information() {
        let rho = bloch_to_density(&BlochVector::on_z(0.0).unwrap()).unwrap();
        let probe = ProbeConfig::nea(0.0);
        let st = apply_channel(&rho, &probe, 1e-9, DetectionMode::Both).unwrap();
        let d = channel_derivatives(&probe, 1e-9, DetectionMode::Both).unwrap();
        assert!(qfi_single(&st, &d, 2, DEFAULT_EPS).unwrap() < 1e-15);
    }

    #[test]
    fn misaligned_labels_are_rejected() {
        let rho = bloch_to_density(&BlochVector::on_z(0.2).unwrap()).unwrap();
        let st = apply_channel(&rho, &ProbeConfig::ea(), 0.5, DetectionMode::Both).unwrap();
        let d = channel_derivatives(&ProbeConfig::ea(), 0.5, DetectionMode::Transmission).unwrap();
        assert!(matches!(
            qfi_numeric(&st, &d, DEFAULT_EPS),
            Err(Error::LabelMismatch(_))
        ));
        let d = channel_derivatives(&ProbeConfig::nea(0.1), 0.5, DetectionMode::Both).unwrap();
        assert!(qfi_numeric(&st, &d, DEFAULT_EPS).is_err());
    }

    #[test]
    fn negative_blocks_are_rejected() {
        let st = BranchState {
            blocks: vec![Block {
                label: BlockLabel::Target,
                op: CMatrix::diag(&[1.1, -0.1]),
            }],
        };
        let (_, d) = direct_branch(&BlochVector::on_z(0.0).unwrap()).unwrap();
        assert!(matches!(
            qfi_numeric(&st, &d, DEFAULT_EPS),
            Err(Error::NegativeEigenvalue(_))
        ));
    }

    #[test]
    fn reparameterize_examples() {
        let h = QfiMatrix::new(Basis::Cartesian, [[2.0, 0.3, 0.1], [0.3, 1.0, 0.2], [0.1, 0.2, 3.0]]);
        let same = reparameterize(&h, &Jacobian::identity(Basis::Cartesian)).unwrap();
        assert_eq!(same.h, h.h);
        let scaled = reparameterize(
            &h,
            &Jacobian {
                b: [[2.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
                target: Basis::Custom,
            },
        )
        .unwrap();
        assert!((scaled.h[0][0] - 8.0).abs() < 1e-15);
        assert!((scaled.h[0][1] - 0.6).abs() < 1e-15);
        assert!((scaled.h[1][1] - 1.0).abs() < 1e-15);

        let bad = Jacobian {
            b: [[f64::NAN, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            target: Basis::Custom,
        };
        assert!(reparameterize(&h, &bad).is_err());
    }

    #[test]
    fn direct_polar_is_diagonal() {
        let p = PolarCoords::new(0.6, 1.1, 2.3).unwrap();
        let v = crate::states::polar_to_bloch(&p);
        let (st, d) = direct_branch(&v).unwrap();
        let hp = reparameterize(&qfi_numeric(&st, &d, DEFAULT_EPS).unwrap(), &Jacobian::spherical(&p))
            .unwrap();
        let s2 = 1.1f64.sin().powi(2);
        let expect = QfiMatrix::diag(Basis::Polar, [1.0 / 0.64, 0.36, 0.36 * s2]);
        assert!(hp.max_abs_diff(&expect) < 1e-12);
        assert_eq!(hp.basis, Basis::Polar);
    }

    #[test]
    fn cr_bound_examples() {
        let h = QfiMatrix::diag(Basis::Cartesian, [4.0, 1.0, 1.0]);
        let b = cr_bound(&h, 1, BoundTarget::Component(0)).unwrap();
        assert!((b.scalar().unwrap() - 0.25).abs() < 1e-15);

        let direct = QfiMatrix::diag(Basis::Polar, [1.0 / 0.75, 0.25, 0.25]);
        let b = cr_bound(&direct, 10, BoundTarget::Component(0)).unwrap();
        assert!((b.scalar().unwrap() - 0.075).abs() < 1e-15);

        let singular = QfiMatrix::diag(Basis::Polar, [1.0, 0.0, 0.0]);
        assert!(matches!(
            cr_bound(&singular, 1, BoundTarget::Matrix),
            Err(Error::SingularFisher(_))
        ));
        let b = cr_bound(&singular, 2, BoundTarget::Component(0)).unwrap();
        assert!((b.scalar().unwrap() - 0.5).abs() < 1e-15);
        let b = cr_bound(&singular, 2, BoundTarget::Component(1)).unwrap();
        assert_eq!(b.scalar().unwrap(), f64::INFINITY);
        assert!(cr_bound(&h, 0, BoundTarget::Matrix).is_err());
        assert!(cr_bound(&h, 1, BoundTarget::Component(3)).is_err());
    }

    #[test]
    fn matrix_bound_inverts() {
        let h = QfiMatrix::new(Basis::Cartesian, [[2.0, 0.3, 0.1], [0.3, 1.0, 0.2], [0.1, 0.2, 3.0]]);
        let CrBound::Matrix { cov, .. } = cr_bound(&h, 4, BoundTarget::Matrix).unwrap() else {
            panic!("expected matrix bound");
        };
        for i in 0..3 {
            for j in 0..3 {
                let s: f64 = (0..3).map(|k| h.h[i][k] * cov[k][j]).sum::<f64>() * 4.0;
                assert!((s - if i == j { 1.0 } else { 0.0 }).abs() < 1e-13);
            }
        }
        let b = cr_bound(&h, 4, BoundTarget::Component(1)).unwrap();
        assert!((b.scalar().unwrap() - cov[1][1]).abs() < 1e-15);
        let b = cr_bound(&h, 4, BoundTarget::SingleParameter(1)).unwrap();
        assert!((b.scalar().unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn function_bound_through_jacobian() {
        // Purity P = (1 + r²)/2 in place of r: ∂r/∂P = 1/r.
        let r = 0.5;
        let h = QfiMatrix::diag(Basis::Polar, [1.0 / (1.0 - r * r), r * r, r * r]);
        let jac = Jacobian {
            b: [[1.0 / r, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            target: Basis::Custom,
        };
        let b = cr_bound(&h, 1, BoundTarget::Function(jac)).unwrap();
        assert!((b.scalar().unwrap() - r * r * (1.0 - r * r)).abs() < 1e-15);
    }
}
