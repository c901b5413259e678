//! Spin-dependent scattering of the probe off the target and the resulting
//! branch states.
//!
//! A branch state is stored as a list of mutually orthogonal blocks: the spin
//! state of the probe (and ancilla) in each detected arm, plus a "vacuum"
//! block for the arm that is not monitored. Orthogonality of the blocks makes
//! the Fisher information additive over them, so no explicit qutrit embedding
//! is needed.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{check_omega, Error, Result};
use crate::linalg::{partial_trace, pauli, tensor, CMatrix, ONE};
use crate::states::{bloch_to_density, probe_state, BlochVector, ProbeConfig};

/// Transmission/reflection amplitudes at dimensionless coupling `Ω = mg/ħ|k|`.
///
/// The spin-space S-matrices are `S^{t,r} = α_{t,r} + β_{t,r} σ_X·σ_A`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScatteringAmplitudes {
    pub omega: f64,
    pub alpha_t: Complex64,
    pub beta_t: Complex64,
    pub alpha_r: Complex64,
    pub beta_r: Complex64,
}

impl ScatteringAmplitudes {
    /// Eigenvalues of `(S^t, S^r)` on the triplet (σ·σ = 1) and singlet (σ·σ = −3) sectors.
    pub fn sector_eigenvalues(&self) -> [(Complex64, Complex64); 2] {
        [
            (self.alpha_t + self.beta_t, self.alpha_r + self.beta_r),
            (
                self.alpha_t - self.beta_t * 3.0,
                self.alpha_r - self.beta_r * 3.0,
            ),
        ]
    }
}

pub fn amplitudes(omega: f64) -> Result<ScatteringAmplitudes> {
    check_omega(omega)?;
    let i_omega = Complex64::new(0.0, omega);
    let denom = (ONE - i_omega * 3.0) * (ONE + i_omega);
    let beta = -i_omega / denom;
    Ok(ScatteringAmplitudes {
        omega,
        alpha_t: (ONE - i_omega * 2.0) / denom,
        beta_t: beta,
        alpha_r: Complex64::new(-3.0 * omega * omega, 0.0) / denom,
        beta_r: beta,
    })
}

/// Which scattered arms the observer records.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DetectionMode {
    Transmission,
    Reflection,
    Both,
}

impl DetectionMode {
    pub const ALL: [DetectionMode; 3] = [
        DetectionMode::Transmission,
        DetectionMode::Reflection,
        DetectionMode::Both,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            DetectionMode::Transmission => "transmission",
            DetectionMode::Reflection => "reflection",
            DetectionMode::Both => "both",
        }
    }
}

impl fmt::Display for DetectionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DetectionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "t" | "transmission" => Ok(DetectionMode::Transmission),
            "r" | "reflection" => Ok(DetectionMode::Reflection),
            "b" | "both" | "t+r" => Ok(DetectionMode::Both),
            other => Err(Error::OutOfDomain(format!("unknown detection mode '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BlockLabel {
    TransmittedSpin,
    ReflectedSpin,
    /// Nothing reached the right-hand detector (probe was reflected).
    VacuumRhs,
    /// Nothing reached the left-hand detector (probe was transmitted).
    VacuumLhs,
    /// The bare target state, for direct estimation.
    Target,
}

#[derive(Clone, Debug)]
pub struct Block {
    pub label: BlockLabel,
    pub op: CMatrix,
}

/// Post-scattering state as orthogonal positive blocks with unit total trace.
#[derive(Clone, Debug)]
pub struct BranchState {
    pub blocks: Vec<Block>,
}

impl BranchState {
    pub fn total_trace(&self) -> f64 {
        self.blocks.iter().map(|b| b.op.trace().re).sum()
    }

    pub fn block(&self, label: BlockLabel) -> Option<&CMatrix> {
        self.blocks.iter().find(|b| b.label == label).map(|b| &b.op)
    }
}

/// `∂ρ/∂v_j` for each Cartesian component, blockwise and aligned with a [`BranchState`].
#[derive(Clone, Debug)]
pub struct BranchDerivatives {
    pub per_param: [Vec<Block>; 3],
}

/// Swap operator on X ⊗ A.
pub fn swap_operator() -> CMatrix {
    let mut s = CMatrix::zeros(4, 4);
    for i in 0..2 {
        for j in 0..2 {
            s[(2 * i + j, 2 * j + i)] = ONE;
        }
    }
    s
}

/// `σ_X·σ_A` on X ⊗ A.
pub fn heisenberg_coupling() -> CMatrix {
    pauli()
        .iter()
        .map(|s| tensor(s, s))
        .reduce(|a, b| &a + &b)
        .expect("three Pauli matrices")
}

/// `(S^t, S^r)` on X ⊗ A.
pub fn s_matrices(omega: f64) -> Result<(CMatrix, CMatrix)> {
    let amp = amplitudes(omega)?;
    let coupling = heisenberg_coupling();
    let id = CMatrix::identity(4);
    let st = &id.scale(amp.alpha_t) + &coupling.scale(amp.beta_t);
    let sr = &id.scale(amp.alpha_r) + &coupling.scale(amp.beta_r);
    Ok((st, sr))
}

/// Largest entry of `S^t†S^t + S^r†S^r − 𝟙` and `S^t†S^r + S^r†S^t`.
pub fn unitarity_residual(omega: f64) -> Result<f64> {
    let (st, sr) = s_matrices(omega)?;
    let (std, srd) = (st.adjoint(), sr.adjoint());
    let norm = &(&(&std * &st) + &(&srd * &sr)) - &CMatrix::identity(4);
    let cross = &(&std * &sr) + &(&srd * &st);
    Ok(norm.max_abs().max(cross.max_abs()))
}

/// The linear block maps `ρ_X ↦ blocks` for a fixed probe input.
struct ChannelMaps {
    st: CMatrix,
    sr: CMatrix,
    rho_in: CMatrix,
    entangled: bool,
    mode: DetectionMode,
}

impl ChannelMaps {
    fn new(rho_in: &CMatrix, omega: f64, mode: DetectionMode) -> Result<Self> {
        let entangled = match (rho_in.rows(), rho_in.cols()) {
            (2, 2) => false,
            (4, 4) => true,
            (r, c) => {
                return Err(Error::DimensionMismatch(format!(
                    "probe input must be 2x2 or 4x4, got {r}x{c}"
                )))
            }
        };
        let (mut st, mut sr) = s_matrices(omega)?;
        if entangled {
            let id_b = CMatrix::identity(2);
            st = tensor(&st, &id_b);
            sr = tensor(&sr, &id_b);
        }
        Ok(Self {
            st,
            sr,
            rho_in: rho_in.clone(),
            entangled,
            mode,
        })
    }

    fn spin_dims(&self) -> (&'static [usize], &'static [usize]) {
        if self.entangled {
            (&[2, 2, 2], &[1, 2])
        } else {
            (&[2, 2], &[1])
        }
    }

    /// `Tr_X[S (x ⊗ ρ_in) S†]`.
    fn spin_block(&self, s: &CMatrix, x: &CMatrix) -> CMatrix {
        let (dims, keep) = self.spin_dims();
        let full = s.conjugate(&tensor(x, &self.rho_in));
        partial_trace(&full, dims, keep).expect("consistent dims")
    }

    /// Vacuum block: what remains of an unobserved arm. A scalar for a lone
    /// probe; the ancilla's reduced operator when the ancilla is kept.
    fn vacuum_block(&self, spin: &CMatrix) -> CMatrix {
        if self.entangled {
            partial_trace(spin, &[2, 2], &[1]).expect("consistent dims")
        } else {
            let mut m = CMatrix::zeros(1, 1);
            m[(0, 0)] = spin.trace();
            m
        }
    }

    fn apply(&self, x: &CMatrix) -> Vec<Block> {
        let t = self.spin_block(&self.st, x);
        let r = self.spin_block(&self.sr, x);
        match self.mode {
            DetectionMode::Both => vec![
                Block {
                    label: BlockLabel::TransmittedSpin,
                    op: t,
                },
                Block {
                    label: BlockLabel::ReflectedSpin,
                    op: r,
                },
            ],
            DetectionMode::Transmission => vec![
                Block {
                    label: BlockLabel::VacuumRhs,
                    op: self.vacuum_block(&r),
                },
                Block {
                    label: BlockLabel::TransmittedSpin,
                    op: t,
                },
            ],
            DetectionMode::Reflection => vec![
                Block {
                    label: BlockLabel::VacuumLhs,
                    op: self.vacuum_block(&t),
                },
                Block {
                    label: BlockLabel::ReflectedSpin,
                    op: r,
                },
            ],
        }
    }
}

/// Scatters the probe prepared per `probe` off the target `rho_x`.
pub fn apply_channel(
    rho_x: &CMatrix,
    probe: &ProbeConfig,
    omega: f64,
    mode: DetectionMode,
) -> Result<BranchState> {
    apply_channel_to(rho_x, &probe_state(probe), omega, mode)
}

/// As [`apply_channel`] with an explicit probe input: 2×2 on A, or 4×4 on A ⊗ B.
pub fn apply_channel_to(
    rho_x: &CMatrix,
    rho_in: &CMatrix,
    omega: f64,
    mode: DetectionMode,
) -> Result<BranchState> {
    if rho_x.rows() != 2 || rho_x.cols() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "target state must be 2x2, got {}x{}",
            rho_x.rows(),
            rho_x.cols()
        )));
    }
    let maps = ChannelMaps::new(rho_in, omega, mode)?;
    Ok(BranchState {
        blocks: maps.apply(rho_x),
    })
}

/// Exact `∂/∂v_j` of the branch blocks. The channel is affine in `v` with
/// `∂ρ_X/∂v_j = σ^j/2`, so the result does not depend on `v`.
pub fn channel_derivatives(
    probe: &ProbeConfig,
    omega: f64,
    mode: DetectionMode,
) -> Result<BranchDerivatives> {
    channel_derivatives_for(&probe_state(probe), omega, mode)
}

pub fn channel_derivatives_for(
    rho_in: &CMatrix,
    omega: f64,
    mode: DetectionMode,
) -> Result<BranchDerivatives> {
    let maps = ChannelMaps::new(rho_in, omega, mode)?;
    let [sx, sy, sz] = pauli();
    Ok(BranchDerivatives {
        per_param: [
            maps.apply(&sx.scale_re(0.5)),
            maps.apply(&sy.scale_re(0.5)),
            maps.apply(&sz.scale_re(0.5)),
        ],
    })
}

/// Direct access to the target: the encoding state is `ρ_X(v)` itself.
pub fn direct_branch(v: &BlochVector) -> Result<(BranchState, BranchDerivatives)> {
    let rho = bloch_to_density(v)?;
    let derivs = pauli().map(|s| {
        vec![Block {
            label: BlockLabel::Target,
            op: s.scale_re(0.5),
        }]
    });
    Ok((
        BranchState {
            blocks: vec![Block {
                label: BlockLabel::Target,
                op: rho,
            }],
        },
        BranchDerivatives { per_param: derivs },
    ))
}
