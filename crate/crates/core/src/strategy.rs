//! Estimation strategies end to end: target in, Fisher matrix out, computed
//! either from the scattered states or from the closed forms.

use std::fmt;
use std::str::FromStr;

use crate::closedform::{direct_cartesian, direct_qfi, ea_cartesian, ea_polar, nea_qfi};
use crate::error::{check_omega, Error, Result};
use crate::qfi::{qfi_numeric, qfi_single, reparameterize, Basis, Jacobian, QfiMatrix, DEFAULT_EPS};
use crate::scatter::{apply_channel, channel_derivatives, direct_branch, DetectionMode};
use crate::states::{bloch_to_density, polar_to_bloch, BlochVector, PolarCoords, ProbeConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Strategy {
    /// Measure the target itself.
    Direct,
    /// Pure probe, no ancilla.
    Nea,
    /// Probe maximally entangled with an ancilla.
    Ea,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::Direct, Strategy::Nea, Strategy::Ea];

    pub fn as_str(&self) -> &'static str {
        match self {
            Strategy::Direct => "direct",
            Strategy::Nea => "nea",
            Strategy::Ea => "ea",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "direct" | "dir" => Ok(Strategy::Direct),
            "nea" => Ok(Strategy::Nea),
            "ea" => Ok(Strategy::Ea),
            other => Err(Error::OutOfDomain(format!("unknown strategy '{other}'"))),
        }
    }
}

/// Target given either way; polar input keeps its angles even at `r = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Target {
    Cartesian(BlochVector),
    Polar(PolarCoords),
}

impl Target {
    pub fn bloch(&self) -> BlochVector {
        match self {
            Target::Cartesian(v) => *v,
            Target::Polar(p) => polar_to_bloch(p),
        }
    }

    pub fn polar(&self) -> PolarCoords {
        match self {
            Target::Cartesian(v) => crate::states::bloch_to_polar(v),
            Target::Polar(p) => *p,
        }
    }
}

fn on_z_axis(v: &BlochVector) -> Result<f64> {
    if v.x != 0.0 || v.y != 0.0 {
        return Err(Error::OutOfDomain(
            "NEA information is defined for targets on the z axis".into(),
        ));
    }
    Ok(v.z)
}

/// Cartesian Fisher matrix from the branch states.
pub fn numeric_cartesian(
    strategy: Strategy,
    v: &BlochVector,
    theta_a: f64,
    omega: f64,
    mode: DetectionMode,
) -> Result<QfiMatrix> {
    match strategy {
        Strategy::Direct => {
            let (state, derivs) = direct_branch(v)?;
            qfi_numeric(&state, &derivs, DEFAULT_EPS)
        }
        Strategy::Nea | Strategy::Ea => {
            check_omega(omega)?;
            let probe = match strategy {
                Strategy::Nea => ProbeConfig::nea(theta_a),
                _ => ProbeConfig::ea(),
            };
            let state = apply_channel(&bloch_to_density(v)?, &probe, omega, mode)?;
            let derivs = channel_derivatives(&probe, omega, mode)?;
            qfi_numeric(&state, &derivs, DEFAULT_EPS)
        }
    }
}

/// Cartesian Fisher matrix from the closed forms (direct and EA only).
pub fn closed_cartesian(
    strategy: Strategy,
    v: &BlochVector,
    omega: f64,
    mode: DetectionMode,
) -> Result<QfiMatrix> {
    match strategy {
        Strategy::Direct => direct_cartesian(v),
        Strategy::Ea => ea_cartesian(v, omega, mode),
        Strategy::Nea => Err(Error::OutOfDomain(
            "NEA has a closed form for the z component only".into(),
        )),
    }
}

/// Fisher matrix in the requested basis from the branch states.
pub fn numeric_qfi(
    strategy: Strategy,
    target: &Target,
    theta_a: f64,
    omega: f64,
    mode: DetectionMode,
    basis: Basis,
) -> Result<QfiMatrix> {
    let h = numeric_cartesian(strategy, &target.bloch(), theta_a, omega, mode)?;
    match basis {
        Basis::Cartesian => Ok(h),
        Basis::Polar => reparameterize(&h, &Jacobian::spherical(&target.polar())),
        Basis::Custom => Err(Error::OutOfDomain("custom basis needs an explicit Jacobian".into())),
    }
}

/// Fisher matrix in the requested basis from the closed forms.
pub fn closed_qfi(
    strategy: Strategy,
    target: &Target,
    omega: f64,
    mode: DetectionMode,
    basis: Basis,
) -> Result<QfiMatrix> {
    match basis {
        Basis::Cartesian => closed_cartesian(strategy, &target.bloch(), omega, mode),
        Basis::Polar => {
            let p = target.polar();
            match strategy {
                Strategy::Direct => {
                    if p.r >= 1.0 {
                        return Err(Error::OutOfDomain("r must be < 1".into()));
                    }
                    Ok(direct_qfi(p.r, p.theta)?.matrix(p.theta))
                }
                Strategy::Ea => {
                    if p.r >= 1.0 {
                        return Err(Error::OutOfDomain("r must be < 1".into()));
                    }
                    Ok(ea_polar(p.r, omega, mode)?.matrix(p.theta))
                }
                Strategy::Nea => closed_cartesian(strategy, &target.bloch(), omega, mode),
            }
        }
        Basis::Custom => Err(Error::OutOfDomain("custom basis needs an explicit Jacobian".into())),
    }
}

/// NEA information on `v_z` for a target on the z axis: `(numeric, closed form)`.
pub fn nea_pair(v: &BlochVector, theta_a: f64, omega: f64, mode: DetectionMode) -> Result<(f64, f64)> {
    let v_z = on_z_axis(v)?;
    let closed = nea_qfi(v_z, theta_a, omega, mode)?;
    let probe = ProbeConfig::nea(theta_a);
    let state = apply_channel(&bloch_to_density(v)?, &probe, omega, mode)?;
    let derivs = channel_derivatives(&probe, omega, mode)?;
    let numeric = qfi_single(&state, &derivs, 2, DEFAULT_EPS)?;
    Ok((numeric, closed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_strategies() {
        for s in Strategy::ALL {
            assert_eq!(s.as_str().parse::<Strategy>().unwrap(), s);
        }
        assert!("indirect".parse::<Strategy>().is_err());
    }

    #[test]
    fn direct_at_center_in_polar() {
        let t = Target::Polar(PolarCoords::new(0.0, 1.0, 0.0).unwrap());
        let h = numeric_qfi(Strategy::Direct, &t, 0.0, 1.0, DetectionMode::Both, Basis::Polar).unwrap();
        let c = closed_qfi(Strategy::Direct, &t, 1.0, DetectionMode::Both, Basis::Polar).unwrap();
        let expected = QfiMatrix::diag(Basis::Polar, [1.0, 0.0, 0.0]);
        assert!(h.max_abs_diff(&expected) < 1e-12);
        assert!(c.max_abs_diff(&expected) < 1e-12);
    }

    #[test]
    fn ea_numeric_matches_closed_in_both_bases() {
        let t = Target::Polar(PolarCoords::new(0.55, 0.9, 2.1).unwrap());
        for mode in DetectionMode::ALL {
            for basis in [Basis::Cartesian, Basis::Polar] {
                let n = numeric_qfi(Strategy::Ea, &t, 0.0, 0.7, mode, basis).unwrap();
                let c = closed_qfi(Strategy::Ea, &t, 0.7, mode, basis).unwrap();
                assert!(n.rel_diff(&c) < 1e-9, "{mode} {basis:?}");
            }
        }
    }

    #[test]
    fn nea_pair_agrees_and_needs_axis() {
        let v = BlochVector::on_z(0.35).unwrap();
        for mode in DetectionMode::ALL {
            let (n, c) = nea_pair(&v, 0.8, 0.6, mode).unwrap();
            assert!((n - c).abs() < 1e-10 * c);
        }
        let off = BlochVector::new(0.1, 0.0, 0.3).unwrap();
        assert!(nea_pair(&off, 0.8, 0.6, DetectionMode::Both).is_err());
        assert!(closed_cartesian(Strategy::Nea, &v, 0.6, DetectionMode::Both).is_err());
    }
}
