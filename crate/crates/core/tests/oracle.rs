use std::f64::consts::PI;

use proptest::prelude::*;
use proptest::strategy::Strategy as Strategy2;

use qscatter::closedform::{direct_cartesian, ea_cartesian, ea_polar, nea_qfi};
use qscatter::optimize::{ea_envelope, maximize_nea, nea_envelope, NeaGrid, DEFAULT_OMEGA_BRACKET};
use qscatter::qfi::{cr_bound, reparameterize, BoundTarget, Jacobian};
use qscatter::states::{bloch_to_polar, polar_to_bloch};
use qscatter::strategy::{nea_pair, numeric_cartesian, Strategy};
use qscatter::{BlochVector, DetectionMode, PolarCoords};

fn mode() -> impl Strategy2<Value = DetectionMode> {
    prop_oneof![
        Just(DetectionMode::Transmission),
        Just(DetectionMode::Reflection),
        Just(DetectionMode::Both)
    ]
}

fn ball(radius: f64) -> impl Strategy2<Value = BlochVector> {
    (0.0..radius, 0.0..PI, 0.0..2.0 * PI).prop_map(|(r, t, p)| polar_to_bloch(&PolarCoords::new(r, t, p).unwrap()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn ea_numeric_matches_cartesian_closed_form(v in ball(0.97), lw in (0.05f64).ln()..(20.0f64).ln(), m in mode()) {
        let omega = lw.exp();
        let n = numeric_cartesian(Strategy::Ea, &v, 0.0, omega, m).unwrap();
        let c = ea_cartesian(&v, omega, m).unwrap();
        prop_assert!(n.rel_diff(&c) < 1e-8, "{}", n.rel_diff(&c));
        prop_assert!(n.asymmetry() < 1e-14 * (1.0 + n.max_abs()));
    }

    #[test]
    fn ea_polar_form_is_diagonal(v in ball(0.97), lw in (0.05f64).ln()..(20.0f64).ln(), m in mode()) {
        let omega = lw.exp();
        let p = bloch_to_polar(&v);
        prop_assume!(p.r > 1e-3 && p.theta.sin() > 1e-3);
        let h = reparameterize(&ea_cartesian(&v, omega, m).unwrap(), &Jacobian::spherical(&p)).unwrap();
        let c = ea_polar(p.r, omega, m).unwrap().matrix(p.theta);
        prop_assert!(h.rel_diff(&c) < 1e-8);
    }

    #[test]
    fn nea_numeric_matches_closed_form(vz in -0.99f64..0.99, ta in 0.0..PI, lw in (0.05f64).ln()..(20.0f64).ln(), m in mode()) {
        let (n, c) = nea_pair(&BlochVector::on_z(vz).unwrap(), ta, lw.exp(), m).unwrap();
        prop_assert!((n - c).abs() <= 1e-8 * c.max(1e-300), "{n} vs {c}");
    }

    #[test]
    fn direct_numeric_matches_closed_form(v in ball(0.99)) {
        let n = numeric_cartesian(Strategy::Direct, &v, 0.0, 1.0, DetectionMode::Both).unwrap();
        prop_assert!(n.rel_diff(&direct_cartesian(&v).unwrap()) < 1e-8);
    }

    #[test]
    fn component_bound_not_below_single_parameter(v in ball(0.9), lw in (0.1f64).ln()..(5.0f64).ln(), m in mode(), j in 0usize..3) {
        let h = ea_cartesian(&v, lw.exp(), m).unwrap();
        let joint = cr_bound(&h, 3, BoundTarget::Component(j)).unwrap().scalar().unwrap();
        let single = cr_bound(&h, 3, BoundTarget::SingleParameter(j)).unwrap().scalar().unwrap();
        prop_assert!(joint >= single * (1.0 - 1e-12));
    }

    #[test]
    fn nea_even_under_mirroring(vz in -0.95f64..0.95, ta in 0.0..PI, lw in (0.05f64).ln()..(20.0f64).ln(), m in mode()) {
        let a = nea_qfi(vz, ta, lw.exp(), m).unwrap();
        let b = nea_qfi(-vz, PI - ta, lw.exp(), m).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1e-300));
    }
}

#[test]
fn envelopes_are_even_in_vz() {
    let vzs: Vec<f64> = (-8..=8).map(|k| 0.1 * k as f64).collect();
    for m in DetectionMode::ALL {
        let nea = nea_envelope(&vzs, DEFAULT_OMEGA_BRACKET, m, NeaGrid::default()).unwrap();
        let ea = ea_envelope(&vzs, DEFAULT_OMEGA_BRACKET, m).unwrap();
        for env in [&nea, &ea] {
            for (p, q) in env.iter().zip(env.iter().rev()) {
                assert!((p.best_qfi - q.best_qfi).abs() <= 1e-6, "{m} {} {}", p.v_z, q.v_z);
                assert!((p.omega_star - q.omega_star).abs() <= 1e-5);
            }
        }
    }
}

#[test]
fn nea_optimal_momentum_ordering() {
    // Transmission below both, both below reflection.
    for vz in [0.0, 0.3, 0.6, 0.9, 0.95] {
        let w = |m| {
            maximize_nea(vz, DEFAULT_OMEGA_BRACKET, m, NeaGrid::default())
                .unwrap()
                .get("omega")
                .unwrap()
        };
        let (t, r, b) = (
            w(DetectionMode::Transmission),
            w(DetectionMode::Reflection),
            w(DetectionMode::Both),
        );
        assert!(t <= b && b <= r, "v_z = {vz}: {t} {b} {r}");
    }
}

#[test]
fn nea_optima_at_mixed_target() {
    let expected = [
        (DetectionMode::Transmission, 0.6148, 0.30094),
        (DetectionMode::Reflection, 0.7598, 0.17863),
        (DetectionMode::Both, 0.6700, 0.47521),
    ];
    for (m, omega, h) in expected {
        let r = maximize_nea(0.0, DEFAULT_OMEGA_BRACKET, m, NeaGrid::default()).unwrap();
        assert!((r.get("theta_a").unwrap() - PI / 2.0).abs() < 1e-4, "{m}");
        assert!((r.get("omega").unwrap() - omega).abs() < 1e-3, "{m}");
        assert!((r.value - h).abs() < 1e-4, "{m}");
    }
}
