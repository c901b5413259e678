use qscatter_web::{ea_curve_values, nea_landscape_values, qfi_matrix_values};

#[test]
fn ea_curve_peaks_at_known_momentum() {
    let v = ea_curve_values(0.0, "both", 0.05, 10.0, 300).unwrap();
    assert_eq!(v.len(), 602);
    let (w, q) = (v[600], v[601]);
    assert!((w - 0.616).abs() < 0.005);
    assert!((1.0 / q - 1.52).abs() < 0.01);
    let grid_max = v[..600].chunks(2).map(|p| p[1]).fold(0.0, f64::max);
    assert!(grid_max <= q * (1.0 + 1e-12));
}

#[test]
fn ea_curve_rejects_bad_input() {
    assert!(ea_curve_values(0.3, "sideways", 0.05, 10.0, 10).is_err());
    assert!(ea_curve_values(0.3, "t", 0.0, 10.0, 10).is_err());
    assert!(ea_curve_values(0.3, "t", 0.05, 10.0, 1).is_err());
    assert!(ea_curve_values(1.2, "t", 0.05, 10.0, 10).is_err());
}

#[test]
fn landscape_shape_and_optimum() {
    let (nt, nw) = (31, 40);
    let v = nea_landscape_values(0.0, "t", nt, nw).unwrap();
    assert_eq!(v.len(), nt * nw + 3);
    let (theta, omega, h) = (v[nt * nw], v[nt * nw + 1], v[nt * nw + 2]);
    assert!((theta - std::f64::consts::FRAC_PI_2).abs() < 1e-4);
    assert!((omega - 0.6148).abs() < 1e-3);
    assert!((h - 0.30094).abs() < 1e-4);
    assert!(v[..nt * nw].iter().all(|&x| x >= 0.0 && x <= h * (1.0 + 1e-12)));
    assert!(nea_landscape_values(1.0, "t", nt, nw).is_err());
}

#[test]
fn matrix_numeric_and_closed_agree() {
    let v = qfi_matrix_values("ea", "r", 0.1, -0.4, 0.2, 0.8, 0.0).unwrap();
    assert_eq!(v.len(), 18);
    for k in 0..9 {
        assert!((v[k] - v[k + 9]).abs() < 1e-10);
    }
    let d = qfi_matrix_values("direct", "both", 0.0, 0.0, 0.0, 1.0, 0.0).unwrap();
    assert_eq!(&d[9..], &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
    let n = qfi_matrix_values("nea", "t", 0.0, 0.0, 0.5, 0.6, 0.7).unwrap();
    assert!(n[0].is_nan() && (n[8] - n[17]).abs() < 1e-10);
    assert!(qfi_matrix_values("nea", "t", 0.3, 0.0, 0.5, 0.6, 0.7).is_err());
    assert!(qfi_matrix_values("ea", "t", 0.0, 0.0, 0.5, -1.0, 0.0).is_err());
}
