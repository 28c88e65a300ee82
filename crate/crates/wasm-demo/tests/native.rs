use thermocap_wasm::*;

#[test]
fn ci_curve_layout_and_limits() {
    let v = ci_curve_values(0.1, 0.01, 1e4, 30).unwrap();
    assert_eq!(v.len(), 90);
    for row in v.chunks(3) {
        assert!(row[2] >= row[1]);
    }
    assert_eq!(v[87], 1e4);
    assert!((v[88] - asymptote(0.1)).abs() < 1e-3);
    assert!(ci_curve_values(-0.1, 0.01, 1.0, 5).is_err());
    assert!(ci_curve_values(0.1, 1.0, 0.5, 5).is_err());
}

#[test]
fn capacity_curve_hits_zero_at_inverse_e() {
    let v = capacity_values(0.5, 50).unwrap();
    assert_eq!(v.len(), 100);
    for row in v.chunks(2) {
        let expected = if row[0] * std::f64::consts::E >= 1.0 { 0.0 } else { asymptote(row[0]) };
        assert!((row[1] - expected).abs() < 1e-12);
    }
    assert!(capacity_values(0.5, 1).is_err());
    let nc = critical_noise().unwrap();
    assert!(nc > 0.0 && nc < 1.0 / std::f64::consts::E);
}

#[test]
fn scan_changes_sign_once() {
    let v = delta_ci_values(0.1, true, 1e-3, 1e3, 100).unwrap();
    let signs: Vec<bool> = v.chunks(2).map(|r| r[1] > 0.0).collect();
    assert_eq!(signs.windows(2).filter(|w| w[0] != w[1]).count(), 1);
    let root = sign_change(0.1, true);
    assert!((root - 0.0114225).abs() < 1e-6);
    assert!(sign_change(0.5, true).is_nan());
}
