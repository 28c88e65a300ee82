use std::f64::consts::LN_2;

use nalgebra::DMatrix;
use proptest::prelude::*;
use thermocap::channel::{apply_channel, squeezer_on_pairs};
use thermocap::perturbation::{certify_capacity, find_ns0, nc_residual, PerturbationMode};
use thermocap::symplectic::{beam_splitter, rotation, squeezer, trace_functional};
use thermocap::verify::{random_energy_constrained_cm, ProbeEnsemble, ProbeKind};
use thermocap::*;

fn ch(noise: f64) -> ThermalChannel {
    ThermalChannel::new(noise).unwrap()
}

fn probe(n: usize, e_bar: f64, seed: u64, index: usize, correlated: bool) -> CovMatrix {
    let mut e = ProbeEnsemble::new(n, e_bar, index + 1, seed).unwrap();
    if correlated {
        e.kind = ProbeKind::CorrelatedTwoMode;
    }
    random_energy_constrained_cm(&e, index).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn symplectic_spectrum_is_invariant(seed in 0u64..1000, theta in 0.0f64..6.3, s in 0.3f64..3.0, mix in 0.0f64..3.1) {
        let cm = probe(2, 1.7, seed, 0, false);
        let t = squeezer(2, 1, s) * rotation(2, 0, theta) * beam_splitter(2, 0, 1, mix);
        let a = cm.symplectic_eigenvalues().unwrap();
        let b = cm.transformed(&t).unwrap().symplectic_eigenvalues().unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-8 * x.max(1.0), "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn purification_is_pure(seed in 0u64..1000, n in 1usize..3, e_bar in 0.6f64..4.0) {
        let joint = purify(&probe(n, e_bar, seed, 1, true)).unwrap();
        for nu in joint.symplectic_eigenvalues().unwrap() {
            prop_assert!((nu - 1.0).abs() < 1e-6, "{nu}");
        }
        prop_assert!(joint.entropy().unwrap().abs() < 1e-5);
    }

    #[test]
    fn mutual_information_dominates(seed in 0u64..1000, n in 1usize..3, e_bar in 0.6f64..4.0, noise in 0.01f64..0.5) {
        let cm = probe(n, e_bar, seed, 2, false);
        let ci = coherent_information(&cm, &ch(noise)).unwrap();
        let mi = mutual_information(&cm, &ch(noise)).unwrap();
        prop_assert!(mi + 1e-9 >= ci);
        prop_assert!(mi >= -1e-9);
    }

    #[test]
    fn channel_composes_additively(ns in 0.0f64..5.0, n1 in 0.0f64..1.0, n2 in 0.0f64..1.0) {
        let cm = thermal_cm(ns, 1).unwrap();
        let once = apply_channel(&cm, &ch(n1 + n2)).unwrap();
        let twice = apply_channel(&apply_channel(&cm, &ch(n1)).unwrap(), &ch(n2)).unwrap();
        prop_assert!((once.gamma - twice.gamma).abs().max() < 1e-12);
    }

    #[test]
    fn thermal_joint_spectrum_matches_closed_form(ns in 0.01f64..50.0, noise in 0.01f64..1.0) {
        let joint = joint_after_channel(&thermal_cm(ns, 1).unwrap(), &ch(noise)).unwrap();
        let nus = joint.symplectic_eigenvalues().unwrap();
        let (a, b) = thermocap::channel::joint_symplectic_closed_form(ns, noise);
        prop_assert!((nus[0] - a).abs() < 1e-7 * a && (nus[1] - b).abs() < 1e-7 * a, "{nus:?} vs {a} {b}");
    }

    #[test]
    fn trace_functional_bounded_by_energy(seed in 0u64..1000, n in 1usize..4, e_bar in 0.5f64..5.0) {
        let t = trace_functional(&probe(n, e_bar, seed, 3, true)).unwrap();
        prop_assert!(t <= 2.0 * n as f64 * (4.0 * e_bar * e_bar - 1.0).max(0.0).sqrt() + 1e-9);
    }
}

/// Derivative along the mixture from the photon-number expectations of the
/// probe's joint state in the basis that diagonalizes the thermal one.
fn derivative_from_blocks(probe: &CovMatrix, ns: f64, noise: f64) -> f64 {
    let n = probe.n;
    let sd = squeeze_diagonalization(ns, noise).unwrap();
    let s = squeezer_on_pairs(n, sd.r);
    let rotate = |cm: &CovMatrix| -> DMatrix<f64> {
        let joint = joint_after_channel(cm, &ch(noise)).unwrap();
        &s * joint.gamma * s.transpose()
    };
    let (gp, g0) = (rotate(probe), rotate(&thermal_cm(ns, n).unwrap()));
    let m = 2 * n;
    let d_a = (gp.view((0, 0), (m, m)).trace() - g0.view((0, 0), (m, m)).trace()) / 4.0;
    let d_b = (gp.view((m, m), (m, m)).trace() - g0.view((m, m), (m, m)).trace()) / 4.0;
    (sd.v_a.ln() * d_a + sd.v_b.ln() * d_b) / LN_2
}

#[test]
fn directional_derivative_matches_number_expectations() {
    for (n, ns, noise) in [(1, 1.0, 0.1), (2, 2.0, 0.1), (2, 0.4, 0.3), (3, 1.5, 0.05)] {
        for index in 0..25 {
            let p = probe(n, ns + 0.5, 11, index, index % 2 == 1);
            let closed = directional_derivative(&p, ns, &ch(noise)).unwrap();
            let blocks = derivative_from_blocks(&p, ns, noise);
            assert!((closed - blocks).abs() < 1e-8 * closed.abs().max(1.0), "n={n} i={index}: {closed} vs {blocks}");
        }
    }
}

#[test]
fn directional_derivative_limits() {
    let err = directional_derivative(&thermal_cm(1.0, 1).unwrap(), 1.0, &ch(0.0)).unwrap_err();
    assert!(matches!(err, Error::Domain(_)));
    let d = directional_derivative(&CovMatrix::vacuum(1), 0.0, &ch(0.1));
    assert!(matches!(d, Err(Error::Domain(_))));
}

#[test]
fn coherent_information_approaches_capacity() {
    for noise in [0.05, 0.1, 0.2, 0.3] {
        let ci = coherent_information(&thermal_cm(1e4, 1).unwrap(), &ch(noise)).unwrap();
        assert!((ci - asymptotic_capacity(noise).unwrap()).abs() < 1e-3);
        assert!(ci < asymptotic_capacity(noise).unwrap());
    }
}

#[test]
fn identity_channel_coherent_information_is_input_entropy() {
    for ns in [0.1, 1.0, 7.0] {
        let ci = coherent_information(&thermal_cm(ns, 1).unwrap(), &ch(0.0)).unwrap();
        assert!((ci - g_entropy(ns).unwrap()).abs() < 1e-12);
    }
}

#[test]
fn mutual_information_below_capacity_at_sign_change() {
    for noise in [0.05, 0.1, 0.15] {
        let (residual, root) = nc_residual(noise, PerturbationMode::TwoMode).unwrap();
        assert!(residual < 0.0, "N={noise}: N_s0={} residual {residual}", root.ns0);
    }
}

#[test]
fn sign_change_structure() {
    for noise in [0.05, 0.1, 0.1756, 0.3] {
        let r = find_ns0(noise, PerturbationMode::TwoMode).unwrap();
        assert!(r.ns0 > 0.0 && r.ns0.is_finite());
        assert!(r.positive_below && r.negative_above && r.sign_changes == 1, "{r:?}");
    }
}

#[test]
fn certification_examples() {
    let c = certify_capacity(0.1).unwrap();
    assert!(c.certified && (c.capacity - 1.879233).abs() < 1e-6);
    assert!(!c.evidence.caveat.is_empty() && c.evidence.ns0.is_some());
    let c = certify_capacity(0.3).unwrap();
    assert!(!c.certified && (c.capacity - 0.2942706).abs() < 1e-6, "{c:?}");
    let c = certify_capacity(0.4).unwrap();
    assert!(c.certified && c.capacity == 0.0);
    assert!(certify_capacity(0.0).is_err());
}
