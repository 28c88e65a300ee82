//! Browser demo: coherent-information curves, the capacity formula and the
//! perturbative sign change, exported as flat `Float64Array`s.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::f64::consts::E;

use thermocap::perturbation::{cached_nc, delta_ci, find_ns0, PerturbationMode};
use thermocap::roots::{linear_grid, log_grid};
use thermocap::{asymptotic_capacity, coherent_information, mutual_information, thermal_cm, Error, Result, ThermalChannel};
use wasm_bindgen::prelude::*;

fn check_points(points: usize) -> Result<()> {
    if !(2..=2000).contains(&points) {
        return Err(Error::InvalidInput(format!("need 2 to 2000 points, got {points}")));
    }
    Ok(())
}

fn log_range(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    check_points(points)?;
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::InvalidInput(format!("need 0 < lo < hi, got [{lo}, {hi}]")));
    }
    Ok(log_grid(lo, hi, points))
}

fn mode(two_mode: bool) -> PerturbationMode {
    if two_mode {
        PerturbationMode::TwoMode
    } else {
        PerturbationMode::Single
    }
}

/// `[N_s, I_c, MI, ...]` in bits over a log grid of `N_s`.
pub fn ci_curve_values(noise: f64, ns_lo: f64, ns_hi: f64, points: usize) -> Result<Vec<f64>> {
    let ch = ThermalChannel::new(noise)?;
    let mut out = Vec::with_capacity(3 * points);
    for ns in log_range(ns_lo, ns_hi, points)? {
        let cm = thermal_cm(ns, 1)?;
        out.extend([ns, coherent_information(&cm, &ch)?, mutual_information(&cm, &ch)?]);
    }
    Ok(out)
}

/// `[N, Q, ...]` over `(0, n_max]`; the first point sits at `n_max/points`.
pub fn capacity_values(n_max: f64, points: usize) -> Result<Vec<f64>> {
    check_points(points)?;
    if !(n_max > 0.0 && n_max.is_finite()) {
        return Err(Error::InvalidInput(format!("need a positive noise range, got {n_max}")));
    }
    let mut out = Vec::with_capacity(2 * points);
    for n in linear_grid(n_max / points as f64, n_max, points) {
        out.extend([n, asymptotic_capacity(n)?]);
    }
    Ok(out)
}

/// `[N_s, ΔI_c, ...]` per `ε²` in nats over a log grid of `N_s`.
pub fn delta_ci_values(noise: f64, two_mode: bool, ns_lo: f64, ns_hi: f64, points: usize) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(2 * points);
    for ns in log_range(ns_lo, ns_hi, points)? {
        out.extend([ns, delta_ci(mode(two_mode), ns, noise)?]);
    }
    Ok(out)
}

fn js(e: Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen]
pub fn ci_curve(noise: f64, ns_lo: f64, ns_hi: f64, points: usize) -> std::result::Result<Vec<f64>, JsError> {
    ci_curve_values(noise, ns_lo, ns_hi, points).map_err(js)
}

#[wasm_bindgen]
pub fn capacity_curve(n_max: f64, points: usize) -> std::result::Result<Vec<f64>, JsError> {
    capacity_values(n_max, points).map_err(js)
}

#[wasm_bindgen]
pub fn delta_ci_scan(noise: f64, two_mode: bool, ns_lo: f64, ns_hi: f64, points: usize) -> std::result::Result<Vec<f64>, JsError> {
    delta_ci_values(noise, two_mode, ns_lo, ns_hi, points).map_err(js)
}

/// `−log₂(eN)`.
#[wasm_bindgen]
pub fn asymptote(noise: f64) -> f64 {
    -(E * noise).log2()
}

/// Critical noise of the certification, computed once.
#[wasm_bindgen]
pub fn critical_noise() -> std::result::Result<f64, JsError> {
    cached_nc().map(|s| s.nc).map_err(js)
}

/// Sign change `N_s0` of `ΔI_c`, or NaN when there is none.
#[wasm_bindgen]
pub fn sign_change(noise: f64, two_mode: bool) -> f64 {
    find_ns0(noise, mode(two_mode)).map(|r| r.ns0).unwrap_or(f64::NAN)
}
