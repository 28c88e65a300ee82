//! Capacity, coherent-information curves, the critical noise and single-CM
//! evaluation.

use std::f64::consts::E;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;
use thermocap::channel::apply_channel;
use thermocap::io::cm_from_json;
use thermocap::perturbation::{certify_capacity, solve_nc, PerturbationMode, CAVEAT};
use thermocap::{asymptotic_capacity, coherent_information, joint_after_channel, mutual_information, thermal_cm, ThermalChannel};

use crate::config::{parse_grid, Failure};
use crate::emit::{num, opt, Report};
use crate::{Common, Format};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Single,
    TwoMode,
}

impl From<Mode> for PerturbationMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Single => PerturbationMode::Single,
            Mode::TwoMode => PerturbationMode::TwoMode,
        }
    }
}

#[derive(Args, Debug, Serialize, Deserialize)]
pub struct CapacityArgs {
    /// Single noise level.
    #[arg(long, conflicts_with = "grid")]
    pub noise: Option<f64>,
    /// Noise grid, `start:stop:step` or `log:lo:hi:count`.
    #[arg(long)]
    pub grid: Option<String>,
}

const CAPACITY_GRID: &str = "0:0.4:0.01";

fn noise_grid(noise: Option<f64>, grid: Option<&str>) -> Result<Vec<f64>, Failure> {
    let mut values = match (noise, grid) {
        (Some(_), Some(_)) => return Err(Failure::Usage("give either --noise or --grid, not both".into())),
        (Some(n), None) => vec![n],
        (None, g) => parse_grid(g.unwrap_or(CAPACITY_GRID))?,
    };
    if let Some(bad) = values.iter().find(|n| !(**n >= 0.0) || !n.is_finite()) {
        return Err(Failure::Usage(format!("noise must be finite and non-negative, got {bad}")));
    }
    values.sort_by(f64::total_cmp);
    values.dedup();
    Ok(values)
}

struct CapacityRow {
    noise: f64,
    capacity: f64,
    certified: bool,
    ns0: Option<f64>,
    mi: Option<f64>,
}

pub fn capacity(args: CapacityArgs, common: &Common) -> Result<(), Failure> {
    let grid = noise_grid(args.noise, args.grid.as_deref())?;
    let rows = grid
        .par_iter()
        .map(|&noise| {
            if noise == 0.0 {
                return Ok(CapacityRow { noise, capacity: asymptotic_capacity(0.0)?, certified: true, ns0: None, mi: None });
            }
            let c = certify_capacity(noise)?;
            Ok(CapacityRow { noise, capacity: c.capacity, certified: c.certified, ns0: c.evidence.ns0, mi: c.evidence.mutual_information })
        })
        .collect::<Result<Vec<_>, thermocap::Error>>()?;
    let nc = thermocap::perturbation::cached_nc()?;
    let mut r = Report::new("capacity", json!({ "noise": grid, "nc_mode": Mode::TwoMode }), true);
    r.header = vec!["noise", "capacity", "unbounded", "certified", "ns0", "mi_bound"];
    for row in &rows {
        r.rows.push(vec![
            num(row.noise),
            num(row.capacity),
            row.capacity.is_infinite().to_string(),
            row.certified.to_string(),
            opt(row.ns0),
            opt(row.mi),
        ]);
    }
    let json_rows: Vec<_> = rows
        .iter()
        .map(|row| {
            json!({
                "noise": row.noise,
                "capacity": row.capacity.is_finite().then_some(row.capacity),
                "unbounded": row.capacity.is_infinite(),
                "certified": row.certified,
                "ns0": row.ns0,
                "mi_bound": row.mi,
            })
        })
        .collect();
    r.set("rows", json_rows);
    r.set("nc", nc.nc);
    r.set("caveat", CAVEAT);
    r.emit(common, Format::Csv)
}

#[derive(Args, Debug, Serialize, Deserialize)]
pub struct CiCurveArgs {
    /// Noise levels, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub noise: Option<Vec<f64>>,
    /// Input photon-number grid, `start:stop:step` or `log:lo:hi:count`.
    #[arg(long)]
    pub ns_grid: Option<String>,
}

const NS_GRID: &str = "log:0.01:10000:61";

pub fn ci_curve(args: CiCurveArgs, common: &Common) -> Result<(), Failure> {
    let noise = args.noise.unwrap_or_else(|| vec![0.05, 0.1, 0.2]);
    let spec = args.ns_grid.unwrap_or_else(|| NS_GRID.to_string());
    let ns = parse_grid(&spec)?;
    if noise.is_empty() {
        return Err(Failure::Usage("--noise needs at least one value".into()));
    }
    let points: Vec<(f64, f64)> = noise.iter().flat_map(|&n| ns.iter().map(move |&s| (n, s))).collect();
    let values = points
        .par_iter()
        .map(|&(n, s)| {
            let ch = ThermalChannel::new(n)?;
            let cm = thermal_cm(s, 1)?;
            Ok((coherent_information(&cm, &ch)?, mutual_information(&cm, &ch)?))
        })
        .collect::<Result<Vec<_>, thermocap::Error>>()?;
    let mut r = Report::new("ci-curve", json!({ "noise": noise, "ns_grid": spec }), true);
    r.header = vec!["noise", "ns", "ci", "mi", "asymptote"];
    let mut json_rows = Vec::with_capacity(points.len());
    for (&(n, s), &(ci, mi)) in points.iter().zip(&values) {
        let asymptote = -(E * n).log2();
        r.rows.push(vec![num(n), num(s), num(ci), num(mi), num(asymptote)]);
        json_rows.push(json!({ "noise": n, "ns": s, "ci": ci, "mi": mi, "asymptote": asymptote.is_finite().then_some(asymptote) }));
    }
    r.set("rows", json_rows);
    r.emit(common, Format::Csv)
}

#[derive(Args, Debug, Serialize, Deserialize)]
pub struct NcArgs {
    /// Perturbation whose sign change defines `N_s0`.
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    /// Largest accepted residual of the defining equation (bits).
    #[arg(long)]
    pub residual_tol: Option<f64>,
}

pub const NC_RESIDUAL_TOL: f64 = 1e-4;

pub fn nc(args: NcArgs, common: &Common) -> Result<(), Failure> {
    let mode = args.mode.unwrap_or(Mode::TwoMode);
    let tol = args.residual_tol.unwrap_or(NC_RESIDUAL_TOL);
    let sol = solve_nc(mode.into())?;
    let pass = sol.residual.abs() <= tol;
    let mut r = Report::new("nc", json!({ "mode": mode, "residual_tol": tol }), tol == NC_RESIDUAL_TOL);
    r.header = vec!["nc", "ns0", "mutual_information", "capacity", "residual", "pass"];
    r.rows.push(vec![num(sol.nc), num(sol.ns0), num(sol.mutual_information), num(sol.capacity), num(sol.residual), pass.to_string()]);
    r.set("nc", sol.nc);
    r.set("ns0", sol.ns0);
    r.set("mutual_information", sol.mutual_information);
    r.set("capacity", sol.capacity);
    r.set("residual", sol.residual);
    r.set("skipped", &sol.skipped);
    r.set("warnings", &sol.warnings);
    r.set("caveat", CAVEAT);
    r.set("pass", pass);
    r.emit(common, Format::Json)?;
    if pass {
        Ok(())
    } else {
        Err(Failure::Tolerance(format!("residual {:e} exceeds {tol:e}", sol.residual)))
    }
}

#[derive(Args, Debug, Serialize, Deserialize)]
pub struct EvaluateArgs {
    /// Covariance matrix as JSON `{n, gamma}`.
    #[arg(long)]
    pub cm: Option<PathBuf>,
    #[arg(long)]
    pub noise: Option<f64>,
}

pub fn evaluate(args: EvaluateArgs, common: &Common) -> Result<(), Failure> {
    let path = args.cm.ok_or_else(|| Failure::Usage("--cm is required".into()))?;
    let noise = args.noise.ok_or_else(|| Failure::Usage("--noise is required".into()))?;
    let text = std::fs::read_to_string(&path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let cm = cm_from_json(&value)?;
    let ch = ThermalChannel::new(noise)?;
    let input = cm.entropy()?;
    let output = apply_channel(&cm, &ch)?.entropy()?;
    let joint = joint_after_channel(&cm, &ch)?.entropy()?;
    let ci = coherent_information(&cm, &ch)?;
    let mi = mutual_information(&cm, &ch)?;
    let mut r = Report::new("evaluate", json!({ "cm": value, "noise": noise }), true);
    r.header = vec!["modes", "energy", "input_entropy", "output_entropy", "joint_entropy", "ci", "mi"];
    r.rows.push(vec![cm.n.to_string(), num(cm.energy()), num(input), num(output), num(joint), num(ci), num(mi)]);
    r.set("modes", cm.n);
    r.set("energy", cm.energy());
    r.set("input_entropy", input);
    r.set("output_entropy", output);
    r.set("joint_entropy", joint);
    r.set("ci", ci);
    r.set("mi", mi);
    r.emit(common, Format::Json)
}
