//! `verify` subcommands over the extremality checks.

use clap::{Args, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use thermocap::perturbation::find_ns0;
use thermocap::verify::{scan_delta_ci, verify_directional, verify_local_max, verify_trace_bound, ProbeEnsemble, ProbeKind};

use crate::commands::Mode;
use crate::config::{config_hash, merge, parse_grid, Failure};
use crate::emit::{num, opt, Report};
use crate::{Common, Format};

#[derive(Subcommand, Debug)]
pub enum VerifyCommand {
    /// Derivative of the coherent information towards random probes.
    Directional(DirectionalArgs),
    /// Trace-functional bound over random probes and a diagonal grid.
    Trace(TraceArgs),
    /// Thermal input against nearby equal-energy Gaussian inputs.
    LocalMax(LocalMaxArgs),
    /// Sign structure of the perturbative coherent-information change.
    Scan(ScanArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    SqueezeRotate,
    CorrelatedTwoMode,
}

impl From<Kind> for ProbeKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::SqueezeRotate => ProbeKind::SqueezeRotate,
            Kind::CorrelatedTwoMode => ProbeKind::CorrelatedTwoMode,
        }
    }
}

#[derive(Args, Debug, Serialize, Deserialize)]
pub struct DirectionalArgs {
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long)]
    pub modes: Option<usize>,
    /// Energy per mode, `N_s + 1/2`.
    #[arg(long)]
    pub energy: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub kind: Option<Kind>,
    /// Allow squeezes up to 10 instead of 2.
    #[arg(long)]
    pub wide: Option<bool>,
}

#[derive(Args, Debug, Serialize, Deserialize)]
pub struct TraceArgs {
    #[arg(long)]
    pub modes: Option<usize>,
    #[arg(long)]
    pub energy: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub kind: Option<Kind>,
    #[arg(long)]
    pub wide: Option<bool>,
}

#[derive(Args, Debug, Serialize, Deserialize)]
pub struct LocalMaxArgs {
    #[arg(long)]
    pub ns: Option<f64>,
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long)]
    pub modes: Option<usize>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub kind: Option<Kind>,
    #[arg(long)]
    pub wide: Option<bool>,
}

#[derive(Args, Debug, Serialize, Deserialize)]
pub struct ScanArgs {
    #[arg(long)]
    pub noise: Option<f64>,
    /// Input photon-number grid, `start:stop:step` or `log:lo:hi:count`.
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
}

fn ensemble(modes: Option<usize>, e_bar: f64, samples: Option<usize>, seed: Option<u64>, kind: Option<Kind>, wide: Option<bool>) -> Result<ProbeEnsemble, Failure> {
    let modes = modes.unwrap_or(2);
    if !(1..=4).contains(&modes) {
        return Err(Failure::Usage(format!("--modes must be between 1 and 4, got {modes}")));
    }
    let mut e = ProbeEnsemble::new(modes, e_bar, samples.unwrap_or(1000), seed.unwrap_or(7))?;
    e.kind = kind.unwrap_or(Kind::SqueezeRotate).into();
    e.wide = wide.unwrap_or(false);
    Ok(e)
}

fn summary(command: &'static str, config: Value, violations: usize, extremum: f64, pass: bool, report: Value) -> Report {
    let mut r = Report::new(command, config.clone(), true);
    r.header = vec!["config_hash", "violations", "extremum", "pass"];
    r.rows.push(vec![config_hash(&config), violations.to_string(), num(extremum), pass.to_string()]);
    r.set("report", report);
    r.set("pass", pass);
    r
}

fn finish(r: Report, common: &Common, pass: bool, what: &str) -> Result<(), Failure> {
    r.emit(common, Format::Json)?;
    if pass {
        Ok(())
    } else {
        Err(Failure::Tolerance(format!("{what} check failed")))
    }
}

fn to_json(x: &impl Serialize) -> Value {
    serde_json::to_value(x).expect("reports serialize")
}

pub fn run(cmd: VerifyCommand, file: &Map<String, Value>, common: &Common) -> Result<(), Failure> {
    match cmd {
        VerifyCommand::Directional(a) => {
            let a = merge(&a, file)?;
            let noise = a.noise.unwrap_or(0.1);
            let e = ensemble(a.modes, a.energy.unwrap_or(2.5), a.samples, a.seed, a.kind, a.wide)?;
            let rep = verify_directional(&e, noise)?;
            let config = json!({ "ensemble": e, "noise": noise });
            let r = summary("verify directional", config, rep.violations.len(), rep.max_derivative, rep.pass, to_json(&rep));
            finish(r, common, rep.pass, "directional")
        }
        VerifyCommand::Trace(a) => {
            let a = merge(&a, file)?;
            let e = ensemble(a.modes, a.energy.unwrap_or(1.5), a.samples, a.seed, a.kind, a.wide)?;
            let rep = verify_trace_bound(&e)?;
            let config = json!({ "ensemble": e });
            let r = summary("verify trace", config, rep.violations.len(), rep.max_t, rep.pass, to_json(&rep));
            finish(r, common, rep.pass, "trace bound")
        }
        VerifyCommand::LocalMax(a) => {
            let a = merge(&a, file)?;
            let ns = a.ns.unwrap_or(2.0);
            let noise = a.noise.unwrap_or(0.1);
            if !(ns > 0.0) {
                return Err(Failure::Usage(format!("--ns must be positive, got {ns}")));
            }
            let e = ensemble(a.modes, ns + 0.5, a.samples, a.seed, a.kind, a.wide)?;
            let rep = verify_local_max(ns, noise, &e)?;
            let config = json!({ "ensemble": e, "ns": ns, "noise": noise });
            let violations = rep.positive.len() + rep.mixture_violations.len();
            let r = summary("verify local-max", config, violations, rep.max_difference, rep.pass, to_json(&rep));
            finish(r, common, rep.pass, "local maximality")
        }
        VerifyCommand::Scan(a) => {
            let a = merge(&a, file)?;
            let noise = a.noise.unwrap_or(0.1);
            let spec = a.grid.unwrap_or_else(|| "log:1e-3:1e3:200".to_string());
            let mode = a.mode.unwrap_or(Mode::TwoMode);
            let grid = parse_grid(&spec)?;
            let rep = scan_delta_ci(noise, &grid, mode.into())?;
            let ns0 = find_ns0(noise, mode.into()).ok().map(|r| r.ns0);
            let mut r = Report::new("verify scan", json!({ "noise": noise, "grid": spec, "mode": mode }), true);
            r.header = vec!["ns", "delta_ci", "sign", "ns0"];
            for row in &rep.rows {
                r.rows.push(vec![num(row.ns), num(row.delta_ci), row.sign.to_string(), opt(ns0)]);
            }
            r.set("report", to_json(&rep));
            r.set("ns0", ns0);
            r.set("pass", rep.shape_holds);
            finish(r, common, rep.shape_holds, "scan shape")
        }
    }
}
