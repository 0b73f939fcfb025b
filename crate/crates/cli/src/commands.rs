use std::f64::consts::PI;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use spincat::catcode::kl_scan_with;
use spincat::control::{
    dual_manifold_pulse, grape_optimize, lindblad_isometry_fidelity, x_measurement_grape, x_measurement_map,
    AscentOptions, DualManifoldConfig, GrapeOptions, GrapeResult, Objective, PulseSchedule, RabiModel, RabiTarget,
    Segment, XMeasurementModel,
};
use spincat::linalg::ComplexOperator;
use spincat::noise::{optical_pumping_jumps_simplified, NoiseConfig, NoiseModelKind, OPTICAL_ALPHA, OPTICAL_BETA, OPTICAL_GAMMA_T};
use spincat::qec::{optical_pumping_walkthrough, walkthrough_with_event};
use spincat::register::DEFAULT_DIM_CAP;
use spincat::rng::{self, DEFAULT_SEED};
use spincat::spinalg::{sa_basis, spherical_tensor, SpinValue};
use spincat::threshold::{log_grid, write_csv, Crossings, ThresholdModel, ThresholdParams};

use crate::output::{check_writable, commit, CliError, CliResult, Output};
use crate::{Format, GrapeTargetArg, ModelArg, TensorBasisArg};

/// Accepts decimal or `0x`-prefixed hexadecimal.
pub fn parse_seed(s: &str) -> Result<u64, String> {
    let s = s.trim();
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    parsed.map_err(|_| format!("invalid seed {s:?}"))
}

fn json<T: Serialize>(value: &T) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn require(cond: bool, msg: impl FnOnce() -> String) -> CliResult<()> {
    if cond {
        Ok(())
    } else {
        Err(CliError::invalid(msg()))
    }
}

#[derive(Serialize)]
struct OperatorDump {
    #[serde(rename = "J")]
    j: SpinValue,
    basis: &'static str,
    rank: u32,
    q: i32,
    dim: usize,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

pub fn tensor(
    spin: SpinValue,
    rank: u32,
    q: i32,
    basis: TensorBasisArg,
    format: Format,
    out: Option<PathBuf>,
) -> CliResult<()> {
    check_writable(&out)?;
    let (name, op): (&'static str, ComplexOperator) = match basis {
        TensorBasisArg::Tensor => ("tensor", spherical_tensor(spin, rank, q)?),
        TensorBasisArg::Sym => ("sym", sa_basis(spin, rank, q)?.s),
        TensorBasisArg::Anti => {
            let a = sa_basis(spin, rank, q)?.a;
            ("anti", a.ok_or_else(|| CliError::invalid("A^(k)_q needs q > 0"))?)
        }
    };
    let m = op.matrix();
    let d = op.dim();
    let contents = match format {
        Format::Json => json(&OperatorDump {
            j: spin,
            basis: name,
            rank,
            q,
            dim: d,
            re: (0..d).map(|i| (0..d).map(|k| m[(i, k)].re).collect()).collect(),
            im: (0..d).map(|i| (0..d).map(|k| m[(i, k)].im).collect()).collect(),
        })?,
        Format::Csv => {
            let mut s = String::from("row,col,re,im\n");
            for i in 0..d {
                for k in 0..d {
                    s.push_str(&format!("{i},{k},{},{}\n", m[(i, k)].re, m[(i, k)].im));
                }
            }
            s
        }
    };
    commit(vec![Output { path: out, contents }])
}

pub fn klscan(spin: SpinValue, n: usize, k: u32, tol: f64, out: Option<PathBuf>) -> CliResult<()> {
    check_writable(&out)?;
    require(n >= 1, || "n must be positive".into())?;
    require(tol.is_finite() && tol > 0.0, || format!("tolerance must be positive, got {tol}"))?;
    let report = kl_scan_with(spin, n, k, tol, DEFAULT_DIM_CAP)?;
    let mut contents = report.to_json()?;
    contents.push('\n');
    commit(vec![Output { path: out, contents }])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum EventArg {
    /// `W₊₁` of the simplified optical-pumping model built from alpha and beta.
    Optical,
    /// Pure σ₊ emission `J₋/√(2J)`.
    SigmaPlus,
}

/// Fields of `simulate-ec`; also the schema of its `--config` file.
#[derive(Args, Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateEcArgs {
    #[arg(long, default_value = "9/2")]
    pub spin: SpinValue,
    #[arg(long, value_enum, default_value = "optical")]
    pub noise: EventArg,
    /// Rank-1 weight of the optical jump.
    #[arg(long, default_value_t = OPTICAL_ALPHA)]
    pub alpha: f64,
    /// Rank-2 weight of the optical jump.
    #[arg(long, default_value_t = OPTICAL_BETA)]
    pub beta: f64,
    /// Logical amplitudes of |+_L⟩ and |−_L⟩: `a,b` (real) or `a_re,a_im,b_re,b_im`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = [0.6, 0.8])]
    pub logical: Vec<f64>,
    #[arg(long, value_parser = parse_seed, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// JSON file with the fields above; replaces the flags when given.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

impl Default for SimulateEcArgs {
    fn default() -> Self {
        Self {
            spin: SpinValue::half(9),
            noise: EventArg::Optical,
            alpha: OPTICAL_ALPHA,
            beta: OPTICAL_BETA,
            logical: vec![0.6, 0.8],
            seed: DEFAULT_SEED,
            config: None,
            out: None,
        }
    }
}

pub fn simulate_ec(args: SimulateEcArgs) -> CliResult<()> {
    check_writable(&args.out)?;
    let cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::invalid(format!("reading {}: {e}", path.display())))?;
            let mut cfg: SimulateEcArgs =
                serde_json::from_str(&text).map_err(|e| CliError::invalid(format!("config {}: {e}", path.display())))?;
            cfg.out = args.out.clone();
            cfg
        }
        None => args,
    };
    let (a, b) = match cfg.logical.as_slice() {
        &[a, b] => (Complex64::new(a, 0.0), Complex64::new(b, 0.0)),
        &[ar, ai, br, bi] => (Complex64::new(ar, ai), Complex64::new(br, bi)),
        other => return Err(CliError::invalid(format!("--logical takes 2 or 4 numbers, got {}", other.len()))),
    };
    require(a.is_finite() && b.is_finite(), || "logical amplitudes must be finite".into())?;
    let mut rng = rng::stream(cfg.seed, "simulate-ec", 0);
    let transcript = match cfg.noise {
        EventArg::SigmaPlus => optical_pumping_walkthrough(cfg.spin, a, b, &mut rng)?,
        EventArg::Optical => {
            require(cfg.alpha.is_finite() && cfg.beta.is_finite(), || "alpha and beta must be finite".into())?;
            let [_, w_plus, _] = optical_pumping_jumps_simplified(cfg.spin, cfg.alpha, cfg.beta)?;
            let label = format!("optical W+1 (alpha={}, beta={})", cfg.alpha, cfg.beta);
            walkthrough_with_event(cfg.spin, &w_plus, &label, a, b, &mut rng)?
        }
    };
    let mut contents = transcript.to_json()?;
    contents.push('\n');
    commit(vec![Output { path: cfg.out, contents }])
}

#[derive(Args, Clone, Debug)]
pub struct GrapeArgs {
    #[arg(long, value_enum)]
    pub target: GrapeTargetArg,
    /// Ground/auxiliary spin. Dual-manifold targets use it for the auxiliary
    /// manifold and J + 1 for the Rydberg manifold.
    #[arg(long, default_value = "9/2")]
    pub spin: SpinValue,
    /// Defaults: 12 for Rabi targets, 40 for x-measurement, the preset for dual targets.
    #[arg(long)]
    pub segments: Option<usize>,
    /// Total time in units of 1/Ω_rf. Defaults: 4π for Rabi targets, 20 for x-measurement.
    #[arg(long)]
    pub time: Option<f64>,
    #[arg(long, default_value_t = 8)]
    pub restarts: usize,
    #[arg(long, value_parser = parse_seed, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Linear Zeeman shift per unit M on the upper manifold (Rabi targets).
    #[arg(long, default_value_t = 1.0)]
    pub zeeman: f64,
    /// Fidelity counted as converged. Defaults: 0.99, or 0.999 for dual targets.
    #[arg(long)]
    pub success: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Evaluate the x-measurement pulse under optical pumping with this ΓT.
    #[arg(long)]
    pub gamma_t: Option<f64>,
    #[arg(long, default_value_t = OPTICAL_ALPHA)]
    pub alpha: f64,
    #[arg(long, default_value_t = OPTICAL_BETA)]
    pub beta: f64,
    /// Per-iteration fidelity CSV of the winning restart.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct GrapeReport {
    target: String,
    #[serde(rename = "J")]
    j: SpinValue,
    seed: u64,
    restarts: usize,
    fidelity: f64,
    converged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    best_restart: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fidelity_aux: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fidelity_ryd: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    phases: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma_t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lindblad_fidelity: Option<f64>,
    schedule: PulseSchedule,
}

fn grape_options(args: &GrapeArgs, success: f64) -> GrapeOptions {
    let mut ascent = AscentOptions::default();
    if let Some(m) = args.max_iter {
        ascent.max_iter = m;
    }
    GrapeOptions { restarts: args.restarts, seed: args.seed, ascent, success, ..Default::default() }
}

fn report_from(args: &GrapeArgs, name: &str, res: &GrapeResult) -> GrapeReport {
    GrapeReport {
        target: name.into(),
        j: args.spin,
        seed: args.seed,
        restarts: args.restarts,
        fidelity: res.fidelity,
        converged: res.converged,
        best_restart: Some(res.restart),
        iterations: Some(res.iterations),
        fidelity_aux: None,
        fidelity_ryd: None,
        phases: None,
        gamma_t: None,
        lindblad_fidelity: None,
        schedule: res.schedule.clone(),
    }
}

fn validate_grape(args: &GrapeArgs) -> CliResult<()> {
    check_writable(&args.out)?;
    check_writable(&args.trace)?;
    require(args.restarts >= 1, || "restarts must be positive".into())?;
    require(args.segments != Some(0), || "segments must be positive".into())?;
    if let Some(t) = args.time {
        require(t.is_finite() && t > 0.0, || format!("time must be positive, got {t}"))?;
    }
    if let Some(s) = args.success {
        require((0.0..=1.0).contains(&s), || format!("success must lie in [0, 1], got {s}"))?;
    }
    require(args.zeeman.is_finite(), || "zeeman scale must be finite".into())?;
    let dual = matches!(args.target, GrapeTargetArg::DualX2 | GrapeTargetArg::DualX3 | GrapeTargetArg::DualZ);
    require(!(dual && args.trace.is_some()), || "--trace is not available for dual-manifold targets".into())?;
    let xm = args.target == GrapeTargetArg::XMeasurement;
    require(xm || args.gamma_t.is_none(), || "--gamma-t applies to the x-measurement target only".into())?;
    if let Some(g) = args.gamma_t {
        require(g.is_finite() && g >= 0.0, || format!("gamma-t must be non-negative, got {g}"))?;
    }
    args.spin.require_half_integer()?;
    Ok(())
}

pub fn grape(args: GrapeArgs) -> CliResult<()> {
    validate_grape(&args)?;
    let name = args.target.to_possible_value().expect("no skipped variants").get_name().to_string();
    let (report, trace) = match args.target {
        GrapeTargetArg::Control | GrapeTargetArg::Target | GrapeTargetArg::RydTransfer => {
            let target = match args.target {
                GrapeTargetArg::Control => RabiTarget::Control,
                GrapeTargetArg::Target => RabiTarget::Target,
                _ => RabiTarget::RydTransfer,
            };
            let model = RabiModel::new(target.layout(), args.spin, args.zeeman)?;
            let iso = target.isometry(&model)?;
            let segments = args.segments.unwrap_or(12);
            let time = args.time.unwrap_or(4.0 * PI);
            let objective = Objective::new(vec![(&model, &iso)], segments, time, Segment::default())?;
            let res = grape_optimize(&objective, &grape_options(&args, args.success.unwrap_or(0.99)))?;
            (report_from(&args, &name, &res), Some(res.trace_csv()))
        }
        GrapeTargetArg::XMeasurement => {
            let segments = args.segments.unwrap_or(40);
            let time = args.time.unwrap_or(20.0);
            let res = x_measurement_grape(args.spin, segments, time, &grape_options(&args, args.success.unwrap_or(0.99)))?;
            let mut report = report_from(&args, &name, &res);
            if let Some(gt) = args.gamma_t {
                let model = XMeasurementModel::new(args.spin, 1.0, 1.0);
                let jumps = optical_pumping_jumps_simplified(args.spin, args.alpha, args.beta)?;
                let f = lindblad_isometry_fidelity(&model, &res.schedule, &x_measurement_map(args.spin)?, &jumps, gt / time)?;
                report.gamma_t = Some(gt);
                report.lindblad_fidelity = Some(f);
            }
            (report, Some(res.trace_csv()))
        }
        GrapeTargetArg::DualX2 | GrapeTargetArg::DualX3 | GrapeTargetArg::DualZ => {
            let mut cfg = match args.target {
                GrapeTargetArg::DualX2 => DualManifoldConfig::x_two_pulse(),
                GrapeTargetArg::DualX3 => DualManifoldConfig::x_three_pulse(),
                _ => DualManifoldConfig::z_gate(),
            };
            cfg.aux = args.spin;
            cfg.ryd = SpinValue::from_twice(args.spin.twice() + 2)?;
            cfg.restarts = args.restarts;
            cfg.seed = args.seed;
            if let Some(s) = args.segments {
                cfg.segments = s;
            }
            if let Some(t) = args.time {
                cfg.total_time = t;
            }
            if let Some(s) = args.success {
                cfg.success = s;
            }
            let res = dual_manifold_pulse(&cfg)?;
            let report = GrapeReport {
                target: name.clone(),
                j: args.spin,
                seed: args.seed,
                restarts: args.restarts,
                fidelity: res.joint,
                converged: res.converged,
                best_restart: None,
                iterations: None,
                fidelity_aux: Some(res.fidelity_aux),
                fidelity_ryd: Some(res.fidelity_ryd),
                phases: Some(res.phases.clone()),
                gamma_t: None,
                lindblad_fidelity: None,
                schedule: res.schedule,
            };
            (report, None)
        }
    };
    let mut outputs = vec![Output { path: args.out.clone(), contents: json(&report)? }];
    if let (Some(path), Some(csv)) = (&args.trace, trace) {
        outputs.push(Output { path: Some(path.clone()), contents: csv });
    }
    commit(outputs)?;
    if report.converged {
        Ok(())
    } else {
        Err(CliError::not_converged(format!("best fidelity {} is below the success threshold", report.fidelity)))
    }
}

#[derive(Args, Clone, Debug)]
pub struct ThresholdArgs {
    #[arg(long, default_value = "9/2")]
    pub spin: SpinValue,
    /// Comma-separated odd repetition lengths.
    #[arg(long, value_delimiter = ',', required = true)]
    pub n: Vec<u32>,
    #[arg(long, default_value_t = 7)]
    pub r1: u32,
    #[arg(long, default_value_t = 1)]
    pub r2: u32,
    #[arg(long, value_enum, default_value = "rotation")]
    pub model: ModelArg,
    /// Leakage probabilities p1..p4: one value applied to all four, or four values.
    #[arg(long, value_delimiter = ',')]
    pub leakage: Vec<f64>,
    #[arg(long, default_value_t = OPTICAL_ALPHA)]
    pub alpha: f64,
    #[arg(long, default_value_t = OPTICAL_BETA)]
    pub beta: f64,
    #[arg(long, default_value_t = OPTICAL_GAMMA_T)]
    pub gamma_t: f64,
    #[arg(long)]
    pub eps_css: Option<f64>,
    #[arg(long)]
    pub k_max: Option<u32>,
    #[arg(long, default_value_t = 1e-4)]
    pub eps_min: f64,
    #[arg(long, default_value_t = 2e-2)]
    pub eps_max: f64,
    #[arg(long, default_value_t = 40)]
    pub points: usize,
    /// Curve CSV, one block of rows per n.
    #[arg(long)]
    pub out: PathBuf,
    /// Crossings JSON. Defaults to the CSV path with extension `crossings.json`.
    #[arg(long)]
    pub crossings: Option<PathBuf>,
}

pub fn threshold(args: ThresholdArgs) -> CliResult<()> {
    let crossings_path = args.crossings.clone().unwrap_or_else(|| args.out.with_extension("crossings.json"));
    check_writable(&Some(args.out.clone()))?;
    check_writable(&Some(crossings_path.clone()))?;
    require(crossings_path != args.out, || "curve and crossings paths coincide".into())?;
    let leakage = match args.leakage.as_slice() {
        [] => [0.0; 4],
        &[p] => [p; 4],
        &[a, b, c, d] => [a, b, c, d],
        other => return Err(CliError::invalid(format!("--leakage takes 1 or 4 values, got {}", other.len()))),
    };
    let mut noise = match args.model {
        ModelArg::Rotation => NoiseConfig::rotation(),
        ModelArg::Optical => NoiseConfig::optical(),
    }
    .with_leakage(leakage);
    noise.alpha = args.alpha;
    noise.beta = args.beta;
    noise.gamma_t = args.gamma_t;
    require(noise.gamma_t.is_finite() && noise.gamma_t > 0.0, || "gamma-t must be positive".into())?;
    let grid = log_grid(args.eps_min, args.eps_max, args.points)?;
    let params: Vec<ThresholdParams> = args
        .n
        .iter()
        .map(|&n| {
            let mut p = ThresholdParams::new(args.spin, n, args.r1, args.r2, noise.clone())?;
            if let Some(e) = args.eps_css {
                p.eps_css = e;
            }
            p.k_max = args.k_max;
            p.validate()?;
            Ok(p)
        })
        .collect::<spincat::Result<_>>()?;
    if let Some(e) = args.eps_css {
        require(e > 0.0 && e < 1.0, || format!("eps-css must lie in (0, 1), got {e}"))?;
    }
    if noise.model == NoiseModelKind::Optical {
        noise.jump_ratios(args.spin)?;
    }

    let mut csv = Vec::new();
    let mut crossings: Vec<Crossings> = Vec::new();
    for (i, p) in params.iter().enumerate() {
        let model = ThresholdModel::new(p.clone())?;
        let curve = model.sweep(&grid)?;
        crossings.push(model.find_crossings(&curve)?);
        let mut block = Vec::new();
        write_csv(&mut block, p, &curve)?;
        let start = if i == 0 { 0 } else { block.iter().position(|&b| b == b'\n').map_or(0, |k| k + 1) };
        csv.extend_from_slice(&block[start..]);
    }
    let csv = String::from_utf8(csv).map_err(|e| CliError::io(e.to_string()))?;
    commit(vec![
        Output { path: Some(args.out), contents: csv },
        Output { path: Some(crossings_path), contents: json(&crossings)? },
    ])
}
