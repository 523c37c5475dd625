//! `onofri-lab`: command line front end for the mean field / Moser-Onofri
//! laboratory. Every command is deterministic: identical configuration
//! produces bit-identical output. `ONOFRI_LAB_THREADS` caps the worker
//! pool used by the branch scans and the verification runner.
//!
//! Exit codes: 0 success, 1 domain error, 2 numerical non-convergence,
//! 64 usage error.
//!
//! Validation guards use the `!(x > 0.0)` form to reject NaN inputs.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use onofri_core::capacity::{self, AnnulusSpec};
use onofri_core::constants;
use onofri_core::error::{Error, Result};
use onofri_core::functional;
use onofri_core::harmonic_radius::{self, DomainSpec, ExistenceVerdict};
use onofri_core::minimizer::{self, InitGuess, MinimizeOptions};
use onofri_core::profile::GridKind;
use onofri_core::radial_ode;
use onofri_core::verify::{self, VerifyLevel};

const USAGE_EXIT: i32 = 64;

#[derive(Parser)]
#[command(
    name = "onofri-lab",
    about = "Numerical laboratory for the n-Laplacian mean field equation and the sharp Moser-Onofri inequality",
    version,
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Options shared by every command: dimension, tolerances, config file.
/// Flags override the config file, which overrides built-in defaults.
#[derive(Args, Debug, Clone)]
struct Common {
    /// Dimension n >= 2
    #[arg(long)]
    dim: Option<u32>,
    /// ODE solver tolerance
    #[arg(long)]
    ode_tol: Option<f64>,
    /// Quadrature tolerance
    #[arg(long)]
    quad_tol: Option<f64>,
    /// Extrapolation / fit tolerance
    #[arg(long)]
    fit_tol: Option<f64>,
    /// Flat key=value configuration file; flags override file values
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy)]
struct RunConfig {
    dim: u32,
    ode_tol: f64,
    quad_tol: f64,
    #[allow(dead_code)]
    fit_tol: f64,
}

impl Common {
    fn resolve(&self) -> Result<RunConfig> {
        let file = match &self.config {
            Some(path) => parse_config_file(path)?,
            None => BTreeMap::new(),
        };
        let dim = pick(self.dim, &file, "dim", 2u32)?;
        let cfg = RunConfig {
            dim,
            ode_tol: pick(self.ode_tol, &file, "ode_tol", 1e-10)?,
            quad_tol: pick(self.quad_tol, &file, "quad_tol", 1e-10)?,
            fit_tol: pick(self.fit_tol, &file, "fit_tol", 1e-3)?,
        };
        if cfg.dim < 2 {
            return Err(Error::DimensionTooSmall(cfg.dim));
        }
        if !(cfg.ode_tol > 0.0 && cfg.quad_tol > 0.0 && cfg.fit_tol > 0.0) {
            return Err(Error::InvalidArgument(
                "tolerances must be positive".into(),
            ));
        }
        Ok(cfg)
    }
}

fn parse_config_file(path: &PathBuf) -> Result<BTreeMap<String, String>> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::InvalidArgument(format!("cannot read config {path:?}: {e}")))?;
    let mut map = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match line.split_once('=') {
            Some((k, v)) => {
                map.insert(k.trim().to_string(), v.trim().to_string());
            }
            None => {
                return Err(Error::InvalidArgument(format!(
                    "config line {} is not key=value: {line:?}",
                    lineno + 1
                )))
            }
        }
    }
    Ok(map)
}

fn pick<T: FromStr + Copy>(
    flag: Option<T>,
    file: &BTreeMap<String, String>,
    key: &str,
    default: T,
) -> Result<T> {
    if let Some(v) = flag {
        return Ok(v);
    }
    match file.get(key) {
        Some(s) => s
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("config key {key} has bad value {s:?}"))),
        None => Ok(default),
    }
}

#[derive(Subcommand)]
enum Command {
    /// All dimensional constants plus the sharp constant by both routes
    Constants {
        #[command(flatten)]
        common: Common,
        /// Emit JSON instead of plain text
        #[arg(long)]
        json: bool,
    },
    /// Scan the mean field solution branch over a family of peak heights
    Branch {
        #[command(flatten)]
        common: Common,
        /// Single peak "2.079" or inclusive sweep "a:b:step"
        #[arg(long, allow_hyphen_values = true)]
        peaks: String,
        /// ODE tolerance override (alias of --ode-tol)
        #[arg(long)]
        tol: Option<f64>,
        /// Write CSV to the given file, or "-" for stdout
        #[arg(long, num_args = 0..=1, default_missing_value = "-")]
        csv: Option<String>,
        #[arg(long)]
        json: bool,
    },
    /// Energy of the concentrated bubble family and its extrapolated limit
    BubbleLimit {
        #[command(flatten)]
        common: Common,
        /// Comma-separated decreasing scales, e.g. 1e-1,1e-2,1e-3,1e-4
        #[arg(long = "L", value_name = "LIST")]
        scales: String,
        #[arg(long, num_args = 0..=1, default_missing_value = "-")]
        csv: Option<String>,
        #[arg(long)]
        json: bool,
    },
    /// Minimize the subcritical functional at rho = frac * C_n
    Minimize {
        #[command(flatten)]
        common: Common,
        /// Mass as a fraction of the critical value, in (0, 1)
        #[arg(long)]
        rho_frac: f64,
        /// Radial grid size (nodes)
        #[arg(long, default_value_t = 512)]
        grid: usize,
        #[arg(long, num_args = 0..=1, default_missing_value = "-")]
        csv: Option<String>,
        #[arg(long)]
        json: bool,
    },
    /// Minimize along an increasing mass ladder and trace the blow-up
    BlowupTrace {
        #[command(flatten)]
        common: Common,
        /// Comma-separated increasing fractions of C_n, e.g. 0.9,0.99,0.999
        #[arg(long)]
        rho_fracs: String,
        #[arg(long, default_value_t = 512)]
        grid: usize,
        #[arg(long, num_args = 0..=1, default_missing_value = "-")]
        csv: Option<String>,
        #[arg(long)]
        json: bool,
    },
    /// Closed-form n-capacity of a concentric annulus
    Capacity {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        outer: f64,
        #[arg(long)]
        inner: f64,
        /// Plateau level on the inner ball
        #[arg(long, default_value_t = 1.0)]
        level: f64,
        #[arg(long)]
        json: bool,
    },
    /// Robin function and harmonic radius of the unit disk at an offset
    HarmonicRadius {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        disk_offset: f64,
        #[arg(long)]
        json: bool,
    },
    /// Optimal concentration level on a supported domain
    ConcentrationLevel {
        #[command(flatten)]
        common: Common,
        /// Unit disk with the point at this offset (n = 2 only)
        #[arg(long, conflicts_with = "ball_radius")]
        disk_offset: Option<f64>,
        /// Ball of this radius with the point at the center
        #[arg(long)]
        ball_radius: Option<f64>,
        #[arg(long)]
        json: bool,
    },
    /// Extremal existence criterion on a general domain
    Criterion {
        #[command(flatten)]
        common: Common,
        /// Candidate infimum C(n, Omega)
        #[arg(long, allow_hyphen_values = true)]
        inf: f64,
        /// sup over the domain of ln(harmonic radius)
        #[arg(long, allow_hyphen_values = true)]
        sup_log_radius: f64,
        #[arg(long)]
        json: bool,
    },
    /// Solve one branch point and report the Pohozaev identity sides
    PohozaevCheck {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        peak: f64,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        json: bool,
    },
    /// Run the full acceptance checks for the given dimension
    VerifyAll {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = LevelArg::Full)]
        level: LevelArg,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum LevelArg {
    Quick,
    Full,
}

fn main() {
    if let Ok(threads) = std::env::var("ONOFRI_LAB_THREADS") {
        if let Ok(k) = threads.parse::<usize>() {
            if k >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
            }
        }
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap help/version are not usage errors
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => USAGE_EXIT,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    match run(cli.command) {
        Ok(exit) => std::process::exit(exit),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}

fn run(command: Command) -> Result<i32> {
    match command {
        Command::Constants { common, json } => cmd_constants(&common.resolve()?, json),
        Command::Branch {
            common,
            peaks,
            tol,
            csv,
            json,
        } => {
            let mut cfg = common.resolve()?;
            if let Some(t) = tol {
                cfg.ode_tol = t;
            }
            cmd_branch(&cfg, &peaks, csv.as_deref(), json)
        }
        Command::BubbleLimit {
            common,
            scales,
            csv,
            json,
        } => cmd_bubble_limit(&common.resolve()?, &scales, csv.as_deref(), json),
        Command::Minimize {
            common,
            rho_frac,
            grid,
            csv,
            json,
        } => cmd_minimize(&common.resolve()?, rho_frac, grid, csv.as_deref(), json),
        Command::BlowupTrace {
            common,
            rho_fracs,
            grid,
            csv,
            json,
        } => cmd_blowup_trace(&common.resolve()?, &rho_fracs, grid, csv.as_deref(), json),
        Command::Capacity {
            common,
            outer,
            inner,
            level,
            json,
        } => cmd_capacity(&common.resolve()?, outer, inner, level, json),
        Command::HarmonicRadius {
            common,
            disk_offset,
            json,
        } => cmd_harmonic_radius(&common.resolve()?, disk_offset, json),
        Command::ConcentrationLevel {
            common,
            disk_offset,
            ball_radius,
            json,
        } => cmd_concentration_level(&common.resolve()?, disk_offset, ball_radius, json),
        Command::Criterion {
            common,
            inf,
            sup_log_radius,
            json,
        } => cmd_criterion(&common.resolve()?, inf, sup_log_radius, json),
        Command::PohozaevCheck {
            common,
            peak,
            tol,
            json,
        } => {
            let mut cfg = common.resolve()?;
            if let Some(t) = tol {
                cfg.ode_tol = t;
            }
            cmd_pohozaev(&cfg, peak, json)
        }
        Command::VerifyAll {
            common,
            level,
            json,
        } => cmd_verify_all(&common.resolve()?, level, json),
    }
}

// ---------------------------------------------------------------- output

/// 17 significant digits: enough to round-trip any f64.
fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else {
        format!("{x:.16e}")
    }
}

fn emit_json<T: Serialize>(value: &T) -> Result<i32> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::InvalidArgument(format!("JSON encoding failed: {e}")))?;
    println!("{text}");
    Ok(0)
}

fn write_csv(target: Option<&str>, header: &str, rows: &[Vec<f64>]) -> Result<()> {
    let mut text = String::with_capacity(rows.len() * 64 + header.len() + 1);
    text.push_str(header);
    text.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|&x| fmt_float(x)).collect();
        text.push_str(&cells.join(","));
        text.push('\n');
    }
    match target {
        None | Some("-") => {
            print!("{text}");
            std::io::stdout()
                .flush()
                .map_err(|e| Error::InvalidArgument(format!("stdout: {e}")))?;
        }
        Some(path) => fs::write(path, text)
            .map_err(|e| Error::InvalidArgument(format!("cannot write {path}: {e}")))?,
    }
    Ok(())
}

// ---------------------------------------------------------------- commands

#[derive(Serialize)]
struct ConstantsOut {
    n: u32,
    omega: f64,
    alpha: f64,
    c_crit: f64,
    beta: f64,
    quant_mass: f64,
    sharp_quadrature: f64,
    sharp_closed_form: f64,
}

fn cmd_constants(cfg: &RunConfig, json: bool) -> Result<i32> {
    let b = constants::bundle(cfg.dim)?;
    let s = constants::sharp_constant(cfg.dim, cfg.quad_tol)?;
    let out = ConstantsOut {
        n: b.n,
        omega: b.omega,
        alpha: b.alpha,
        c_crit: b.c_crit,
        beta: b.beta,
        quant_mass: b.quant_mass,
        sharp_quadrature: s.by_quadrature,
        sharp_closed_form: s.by_closed_form,
    };
    if json {
        return emit_json(&out);
    }
    println!("n                  {}", out.n);
    println!("omega              {}", fmt_float(out.omega));
    println!("alpha              {}", fmt_float(out.alpha));
    println!("c_crit             {}", fmt_float(out.c_crit));
    println!("beta               {}", fmt_float(out.beta));
    println!("quant_mass         {}", fmt_float(out.quant_mass));
    println!("sharp_quadrature   {}", fmt_float(out.sharp_quadrature));
    println!("sharp_closed_form  {}", fmt_float(out.sharp_closed_form));
    Ok(0)
}

fn parse_peaks(spec: &str) -> Result<Vec<f64>> {
    if let Ok(single) = spec.parse::<f64>() {
        return Ok(vec![single]);
    }
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::InvalidArgument(format!(
            "peaks must be a number or a:b:step, got {spec:?}"
        )));
    }
    let a: f64 = parts[0]
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("bad sweep start {:?}", parts[0])))?;
    let b: f64 = parts[1]
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("bad sweep end {:?}", parts[1])))?;
    let step: f64 = parts[2]
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("bad sweep step {:?}", parts[2])))?;
    if !(step > 0.0) || b < a {
        return Err(Error::InvalidArgument(format!(
            "sweep needs b >= a and step > 0, got {spec:?}"
        )));
    }
    let count = ((b - a) / step).floor() as usize + 1;
    if count > 100_000 {
        return Err(Error::InvalidArgument(format!(
            "sweep would produce {count} points"
        )));
    }
    Ok((0..count).map(|i| a + step * i as f64).collect())
}

fn parse_float_list(spec: &str) -> Result<Vec<f64>> {
    spec.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidArgument(format!("bad number {s:?} in list")))
        })
        .collect()
}

#[derive(Serialize)]
struct BranchRow {
    peak_v: f64,
    lambda: f64,
    mass: f64,
    peak_u: f64,
    #[serde(rename = "energy_J")]
    energy_j: f64,
    pohozaev_residual: f64,
    epsilon: f64,
    farfield_slope: f64,
}

#[derive(Serialize)]
struct BranchOut {
    n: u32,
    points: Vec<BranchRow>,
    failures: Vec<BranchFailure>,
}

#[derive(Serialize)]
struct BranchFailure {
    peak: f64,
    message: String,
}

const BRANCH_CSV_HEADER: &str =
    "peak_v,lambda,mass,peak_u,energy_J,pohozaev_residual,epsilon,farfield_slope";

fn cmd_branch(cfg: &RunConfig, peaks: &str, csv: Option<&str>, json: bool) -> Result<i32> {
    let peaks = parse_peaks(peaks)?;
    let branch = radial_ode::scan_branch(cfg.dim, &peaks, cfg.ode_tol)?;
    let mut rows = Vec::with_capacity(branch.points.len());
    for pt in &branch.points {
        let rescale = radial_ode::rescale_to_bubble(pt).ok();
        let (epsilon, slope) = match rescale {
            Some(r) if !r.flagged => {
                let hi = (0.9 / r.epsilon).min(50.0);
                let slope = radial_ode::farfield_slope(pt, 5.0, hi).unwrap_or(f64::NAN);
                (r.epsilon, slope)
            }
            Some(r) => (r.epsilon, f64::NAN),
            None => (f64::NAN, f64::NAN),
        };
        rows.push(BranchRow {
            peak_v: pt.peak_v,
            lambda: pt.lambda,
            mass: pt.mass,
            peak_u: pt.peak_u,
            energy_j: pt.energy_j,
            pohozaev_residual: pt.pohozaev_residual,
            epsilon,
            farfield_slope: slope,
        });
    }
    let out = BranchOut {
        n: cfg.dim,
        points: rows,
        failures: branch
            .failures
            .iter()
            .map(|f| BranchFailure {
                peak: f.peak,
                message: f.message.clone(),
            })
            .collect(),
    };
    if json {
        return emit_json(&out);
    }
    let csv_rows: Vec<Vec<f64>> = out
        .points
        .iter()
        .map(|r| {
            vec![
                r.peak_v,
                r.lambda,
                r.mass,
                r.peak_u,
                r.energy_j,
                r.pohozaev_residual,
                r.epsilon,
                r.farfield_slope,
            ]
        })
        .collect();
    write_csv(csv.or(Some("-")), BRANCH_CSV_HEADER, &csv_rows)?;
    if !out.failures.is_empty() {
        for f in &out.failures {
            eprintln!("peak {}: {}", f.peak, f.message);
        }
        return Ok(2);
    }
    Ok(0)
}

#[derive(Serialize)]
struct BubbleLimitRow {
    #[serde(rename = "L")]
    scale: f64,
    #[serde(rename = "J_value")]
    j_value: f64,
    gap_to_sharp: f64,
}

#[derive(Serialize)]
struct BubbleLimitOut {
    n: u32,
    rows: Vec<BubbleLimitRow>,
    extrapolated: f64,
    reliable: bool,
    sharp_closed_form: f64,
}

fn cmd_bubble_limit(cfg: &RunConfig, scales: &str, csv: Option<&str>, json: bool) -> Result<i32> {
    let scales = parse_float_list(scales)?;
    let sharp = constants::sharp_constant_closed_form(cfg.dim)?;
    let lim = functional::concentration_limit(cfg.dim, &scales, cfg.quad_tol)?;
    let rows: Vec<BubbleLimitRow> = lim
        .scales
        .iter()
        .zip(lim.values.iter())
        .map(|(&scale, &j)| BubbleLimitRow {
            scale,
            j_value: j,
            gap_to_sharp: j - sharp,
        })
        .collect();
    let out = BubbleLimitOut {
        n: cfg.dim,
        rows,
        extrapolated: lim.extrapolated,
        reliable: lim.reliable,
        sharp_closed_form: sharp,
    };
    if json {
        return emit_json(&out);
    }
    let csv_rows: Vec<Vec<f64>> = out
        .rows
        .iter()
        .map(|r| vec![r.scale, r.j_value, r.gap_to_sharp])
        .collect();
    write_csv(csv.or(Some("-")), "L,J_value,gap_to_sharp", &csv_rows)?;
    if !out.reliable {
        eprintln!("extrapolation unreliable: need at least two scales");
    }
    println!("extrapolated,{}", fmt_float(out.extrapolated));
    Ok(0)
}

#[derive(Serialize)]
struct MinimizeOut {
    n: u32,
    rho: f64,
    j_value: f64,
    el_residual: f64,
    iterations: usize,
    converged: bool,
    peak: f64,
    mass: f64,
    epsilon: f64,
}

fn minimize_options(grid: usize, dim: u32, rho_frac: f64) -> MinimizeOptions {
    // near the critical mass the concentrated bubble is the right start
    let init = if rho_frac > 0.7 {
        let nf = dim as f64;
        let ell = (1.0 / rho_frac).powf(1.0 / (nf - 1.0)) - 1.0;
        InitGuess::Bubble {
            scale: ell.powf((nf - 1.0) / nf).clamp(1e-6, 1.0),
        }
    } else {
        InitGuess::Zero
    };
    MinimizeOptions {
        grid_size: grid,
        grid_kind: GridKind::Graded,
        init,
        ..MinimizeOptions::default()
    }
}

fn cmd_minimize(
    cfg: &RunConfig,
    rho_frac: f64,
    grid: usize,
    csv: Option<&str>,
    json: bool,
) -> Result<i32> {
    if !(rho_frac > 0.0 && rho_frac < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "rho fraction must lie in (0, 1), got {rho_frac}"
        )));
    }
    let c_crit = constants::critical_mass(cfg.dim)?;
    let rho = rho_frac * c_crit;
    let res = minimizer::minimize_subcritical(cfg.dim, rho, &minimize_options(grid, cfg.dim, rho_frac))?;
    let omega = constants::sphere_measure(cfg.dim)?;
    let beta = constants::bubble_height(cfg.dim)?;
    let z = omega
        * res
            .profile
            .integrate(|r, u, _| r.powi(cfg.dim as i32 - 1) * u.exp());
    let lambda = rho / z;
    let peak = res.profile.values()[0];
    let epsilon = ((beta.ln() - lambda.ln() - peak) / cfg.dim as f64).exp();
    let out = MinimizeOut {
        n: cfg.dim,
        rho,
        j_value: res.j_value,
        el_residual: res.el_residual,
        iterations: res.iterations,
        converged: res.converged,
        peak,
        mass: rho,
        epsilon,
    };
    if json {
        emit_json(&out)?;
    } else {
        write_csv(
            csv.or(Some("-")),
            "rho,J_value,el_residual,iterations,converged,peak,mass,epsilon",
            &[vec![
                out.rho,
                out.j_value,
                out.el_residual,
                out.iterations as f64,
                if out.converged { 1.0 } else { 0.0 },
                out.peak,
                out.mass,
                out.epsilon,
            ]],
        )?;
    }
    Ok(if out.converged { 0 } else { 2 })
}

#[derive(Serialize)]
struct TraceOut {
    n: u32,
    entries: Vec<TraceRow>,
    failures: Vec<TraceFailureRow>,
}

#[derive(Serialize)]
struct TraceRow {
    rho: f64,
    peak: f64,
    mass: f64,
    epsilon: f64,
    #[serde(rename = "J_value")]
    j_value: f64,
}

#[derive(Serialize)]
struct TraceFailureRow {
    rho: f64,
    message: String,
}

fn cmd_blowup_trace(
    cfg: &RunConfig,
    rho_fracs: &str,
    grid: usize,
    csv: Option<&str>,
    json: bool,
) -> Result<i32> {
    let fracs = parse_float_list(rho_fracs)?;
    let c_crit = constants::critical_mass(cfg.dim)?;
    let rhos: Vec<f64> = fracs.iter().map(|f| f * c_crit).collect();
    let first_frac = fracs.first().copied().unwrap_or(0.5);
    let trace = minimizer::trace_blowup(
        cfg.dim,
        &rhos,
        &minimize_options(grid, cfg.dim, first_frac),
    )?;
    let out = TraceOut {
        n: cfg.dim,
        entries: trace
            .entries
            .iter()
            .map(|e| TraceRow {
                rho: e.rho,
                peak: e.peak,
                mass: e.mass,
                epsilon: e.epsilon,
                j_value: e.j_value,
            })
            .collect(),
        failures: trace
            .failures
            .iter()
            .map(|f| TraceFailureRow {
                rho: f.rho,
                message: f.message.clone(),
            })
            .collect(),
    };
    if json {
        return emit_json(&out);
    }
    let rows: Vec<Vec<f64>> = out
        .entries
        .iter()
        .map(|e| vec![e.rho, e.peak, e.mass, e.epsilon, e.j_value])
        .collect();
    write_csv(csv.or(Some("-")), "rho,peak,mass,epsilon,J_value", &rows)?;
    if !out.failures.is_empty() {
        for f in &out.failures {
            eprintln!("rho {}: {}", f.rho, f.message);
        }
        return Ok(2);
    }
    Ok(0)
}

#[derive(Serialize)]
struct CapacityOut {
    n: u32,
    outer: f64,
    inner: f64,
    level: f64,
    capacity_level1: f64,
    dirichlet_energy: f64,
    n_modulus: f64,
}

fn cmd_capacity(cfg: &RunConfig, outer: f64, inner: f64, level: f64, json: bool) -> Result<i32> {
    let unit = AnnulusSpec::new(cfg.dim, outer, inner, 1.0)?;
    let spec = AnnulusSpec::new(cfg.dim, outer, inner, level)?;
    let cap = capacity::annulus_capacity(&unit)?;
    let out = CapacityOut {
        n: cfg.dim,
        outer,
        inner,
        level,
        capacity_level1: cap,
        dirichlet_energy: capacity::potential_energy_closed_form(&spec)?,
        n_modulus: capacity::n_modulus(cfg.dim, cap)?,
    };
    if json {
        return emit_json(&out);
    }
    println!("capacity_level1    {}", fmt_float(out.capacity_level1));
    println!("dirichlet_energy   {}", fmt_float(out.dirichlet_energy));
    println!("n_modulus          {}", fmt_float(out.n_modulus));
    Ok(0)
}

#[derive(Serialize)]
struct HarmonicRadiusOut {
    offset: f64,
    green_singular_coeff: f64,
    robin: f64,
    harmonic_radius: f64,
}

fn cmd_harmonic_radius(_cfg: &RunConfig, offset: f64, json: bool) -> Result<i32> {
    let d = harmonic_radius::harmonic_radius_disk(offset)?;
    let out = HarmonicRadiusOut {
        offset,
        green_singular_coeff: d.green_singular_coeff,
        robin: d.robin,
        harmonic_radius: d.harmonic_radius,
    };
    if json {
        return emit_json(&out);
    }
    println!("green_singular_coeff {}", fmt_float(out.green_singular_coeff));
    println!("robin                {}", fmt_float(out.robin));
    println!("harmonic_radius      {}", fmt_float(out.harmonic_radius));
    Ok(0)
}

#[derive(Serialize)]
struct ConcentrationLevelOut {
    n: u32,
    kind: String,
    parameter: f64,
    harmonic_radius: f64,
    concentration_level: f64,
}

fn cmd_concentration_level(
    cfg: &RunConfig,
    disk_offset: Option<f64>,
    ball_radius: Option<f64>,
    json: bool,
) -> Result<i32> {
    let (domain, kind, parameter) = match (disk_offset, ball_radius) {
        (Some(a), None) => (DomainSpec::disk_offset(a)?, "disk".to_string(), a),
        (None, Some(r)) => (DomainSpec::ball(cfg.dim, r)?, "ball".to_string(), r),
        (None, None) => (DomainSpec::ball(cfg.dim, 1.0)?, "ball".to_string(), 1.0),
        (Some(_), Some(_)) => unreachable!("clap conflicts_with"),
    };
    let data = harmonic_radius::robin_data(&domain)?;
    let level = harmonic_radius::concentration_level(cfg.dim, &domain)?;
    let out = ConcentrationLevelOut {
        n: cfg.dim,
        kind,
        parameter,
        harmonic_radius: data.harmonic_radius,
        concentration_level: level,
    };
    if json {
        return emit_json(&out);
    }
    println!("harmonic_radius      {}", fmt_float(out.harmonic_radius));
    println!("concentration_level  {}", fmt_float(out.concentration_level));
    Ok(0)
}

#[derive(Serialize)]
struct CriterionOut {
    n: u32,
    candidate_inf: f64,
    sup_log_radius: f64,
    bound: f64,
    verdict: String,
}

fn cmd_criterion(cfg: &RunConfig, inf: f64, sup_log_radius: f64, json: bool) -> Result<i32> {
    let verdict = harmonic_radius::existence_criterion(cfg.dim, inf, sup_log_radius)?;
    let bound =
        constants::sharp_constant_closed_form(cfg.dim)? - cfg.dim as f64 * sup_log_radius;
    let out = CriterionOut {
        n: cfg.dim,
        candidate_inf: inf,
        sup_log_radius,
        bound,
        verdict: match verdict {
            ExistenceVerdict::Achieved => "achieved".to_string(),
            ExistenceVerdict::BoundaryCase => "boundary_case".to_string(),
        },
    };
    if json {
        return emit_json(&out);
    }
    println!("bound    {}", fmt_float(out.bound));
    println!("verdict  {}", out.verdict);
    Ok(0)
}

#[derive(Serialize)]
struct PohozaevOut {
    n: u32,
    peak: f64,
    lambda: f64,
    mass: f64,
    lhs: f64,
    rhs: f64,
    residual: f64,
}

fn cmd_pohozaev(cfg: &RunConfig, peak: f64, json: bool) -> Result<i32> {
    let pt = radial_ode::branch_point(cfg.dim, peak, cfg.ode_tol)?;
    let (lhs, rhs) = radial_ode::pohozaev_sides(&pt)?;
    let out = PohozaevOut {
        n: cfg.dim,
        peak,
        lambda: pt.lambda,
        mass: pt.mass,
        lhs,
        rhs,
        residual: pt.pohozaev_residual,
    };
    if json {
        return emit_json(&out);
    }
    println!("lambda    {}", fmt_float(out.lambda));
    println!("mass      {}", fmt_float(out.mass));
    println!("lhs       {}", fmt_float(out.lhs));
    println!("rhs       {}", fmt_float(out.rhs));
    println!("residual  {}", fmt_float(out.residual));
    Ok(0)
}

fn cmd_verify_all(cfg: &RunConfig, level: LevelArg, json: bool) -> Result<i32> {
    let level = match level {
        LevelArg::Quick => VerifyLevel::Quick,
        LevelArg::Full => VerifyLevel::Full,
    };
    let report = verify::run_all(cfg.dim, level)?;
    if json {
        emit_json(&report)?;
    } else {
        print!("{}", report.render());
    }
    Ok(if report.all_passed { 0 } else { 1 })
}
