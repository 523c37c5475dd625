//! The acceptance runner behind `verify-all`: executes every acceptance
//! check for a given dimension and reports one pass/fail record per check,
//! with the measured value, the target, and the tolerance that was
//! enforced.
//!
//! Checks pinned to a specific dimension by their defining data (the disk
//! harmonic radii, the n = 2 transplantation) run regardless of the
//! requested dimension; everything else is parameterized by `n`.

use std::time::Instant;

use serde::Serialize;

use crate::capacity::{self, AnnulusSpec};
use crate::constants;
use crate::error::Result;
use crate::functional;
use crate::harmonic_radius::{self, DomainSpec};
use crate::minimizer::{self, InitGuess, MinimizeOptions};
use crate::profile::{GridKind, RadialProfile};
use crate::radial_ode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum VerifyLevel {
    Quick,
    Full,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub id: &'static str,
    pub name: &'static str,
    pub passed: bool,
    pub measured: f64,
    pub threshold: f64,
    pub detail: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub n: u32,
    pub level: VerifyLevel,
    pub checks: Vec<CheckResult>,
    pub all_passed: bool,
}

impl VerifyReport {
    /// Render the pass/fail table, one line per check.
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "verify-all  n = {}  level = {:?}\n",
            self.n, self.level
        ));
        out.push_str(&format!(
            "{:<24} {:>6} {:>14} {:>12} {:>8}  {}\n",
            "check", "status", "measured", "threshold", "time", "detail"
        ));
        for c in &self.checks {
            out.push_str(&format!(
                "{:<24} {:>6} {:>14.6e} {:>12.1e} {:>7.2}s  {}\n",
                c.id,
                if c.passed { "pass" } else { "FAIL" },
                c.measured,
                c.threshold,
                c.seconds,
                c.detail
            ));
        }
        out.push_str(if self.all_passed {
            "result: all checks passed\n"
        } else {
            "result: FAILURES PRESENT\n"
        });
        out
    }
}

fn run_check<F>(id: &'static str, name: &'static str, threshold: f64, f: F) -> CheckResult
where
    F: FnOnce() -> Result<(f64, String)>,
{
    let start = Instant::now();
    let outcome = f();
    let seconds = start.elapsed().as_secs_f64();
    match outcome {
        Ok((measured, detail)) => CheckResult {
            id,
            name,
            passed: measured.is_finite() && measured <= threshold,
            measured,
            threshold,
            detail,
            seconds,
        },
        Err(e) => CheckResult {
            id,
            name,
            passed: false,
            measured: f64::NAN,
            threshold,
            detail: format!("error: {e}"),
            seconds,
        },
    }
}

/// Peak height at which the branch mass reaches roughly 99.5% of C_n
/// along the scaled-bubble family: mass/C_n = (1+ell)^{1-n}, so ell must
/// shrink like 1/(n-1) to keep the compounded gap fixed.
fn near_critical_peak(n: u32) -> f64 {
    let nf = n as f64;
    let beta = constants::bubble_height(n).expect("n validated");
    beta.ln() - (nf - 1.0) * (0.005 / (nf - 1.0)).ln()
}

/// Bubble-ansatz initialization for the subcritical minimizer, offset by
/// half a scale so the optimizer genuinely travels.
fn bubble_init(n: u32, rho_over_c: f64) -> InitGuess {
    let nf = n as f64;
    let ell = (1.0 / rho_over_c).powf(1.0 / (nf - 1.0)) - 1.0;
    InitGuess::Bubble {
        scale: (1.5 * ell.powf((nf - 1.0) / nf)).clamp(1e-6, 1.0),
    }
}

/// Execute every acceptance check for the given dimension.
pub fn run_all(n: u32, level: VerifyLevel) -> Result<VerifyReport> {
    constants::check_dimension(n)?;
    let nf = n as f64;
    let sharp = constants::sharp_constant_closed_form(n)?;
    let c_crit = constants::critical_mass(n)?;
    let ode_tol = 1e-10;
    let mut checks = Vec::new();

    // 1. sharp constant: quadrature route vs closed form
    checks.push(run_check(
        "sharp_constant",
        "sharp constant, quadrature vs closed form",
        1e-8,
        || {
            let s = constants::sharp_constant(n, 1e-10)?;
            Ok((
                (s.by_quadrature - s.by_closed_form).abs(),
                format!("closed form {:.12}", s.by_closed_form),
            ))
        },
    ));

    // extra dimensions for the full level
    if level == VerifyLevel::Full {
        checks.push(run_check(
            "sharp_constant_n3_6",
            "sharp constant across n = 3..6",
            1e-8,
            || {
                let mut worst: f64 = 0.0;
                for m in 3..=6 {
                    let s = constants::sharp_constant(m, 1e-10)?;
                    worst = worst.max((s.by_quadrature - s.by_closed_form).abs());
                }
                Ok((worst, "max |quadrature - closed| over n = 3..6".into()))
            },
        ));
    }

    // 2-3. quantization of the branch masses + Pohozaev residuals
    let branch = if n == 2 {
        let peaks: Vec<f64> = (0..=6).map(|k| (8.0 * 10.0f64.powi(k)).ln()).collect();
        radial_ode::scan_branch(2, &peaks, ode_tol)?
    } else {
        let top = near_critical_peak(n);
        let peaks: Vec<f64> = (1..=4).map(|k| top * k as f64 / 4.0).collect();
        radial_ode::scan_branch(n, &peaks, ode_tol)?
    };

    checks.push(run_check(
        "quantization",
        "branch masses approach the quantized value",
        if n == 2 { 1e-6 } else { 0.01 },
        || {
            if !branch.failures.is_empty() {
                return Ok((
                    f64::INFINITY,
                    format!("{} scan failures", branch.failures.len()),
                ));
            }
            if n == 2 {
                let mut worst: f64 = 0.0;
                for (k, pt) in branch.points.iter().enumerate() {
                    let delta = 10.0f64.powi(k as i32);
                    let target = 8.0 * std::f64::consts::PI * delta / (1.0 + delta);
                    worst = worst.max((pt.mass - target).abs() / target);
                }
                let last = branch.points.last().unwrap().mass;
                if (last - c_crit).abs() / c_crit > 0.01 {
                    return Ok((f64::INFINITY, "final mass not within 1% of C_n".into()));
                }
                Ok((worst, "max relative error vs 8 pi delta/(1+delta)".into()))
            } else {
                for w in branch.points.windows(2) {
                    if w[1].mass <= w[0].mass {
                        return Ok((f64::INFINITY, "masses not increasing".into()));
                    }
                }
                let last = branch.points.last().unwrap().mass;
                Ok((
                    (last - c_crit).abs() / c_crit,
                    format!("mass at peak {:.2} vs C_n", branch.points.last().unwrap().peak_v),
                ))
            }
        },
    ));

    checks.push(run_check(
        "pohozaev",
        "Pohozaev residual on every converged point",
        1e-6,
        || {
            let worst = branch
                .points
                .iter()
                .map(|p| p.pohozaev_residual)
                .fold(0.0f64, f64::max);
            Ok((worst, format!("{} branch points", branch.points.len())))
        },
    ));

    // 4. bubble rescaling
    checks.push(run_check(
        "bubble_rescale",
        "rescaled profile matches the entire bubble",
        0.02,
        || {
            let peak = if n == 2 {
                (8.0e3f64).ln()
            } else {
                near_critical_peak(n)
            };
            let pt = radial_ode::branch_point(n, peak, ode_tol)?;
            let res = radial_ode::rescale_to_bubble(&pt)?;
            if res.flagged {
                return Ok((f64::INFINITY, "point flagged as outside blow-up regime".into()));
            }
            Ok((
                res.sup_deviation,
                format!("epsilon = {:.3e}", res.epsilon),
            ))
        },
    ));

    // 5. far-field slope, relative error against n^2/(n-1)
    checks.push(run_check(
        "farfield_slope",
        "far-field slope approaches n^2/(n-1)",
        0.05,
        || {
            let target = nf * nf / (nf - 1.0);
            // the bubble reaches its log-slope like s/(1+s) with
            // s = y^{n/(n-1)}; higher n converges slower, so the window
            // moves outward with the dimension
            let (peak, lo, hi) = if n == 2 {
                ((8.0e4f64).ln(), 5.0, 50.0)
            } else {
                let peak = near_critical_peak(n);
                let beta = constants::bubble_height(n)?;
                let eps = ((beta.ln() - peak) / nf).exp();
                if n == 3 {
                    (peak, 5.0, (0.8 / eps).min(30.0))
                } else {
                    (peak, 10.0, (0.8 / eps).min(80.0))
                }
            };
            let pt = radial_ode::branch_point(n, peak, ode_tol)?;
            let slope = radial_ode::farfield_slope(&pt, lo, hi)?;
            let mut rel = (slope - target).abs() / target;
            let mut detail = format!("slope {slope:.4} vs {target:.4}");
            if n == 2 && !(3.8..=4.0).contains(&slope) {
                rel = f64::INFINITY;
                detail.push_str(" (outside [3.8, 4.0])");
            }
            Ok((rel, detail))
        },
    ));

    // 6. concentration limit of the bubble family
    checks.push(run_check(
        "concentration_limit",
        "extrapolated J(Phi_L) reaches the sharp constant",
        1e-3,
        || {
            let scales = [1e-1, 1e-2, 1e-3, 1e-4];
            let lim = functional::concentration_limit(n, &scales, 1e-10)?;
            for w in lim.values.windows(2) {
                if !(w[1] < w[0]) {
                    return Ok((f64::INFINITY, "L-sequence not decreasing".into()));
                }
            }
            Ok((
                (lim.extrapolated - sharp).abs(),
                format!("extrapolated {:.9} ({:?} fit)", lim.extrapolated, lim.fit),
            ))
        },
    ));

    // 7. subcritical minimization, cross-validated against the branch
    let mut j_values: Vec<f64> = Vec::new();
    checks.push(run_check(
        "subcritical_minimization",
        "minimizer agrees with the shooting branch",
        if n == 2 { 1e-4 } else { 1e-3 },
        || {
            let opts = MinimizeOptions {
                grid_size: if n <= 3 { 512 } else { 1024 },
                grid_kind: GridKind::Graded,
                init: if n <= 3 {
                    InitGuess::Zero
                } else {
                    bubble_init(n, 0.5)
                },
                ..MinimizeOptions::default()
            };
            if n == 2 {
                let rho = 4.0 * std::f64::consts::PI;
                let res = minimizer::minimize_subcritical(2, rho, &opts)?;
                if !res.converged {
                    return Ok((f64::INFINITY, format!("not converged: {}", res.diagnostics)));
                }
                j_values.push(res.j_value);
                let shot = radial_ode::branch_point(2, 8.0f64.ln(), ode_tol)?;
                let j_shoot = functional::onofri_energy(2, rho, &shot.profile)?;
                let sup_gap = sup_gap(&res.profile, &shot.profile);
                if sup_gap > 1e-3 {
                    return Ok((
                        f64::INFINITY,
                        format!("profile sup gap {sup_gap:.3e} exceeds 1e-3"),
                    ));
                }
                Ok((
                    (res.j_value - j_shoot).abs(),
                    format!("sup gap {sup_gap:.2e}, J = {:.9}", res.j_value),
                ))
            } else {
                let rho = 0.5 * c_crit;
                let res = minimizer::minimize_subcritical(n, rho, &opts)?;
                if !res.converged || res.el_residual > 1e-6 {
                    return Ok((
                        f64::INFINITY,
                        format!(
                            "converged = {}, residual = {:.3e}",
                            res.converged, res.el_residual
                        ),
                    ));
                }
                j_values.push(res.j_value);
                let peak = match_branch_peak(n, rho, ode_tol)?;
                let pt = radial_ode::branch_point(n, peak, ode_tol)?;
                let j_shoot = functional::onofri_energy(n, rho, &pt.profile)?;
                Ok((
                    (res.j_value - j_shoot).abs(),
                    format!("matched branch peak {peak:.4}"),
                ))
            }
        },
    ));

    // 8. blow-up trace along the mass ladder
    checks.push(run_check(
        "blowup_trace",
        "peaks grow and energies decrease toward the sharp constant",
        0.0,
        || {
            let opts = MinimizeOptions {
                grid_size: if n <= 3 { 512 } else { 1024 },
                grid_kind: GridKind::Graded,
                init: if n <= 3 {
                    InitGuess::Zero
                } else {
                    bubble_init(n, 0.9)
                },
                ..MinimizeOptions::default()
            };
            // the n = 2 ladder is the pinned acceptance case; for n >= 4
            // the last rung stays where the graded grid still resolves
            // the concentration scale
            let fracs: [f64; 3] = if n <= 3 {
                [0.9, 0.99, 0.999]
            } else {
                [0.9, 0.97, 0.99]
            };
            let rhos: Vec<f64> = fracs.iter().map(|f| f * c_crit).collect();
            let trace = minimizer::trace_blowup(n, &rhos, &opts)?;
            if !trace.failures.is_empty() {
                return Ok((
                    f64::INFINITY,
                    format!("{} rungs failed", trace.failures.len()),
                ));
            }
            for w in trace.entries.windows(2) {
                if !(w[1].peak > w[0].peak) || !(w[1].j_value < w[0].j_value) {
                    return Ok((f64::INFINITY, "monotonicity violated along ladder".into()));
                }
            }
            for e in &trace.entries {
                j_values.push(e.j_value);
                if !(e.j_value > sharp) {
                    return Ok((f64::INFINITY, "energy crossed the sharp constant".into()));
                }
            }
            // measured: negative final gap means failure; pass needs gap > 0
            let gap = trace.entries.last().unwrap().j_value - sharp;
            Ok((
                if gap > 0.0 { 0.0 } else { f64::INFINITY },
                format!("final gap to sharp constant {gap:.3e} > 0"),
            ))
        },
    ));

    // criterion 7 second half: no computed energy beats the sharp constant
    checks.push(run_check(
        "energy_lower_bound",
        "every computed J stays above the sharp constant",
        1e-6,
        || {
            let worst = j_values
                .iter()
                .map(|j| sharp - j)
                .fold(f64::NEG_INFINITY, f64::max);
            Ok((
                worst.max(0.0),
                format!("{} energies checked", j_values.len()),
            ))
        },
    ));

    // 9. capacity: quadrature energy vs closed form, and the concentric
    // change-of-domain identity
    checks.push(run_check(
        "capacity",
        "capacity potential energy and modulus shift",
        1e-10,
        || {
            let mut dims = vec![2u32, 3, n];
            if level == VerifyLevel::Full {
                dims.extend_from_slice(&[4, 5, 6]);
            }
            dims.sort_unstable();
            dims.dedup();
            let mut worst: f64 = 0.0;
            for &m in &dims {
                for &(outer, inner, tl) in
                    &[(1.0, 0.2, 1.0), (2.0, 0.1, 0.7), (5.0, 0.5, 2.0)]
                {
                    let spec = AnnulusSpec::new(m, outer, inner, tl)?;
                    let quad = capacity::potential_energy_quadrature(&spec, 1e-13)?;
                    let exact = capacity::potential_energy_closed_form(&spec)?;
                    worst = worst.max((quad - exact).abs() / exact);
                }
                let shift = capacity::modulus_shift_check(m, 1.0, 2.0, &[0.1, 1e-3])?;
                if shift > 1e-12 {
                    return Ok((
                        f64::INFINITY,
                        format!("modulus shift deviation {shift:.3e} above 1e-12"),
                    ));
                }
            }
            Ok((worst, format!("dims {dims:?}")))
        },
    ));

    // 10. harmonic radius and concentration levels
    checks.push(run_check(
        "harmonic_radius",
        "disk harmonic radii and concentration levels",
        1e-12,
        || {
            let mut worst: f64 = 0.0;
            for &(a, expect) in &[
                (0.0, 1.0),
                (0.25, 0.9375),
                (0.5, 0.75),
                (0.9, 1.0 - 0.9 * 0.9),
            ] {
                let hr = harmonic_radius::harmonic_radius_disk(a)?.harmonic_radius;
                worst = worst.max((hr - expect).abs());
            }
            let lvl =
                harmonic_radius::concentration_level(2, &DomainSpec::disk_offset(0.5)?)?;
            let expected = constants::sharp_constant_closed_form(2)? - 2.0 * 0.75f64.ln();
            worst = worst.max((lvl - expected).abs());
            // ball center at the requested dimension composes exactly
            let ball = harmonic_radius::concentration_level(n, &DomainSpec::ball(n, 1.0)?)?;
            worst = worst.max((ball - sharp).abs());
            Ok((worst, "offsets {0, 0.25, 0.5, 0.9} and ball center".into()))
        },
    ));

    // 11. transplantation on the disk at offset 1/2
    checks.push(run_check(
        "transplantation",
        "transplantation preserves energy, expands volume",
        1e-6,
        || {
            let r = 0.75;
            let profile = truncated_bubble_profile(2, r, r / 2.0)?;
            let rep = harmonic_radius::transplant_check(0.5, &profile)?;
            if rep.volume_ratio < 1.0 - 1e-8 {
                return Ok((
                    f64::INFINITY,
                    format!("volume ratio {} fell below 1", rep.volume_ratio),
                ));
            }
            if rep.levelset_capacity_gap > 1e-8 {
                return Ok((
                    f64::INFINITY,
                    format!("level-set capacity gap {:.3e}", rep.levelset_capacity_gap),
                ));
            }
            Ok((
                rep.energy_gap,
                format!("volume ratio {:.6}", rep.volume_ratio),
            ))
        },
    ));

    let all_passed = checks.iter().all(|c| c.passed);
    Ok(VerifyReport {
        n,
        level,
        checks,
        all_passed,
    })
}

/// Truncated bubble `eta_0(t/scale) - eta_0(R/scale)` sampled densely.
pub fn truncated_bubble_profile(n: u32, domain_radius: f64, scale: f64) -> Result<RadialProfile> {
    let nodes_per_decade = 512;
    let r_min = domain_radius * 1e-5;
    let decades = (domain_radius / r_min).log10();
    let count = (decades * nodes_per_decade as f64).ceil() as usize;
    let edge = constants::bubble_value(n, domain_radius / scale)?;
    let mut nodes = vec![0.0];
    let mut values = vec![constants::bubble_value(n, 0.0)? - edge];
    let mut derivs = vec![0.0];
    for k in 0..=count {
        let t = if k == count {
            domain_radius
        } else {
            r_min * 10f64.powf(decades * k as f64 / count as f64)
        };
        nodes.push(t);
        values.push(constants::bubble_value(n, t / scale)? - edge);
        derivs.push(constants::bubble_deriv(n, t / scale)? / scale);
    }
    RadialProfile::new(nodes, values, derivs, GridKind::Graded)
}

/// Largest nodal gap between two profiles over the finer grid.
fn sup_gap(a: &RadialProfile, b: &RadialProfile) -> f64 {
    let mut worst = 0.0f64;
    for (&r, &v) in a.nodes().iter().zip(a.values().iter()) {
        worst = worst.max((v - b.value_at(r)).abs());
    }
    for (&r, &v) in b.nodes().iter().zip(b.values().iter()) {
        worst = worst.max((v - a.value_at(r)).abs());
    }
    worst
}

/// Secant search for the peak whose branch mass equals `rho`.
fn match_branch_peak(n: u32, rho: f64, ode_tol: f64) -> Result<f64> {
    let nf = n as f64;
    let beta = constants::bubble_height(n)?;
    let c_crit = constants::critical_mass(n)?;
    // family-based initializer: mass = C_n (1 + ell)^{1-n}
    let ell = (c_crit / rho).powf(1.0 / (nf - 1.0)) - 1.0;
    let mut p0 = beta.ln() - (nf - 1.0) * ell.ln();
    let mut f0 = radial_ode::branch_point(n, p0, ode_tol)?.mass - rho;
    let mut p1 = p0 + 0.05;
    let mut f1 = radial_ode::branch_point(n, p1, ode_tol)?.mass - rho;
    for _ in 0..40 {
        if f1.abs() <= 1e-10 * rho {
            return Ok(p1);
        }
        if (f1 - f0).abs() < 1e-300 {
            break;
        }
        let p2 = p1 - f1 * (p1 - p0) / (f1 - f0);
        p0 = p1;
        f0 = f1;
        p1 = p2;
        f1 = radial_ode::branch_point(n, p1, ode_tol)?.mass - rho;
    }
    Ok(p1)
}
