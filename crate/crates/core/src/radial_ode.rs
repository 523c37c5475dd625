//! Shooting solver for the radial Liouville-type equation
//! `-div(|v'|^{n-2} v') = e^v` on a ball, and the derived mean field
//! solution branch.
//!
//! The initial value problem is integrated as the first-order system
//!
//! ```text
//!     v' = -(m / r^{n-1})^{1/(n-1)},      m' = r^{n-1} e^v,
//!     v(0) = peak,                         m(0) = 0,
//! ```
//!
//! with an adaptive embedded Runge-Kutta 5(4) pair (Dormand-Prince). The
//! radial derivative `v' ~ r^{1/(n-1)}` is not smooth at the origin for
//! n > 2, so integration starts from a small `r0` using the local series
//! `v = c - (e^c/n)^{1/(n-1)} ((n-1)/n) r^{n/(n-1)}`, `m = e^c r^n / n`.
//! When the peak exceeds `SHIFT_THRESHOLD` the shifted unknowns
//! `w = v - peak`, `m exp(-peak)` are integrated instead so that `e^v`
//! never overflows.

use rayon::prelude::*;
use serde::Serialize;

use crate::constants::{self, bubble_height, critical_mass, sphere_measure};
use crate::error::{Error, Result};
use crate::functional;
use crate::profile::{GridKind, RadialProfile};

/// Peak height beyond which the integration works on shifted unknowns.
const SHIFT_THRESHOLD: f64 = 500.0;

/// Fraction of the integration span used as the maximum step size; keeps
/// the accepted-step grid dense enough for the Hermite quadrature that
/// downstream integrals run on.
const MAX_STEP_FRACTION: f64 = 0.02;

const MAX_STEPS: usize = 2_000_000;

/// One solved mean field solution on the unit ball.
///
/// `profile` holds `u = v - v(1)` (so u(1) = 0); `lambda = e^{v(1)}` is the
/// multiplier in `-div(|grad u|^{n-2} grad u) = lambda e^u`; `mass` is
/// `lambda int e^u = omega m(1)`; `energy_j` is the critical functional
/// `J_{C_n}(u)`.
#[derive(Debug, Clone, Serialize)]
pub struct BranchPoint {
    pub n: u32,
    pub peak_v: f64,
    pub lambda: f64,
    pub mass: f64,
    pub peak_u: f64,
    pub energy_j: f64,
    pub pohozaev_residual: f64,
    pub profile: RadialProfile,
}

/// An ordered family of branch points, scanned by peak height.
#[derive(Debug, Clone, Serialize)]
pub struct SolutionBranch {
    pub n: u32,
    pub points: Vec<BranchPoint>,
    pub failures: Vec<ScanFailure>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanFailure {
    pub peak: f64,
    pub message: String,
}

/// Result of rescaling a branch point onto the entire bubble.
#[derive(Debug, Clone, Serialize)]
pub struct RescaledBubble {
    pub epsilon: f64,
    pub eta: RadialProfile,
    pub sup_deviation: f64,
    /// Set when the point is not in the blow-up regime (mass more than 20%
    /// away from C_n, or epsilon >= 1).
    pub flagged: bool,
}

/// Radius cap for the rescaled-bubble comparison window.
const RESCALE_RADIUS_CAP: f64 = 10.0;

// Dormand-Prince 5(4) coefficients.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

struct ShiftedSystem {
    n: u32,
    /// shift s: v = w + s, m = mhat e^s
    shift: f64,
}

impl ShiftedSystem {
    #[inline]
    fn eval(&self, r: f64, y: [f64; 2]) -> [f64; 2] {
        let nf = self.n as f64;
        let [w, mhat] = y;
        let dmhat = r.powi(self.n as i32 - 1) * w.exp();
        let dw = if mhat > 0.0 {
            -(((self.shift + mhat.ln() - (nf - 1.0) * r.ln()) / (nf - 1.0)).exp())
        } else {
            0.0
        };
        [dw, dmhat]
    }
}

struct RawShot {
    /// profile of v (values `w + shift`)
    profile: RadialProfile,
    /// ln m(r_end), with m the true (unshifted) mass integral
    ln_m_end: f64,
}

fn shoot_raw(n: u32, peak: f64, r_end: f64, ode_tol: f64) -> Result<RawShot> {
    constants::check_dimension(n)?;
    if !(ode_tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "ode tolerance must be > 0, got {ode_tol}"
        )));
    }
    if !(r_end > 0.0) || !r_end.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "shooting radius must be positive and finite, got {r_end}"
        )));
    }
    if !peak.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "peak must be finite, got {peak}"
        )));
    }

    let nf = n as f64;
    let beta = bubble_height(n)?;
    // natural length scale of the solution: L = (beta e^{-peak})^{1/n}
    let ln_scale = (beta.ln() - peak) / nf;
    let r0 = 1e-6 * ln_scale.min(0.0).exp() * r_end.min(1.0);
    if r0 < f64::MIN_POSITIVE * 1e8 {
        return Err(Error::InvalidArgument(format!(
            "peak {peak} too large: series start radius underflows"
        )));
    }

    let shift = if peak > SHIFT_THRESHOLD { peak } else { 0.0 };
    let sys = ShiftedSystem { n, shift };
    let p = nf / (nf - 1.0);

    // local series at r0
    let ln_a = (peak - nf.ln()) / (nf - 1.0) + ((nf - 1.0) / nf).ln() + p * r0.ln();
    let a = ln_a.exp();
    let w0 = (peak - shift) - a;
    let ln_mhat0 =
        (peak - shift) + nf * r0.ln() - nf.ln() + (1.0 - a * nf / (nf + p)).max(0.1).ln();
    let mhat0 = ln_mhat0.exp();
    if !(mhat0 > 0.0) || !w0.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "peak {peak} outside the representable range of the solver"
        )));
    }

    let mut r = r0;
    let mut y = [w0, mhat0];
    let mut k1 = sys.eval(r, y);
    let h_max = MAX_STEP_FRACTION * r_end;
    let mut h = (r0 * 0.5).min(h_max);

    let mut nodes = vec![0.0, r0];
    let mut values = vec![peak, w0 + shift];
    let mut derivs = vec![0.0, k1[0]];

    let mut steps = 0usize;
    while r < r_end {
        steps += 1;
        if steps > MAX_STEPS {
            return Err(Error::NonConvergence(format!(
                "shooting exceeded {MAX_STEPS} steps at r = {r:.6e} (peak {peak}, n = {n})"
            )));
        }
        h = h.min(h_max).min(r_end - r);

        let y2 = [y[0] + h * A21 * k1[0], y[1] + h * A21 * k1[1]];
        let k2 = sys.eval(r + C2 * h, y2);
        let y3 = [
            y[0] + h * (A31 * k1[0] + A32 * k2[0]),
            y[1] + h * (A31 * k1[1] + A32 * k2[1]),
        ];
        let k3 = sys.eval(r + C3 * h, y3);
        let y4 = [
            y[0] + h * (A41 * k1[0] + A42 * k2[0] + A43 * k3[0]),
            y[1] + h * (A41 * k1[1] + A42 * k2[1] + A43 * k3[1]),
        ];
        let k4 = sys.eval(r + C4 * h, y4);
        let y5 = [
            y[0] + h * (A51 * k1[0] + A52 * k2[0] + A53 * k3[0] + A54 * k4[0]),
            y[1] + h * (A51 * k1[1] + A52 * k2[1] + A53 * k3[1] + A54 * k4[1]),
        ];
        let k5 = sys.eval(r + C5 * h, y5);
        let y6 = [
            y[0] + h * (A61 * k1[0] + A62 * k2[0] + A63 * k3[0] + A64 * k4[0] + A65 * k5[0]),
            y[1] + h * (A61 * k1[1] + A62 * k2[1] + A63 * k3[1] + A64 * k4[1] + A65 * k5[1]),
        ];
        let k6 = sys.eval(r + h, y6);
        let y_new = [
            y[0] + h * (B1 * k1[0] + B3 * k3[0] + B4 * k4[0] + B5 * k5[0] + B6 * k6[0]),
            y[1] + h * (B1 * k1[1] + B3 * k3[1] + B4 * k4[1] + B5 * k5[1] + B6 * k6[1]),
        ];
        let k7 = sys.eval(r + h, y_new);

        if !y_new[0].is_finite() || !y_new[1].is_finite() {
            return Err(Error::OdeBlowUp { radius: r + h });
        }

        let mut err_norm_sq = 0.0;
        for i in 0..2 {
            let e = h
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = ode_tol + ode_tol * y[i].abs().max(y_new[i].abs());
            err_norm_sq += (e / sc) * (e / sc);
        }
        let err_norm = (0.5 * err_norm_sq).sqrt();

        if err_norm <= 1.0 {
            r += h;
            y = y_new;
            k1 = k7;
            nodes.push(r);
            values.push(y[0] + shift);
            derivs.push(k7[0]);
        }

        let factor = if err_norm > 0.0 {
            (0.9 * err_norm.powf(-0.2)).clamp(0.2, 5.0)
        } else {
            5.0
        };
        h *= factor;
        if h < 1e-14 * r_end {
            return Err(Error::NonConvergence(format!(
                "step size underflow at r = {r:.6e} (peak {peak}, n = {n})"
            )));
        }
    }

    let ln_m_end = shift + y[1].ln();
    let profile = RadialProfile::new(nodes, values, derivs, GridKind::Graded)?;
    Ok(RawShot { profile, ln_m_end })
}

/// Integrate the radial IVP from the given peak height out to `r_end`,
/// returning the profile of `v`.
pub fn shoot(n: u32, peak: f64, r_end: f64, ode_tol: f64) -> Result<RadialProfile> {
    shoot_raw(n, peak, r_end, ode_tol).map(|s| s.profile)
}

/// Tolerance accepted for the Pohozaev residual of a converged point.
fn residual_tolerance(ode_tol: f64) -> f64 {
    (ode_tol * 1e4).max(1e-6)
}

/// Solve to the unit sphere and normalize into a mean field solution:
/// `u = v - v(1)`, `lambda = e^{v(1)}`, `mass = omega m(1)`.
pub fn branch_point(n: u32, peak: f64, ode_tol: f64) -> Result<BranchPoint> {
    let shot = shoot_raw(n, peak, 1.0, ode_tol)?;
    let omega = sphere_measure(n)?;
    let c_crit = critical_mass(n)?;

    let v1 = shot.profile.boundary_value();
    let lambda = v1.exp();
    let mass = omega * shot.ln_m_end.exp();
    let peak_u = (peak - v1).max(0.0);
    let profile = shot.profile.shifted(-v1);

    if !(mass > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "peak {peak} too negative: mass underflows"
        )));
    }
    if mass >= c_crit {
        return Err(Error::NonConvergence(format!(
            "computed mass {mass:.6e} reached the critical value {c_crit:.6e}; \
             solver accuracy exhausted at peak {peak}"
        )));
    }
    if !profile.is_non_increasing(1e-9) {
        return Err(Error::NonConvergence(format!(
            "solution profile not non-increasing at peak {peak}"
        )));
    }

    let mut point = BranchPoint {
        n,
        peak_v: peak,
        lambda,
        mass,
        peak_u,
        energy_j: 0.0,
        pohozaev_residual: 0.0,
        profile,
    };
    point.energy_j = functional::onofri_energy(n, c_crit, &point.profile)?;
    point.pohozaev_residual = pohozaev_residual(&point);
    let allowed = residual_tolerance(ode_tol);
    if point.pohozaev_residual > allowed {
        return Err(Error::NonConvergence(format!(
            "Pohozaev residual {:.3e} exceeds {allowed:.3e} at peak {peak} (n = {n})",
            point.pohozaev_residual
        )));
    }
    Ok(point)
}

/// Sweep the branch over a family of peak heights. Failed peaks are
/// recorded and do not abort the scan; points come back sorted by peak.
pub fn scan_branch(n: u32, peaks: &[f64], ode_tol: f64) -> Result<SolutionBranch> {
    constants::check_dimension(n)?;
    if peaks.is_empty() {
        return Err(Error::InvalidArgument("peak list must be nonempty".into()));
    }
    if peaks.iter().any(|p| !p.is_finite()) {
        return Err(Error::InvalidArgument("peaks must be finite".into()));
    }
    let mut sorted = peaks.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));

    let results: Vec<(f64, Result<BranchPoint>)> = sorted
        .par_iter()
        .map(|&peak| (peak, branch_point(n, peak, ode_tol)))
        .collect();

    let mut points = Vec::new();
    let mut failures = Vec::new();
    for (peak, res) in results {
        match res {
            Ok(pt) => points.push(pt),
            Err(e) => failures.push(ScanFailure {
                peak,
                message: e.to_string(),
            }),
        }
    }
    Ok(SolutionBranch {
        n,
        points,
        failures,
    })
}

/// The two sides of the boundary Pohozaev identity
/// `omega |u'(1)|^n = (n^2/(n-1)) lambda int_B (e^u - 1)`,
/// evaluated from the stored profile by quadrature.
pub fn pohozaev_sides(point: &BranchPoint) -> Result<(f64, f64)> {
    let n = point.n;
    let nf = n as f64;
    let omega = sphere_measure(n)?;
    let lhs = omega * point.profile.boundary_deriv().abs().powi(n as i32);
    let vol_exp = omega
        * point
            .profile
            .integrate(|r, u, _| r.powi(n as i32 - 1) * u.exp());
    let rhs = nf * nf / (nf - 1.0) * point.lambda * (vol_exp - omega / nf);
    Ok((lhs, rhs))
}

/// Relative residual of the boundary Pohozaev identity. Both sides vanish
/// for the zero profile, in which case 0 is returned.
pub fn pohozaev_residual(point: &BranchPoint) -> f64 {
    let (lhs, rhs) = match pohozaev_sides(point) {
        Ok(t) => t,
        Err(_) => return f64::NAN,
    };
    let scale = lhs.abs().max(rhs.abs());
    if scale < 1e-280 {
        0.0
    } else {
        (lhs - rhs).abs() / scale
    }
}

/// Blow-up rescaling `eta(r) = u(eps r) - u(0) + ln beta_n` with
/// `eps = (beta_n / (lambda e^{u(0)}))^{1/n}`, compared against the entire
/// bubble on `[0, min(10, 1/eps)]`.
pub fn rescale_to_bubble(point: &BranchPoint) -> Result<RescaledBubble> {
    let n = point.n;
    let beta = bubble_height(n)?;
    let c_crit = critical_mass(n)?;
    // lambda e^{peak_u} = e^{peak_v}, so eps = (beta e^{-peak_v})^{1/n}
    let epsilon = ((beta.ln() - point.peak_v) / n as f64).exp();
    let flagged = (point.mass - c_crit).abs() / c_crit > 0.2 || epsilon >= 1.0;

    let y_max = (1.0 / epsilon).min(RESCALE_RADIUS_CAP);
    let shift = beta.ln() - point.peak_u;

    let mut nodes = Vec::new();
    let mut values = Vec::new();
    let mut derivs = Vec::new();
    for (i, &r) in point.profile.nodes().iter().enumerate() {
        let y = r / epsilon;
        if y > y_max * (1.0 + 1e-12) {
            break;
        }
        nodes.push(y);
        values.push(point.profile.values()[i] + shift);
        derivs.push(epsilon * point.profile.derivs()[i]);
    }
    if nodes.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "only {} profile nodes inside the rescaling window",
            nodes.len()
        )));
    }
    let eta = RadialProfile::new(nodes, values, derivs, GridKind::Graded)?;

    let mut sup_deviation = 0.0f64;
    let samples = 2001;
    for k in 0..samples {
        let y = y_max * k as f64 / (samples - 1) as f64;
        let eta_val = point.profile.value_at(epsilon * y) + shift;
        let dev = (eta_val - constants::bubble_value(n, y)?).abs();
        sup_deviation = sup_deviation.max(dev);
    }

    Ok(RescaledBubble {
        epsilon,
        eta,
        sup_deviation,
        flagged,
    })
}

/// Least-squares slope of the rescaled profile against `-ln r` over a
/// radius window `[fit_lo, fit_hi]` in bubble coordinates. Tends to
/// `n^2/(n-1)` as the mass approaches C_n.
pub fn farfield_slope(point: &BranchPoint, fit_lo: f64, fit_hi: f64) -> Result<f64> {
    let n = point.n;
    let beta = bubble_height(n)?;
    let epsilon = ((beta.ln() - point.peak_v) / n as f64).exp();
    if !(fit_lo >= 1.0) || !(fit_hi > fit_lo) {
        return Err(Error::InvalidArgument(format!(
            "fit range must satisfy 1 <= lo < hi, got [{fit_lo}, {fit_hi}]"
        )));
    }
    if fit_hi > 1.0 / epsilon * (1.0 + 1e-12) {
        return Err(Error::InvalidArgument(format!(
            "fit range [{fit_lo}, {fit_hi}] extends past the rescaled domain 1/eps = {:.3e}",
            1.0 / epsilon
        )));
    }
    let shift = beta.ln() - point.peak_u;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (i, &r) in point.profile.nodes().iter().enumerate() {
        let y = r / epsilon;
        if y >= fit_lo && y <= fit_hi {
            xs.push(-(y.ln()));
            ys.push(point.profile.values()[i] + shift);
        }
    }
    fit_slope(&xs, &ys)
}

/// Simple least-squares slope, shared with the far-field fit tests.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "need at least 4 samples for a slope fit, got {}",
            xs.len()
        )));
    }
    let m = xs.len() as f64;
    let x_bar = xs.iter().sum::<f64>() / m;
    let y_bar = ys.iter().sum::<f64>() / m;
    let mut cov = 0.0;
    let mut var = 0.0;
    for (x, y) in xs.iter().zip(ys.iter()) {
        cov += (x - x_bar) * (y - y_bar);
        var += (x - x_bar) * (x - x_bar);
    }
    if var == 0.0 {
        return Err(Error::InsufficientData("degenerate abscissae".into()));
    }
    Ok(cov / var)
}

/// Closed-form data of the scaled-bubble family: for a shot from height
/// `peak`, the exact solution is `eta_0(r/L) - n ln L` with
/// `L = (beta_n e^{-peak})^{1/n}`. Only used by tests and diagnostics as
/// the independent oracle for the solver.
pub mod oracle {
    use crate::constants::{bubble_height, critical_mass};
    use crate::error::Result;

    /// (lambda, mass, peak_u) of the exact solution at the given peak.
    pub fn exact_branch_data(n: u32, peak: f64) -> Result<(f64, f64, f64)> {
        let nf = n as f64;
        let beta = bubble_height(n)?;
        let c_crit = critical_mass(n)?;
        // ell = L^{n/(n-1)} = (beta e^{-peak})^{1/(n-1)}
        let ell = ((beta.ln() - peak) / (nf - 1.0)).exp();
        let mass = c_crit * (1.0 + ell).powi(-(n as i32 - 1));
        let peak_u = nf * (1.0 / ell).ln_1p();
        let lambda = (peak - peak_u).exp();
        Ok((lambda, mass, peak_u))
    }

    /// Exact v(r) for the same family.
    pub fn exact_profile_value(n: u32, peak: f64, r: f64) -> Result<f64> {
        let nf = n as f64;
        let beta = bubble_height(n)?;
        let ln_scale = (beta.ln() - peak) / nf;
        let y = r / ln_scale.exp();
        Ok(crate::constants::bubble_value(n, y)? - nf * ln_scale)
    }
}
