//! Dimensional constants of the mean field problem, with two independent
//! routes to the sharp Moser-Onofri constant on the unit ball.
//!
//! Everything here is a function of the integer dimension `n >= 2` alone.
//! The only hand-typed numbers are exact integers, `PI`, and `sqrt(PI)`;
//! every derived constant is composed from its defining formula so that
//! algebraic identities between them survive to within a few ulps.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quad::{self, QuadOptions};

/// All dimension-n constants in one validated bundle.
///
/// - `omega`: surface measure of the unit sphere in R^n, `2 pi^{n/2} / Gamma(n/2)`
/// - `alpha`: sharp Moser exponent `n omega^{1/(n-1)}`
/// - `c_crit`: critical mass `(n^2/(n-1))^{n-1} omega`
/// - `beta`: bubble height `n (n^2/(n-1))^{n-1}`
/// - `quant_mass`: single-bubble quantized mass `(n alpha/(n-1))^{n-1}`
/// - `sharp`: the sharp constant `ln(n/omega) - H_{n-1}` (closed form)
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DimensionConstants {
    pub n: u32,
    pub omega: f64,
    pub alpha: f64,
    pub c_crit: f64,
    pub beta: f64,
    pub quant_mass: f64,
    pub sharp: f64,
}

impl DimensionConstants {
    /// Total mass carried by a blow-up with `m` concentration points:
    /// `m (n alpha/(n-1))^{n-1}`. Radial solvers only realize m = 1; the
    /// higher multiples are exposed as constants.
    pub fn quantized_mass(&self, m: u32) -> f64 {
        m as f64 * self.quant_mass
    }
}

pub(crate) fn check_dimension(n: u32) -> Result<()> {
    if n < 2 {
        Err(Error::DimensionTooSmall(n))
    } else {
        Ok(())
    }
}

/// Gamma(half/2) by the exact half-integer recursion from Gamma(1) = 1 and
/// Gamma(1/2) = sqrt(pi). Exact up to f64 rounding of the products.
fn gamma_half_integer(half: u32) -> f64 {
    debug_assert!(half >= 1);
    let mut acc = if half.is_multiple_of(2) { 1.0 } else { PI.sqrt() };
    let mut k = if half.is_multiple_of(2) { 2 } else { 1 };
    while k + 2 <= half {
        acc *= k as f64 / 2.0;
        k += 2;
    }
    acc
}

/// Exact harmonic number H_k as a reduced rational, converted to f64 last.
pub fn harmonic_number(k: u32) -> f64 {
    let mut num: u128 = 0;
    let mut den: u128 = 1;
    for j in 1..=k as u128 {
        num = num * j + den;
        den *= j;
        let g = gcd(num, den);
        num /= g;
        den /= g;
    }
    num as f64 / den as f64
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a.max(1)
}

/// Surface measure of the unit sphere in R^n: `2 pi^{n/2} / Gamma(n/2)`.
pub fn sphere_measure(n: u32) -> Result<f64> {
    check_dimension(n)?;
    let pi_pow = if n.is_multiple_of(2) {
        PI.powi(n as i32 / 2)
    } else {
        PI.powi((n as i32 - 1) / 2) * PI.sqrt()
    };
    Ok(2.0 * pi_pow / gamma_half_integer(n))
}

/// Bubble height beta_n = n (n^2/(n-1))^{n-1}.
pub fn bubble_height(n: u32) -> Result<f64> {
    check_dimension(n)?;
    let nf = n as f64;
    Ok(nf * (nf * nf / (nf - 1.0)).powi(n as i32 - 1))
}

/// Critical mass C_n = (n^2/(n-1))^{n-1} omega_{n-1}.
pub fn critical_mass(n: u32) -> Result<f64> {
    let nf = n as f64;
    Ok((nf * nf / (nf - 1.0)).powi(n as i32 - 1) * sphere_measure(n)?)
}

/// Sharp Moser-Onofri constant on the unit ball, closed form
/// `ln(n/omega_{n-1}) - H_{n-1}`.
pub fn sharp_constant_closed_form(n: u32) -> Result<f64> {
    let omega = sphere_measure(n)?;
    Ok((n as f64 / omega).ln() - harmonic_number(n - 1))
}

/// Populate every dimensional constant, composed exactly as defined.
pub fn bundle(n: u32) -> Result<DimensionConstants> {
    let omega = sphere_measure(n)?;
    let nf = n as f64;
    let alpha = nf * omega.powf(1.0 / (nf - 1.0));
    let c_crit = (nf * nf / (nf - 1.0)).powi(n as i32 - 1) * omega;
    let beta = nf * (nf * nf / (nf - 1.0)).powi(n as i32 - 1);
    let quant_mass = (nf * alpha / (nf - 1.0)).powi(n as i32 - 1);
    let sharp = (nf / omega).ln() - harmonic_number(n - 1);
    Ok(DimensionConstants {
        n,
        omega,
        alpha,
        c_crit,
        beta,
        quant_mass,
        sharp,
    })
}

/// The entire bubble eta_0 at a given radius:
/// `ln beta_n - n ln(1 + r^{n/(n-1)})`.
pub fn bubble_value(n: u32, radius: f64) -> Result<f64> {
    check_dimension(n)?;
    if !(radius >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "bubble radius must be >= 0, got {radius}"
        )));
    }
    let nf = n as f64;
    Ok(bubble_height(n)?.ln() - nf * radius.powf(nf / (nf - 1.0)).ln_1p())
}

/// Radial derivative of the bubble, `eta_0'(r)`.
pub fn bubble_deriv(n: u32, radius: f64) -> Result<f64> {
    check_dimension(n)?;
    if radius == 0.0 {
        return Ok(0.0);
    }
    let nf = n as f64;
    let p = nf / (nf - 1.0);
    let rp = radius.powf(p);
    Ok(-nf * p * rp / (1.0 + rp) / radius)
}

/// Shared change of variables for the improper bubble integrals: with
/// `s = r^{n/(n-1)}` and `t = s/(1+s)`, the half-line maps to (0,1) and
/// `omega r^{n-1} dr = omega ((n-1)/n) s^{n-2} (1-t)^{-2} dt`. The weight
/// `w(t)` below collects that together with `e^{eta_0} = beta (1-t)^n`,
/// leaving `omega beta ((n-1)/n) t^{n-2}`; the remaining factor of the
/// integrand is supplied by the caller as a function of `t` and
/// `eta_0 = ln beta + n ln(1-t)`.
fn bubble_weighted_integral<F>(n: u32, factor: F, quad_tol: f64) -> Result<f64>
where
    F: Fn(f64, f64) -> f64,
{
    let omega = sphere_measure(n)?;
    let beta = bubble_height(n)?;
    let nf = n as f64;
    let coeff = omega * beta * (nf - 1.0) / nf;
    let ln_beta = beta.ln();
    let integrand = move |t: f64| {
        if t <= 0.0 || t >= 1.0 {
            return 0.0;
        }
        let eta = ln_beta + nf * (1.0 - t).ln();
        coeff * t.powi(n as i32 - 2) * factor(t, eta)
    };
    let res = quad::adaptive_gk(integrand, 0.0, 1.0, &QuadOptions::with_tol(quad_tol));
    if !res.converged {
        return Err(Error::QuadratureNonConvergence {
            estimate: res.value,
            error_bound: res.error_bound,
            tol: quad_tol,
        });
    }
    Ok(res.value)
}

/// Total mass of the bubble, `omega int_0^inf r^{n-1} e^{eta_0} dr`, by
/// adaptive quadrature. Agrees with C_n to the quadrature tolerance.
pub fn bubble_mass(n: u32, quad_tol: f64) -> Result<f64> {
    if !(quad_tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "quadrature tolerance must be > 0, got {quad_tol}"
        )));
    }
    bubble_weighted_integral(n, |_, _| 1.0, quad_tol)
}

/// Sharp constant by both routes.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SharpConstant {
    pub by_quadrature: f64,
    pub by_closed_form: f64,
}

/// Sharp Moser-Onofri constant: the quadrature route evaluates
/// `(1/(n C_n)) int e^{eta_0} eta_0 + ((n-1)/n) ln beta_n - ln C_n`
/// numerically; the closed form `ln(n/omega) - H_{n-1}` is the independent
/// check. Disagreement beyond `10 * quad_tol` is reported as an error.
pub fn sharp_constant(n: u32, quad_tol: f64) -> Result<SharpConstant> {
    if !(quad_tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "quadrature tolerance must be > 0, got {quad_tol}"
        )));
    }
    let c_crit = critical_mass(n)?;
    let beta = bubble_height(n)?;
    let nf = n as f64;
    let weighted = bubble_weighted_integral(n, |_, eta| eta, quad_tol)?;
    let by_quadrature = weighted / (nf * c_crit) + (nf - 1.0) / nf * beta.ln() - c_crit.ln();
    let by_closed_form = sharp_constant_closed_form(n)?;
    let diff = (by_quadrature - by_closed_form).abs();
    let allowed = 10.0 * quad_tol;
    if diff > allowed {
        return Err(Error::ConsistencyMismatch {
            label: format!("sharp constant, n = {n}"),
            diff,
            allowed,
        });
    }
    Ok(SharpConstant {
        by_quadrature,
        by_closed_form,
    })
}
