//! Closed-form n-capacity, n-modulus, and capacity potentials for
//! concentric configurations.
//!
//! The capacity potential of the annulus `inner < |x| < outer` is the
//! n-harmonic function `t ln(outer/|x|) / ln(outer/inner)`, and inserting
//! it into the Dirichlet integral gives
//! `omega t^n (ln(outer/inner))^{1-n}` exactly. Only concentric sets are
//! supported in closed form; anything else is reported as unsupported
//! rather than approximated.

use serde::Serialize;

use crate::constants::{check_dimension, sphere_measure};
use crate::error::{Error, Result};
use crate::harmonic_radius;
use crate::quad::{self, QuadOptions};

/// Concentric annulus with a plateau value on the inner ball.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AnnulusSpec {
    pub n: u32,
    pub outer: f64,
    pub inner: f64,
    pub level: f64,
}

impl AnnulusSpec {
    pub fn new(n: u32, outer: f64, inner: f64, level: f64) -> Result<Self> {
        check_dimension(n)?;
        if !(inner > 0.0 && inner < outer && outer.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "annulus radii must satisfy 0 < inner < outer, got inner = {inner}, outer = {outer}"
            )));
        }
        if !(level > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "level must be positive, got {level}"
            )));
        }
        Ok(AnnulusSpec {
            n,
            outer,
            inner,
            level,
        })
    }
}

/// n-capacity of the inner ball with respect to the outer ball:
/// `omega (ln(outer/inner))^{1-n}`. Defined for unit level.
pub fn annulus_capacity(spec: &AnnulusSpec) -> Result<f64> {
    if spec.level != 1.0 {
        return Err(Error::InvalidArgument(format!(
            "capacity is normalized to level 1, got level = {}",
            spec.level
        )));
    }
    let omega = sphere_measure(spec.n)?;
    Ok(omega * (spec.outer / spec.inner).ln().powi(1 - spec.n as i32))
}

/// Dirichlet n-energy of the capacity potential at the configured level:
/// `omega level^n (ln(outer/inner))^{1-n}`.
pub fn potential_energy_closed_form(spec: &AnnulusSpec) -> Result<f64> {
    let omega = sphere_measure(spec.n)?;
    Ok(omega
        * spec.level.powi(spec.n as i32)
        * (spec.outer / spec.inner).ln().powi(1 - spec.n as i32))
}

/// The capacity potential: `level` on the inner plateau, the n-harmonic
/// logarithm in the annulus, zero on the outer sphere.
pub fn capacity_potential(spec: &AnnulusSpec, radius: f64) -> Result<f64> {
    if !(0.0..=f64::INFINITY).contains(&radius) || radius > spec.outer {
        return Err(Error::InvalidArgument(format!(
            "potential radius must lie in [0, outer = {}], got {radius}",
            spec.outer
        )));
    }
    if radius <= spec.inner {
        Ok(spec.level)
    } else {
        Ok(spec.level * (spec.outer / radius).ln() / (spec.outer / spec.inner).ln())
    }
}

/// Dirichlet n-energy of the capacity potential by adaptive quadrature of
/// `omega r^{n-1} |phi'|^n` over the annulus; the closed form above is the
/// exact value it must reproduce.
pub fn potential_energy_quadrature(spec: &AnnulusSpec, quad_tol: f64) -> Result<f64> {
    let omega = sphere_measure(spec.n)?;
    let n = spec.n;
    let log_ratio = (spec.outer / spec.inner).ln();
    let grad_mag = move |r: f64| spec.level / (r * log_ratio);
    let res = quad::adaptive_gk(
        |r| omega * r.powi(n as i32 - 1) * grad_mag(r).powi(n as i32),
        spec.inner,
        spec.outer,
        &QuadOptions::with_tol(quad_tol),
    );
    if !res.converged {
        return Err(Error::QuadratureNonConvergence {
            estimate: res.value,
            error_bound: res.error_bound,
            tol: quad_tol,
        });
    }
    Ok(res.value)
}

/// n-modulus: `cap^{1/(1-n)}`.
pub fn n_modulus(n: u32, cap: f64) -> Result<f64> {
    check_dimension(n)?;
    if !(cap > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "capacity must be positive, got {cap}"
        )));
    }
    Ok(cap.powf(1.0 / (1.0 - n as f64)))
}

/// Change-of-domain identity for concentric balls: for `Omega = B(0, r1)`,
/// `Omega~ = B(0, r2)` and the concentrating sets `A_eps = B(0, eps)`,
///
/// `nmod_Omega(A_eps) - nmod_Omega~(A_eps) = tau_Omega~(0) - tau_Omega(0)`
///
/// holds exactly (the o(1) vanishes). Returns the largest deviation over
/// the eps list.
pub fn modulus_shift_check(n: u32, r1: f64, r2: f64, eps_list: &[f64]) -> Result<f64> {
    check_dimension(n)?;
    if !(r1 > 0.0 && r2 > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "ball radii must be positive, got {r1}, {r2}"
        )));
    }
    if eps_list.is_empty() {
        return Err(Error::InvalidArgument("eps list must be nonempty".into()));
    }
    let tau1 = harmonic_radius::robin_ball_center(n, r1)?.robin;
    let tau2 = harmonic_radius::robin_ball_center(n, r2)?.robin;
    let mut worst: f64 = 0.0;
    for &eps in eps_list {
        if !(eps > 0.0 && eps < r1.min(r2)) {
            return Err(Error::InvalidArgument(format!(
                "eps must lie in (0, min(r1, r2)), got {eps}"
            )));
        }
        let mod1 = n_modulus(n, annulus_capacity(&AnnulusSpec::new(n, r1, eps, 1.0)?)?)?;
        let mod2 = n_modulus(n, annulus_capacity(&AnnulusSpec::new(n, r2, eps, 1.0)?)?)?;
        let deviation = (mod1 - mod2 - (tau2 - tau1)).abs();
        worst = worst.max(deviation);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{E, PI};

    #[test]
    fn unit_log_ratio_capacity_n2() {
        // outer/inner = e makes ln(outer/inner) = 1, so capacity = omega
        let spec = AnnulusSpec::new(2, E, 1.0, 1.0).unwrap();
        assert_relative_eq!(annulus_capacity(&spec).unwrap(), 2.0 * PI, epsilon = 1e-14);
    }

    #[test]
    fn capacity_scaling_invariance() {
        for &s in &[0.1, 2.0, 17.5] {
            let base = AnnulusSpec::new(3, 2.0, 0.5, 1.0).unwrap();
            let scaled = AnnulusSpec::new(3, 2.0 * s, 0.5 * s, 1.0).unwrap();
            assert_relative_eq!(
                annulus_capacity(&base).unwrap(),
                annulus_capacity(&scaled).unwrap(),
                max_relative = 1e-13
            );
        }
    }

    #[test]
    fn capacity_degenerates_as_annulus_thins() {
        let c1 = annulus_capacity(&AnnulusSpec::new(2, 1.0, 0.9, 1.0).unwrap()).unwrap();
        let c2 = annulus_capacity(&AnnulusSpec::new(2, 1.0, 0.999, 1.0).unwrap()).unwrap();
        assert!(c2 > c1);
        assert!(c2 > 6e3);
    }

    #[test]
    fn capacity_monotonicity() {
        // decreasing in outer, increasing in inner
        let base = annulus_capacity(&AnnulusSpec::new(4, 2.0, 0.5, 1.0).unwrap()).unwrap();
        let wider = annulus_capacity(&AnnulusSpec::new(4, 3.0, 0.5, 1.0).unwrap()).unwrap();
        let fatter = annulus_capacity(&AnnulusSpec::new(4, 2.0, 0.8, 1.0).unwrap()).unwrap();
        assert!(wider < base);
        assert!(fatter > base);
    }

    #[test]
    fn potential_boundary_plateau_and_midpoint() {
        let spec = AnnulusSpec::new(3, 2.0, 0.25, 1.0).unwrap();
        assert_eq!(capacity_potential(&spec, 2.0).unwrap(), 0.0);
        assert_eq!(capacity_potential(&spec, 0.25).unwrap(), 1.0);
        assert_eq!(capacity_potential(&spec, 0.1).unwrap(), 1.0);
        // logarithmic midpoint takes the value 1/2
        let mid = (2.0f64 * 0.25).sqrt();
        assert_relative_eq!(capacity_potential(&spec, mid).unwrap(), 0.5, epsilon = 1e-13);
        assert!(capacity_potential(&spec, 2.5).is_err());
    }

    #[test]
    fn quadrature_energy_matches_closed_form() {
        for &(n, outer, inner, level) in &[
            (2u32, 1.0, 0.2, 1.0),
            (3, 2.0, 0.1, 0.7),
            (4, 5.0, 0.5, 2.0),
            (6, 1.0, 1e-3, 1.3),
        ] {
            let spec = AnnulusSpec::new(n, outer, inner, level).unwrap();
            let quad = potential_energy_quadrature(&spec, 1e-13).unwrap();
            let exact = potential_energy_closed_form(&spec).unwrap();
            assert_relative_eq!(quad, exact, max_relative = 1e-10);
        }
    }

    #[test]
    fn modulus_composition() {
        // nmod(annulus) = omega^{1/(1-n)} ln(outer/inner)
        let n = 3;
        let spec = AnnulusSpec::new(n, 4.0, 0.5, 1.0).unwrap();
        let m = n_modulus(n, annulus_capacity(&spec).unwrap()).unwrap();
        let omega = sphere_measure(n).unwrap();
        assert_relative_eq!(
            m,
            omega.powf(1.0 / (1.0 - n as f64)) * (4.0f64 / 0.5).ln(),
            max_relative = 1e-13
        );
    }

    #[test]
    fn modulus_additive_over_nested_annuli() {
        let n = 5;
        let (rho, s, r) = (0.3, 1.1, 6.0);
        let of = |a: f64, b: f64| {
            n_modulus(
                n,
                annulus_capacity(&AnnulusSpec::new(n, b, a, 1.0).unwrap()).unwrap(),
            )
            .unwrap()
        };
        assert_relative_eq!(of(rho, r), of(rho, s) + of(s, r), max_relative = 1e-12);
    }

    #[test]
    fn modulus_shift_exact_for_concentric_balls() {
        let dev = modulus_shift_check(2, 1.0, 2.0, &[0.1]).unwrap();
        assert!(dev <= 1e-12, "deviation {dev}");
        let dev = modulus_shift_check(4, 1.0, 3.0, &[1e-3, 1e-4]).unwrap();
        assert!(dev <= 1e-12, "deviation {dev}");
        let dev = modulus_shift_check(3, 1.5, 1.5, &[0.01]).unwrap();
        assert!(dev <= 1e-15);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(AnnulusSpec::new(2, 1.0, 1.0, 1.0).is_err());
        assert!(AnnulusSpec::new(2, 1.0, 0.0, 1.0).is_err());
        assert!(AnnulusSpec::new(2, 0.5, 0.8, 1.0).is_err());
        assert!(n_modulus(2, 0.0).is_err());
        assert!(n_modulus(2, -1.0).is_err());
        let lvl2 = AnnulusSpec::new(2, 1.0, 0.5, 2.0).unwrap();
        assert!(annulus_capacity(&lvl2).is_err());
    }
}
