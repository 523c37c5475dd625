//! Direct minimization of the subcritical functional
//! `J_rho(u) = (1/(n rho)) int |grad u|^n - ln int e^u` over radial
//! piecewise-linear functions on [0, 1] with u(1) = 0.
//!
//! The gradient term is assembled exactly (|u'| is constant per element,
//! so the one-dimensional n-Laplacian stiffness is explicit); the
//! exponential term uses a fixed Gauss panel per element. The solver is a
//! damped Newton iteration with an Armijo line search; the Hessian is
//! tridiagonal plus a rank-one term from `-ln int e^u`, solved by the
//! Thomas algorithm and the Sherman-Morrison formula. Where the Newton
//! direction fails to descend (the functional is not convex), the step
//! falls back to steepest descent.

use serde::Serialize;

use crate::constants::{bubble_height, critical_mass, sphere_measure};
use crate::error::{Error, Result};
use crate::functional::BubbleSpec;
use crate::profile::{GridKind, RadialProfile};
use crate::quad::{GL4_NODES, GL4_WEIGHTS};

/// Additive regularization of |u'|^2 in the (n-2)/2 power for n > 2; the
/// n-Laplacian Hessian is degenerate where u' = 0.
const GRAD_REGULARIZATION: f64 = 1e-12;

#[derive(Debug, Clone, Serialize)]
pub enum InitGuess {
    Zero,
    /// Start from the boundary-normalized bubble at the given scale.
    Bubble { scale: f64 },
    Profile(RadialProfile),
}

#[derive(Debug, Clone, Serialize)]
pub struct MinimizeOptions {
    pub grid_size: usize,
    pub grid_kind: GridKind,
    pub max_iters: usize,
    pub step_tol: f64,
    pub grad_tol: f64,
    pub init: InitGuess,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        MinimizeOptions {
            grid_size: 512,
            grid_kind: GridKind::Graded,
            max_iters: 400,
            step_tol: 1e-13,
            grad_tol: 1e-8,
            init: InitGuess::Zero,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MinimizeResult {
    pub profile: RadialProfile,
    pub j_value: f64,
    pub el_residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub diagnostics: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceEntry {
    pub rho: f64,
    pub peak: f64,
    pub mass: f64,
    pub epsilon: f64,
    pub j_value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BlowupTrace {
    pub entries: Vec<TraceEntry>,
    pub failures: Vec<TraceFailure>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceFailure {
    pub rho: f64,
    pub message: String,
}

/// Discretization of J_rho on a fixed radial grid.
struct Discretization {
    n: u32,
    rho: f64,
    omega: f64,
    nodes: Vec<f64>,
    /// per element: b^n - a^n
    pow_weights: Vec<f64>,
    /// per element: spacing
    spacings: Vec<f64>,
    /// per element, per Gauss point: weight * r^{n-1}
    quad_w: Vec<[f64; 4]>,
    /// per element, per Gauss point: right-hat value (x - a)/h
    quad_t: Vec<[f64; 4]>,
}

impl Discretization {
    fn new(n: u32, rho: f64, grid_size: usize, kind: GridKind) -> Self {
        let omega = sphere_measure(n).expect("validated dimension");
        let m = grid_size;
        let nodes: Vec<f64> = (0..m)
            .map(|i| {
                let t = i as f64 / (m - 1) as f64;
                match kind {
                    GridKind::Uniform => t,
                    GridKind::Graded => t * t,
                }
            })
            .collect();
        let mut pow_weights = Vec::with_capacity(m - 1);
        let mut spacings = Vec::with_capacity(m - 1);
        let mut quad_w = Vec::with_capacity(m - 1);
        let mut quad_t = Vec::with_capacity(m - 1);
        for i in 0..m - 1 {
            let a = nodes[i];
            let b = nodes[i + 1];
            let h = b - a;
            spacings.push(h);
            pow_weights.push(b.powi(n as i32) - a.powi(n as i32));
            let c = 0.5 * (a + b);
            let d = 0.5 * h;
            let mut w = [0.0; 4];
            let mut t = [0.0; 4];
            for j in 0..4 {
                let x = c + d * GL4_NODES[j];
                w[j] = GL4_WEIGHTS[j] * d * x.powi(n as i32 - 1);
                t[j] = (x - a) / h;
            }
            quad_w.push(w);
            quad_t.push(t);
        }
        Discretization {
            n,
            rho,
            omega,
            nodes,
            pow_weights,
            spacings,
            quad_w,
            quad_t,
        }
    }

    fn num_dofs(&self) -> usize {
        self.nodes.len() - 1
    }

    #[inline]
    fn node_value(&self, u: &[f64], i: usize) -> f64 {
        if i < u.len() {
            u[i]
        } else {
            0.0
        }
    }

    /// Exact gradient energy omega/n sum |s_i|^n (b^n - a^n).
    fn grad_energy(&self, u: &[f64]) -> f64 {
        let nf = self.n as f64;
        let mut e = 0.0;
        for i in 0..self.spacings.len() {
            let s = (self.node_value(u, i + 1) - self.node_value(u, i)) / self.spacings[i];
            e += s.abs().powi(self.n as i32) * self.pow_weights[i];
        }
        e * self.omega / nf
    }

    /// omega int r^{n-1} e^u dr by the per-element Gauss panels. Returns
    /// +inf guard values as None.
    fn volume_integral(&self, u: &[f64]) -> Option<f64> {
        let mut z = 0.0;
        for i in 0..self.spacings.len() {
            let u0 = self.node_value(u, i);
            let u1 = self.node_value(u, i + 1);
            if u0 > 700.0 || u1 > 700.0 {
                return None;
            }
            for j in 0..4 {
                let t = self.quad_t[i][j];
                z += self.quad_w[i][j] * ((1.0 - t) * u0 + t * u1).exp();
            }
        }
        let z = z * self.omega;
        if z.is_finite() && z > 0.0 {
            Some(z)
        } else {
            None
        }
    }

    fn j_value(&self, u: &[f64]) -> f64 {
        let nf = self.n as f64;
        match self.volume_integral(u) {
            Some(z) => self.grad_energy(u) / (nf * self.rho) - z.ln(),
            None => f64::INFINITY,
        }
    }

    /// Gradient of J and the pieces needed for the Hessian.
    /// Returns (grad, z, z_grad) where z_grad[k] = d z / d u_k.
    ///
    /// dE/du_k uses d|s|^n/ds = n |s|^{n-2} s with the regularized power;
    /// the 1/(n rho) prefactor of J cancels the n.
    fn gradient(&self, u: &[f64]) -> Option<(Vec<f64>, f64, Vec<f64>)> {
        let nf = self.n as f64;
        let q = self.num_dofs();
        let mut grad_e = vec![0.0; q];
        let mut z_grad = vec![0.0; q];
        let mut z = 0.0;

        for i in 0..self.spacings.len() {
            let u0 = self.node_value(u, i);
            let u1 = self.node_value(u, i + 1);
            if u0 > 700.0 || u1 > 700.0 {
                return None;
            }
            let h = self.spacings[i];
            let s = (u1 - u0) / h;
            let g_s = (s * s + GRAD_REGULARIZATION).powf((nf - 2.0) / 2.0) * s;
            let e_term = self.omega * g_s * self.pow_weights[i] / h;
            if i < q {
                grad_e[i] -= e_term;
            }
            if i + 1 < q {
                grad_e[i + 1] += e_term;
            }

            for j in 0..4 {
                let t = self.quad_t[i][j];
                let val = self.quad_w[i][j] * ((1.0 - t) * u0 + t * u1).exp();
                z += val;
                if i < q {
                    z_grad[i] += val * (1.0 - t);
                }
                if i + 1 < q {
                    z_grad[i + 1] += val * t;
                }
            }
        }
        let z = z * self.omega;
        if !z.is_finite() || z <= 0.0 {
            return None;
        }
        for v in z_grad.iter_mut() {
            *v *= self.omega;
        }

        let grad = (0..q)
            .map(|k| grad_e[k] / (nf * self.rho) - z_grad[k] / z)
            .collect();
        Some((grad, z, z_grad))
    }

    /// Tridiagonal part T of the Hessian (diag, upper) such that
    /// H = T + (z_grad/z)(z_grad/z)^T.
    fn hessian_tridiag(&self, u: &[f64], z: f64) -> (Vec<f64>, Vec<f64>) {
        let nf = self.n as f64;
        let q = self.num_dofs();
        let mut diag = vec![0.0; q];
        let mut upper = vec![0.0; q.saturating_sub(1)];

        for i in 0..self.spacings.len() {
            let u0 = self.node_value(u, i);
            let u1 = self.node_value(u, i + 1);
            let h = self.spacings[i];
            let s = (u1 - u0) / h;
            let s2 = s * s + GRAD_REGULARIZATION;
            // d^2/ds^2 |s|^n = (n-1)(s^2+eps)^{(n-4)/2} ((n-1) s^2 + eps) ~ (n-1)|s|^{n-2}
            let dphi = s2.powf((nf - 4.0) / 2.0) * ((nf - 1.0) * s * s + GRAD_REGULARIZATION);
            let beta = self.omega * dphi * self.pow_weights[i] / (h * h) / (nf * self.rho);
            if i < q {
                diag[i] += beta;
            }
            if i + 1 < q {
                diag[i + 1] += beta;
            }
            if i < q && i + 1 < q {
                upper[i] -= beta;
            }

            // mass-matrix part of -d^2 ln z: -M/z with M_ab = omega int r^{n-1} e^u phi_a phi_b
            let mut mll = 0.0;
            let mut mlr = 0.0;
            let mut mrr = 0.0;
            for j in 0..4 {
                let t = self.quad_t[i][j];
                let val = self.quad_w[i][j] * ((1.0 - t) * u0 + t * u1).exp();
                mll += val * (1.0 - t) * (1.0 - t);
                mlr += val * (1.0 - t) * t;
                mrr += val * t * t;
            }
            mll *= self.omega;
            mlr *= self.omega;
            mrr *= self.omega;
            if i < q {
                diag[i] -= mll / z;
            }
            if i + 1 < q {
                diag[i + 1] -= mrr / z;
            }
            if i < q && i + 1 < q {
                upper[i] -= mlr / z;
            }
        }
        (diag, upper)
    }
}

/// Solve (T + g g^T) d = rhs with T symmetric tridiagonal, via Thomas +
/// Sherman-Morrison. Returns None when a pivot collapses.
fn solve_rank_one_tridiag(
    diag: &[f64],
    upper: &[f64],
    g: &[f64],
    rhs: &[f64],
) -> Option<Vec<f64>> {
    let t_inv_rhs = thomas(diag, upper, rhs)?;
    let t_inv_g = thomas(diag, upper, g)?;
    let g_dot_tr = dot(g, &t_inv_rhs);
    let g_dot_tg = dot(g, &t_inv_g);
    let denom = 1.0 + g_dot_tg;
    if denom.abs() < 1e-300 {
        return None;
    }
    let coeff = g_dot_tr / denom;
    Some(
        t_inv_rhs
            .iter()
            .zip(t_inv_g.iter())
            .map(|(a, b)| a - coeff * b)
            .collect(),
    )
}

fn thomas(diag: &[f64], upper: &[f64], rhs: &[f64]) -> Option<Vec<f64>> {
    let q = diag.len();
    let mut c = vec![0.0; q];
    let mut d = vec![0.0; q];
    let mut piv = diag[0];
    if piv.abs() < 1e-300 {
        return None;
    }
    if q > 1 {
        c[0] = upper[0] / piv;
    }
    d[0] = rhs[0] / piv;
    for k in 1..q {
        // symmetric: lower[k-1] = upper[k-1]
        piv = diag[k] - upper[k - 1] * c[k - 1];
        if piv.abs() < 1e-300 {
            return None;
        }
        if k < q - 1 {
            c[k] = upper[k] / piv;
        }
        d[k] = (rhs[k] - upper[k - 1] * d[k - 1]) / piv;
    }
    for k in (0..q.saturating_sub(1)).rev() {
        let next = d[k + 1];
        d[k] -= c[k] * next;
    }
    Some(d)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn initial_guess(disc: &Discretization, init: &InitGuess) -> Result<Vec<f64>> {
    let q = disc.num_dofs();
    match init {
        InitGuess::Zero => Ok(vec![0.0; q]),
        InitGuess::Bubble { scale } => {
            let spec = BubbleSpec::new(disc.n, *scale)?;
            (0..q)
                .map(|i| crate::functional::test_function(&spec, disc.nodes[i]))
                .collect()
        }
        InitGuess::Profile(p) => Ok((0..q).map(|i| p.value_at(disc.nodes[i])).collect()),
    }
}

fn result_profile(disc: &Discretization, u: &[f64], kind: GridKind) -> Result<RadialProfile> {
    let m = disc.nodes.len();
    let mut values = Vec::with_capacity(m);
    for i in 0..m {
        values.push(disc.node_value(u, i));
    }
    let slope = |i: usize| (values[i + 1] - values[i]) / disc.spacings[i];
    let mut derivs = Vec::with_capacity(m);
    derivs.push(0.0);
    derivs.extend((1..m - 1).map(|i| 0.5 * (slope(i - 1) + slope(i))));
    derivs.push(slope(m - 2));
    RadialProfile::new(disc.nodes.clone(), values, derivs, kind)
}

/// Scale-free dual-norm measure of the discrete Euler-Lagrange defect.
fn el_residual_of(grad: &[f64], grad_scale: f64) -> f64 {
    norm2(grad) / grad_scale.max(1e-300)
}

/// Minimize J_rho for 0 < rho < C_n. At rho >= C_n the infimum is not
/// attained (critical-mass non-attainment on the ball) and a domain error
/// is returned.
pub fn minimize_subcritical(n: u32, rho: f64, opts: &MinimizeOptions) -> Result<MinimizeResult> {
    crate::constants::check_dimension(n)?;
    let c_crit = critical_mass(n)?;
    if !(rho > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "rho must be positive, got {rho}"
        )));
    }
    if rho >= c_crit {
        return Err(Error::InvalidArgument(format!(
            "rho = {rho:.6e} >= C_n = {c_crit:.6e}: the infimum is only attained for \
             subcritical mass (non-attainment at the critical value)"
        )));
    }
    if opts.grid_size < 16 {
        return Err(Error::InvalidArgument(format!(
            "grid_size must be >= 16, got {}",
            opts.grid_size
        )));
    }
    if !(opts.grad_tol > 0.0) || !(opts.step_tol > 0.0) {
        return Err(Error::InvalidArgument(
            "tolerances must be positive".into(),
        ));
    }

    let disc = Discretization::new(n, rho, opts.grid_size, opts.grid_kind);
    let mut u = initial_guess(&disc, &opts.init)?;
    minimize_on(&disc, &mut u, opts)
}

fn minimize_on(
    disc: &Discretization,
    u: &mut Vec<f64>,
    opts: &MinimizeOptions,
) -> Result<MinimizeResult> {
    let nf = disc.n as f64;
    let j_zero = disc.j_value(&vec![0.0; disc.num_dofs()]);
    let mut j = disc.j_value(u);
    if !j.is_finite() {
        u.iter_mut().for_each(|x| *x = 0.0);
        j = j_zero;
    }

    let mut el_res = f64::INFINITY;
    let mut iterations = 0;
    let mut diagnostics = String::new();
    let mut converged = false;
    // Levenberg damping: zero for plain Newton, raised when the Hessian
    // is indefinite or the step fails to descend. The n-Laplacian block
    // is degenerate wherever u' ~ 0 (always at the zero start for n > 2),
    // so the damping carries the first iterations.
    let mut mu = 0.0f64;
    let mut stalled = false;

    'outer: for iter in 0..opts.max_iters {
        iterations = iter + 1;
        let (grad, z, z_grad) = match disc.gradient(u) {
            Some(t) => t,
            None => {
                diagnostics = "exponential overflow while evaluating the gradient".into();
                break;
            }
        };
        let g: Vec<f64> = z_grad.iter().map(|v| v / z).collect();
        let mut grad_e_norm = 0.0;
        for k in 0..grad.len() {
            let ge = (grad[k] + g[k]) * (nf * disc.rho);
            grad_e_norm += ge * ge;
        }
        let scale = (grad_e_norm.sqrt() / (nf * disc.rho)).max(norm2(&g));
        el_res = el_residual_of(&grad, scale);
        if el_res <= opts.grad_tol {
            converged = true;
            break;
        }
        if stalled {
            diagnostics = format!(
                "stationary to machine precision but residual {el_res:.3e} above grad_tol"
            );
            break;
        }

        let (diag, upper) = disc.hessian_tridiag(u, z);
        let diag_scale = diag.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1.0);
        let rhs: Vec<f64> = grad.iter().map(|v| -v).collect();

        let mut attempts = 0;
        loop {
            attempts += 1;
            if attempts > 30 {
                diagnostics = format!("no descent step found at iter {iter} (mu = {mu:.2e})");
                break 'outer;
            }
            let damped: Vec<f64> = diag.iter().map(|v| v + mu).collect();
            let dir = solve_rank_one_tridiag(&damped, &upper, &g, &rhs);
            let dir = match dir {
                Some(d) if d.iter().all(|x| x.is_finite()) => d,
                _ => {
                    mu = (10.0 * mu).max(1e-10 * diag_scale);
                    continue;
                }
            };
            let slope = dot(&dir, &grad);
            if slope >= 0.0 {
                mu = (10.0 * mu).max(1e-10 * diag_scale);
                continue;
            }

            let mut t = 1.0;
            let mut accepted = false;
            for _ in 0..60 {
                let trial: Vec<f64> = u
                    .iter()
                    .zip(dir.iter())
                    .map(|(a, b)| a + t * b)
                    .collect();
                let j_trial = disc.j_value(&trial);
                if j_trial <= j + 1e-4 * t * slope {
                    let step_inf =
                        dir.iter().fold(0.0f64, |acc, v| acc.max((t * v).abs()));
                    *u = trial;
                    j = j_trial;
                    accepted = true;
                    // a vanishing step means we are at the floor of the
                    // discrete functional; one more residual check at the
                    // loop top decides between convergence and stall
                    stalled = step_inf <= opts.step_tol;
                    break;
                }
                t *= 0.5;
            }
            if accepted {
                mu /= 3.0;
                if mu < 1e-14 * diag_scale {
                    mu = 0.0;
                }
                break;
            }
            mu = (10.0 * mu).max(1e-10 * diag_scale);
        }
    }

    if converged && j > j_zero + 1e-12 {
        return Err(Error::NonConvergence(format!(
            "stationary point above the zero competitor: J = {j:.8} > J(0) = {j_zero:.8}"
        )));
    }
    if !converged {
        // final residual refresh for the report, same scale as the loop
        if let Some((grad, z, z_grad)) = disc.gradient(u) {
            let g: Vec<f64> = z_grad.iter().map(|v| v / z).collect();
            let mut grad_e_norm = 0.0;
            for k in 0..grad.len() {
                let ge = (grad[k] + g[k]) * (nf * disc.rho);
                grad_e_norm += ge * ge;
            }
            let scale = (grad_e_norm.sqrt() / (nf * disc.rho)).max(norm2(&g));
            el_res = el_residual_of(&grad, scale);
        }
        if diagnostics.is_empty() {
            diagnostics = format!("no convergence in {} iterations", opts.max_iters);
        }
    }

    Ok(MinimizeResult {
        profile: result_profile(disc, u, opts.grid_kind)?,
        j_value: j,
        el_residual: el_res,
        iterations,
        converged,
        diagnostics,
    })
}

/// Minimize along an increasing ladder of subcritical masses, warm-starting
/// each solve from the previous one, and report the blow-up diagnostics
/// (peak growth, concentration scale, energy decrease).
pub fn trace_blowup(n: u32, rho_list: &[f64], opts: &MinimizeOptions) -> Result<BlowupTrace> {
    crate::constants::check_dimension(n)?;
    let c_crit = critical_mass(n)?;
    if rho_list.is_empty() {
        return Err(Error::InvalidArgument("rho list must be nonempty".into()));
    }
    for w in rho_list.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::InvalidArgument(
                "rho list must be strictly increasing".into(),
            ));
        }
    }
    if rho_list.iter().any(|&r| !(r > 0.0) || r >= c_crit) {
        return Err(Error::InvalidArgument(format!(
            "every rho must lie in (0, C_n) = (0, {c_crit:.6e})"
        )));
    }

    let beta = bubble_height(n)?;
    let omega = sphere_measure(n)?;
    let nf = n as f64;
    let mut entries = Vec::new();
    let mut failures = Vec::new();
    let mut warm: Option<Vec<f64>> = None;

    for &rho in rho_list {
        let disc = Discretization::new(n, rho, opts.grid_size, opts.grid_kind);
        let mut u = match &warm {
            Some(prev) => prev.clone(),
            None => initial_guess(&disc, &opts.init)?,
        };
        match minimize_on(&disc, &mut u, opts) {
            Ok(res) if res.converged => {
                let z = omega
                    * res
                        .profile
                        .integrate(|r, v, _| r.powi(n as i32 - 1) * v.exp());
                let lambda = rho / z;
                let peak = res.profile.values()[0];
                let epsilon = ((beta.ln() - lambda.ln() - peak) / nf).exp();
                entries.push(TraceEntry {
                    rho,
                    peak,
                    mass: rho,
                    epsilon,
                    j_value: res.j_value,
                });
                warm = Some(u);
            }
            Ok(res) => failures.push(TraceFailure {
                rho,
                message: format!("not converged: {}", res.diagnostics),
            }),
            Err(e) => failures.push(TraceFailure {
                rho,
                message: e.to_string(),
            }),
        }
    }
    Ok(BlowupTrace { entries, failures })
}
