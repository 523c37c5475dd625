//! Sampled radial functions on [0, R] with derivative data.
//!
//! A `RadialProfile` is the common currency between the shooting solver, the
//! variational minimizer, and the functional evaluators: a strictly
//! increasing node set, function values, and first derivatives. Off-node
//! evaluation and quadrature use the piecewise cubic Hermite interpolant,
//! which matches both endpoint values and slopes on every segment.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quad::{GL7_NODES, GL7_WEIGHTS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GridKind {
    Uniform,
    Graded,
}

#[derive(Debug, Clone, Serialize)]
pub struct RadialProfile {
    nodes: Vec<f64>,
    values: Vec<f64>,
    derivs: Vec<f64>,
    domain_radius: f64,
    grid_kind: GridKind,
}

impl RadialProfile {
    /// Build and validate a profile. Nodes must be strictly increasing and
    /// finite; the derivative at a leading node r = 0 must vanish (radial
    /// smoothness at the origin).
    pub fn new(
        nodes: Vec<f64>,
        values: Vec<f64>,
        derivs: Vec<f64>,
        grid_kind: GridKind,
    ) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::InvalidArgument(
                "profile needs at least two nodes".into(),
            ));
        }
        if nodes.len() != values.len() || nodes.len() != derivs.len() {
            return Err(Error::InvalidArgument(format!(
                "profile arrays disagree in length: {} nodes, {} values, {} derivs",
                nodes.len(),
                values.len(),
                derivs.len()
            )));
        }
        if nodes[0] < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "first node must be >= 0, got {}",
                nodes[0]
            )));
        }
        for w in nodes.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::InvalidArgument(format!(
                    "nodes must be strictly increasing, got {} then {}",
                    w[0], w[1]
                )));
            }
        }
        for (&v, &d) in values.iter().zip(derivs.iter()) {
            if !v.is_finite() || !d.is_finite() {
                return Err(Error::InvalidArgument(
                    "profile values and derivatives must be finite".into(),
                ));
            }
        }
        if nodes[0] == 0.0 && derivs[0] != 0.0 {
            return Err(Error::InvalidArgument(format!(
                "derivative at the origin must vanish, got {}",
                derivs[0]
            )));
        }
        let domain_radius = *nodes.last().unwrap();
        Ok(RadialProfile {
            nodes,
            values,
            derivs,
            domain_radius,
            grid_kind,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn derivs(&self) -> &[f64] {
        &self.derivs
    }
    pub fn domain_radius(&self) -> f64 {
        self.domain_radius
    }
    pub fn grid_kind(&self) -> GridKind {
        self.grid_kind
    }
    pub fn len(&self) -> usize {
        self.nodes.len()
    }
    /// Profiles always carry at least two nodes.
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Value at the last node.
    pub fn boundary_value(&self) -> f64 {
        *self.values.last().unwrap()
    }

    /// Derivative at the last node.
    pub fn boundary_deriv(&self) -> f64 {
        *self.derivs.last().unwrap()
    }

    /// Shift all values by a constant (derivatives unchanged).
    pub fn shifted(&self, offset: f64) -> RadialProfile {
        let mut out = self.clone();
        for v in &mut out.values {
            *v += offset;
        }
        out
    }

    /// True when values are non-increasing in r up to `tol`.
    pub fn is_non_increasing(&self, tol: f64) -> bool {
        self.values.windows(2).all(|w| w[1] <= w[0] + tol)
    }

    fn segment_of(&self, r: f64) -> usize {
        // last i with nodes[i] <= r, clamped to a valid segment start
        match self
            .nodes
            .binary_search_by(|probe| probe.total_cmp(&r))
        {
            Ok(i) => i.min(self.nodes.len() - 2),
            Err(0) => 0,
            Err(i) => (i - 1).min(self.nodes.len() - 2),
        }
    }

    /// Cubic Hermite evaluation at a radius inside the domain.
    pub fn value_at(&self, r: f64) -> f64 {
        let r = r.clamp(self.nodes[0], self.domain_radius);
        let i = self.segment_of(r);
        let (h, t) = self.local_coord(i, r);
        let (v0, v1) = (self.values[i], self.values[i + 1]);
        let (d0, d1) = (self.derivs[i], self.derivs[i + 1]);
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * v0
            + (t3 - 2.0 * t2 + t) * h * d0
            + (-2.0 * t3 + 3.0 * t2) * v1
            + (t3 - t2) * h * d1
    }

    /// Derivative of the cubic Hermite interpolant.
    pub fn deriv_at(&self, r: f64) -> f64 {
        let r = r.clamp(self.nodes[0], self.domain_radius);
        let i = self.segment_of(r);
        let (h, t) = self.local_coord(i, r);
        let (v0, v1) = (self.values[i], self.values[i + 1]);
        let (d0, d1) = (self.derivs[i], self.derivs[i + 1]);
        let t2 = t * t;
        ((6.0 * t2 - 6.0 * t) * v0
            + (3.0 * t2 - 4.0 * t + 1.0) * h * d0
            + (-6.0 * t2 + 6.0 * t) * v1
            + (3.0 * t2 - 2.0 * t) * h * d1)
            / h
    }

    fn local_coord(&self, i: usize, r: f64) -> (f64, f64) {
        let h = self.nodes[i + 1] - self.nodes[i];
        ((h), ((r - self.nodes[i]) / h))
    }

    /// `int_{r_first}^{R} g(r, u(r), u'(r)) dr` by a 7-point Gauss-Legendre
    /// panel per segment on the Hermite interpolant.
    pub fn integrate<G: Fn(f64, f64, f64) -> f64>(&self, g: G) -> f64 {
        let mut total = 0.0;
        for i in 0..self.nodes.len() - 1 {
            let a = self.nodes[i];
            let b = self.nodes[i + 1];
            let c = 0.5 * (a + b);
            let h = 0.5 * (b - a);
            let (v0, v1) = (self.values[i], self.values[i + 1]);
            let (d0, d1) = (self.derivs[i], self.derivs[i + 1]);
            let seg = b - a;
            let mut acc = 0.0;
            for (x, w) in GL7_NODES.iter().zip(GL7_WEIGHTS.iter()) {
                let r = c + h * x;
                let t = (r - a) / seg;
                let t2 = t * t;
                let t3 = t2 * t;
                let u = (2.0 * t3 - 3.0 * t2 + 1.0) * v0
                    + (t3 - 2.0 * t2 + t) * seg * d0
                    + (-2.0 * t3 + 3.0 * t2) * v1
                    + (t3 - t2) * seg * d1;
                let du = ((6.0 * t2 - 6.0 * t) * v0
                    + (3.0 * t2 - 4.0 * t + 1.0) * seg * d0
                    + (-6.0 * t2 + 6.0 * t) * v1
                    + (3.0 * t2 - 2.0 * t) * seg * d1)
                    / seg;
                acc += w * g(r, u, du);
            }
            total += acc * h;
        }
        total
    }

    /// Largest |self(r) - f(r)| over a uniform sample of [lo, hi].
    pub fn sup_gap_to<F: Fn(f64) -> f64>(&self, f: F, lo: f64, hi: f64, samples: usize) -> f64 {
        let mut worst = 0.0f64;
        for k in 0..samples {
            let r = lo + (hi - lo) * k as f64 / (samples - 1) as f64;
            worst = worst.max((self.value_at(r) - f(r)).abs());
        }
        worst
    }
}
