//! Composite Simpson quadrature on [0, 1].
//!
//! One rule serves every integral in the crate so that Monte Carlo norms and
//! exact functionals are computed with the same weights. The node count is
//! the single knob; `refine()` doubles the panel count, which is how the
//! convergence gate measures self-consistency.
//!
//! For integrands concentrated near the interval endpoints (beta kernels with
//! t near 0 or 1 have width ~b there, not ~√b), `integrate_clustered` applies
//! a quintic smoothstep change of variables that piles nodes onto the
//! boundary while keeping the integrand smooth.

use crate::{Error, Result};

/// Relative tolerance of the refinement gate.
pub const GATE_RTOL: f64 = 1e-6;

/// Uniform composite Simpson rule with an odd number of nodes spanning [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Quadrature {
    nodes: usize,
}

impl Quadrature {
    pub fn new(nodes: usize) -> Result<Self> {
        if nodes < 3 || nodes % 2 == 0 {
            return Err(Error::QuadratureNodes(nodes));
        }
        Ok(Self { nodes })
    }

    /// Default node count for bandwidth `b`: max(2001, nearest odd to 20/√b),
    /// spacing a small fraction of the kernel's ~√b effective width.
    pub fn for_bandwidth(b: f64) -> Self {
        let raw = (20.0 / b.sqrt()).ceil() as usize;
        Self { nodes: force_odd(raw.max(2001)) }
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    /// Same rule with doubled panel count (2G - 1 nodes; grids are nested).
    pub fn refine(&self) -> Self {
        Self { nodes: 2 * self.nodes - 1 }
    }

    pub fn grid(&self) -> Vec<f64> {
        let h = 1.0 / (self.nodes - 1) as f64;
        (0..self.nodes).map(|i| i as f64 * h).collect()
    }

    /// ∫₀¹ f.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        simpson_on(0.0, 1.0, (self.nodes - 1) / 2, f)
    }

    /// ∫₀¹ f with nodes clustered at both endpoints via x = s³(10 - 15s + 6s²).
    pub fn integrate_clustered<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        simpson_on(0.0, 1.0, (self.nodes - 1) / 2, |s| {
            let x = s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
            let dx = 30.0 * (s * (1.0 - s)) * (s * (1.0 - s));
            if dx == 0.0 {
                0.0
            } else {
                f(x.clamp(0.0, 1.0)) * dx
            }
        })
    }

    /// Simpson weight of node `i` (already scaled by h/3).
    fn weight(&self, i: usize) -> f64 {
        let h = 1.0 / (self.nodes - 1) as f64;
        let c = if i == 0 || i == self.nodes - 1 {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        c * h / 3.0
    }

    /// ∫₀¹ from values already tabulated on this rule's grid.
    pub fn integrate_values(&self, values: &[f64]) -> f64 {
        assert_eq!(values.len(), self.nodes, "value table does not match rule");
        values
            .iter()
            .enumerate()
            .map(|(i, v)| self.weight(i) * v)
            .sum()
    }

    /// (∫₀¹ |v|^p)^(1/p) from values on this rule's grid, same weights.
    pub fn norm_p(&self, values: &[f64], p: f64) -> f64 {
        self.pth_power_norm(values, p).powf(1.0 / p)
    }

    /// ∫₀¹ |v|^p without the final root.
    pub fn pth_power_norm(&self, values: &[f64], p: f64) -> f64 {
        assert_eq!(values.len(), self.nodes, "value table does not match rule");
        values
            .iter()
            .enumerate()
            .map(|(i, v)| self.weight(i) * v.abs().powf(p))
            .sum()
    }
}

/// Composite Simpson with `panels` panels on [a, b] (2·panels + 1 nodes).
pub fn simpson_on<F: Fn(f64) -> f64>(a: f64, b: f64, panels: usize, f: F) -> f64 {
    let panels = panels.max(1);
    let n = 2 * panels;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

/// Run `compute` at the given rule and at its refinement; fail if the two
/// disagree by more than `GATE_RTOL` relative.
pub fn gated<F: Fn(Quadrature) -> f64>(q: Quadrature, compute: F) -> Result<f64> {
    let coarse = compute(q);
    let fine = compute(q.refine());
    let delta = (fine - coarse).abs() / fine.abs().max(f64::MIN_POSITIVE);
    if delta > GATE_RTOL {
        return Err(Error::QuadratureGate { delta, tol: GATE_RTOL });
    }
    Ok(fine)
}

fn force_odd(n: usize) -> usize {
    if n % 2 == 0 {
        n + 1
    } else {
        n
    }
}
