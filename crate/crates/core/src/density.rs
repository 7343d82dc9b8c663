//! Test densities on [0, 1] and Hölder-class membership checking.
//!
//! Four variants cover the regimes the risk experiments need:
//!
//! - `Uniform` — zero bias for any bandwidth; isolates the variance term.
//! - `Linear` — 2x; its bias is exactly 2·(mean shift), an order-b floor
//!   that no amount of extra smoothness can beat.
//! - `Cosine` — 1 + a·cos(2πx); a fixed smooth density (the sawtooth cannot
//!   play this role because its construction depends on b) for rate-vs-n
//!   experiments. Lies in the (2, 4π²a) Hölder class.
//! - `Sawtooth` — the bandwidth-coupled alternating-bump density whose bias
//!   cannot fall faster than b^{β/2}. Built from N = ⌊b^{-1/2}/20⌋ cells of
//!   width 1/(2N), each carrying a bump ±L_β(w^β - |x - t_k|^β) centered at
//!   the cell midpoint, with L_β = (L/2)·min(1, 1/β).
//!
//! All four integrate to one and are non-negative; sampling is exact
//! (inverse CDF where available, rejection from the uniform envelope
//! otherwise).

use crate::{Error, Result};
use rand::Rng;

/// The sawtooth (alternating-bump) density and its derived geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sawtooth {
    beta: f64,
    lipschitz: f64,
    bandwidth: f64,
    cells: usize,   // N: 2N cells over [0,1]
    amp_coeff: f64, // L_β
}

impl Sawtooth {
    fn new(beta: f64, lipschitz: f64, bandwidth: f64) -> Result<Self> {
        if !(beta > 0.0 && beta <= 2.0) {
            return Err(Error::Domain(format!("sawtooth regularity must lie in (0,2], got {beta}")));
        }
        if !(lipschitz > 0.0 && lipschitz.is_finite()) {
            return Err(Error::Domain(format!("sawtooth constant must be positive, got {lipschitz}")));
        }
        if !(bandwidth > 0.0 && bandwidth < 1.0) {
            return Err(Error::Bandwidth(bandwidth));
        }
        let cells = (bandwidth.powf(-0.5) / 20.0).floor() as usize;
        if cells < 1 {
            return Err(Error::SawtoothBandwidth(bandwidth));
        }
        Ok(Self {
            beta,
            lipschitz,
            bandwidth,
            cells,
            amp_coeff: 0.5 * lipschitz * (1.0f64).min(1.0 / beta),
        })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    /// N, the number of bump pairs; the density has 2N cells.
    pub fn cells(&self) -> usize {
        self.cells
    }

    /// L_β = (L/2)·min(1, 1/β).
    pub fn amp_coeff(&self) -> f64 {
        self.amp_coeff
    }

    /// Half-cell width w = 1/(4N); bumps peak at ±L_β w^β.
    pub fn half_width(&self) -> f64 {
        0.25 / self.cells as f64
    }

    /// Bump peak amplitude L_β (4N)^{-β}.
    pub fn amplitude(&self) -> f64 {
        self.amp_coeff * self.half_width().powf(self.beta)
    }

    /// Center t_k = (2k+1)/(4N) of cell k (0-based).
    pub fn cusp(&self, k: usize) -> f64 {
        (2 * k + 1) as f64 * self.half_width()
    }

    /// Bump sign of cell k (0-based): +, -, +, ...
    pub fn sign(&self, k: usize) -> f64 {
        if k % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Cell index holding x; cells are half-open with the last one closed.
    pub fn cell_of(&self, x: f64) -> usize {
        ((x * 2.0 * self.cells as f64) as usize).min(2 * self.cells - 1)
    }

    /// f(x) - 1, the pure bump part.
    pub fn bump(&self, x: f64) -> f64 {
        let k = self.cell_of(x);
        let w = self.half_width();
        self.sign(k) * self.amp_coeff * (w.powf(self.beta) - (x - self.cusp(k)).abs().powf(self.beta))
    }

    fn bump_derivative(&self, x: f64) -> Result<f64> {
        let k = self.cell_of(x);
        let u = x - self.cusp(k);
        if u == 0.0 {
            if self.beta > 1.0 {
                return Ok(0.0);
            }
            return Err(Error::Derivative { order: 1, x });
        }
        Ok(-self.sign(k) * self.amp_coeff * self.beta * u.abs().powf(self.beta - 1.0) * u.signum())
    }

    /// Exact mean: the alternating bumps do not quite cancel in ∫x f(x) dx.
    pub fn exact_mean(&self) -> f64 {
        let w = self.half_width();
        0.5 - self.amp_coeff * self.beta * w.powf(self.beta + 1.0) / (self.beta + 1.0)
    }

    /// Exact probability mass of each of the 4N half-cells, in order.
    pub fn half_cell_masses(&self) -> Vec<f64> {
        let w = self.half_width();
        let bump_half = self.amp_coeff * w.powf(self.beta + 1.0) * self.beta / (self.beta + 1.0);
        (0..2 * self.cells)
            .flat_map(|k| {
                let m = w + self.sign(k) * bump_half;
                [m, m]
            })
            .collect()
    }
}

/// A test density on [0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TestDensity {
    Uniform,
    Linear,
    Cosine { amplitude: f64 },
    Sawtooth(Sawtooth),
}

impl TestDensity {
    pub fn uniform() -> Self {
        Self::Uniform
    }

    pub fn linear() -> Self {
        Self::Linear
    }

    pub fn cosine(amplitude: f64) -> Result<Self> {
        if !(amplitude > 0.0 && amplitude < 1.0) {
            return Err(Error::Domain(format!(
                "cosine amplitude must lie in (0,1), got {amplitude}"
            )));
        }
        Ok(Self::Cosine { amplitude })
    }

    pub fn sawtooth(beta: f64, lipschitz: f64, bandwidth: f64) -> Result<Self> {
        Ok(Self::Sawtooth(Sawtooth::new(beta, lipschitz, bandwidth)?))
    }

    /// Density value at x ∈ [0, 1].
    pub fn eval(&self, x: f64) -> Result<f64> {
        if !x.is_finite() || !(0.0..=1.0).contains(&x) {
            return Err(Error::Domain(format!("density argument must lie in [0,1], got {x}")));
        }
        Ok(self.eval_unchecked(x))
    }

    #[inline]
    pub(crate) fn eval_unchecked(&self, x: f64) -> f64 {
        match self {
            Self::Uniform => 1.0,
            Self::Linear => 2.0 * x,
            Self::Cosine { amplitude } => {
                1.0 + amplitude * (2.0 * std::f64::consts::PI * x).cos()
            }
            Self::Sawtooth(s) => 1.0 + s.bump(x),
        }
    }

    /// Exact derivative of order 0, 1, or 2 where the variant is smooth
    /// enough; errors elsewhere (sawtooth cusps for β ≤ 1, order 2 on the
    /// sawtooth).
    pub fn derivative(&self, x: f64, order: usize) -> Result<f64> {
        if !x.is_finite() || !(0.0..=1.0).contains(&x) {
            return Err(Error::Domain(format!("density argument must lie in [0,1], got {x}")));
        }
        if order == 0 {
            return Ok(self.eval_unchecked(x));
        }
        match self {
            Self::Uniform => Ok(0.0),
            Self::Linear => Ok(if order == 1 { 2.0 } else { 0.0 }),
            Self::Cosine { amplitude } => {
                let w = 2.0 * std::f64::consts::PI;
                match order {
                    1 => Ok(-amplitude * w * (w * x).sin()),
                    2 => Ok(-amplitude * w * w * (w * x).cos()),
                    _ => Err(Error::Derivative { order, x }),
                }
            }
            Self::Sawtooth(s) => {
                if order > 1 {
                    return Err(Error::Derivative { order, x });
                }
                s.bump_derivative(x)
            }
        }
    }

    /// Rejection envelope constant (sup of the density).
    pub fn envelope(&self) -> f64 {
        match self {
            Self::Uniform => 1.0,
            Self::Linear => 2.0,
            Self::Cosine { amplitude } => 1.0 + amplitude,
            Self::Sawtooth(s) => 1.0 + s.amplitude(),
        }
    }

    /// True when the density does not depend on the bandwidth, so it can sit
    /// fixed across an n-sweep.
    pub fn fixed_across_bandwidths(&self) -> bool {
        !matches!(self, Self::Sawtooth(_))
    }

    /// n i.i.d. draws. Uniform uses the raw stream, Linear the inverse CDF
    /// x = √u, Cosine and Sawtooth rejection from the uniform envelope.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        (0..n).map(|_| self.sample_one(rng)).collect()
    }

    pub fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Self::Uniform => rng.random::<f64>(),
            Self::Linear => rng.random::<f64>().sqrt(),
            _ => {
                let m = self.envelope();
                loop {
                    let x: f64 = rng.random();
                    let u: f64 = rng.random();
                    if u * m <= self.eval_unchecked(x) {
                        return x;
                    }
                }
            }
        }
    }

    pub fn as_sawtooth(&self) -> Option<&Sawtooth> {
        match self {
            Self::Sawtooth(s) => Some(s),
            _ => None,
        }
    }
}

/// Hölder class parameters (β, L) with the derived derivative order
/// m = max{ℓ ∈ ℕ : ℓ < β}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolderClass {
    beta: f64,
    lipschitz: f64,
}

impl HolderClass {
    pub fn new(beta: f64, lipschitz: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) || !(lipschitz > 0.0 && lipschitz.is_finite()) {
            return Err(Error::Domain(format!(
                "Hölder class needs positive finite (beta, L), got ({beta}, {lipschitz})"
            )));
        }
        Ok(Self { beta, lipschitz })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    /// Largest integer strictly below β.
    pub fn derivative_order(&self) -> usize {
        let m = if self.beta.fract() == 0.0 {
            self.beta - 1.0
        } else {
            self.beta.floor()
        };
        m as usize
    }
}

/// Grid estimate of the Hölder seminorm
/// sup_{x≠y} |f^(m)(x) - f^(m)(y)| / |x - y|^{β-m}.
///
/// Membership in Σ(β, L) is `holder_seminorm(..) <= L`. Grid points where
/// the required derivative does not exist are replaced by both one-sided
/// limits taken half a grid step away.
pub fn holder_seminorm(d: &TestDensity, cls: &HolderClass, grid_size: usize) -> Result<f64> {
    if grid_size < 10 {
        return Err(Error::Domain(format!("seminorm grid needs >= 10 points, got {grid_size}")));
    }
    let m = cls.derivative_order();
    let g = grid_size;
    let h = 1.0 / (g - 1) as f64;
    // derivative values; non-differentiable nodes contribute both one-sided
    // limits evaluated h/2 to either side
    let mut points: Vec<(f64, f64)> = Vec::with_capacity(g + 8);
    for i in 0..g {
        let x = i as f64 * h;
        match d.derivative(x, m) {
            Ok(v) => points.push((x, v)),
            Err(_) => {
                for side in [-0.5, 0.5] {
                    let xs = (x + side * h).clamp(0.0, 1.0);
                    if let Ok(v) = d.derivative(xs, m) {
                        points.push((x, v));
                    }
                }
            }
        }
    }
    let exponent = cls.beta - m as f64;
    let mut sup: f64 = 0.0;
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            let (xi, fi) = points[i];
            let (xj, fj) = points[j];
            let dist = (xj - xi).abs();
            if dist < 1e-15 {
                continue;
            }
            let ratio = (fj - fi).abs() / dist.powf(exponent);
            if ratio > sup {
                sup = ratio;
            }
        }
    }
    Ok(sup)
}
