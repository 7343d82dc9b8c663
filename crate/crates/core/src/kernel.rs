//! The beta smoothing kernel K_{t,b} and its exact functionals.
//!
//! K_{t,b} is the Beta(t/b + 1, (1-t)/b + 1) density: mode at the evaluation
//! point t, effective width ~√(b t(1-t)) in the interior and ~b at the
//! endpoints. Everything here is closed form — evaluation goes through the
//! log-domain beta density, and the square integral has two independent
//! representations (log-beta ratio vs Stirling-ratio product) whose agreement
//! is one of the acceptance checks.

use crate::specfun::{
    ln_stirling_ratio_unchecked, log_beta_unchecked, BetaParams,
};
use crate::{Error, Result};
use rand::Rng;

/// Beta kernel with mode `t` ∈ [0,1] and bandwidth `b` ∈ (0,1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaKernel {
    t: f64,
    b: f64,
}

impl BetaKernel {
    pub fn new(t: f64, b: f64) -> Result<Self> {
        if !t.is_finite() || !(0.0..=1.0).contains(&t) {
            return Err(Error::Domain(format!("kernel mode must lie in [0,1], got {t}")));
        }
        if !b.is_finite() || b <= 0.0 || b >= 1.0 {
            return Err(Error::Bandwidth(b));
        }
        Ok(Self { t, b })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Shape pair (t/b + 1, (1-t)/b + 1); both are ≥ 1 by construction.
    pub fn shapes(&self) -> BetaParams {
        BetaParams::new(self.t / self.b + 1.0, (1.0 - self.t) / self.b + 1.0)
            .expect("kernel shapes are >= 1")
    }

    /// K_{t,b}(x) for x ∈ [0,1]; exact 0 at an endpoint whose exponent is
    /// positive, finite limit when the exponent vanishes (t = 0 or t = 1).
    pub fn evaluate(&self, x: f64) -> Result<f64> {
        if !x.is_finite() || !(0.0..=1.0).contains(&x) {
            return Err(Error::Domain(format!("kernel argument must lie in [0,1], got {x}")));
        }
        Ok(self.evaluate_unchecked(x))
    }

    #[inline]
    pub(crate) fn evaluate_unchecked(&self, x: f64) -> f64 {
        self.shapes().logpdf_unchecked(x).exp()
    }

    /// E(ξ) - t = b(1-2t)/(1+2b) for ξ ~ K_{t,b}; exact.
    pub fn mean_shift(&self) -> f64 {
        self.b * (1.0 - 2.0 * self.t) / (1.0 + 2.0 * self.b)
    }

    /// Var(ξ) for ξ ~ K_{t,b}; exact, via the beta moments of the shape pair.
    pub fn variance(&self) -> f64 {
        self.shapes().moments().1
    }

    /// Δ₁ = mean_shift - b(1-2t); simplifies to -2b²(1-2t)/(1+2b), so
    /// |Δ₁|/b² ≤ 2 for every (t, b).
    pub fn mean_shift_remainder(&self) -> f64 {
        self.mean_shift() - self.b * (1.0 - 2.0 * self.t)
    }

    /// Δ₂ = variance - b·t(1-t); |Δ₂|/b² stays below 1 for every (t, b).
    pub fn variance_remainder(&self) -> f64 {
        self.variance() - self.b * self.t * (1.0 - self.t)
    }

    /// ∫₀¹ K²_{t,b}(x) dx = B(2t/b+1, 2(1-t)/b+1) / B²(t/b+1, (1-t)/b+1),
    /// evaluated in the log domain.
    pub fn square_integral(&self) -> f64 {
        let u = self.t / self.b;
        let v = (1.0 - self.t) / self.b;
        (log_beta_unchecked(2.0 * u + 1.0, 2.0 * v + 1.0)
            - 2.0 * log_beta_unchecked(u + 1.0, v + 1.0))
        .exp()
    }

    /// The same square integral written as a Stirling-ratio product:
    /// c(b)·(t(1-t))^{-1/2} · R²(t/b)R²((1-t)/b)R(2/b+1) /
    /// (R(2t/b)R(2(1-t)/b)R²(1/b+1)).
    ///
    /// Undefined at t ∈ {0, 1} where the direct form remains valid.
    pub fn square_integral_stirling(&self) -> Result<f64> {
        if self.t == 0.0 || self.t == 1.0 {
            return Err(Error::Domain(
                "the Stirling-ratio form of the square integral needs 0 < t < 1".into(),
            ));
        }
        let (t, b) = (self.t, self.b);
        let u = t / b;
        let v = (1.0 - t) / b;
        let ln_ratio = 2.0 * ln_stirling_ratio_unchecked(u) + 2.0 * ln_stirling_ratio_unchecked(v)
            + ln_stirling_ratio_unchecked(2.0 / b + 1.0)
            - ln_stirling_ratio_unchecked(2.0 * u)
            - ln_stirling_ratio_unchecked(2.0 * v)
            - 2.0 * ln_stirling_ratio_unchecked(1.0 / b + 1.0);
        Ok(square_integral_prefactor(b) / (t * (1.0 - t)).sqrt() * ln_ratio.exp())
    }

    /// Closed form for the kernel's value at its mode:
    /// K_{t,b}(t) = R(t/b)R((1-t)/b)√b(1+1/b) / (R(1/b)√(2π t(1-t))).
    ///
    /// Undefined at t ∈ {0, 1}.
    pub fn peak_height(&self) -> Result<f64> {
        if self.t == 0.0 || self.t == 1.0 {
            return Err(Error::Domain("peak height closed form needs 0 < t < 1".into()));
        }
        let (t, b) = (self.t, self.b);
        let ln = ln_stirling_ratio_unchecked(t / b) + ln_stirling_ratio_unchecked((1.0 - t) / b)
            - ln_stirling_ratio_unchecked(1.0 / b);
        Ok(ln.exp() * b.sqrt() * (1.0 + 1.0 / b)
            / (2.0 * std::f64::consts::PI * t * (1.0 - t)).sqrt())
    }

    /// One draw ξ ~ K_{t,b}.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.shapes().sample(rng)
    }
}

/// The bandwidth-only prefactor c(b) of the Stirling-ratio form:
/// c(b) = e⁻¹ √(2/π) · b (1/b+1)³ (2/b+1)^{-3/2} (1 + (2/b+1)⁻¹)^{2/b}.
///
/// Grows like b^{-1/2}/(2√π) as b → 0.
pub fn square_integral_prefactor(b: f64) -> f64 {
    let q = 2.0 / b + 1.0;
    let ln = -1.0 + 0.5 * (2.0 / std::f64::consts::PI).ln() + b.ln()
        + 3.0 * (1.0 / b + 1.0).ln()
        - 1.5 * q.ln()
        + (2.0 / b) * (1.0 / q).ln_1p();
    ln.exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::Quadrature;
    use crate::stream::substream;
    use approx::assert_relative_eq;

    #[test]
    fn construction_bounds() {
        assert!(BetaKernel::new(0.0, 0.5).is_ok());
        assert!(BetaKernel::new(1.0, 0.999).is_ok());
        assert!(BetaKernel::new(-0.1, 0.5).is_err());
        assert!(BetaKernel::new(0.5, 0.0).is_err());
        assert!(BetaKernel::new(0.5, 1.0).is_err());
    }

    #[test]
    fn evaluate_known_values() {
        // (t=0.5, b=0.5) is Beta(2,2): 6x(1-x)
        let k = BetaKernel::new(0.5, 0.5).unwrap();
        assert_relative_eq!(k.evaluate(0.5).unwrap(), 1.5, max_relative = 1e-14);
        assert_eq!(k.evaluate(0.0).unwrap(), 0.0);
        assert_eq!(k.evaluate(1.0).unwrap(), 0.0);
        // (t=0, b=1) is Beta(1,2): 2(1-x), finite at the endpoint
        let k = BetaKernel::new(0.0, 1.0 - f64::EPSILON).unwrap();
        assert_relative_eq!(k.evaluate(0.0).unwrap(), 2.0, max_relative = 1e-9);
        assert!(k.evaluate(1.5).is_err());
    }

    #[test]
    fn mean_shift_closed_form() {
        for b in [0.5, 0.1, 0.01] {
            assert_eq!(BetaKernel::new(0.5, b).unwrap().mean_shift(), 0.0);
        }
        let k = BetaKernel::new(0.0, 0.1).unwrap();
        assert_relative_eq!(k.mean_shift(), 0.1 / 1.2, max_relative = 1e-15);
        let k = BetaKernel::new(1.0, 0.1).unwrap();
        assert_relative_eq!(k.mean_shift(), -0.1 / 1.2, max_relative = 1e-15);
        // agreement with the beta mean of the shape pair
        for (t, b) in [(0.3, 0.01), (0.9, 0.25), (0.0, 0.7)] {
            let k = BetaKernel::new(t, b).unwrap();
            let (mean, _) = k.shapes().moments();
            assert_relative_eq!(k.mean_shift(), mean - t, max_relative = 1e-12, epsilon = 1e-15);
        }
    }

    #[test]
    fn variance_closed_form() {
        assert_relative_eq!(BetaKernel::new(0.5, 0.5).unwrap().variance(), 0.05, max_relative = 1e-14);
        // t=0, b=0.5 has shapes (1,3): variance 3/80
        assert_relative_eq!(BetaKernel::new(0.0, 0.5).unwrap().variance(), 0.0375, max_relative = 1e-14);
        // algebraic form b(t+b)(1-t+b)/((1+2b)^2 (1+3b))
        for (t, b) in [(0.2, 0.01), (0.7, 0.3), (1.0, 0.05)] {
            let k = BetaKernel::new(t, b).unwrap();
            let alg = b * (t + b) * (1.0 - t + b) / ((1.0 + 2.0 * b).powi(2) * (1.0 + 3.0 * b));
            assert_relative_eq!(k.variance(), alg, max_relative = 1e-12);
        }
    }

    #[test]
    fn remainders_are_second_order() {
        // Δ₁ = -2b²(1-2t)/(1+2b)
        for (t, b) in [(0.0, 0.1), (0.3, 0.01), (0.9, 0.001)] {
            let k = BetaKernel::new(t, b).unwrap();
            let want = -2.0 * b * b * (1.0 - 2.0 * t) / (1.0 + 2.0 * b);
            assert_relative_eq!(k.mean_shift_remainder(), want, max_relative = 1e-9, epsilon = 1e-18);
        }
        assert_eq!(BetaKernel::new(0.5, 0.37).unwrap().mean_shift_remainder(), 0.0);
        // |Δ_j|/b² bounded over a grid
        for ti in 0..=20 {
            for b in [0.1, 0.01, 0.001] {
                let k = BetaKernel::new(ti as f64 / 20.0, b).unwrap();
                assert!(k.mean_shift_remainder().abs() / (b * b) <= 2.0 + 1e-12);
                assert!(k.variance_remainder().abs() / (b * b) <= 1.0 + 1e-12);
            }
        }
    }

    #[test]
    fn square_integral_known_values() {
        // B(3,3)/B(2,2)² = (1/30)/(1/36)
        let k = BetaKernel::new(0.5, 0.5).unwrap();
        assert_relative_eq!(k.square_integral(), 1.2, max_relative = 1e-13);
        // b = 1 - eps: B(2,2)/B(1.5,1.5)² = (1/6)/(π/8)²
        let k = BetaKernel::new(0.5, 1.0 - f64::EPSILON).unwrap();
        let want = 32.0 / (3.0 * std::f64::consts::PI.powi(2));
        assert_relative_eq!(k.square_integral(), want, max_relative = 1e-9);
    }

    #[test]
    fn square_integral_matches_quadrature() {
        // brute-force ∫K² as the oracle for the log-beta route
        let q = Quadrature::new(4001).unwrap();
        for (t, b) in [(0.5, 0.5), (0.1, 0.01), (0.5, 1e-3), (0.9, 1e-4), (0.3, 0.05)] {
            let k = BetaKernel::new(t, b).unwrap();
            let brute = q.integrate_clustered(|x| {
                let v = k.evaluate_unchecked(x);
                v * v
            });
            assert_relative_eq!(k.square_integral(), brute, max_relative = 1e-6);
        }
    }

    #[test]
    fn stirling_form_matches_direct() {
        for b in [1e-2, 1e-3, 1e-4] {
            for ti in 1..10 {
                let k = BetaKernel::new(ti as f64 / 10.0, b).unwrap();
                let direct = k.square_integral();
                let stirling = k.square_integral_stirling().unwrap();
                assert_relative_eq!(stirling, direct, max_relative = 1e-10);
            }
        }
        assert!(BetaKernel::new(0.0, 0.5).unwrap().square_integral_stirling().is_err());
        assert!(BetaKernel::new(1.0, 0.5).unwrap().square_integral_stirling().is_err());
    }

    #[test]
    fn prefactor_boundedness() {
        // c(b)·√b settles near 1/(2√π) ≈ 0.2821
        for b in [1e-2, 1e-3, 1e-4] {
            let v = square_integral_prefactor(b) * b.sqrt();
            assert!((0.27..=0.30).contains(&v), "c(b)√b = {v} at b = {b}");
        }
    }

    #[test]
    fn square_integral_sandwich() {
        // A_b(t)·√(b t(1-t)) pinned to a fixed interval on t ∈ [1/2, 1-b]
        for b in [1e-2, 1e-3, 1e-4, 1e-5] {
            for i in 0..=20 {
                let t = 0.5 + (1.0 - b - 0.5) * i as f64 / 20.0;
                let k = BetaKernel::new(t, b).unwrap();
                let v = k.square_integral() * (b * t * (1.0 - t)).sqrt();
                assert!((0.24..=0.30).contains(&v), "sandwich value {v} at t={t}, b={b}");
            }
        }
    }

    #[test]
    fn peak_height_matches_evaluate() {
        let k = BetaKernel::new(0.5, 0.5).unwrap();
        assert_relative_eq!(k.peak_height().unwrap(), 1.5, max_relative = 1e-12);
        for (t, b) in [(0.5, 0.01), (0.25, 1e-3), (0.75, 1e-4), (0.1, 0.2)] {
            let k = BetaKernel::new(t, b).unwrap();
            assert_relative_eq!(
                k.peak_height().unwrap(),
                k.evaluate(t).unwrap(),
                max_relative = 1e-10
            );
        }
        assert!(BetaKernel::new(0.0, 0.5).unwrap().peak_height().is_err());
    }

    #[test]
    fn peak_height_scaling_bound() {
        // sup K_{t,b} · √(b t(1-t)) bounded: tends to 1/√(2π) ≈ 0.3989
        for b in [1e-2, 1e-3, 1e-4] {
            for ti in [0.25, 0.5, 0.75] {
                let k = BetaKernel::new(ti, b).unwrap();
                let v = k.peak_height().unwrap() * (b * ti * (1.0 - ti)).sqrt();
                assert!(v < 0.45, "peak scaling {v} at t={ti}, b={b}");
            }
        }
    }

    #[test]
    fn mode_is_at_t() {
        for (t, b) in [(0.3, 0.05), (0.5, 0.5), (0.9, 0.01)] {
            let k = BetaKernel::new(t, b).unwrap();
            let peak = k.evaluate(t).unwrap();
            for i in 0..=200 {
                let x = i as f64 / 200.0;
                assert!(k.evaluate(x).unwrap() <= peak * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn sample_moments_match_closed_forms() {
        let k = BetaKernel::new(0.3, 0.01).unwrap();
        let mut rng = substream(5, 0);
        let n = 100_000;
        let draws: Vec<f64> = (0..n).map(|_| k.sample(&mut rng)).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let want_mean = (0.3 + 0.01) / 1.02;
        let se = (k.variance() / n as f64).sqrt();
        assert!((mean - want_mean).abs() < 4.0 * se);
        let var = draws.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
        let m4 = draws.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n as f64;
        let se_var = ((m4 - var * var) / n as f64).sqrt();
        assert!((var - k.variance()).abs() < 4.0 * se_var);
    }
}
