//! Experiment drivers: sweep n or b, tabulate risk functionals, fit
//! log-log slopes, and package everything into a CSV-ready report.
//!
//! A config fully determines a report: grids, seed, and quadrature size are
//! all explicit, and reports echo the config so a run can be reproduced from
//! its own output file.

use crate::density::TestDensity;
use crate::estimator::theoretical_bandwidth;
use crate::kernel::BetaKernel;
use crate::quad::Quadrature;
use crate::risk::{
    boundary_integral, integrated_bias, integrated_variance_term, lower_bound_check, mc_risk,
};
use crate::stream::substream;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Which driver a config runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    /// Risk vs n at the rate-optimal bandwidth b = c·n^{-2/(2β+1)}.
    Rate,
    /// Integrated bias of the linear density vs b (the order-b floor).
    BiasFloor,
    /// Integrated bias of the b-coupled sawtooth vs b, normalized by b^{β/2}.
    SawtoothBias,
    /// Normalized variance integral vs b against the boundary integral d(b,p).
    LogFactor,
    /// Suprema of the kernel-moment remainders |Δ_j|/b² per b.
    Lemma4Check,
    /// Monte Carlo risk vs the two lower bounds for one (density, p, b, n).
    BoundSuite,
}

impl ExperimentKind {
    pub fn tag(&self) -> &'static str {
        match self {
            Self::Rate => "rate",
            Self::BiasFloor => "bias-floor",
            Self::SawtoothBias => "sawtooth-bias",
            Self::LogFactor => "log-factor",
            Self::Lemma4Check => "lemma4-check",
            Self::BoundSuite => "bound-suite",
        }
    }
}

impl std::str::FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rate" => Ok(Self::Rate),
            "bias-floor" => Ok(Self::BiasFloor),
            "sawtooth-bias" => Ok(Self::SawtoothBias),
            "log-factor" => Ok(Self::LogFactor),
            "lemma4-check" => Ok(Self::Lemma4Check),
            "bound-suite" => Ok(Self::BoundSuite),
            other => Err(Error::Config(format!("unknown experiment tag '{other}'"))),
        }
    }
}

fn default_c() -> f64 {
    1.0
}

fn default_p() -> f64 {
    2.0
}

fn default_beta() -> f64 {
    2.0
}

fn default_lipschitz() -> f64 {
    1.0
}

/// Everything a run needs; serializes to the JSON the CLI consumes and the
/// report header echoes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    /// Density spec: `uniform`, `linear`, `cosine:a=<v>`, or
    /// `sawtooth:beta=<v>,L=<v>` (the sawtooth takes b from the run).
    pub density: String,
    #[serde(default)]
    pub n_grid: Vec<usize>,
    #[serde(default)]
    pub b_grid: Vec<f64>,
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default = "default_lipschitz")]
    pub lipschitz: f64,
    #[serde(default = "default_c")]
    pub c: f64,
    #[serde(default)]
    pub reps: usize,
    pub seed: u64,
    /// Override of the quadrature node count; 0 or absent picks per-run
    /// defaults.
    #[serde(default)]
    pub quad_nodes: Option<usize>,
    /// Expected log-log slope and tolerance, stored with the experiment so
    /// the pass criterion travels with the config rather than the code.
    #[serde(default)]
    pub slope_target: Option<f64>,
    #[serde(default)]
    pub slope_tol: Option<f64>,
}

impl ExperimentConfig {
    /// Parse the density spec; `b` feeds the sawtooth construction.
    pub fn density_for(&self, b: f64) -> Result<TestDensity> {
        parse_density_spec(&self.density, b)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p >= 1.0 && self.p.is_finite()) {
            return Err(Error::Config(format!("p must be >= 1, got {}", self.p)));
        }
        let increasing_n = self.n_grid.windows(2).all(|w| w[0] < w[1]);
        let increasing_b = self.b_grid.windows(2).all(|w| w[0] < w[1]);
        if !increasing_n || !increasing_b {
            return Err(Error::Config("grids must be strictly increasing".into()));
        }
        if self.b_grid.iter().any(|&b| b <= 0.0 || b >= 1.0) {
            return Err(Error::Config("every bandwidth must lie in (0,1)".into()));
        }
        match self.kind {
            ExperimentKind::Rate => {
                if self.n_grid.is_empty() {
                    return Err(Error::Config("rate experiment needs an n grid".into()));
                }
                if self.reps < 2 {
                    return Err(Error::Config("rate experiment needs reps >= 2".into()));
                }
                let d = self.density_for(0.5)?;
                if !d.fixed_across_bandwidths() {
                    return Err(Error::Config(
                        "rate experiment needs a density that stays fixed across n; \
                         the sawtooth is coupled to the bandwidth"
                            .into(),
                    ));
                }
            }
            ExperimentKind::BiasFloor => {
                if self.b_grid.is_empty() {
                    return Err(Error::Config("bias-floor experiment needs a b grid".into()));
                }
                if !matches!(self.density_for(0.5)?, TestDensity::Linear) {
                    return Err(Error::Config("bias-floor experiment runs on the linear density".into()));
                }
            }
            ExperimentKind::SawtoothBias => {
                if self.b_grid.is_empty() {
                    return Err(Error::Config("sawtooth-bias experiment needs a b grid".into()));
                }
                for &b in &self.b_grid {
                    self.density_for(b)?; // checks b <= 1/400 via construction
                }
            }
            ExperimentKind::LogFactor => {
                if self.b_grid.is_empty() || self.n_grid.is_empty() {
                    return Err(Error::Config("log-factor experiment needs b and n grids".into()));
                }
                if !matches!(self.density_for(0.5)?, TestDensity::Uniform) {
                    return Err(Error::Config("log-factor experiment runs on the uniform density".into()));
                }
            }
            ExperimentKind::Lemma4Check => {
                if self.b_grid.is_empty() {
                    return Err(Error::Config("lemma4-check needs a b grid".into()));
                }
            }
            ExperimentKind::BoundSuite => {
                if self.b_grid.is_empty() || self.n_grid.is_empty() {
                    return Err(Error::Config("bound-suite needs b and n grids".into()));
                }
                if self.reps < 2 {
                    return Err(Error::Config("bound-suite needs reps >= 2".into()));
                }
            }
        }
        Ok(())
    }

    fn rule_for(&self, b: f64) -> Result<Quadrature> {
        match self.quad_nodes {
            Some(g) if g > 0 => Quadrature::new(g),
            _ => Ok(match self.kind {
                // boundary layers of the variance integrand sit at scale b;
                // the clustered rule resolves them with modest node counts
                ExperimentKind::LogFactor => {
                    let raw = ((40.0 / b.sqrt()).ceil() as usize).max(4001);
                    Quadrature::new(if raw % 2 == 0 { raw + 1 } else { raw })?
                }
                _ => Quadrature::for_bandwidth(b),
            }),
        }
    }
}

/// Ordinary least squares on (ln x, ln y).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub r_squared: f64,
}

/// Fit ln y = intercept + slope·ln x. Requires ≥ 2 strictly positive points
/// and a non-degenerate abscissa.
pub fn slope_fit(xs: &[f64], ys: &[f64]) -> Result<SlopeFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::SlopeFit);
    }
    if xs.iter().chain(ys).any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::SlopeFit);
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx <= 0.0 {
        return Err(Error::SlopeFit);
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ly.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr = (syy - slope * sxy).max(0.0);
    let dof = lx.len().saturating_sub(2);
    let slope_stderr = if dof > 0 { (ssr / dof as f64 / sxx).sqrt() } else { 0.0 };
    let r_squared = if syy > 0.0 { 1.0 - ssr / syy } else { 1.0 };
    Ok(SlopeFit { slope, intercept, slope_stderr, r_squared })
}

/// Result of one experiment run: named columns, one row per grid point, and
/// the slope fit when the experiment defines one.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub slope: Option<SlopeFit>,
}

impl ExperimentReport {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }
}

/// Dispatch on the config's experiment kind.
pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    match cfg.kind {
        ExperimentKind::Rate => run_rate_experiment(cfg),
        ExperimentKind::BiasFloor => run_bias_floor_experiment(cfg),
        ExperimentKind::SawtoothBias => run_sawtooth_bias_experiment(cfg),
        ExperimentKind::LogFactor => run_log_factor_experiment(cfg),
        ExperimentKind::Lemma4Check => run_lemma4_check(cfg),
        ExperimentKind::BoundSuite => run_bound_suite(cfg),
    }
}

/// Monte Carlo risk vs n with b = c·n^{-2/(2β+1)}; slope target -β/(2β+1).
pub fn run_rate_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let mut rows = Vec::with_capacity(cfg.n_grid.len());
    for &n in &cfg.n_grid {
        let b = theoretical_bandwidth(n, cfg.beta, cfg.c)?;
        let d = cfg.density_for(b)?;
        let q = cfg.rule_for(b)?;
        let risk = mc_risk(&d, b, n, cfg.p, cfg.reps, cfg.seed, q)?;
        rows.push(vec![n as f64, b, risk.value, risk.stderr]);
    }
    let ns: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let risks: Vec<f64> = rows.iter().map(|r| r[2]).collect();
    let slope = slope_fit(&ns, &risks)?;
    Ok(ExperimentReport {
        config: cfg.clone(),
        columns: str_cols(&["n", "b", "risk", "stderr"]),
        rows,
        slope: Some(slope),
    })
}

/// Integrated bias of the linear density over the b grid; the ratio column
/// normalizes by b (the expected floor).
pub fn run_bias_floor_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let d = TestDensity::linear();
    let mut rows = Vec::new();
    for &b in &cfg.b_grid {
        let q = cfg.rule_for(b)?;
        let v = integrated_bias(&d, b, cfg.p, q)?;
        rows.push(vec![b, v, v / b]);
    }
    let bs: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let vals: Vec<f64> = rows.iter().map(|r| r[1]).collect();
    let slope = slope_fit(&bs, &vals)?;
    Ok(ExperimentReport {
        config: cfg.clone(),
        columns: str_cols(&["b", "integrated_bias", "ratio"]),
        rows,
        slope: Some(slope),
    })
}

/// Integrated bias of the b-coupled sawtooth; ratio = value / b^{β/2}.
pub fn run_sawtooth_bias_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for &b in &cfg.b_grid {
        let d = cfg.density_for(b)?;
        let beta = d
            .as_sawtooth()
            .ok_or_else(|| Error::Config("sawtooth-bias experiment needs a sawtooth density".into()))?
            .beta();
        let q = cfg.rule_for(b)?;
        let v = integrated_bias(&d, b, cfg.p, q)?;
        rows.push(vec![b, v, v / b.powf(0.5 * beta)]);
    }
    let bs: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let vals: Vec<f64> = rows.iter().map(|r| r[1]).collect();
    let slope = slope_fit(&bs, &vals)?;
    Ok(ExperimentReport {
        config: cfg.clone(),
        columns: str_cols(&["b", "integrated_bias", "ratio"]),
        rows,
        slope: Some(slope),
    })
}

/// Normalized variance integral ∫(E Z_t²)^{p/2}·(n√b)^{p/2} against the
/// boundary integral d(b, p); their ratio settles into a fixed band exactly
/// when the |log b| factor is real.
pub fn run_log_factor_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let d = TestDensity::uniform();
    let n = cfg.n_grid[0];
    let mut rows = Vec::new();
    for &b in &cfg.b_grid {
        let q = cfg.rule_for(b)?;
        let ivt = integrated_variance_term(&d, b, n, cfg.p, q)?;
        let normalized = ivt * ((n as f64) * b.sqrt()).powf(0.5 * cfg.p);
        let dn = boundary_integral(b, cfg.p);
        let ratio = if dn > 0.0 { normalized / dn } else { f64::NAN };
        rows.push(vec![b, normalized, dn, ratio]);
    }
    Ok(ExperimentReport {
        config: cfg.clone(),
        columns: str_cols(&["b", "normalized_variance", "d_n", "ratio"]),
        rows,
        slope: None,
    })
}

/// Suprema over a fine t grid of |Δ₁|/b² and |Δ₂|/b² per bandwidth.
pub fn run_lemma4_check(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let t_nodes = 401;
    let mut rows = Vec::new();
    for &b in &cfg.b_grid {
        let (mut s1, mut s2) = (0.0f64, 0.0f64);
        for i in 0..t_nodes {
            let t = i as f64 / (t_nodes - 1) as f64;
            let k = BetaKernel::new(t, b)?;
            s1 = s1.max(k.mean_shift_remainder().abs() / (b * b));
            s2 = s2.max(k.variance_remainder().abs() / (b * b));
        }
        rows.push(vec![b, s1, s2]);
    }
    Ok(ExperimentReport {
        config: cfg.clone(),
        columns: str_cols(&["b", "sup_delta1_over_b2", "sup_delta2_over_b2"]),
        rows,
        slope: None,
    })
}

/// One (density, p, b, n) cell of the lower-bound inequality suite.
pub fn run_bound_suite(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let b = cfg.b_grid[0];
    let n = cfg.n_grid[0];
    let d = cfg.density_for(b)?;
    let q = cfg.rule_for(b)?;
    let mc = mc_risk(&d, b, n, cfg.p, cfg.reps, cfg.seed, q)?;
    let rep = lower_bound_check(&d, b, n, cfg.p, &mc, q)?;
    let rows = vec![vec![
        b,
        n as f64,
        cfg.p,
        mc.value,
        mc.stderr,
        rep.bias_bound,
        rep.variance_bound,
        rep.bias_margin,
        rep.variance_margin,
        rep.bias_holds as u8 as f64,
        rep.variance_holds as u8 as f64,
    ]];
    Ok(ExperimentReport {
        config: cfg.clone(),
        columns: str_cols(&[
            "b",
            "n",
            "p",
            "risk",
            "stderr",
            "bias_bound_p",
            "variance_bound",
            "bias_margin",
            "variance_margin",
            "bias_holds",
            "variance_holds",
        ]),
        rows,
        slope: None,
    })
}

/// Monte Carlo check of the kernel-moment closed forms at one (t, b):
/// returns |deviation|/stderr for the mean and the variance.
pub fn kernel_moment_mc_check(t: f64, b: f64, draws: usize, seed: u64) -> Result<(f64, f64)> {
    let k = BetaKernel::new(t, b)?;
    let mut rng = substream(seed, 0);
    let xs: Vec<f64> = (0..draws).map(|_| k.sample(&mut rng)).collect();
    let n = draws as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let want_mean = t + k.mean_shift();
    let se_mean = (k.variance() / n).sqrt();
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    let m4 = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
    let se_var = ((m4 - var * var).max(0.0) / n).sqrt();
    Ok((
        (mean - want_mean).abs() / se_mean,
        (var - k.variance()).abs() / se_var,
    ))
}

/// Numerical minimizer of h(b) = b^{β/2} + |log b|/(n b^{1/2})^{1/2} on
/// (0, 1), by golden-section search in log b. Returns (argmin, min value).
pub fn variance_penalty_minimizer(n: usize, beta: f64) -> Result<(f64, f64)> {
    if n == 0 || !(beta > 0.0) {
        return Err(Error::Domain("minimizer needs n >= 1 and beta > 0".into()));
    }
    let h = |ln_b: f64| -> f64 {
        let b = ln_b.exp();
        b.powf(0.5 * beta) + ln_b.abs() / ((n as f64) * b.sqrt()).sqrt()
    };
    let phi = 0.5 * (5.0f64.sqrt() - 1.0);
    let (mut lo, mut hi) = ((1e-12f64).ln(), -1e-12);
    let (mut x1, mut x2) = (hi - phi * (hi - lo), lo + phi * (hi - lo));
    let (mut f1, mut f2) = (h(x1), h(x2));
    for _ in 0..200 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = h(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = h(x2);
        }
    }
    let ln_b = 0.5 * (lo + hi);
    Ok((ln_b.exp(), h(ln_b)))
}

/// Parse the density mini-grammar; `b` feeds the sawtooth construction.
pub fn parse_density_spec(spec: &str, b: f64) -> Result<TestDensity> {
    let spec = spec.trim();
    match spec {
        "uniform" => return Ok(TestDensity::uniform()),
        "linear" => return Ok(TestDensity::linear()),
        _ => {}
    }
    if let Some(args) = spec.strip_prefix("cosine:") {
        let a = parse_kv(args, "a").ok_or_else(|| Error::DensitySpec(spec.into()))?;
        return TestDensity::cosine(a);
    }
    if let Some(args) = spec.strip_prefix("sawtooth:") {
        let beta = parse_kv(args, "beta").ok_or_else(|| Error::DensitySpec(spec.into()))?;
        let l = parse_kv(args, "L").ok_or_else(|| Error::DensitySpec(spec.into()))?;
        return TestDensity::sawtooth(beta, l, b);
    }
    Err(Error::DensitySpec(spec.into()))
}

fn parse_kv(args: &str, key: &str) -> Option<f64> {
    for part in args.split(',') {
        let mut it = part.splitn(2, '=');
        let k = it.next()?.trim();
        let v = it.next()?.trim();
        if k == key {
            return v.parse().ok();
        }
    }
    None
}

fn str_cols(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn slope_fit_exact_power_laws() {
        let xs = [1.0, 2.0, 4.0, 8.0];
        let fit = slope_fit(&xs, &xs).unwrap();
        assert_relative_eq!(fit.slope, 1.0, epsilon = 1e-14);
        assert_relative_eq!(fit.r_squared, 1.0, epsilon = 1e-14);

        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x.powf(-0.4)).collect();
        let fit = slope_fit(&xs, &ys).unwrap();
        assert_relative_eq!(fit.slope, -0.4, epsilon = 1e-12);
        assert_relative_eq!(fit.intercept, 3.0f64.ln(), epsilon = 1e-12);
        assert!(fit.slope_stderr < 1e-12);
    }

    #[test]
    fn slope_fit_with_noise() {
        // y = x² with 1% multiplicative noise on 8 points
        let mut rng = crate::stream::substream(99, 0);
        let xs: Vec<f64> = (1..=8).map(|i| 2.0f64.powi(i)).collect();
        let ys: Vec<f64> = xs
            .iter()
            .map(|x| x * x * (1.0 + 0.01 * (2.0 * rand::Rng::random::<f64>(&mut rng) - 1.0)))
            .collect();
        let fit = slope_fit(&xs, &ys).unwrap();
        assert!((fit.slope - 2.0).abs() < 0.1, "noisy slope {}", fit.slope);
        assert!(fit.r_squared > 0.99);
    }

    #[test]
    fn slope_fit_rejects_bad_input() {
        assert!(slope_fit(&[1.0], &[1.0]).is_err());
        assert!(slope_fit(&[1.0, 2.0], &[1.0]).is_err());
        assert!(slope_fit(&[1.0, 2.0], &[0.0, 1.0]).is_err());
        assert!(slope_fit(&[1.0, 1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn density_spec_grammar() {
        assert!(matches!(parse_density_spec("uniform", 0.5).unwrap(), TestDensity::Uniform));
        assert!(matches!(parse_density_spec("linear", 0.5).unwrap(), TestDensity::Linear));
        match parse_density_spec("cosine:a=0.1", 0.5).unwrap() {
            TestDensity::Cosine { amplitude } => assert_relative_eq!(amplitude, 0.1),
            other => panic!("parsed {other:?}"),
        }
        match parse_density_spec("sawtooth:beta=1.5,L=1", 1e-4).unwrap() {
            TestDensity::Sawtooth(s) => {
                assert_relative_eq!(s.beta(), 1.5);
                assert_relative_eq!(s.lipschitz(), 1.0);
            }
            other => panic!("parsed {other:?}"),
        }
        assert!(parse_density_spec("gaussian", 0.5).is_err());
        assert!(parse_density_spec("cosine:b=0.1", 0.5).is_err());
        // sawtooth construction fails when b is too coarse
        assert!(parse_density_spec("sawtooth:beta=1.5,L=1", 0.01).is_err());
    }

    #[test]
    fn config_validation() {
        let mut cfg = ExperimentConfig {
            kind: ExperimentKind::Rate,
            density: "sawtooth:beta=1.5,L=1".into(),
            n_grid: vec![1024, 2048],
            b_grid: vec![],
            p: 2.0,
            beta: 2.0,
            lipschitz: 1.0,
            c: 1.0,
            reps: 8,
            seed: 1,
            quad_nodes: None,
            slope_target: None,
            slope_tol: None,
        };
        assert!(cfg.validate().is_err()); // sawtooth cannot drive a rate run
        cfg.density = "cosine:a=0.1".into();
        assert!(cfg.validate().is_ok());
        cfg.n_grid = vec![2048, 1024];
        assert!(cfg.validate().is_err()); // not increasing
    }

    #[test]
    fn bias_floor_driver_matches_closed_form() {
        let cfg = ExperimentConfig {
            kind: ExperimentKind::BiasFloor,
            density: "linear".into(),
            n_grid: vec![],
            b_grid: vec![1e-4, 1e-3, 1e-2],
            p: 1.0,
            beta: 2.0,
            lipschitz: 1.0,
            c: 1.0,
            reps: 0,
            seed: 0,
            quad_nodes: None,
            slope_target: Some(1.0),
            slope_tol: Some(0.02),
        };
        let rep = run(&cfg).unwrap();
        assert_eq!(rep.columns[1], "integrated_bias");
        for row in &rep.rows {
            let (b, v) = (row[0], row[1]);
            assert_relative_eq!(v, b / (1.0 + 2.0 * b), max_relative = 1e-6);
        }
        let slope = rep.slope.unwrap();
        assert!((slope.slope - 1.0).abs() < 0.02, "slope {}", slope.slope);
    }

    #[test]
    fn lemma4_driver_closed_forms() {
        let cfg = ExperimentConfig {
            kind: ExperimentKind::Lemma4Check,
            density: "uniform".into(),
            n_grid: vec![],
            b_grid: vec![0.01, 0.1],
            p: 1.0,
            beta: 2.0,
            lipschitz: 1.0,
            c: 1.0,
            reps: 0,
            seed: 0,
            quad_nodes: None,
            slope_target: None,
            slope_tol: None,
        };
        let rep = run(&cfg).unwrap();
        for row in &rep.rows {
            let b = row[0];
            assert!(row[1] <= 2.0 + 1e-12);
            // sup |Δ₂|/b² = max((1+b)/((1+2b)²(1+3b)), 3/(4(1+3b)))
            let want = ((1.0 + b) / ((1.0 + 2.0 * b).powi(2) * (1.0 + 3.0 * b)))
                .max(0.75 / (1.0 + 3.0 * b));
            assert_relative_eq!(row[2], want, max_relative = 1e-6);
        }
    }

    #[test]
    fn minimizer_beats_neighbors() {
        let (b0, h0) = variance_penalty_minimizer(10_000, 2.0).unwrap();
        assert!(b0 > 0.0 && b0 < 1.0);
        let h = |b: f64| b.powf(1.0) + (b.ln().abs()) / ((1e4) * b.sqrt()).sqrt();
        assert!(h0 <= h(b0 * 1.01) && h0 <= h(b0 * 0.99));
    }

    #[test]
    fn kernel_moment_mc_within_four_se() {
        for (t, b) in [(0.1, 0.1), (0.5, 0.01), (0.9, 0.1)] {
            let (dm, dv) = kernel_moment_mc_check(t, b, 100_000, 7).unwrap();
            assert!(dm < 4.0, "mean deviation {dm} se at (t={t}, b={b})");
            assert!(dv < 4.0, "variance deviation {dv} se at (t={t}, b={b})");
        }
    }
}
