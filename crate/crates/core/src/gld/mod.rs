//! FKML Generalized Lambda Distribution: evaluation and percentile-matching fit.
//!
//! `Q(p) = λ + [ (p^α − 1)/α − ((1 − p)^β − 1)/β ] / η`
//!
//! The fit matches `Q` to histogram-interpolated percentiles at
//! p = 0.10, 0.25, 0.50, 0.75, 0.90 in the least-squares sense.

pub mod lbfgsb;

use serde::{Deserialize, Serialize};

use crate::error::{check_probability, Error, Result};
use crate::estimate::{Method, QuantileEstimate};
use crate::grouped::GroupedData;
use crate::piecewise::hist_estimate;
use lbfgsb::{Bounds, Settings};

/// Shapes below this magnitude use the logarithmic limit.
const SHAPE_LIMIT: f64 = 1e-8;

pub const MATCHED_PROBABILITIES: [f64; 5] = [0.10, 0.25, 0.50, 0.75, 0.90];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GldParams {
    /// Location.
    pub lambda: f64,
    /// Inverse scale.
    pub eta: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl GldParams {
    pub fn new(lambda: f64, eta: f64, alpha: f64, beta: f64) -> Result<Self> {
        if !(eta > 0.0) || !eta.is_finite() {
            return Err(Error::InvalidGld(format!("eta must be positive and finite (got {eta})")));
        }
        if !lambda.is_finite() || !alpha.is_finite() || !beta.is_finite() {
            return Err(Error::InvalidGld(format!(
                "non-finite parameters (lambda {lambda}, alpha {alpha}, beta {beta})"
            )));
        }
        if alpha == 0.0 || beta == 0.0 {
            return Err(Error::InvalidGld("shape parameters must be nonzero".into()));
        }
        Ok(GldParams { lambda, eta, alpha, beta })
    }

    pub fn quantile(&self, p: f64) -> f64 {
        self.lambda + (box_cox(p, self.alpha) - box_cox(1.0 - p, self.beta)) / self.eta
    }

    /// Quantile density `Q'(p) = [p^(α−1) + (1−p)^(β−1)] / η`.
    pub fn quantile_density(&self, p: f64) -> f64 {
        (p.powf(self.alpha - 1.0) + (1.0 - p).powf(self.beta - 1.0)) / self.eta
    }
}

/// `(u^s − 1)/s`, with its `ln u` limit near `s = 0`.
fn box_cox(u: f64, s: f64) -> f64 {
    if s.abs() < SHAPE_LIMIT {
        u.ln()
    } else {
        (s * u.ln()).exp_m1() / s
    }
}

pub fn gld_quantile(params: &GldParams, p: f64) -> Result<f64> {
    check_probability(p)?;
    Ok(params.quantile(p))
}

/// Density at the `p` quantile, `f(Q(p)) = 1 / Q'(p)`.
pub fn gld_density_at_p(params: &GldParams, p: f64) -> Result<f64> {
    check_probability(p)?;
    let q = params.quantile_density(p);
    if !(q > 0.0) || !q.is_finite() {
        return Err(Error::InvalidGld(format!(
            "quantile density {q} at p = {p} is not positive for {params:?}"
        )));
    }
    Ok(1.0 / q)
}

pub fn estimate_from_params(params: &GldParams, p: f64) -> Result<QuantileEstimate> {
    let x = gld_quantile(params, p)?;
    let f = gld_density_at_p(params, p)?;
    QuantileEstimate::checked(p, x, f, Method::Gld)
}

/// The five `(p, x̂_p)` targets, interpolated from the histogram.
pub fn empirical_percentiles(gd: &GroupedData) -> Result<[(f64, f64); 5]> {
    let mut out = [(0.0, 0.0); 5];
    for (slot, &p) in out.iter_mut().zip(&MATCHED_PROBABILITIES) {
        *slot = (p, hist_estimate(gd, p)?.x_hat);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    /// Residual below which a fit counts as converged. Defaults to
    /// `1e-8 * (x̂_0.9 − x̂_0.1)²`.
    pub tol: Option<f64>,
    /// Iteration limit per start.
    pub max_iterations: usize,
    /// Initial `(α, β)` pairs.
    pub starts: Vec<[f64; 2]>,
    pub eta_min: f64,
    pub eta_max: f64,
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub beta_min: f64,
    pub beta_max: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        let grid = [0.1, 0.5, 1.0];
        FitConfig {
            tol: None,
            max_iterations: 500,
            starts: grid.iter().flat_map(|&a| grid.iter().map(move |&b| [a, b])).collect(),
            eta_min: 1e-6,
            eta_max: 1e6,
            alpha_min: -1.5,
            alpha_max: 5.0,
            beta_min: -1.5,
            beta_max: 5.0,
        }
    }
}

impl FitConfig {
    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(format!("fit config: {m}")));
        if self.starts.is_empty() {
            return bad("at least one start is required".into());
        }
        if self.max_iterations == 0 {
            return bad("max_iterations must be positive".into());
        }
        if !(self.eta_min > 0.0 && self.eta_min < self.eta_max) {
            return bad(format!("eta bounds [{}, {}] are invalid", self.eta_min, self.eta_max));
        }
        if !(self.alpha_min < self.alpha_max) || !(self.beta_min < self.beta_max) {
            return bad("shape bounds are empty".into());
        }
        if let Some(tol) = self.tol {
            if !(tol > 0.0) {
                return bad(format!("tol must be positive (got {tol})"));
            }
        }
        Ok(())
    }

    fn bounds(&self) -> [Bounds; 4] {
        [
            Bounds::FREE,
            Bounds::new(self.eta_min, self.eta_max),
            Bounds::new(self.alpha_min, self.alpha_max),
            Bounds::new(self.beta_min, self.beta_max),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub params: GldParams,
    /// Sum of squared percentile mismatches, in squared data units.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub matched_percentiles: [(f64, f64); 5],
}

/// Least-squares percentile-matching objective over `θ = (λ, η, α, β)`.
#[derive(Debug, Clone)]
pub struct PercentileObjective {
    targets: [(f64, f64); 5],
}

impl PercentileObjective {
    pub fn new(targets: [(f64, f64); 5]) -> Self {
        PercentileObjective { targets }
    }

    pub fn value(&self, theta: &[f64]) -> f64 {
        let params = GldParams {
            lambda: theta[0],
            eta: theta[1],
            alpha: theta[2],
            beta: theta[3],
        };
        self.targets
            .iter()
            .map(|&(p, x)| {
                let r = params.quantile(p) - x;
                r * r
            })
            .sum()
    }

    /// Central-difference gradient, as used by the optimizer.
    pub fn gradient(&self, theta: &[f64], bounds: &[Bounds], out: &mut [f64]) {
        lbfgsb::central_difference(&|t: &[f64]| self.value(t), theta, bounds, 1e-6, out);
    }
}

/// Fits the FKML GLD by least-squares percentile matching with a
/// box-constrained quasi-Newton search from every configured start.
///
/// The search runs on percentiles standardized by `x̂_0.5` and
/// `x̂_0.9 − x̂_0.1`, which makes the fit location/scale equivariant.
pub fn fit_percentile_matching(gd: &GroupedData, config: &FitConfig) -> Result<FitReport> {
    config.validate()?;
    if gd.len() < 2 {
        return Err(Error::DegenerateFit(
            "at least two bins are needed to identify four parameters".into(),
        ));
    }
    let targets = empirical_percentiles(gd)?;
    let center = targets[2].1;
    let spread = targets[4].1 - targets[0].1;
    if !(spread > 0.0) || !spread.is_finite() {
        return Err(Error::DegenerateFit("percentile spread is zero".into()));
    }
    let tol = config.tol.unwrap_or(1e-8 * spread * spread);

    let mut standardized = targets;
    for t in standardized.iter_mut() {
        t.1 = (t.1 - center) / spread;
    }
    let objective = PercentileObjective::new(standardized);
    let bounds = config.bounds();
    let settings = Settings {
        max_iterations: config.max_iterations,
        ..Settings::default()
    };

    let mut best: Option<lbfgsb::Outcome> = None;
    for &[alpha0, beta0] in &config.starts {
        let x0 = [0.0, 2.0, alpha0, beta0];
        let outcome = lbfgsb::minimize(
            |t| objective.value(t),
            |t, g| objective.gradient(t, &bounds, g),
            &x0,
            &bounds,
            &settings,
        );
        if outcome.f.is_finite() && best.as_ref().is_none_or(|b| outcome.f < b.f) {
            best = Some(outcome);
        }
    }
    let best = best.ok_or_else(|| Error::DegenerateFit("objective is not finite at any start".into()))?;

    let nudge = |s: f64| if s == 0.0 { SHAPE_LIMIT * 1e-3 } else { s };
    let params = GldParams::new(
        center + spread * best.x[0],
        best.x[1] / spread,
        nudge(best.x[2]),
        nudge(best.x[3]),
    )?;
    let residual = best.f * spread * spread;
    let report = FitReport {
        params,
        residual,
        iterations: best.iterations,
        converged: residual <= tol || best.projected_gradient <= settings.pg_tol,
        matched_percentiles: targets,
    };
    if !report.converged && residual > 1e-2 * spread * spread {
        return Err(Error::FitNotConverged(Box::new(report)));
    }
    check_monotone(&params)?;
    Ok(report)
}

fn check_monotone(params: &GldParams) -> Result<()> {
    let mut prev = f64::NEG_INFINITY;
    for i in 1..100 {
        let q = params.quantile(i as f64 / 100.0);
        if !(q > prev) {
            return Err(Error::InvalidGld(format!("fitted quantile function is not increasing: {params:?}")));
        }
        prev = q;
    }
    Ok(())
}

/// Fits once and evaluates the GLD quantile and density at `p`.
pub fn gld_estimate(gd: &GroupedData, p: f64, config: &FitConfig) -> Result<QuantileEstimate> {
    check_probability(p)?;
    let report = fit_percentile_matching(gd, config)?;
    estimate_from_params(&report.params, p)
}
