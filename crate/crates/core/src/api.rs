//! Request and response types shared by the CLI and the HTTP service.
//!
//! Both front ends build the same request and call the same function here,
//! so their numeric output is identical.

use serde::{Deserialize, Serialize};

use crate::error::{check_probability, Error, Result};
use crate::estimate::{EstimatorOptions, FittedModel, Method, QuantileEstimate};
use crate::gld::{self, FitConfig, FitReport};
use crate::grouped::{Bin, GroupedData};
use crate::interval::{ci_difference, ci_single, ConfidenceInterval};
use crate::sim::{self, SimCell, TableRow};

fn default_level() -> f64 {
    0.95
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateRequest {
    pub bins: Vec<Bin>,
    pub method: Method,
    pub p: f64,
    #[serde(default = "default_level")]
    pub level: f64,
    /// Sample size when the frequencies are relative or otherwise not counts.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_override: Option<f64>,
    #[serde(default)]
    pub options: EstimatorOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateResponse {
    pub method: Method,
    pub p: f64,
    pub level: f64,
    pub n: f64,
    pub point: f64,
    pub density: f64,
    pub lower: f64,
    pub upper: f64,
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Group {
    pub bins: Vec<Bin>,
    pub method: Method,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_override: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiffRequest {
    pub x: Group,
    pub y: Group,
    pub p: f64,
    #[serde(default = "default_level")]
    pub level: f64,
    #[serde(default)]
    pub options: EstimatorOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupEstimate {
    pub method: Method,
    pub n: f64,
    pub point: f64,
    pub density: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffResponse {
    pub p: f64,
    pub level: f64,
    pub x: GroupEstimate,
    pub y: GroupEstimate,
    /// Point estimate of `x̂_p − ŷ_p`.
    pub difference: f64,
    pub lower: f64,
    pub upper: f64,
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitRequest {
    pub bins: Vec<Bin>,
    #[serde(default)]
    pub config: FitConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimRequest {
    pub cells: Vec<SimCell>,
}

/// One result row; mirrors the simulate CSV columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimRow {
    pub family: String,
    pub params: String,
    pub n: usize,
    pub p: f64,
    pub method: Method,
    pub bins: String,
    pub coverage: Option<f64>,
    pub width: Option<f64>,
    pub failures: usize,
    pub error: Option<ErrorBody>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResponse {
    pub rows: Vec<SimRow>,
}

/// Structured error carried by every failed response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub kind: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub location: Option<String>,
}

impl From<&Error> for ErrorBody {
    fn from(e: &Error) -> Self {
        ErrorBody {
            code: e.code().to_string(),
            kind: e.kind().code().to_string(),
            message: e.to_string(),
            location: e.location(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorResponse {
    pub error: ErrorBody,
}

fn sample_size(gd: &GroupedData, n_override: Option<f64>) -> Result<f64> {
    match n_override {
        None => Ok(gd.n()),
        Some(n) if n.is_finite() && n > 0.0 => Ok(n),
        Some(n) => Err(Error::InvalidArgument(format!("n_override must be positive (got {n})"))),
    }
}

fn fit_group(bins: &[Bin], method: Method, p: f64, options: &EstimatorOptions) -> Result<(GroupedData, QuantileEstimate)> {
    let gd = GroupedData::new(bins.to_vec())?;
    let est = FittedModel::fit(&gd, method, options)?.estimate(p)?;
    Ok((gd, est))
}

fn estimate_response(est: &QuantileEstimate, ci: &ConfidenceInterval, n: f64) -> EstimateResponse {
    EstimateResponse {
        method: est.method,
        p: est.p,
        level: ci.level,
        n,
        point: est.x_hat,
        density: est.f_hat,
        lower: ci.lower,
        upper: ci.upper,
        width: ci.width(),
    }
}

pub fn estimate(req: &EstimateRequest) -> Result<EstimateResponse> {
    check_probability(req.p)?;
    check_probability(req.level)?;
    let (gd, est) = fit_group(&req.bins, req.method, req.p, &req.options)?;
    let n = sample_size(&gd, req.n_override)?;
    let ci = ci_single(&est, n, req.level)?;
    Ok(estimate_response(&est, &ci, n))
}

pub fn estimate_difference(req: &DiffRequest) -> Result<DiffResponse> {
    check_probability(req.p)?;
    check_probability(req.level)?;
    let group = |g: &Group, label: &'static str| -> Result<(GroupEstimate, QuantileEstimate)> {
        let in_group = |e: Error| Error::InGroup {
            group: label,
            source: Box::new(e),
        };
        let (gd, est) = fit_group(&g.bins, g.method, req.p, &req.options).map_err(in_group)?;
        let n = sample_size(&gd, g.n_override).map_err(in_group)?;
        Ok((
            GroupEstimate {
                method: est.method,
                n,
                point: est.x_hat,
                density: est.f_hat,
            },
            est,
        ))
    };
    let (x, ex) = group(&req.x, "x")?;
    let (y, ey) = group(&req.y, "y")?;
    let ci = ci_difference(&ex, x.n, &ey, y.n, req.level)?;
    Ok(DiffResponse {
        p: req.p,
        level: req.level,
        difference: ci.point,
        lower: ci.lower,
        upper: ci.upper,
        width: ci.width(),
        x,
        y,
    })
}

pub fn fit_gld(req: &FitRequest) -> Result<FitReport> {
    let gd = GroupedData::new(req.bins.clone())?.merge_zero_bins()?;
    gld::fit_percentile_matching(&gd, &req.config)
}

/// Rejects requests whose replication count exceeds `max_reps` in any cell.
pub fn check_reps(req: &SimRequest, max_reps: usize) -> Result<()> {
    for (i, cell) in req.cells.iter().enumerate() {
        if cell.reps > max_reps {
            return Err(Error::Config {
                path: format!("cells[{i}].reps"),
                message: format!("{} replications exceed the limit of {max_reps}", cell.reps),
            });
        }
        cell.validate().map_err(|e| Error::Config {
            path: format!("cells[{i}]"),
            message: e.to_string(),
        })?;
    }
    Ok(())
}

pub fn sim_rows(rows: &[TableRow]) -> Vec<SimRow> {
    rows.iter()
        .map(|row| {
            let c = &row.cell;
            let (coverage, width, failures, error) = match &row.result {
                Ok(r) => (Some(r.coverage), Some(r.avg_width), r.failures, None),
                Err(e) => (None, None, c.reps, Some(ErrorBody::from(e))),
            };
            SimRow {
                family: c.distribution.family().to_string(),
                params: c.distribution.params_label(),
                n: c.n,
                p: c.p,
                method: c.method,
                bins: c.binning.label(),
                coverage,
                width,
                failures,
                error,
            }
        })
        .collect()
}

pub fn simulate(req: &SimRequest, max_reps: usize) -> Result<SimResponse> {
    check_reps(req, max_reps)?;
    let rows = sim::run_table(&req.cells, |_, _, _| {});
    Ok(SimResponse { rows: sim_rows(&rows) })
}
