//! Estimator selection and the shared `(x̂_p, f̂(x̂_p))` output type.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{check_probability, Error, Result};
use crate::gld::{self, FitConfig, FitReport};
use crate::grouped::{CumulativeTable, GroupedData};
use crate::piecewise::{self, LinearOptions, NegativityMode, PiecewiseLinearDensity};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "histogram", alias = "hist")]
    Histogram,
    #[serde(rename = "linear", alias = "linear-interpolation", alias = "li")]
    LinearInterpolation,
    #[serde(rename = "frequency-polygon", alias = "polygon", alias = "fp")]
    FrequencyPolygon,
    #[serde(rename = "gld")]
    Gld,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::Histogram,
        Method::FrequencyPolygon,
        Method::LinearInterpolation,
        Method::Gld,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Histogram => "histogram",
            Method::LinearInterpolation => "linear",
            Method::FrequencyPolygon => "frequency-polygon",
            Method::Gld => "gld",
        }
    }

    pub fn requires_means(self) -> bool {
        self == Method::LinearInterpolation
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "histogram" | "hist" => Ok(Method::Histogram),
            "linear" | "linear-interpolation" | "li" => Ok(Method::LinearInterpolation),
            "frequency-polygon" | "polygon" | "fp" => Ok(Method::FrequencyPolygon),
            "gld" => Ok(Method::Gld),
            other => Err(Error::InvalidArgument(format!(
                "unknown method '{other}' (expected histogram, linear, frequency-polygon or gld)"
            ))),
        }
    }
}

/// A quantile estimate together with the density estimate at that quantile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantileEstimate {
    pub p: f64,
    pub x_hat: f64,
    pub f_hat: f64,
    pub method: Method,
}

impl QuantileEstimate {
    pub(crate) fn checked(p: f64, x_hat: f64, f_hat: f64, method: Method) -> Result<Self> {
        if !(f_hat > 0.0) || !f_hat.is_finite() {
            return Err(Error::NonPositiveDensity(f_hat));
        }
        Ok(QuantileEstimate { p, x_hat, f_hat, method })
    }
}

/// Per-method knobs. Only the relevant fields are read by each method.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EstimatorOptions {
    pub linear: LinearOptions,
    pub fit: FitConfig,
}

impl EstimatorOptions {
    /// Defaults for Monte Carlo runs: the linear method clips a negative
    /// segment instead of failing, since sparse tail bins of a simulated
    /// sample often have means outside the middle third.
    pub fn for_simulation() -> Self {
        EstimatorOptions {
            linear: LinearOptions {
                negativity: NegativityMode::Clip,
                ..LinearOptions::default()
            },
            ..EstimatorOptions::default()
        }
    }
}

/// A method fitted once to a dataset, ready to be evaluated at many `p`.
#[derive(Debug, Clone)]
pub enum FittedModel {
    Histogram { data: GroupedData, cum: CumulativeTable },
    Piecewise { density: PiecewiseLinearDensity, method: Method },
    Gld(FitReport),
}

impl FittedModel {
    /// Fits `method`. Zero-frequency bins are merged first.
    pub fn fit(data: &GroupedData, method: Method, options: &EstimatorOptions) -> Result<Self> {
        if method.requires_means() && !data.has_means() {
            return Err(Error::MissingMeans);
        }
        let data = data.merge_zero_bins()?;
        Ok(match method {
            Method::Histogram => {
                let cum = data.cumulative();
                FittedModel::Histogram { data, cum }
            }
            Method::LinearInterpolation => FittedModel::Piecewise {
                density: piecewise::li_fit(&data, &options.linear)?,
                method,
            },
            Method::FrequencyPolygon => FittedModel::Piecewise {
                density: piecewise::fp_fit(&data)?,
                method,
            },
            Method::Gld => FittedModel::Gld(gld::fit_percentile_matching(&data, &options.fit)?),
        })
    }

    pub fn method(&self) -> Method {
        match self {
            FittedModel::Histogram { .. } => Method::Histogram,
            FittedModel::Piecewise { method, .. } => *method,
            FittedModel::Gld(_) => Method::Gld,
        }
    }

    pub fn estimate(&self, p: f64) -> Result<QuantileEstimate> {
        check_probability(p)?;
        match self {
            FittedModel::Histogram { data, cum } => piecewise::hist_estimate_with(data, cum, p),
            FittedModel::Piecewise { density, method } => {
                let (x, f) = density.quantile(p)?;
                QuantileEstimate::checked(p, x, f, *method)
            }
            FittedModel::Gld(report) => gld::estimate_from_params(&report.params, p),
        }
    }
}

/// Fits `method` to `data` and evaluates it at `p`.
pub fn estimate(data: &GroupedData, method: Method, p: f64, options: &EstimatorOptions) -> Result<QuantileEstimate> {
    check_probability(p)?;
    FittedModel::fit(data, method, options)?.estimate(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
            let json = serde_json::to_string(&m).unwrap();
            assert_eq!(json, format!("\"{}\"", m.name()));
            assert_eq!(serde_json::from_str::<Method>(&json).unwrap(), m);
        }
        assert!("spline".parse::<Method>().is_err());
    }

    #[test]
    fn linear_without_means_is_refused() {
        let gd = GroupedData::from_csv_str("lower,upper,freq\n0,1,50\n1,2,50").unwrap();
        let err = estimate(&gd, Method::LinearInterpolation, 0.5, &EstimatorOptions::default()).unwrap_err();
        assert_eq!(err.to_string(), "method requires bin means");
    }

    #[test]
    fn zero_bins_are_merged_before_fitting() {
        let gd = GroupedData::from_csv_str("lower,upper,freq\n0,1,50\n1,2,0\n2,3,50").unwrap();
        let est = estimate(&gd, Method::Histogram, 0.75, &EstimatorOptions::default()).unwrap();
        assert!((est.x_hat - 2.0).abs() < 1e-12);
        assert!((est.f_hat - 0.25).abs() < 1e-12);
    }

    #[test]
    fn every_method_on_uniform_data() {
        let gd = GroupedData::from_csv_str("lower,upper,freq,mean\n0,1,25,0.5\n1,2,25,1.5\n2,3,25,2.5\n3,4,25,3.5").unwrap();
        for m in [Method::Histogram, Method::LinearInterpolation, Method::Gld] {
            let est = estimate(&gd, m, 0.5, &EstimatorOptions::default()).unwrap();
            assert!((est.x_hat - 2.0).abs() < 1e-6, "{m}: {est:?}");
            assert!((est.f_hat - 0.25).abs() < 1e-4, "{m}: {est:?}");
        }
    }
}
