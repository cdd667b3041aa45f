//! Non-parametric quantile/density estimators built from bin frequencies:
//! histogram interpolation, linear interpolation with an optional
//! exponential tail, and the frequency polygon.
//!
//! The last two share [`PiecewiseLinearDensity`], whose CDF is piecewise
//! quadratic and is inverted in closed form.

use serde::{Deserialize, Serialize};

use crate::error::{check_probability, Error, Result};
use crate::estimate::{Method, QuantileEstimate};
use crate::grouped::{CumulativeTable, GroupedData};

/// Density `intercept + slope * x` on `[lower, upper)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub lower: f64,
    pub upper: f64,
    pub intercept: f64,
    pub slope: f64,
}

impl Segment {
    pub fn density(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn mass(&self) -> f64 {
        self.width() * self.density(0.5 * (self.lower + self.upper))
    }

    /// Mass between the segment's lower edge and `lower + t`.
    fn partial_mass(&self, t: f64) -> f64 {
        t * (self.density(self.lower) + 0.5 * self.slope * t)
    }
}

/// Exponential density `(weight / scale) * exp(-(x - start) / scale)` on `[start, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentialTail {
    pub start: f64,
    pub weight: f64,
    pub scale: f64,
}

impl ExponentialTail {
    pub fn density(&self, x: f64) -> f64 {
        self.weight / self.scale * (-(x - self.start) / self.scale).exp()
    }

    fn partial_mass(&self, x: f64) -> f64 {
        -self.weight * (-(x - self.start) / self.scale).exp_m1()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseLinearDensity {
    segments: Vec<Segment>,
    /// `cum[k]` is the CDF at `segments[k].lower`; the final entry is the CDF
    /// where the bounded part ends (the tail's starting mass).
    cum: Vec<f64>,
    tail: Option<ExponentialTail>,
}

/// What to do when a bin mean lies outside the middle third of its bin.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NegativityMode {
    #[default]
    Error,
    /// Cut the line at its zero crossing and rescale the positive part to
    /// keep the bin's mass.
    Clip,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct LinearOptions {
    /// Replace the last bin with an exponential tail on `[a_{J-1}, ∞)`.
    pub unbounded_tail: bool,
    pub negativity: NegativityMode,
}

impl PiecewiseLinearDensity {
    fn from_parts(segments: Vec<Segment>, start_prob: &[f64], tail: Option<ExponentialTail>) -> Self {
        let cum = start_prob.to_vec();
        debug_assert_eq!(cum.len(), segments.len() + 1);
        PiecewiseLinearDensity { segments, cum, tail }
    }

    /// Piecewise-constant histogram density, `freq_j / (n * width_j)` on each bin.
    pub fn histogram(gd: &GroupedData) -> Self {
        let table = gd.cumulative();
        let segments = gd
            .bins()
            .iter()
            .map(|b| Segment {
                lower: b.lower,
                upper: b.upper,
                intercept: b.freq / (gd.n() * b.width()),
                slope: 0.0,
            })
            .collect();
        Self::from_parts(segments, &table.cum_prob, None)
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn tail(&self) -> Option<&ExponentialTail> {
        self.tail.as_ref()
    }

    pub fn support(&self) -> (f64, f64) {
        let lo = self.segments.first().map_or_else(|| self.tail.map_or(0.0, |t| t.start), |s| s.lower);
        let hi = if self.tail.is_some() {
            f64::INFINITY
        } else {
            self.segments.last().map_or(lo, |s| s.upper)
        };
        (lo, hi)
    }

    pub fn total_mass(&self) -> f64 {
        self.segments.iter().map(Segment::mass).sum::<f64>() + self.tail.map_or(0.0, |t| t.weight)
    }

    pub fn density(&self, x: f64) -> f64 {
        if let Some(tail) = &self.tail {
            if x >= tail.start {
                return tail.density(x);
            }
        }
        let (lo, hi) = self.support();
        if x < lo || x > hi {
            return 0.0;
        }
        let k = self.segments.partition_point(|s| s.upper <= x).min(self.segments.len() - 1);
        self.segments[k].density(x)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if let Some(tail) = &self.tail {
            if x >= tail.start {
                return self.cum[self.segments.len()] + tail.partial_mass(x);
            }
        }
        let (lo, hi) = self.support();
        if x <= lo {
            return 0.0;
        }
        if x >= hi {
            return self.cum[self.segments.len()];
        }
        let k = self.segments.partition_point(|s| s.upper <= x);
        let seg = &self.segments[k];
        self.cum[k] + seg.partial_mass(x - seg.lower)
    }

    /// Inverts the CDF at `p`, returning `(x̂_p, density at x̂_p)`.
    pub fn quantile(&self, p: f64) -> Result<(f64, f64)> {
        check_probability(p)?;
        let bounded_end = self.cum[self.segments.len()];
        if let Some(tail) = &self.tail {
            if p > bounded_end || self.segments.is_empty() {
                return tail_quantile(tail, bounded_end, p);
            }
        }
        if self.segments.is_empty() {
            return Err(Error::InvalidArgument("density has no segments".into()));
        }
        // Lowest segment whose end reaches p (ties resolve downward).
        let k = self.cum[1..].partition_point(|&c| c < p).min(self.segments.len() - 1);
        let seg = &self.segments[k];
        let x = segment_quantile(seg, k, p - self.cum[k])?;
        let f = seg.density(x);
        if !(f > 0.0) {
            return Err(Error::NonPositiveDensity(f));
        }
        Ok((x, f))
    }
}

/// Root of `partial_mass(t) = r` inside the segment.
///
/// The increasing root `(-α + √(2βp + C)) / β` is evaluated as
/// `2r / (d₀ + √(d₀² + 2βr))`, with `d₀` the density at the lower edge; the two
/// are algebraically identical and the second has no cancellation as β → 0.
fn segment_quantile(seg: &Segment, index: usize, r: f64) -> Result<f64> {
    let r = r.max(0.0);
    let width = seg.width();
    if r == 0.0 {
        return Ok(seg.lower);
    }
    let d0 = seg.density(seg.lower);
    let d1 = seg.density(seg.upper);
    let scale = d0.abs().max(d1.abs());
    let t = if (seg.slope * width).abs() <= 1e-12 * scale {
        r * width / seg.mass()
    } else {
        let mut disc = d0 * d0 + 2.0 * seg.slope * r;
        if disc < 0.0 {
            if disc > -1e-12 * scale * scale {
                disc = 0.0;
            } else {
                return Err(Error::NegativeDiscriminant {
                    segment: index,
                    discriminant: disc,
                });
            }
        }
        let sq = disc.sqrt();
        let plus = if d0 + sq > 0.0 {
            2.0 * r / (d0 + sq)
        } else {
            (sq - d0) / seg.slope
        };
        let minus = (-d0 - sq) / seg.slope;
        let tol = 1e-9 * width;
        let inside = |t: f64| t.is_finite() && t >= -tol && t <= width + tol;
        if inside(plus) {
            plus
        } else if inside(minus) {
            minus
        } else {
            return Err(Error::NoRoot {
                segment: index,
                p: r,
            });
        }
    };
    Ok(seg.lower + t.clamp(0.0, width))
}

fn tail_quantile(tail: &ExponentialTail, start_prob: f64, p: f64) -> Result<(f64, f64)> {
    let r = (p - start_prob).max(0.0);
    let frac = r / tail.weight;
    if frac >= 1.0 {
        return Err(Error::NoRoot { segment: usize::MAX, p });
    }
    let x = tail.start - tail.scale * (-frac).ln_1p();
    let f = tail.density(x);
    if !(f > 0.0) {
        return Err(Error::NonPositiveDensity(f));
    }
    Ok((x, f))
}

/// Histogram interpolation: `x̂ = l + hN(p - p_close)/n_p`, `f̂ = n_p/(hN)`.
pub fn hist_estimate(gd: &GroupedData, p: f64) -> Result<QuantileEstimate> {
    hist_estimate_with(gd, &gd.cumulative(), p)
}

pub(crate) fn hist_estimate_with(gd: &GroupedData, cum: &CumulativeTable, p: f64) -> Result<QuantileEstimate> {
    let j = cum.locate_bin(p)?;
    let bin = &gd.bins()[j];
    let h = bin.width();
    if !(h > 0.0) {
        return Err(Error::ZeroWidthBin { index: j });
    }
    let big_n = gd.n();
    let x_hat = bin.lower + h * big_n * (p - cum.cum_prob[j]) / bin.freq;
    let f_hat = bin.freq / (h * big_n);
    QuantileEstimate::checked(p, x_hat, f_hat, Method::Histogram)
}

/// Linear-interpolation density from bin means.
///
/// Slope `β_j = f_j · 12(x̄_j − x^c_j) / w_j³`, intercept `α_j = f_j / w_j − β_j x^c_j`.
/// With `unbounded_tail`, the last bin becomes an exponential tail with weight
/// `f_J` and scale `x̄_J − a_{J−1}`.
pub fn li_fit(gd: &GroupedData, options: &LinearOptions) -> Result<PiecewiseLinearDensity> {
    if !gd.has_means() {
        return Err(Error::MissingMeans);
    }
    let rel = gd.relative_frequencies();
    let table = gd.cumulative();
    let bins = gd.bins();
    let bounded = if options.unbounded_tail { bins.len() - 1 } else { bins.len() };

    let mut segments = Vec::with_capacity(bounded);
    let mut starts = Vec::with_capacity(bounded + 1);
    for (j, bin) in bins.iter().enumerate().take(bounded) {
        let f = rel[j];
        let w = bin.width();
        let mid = bin.midpoint();
        let mean = bin.mean.expect("checked by has_means");
        let slope = f * 12.0 * (mean - mid) / (w * w * w);
        let intercept = f / w - slope * mid;
        let seg = Segment {
            lower: bin.lower,
            upper: bin.upper,
            intercept,
            slope,
        };
        let (d0, d1) = (seg.density(bin.lower), seg.density(bin.upper));
        let tol = 1e-12 * f / w;
        if d0 >= -tol && d1 >= -tol {
            starts.push(table.cum_prob[j]);
            segments.push(seg);
            continue;
        }
        match options.negativity {
            NegativityMode::Error => {
                return Err(Error::NegativeDensity {
                    index: j,
                    lower: bin.lower,
                    upper: bin.upper,
                    mean,
                    third_lower: bin.lower + w / 3.0,
                    third_upper: bin.upper - w / 3.0,
                })
            }
            NegativityMode::Clip => {
                let zero = -intercept / slope;
                let (live, dead) = if d0 < 0.0 {
                    ((zero, bin.upper), (bin.lower, zero))
                } else {
                    ((bin.lower, zero), (zero, bin.upper))
                };
                let positive_mass = 0.5 * (live.1 - live.0) * d0.max(d1);
                let c = f / positive_mass;
                let live_seg = Segment {
                    lower: live.0,
                    upper: live.1,
                    intercept: c * intercept,
                    slope: c * slope,
                };
                let dead_seg = Segment {
                    lower: dead.0,
                    upper: dead.1,
                    intercept: 0.0,
                    slope: 0.0,
                };
                let start = table.cum_prob[j];
                if d0 < 0.0 {
                    starts.extend([start, start]);
                    segments.extend([dead_seg, live_seg]);
                } else {
                    starts.extend([start, start + f]);
                    segments.extend([live_seg, dead_seg]);
                }
            }
        }
    }
    starts.push(table.cum_prob[bounded]);

    let tail = if options.unbounded_tail {
        let last = &bins[bins.len() - 1];
        let scale = last.mean.expect("checked by has_means") - last.lower;
        if !(scale > 0.0) {
            return Err(Error::InvalidTail(scale));
        }
        Some(ExponentialTail {
            start: last.lower,
            weight: rel[bins.len() - 1],
            scale,
        })
    } else {
        None
    };
    Ok(PiecewiseLinearDensity::from_parts(segments, &starts, tail))
}

pub fn li_quantile(d: &PiecewiseLinearDensity, p: f64) -> Result<QuantileEstimate> {
    let (x, f) = d.quantile(p)?;
    QuantileEstimate::checked(p, x, f, Method::LinearInterpolation)
}

/// Frequency polygon: joins the histogram heights at bin midpoints, pinned to
/// zero half a bin beyond each end. Requires equal bin widths.
pub fn fp_fit(gd: &GroupedData) -> Result<PiecewiseLinearDensity> {
    let bins = gd.bins();
    let h = bins[0].width();
    for (index, b) in bins.iter().enumerate() {
        if (b.width() - h).abs() > 1e-9 * h {
            return Err(Error::UnequalWidths {
                index,
                width: b.width(),
                expected: h,
            });
        }
    }
    let heights: Vec<f64> = bins.iter().map(|b| b.freq / (gd.n() * h)).collect();
    let mut knots = Vec::with_capacity(bins.len() + 2);
    knots.push(bins[0].midpoint() - h);
    knots.extend(bins.iter().map(|b| b.midpoint()));
    knots.push(bins[bins.len() - 1].midpoint() + h);
    let mut values = Vec::with_capacity(bins.len() + 2);
    values.push(0.0);
    values.extend_from_slice(&heights);
    values.push(0.0);

    let mut segments = Vec::with_capacity(knots.len() - 1);
    let mut starts = Vec::with_capacity(knots.len());
    let mut acc = 0.0;
    for k in 1..knots.len() {
        let slope = (values[k] - values[k - 1]) / (knots[k] - knots[k - 1]);
        let seg = Segment {
            lower: knots[k - 1],
            upper: knots[k],
            intercept: values[k - 1] - slope * knots[k - 1],
            slope,
        };
        starts.push(acc);
        acc += 0.5 * (knots[k] - knots[k - 1]) * (values[k - 1] + values[k]);
        segments.push(seg);
    }
    starts.push(acc);
    Ok(PiecewiseLinearDensity::from_parts(segments, &starts, None))
}

pub fn fp_quantile(d: &PiecewiseLinearDensity, p: f64) -> Result<QuantileEstimate> {
    let (x, f) = d.quantile(p)?;
    QuantileEstimate::checked(p, x, f, Method::FrequencyPolygon)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grouped::Bin;
    use approx::assert_relative_eq;

    /// CDF by composite Simpson integration of `density`, splitting at `knots`.
    fn integrated_cdf(density: impl Fn(f64) -> f64, knots: &[f64], x: f64) -> f64 {
        let mut total = 0.0;
        for w in knots.windows(2) {
            let (a, b) = (w[0], w[1].min(x));
            if b <= a {
                break;
            }
            let m = 64;
            let h = (b - a) / m as f64;
            // Evaluate just inside the piece so the left-closed convention does not matter.
            let eval = |t: f64| density(t.clamp(a + 1e-15 * (b - a), b - 1e-15 * (b - a)));
            let mut s = eval(a) + eval(b);
            for i in 1..m {
                s += if i % 2 == 1 { 4.0 } else { 2.0 } * eval(a + i as f64 * h);
            }
            total += s * h / 3.0;
        }
        total
    }

    fn numeric_inverse(density: &impl Fn(f64) -> f64, knots: &[f64], p: f64) -> f64 {
        let (mut lo, mut hi) = (knots[0], *knots.last().unwrap());
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if integrated_cdf(density, knots, mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    fn gd(spec: &[(f64, f64, f64)]) -> GroupedData {
        GroupedData::new(spec.iter().map(|&(l, u, f)| Bin::new(l, u, f)).collect()).unwrap()
    }

    fn gd_means(spec: &[(f64, f64, f64, f64)]) -> GroupedData {
        GroupedData::new(spec.iter().map(|&(l, u, f, m)| Bin::with_mean(l, u, f, m)).collect()).unwrap()
    }

    #[test]
    fn histogram_uniform() {
        let data = gd(&[(0.0, 1.0, 50.0), (1.0, 2.0, 50.0)]);
        let q1 = hist_estimate(&data, 0.25).unwrap();
        assert_relative_eq!(q1.x_hat, 0.5);
        assert_relative_eq!(q1.f_hat, 0.5);
        let q3 = hist_estimate(&data, 0.75).unwrap();
        assert_relative_eq!(q3.x_hat, 1.5);
        assert_relative_eq!(q3.f_hat, 0.5);
    }

    #[test]
    fn histogram_unequal_bins() {
        let data = gd(&[(0.0, 2.0, 30.0), (2.0, 5.0, 70.0)]);
        let est = hist_estimate(&data, 0.5).unwrap();
        assert_relative_eq!(est.x_hat, 2.0 + 3.0 * 100.0 * 0.2 / 70.0, epsilon = 1e-12);
        assert_relative_eq!(est.x_hat, 2.857142857142857, epsilon = 1e-9);
        assert_relative_eq!(est.f_hat, 0.233333333333333, epsilon = 1e-12);
        // Independent route: invert the integrated histogram density.
        let density = PiecewiseLinearDensity::histogram(&data);
        let inv = numeric_inverse(&|x| density.density(x), &[0.0, 2.0, 5.0], 0.5);
        assert_relative_eq!(inv, est.x_hat, epsilon = 1e-9);
    }

    #[test]
    fn histogram_boundary_uses_lower_bin() {
        let data = gd(&[(0.0, 1.0, 50.0), (1.0, 3.0, 50.0)]);
        let est = hist_estimate(&data, 0.5).unwrap();
        assert_relative_eq!(est.x_hat, 1.0);
        assert_relative_eq!(est.f_hat, 0.5);
    }

    #[test]
    fn li_coefficients() {
        let data = gd_means(&[(0.0, 2.0, 60.0, 1.2), (2.0, 4.0, 40.0, 3.0)]);
        let d = li_fit(&data, &LinearOptions::default()).unwrap();
        let s = d.segments()[0];
        assert_relative_eq!(s.slope, 0.18, epsilon = 1e-12);
        assert_relative_eq!(s.intercept, 0.12, epsilon = 1e-12);

        let sym = gd_means(&[(0.0, 1.0, 50.0, 0.5), (1.0, 2.0, 50.0, 1.5)]);
        let d = li_fit(&sym, &LinearOptions::default()).unwrap();
        assert_eq!(d.segments()[0].slope, 0.0);
        assert_relative_eq!(d.segments()[0].intercept, 0.5);
    }

    #[test]
    fn li_tail_parameters() {
        let data = gd_means(&[(0.0, 10.0, 90.0, 5.0), (10.0, 20.0, 10.0, 12.0)]);
        let opts = LinearOptions {
            unbounded_tail: true,
            ..Default::default()
        };
        let d = li_fit(&data, &opts).unwrap();
        let tail = d.tail().unwrap();
        assert_relative_eq!(tail.weight, 0.1, epsilon = 1e-15);
        assert_relative_eq!(tail.scale, 2.0);
        assert_eq!(tail.start, 10.0);
        assert_eq!(d.segments().len(), 1);
        assert_relative_eq!(d.total_mass(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn li_uniform_single_bin() {
        let data = gd_means(&[(0.0, 1.0, 7.0, 0.5)]);
        let d = li_fit(&data, &LinearOptions::default()).unwrap();
        let est = li_quantile(&d, 0.4).unwrap();
        assert_relative_eq!(est.x_hat, 0.4, epsilon = 1e-15);
        assert_relative_eq!(est.f_hat, 1.0);
    }

    #[test]
    fn li_tail_quantile() {
        let data = gd_means(&[(0.0, 10.0, 90.0, 5.0), (10.0, 20.0, 10.0, 12.0)]);
        let opts = LinearOptions {
            unbounded_tail: true,
            ..Default::default()
        };
        let d = li_fit(&data, &opts).unwrap();
        let est = li_quantile(&d, 0.95).unwrap();
        assert_relative_eq!(est.x_hat, 10.0 - 2.0 * 0.5f64.ln(), epsilon = 1e-12);
        assert_relative_eq!(est.x_hat, 11.386294361, epsilon = 1e-8);
        assert_relative_eq!(est.f_hat, 0.025, epsilon = 1e-12);
        // Density cross-checked by differentiating the tail CDF numerically.
        let h = 1e-5;
        let fd = (d.cdf(est.x_hat + h) - d.cdf(est.x_hat - h)) / (2.0 * h);
        assert_relative_eq!(fd, est.f_hat, epsilon = 1e-8);
    }

    #[test]
    fn li_quadratic_root() {
        let data = gd_means(&[(0.0, 2.0, 60.0, 1.2), (2.0, 4.0, 40.0, 3.0)]);
        let d = li_fit(&data, &LinearOptions::default()).unwrap();
        let est = li_quantile(&d, 0.3).unwrap();
        // 0.09x² + 0.12x − 0.3 = 0 by the quadratic formula.
        let root = (-0.12 + (0.12f64 * 0.12 + 4.0 * 0.09 * 0.3).sqrt()) / (2.0 * 0.09);
        assert_relative_eq!(est.x_hat, root, epsilon = 1e-12);
        assert_relative_eq!(est.x_hat, 1.27698, epsilon = 1e-5);
        assert_relative_eq!(est.f_hat, 0.12 + 0.18 * root, epsilon = 1e-12);
        assert_relative_eq!(est.f_hat, 0.349857, epsilon = 1e-6);
        let inv = numeric_inverse(&|x| d.density(x), &[0.0, 2.0, 4.0], 0.3);
        assert_relative_eq!(inv, est.x_hat, epsilon = 1e-9);
    }

    #[test]
    fn li_negativity_is_an_error_by_default() {
        let data = gd_means(&[(0.0, 3.0, 10.0, 2.5), (3.0, 6.0, 10.0, 4.5)]);
        let err = li_fit(&data, &LinearOptions::default()).unwrap_err();
        match err {
            Error::NegativeDensity {
                index,
                third_lower,
                third_upper,
                ..
            } => {
                assert_eq!(index, 0);
                assert_relative_eq!(third_lower, 1.0);
                assert_relative_eq!(third_upper, 2.0);
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn li_clip_keeps_bin_mass() {
        let data = gd_means(&[(0.0, 3.0, 10.0, 2.5), (3.0, 6.0, 10.0, 3.4)]);
        let opts = LinearOptions {
            negativity: NegativityMode::Clip,
            ..Default::default()
        };
        let d = li_fit(&data, &opts).unwrap();
        assert_relative_eq!(d.total_mass(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(d.cdf(3.0), 0.5, epsilon = 1e-12);
        for i in 0..=600 {
            assert!(d.density(i as f64 / 100.0) >= 0.0);
        }
        for p in [0.05, 0.3, 0.5, 0.7, 0.95] {
            let (x, _) = d.quantile(p).unwrap();
            assert!((d.cdf(x) - p).abs() < 1e-12, "p={p}");
        }
    }

    #[test]
    fn li_tail_needs_positive_scale() {
        let data = gd_means(&[(0.0, 10.0, 90.0, 5.0), (10.0, 20.0, 10.0, 10.0)]);
        let opts = LinearOptions {
            unbounded_tail: true,
            ..Default::default()
        };
        assert!(matches!(li_fit(&data, &opts), Err(Error::InvalidTail(_))));
    }

    #[test]
    fn li_degenerates_to_histogram_at_midpoints() {
        let data = gd_means(&[(0.0, 1.0, 7.0, 0.5), (1.0, 3.0, 20.0, 2.0), (3.0, 3.5, 13.0, 3.25)]);
        let d = li_fit(&data, &LinearOptions::default()).unwrap();
        for i in 1..100 {
            let p = i as f64 / 100.0;
            let li = li_quantile(&d, p).unwrap();
            let hist = hist_estimate(&data, p).unwrap();
            assert_relative_eq!(li.x_hat, hist.x_hat, epsilon = 1e-12, max_relative = 1e-14);
            assert_relative_eq!(li.f_hat, hist.f_hat, max_relative = 1e-14);
        }
    }

    #[test]
    fn fp_construction() {
        let data = gd(&[(0.0, 1.0, 20.0), (1.0, 2.0, 80.0)]);
        let d = fp_fit(&data).unwrap();
        let knots: Vec<f64> = d
            .segments()
            .iter()
            .map(|s| s.lower)
            .chain(std::iter::once(d.segments().last().unwrap().upper))
            .collect();
        assert_eq!(knots, vec![-0.5, 0.5, 1.5, 2.5]);
        let values: Vec<f64> = knots.iter().map(|&x| d.density(x)).collect();
        for (v, e) in values.iter().zip([0.0, 0.2, 0.8, 0.0]) {
            assert_relative_eq!(*v, e, epsilon = 1e-15);
        }
        let masses: Vec<f64> = d.segments().iter().map(Segment::mass).collect();
        for (m, e) in masses.iter().zip([0.1, 0.5, 0.4]) {
            assert_relative_eq!(*m, e, epsilon = 1e-15);
        }
        assert_relative_eq!(d.total_mass(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn fp_tent_and_trapezoid() {
        let tent = fp_fit(&gd(&[(0.0, 1.0, 100.0)])).unwrap();
        assert_relative_eq!(tent.density(0.5), 1.0);
        assert_eq!(tent.support(), (-0.5, 1.5));
        let est = fp_quantile(&tent, 0.5).unwrap();
        assert_relative_eq!(est.x_hat, 0.5, epsilon = 1e-15);
        assert_relative_eq!(est.f_hat, 1.0, epsilon = 1e-15);

        let trap = fp_fit(&gd(&[(0.0, 1.0, 50.0), (1.0, 2.0, 50.0)])).unwrap();
        assert_relative_eq!(trap.density(0.5), 0.5);
        assert_relative_eq!(trap.density(1.5), 0.5);
        assert_relative_eq!(trap.density(1.0), 0.5);
    }

    #[test]
    fn fp_quantiles() {
        let d = fp_fit(&gd(&[(0.0, 1.0, 20.0), (1.0, 2.0, 80.0)])).unwrap();
        let first = fp_quantile(&d, 0.1).unwrap();
        assert_relative_eq!(first.x_hat, 0.5, epsilon = 1e-12);
        assert_relative_eq!(first.f_hat, 0.2, epsilon = 1e-12);
        let knots = [-0.5, 0.5, 1.5, 2.5];
        // The middle trapezoid holds mass 0.5, so p = 0.6 sits exactly on its upper knot.
        let boundary = fp_quantile(&d, 0.6).unwrap();
        assert_relative_eq!(boundary.x_hat, 1.5, epsilon = 1e-12);
        assert_relative_eq!(boundary.f_hat, 0.8, epsilon = 1e-12);
        for p in [0.35, 0.6, 0.8] {
            let est = fp_quantile(&d, p).unwrap();
            assert!((integrated_cdf(|x| d.density(x), &knots, est.x_hat) - p).abs() < 1e-10);
            let inv = numeric_inverse(&|x| d.density(x), &knots, p);
            assert_relative_eq!(inv, est.x_hat, epsilon = 1e-9);
        }
        let interior = fp_quantile(&d, 0.35).unwrap();
        assert!(interior.x_hat > 0.5 && interior.x_hat < 1.5);
    }

    #[test]
    fn fp_rejects_unequal_widths() {
        let err = fp_fit(&gd(&[(0.0, 1.0, 20.0), (1.0, 3.0, 80.0)])).unwrap_err();
        assert!(matches!(err, Error::UnequalWidths { index: 1, .. }));
    }

    #[test]
    fn decreasing_segment_picks_root_inside() {
        let seg = Segment {
            lower: 0.0,
            upper: 1.0,
            intercept: 1.5,
            slope: -1.0,
        };
        for r in [0.0, 0.1, 0.5, 0.9, 1.0] {
            let x = segment_quantile(&seg, 0, r).unwrap();
            assert!((0.0..=1.0).contains(&x));
            assert_relative_eq!(seg.partial_mass(x), r, epsilon = 1e-14);
        }
    }

    #[test]
    fn uniform_recovery_all_piecewise_methods() {
        // Uniform on [2, 7] in five equal bins with midpoint means.
        let data = gd_means(&[
            (2.0, 3.0, 20.0, 2.5),
            (3.0, 4.0, 20.0, 3.5),
            (4.0, 5.0, 20.0, 4.5),
            (5.0, 6.0, 20.0, 5.5),
            (6.0, 7.0, 20.0, 6.5),
        ]);
        let li = li_fit(&data, &LinearOptions::default()).unwrap();
        for i in 1..10 {
            let p = i as f64 / 10.0;
            let truth = 2.0 + 5.0 * p;
            assert!((hist_estimate(&data, p).unwrap().x_hat - truth).abs() < 1e-9);
            assert!((li_quantile(&li, p).unwrap().x_hat - truth).abs() < 1e-9);
        }
    }
}
