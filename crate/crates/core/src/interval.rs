//! Large-sample confidence intervals for a quantile and for the difference of
//! two independent quantiles, built from `(x̂_p, f̂(x̂_p))`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimate::{Method, QuantileEstimate};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
    pub point: f64,
    pub method: Method,
}

impl ConfidenceInterval {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Inverse standard normal CDF: Wichura's AS 241 (PPND16) followed by one
/// Newton step against the erfc-based CDF.
pub fn z_quantile(q: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::InvalidProbability(q));
    }
    // Work in the lower tail so the Newton residual is computed with full relative precision.
    if q > 0.5 {
        Ok(-lower_tail_quantile(1.0 - q))
    } else {
        Ok(lower_tail_quantile(q))
    }
}

fn lower_tail_quantile(q: f64) -> f64 {
    let z = ppnd16(q);
    if !z.is_finite() {
        return z;
    }
    let residual = 0.5 * libm::erfc(-z / std::f64::consts::SQRT_2) - q;
    z - residual / normal_pdf(z)
}

fn poly(coeffs: &[f64; 8], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

#[allow(clippy::excessive_precision)]
const A: [f64; 8] = [
    3.387_132_872_796_366_608_0,
    1.331_416_678_917_843_774_5e2,
    1.971_590_950_306_551_442_7e3,
    1.373_169_376_550_946_112_5e4,
    4.592_195_393_154_987_145_7e4,
    6.726_577_092_700_870_085_3e4,
    3.343_057_558_358_812_810_5e4,
    2.509_080_928_730_122_672_7e3,
];
#[allow(clippy::excessive_precision)]
const B: [f64; 8] = [
    1.0,
    4.231_333_070_160_091_125_2e1,
    6.871_870_074_920_579_083_0e2,
    5.394_196_021_424_751_107_7e3,
    2.121_379_430_158_659_586_7e4,
    3.930_789_580_009_271_061_0e4,
    2.872_908_573_572_194_267_4e4,
    5.226_495_278_852_854_561_0e3,
];
#[allow(clippy::excessive_precision)]
const C: [f64; 8] = [
    1.423_437_110_749_683_577_34,
    4.630_337_846_156_545_295_90,
    5.769_497_221_460_691_405_50,
    3.647_848_324_763_204_605_04,
    1.270_458_252_452_368_382_58,
    2.417_807_251_774_506_117_70e-1,
    2.272_384_498_926_918_458_33e-2,
    7.745_450_142_783_414_076_40e-4,
];
#[allow(clippy::excessive_precision)]
const D: [f64; 8] = [
    1.0,
    2.053_191_626_637_758_821_87,
    1.676_384_830_183_803_849_40,
    6.897_673_349_851_000_045_50e-1,
    1.481_039_764_274_800_745_90e-1,
    1.519_866_656_361_645_719_66e-2,
    5.475_938_084_995_344_946_00e-4,
    1.050_750_071_644_416_843_24e-9,
];
#[allow(clippy::excessive_precision)]
const E: [f64; 8] = [
    6.657_904_643_501_103_777_20,
    5.463_784_911_164_114_369_90,
    1.784_826_539_917_291_335_80,
    2.965_605_718_285_048_912_30e-1,
    2.653_218_952_657_612_309_30e-2,
    1.242_660_947_388_078_438_60e-3,
    2.711_555_568_743_487_578_15e-5,
    2.010_334_399_292_288_132_65e-7,
];
#[allow(clippy::excessive_precision)]
const F: [f64; 8] = [
    1.0,
    5.998_322_065_558_879_376_90e-1,
    1.369_298_809_227_358_053_10e-1,
    1.487_536_129_085_061_485_25e-2,
    7.868_691_311_456_132_591_00e-4,
    1.846_318_317_510_054_681_80e-5,
    1.421_511_758_316_445_888_70e-7,
    2.044_263_103_389_939_785_64e-15,
];

fn ppnd16(q: f64) -> f64 {
    let dq = q - 0.5;
    if dq.abs() <= 0.425 {
        let r = 0.180625 - dq * dq;
        return dq * poly(&A, r) / poly(&B, r);
    }
    let tail = if dq < 0.0 { q } else { 1.0 - q };
    let r = (-tail.ln()).sqrt();
    let z = if r <= 5.0 {
        let r = r - 1.6;
        poly(&C, r) / poly(&D, r)
    } else {
        let r = r - 5.0;
        poly(&E, r) / poly(&F, r)
    };
    if dq < 0.0 {
        -z
    } else {
        z
    }
}

fn check_level(level: f64) -> Result<f64> {
    if level > 0.0 && level < 1.0 {
        z_quantile(0.5 * (1.0 + level))
    } else {
        Err(Error::InvalidArgument(format!("confidence level {level} must lie in (0, 1)")))
    }
}

fn check_size(n: f64, name: &str) -> Result<()> {
    if n > 0.0 && n.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("sample size {name} = {n} must be positive")))
    }
}

fn variance_term(est: &QuantileEstimate, n: f64) -> Result<f64> {
    if !(est.f_hat > 0.0) || !est.f_hat.is_finite() {
        return Err(Error::NonPositiveDensity(est.f_hat));
    }
    Ok(est.p * (1.0 - est.p) / (n * est.f_hat * est.f_hat))
}

/// `x̂_p ± z_{(1+level)/2} · √(p(1−p) / (n f̂²))`.
pub fn ci_single(est: &QuantileEstimate, n: f64, level: f64) -> Result<ConfidenceInterval> {
    check_size(n, "n")?;
    let z = check_level(level)?;
    variance_term(est, n)?;
    let half = z * (est.p * (1.0 - est.p)).sqrt() / (n.sqrt() * est.f_hat);
    Ok(ConfidenceInterval {
        lower: est.x_hat - half,
        upper: est.x_hat + half,
        level,
        point: est.x_hat,
        method: est.method,
    })
}

/// Interval for `x_p − y_p` from two independent samples of sizes `n` and `m`.
pub fn ci_difference(
    est_x: &QuantileEstimate,
    n: f64,
    est_y: &QuantileEstimate,
    m: f64,
    level: f64,
) -> Result<ConfidenceInterval> {
    if est_x.p != est_y.p {
        return Err(Error::MismatchedProbability(est_x.p, est_y.p));
    }
    check_size(n, "n")?;
    check_size(m, "m")?;
    let z = check_level(level)?;
    let half = z * (variance_term(est_x, n)? + variance_term(est_y, m)?).sqrt();
    let point = est_x.x_hat - est_y.x_hat;
    Ok(ConfidenceInterval {
        lower: point - half,
        upper: point + half,
        level,
        point,
        method: est_x.method,
    })
}
