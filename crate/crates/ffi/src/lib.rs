//! C ABI over `histci`.
//!
//! Grouped data lives behind an opaque [`HciData`] handle created by
//! [`hci_data_new`] or [`hci_data_from_csv`] and released with
//! [`hci_data_free`]. Every other function returns an [`HciStatus`]; on
//! failure [`hci_last_error`] describes the problem. Results are written
//! through caller-supplied out-pointers, which are left untouched on failure.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use histci::api::{self, Group};
use histci::gld::FitConfig;
use histci::piecewise::NegativityMode;
use histci::{Bin, Error, ErrorKind, EstimatorOptions, GroupedData, Method};

/// Opaque grouped-data handle.
pub struct HciData {
    data: GroupedData,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HciStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// Bad argument, such as a probability outside (0, 1).
    Usage = 2,
    /// Input data failed validation.
    Validation = 3,
    /// The estimator could not produce a result for valid input.
    Estimation = 4,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 5,
    /// An internal panic was caught at the boundary.
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HciMethod {
    Histogram = 0,
    LinearInterpolation = 1,
    FrequencyPolygon = 2,
    Gld = 3,
}

impl From<HciMethod> for Method {
    fn from(m: HciMethod) -> Self {
        match m {
            HciMethod::Histogram => Method::Histogram,
            HciMethod::LinearInterpolation => Method::LinearInterpolation,
            HciMethod::FrequencyPolygon => Method::FrequencyPolygon,
            HciMethod::Gld => Method::Gld,
        }
    }
}

/// Linear-interpolation switches. A null pointer means all false.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct HciOptions {
    /// Model the last bin as an unbounded exponential tail.
    pub unbounded_tail: bool,
    /// Clip a negative segment instead of failing.
    pub clip_negative: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct HciInterval {
    pub point: f64,
    /// Density estimate at the point.
    pub density: f64,
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
    /// Sample size used for the standard error.
    pub n: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct HciDiffInterval {
    /// `x̂_p − ŷ_p`.
    pub difference: f64,
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct HciGldFit {
    pub lambda: f64,
    pub eta: f64,
    pub alpha: f64,
    pub beta: f64,
    pub residual: f64,
    pub iterations: u64,
    pub converged: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> HciStatus {
    match e.kind() {
        ErrorKind::Usage => HciStatus::Usage,
        ErrorKind::Validation => HciStatus::Validation,
        ErrorKind::Estimation => HciStatus::Estimation,
    }
}

/// Runs `f`, recording any error or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), HciStatus>) -> HciStatus {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HciStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => {
            set_last_error("internal panic".into());
            HciStatus::Panic
        }
    }
}

fn fail(e: Error) -> HciStatus {
    let status = status_of(&e);
    set_last_error(e.to_string());
    status
}

fn null(what: &str) -> HciStatus {
    set_last_error(format!("{what} is null"));
    HciStatus::NullPointer
}

/// # Safety
/// `h` must be null or a live handle from this library.
unsafe fn data_ref<'a>(h: *const HciData, what: &str) -> Result<&'a GroupedData, HciStatus> {
    h.as_ref().map(|d| &d.data).ok_or_else(|| null(what))
}

fn options_from(options: *const HciOptions) -> EstimatorOptions {
    // SAFETY: callers pass null or a valid pointer, per the public contract.
    let o = unsafe { options.as_ref() }.copied().unwrap_or_default();
    let mut out = EstimatorOptions::default();
    out.linear.unbounded_tail = o.unbounded_tail;
    if o.clip_negative {
        out.linear.negativity = NegativityMode::Clip;
    }
    out
}

fn put<T>(out: *mut T, value: T) {
    // SAFETY: `out` was checked non-null by the caller of `put`.
    unsafe { out.write(value) }
}

/// Builds grouped data from `len` bins. `mean` may be null; otherwise NaN
/// entries mean "no mean for this bin".
///
/// # Safety
/// `lower`, `upper` and `freq` (and `mean` when non-null) must point to `len`
/// readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hci_data_new(
    lower: *const f64,
    upper: *const f64,
    freq: *const f64,
    mean: *const f64,
    len: usize,
    out: *mut *mut HciData,
) -> HciStatus {
    guard(|| {
        if lower.is_null() || upper.is_null() || freq.is_null() {
            return Err(null("bin array"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let (lo, hi, fr) = (
            slice::from_raw_parts(lower, len),
            slice::from_raw_parts(upper, len),
            slice::from_raw_parts(freq, len),
        );
        let means = (!mean.is_null()).then(|| slice::from_raw_parts(mean, len));
        let bins = (0..len)
            .map(|i| Bin {
                lower: lo[i],
                upper: hi[i],
                freq: fr[i],
                mean: means.map(|m| m[i]).filter(|m| !m.is_nan()),
            })
            .collect();
        let data = GroupedData::new(bins).map_err(fail)?;
        put(out, Box::into_raw(Box::new(HciData { data })));
        Ok(())
    })
}

/// Parses CSV text (`lower,upper,freq[,mean]` with a header row).
///
/// # Safety
/// `csv` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hci_data_from_csv(csv: *const c_char, out: *mut *mut HciData) -> HciStatus {
    guard(|| {
        if csv.is_null() {
            return Err(null("csv"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let text = CStr::from_ptr(csv).to_str().map_err(|_| {
            set_last_error("csv is not valid UTF-8".into());
            HciStatus::InvalidUtf8
        })?;
        let data = GroupedData::from_csv_str(text).map_err(fail)?;
        put(out, Box::into_raw(Box::new(HciData { data })));
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `h` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hci_data_free(h: *mut HciData) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Number of bins and total frequency.
///
/// # Safety
/// `h` must be a live handle; `bins` and `n` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hci_data_info(h: *const HciData, bins: *mut usize, n: *mut f64) -> HciStatus {
    guard(|| {
        let data = data_ref(h, "data")?;
        if bins.is_null() || n.is_null() {
            return Err(null("out"));
        }
        put(bins, data.len());
        put(n, data.n());
        Ok(())
    })
}

/// Quantile point estimate and density at it.
///
/// # Safety
/// `h` must be a live handle; `options` null or valid; `x_hat` and `f_hat` writable.
#[no_mangle]
pub unsafe extern "C" fn hci_estimate(
    h: *const HciData,
    method: HciMethod,
    p: f64,
    options: *const HciOptions,
    x_hat: *mut f64,
    f_hat: *mut f64,
) -> HciStatus {
    guard(|| {
        let data = data_ref(h, "data")?;
        if x_hat.is_null() || f_hat.is_null() {
            return Err(null("out"));
        }
        let est = histci::estimate(data, method.into(), p, &options_from(options)).map_err(fail)?;
        put(x_hat, est.x_hat);
        put(f_hat, est.f_hat);
        Ok(())
    })
}

/// Confidence interval for the `p` quantile. `n_override <= 0` uses the total frequency.
///
/// # Safety
/// `h` must be a live handle; `options` null or valid; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hci_ci(
    h: *const HciData,
    method: HciMethod,
    p: f64,
    level: f64,
    n_override: f64,
    options: *const HciOptions,
    out: *mut HciInterval,
) -> HciStatus {
    guard(|| {
        let data = data_ref(h, "data")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let resp = api::estimate(&api::EstimateRequest {
            bins: data.bins().to_vec(),
            method: method.into(),
            p,
            level,
            n_override: (n_override > 0.0).then_some(n_override),
            options: options_from(options),
        })
        .map_err(fail)?;
        put(
            out,
            HciInterval {
                point: resp.point,
                density: resp.density,
                lower: resp.lower,
                upper: resp.upper,
                level: resp.level,
                n: resp.n,
            },
        );
        Ok(())
    })
}

/// Interval for `x_p − y_p`; sample sizes are the total frequencies.
///
/// # Safety
/// `x` and `y` must be live handles; `options` null or valid; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hci_ci_diff(
    x: *const HciData,
    method_x: HciMethod,
    y: *const HciData,
    method_y: HciMethod,
    p: f64,
    level: f64,
    options: *const HciOptions,
    out: *mut HciDiffInterval,
) -> HciStatus {
    guard(|| {
        let (dx, dy) = (data_ref(x, "x")?, data_ref(y, "y")?);
        if out.is_null() {
            return Err(null("out"));
        }
        let resp = api::estimate_difference(&api::DiffRequest {
            x: Group {
                bins: dx.bins().to_vec(),
                method: method_x.into(),
                n_override: None,
            },
            y: Group {
                bins: dy.bins().to_vec(),
                method: method_y.into(),
                n_override: None,
            },
            p,
            level,
            options: options_from(options),
        })
        .map_err(fail)?;
        put(
            out,
            HciDiffInterval {
                difference: resp.difference,
                lower: resp.lower,
                upper: resp.upper,
                level: resp.level,
            },
        );
        Ok(())
    })
}

/// Percentile-matching GLD fit with default settings.
///
/// # Safety
/// `h` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hci_fit_gld(h: *const HciData, out: *mut HciGldFit) -> HciStatus {
    guard(|| {
        let data = data_ref(h, "data")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let report = api::fit_gld(&api::FitRequest {
            bins: data.bins().to_vec(),
            config: FitConfig::default(),
        })
        .map_err(fail)?;
        let g = report.params;
        put(
            out,
            HciGldFit {
                lambda: g.lambda,
                eta: g.eta,
                alpha: g.alpha,
                beta: g.beta,
                residual: report.residual,
                iterations: report.iterations as u64,
                converged: report.converged,
            },
        );
        Ok(())
    })
}

/// Standard normal quantile.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hci_z_quantile(q: f64, out: *mut f64) -> HciStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        put(out, histci::z_quantile(q).map_err(fail)?);
        Ok(())
    })
}

/// Message for the most recent failure on this thread, or null. The pointer
/// stays valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn hci_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform() -> *mut HciData {
        let (lo, hi, fr) = ([0.0, 1.0], [1.0, 2.0], [50.0, 50.0]);
        let mut h = ptr::null_mut();
        let s = unsafe { hci_data_new(lo.as_ptr(), hi.as_ptr(), fr.as_ptr(), ptr::null(), 2, &mut h) };
        assert_eq!(s, HciStatus::Ok);
        h
    }

    fn last_error() -> String {
        let p = hci_last_error();
        assert!(!p.is_null());
        unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_owned()
    }

    #[test]
    fn interval_matches_api() {
        let h = uniform();
        let mut ci = HciInterval::default();
        let s = unsafe { hci_ci(h, HciMethod::Histogram, 0.25, 0.95, 0.0, ptr::null(), &mut ci) };
        assert_eq!(s, HciStatus::Ok);
        assert!(hci_last_error().is_null());
        let resp = api::estimate(&api::EstimateRequest {
            bins: vec![Bin::new(0.0, 1.0, 50.0), Bin::new(1.0, 2.0, 50.0)],
            method: Method::Histogram,
            p: 0.25,
            level: 0.95,
            n_override: None,
            options: EstimatorOptions::default(),
        })
        .unwrap();
        assert_eq!((ci.point, ci.lower, ci.upper, ci.n), (resp.point, resp.lower, resp.upper, 100.0));
        unsafe { hci_data_free(h) };
    }

    #[test]
    fn error_codes() {
        let h = uniform();
        let mut ci = HciInterval::default();
        let s = unsafe { hci_ci(h, HciMethod::LinearInterpolation, 0.5, 0.95, 0.0, ptr::null(), &mut ci) };
        assert_eq!(s, HciStatus::Validation);
        assert_eq!(last_error(), "method requires bin means");

        let s = unsafe { hci_ci(h, HciMethod::Histogram, 1.5, 0.95, 0.0, ptr::null(), &mut ci) };
        assert_eq!(s, HciStatus::Usage);

        let mut x = 0.0;
        let mut f = 0.0;
        let s = unsafe { hci_estimate(ptr::null(), HciMethod::Histogram, 0.5, ptr::null(), &mut x, &mut f) };
        assert_eq!(s, HciStatus::NullPointer);

        let (lo, hi, fr) = ([0.0, 1.5], [1.0, 2.0], [5.0, 5.0]);
        let mut bad = ptr::null_mut();
        let s = unsafe { hci_data_new(lo.as_ptr(), hi.as_ptr(), fr.as_ptr(), ptr::null(), 2, &mut bad) };
        assert_eq!(s, HciStatus::Validation);
        assert!(bad.is_null());
        assert!(last_error().contains("row 2"));
        unsafe { hci_data_free(h) };
    }

    #[test]
    fn csv_diff_and_fit() {
        let csv = CString::new("lower,upper,freq,mean\n0,1,50,0.5\n1,2,50,1.5\n").unwrap();
        let mut h = ptr::null_mut();
        assert_eq!(unsafe { hci_data_from_csv(csv.as_ptr(), &mut h) }, HciStatus::Ok);
        let (mut bins, mut n) = (0usize, 0.0);
        assert_eq!(unsafe { hci_data_info(h, &mut bins, &mut n) }, HciStatus::Ok);
        assert_eq!((bins, n), (2, 100.0));

        let mut d = HciDiffInterval::default();
        let s = unsafe {
            hci_ci_diff(h, HciMethod::LinearInterpolation, h, HciMethod::Histogram, 0.3, 0.9, ptr::null(), &mut d)
        };
        assert_eq!(s, HciStatus::Ok);
        assert_eq!(d.difference, 0.0);
        assert_eq!(d.lower, -d.upper);

        let mut fit = HciGldFit::default();
        assert_eq!(unsafe { hci_fit_gld(h, &mut fit) }, HciStatus::Ok);
        assert!(fit.converged && (fit.alpha - 1.0).abs() < 0.05);

        let mut z = 0.0;
        assert_eq!(unsafe { hci_z_quantile(0.975, &mut z) }, HciStatus::Ok);
        assert!((z - 1.959963984540054).abs() < 1e-12);
        unsafe { hci_data_free(h) };
    }
}
