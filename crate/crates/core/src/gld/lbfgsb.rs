//! Limited-memory BFGS with simple bounds.
//!
//! Variables sitting on a bound with the gradient pointing outward are frozen
//! for the iteration; the two-loop recursion runs on the remaining free
//! variables and the step is projected back into the box, with an Armijo
//! backtracking search along the projected path.

use std::collections::VecDeque;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub lower: f64,
    pub upper: f64,
}

impl Bounds {
    pub const FREE: Bounds = Bounds {
        lower: f64::NEG_INFINITY,
        upper: f64::INFINITY,
    };

    pub fn new(lower: f64, upper: f64) -> Self {
        Bounds { lower, upper }
    }

    fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.lower, self.upper)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Settings {
    /// Memory length.
    pub m: usize,
    pub max_iterations: usize,
    /// Stop when the projected gradient's infinity norm falls below this.
    pub pg_tol: f64,
    /// Stop when the relative decrease of f over an iteration falls below
    /// `factr * f64::EPSILON`.
    pub factr: f64,
    /// Stop as soon as f drops below this.
    pub f_target: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            m: 10,
            max_iterations: 500,
            pg_tol: 1e-10,
            factr: 10.0,
            f_target: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    TargetReached,
    ProjectedGradient,
    RelativeReduction,
    LineSearchFailed,
    MaxIterations,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub x: Vec<f64>,
    pub f: f64,
    pub projected_gradient: f64,
    pub iterations: usize,
    pub termination: Termination,
}

/// Minimizes `f` over the box. `grad` writes the gradient of `f` at `x` into its second argument.
pub fn minimize<F, G>(f: F, grad: G, x0: &[f64], bounds: &[Bounds], settings: &Settings) -> Outcome
where
    F: Fn(&[f64]) -> f64,
    G: Fn(&[f64], &mut [f64]),
{
    let n = x0.len();
    assert_eq!(bounds.len(), n, "one bound per variable");
    let mut x: Vec<f64> = x0.iter().zip(bounds).map(|(&v, b)| b.clamp(v)).collect();
    let mut fx = f(&x);
    let mut g = vec![0.0; n];
    grad(&x, &mut g);
    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(settings.m);

    let mut iterations = 0;
    let termination = loop {
        let pg = projected_gradient_norm(&x, &g, bounds);
        if fx <= settings.f_target {
            break Termination::TargetReached;
        }
        if pg <= settings.pg_tol {
            break Termination::ProjectedGradient;
        }
        if iterations >= settings.max_iterations {
            break Termination::MaxIterations;
        }
        iterations += 1;

        let free: Vec<bool> = (0..n).map(|i| !is_blocked(x[i], g[i], &bounds[i])).collect();
        let mut d = two_loop(&g, &free, &history);
        let mut slope: f64 = d.iter().zip(&g).map(|(a, b)| a * b).sum();
        if !(slope < 0.0) {
            history.clear();
            d = g.iter().zip(&free).map(|(&gi, &fr)| if fr { -gi } else { 0.0 }).collect();
            slope = d.iter().zip(&g).map(|(a, b)| a * b).sum();
            if !(slope < 0.0) {
                break Termination::ProjectedGradient;
            }
        }

        // First iteration without curvature information: cap the step length.
        let mut t = if history.is_empty() {
            (1.0 / d.iter().map(|v| v.abs()).fold(0.0, f64::max)).min(1.0)
        } else {
            1.0
        };
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> = (0..n).map(|i| bounds[i].clamp(x[i] + t * d[i])).collect();
            let decrease: f64 = (0..n).map(|i| g[i] * (trial[i] - x[i])).sum();
            let ft = f(&trial);
            if ft.is_finite() && ft <= fx + 1e-4 * decrease && decrease < 0.0 {
                accepted = Some((trial, ft));
                break;
            }
            t *= 0.5;
        }
        let Some((x_new, f_new)) = accepted else {
            break Termination::LineSearchFailed;
        };

        let mut g_new = vec![0.0; n];
        grad(&x_new, &mut g_new);
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
        let yy: f64 = y.iter().map(|v| v * v).sum();
        if sy > f64::EPSILON * yy {
            if history.len() == settings.m {
                history.pop_front();
            }
            history.push_back((s, y, 1.0 / sy));
        }

        let reduction = (fx - f_new) / fx.abs().max(f_new.abs()).max(f64::MIN_POSITIVE);
        x = x_new;
        g = g_new;
        let f_prev = fx;
        fx = f_new;
        if f_prev > 0.0 && reduction <= settings.factr * f64::EPSILON {
            break Termination::RelativeReduction;
        }
    };

    Outcome {
        projected_gradient: projected_gradient_norm(&x, &g, bounds),
        x,
        f: fx,
        iterations,
        termination,
    }
}

fn is_blocked(x: f64, g: f64, b: &Bounds) -> bool {
    (x <= b.lower && g > 0.0) || (x >= b.upper && g < 0.0)
}

/// Infinity norm of `P(x - g) - x`.
pub fn projected_gradient_norm(x: &[f64], g: &[f64], bounds: &[Bounds]) -> f64 {
    x.iter()
        .zip(g)
        .zip(bounds)
        .map(|((&xi, &gi), b)| (b.clamp(xi - gi) - xi).abs())
        .fold(0.0, f64::max)
}

fn two_loop(g: &[f64], free: &[bool], history: &VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
    let mask = |v: &[f64]| -> Vec<f64> { v.iter().zip(free).map(|(&a, &f)| if f { a } else { 0.0 }).collect() };
    let dot = |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).zip(free).filter(|(_, &f)| f).map(|((x, y), _)| x * y).sum() };
    let mut q = mask(g);
    let mut alphas = Vec::with_capacity(history.len());
    for (s, y, _) in history.iter().rev() {
        let sy = dot(s, y);
        if sy <= 0.0 {
            alphas.push(0.0);
            continue;
        }
        let a = dot(s, &q) / sy;
        for i in 0..q.len() {
            if free[i] {
                q[i] -= a * y[i];
            }
        }
        alphas.push(a);
    }
    if let Some((s, y, _)) = history.back() {
        let yy = dot(y, y);
        let sy = dot(s, y);
        if yy > 0.0 && sy > 0.0 {
            let gamma = sy / yy;
            q.iter_mut().for_each(|v| *v *= gamma);
        }
    }
    for ((s, y, _), a) in history.iter().zip(alphas.iter().rev()) {
        let sy = dot(s, y);
        if sy <= 0.0 {
            continue;
        }
        let b = dot(y, &q) / sy;
        for i in 0..q.len() {
            if free[i] {
                q[i] += (a - b) * s[i];
            }
        }
    }
    q.iter().map(|v| -v).collect()
}

/// Central-difference gradient with per-coordinate step `rel_step * max(|x_i|, 1)`.
///
/// The stencil is clipped to the box, falling back to a one-sided difference
/// at a bound.
pub fn central_difference<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], bounds: &[Bounds], rel_step: f64, out: &mut [f64]) {
    let mut probe = x.to_vec();
    for i in 0..x.len() {
        let h = rel_step * x[i].abs().max(1.0);
        let hi = (x[i] + h).min(bounds[i].upper);
        let lo = (x[i] - h).max(bounds[i].lower);
        probe[i] = hi;
        let f_hi = f(&probe);
        probe[i] = lo;
        let f_lo = f(&probe);
        probe[i] = x[i];
        out[i] = (f_hi - f_lo) / (hi - lo);
    }
}
