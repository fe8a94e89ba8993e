//! Runtime evaluation of the controllability function and the feedback.
//!
//! `Theta(x)` is the positive root of `2 a0 Theta = (D(Theta) F D(Theta) x, x)`
//! with `D(Theta) = diag(Theta^{-(2i-1)/2})`. In the variable `s = ln Theta`
//!
//! ```text
//! phi(s) = ln (F y, y) - ln(2 a0) - s,   y = D(e^s) x,
//! phi'(s) = -((F - HF - FH) y, y) / (F y, y),
//! ```
//!
//! so `phi` is strictly decreasing whenever `F - HF - FH` is positive
//! definite and the root is unique. The solver brackets it geometrically and
//! refines with safeguarded Newton steps in `s`. `y` is carried with a common
//! scale factor `e^m` pulled out so that neither tiny nor huge states
//! overflow.

use num_traits::Zero;

use crate::controller::ControllerSpec;
use crate::dd;
use crate::error::{Error, Result};
use crate::exact::{self, Rational};

/// Relative tolerance on `Theta`.
pub const THETA_RTOL: f64 = 1e-13;
pub const MAX_ITERATIONS: usize = 200;
/// States with every component below this magnitude are treated as the
/// origin.
pub const ORIGIN_GUARD: f64 = 1e-280;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaValue {
    pub theta: f64,
    pub converged: bool,
    pub iterations: usize,
    /// `|2 a0 Theta - (F y, y)|` at the returned root.
    pub residual: f64,
}

impl ThetaValue {
    fn origin() -> Self {
        Self {
            theta: 0.0,
            converged: true,
            iterations: 0,
            residual: 0.0,
        }
    }
}

/// `y = D(Theta) x`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledState {
    pub y: Vec<f64>,
}

pub fn scaled_state(theta: f64, x: &[f64]) -> ScaledState {
    ScaledState {
        y: x.iter()
            .enumerate()
            .map(|(i, xi)| xi * theta.powf(-(2.0 * i as f64 + 1.0) / 2.0))
            .collect(),
    }
}

/// `y = e^m * ŷ` with `max |ŷ_i| = 1`.
struct Normalized {
    y_hat: Vec<f64>,
    log_scale: f64,
}

fn normalized_scaled_state(x: &[f64], s: f64) -> Normalized {
    let logs: Vec<f64> = x
        .iter()
        .enumerate()
        .map(|(i, xi)| {
            if *xi == 0.0 {
                f64::NEG_INFINITY
            } else {
                xi.abs().ln() - (2.0 * i as f64 + 1.0) * 0.5 * s
            }
        })
        .collect();
    let m = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let y_hat = x
        .iter()
        .zip(&logs)
        .map(|(xi, l)| {
            if *xi == 0.0 {
                0.0
            } else {
                xi.signum() * (l - m).exp()
            }
        })
        .collect();
    Normalized {
        y_hat,
        log_scale: m,
    }
}

fn check_state(spec: &ControllerSpec, x: &[f64]) -> Result<()> {
    if x.len() != spec.n() {
        return Err(Error::StateDimension {
            expected: spec.n(),
            got: x.len(),
        });
    }
    if let Some(index) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteState { index });
    }
    Ok(())
}

fn is_origin(x: &[f64]) -> bool {
    x.iter().all(|v| v.abs() < ORIGIN_GUARD)
}

/// Coefficients, lowest power first, of
/// `2 a0 Theta^{2n} - sum_{ij} f_ij x_i x_j Theta^{2n-i-j}`.
pub fn theta_polynomial_coeffs(spec: &ControllerSpec, x: &[f64]) -> Result<Vec<f64>> {
    check_state(spec, x)?;
    let n = spec.n();
    let fast = spec.fast();
    let mut coeffs = vec![0.0; 2 * n + 1];
    coeffs[2 * n] = fast.two_a0;
    for i in 0..n {
        for j in 0..n {
            // One-based powers: 2n - (i+1) - (j+1).
            let power = 2 * n - i - j - 2;
            coeffs[power] -= fast.f[i * n + j].to_f64() * x[i] * x[j];
        }
    }
    Ok(coeffs)
}

/// One monomial `coeff * Theta^power * x_i x_j` of the right-hand side
/// `sum f_ij x_i x_j Theta^{2n-i-j} / (2 a0)`, symmetric pairs merged.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThetaMonomial {
    /// One-based state indices with `i <= j`.
    pub i: usize,
    pub j: usize,
    pub power: usize,
    pub coeff: Rational,
}

/// Exact right-hand side of `Theta^{2n} = ...`, normalised by `2 a0`,
/// ordered by decreasing power of `Theta` and then by `(i, j)`.
pub fn theta_equation_monomials(spec: &ControllerSpec) -> Vec<ThetaMonomial> {
    let n = spec.n();
    let two_a0 = exact::int(2) * spec.a0();
    let f = spec.f();
    let mut out = Vec::new();
    for i in 0..n {
        for j in i..n {
            let mut coeff = f[(i, j)].clone();
            if i != j {
                coeff += &f[(j, i)];
            }
            if coeff.is_zero() {
                continue;
            }
            out.push(ThetaMonomial {
                i: i + 1,
                j: j + 1,
                power: 2 * n - i - j - 2,
                coeff: coeff / &two_a0,
            });
        }
    }
    out.sort_by(|a, b| b.power.cmp(&a.power).then((a.i, a.j).cmp(&(b.i, b.j))));
    out
}

struct Evaluation {
    phi: f64,
    dphi: f64,
}

fn evaluate(spec: &ControllerSpec, x: &[f64], s: f64) -> Evaluation {
    let fast = spec.fast();
    let y = normalized_scaled_state(x, s);
    let q = dd::quadratic_form(&fast.f, &y.y_hat);
    let slope = dd::quadratic_form(&fast.slope, &y.y_hat);
    Evaluation {
        phi: q.ln() + 2.0 * y.log_scale - fast.two_a0.ln() - s,
        dphi: -slope / q,
    }
}

fn initial_log_guess(spec: &ControllerSpec, x: &[f64]) -> f64 {
    let fast = spec.fast();
    let ln_two_a0 = fast.two_a0.ln();
    x.iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0)
        .map(|(i, v)| {
            let fii = fast.f_diag[i].abs().max(f64::MIN_POSITIVE);
            (fii.ln() + 2.0 * v.abs().ln() - ln_two_a0) / (2.0 * (i + 1) as f64)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

pub fn solve_theta(spec: &ControllerSpec, x: &[f64]) -> Result<ThetaValue> {
    solve_theta_from(spec, x, None)
}

/// Solves for `Theta(x)`, optionally warm-started from a nearby value.
pub fn solve_theta_from(
    spec: &ControllerSpec,
    x: &[f64],
    guess: Option<f64>,
) -> Result<ThetaValue> {
    check_state(spec, x)?;
    if is_origin(x) {
        return Ok(ThetaValue::origin());
    }
    let state_norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();

    let mut s = match guess {
        Some(g) if g > 0.0 && g.is_finite() => g.ln(),
        _ => initial_log_guess(spec, x),
    };
    let mut iterations = 0;
    let mut eval = evaluate(spec, x, s);
    if eval.phi == 0.0 {
        return Ok(finish(spec, x, s, true, 0));
    }

    // Bracket [lo, hi] with phi(lo) > 0 > phi(hi), expanding geometrically.
    let (mut lo, mut hi);
    let mut step = 0.25_f64;
    if eval.phi > 0.0 {
        lo = s;
        loop {
            hi = lo + step;
            iterations += 1;
            let e = evaluate(spec, x, hi);
            if e.phi < 0.0 {
                break;
            }
            if e.phi == 0.0 {
                return Ok(finish(spec, x, hi, true, iterations));
            }
            lo = hi;
            step *= 2.0;
            if iterations > MAX_ITERATIONS || !hi.is_finite() {
                return Err(Error::NoBracket { state_norm });
            }
        }
    } else {
        hi = s;
        loop {
            lo = hi - step;
            iterations += 1;
            let e = evaluate(spec, x, lo);
            if e.phi > 0.0 {
                break;
            }
            if e.phi == 0.0 {
                return Ok(finish(spec, x, lo, true, iterations));
            }
            hi = lo;
            step *= 2.0;
            if iterations > MAX_ITERATIONS || !lo.is_finite() {
                return Err(Error::NoBracket { state_norm });
            }
        }
    }

    // Safeguarded Newton in s: bisect whenever the Newton point leaves the
    // bracket or the step is not shrinking fast enough.
    if s <= lo || s >= hi {
        s = 0.5 * (lo + hi);
    }
    eval = evaluate(spec, x, s);
    let mut dx_old = hi - lo;
    let mut dx = dx_old;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        if eval.phi > 0.0 {
            lo = s;
        } else {
            hi = s;
        }
        let newton = s - eval.phi / eval.dphi;
        let usable = eval.dphi < 0.0
            && newton.is_finite()
            && newton > lo
            && newton < hi
            && (2.0 * eval.phi).abs() <= (dx_old * eval.dphi).abs();
        dx_old = dx;
        if usable {
            dx = s - newton;
            s = newton;
        } else {
            dx = 0.5 * (hi - lo);
            s = lo + dx;
        }
        if dx.abs() <= THETA_RTOL || hi - lo <= THETA_RTOL {
            return Ok(finish(spec, x, s, true, iterations));
        }
        eval = evaluate(spec, x, s);
        if eval.phi == 0.0 {
            return Ok(finish(spec, x, s, true, iterations));
        }
    }
    Err(Error::NoConvergence {
        iterations,
        lo: lo.exp(),
        hi: hi.exp(),
    })
}

fn finish(
    spec: &ControllerSpec,
    x: &[f64],
    s: f64,
    converged: bool,
    iterations: usize,
) -> ThetaValue {
    let theta = s.exp();
    let y = normalized_scaled_state(x, s);
    let q = dd::quadratic_form(&spec.fast().f, &y.y_hat) * (2.0 * y.log_scale).exp();
    let lhs = spec.fast().two_a0 * theta;
    ThetaValue {
        theta,
        converged,
        iterations,
        residual: (lhs - q).abs(),
    }
}

/// `((F - HF - FH) y, y)` at the solved root, the (negated) slope of the
/// implicit equation; positive for every admissible controller.
pub fn root_slope(spec: &ControllerSpec, x: &[f64], theta: f64) -> f64 {
    let y = normalized_scaled_state(x, theta.ln());
    dd::quadratic_form(&spec.fast().slope, &y.y_hat) * (2.0 * y.log_scale).exp()
}

/// Feedback for a state whose `Theta` is already known.
pub fn control_at(spec: &ControllerSpec, x: &[f64], theta: f64) -> f64 {
    if theta <= 0.0 {
        return 0.0;
    }
    // u = Theta^{-1/2} (a, y) = e^{m - s/2} (a, ŷ).
    let s = theta.ln();
    let y = normalized_scaled_state(x, s);
    let ay: f64 = spec
        .gains_f64()
        .iter()
        .zip(&y.y_hat)
        .map(|(a, v)| a * v)
        .sum();
    ay * (y.log_scale - 0.5 * s).exp()
}

/// `u(x) = sum a_k x_k / Theta^k`, continuous at the origin with `u(0) = 0`.
pub fn control(spec: &ControllerSpec, x: &[f64]) -> Result<f64> {
    let theta = solve_theta(spec, x)?;
    Ok(control_at(spec, x, theta.theta))
}

/// `dTheta/dt` along the closed loop from the quotient of the two quadratic
/// forms.
pub fn theta_directional_derivative(spec: &ControllerSpec, x: &[f64]) -> Result<f64> {
    let theta = solve_theta(spec, x)?;
    if theta.theta == 0.0 {
        return Err(Error::InvalidParameter(
            "directional derivative is undefined at the origin".into(),
        ));
    }
    let y = normalized_scaled_state(x, theta.theta.ln());
    let fast = spec.fast();
    let num = dd::quadratic_form(&fast.lie, &y.y_hat);
    let den = dd::quadratic_form(&fast.slope, &y.y_hat);
    Ok(num / den)
}

/// `sqrt(2 a0 (F^{-1} a, a))`.
pub fn control_bound(spec: &ControllerSpec) -> f64 {
    spec.control_sup()
}

/// `diag(lambda, lambda^2, ..., lambda^n) x`.
pub fn dilate(lambda: f64, x: &[f64]) -> Vec<f64> {
    x.iter()
        .enumerate()
        .map(|(i, v)| v * lambda.powi(i as i32 + 1))
        .collect()
}
