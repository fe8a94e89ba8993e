//! Closed-form trajectories for the three-dimensional reference example.
//!
//! With `Theta(x(t)) = Theta0 - t` the closed loop becomes an Euler equation
//! in `x3`; substituting `t = Theta0 - e^tau` gives constant coefficients with
//! characteristic roots `3` and `3 +- i sqrt(6)`. Everything here is plain
//! floating point and independent of the generic root solver and integrator.

use crate::controller::{ControllerSpec, Provenance};
use crate::error::{Error, Result};
use crate::exact::{int, ratio, RatMatrix, Rational};

const SQRT6: f64 = 2.449_489_742_783_178;

/// Right-hand side coefficients of `Theta^6 = 41 T^4 x1^2 + 410 T^3 x1 x2 +
/// 820 T^2 x1 x3 + 1230 T^2 x2^2 + 5330 T x2 x3 + 6150 x3^2`.
pub const THETA_COEFFS: [i64; 6] = [41, 410, 820, 1230, 5330, 6150];

/// The example controller with `d = 1`, `a3 = -45`, unit Hankel scale,
/// assembled from its tabulated values.
pub fn example_controller() -> ControllerSpec {
    let a: Vec<Rational> = [-6, -25, -45].into_iter().map(int).collect();
    let f_rows = [
        [ratio(1, 5), int(1), int(2)],
        [int(1), int(6), int(13)],
        [int(2), int(13), int(30)],
    ];
    let f = RatMatrix::from_rows(f_rows.into_iter().map(Vec::from).collect()).scale(&int(4));
    let f_inv = RatMatrix::from_rows(vec![
        vec![int(55), int(-20), int(5)],
        vec![int(-20), int(10), int(-3)],
        vec![int(5), int(-3), int(1)],
    ])
    .scale(&ratio(1, 4));
    // F^{-1} = D C D with D = diag(1, -1, 1/2).
    let d_inv = RatMatrix::diagonal(vec![int(1), int(-1), int(2)]);
    let c = d_inv.mul(&f_inv).mul(&d_inv);
    let provenance = Provenance {
        a_n: int(-45),
        c_scale: int(1),
        xi0: ratio(5, 12),
        threshold: ratio(4, 9),
    };
    ControllerSpec::from_parts(int(1), ratio(2, 205), a, f, f_inv, c, provenance)
        .expect("reference example is well formed")
}

fn state3(x: &[f64]) -> Result<[f64; 3]> {
    if x.len() != 3 {
        return Err(Error::StateDimension {
            expected: 3,
            got: x.len(),
        });
    }
    if let Some(index) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteState { index });
    }
    Ok([x[0], x[1], x[2]])
}

/// `Theta(x)` for the example, by bisection on `ln Theta` of the sextic
/// divided by `Theta^6` (a decreasing function of `Theta`).
pub fn example_theta(x: &[f64]) -> Result<f64> {
    let [x1, x2, x3] = state3(x)?;
    if x1 == 0.0 && x2 == 0.0 && x3 == 0.0 {
        return Ok(0.0);
    }
    let k = THETA_COEFFS.map(|c| c as f64);
    let g = |s: f64| {
        let r = (-s).exp();
        let sum = k[0] * x1 * x1 * r.powi(2)
            + k[1] * x1 * x2 * r.powi(3)
            + k[2] * x1 * x3 * r.powi(4)
            + k[3] * x2 * x2 * r.powi(4)
            + k[4] * x2 * x3 * r.powi(5)
            + k[5] * x3 * x3 * r.powi(6);
        sum - 1.0
    };
    let guess = [x1.abs(), x2.abs().sqrt(), x3.abs().cbrt()]
        .into_iter()
        .fold(0.0_f64, f64::max)
        .ln();
    let (mut lo, mut hi) = (guess, guess);
    while g(lo) <= 0.0 {
        lo -= 1.0;
    }
    while g(hi) > 0.0 {
        hi += 1.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((0.5 * (lo + hi)).exp())
}

/// Constants of `y(tau) = e^{3 tau}(c1 + c2 cos(sqrt6 tau) + c3 sin(sqrt6 tau))`
/// and their rotated forms `xi1, xi2` relative to `tau0 = ln Theta0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormCoeffs {
    pub theta0: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub xi1: f64,
    pub xi2: f64,
}

impl ClosedFormCoeffs {
    pub fn from_state(x0: &[f64]) -> Result<Self> {
        let theta0 = example_theta(x0)?;
        if theta0 == 0.0 {
            return Err(Error::Domain { t: 0.0, theta0 });
        }
        Ok(Self::with_theta(x0, theta0))
    }

    fn with_theta(x0: &[f64], theta0: f64) -> Self {
        let (x1, x2, x3) = (x0[0], x0[1], x0[2]);
        let th = theta0;
        let c1 = (x1 + 5.0 * x2 / th + 15.0 * x3 / (th * th)) / (6.0 * th);
        let xi1 = -(x1 + 5.0 * x2 / th + 9.0 * x3 / (th * th)) / (6.0 * th);
        let xi2 = -(x2 + 3.0 * x3 / th) / (SQRT6 * th * th);
        let beta = SQRT6 * th.ln();
        Self {
            theta0,
            c1,
            c2: xi1 * beta.cos() - xi2 * beta.sin(),
            c3: xi1 * beta.sin() + xi2 * beta.cos(),
            xi1,
            xi2,
        }
    }

    /// `y(tau)` with the unrotated constants, i.e. `x3(Theta0 - e^tau)`.
    pub fn y(&self, tau: f64) -> f64 {
        let w = SQRT6 * tau;
        (3.0 * tau).exp() * (self.c1 + self.c2 * w.cos() + self.c3 * w.sin())
    }

    fn alpha(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0 && t < self.theta0) {
            return Err(Error::Domain {
                t,
                theta0: self.theta0,
            });
        }
        Ok(SQRT6 * (-t / self.theta0).ln_1p())
    }

    pub fn state(&self, t: f64) -> Result<[f64; 3]> {
        let (ca, sa) = {
            let a = self.alpha(t)?;
            (a.cos(), a.sin())
        };
        let r = self.theta0 - t;
        let (c1, p, q) = (self.c1, self.xi1, self.xi2);
        Ok([
            r * (6.0 * c1 + 5.0 * SQRT6 * q * ca - 5.0 * SQRT6 * p * sa),
            r * r * (-3.0 * c1 - (3.0 * p + SQRT6 * q) * ca + (SQRT6 * p - 3.0 * q) * sa),
            r * r * r * (c1 + p * ca + q * sa),
        ])
    }

    pub fn control(&self, t: f64) -> Result<f64> {
        let a = self.alpha(t)?;
        let (c1, p, q) = (self.c1, self.xi1, self.xi2);
        Ok(-6.0 * c1
            + 5.0 * (6.0 * p - SQRT6 * q) * a.cos()
            + 5.0 * (SQRT6 * p + 6.0 * q) * a.sin())
    }
}

pub fn closed_form_state(x0: &[f64], t: f64) -> Result<[f64; 3]> {
    ClosedFormCoeffs::from_state(x0)?.state(t)
}

pub fn closed_form_control(x0: &[f64], t: f64) -> Result<f64> {
    ClosedFormCoeffs::from_state(x0)?.control(t)
}

/// Point `(x1, -41 x1^2 / 121, 0)` of the special curve, `x1 > 0`.
pub fn special_curve_start(x1: f64) -> [f64; 3] {
    [x1, -41.0 * x1 * x1 / 121.0, 0.0]
}

/// The special-curve trajectory in its simplified closed form.
pub fn special_curve_state(x1: f64, t: f64) -> Result<[f64; 3]> {
    let theta0 = 41.0 * x1 / 11.0;
    if !(t >= 0.0 && t < theta0) {
        return Err(Error::Domain { t, theta0 });
    }
    let r = 41.0 * x1 - 11.0 * t;
    let a = SQRT6 * (-t / theta0).ln_1p();
    let (ca, sa) = (a.cos(), a.sin());
    Ok([
        r / 451.0 * (6.0 + 5.0 * ca + 5.0 * SQRT6 * sa),
        r * r / 9922.0 * (-6.0 + 4.0 * ca - 3.0 * SQRT6 * sa),
        r * r * r / 327_426.0 * (6.0 - 6.0 * ca + SQRT6 * sa),
    ])
}

pub fn special_curve_control(x1: f64, t: f64) -> Result<f64> {
    let theta0 = 41.0 * x1 / 11.0;
    if !(t >= 0.0 && t < theta0) {
        return Err(Error::Domain { t, theta0 });
    }
    let a = SQRT6 * (-t / theta0).ln_1p();
    Ok(-(6.0 + 35.0 * a.cos()) / 41.0)
}

/// Relative residuals of the closed loop along the closed form at `t`,
/// using fourth-order central differences with step `h`:
/// `[x2' - x1, x3' - x2, euler]`, where `euler` is
/// `(T-t)^3 x3''' + 6 (T-t)^2 x3'' + 25 (T-t) x3' + 45 x3` with
/// `x3'' = x1`, `x3''' = x1'` taken from the chain structure.
pub fn ode_residual(coeffs: &ClosedFormCoeffs, t: f64, h: f64) -> Result<[f64; 3]> {
    let p = [
        coeffs.state(t - 2.0 * h)?,
        coeffs.state(t - h)?,
        coeffs.state(t + h)?,
        coeffs.state(t + 2.0 * h)?,
    ];
    let deriv = |k: usize| (p[0][k] - 8.0 * p[1][k] + 8.0 * p[2][k] - p[3][k]) / (12.0 * h);
    let x = coeffs.state(t)?;
    let r = coeffs.theta0 - t;
    let rel = |res: f64, scale: f64| {
        if scale == 0.0 {
            res.abs()
        } else {
            res.abs() / scale
        }
    };

    let dx1 = deriv(0);
    let terms = [
        r * r * r * dx1,
        6.0 * r * r * x[0],
        25.0 * r * x[1],
        45.0 * x[2],
    ];
    let euler_scale = terms.iter().map(|v| v.abs()).sum::<f64>();
    Ok([
        rel(deriv(1) - x[0], x[0].abs().max(x[1].abs() / r)),
        rel(deriv(2) - x[1], x[1].abs().max(x[2].abs() / r)),
        rel(terms.iter().sum(), euler_scale),
    ])
}
