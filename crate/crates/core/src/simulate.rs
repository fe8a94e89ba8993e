//! Closed-loop integration of `x' = A0 x + b0 u(x)`.
//!
//! The feedback contains `Theta^{-k}` terms, so the vector field stiffens as
//! the state approaches the origin. Steps are capped at `KAPPA * Theta` and
//! the run stops once `Theta <= theta_stop`; the remaining time to the origin
//! is exactly the final `Theta`, which is added to the elapsed time.
//!
//! The step-error weights are dilation aware: component `i` is measured
//! against `max(|x_i|, Theta^i sqrt(2 a0 (F^{-1})_ii))`, the largest value
//! `|x_i|` takes on the current level set of `Theta`.

use std::io::Write;
use std::path::Path;

use crate::controller::ControllerSpec;
use crate::error::{Error, Result};
use crate::exact;
use crate::theta::{control_at, solve_theta, solve_theta_from};

/// Step cap relative to the current `Theta`.
pub const KAPPA: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub rtol: f64,
    pub atol: f64,
    pub theta_stop: f64,
    pub max_steps: usize,
    /// Keep every `record_stride`-th accepted step (the first and last state
    /// are always kept).
    pub record_stride: usize,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-300,
            theta_stop: 1e-8,
            max_steps: 200_000,
            record_stride: 1,
        }
    }
}

impl SimulationConfig {
    fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!(
                    "{name} must be positive, got {v}"
                )))
            }
        };
        positive("rtol", self.rtol)?;
        positive("atol", self.atol)?;
        positive("theta_stop", self.theta_stop)?;
        if self.max_steps == 0 || self.record_stride == 0 {
            return Err(Error::InvalidParameter(
                "max_steps and record_stride must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub x: Vec<f64>,
    pub theta: f64,
    pub u: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub samples: Vec<Sample>,
    pub theta0: f64,
    pub t_final: f64,
    /// `t_final + Theta(x(t_final))`.
    pub time_of_motion: f64,
    /// Largest `|u|` seen at any stage evaluation, accepted or not.
    pub max_stage_control: f64,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

struct Stepper<'a> {
    spec: &'a ControllerSpec,
    cfg: &'a SimulationConfig,
    level_scale: Vec<f64>,
    t: f64,
    /// Kahan compensation for `t` (elapsed time is `t - t_lo`); late steps are far below `ulp(t)`.
    t_lo: f64,
    x: Vec<f64>,
    theta: f64,
    u: f64,
    h: f64,
    max_stage_control: f64,
    accepted: usize,
    rejected: usize,
}

impl<'a> Stepper<'a> {
    fn new(spec: &'a ControllerSpec, x0: &[f64], cfg: &'a SimulationConfig) -> Result<Self> {
        cfg.validate()?;
        let th = solve_theta(spec, x0)?;
        let u = control_at(spec, x0, th.theta);
        let two_a0 = 2.0 * exact::to_f64(spec.a0());
        let level_scale = (0..spec.n())
            .map(|i| (two_a0 * exact::to_f64(&spec.f_inv()[(i, i)]).abs()).sqrt())
            .collect();
        Ok(Self {
            spec,
            cfg,
            level_scale,
            t: 0.0,
            t_lo: 0.0,
            x: x0.to_vec(),
            theta: th.theta,
            u,
            h: 0.01 * th.theta,
            max_stage_control: u.abs(),
            accepted: 0,
            rejected: 0,
        })
    }

    /// Closed-loop field at `x`, warm-starting the root solve from `guess`.
    fn field(&mut self, x: &[f64], guess: f64) -> Result<(Vec<f64>, f64)> {
        let th = solve_theta_from(self.spec, x, Some(guess))?;
        let u = control_at(self.spec, x, th.theta);
        self.max_stage_control = self.max_stage_control.max(u.abs());
        let mut dx = vec![0.0; x.len()];
        dx[0] = u;
        dx[1..].copy_from_slice(&x[..x.len() - 1]);
        Ok((dx, th.theta))
    }

    fn sample(&self) -> Sample {
        Sample {
            t: self.elapsed(),
            x: self.x.clone(),
            theta: self.theta,
            u: self.u,
        }
    }

    fn elapsed(&self) -> f64 {
        self.t - self.t_lo
    }

    fn advance_time(&mut self, h: f64) {
        let y = h - self.t_lo;
        let sum = self.t + y;
        self.t_lo = (sum - self.t) - y;
        self.t = sum;
    }

    /// Takes one accepted step no longer than `limit` (if given).
    fn step(&mut self, limit: Option<f64>) -> Result<()> {
        let n = self.x.len();
        let (k0, _) = self.field(&self.x.clone(), self.theta)?;
        loop {
            let mut h = self.h.min(KAPPA * self.theta);
            let mut clipped = false;
            if let Some(limit) = limit {
                let remaining = (limit - self.t) + self.t_lo;
                if h >= remaining {
                    h = remaining;
                    clipped = true;
                }
            }
            if (clipped && h <= 0.0) || (!clipped && h <= 1e-15 * self.theta) || !h.is_finite() {
                return Err(Error::StepUnderflow {
                    t: self.elapsed(),
                    theta: self.theta,
                    state: self.x.clone(),
                });
            }

            let mut k = vec![k0.clone()];
            let mut stage = vec![0.0; n];
            for s in 1..7 {
                for i in 0..n {
                    stage[i] = self.x[i] + h * (0..s).map(|j| A[s][j] * k[j][i]).sum::<f64>();
                }
                let guess = (self.theta - C[s] * h).max(0.5 * self.theta);
                k.push(self.field(&stage, guess)?.0);
            }
            // Stage 7 is evaluated at the fifth-order solution (FSAL).
            let x_new = stage.clone();
            let mut err = 0.0_f64;
            let theta_new_guess = self.theta - h;
            for i in 0..n {
                let e = h * (0..7).map(|j| (B5[j] - B4[j]) * k[j][i]).sum::<f64>();
                let level = theta_new_guess.max(0.0).powi(i as i32 + 1) * self.level_scale[i];
                let scale =
                    self.cfg.atol + self.cfg.rtol * self.x[i].abs().max(x_new[i].abs()).max(level);
                err = err.max(e.abs() / scale);
            }

            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            if err <= 1.0 {
                let th = solve_theta_from(
                    self.spec,
                    &x_new,
                    Some(theta_new_guess.max(0.5 * self.theta)),
                )?;
                if clipped {
                    self.t = limit.unwrap();
                    self.t_lo = 0.0;
                } else {
                    self.advance_time(h);
                }
                self.x = x_new;
                self.theta = th.theta;
                self.u = control_at(self.spec, &self.x, th.theta);
                if !clipped {
                    self.h = h * factor;
                }
                self.accepted += 1;
                return Ok(());
            }
            self.rejected += 1;
            self.h = h * factor;
        }
    }
}

/// Integrates from `x0` until `Theta <= theta_stop`.
pub fn integrate(
    spec: &ControllerSpec,
    x0: &[f64],
    cfg: &SimulationConfig,
) -> Result<TrajectoryRecord> {
    let theta0 = solve_theta(spec, x0)?.theta;
    if theta0 == 0.0 {
        cfg.validate()?;
        return Ok(TrajectoryRecord {
            samples: Vec::new(),
            theta0: 0.0,
            t_final: 0.0,
            time_of_motion: 0.0,
            max_stage_control: 0.0,
            accepted_steps: 0,
            rejected_steps: 0,
        });
    }
    let mut stepper = Stepper::new(spec, x0, cfg)?;
    let mut samples = vec![stepper.sample()];
    while stepper.theta > cfg.theta_stop {
        if stepper.accepted >= cfg.max_steps {
            return Err(Error::StepBudget {
                max_steps: cfg.max_steps,
                t: stepper.elapsed(),
                theta: stepper.theta,
            });
        }
        stepper.step(None)?;
        let last = stepper.theta <= cfg.theta_stop;
        if last || stepper.accepted % cfg.record_stride == 0 {
            samples.push(stepper.sample());
        }
    }
    Ok(TrajectoryRecord {
        samples,
        theta0,
        t_final: stepper.elapsed(),
        time_of_motion: stepper.t + (stepper.theta - stepper.t_lo),
        max_stage_control: stepper.max_stage_control,
        accepted_steps: stepper.accepted,
        rejected_steps: stepper.rejected,
    })
}

/// States at the requested times, each hit exactly by clipping the step.
/// Times must be nondecreasing and below `Theta(x0)`.
pub fn states_at(
    spec: &ControllerSpec,
    x0: &[f64],
    times: &[f64],
    cfg: &SimulationConfig,
) -> Result<Vec<Sample>> {
    let mut stepper = Stepper::new(spec, x0, cfg)?;
    let theta0 = stepper.theta;
    let mut out = Vec::with_capacity(times.len());
    for &target in times {
        if !(target >= stepper.elapsed() && target < theta0) {
            return Err(Error::Domain { t: target, theta0 });
        }
        while stepper.elapsed() < target {
            if stepper.accepted >= cfg.max_steps {
                return Err(Error::StepBudget {
                    max_steps: cfg.max_steps,
                    t: stepper.elapsed(),
                    theta: stepper.theta,
                });
            }
            stepper.step(Some(target))?;
        }
        out.push(stepper.sample());
    }
    Ok(out)
}

/// `max |Theta(x(t)) - (Theta0 - t)|` over all samples, with `Theta`
/// re-solved from scratch at every sample.
pub fn verify_theta_decay(record: &TrajectoryRecord, spec: &ControllerSpec) -> Result<f64> {
    verify_theta_decay_until(record, spec, f64::INFINITY)
}

/// As [`verify_theta_decay`], restricted to samples with `t <= t_max`.
pub fn verify_theta_decay_until(
    record: &TrajectoryRecord,
    spec: &ControllerSpec,
    t_max: f64,
) -> Result<f64> {
    let mut worst = 0.0_f64;
    for s in record.samples.iter().filter(|s| s.t <= t_max) {
        let th = solve_theta(spec, &s.x)?.theta;
        worst = worst.max((th - (record.theta0 - s.t)).abs());
    }
    Ok(worst)
}

/// `max |u| - d` over the samples, with `u` recomputed from each state;
/// `-d` for an empty record.
pub fn verify_control_bound(record: &TrajectoryRecord, spec: &ControllerSpec) -> Result<f64> {
    let mut worst = 0.0_f64;
    for s in &record.samples {
        let th = solve_theta(spec, &s.x)?.theta;
        worst = worst.max(control_at(spec, &s.x, th).abs());
    }
    Ok(worst - spec.d_f64())
}

/// Writes `t,x1,...,xn,theta,u` rows with 17 significant digits.
pub fn write_csv<W: Write>(record: &TrajectoryRecord, n: usize, out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    let mut header = vec!["t".to_string()];
    header.extend((1..=n).map(|i| format!("x{i}")));
    header.push("theta".into());
    header.push("u".into());
    writer.write_record(&header)?;
    let fmt = |v: f64| format!("{v:.16e}");
    for s in &record.samples {
        let mut row = vec![fmt(s.t)];
        row.extend(s.x.iter().map(|v| fmt(*v)));
        row.push(fmt(s.theta));
        row.push(fmt(s.u));
        writer.write_record(&row)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn save_csv(record: &TrajectoryRecord, n: usize, path: impl AsRef<Path>) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_csv(record, n, std::io::BufWriter::new(file))
}
