//! Command-line front end. `run` is the whole program minus process exit,
//! so it can be driven from tests with in-memory writers.
//!
//! Exit codes: 0 ok, 1 invariant failure, 2 bad input, 3 runtime failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde_json::{json, Value};

use crate::controller::ControllerSpec;
use crate::error::Error;
use crate::exact::{self, Rational};
use crate::oracle3;
use crate::simulate::{self, SimulationConfig};
use crate::synthesis::{self, SynthesisParams, ValidityReport};
use crate::theta;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVARIANT: i32 = 1;
pub const EXIT_BAD_INPUT: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

/// Radii of the spheres that `verify` samples from, cycled in order.
pub const SAMPLE_RADII: [f64; 3] = [1e-3, 1.0, 1e3];
pub const DILATION_FACTORS: [f64; 4] = [0.1, 0.5, 2.0, 10.0];

#[derive(Debug, Parser)]
#[command(
    name = "chainsynth",
    version,
    about = "Bounded finite-time feedback for chains of integrators"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a controller and print its validity report.
    Synthesize {
        #[arg(long)]
        n: usize,
        /// Control bound, as `p/q` or a decimal.
        #[arg(long, value_parser = parse_rational_arg, allow_hyphen_values = true)]
        d: Rational,
        /// Last gain a_n (defaults to twice the corner threshold).
        #[arg(long = "a-n", value_parser = parse_rational_arg, allow_hyphen_values = true)]
        a_n: Option<Rational>,
        /// Hankel scale (default 1).
        #[arg(long, value_parser = parse_rational_arg, allow_hyphen_values = true)]
        c: Option<Rational>,
        /// Scalar a0 (default: the largest admissible value).
        #[arg(long, value_parser = parse_rational_arg, allow_hyphen_values = true)]
        a0: Option<Rational>,
        /// Spec file to write; without it the spec is printed with the report.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate Theta and the feedback at one state.
    Theta {
        #[arg(long)]
        spec: PathBuf,
        /// Comma-separated state components.
        #[arg(long, allow_hyphen_values = true)]
        x: String,
    },
    /// Integrate the closed loop and write the trajectory as CSV.
    Simulate {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        x0: String,
        #[arg(long, default_value_t = SimulationConfig::default().rtol)]
        rtol: f64,
        #[arg(long, default_value_t = SimulationConfig::default().atol)]
        atol: f64,
        #[arg(long = "theta-stop", default_value_t = SimulationConfig::default().theta_stop)]
        theta_stop: f64,
        #[arg(long = "max-steps", default_value_t = SimulationConfig::default().max_steps)]
        max_steps: usize,
        #[arg(long = "record-stride", default_value_t = 1)]
        record_stride: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check the controller invariants on random states.
    Verify {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print the exact corner root for dimension n.
    Xi0 {
        #[arg(long)]
        n: usize,
    },
}

fn parse_rational_arg(text: &str) -> Result<Rational, String> {
    exact::parse_rational(text).ok_or_else(|| format!("{text:?} is not a rational number"))
}

/// Parses comma-separated decimals.
pub fn parse_state(text: &str) -> Result<Vec<f64>, String> {
    text.split(',')
        .map(|part| {
            let part = part.trim();
            part.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("{part:?} is not a finite number"))
        })
        .collect()
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Dimension(_)
        | Error::StateDimension { .. }
        | Error::NonFiniteState { .. }
        | Error::InvalidParameter(_)
        | Error::SpecFormat(_)
        | Error::Json(_) => EXIT_BAD_INPUT,
        _ => EXIT_RUNTIME,
    }
}

fn rational_string(value: &Rational) -> String {
    format!("{}/{}", value.numer(), value.denom())
}

pub fn report_json(report: &ValidityReport) -> Value {
    let q = rational_string;
    json!({
        "passed": report.passed(),
        "n": report.n,
        "xi0": q(&report.xi0),
        "threshold": q(&report.threshold),
        "first_c_entry": q(&report.first_c_entry),
        "margin": q(&report.margin()),
        "a_n": q(&report.resolved_a_n),
        "a_n_defaulted": report.a_n_defaulted,
        "c_scale": q(&report.resolved_c_scale),
        "c_positive_definite": report.c_pd,
        "c1_positive_definite": report.c1_pd,
        "f_positive_definite": report.f_pd,
        "slope_positive_definite": report.fhf_pd,
        "rank_p": report.rank_p,
        "det_p_zero": report.det_p_zero,
        "lyapunov_exact_max": q(&report.lyapunov_exact),
        "lyapunov_residual": report.lyapunov_residual,
        "a0": q(&report.a0),
        "a0_max": q(&report.a0_max),
        "control_sup": report.control_sup,
        "failures": report.failures.iter().map(|c| json!({
            "name": c.name(),
            "description": c.description(),
        })).collect::<Vec<_>>(),
    })
}

fn load_spec(path: &Path) -> Result<ControllerSpec, (i32, String)> {
    ControllerSpec::load(path).map_err(|e| {
        (
            EXIT_BAD_INPUT,
            format!("cannot load spec {}: {e}", path.display()),
        )
    })
}

fn runtime(err: Error) -> (i32, String) {
    (exit_code(&err), err.to_string())
}

fn print_json(out: &mut dyn Write, value: &Value) -> Result<(), (i32, String)> {
    let text = serde_json::to_string_pretty(value).expect("json value serializes");
    writeln!(out, "{text}").map_err(|e| (EXIT_RUNTIME, e.to_string()))
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_BAD_INPUT
            } else {
                EXIT_OK
            };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{text}")
            } else {
                write!(out, "{text}")
            };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err((code, message)) => {
            let _ = writeln!(err, "error: {message}");
            code
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<(), (i32, String)> {
    match command {
        Command::Synthesize {
            n,
            d,
            a_n,
            c,
            a0,
            out: path,
        } => {
            let mut params = SynthesisParams::new(n, d);
            params.a_n = a_n;
            params.c_scale = c;
            params.a0 = a0;
            cmd_synthesize(&params, path.as_deref(), out)
        }
        Command::Theta { spec, x } => {
            let spec = load_spec(&spec)?;
            let x = parse_state(&x).map_err(|m| (EXIT_BAD_INPUT, m))?;
            cmd_theta(&spec, &x, out)
        }
        Command::Simulate {
            spec,
            x0,
            rtol,
            atol,
            theta_stop,
            max_steps,
            record_stride,
            out: path,
        } => {
            let spec = load_spec(&spec)?;
            let x0 = parse_state(&x0).map_err(|m| (EXIT_BAD_INPUT, m))?;
            let cfg = SimulationConfig {
                rtol,
                atol,
                theta_stop,
                max_steps,
                record_stride,
            };
            cmd_simulate(&spec, &x0, &cfg, &path, out)
        }
        Command::Verify {
            spec,
            samples,
            seed,
        } => {
            let spec = load_spec(&spec)?;
            if samples == 0 {
                return Err((EXIT_BAD_INPUT, "--samples must be at least 1".into()));
            }
            cmd_verify(&spec, samples, seed, out)
        }
        Command::Xi0 { n } => {
            let xi0 = synthesis::compute_xi0(n).map_err(runtime)?;
            writeln!(out, "{}", rational_string(&xi0)).map_err(|e| (EXIT_RUNTIME, e.to_string()))
        }
    }
}

fn cmd_synthesize(
    params: &SynthesisParams,
    path: Option<&Path>,
    out: &mut dyn Write,
) -> Result<(), (i32, String)> {
    let report = synthesis::validate_parameters(params);
    if !report.passed() {
        print_json(out, &json!({ "report": report_json(&report) }))?;
        let names: Vec<String> = report
            .failures
            .iter()
            .map(|c| format!("condition {} violated ({})", c.name(), c.description()))
            .collect();
        return Err((EXIT_BAD_INPUT, names.join("; ")));
    }
    let (spec, report) = synthesis::synthesize(params).map_err(runtime)?;
    match path {
        Some(path) => {
            spec.save(path).map_err(runtime)?;
            print_json(
                out,
                &json!({ "report": report_json(&report), "spec_path": path.display().to_string() }),
            )
        }
        None => {
            let doc = serde_json::to_value(spec.to_json()).expect("spec serializes");
            print_json(out, &json!({ "report": report_json(&report), "spec": doc }))
        }
    }
}

fn cmd_theta(spec: &ControllerSpec, x: &[f64], out: &mut dyn Write) -> Result<(), (i32, String)> {
    let value = theta::solve_theta(spec, x).map_err(runtime)?;
    let u = theta::control_at(spec, x, value.theta);
    print_json(
        out,
        &json!({
            "theta": value.theta,
            "u": u,
            "residual": value.residual,
            "iterations": value.iterations,
            "converged": value.converged,
        }),
    )
}

fn cmd_simulate(
    spec: &ControllerSpec,
    x0: &[f64],
    cfg: &SimulationConfig,
    path: &Path,
    out: &mut dyn Write,
) -> Result<(), (i32, String)> {
    let record = simulate::integrate(spec, x0, cfg).map_err(|e| match e {
        Error::StepUnderflow {
            t,
            theta,
            ref state,
        } => (
            EXIT_RUNTIME,
            format!("step size underflow at t = {t}, theta = {theta:e}, state = {state:?}"),
        ),
        other => runtime(other),
    })?;
    simulate::save_csv(&record, spec.n(), path).map_err(runtime)?;
    let decay = simulate::verify_theta_decay(&record, spec).map_err(runtime)?;
    let max_u = record
        .samples
        .iter()
        .map(|s| s.u.abs())
        .fold(0.0_f64, f64::max);
    print_json(
        out,
        &json!({
            "theta0": record.theta0,
            "t_final": record.t_final,
            "time_of_motion": record.time_of_motion,
            "max_abs_u": max_u,
            "max_stage_abs_u": record.max_stage_control,
            "max_theta_decay_deviation": decay,
            "accepted_steps": record.accepted_steps,
            "rejected_steps": record.rejected_steps,
            "samples": record.samples.len(),
            "csv": path.display().to_string(),
        }),
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    /// Worst observed value of the checked quantity. Checks with zero
    /// tolerance are decided in exact arithmetic and report a float view.
    pub worst: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// Set when the check does not apply to this spec.
    pub skipped: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub seed: u64,
    pub samples: usize,
    pub n: usize,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed_names(&self) -> Vec<&'static str> {
        self.checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name)
            .collect()
    }
}

/// Uniform point on the sphere of radius `r` in dimension `n`.
pub fn sample_sphere(rng: &mut impl Rng, n: usize, r: f64) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| r * x / norm).collect();
        }
    }
}

fn check(name: &'static str, worst: f64, tolerance: f64) -> CheckResult {
    CheckResult {
        name,
        worst,
        tolerance,
        passed: worst <= tolerance,
        skipped: false,
    }
}

/// Runs every invariant on `samples` seeded random states.
pub fn run_verify(
    spec: &ControllerSpec,
    samples: usize,
    seed: u64,
) -> crate::error::Result<VerifyReport> {
    let n = spec.n();
    let d = spec.d_f64();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let lyap_exact = synthesis::lyapunov_residual_exact(spec);
    let lyapunov = CheckResult {
        passed: num_traits::Zero::is_zero(&lyap_exact),
        ..check("lyapunov-residual", synthesis::lyapunov_residual(spec), 0.0)
    };
    let sup_sq = exact::int(2) * spec.a0() * spec.gain_energy();
    let sup_ok = sup_sq <= spec.d() * spec.d();
    let sup = CheckResult {
        passed: sup_ok,
        ..check("control-sup", spec.control_sup() - d, 0.0)
    };

    let oracle_applies = n == 3 && is_reference_example(spec);
    let (mut theta_rate, mut bound, mut dil_theta, mut dil_u) =
        (0.0_f64, f64::NEG_INFINITY, 0.0_f64, 0.0_f64);
    let (mut oracle_theta, mut oracle_u) = (0.0_f64, 0.0_f64);
    for k in 0..samples {
        let x = sample_sphere(&mut rng, n, SAMPLE_RADII[k % SAMPLE_RADII.len()]);
        let th = theta::solve_theta(spec, &x)?.theta;
        let u = theta::control_at(spec, &x, th);
        theta_rate = theta_rate.max((theta::theta_directional_derivative(spec, &x)? + 1.0).abs());
        bound = bound.max(u.abs() / d - 1.0);
        for lambda in DILATION_FACTORS {
            let y = theta::dilate(lambda, &x);
            let th_y = theta::solve_theta(spec, &y)?.theta;
            dil_theta = dil_theta.max((th_y - lambda * th).abs() / (lambda * th));
            dil_u = dil_u.max((theta::control_at(spec, &y, th_y) - u).abs() / d);
        }
        if oracle_applies {
            let coeffs = oracle3::ClosedFormCoeffs::from_state(&x)?;
            for frac in [0.0, 0.25, 0.5, 0.75, 0.99] {
                let t = frac * coeffs.theta0;
                let state = coeffs.state(t)?;
                let th_t = theta::solve_theta(spec, &state)?.theta;
                let expected = coeffs.theta0 - t;
                oracle_theta = oracle_theta.max((th_t - expected).abs() / expected);
                oracle_u = oracle_u
                    .max((theta::control_at(spec, &state, th_t) - coeffs.control(t)?).abs());
            }
        }
    }

    let mut checks = vec![
        lyapunov,
        sup,
        check("theta-rate", theta_rate, 1e-10),
        check("control-bound", bound, 1e-9),
        check("dilation-theta", dil_theta, 1e-10),
        check("dilation-control", dil_u, 1e-10),
    ];
    for (name, worst, tol) in [
        ("oracle-theta", oracle_theta, 1e-9),
        ("oracle-control", oracle_u, 1e-6),
    ] {
        checks.push(if oracle_applies {
            check(name, worst, tol)
        } else {
            CheckResult {
                skipped: true,
                ..check(name, 0.0, tol)
            }
        });
    }
    Ok(VerifyReport {
        seed,
        samples,
        n,
        checks,
    })
}

/// True when `spec` carries exactly the reference three-dimensional data,
/// the only controller the closed-form oracle describes.
pub fn is_reference_example(spec: &ControllerSpec) -> bool {
    let example = oracle3::example_controller();
    spec.gains() == example.gains()
        && spec.a0() == example.a0()
        && spec.f() == example.f()
        && spec.d() == example.d()
}

pub fn format_verify_table(report: &VerifyReport) -> String {
    let mut text = format!(
        "verify: n = {}, samples = {}, seed = {}, radii = {:?}\n",
        report.n, report.samples, report.seed, SAMPLE_RADII
    );
    text += &format!(
        "{:<20} {:>12} {:>10}  status\n",
        "check", "worst", "tolerance"
    );
    for c in &report.checks {
        let status = if c.skipped {
            "SKIP"
        } else if c.passed {
            "PASS"
        } else {
            "FAIL"
        };
        let tolerance = if c.tolerance == 0.0 {
            "exact".to_string()
        } else {
            format!("{:.0e}", c.tolerance)
        };
        text += &format!(
            "{:<20} {:>12.3e} {:>10}  {status}\n",
            c.name, c.worst, tolerance
        );
    }
    text
}

fn cmd_verify(
    spec: &ControllerSpec,
    samples: usize,
    seed: u64,
    out: &mut dyn Write,
) -> Result<(), (i32, String)> {
    let report = run_verify(spec, samples, seed).map_err(runtime)?;
    write!(out, "{}", format_verify_table(&report)).map_err(|e| (EXIT_RUNTIME, e.to_string()))?;
    if report.passed() {
        Ok(())
    } else {
        let names = report.failed_names();
        Err((
            EXIT_INVARIANT,
            format!("invariant {} failed", names.join(", ")),
        ))
    }
}
