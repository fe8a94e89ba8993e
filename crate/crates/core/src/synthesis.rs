//! Construction of the feedback data `(a, F, a0)` for the canonical chain of
//! integrators `x1' = u, x(i+1)' = x(i)`, all in exact arithmetic.
//!
//! The gain vector and the Hankel matrix `C` come from a singular linear
//! system whose one-dimensional solution family is parameterised by the last
//! gain `a_n`; a second free factor `c_scale` scales `C`. `F` is then
//! `D^{-1} C^{-1} D^{-1}` with `D = diag((-1)^{i-1}/(i-1)!)`.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::controller::{self, ControllerSpec, Provenance};
use crate::error::{Error, Result};
use crate::exact::{self, factorial, int, RatMatrix, Rational};

/// User choices for a synthesis run. `None` selects the documented default.
#[derive(Debug, Clone)]
pub struct SynthesisParams {
    pub n: usize,
    pub d: Rational,
    pub a_n: Option<Rational>,
    pub c_scale: Option<Rational>,
    pub a0: Option<Rational>,
}

impl SynthesisParams {
    pub fn new(n: usize, d: Rational) -> Self {
        Self {
            n,
            d,
            a_n: None,
            c_scale: None,
            a0: None,
        }
    }

    pub fn with_a_n(mut self, a_n: Rational) -> Self {
        self.a_n = Some(a_n);
        self
    }

    pub fn with_c_scale(mut self, c: Rational) -> Self {
        self.c_scale = Some(c);
        self
    }

    pub fn with_a0(mut self, a0: Rational) -> Self {
        self.a0 = Some(a0);
        self
    }
}

/// Solution of the reduced `(n-1)x(n-1)` system together with the
/// column-replacement determinants that express it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReducedSolution {
    /// `det` of the reduced matrix.
    pub delta: Rational,
    /// Determinants with column `j` replaced by the `a_n` direction.
    pub delta_p: Vec<Rational>,
    /// Determinants with column `j` replaced by the constant part.
    pub delta_pp: Vec<Rational>,
    /// Normalised corner value `c0 / ((2n-1) 2n c_scale)`.
    pub c0_ratio: Rational,
    /// Scaled interior gains for indices `2..n-1` (empty when `n = 2`).
    pub a_tilde: Vec<Rational>,
}

/// A named admissibility condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Condition {
    Dimension,
    PositiveBound,
    PositiveScale,
    /// Normalised `C11` strictly above `max{xi0, (1/2 + 1/(2n)) xi0 + 1/4 - 1/(4n)}`.
    CornerThreshold,
    CPositiveDefinite,
    C1PositiveDefinite,
    FPositiveDefinite,
    SlopePositiveDefinite,
    RankP,
    LyapunovIdentity,
    A0Range,
    ControlBound,
}

impl Condition {
    pub fn name(self) -> &'static str {
        match self {
            Condition::Dimension => "dimension",
            Condition::PositiveBound => "positive-bound",
            Condition::PositiveScale => "positive-scale",
            Condition::CornerThreshold => "corner-threshold",
            Condition::CPositiveDefinite => "C-positive-definite",
            Condition::C1PositiveDefinite => "C1-positive-definite",
            Condition::FPositiveDefinite => "F-positive-definite",
            Condition::SlopePositiveDefinite => "slope-positive-definite",
            Condition::RankP => "rank-P",
            Condition::LyapunovIdentity => "lyapunov-identity",
            Condition::A0Range => "a0-range",
            Condition::ControlBound => "control-bound",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Condition::Dimension => "n >= 2",
            Condition::PositiveBound => "d > 0",
            Condition::PositiveScale => "c_scale > 0",
            Condition::CornerThreshold => {
                "C11/((2n-1)2n c_scale) > max{xi0, (1/2+1/(2n)) xi0 + 1/4 - 1/(4n)}"
            }
            Condition::CPositiveDefinite => "C positive definite",
            Condition::C1PositiveDefinite => "C - HC - CH positive definite",
            Condition::FPositiveDefinite => "F positive definite",
            Condition::SlopePositiveDefinite => "F - FH - HF positive definite",
            Condition::RankP => "det P = 0 and rank P = n - 1",
            Condition::LyapunovIdentity => "F M + M* F = 0 with M = A0 + b0 a* + I/2 - H",
            Condition::A0Range => "0 < a0 <= d^2 / (2 (F^-1 a, a))",
            Condition::ControlBound => "sqrt(2 a0 (F^-1 a, a)) <= d",
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.name(), self.description())
    }
}

/// Outcome of every admissibility check with its numeric margin. For
/// `n < 2` only [`Condition::Dimension`] is evaluated and the numeric fields
/// are zero.
#[derive(Debug, Clone)]
pub struct ValidityReport {
    pub n: usize,
    pub xi0: Rational,
    /// Normalised corner `C11 / ((2n-1) 2n c_scale)`.
    pub first_c_entry: Rational,
    pub threshold: Rational,
    pub resolved_a_n: Rational,
    pub resolved_c_scale: Rational,
    pub a_n_defaulted: bool,
    pub c_pd: bool,
    pub c1_pd: bool,
    pub f_pd: bool,
    pub fhf_pd: bool,
    pub rank_p: usize,
    pub det_p_zero: bool,
    /// Max-abs entry of the exact Lyapunov residual.
    pub lyapunov_exact: Rational,
    /// Same residual recomputed in double precision from the rounded `F`
    /// and `a`, relative to `max|F| * max|M|`.
    pub lyapunov_residual: f64,
    pub a0: Rational,
    pub a0_max: Rational,
    pub control_sup: f64,
    pub failures: Vec<Condition>,
}

impl ValidityReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn failed(&self, condition: Condition) -> bool {
        self.failures.contains(&condition)
    }

    /// Corner margin over the threshold.
    pub fn margin(&self) -> Rational {
        &self.first_c_entry - &self.threshold
    }
}

/// `(A0, b0)` of the canonical system: ones on the subdiagonal, `b0 = e1`.
pub fn build_canonical_pair(n: usize) -> Result<(RatMatrix, Vec<Rational>)> {
    check_dimension(n)?;
    let a0 = RatMatrix::from_fn(n, n, |i, j| {
        if j + 1 == i {
            Rational::one()
        } else {
            Rational::zero()
        }
    });
    let mut b0 = vec![Rational::zero(); n];
    b0[0] = Rational::one();
    Ok((a0, b0))
}

/// `[b, A b, ..., A^{n-1} b]`.
pub fn controllability_matrix(a: &RatMatrix, b: &[Rational]) -> RatMatrix {
    let n = b.len();
    let mut columns = Vec::with_capacity(n);
    let mut v = b.to_vec();
    for _ in 0..n {
        columns.push(v.clone());
        v = a.mul_vec(&v);
    }
    RatMatrix::from_fn(n, n, |i, j| columns[j][i].clone())
}

/// `(1/(i+j+k-2))_{i,j=1..s}`; `k = 1` is the Hilbert matrix.
pub fn hilbert_like_matrix(s: usize, k: usize) -> RatMatrix {
    assert!(s >= 1 && k >= 1, "size and offset must be positive");
    RatMatrix::from_fn(s, s, |i, j| exact::ratio(1, (i + j + k) as i64))
}

/// `(1/((i+j+k-2)(i+j+k-1)))_{i,j=1..s}`, the difference of two consecutive
/// shifted Hilbert matrices.
pub fn hilbert_like_product_matrix(s: usize, k: usize) -> RatMatrix {
    assert!(s >= 1 && k >= 1, "size and offset must be positive");
    RatMatrix::from_fn(s, s, |i, j| {
        let m = (i + j + k) as i64;
        exact::ratio(1, m * (m + 1))
    })
}

/// `1/((I+J-1)(I+J))` for one-based `(I, J)`; zero-based arguments here.
fn hankel_weight(i: usize, j: usize) -> Rational {
    let s = (i + j + 2) as i64;
    exact::ratio(1, (s - 1) * s)
}

/// `a1 = -n(n+1)/2`, forced by the trace condition.
pub fn first_gain(n: usize) -> Rational {
    let n = n as i64;
    exact::ratio(-n * (n + 1), 2)
}

/// The coefficient matrix of the linear system for
/// `(c0/((2n-1)2n c), a~2, ..., a~n)`.
pub fn build_p(n: usize) -> Result<RatMatrix> {
    check_dimension(n)?;
    let a1 = first_gain(n);
    Ok(RatMatrix::from_fn(n, n, |i, j| match (i, j) {
        (0, 0) => Rational::one() + &a1,
        (1, 0) => -Rational::one(),
        (_, 0) => Rational::zero(),
        _ => hankel_weight(i, j),
    }))
}

/// Right-hand side of the full system.
pub fn build_y0(n: usize) -> Result<Vec<Rational>> {
    check_dimension(n)?;
    let a1 = first_gain(n);
    Ok((1..=n as i64)
        .map(|i| match i {
            1 => Rational::zero(),
            2 => -(int(3) + &a1) / int(6),
            _ => -&a1 / int(i * (i + 1)),
        })
        .collect())
}

/// Rows `2..n`, columns `1..n-1` of `P`.
pub fn reduced_matrix(n: usize) -> Result<RatMatrix> {
    Ok(build_p(n)?.block(1, 0, n - 1, n - 1))
}

/// `(d', d'')`: the constant terms of the reduced system split into the
/// part multiplying `a~n` and the rest.
pub fn reduced_rhs(n: usize) -> Result<(Vec<Rational>, Vec<Rational>)> {
    let p = build_p(n)?;
    let y0 = build_y0(n)?;
    let d_prime = (1..n).map(|i| -&p[(i, n - 1)]).collect();
    let d_second = y0[1..].to_vec();
    Ok((d_prime, d_second))
}

/// `(-1)^{i-1}/(i-1)!` for one-based `i`.
pub fn d_entry(i: usize) -> Rational {
    let sign = if (i - 1).is_multiple_of(2) { 1 } else { -1 };
    Rational::new(BigInt::from(sign), factorial(i - 1))
}

pub fn d_matrix(n: usize) -> RatMatrix {
    RatMatrix::diagonal((1..=n).map(d_entry).collect())
}

/// Scaled last gain `a~n = (-1)^{n-1} a_n / (n-1)!`.
pub fn scaled_last_gain(n: usize, a_n: &Rational) -> Rational {
    d_entry(n) * a_n
}

pub fn solve_reduced_system(n: usize, a_n: &Rational) -> Result<ReducedSolution> {
    let reduced = reduced_matrix(n)?;
    let (d_prime, d_second) = reduced_rhs(n)?;
    let delta = reduced.determinant();
    if delta.is_zero() {
        return Err(Error::Consistency(format!(
            "reduced matrix is singular for n = {n}"
        )));
    }
    let sols = reduced
        .solve_many(&[d_prime.clone(), d_second.clone()])
        .ok_or_else(|| Error::Consistency("elimination hit a zero pivot".into()))?;
    // Cramer: the replaced determinant equals delta times the solution entry.
    let delta_p: Vec<Rational> = sols[0].iter().map(|v| v * &delta).collect();
    let delta_pp: Vec<Rational> = sols[1].iter().map(|v| v * &delta).collect();

    let a_tilde_n = scaled_last_gain(n, a_n);
    let y: Vec<Rational> = sols[0]
        .iter()
        .zip(&sols[1])
        .map(|(p, q)| p * &a_tilde_n + q)
        .collect();

    let check_rhs: Vec<Rational> = d_prime
        .iter()
        .zip(&d_second)
        .map(|(p, q)| p * &a_tilde_n + q)
        .collect();
    if reduced.mul_vec(&y) != check_rhs {
        return Err(Error::Consistency(
            "reduced solution does not satisfy the system".into(),
        ));
    }

    // The dropped first equation must hold as well (rank P = rank [P, y0]).
    let mut full = y.clone();
    full.push(a_tilde_n);
    let p = build_p(n)?;
    if p.mul_vec(&full) != build_y0(n)? {
        return Err(Error::Consistency(format!(
            "full system is inconsistent for n = {n}"
        )));
    }

    Ok(ReducedSolution {
        delta,
        delta_p,
        delta_pp,
        c0_ratio: y[0].clone(),
        a_tilde: y[1..].to_vec(),
    })
}

/// `(2n-1) 2n`.
pub fn hankel_factor(n: usize) -> Rational {
    let n = n as i64;
    int((2 * n - 1) * 2 * n)
}

/// Normalised corner `(1/Delta)(Delta'_1 a~n + Delta''_1)`; affine in `a_n`.
pub fn normalized_c11(n: usize, a_n: &Rational) -> Result<Rational> {
    Ok(solve_reduced_system(n, a_n)?.c0_ratio)
}

/// The Hankel matrix with every non-corner entry `(2n-1)2n c / ((i+j-1)(i+j))`.
pub fn build_c(n: usize, a_n: &Rational, c_scale: &Rational) -> Result<RatMatrix> {
    let corner = normalized_c11(n, a_n)?;
    Ok(hankel_with_corner(n, &corner).scale(&(hankel_factor(n) * c_scale)))
}

/// Unscaled Hankel pattern with `corner` in position `(1, 1)`.
pub fn hankel_with_corner(n: usize, corner: &Rational) -> RatMatrix {
    RatMatrix::from_fn(n, n, |i, j| {
        if i == 0 && j == 0 {
            corner.clone()
        } else {
            hankel_weight(i, j)
        }
    })
}

pub fn build_gain_vector(n: usize, a_n: &Rational) -> Result<Vec<Rational>> {
    let sol = solve_reduced_system(n, a_n)?;
    let mut a = Vec::with_capacity(n);
    a.push(first_gain(n));
    for (offset, at) in sol.a_tilde.iter().enumerate() {
        let j = offset + 2;
        a.push(at / d_entry(j));
    }
    a.push(a_n.clone());
    Ok(a)
}

/// Root of `det C~(xi) = 0`, using that the determinant is affine in the
/// corner entry.
pub fn compute_xi0(n: usize) -> Result<Rational> {
    check_dimension(n)?;
    let at_zero = hankel_with_corner(n, &Rational::zero()).determinant();
    let at_one = hankel_with_corner(n, &Rational::one()).determinant();
    let slope = at_one - &at_zero;
    if slope.is_zero() {
        return Err(Error::Consistency(format!(
            "corner determinant is constant for n = {n}"
        )));
    }
    Ok(-at_zero / slope)
}

/// `max{xi0, (1/2 + 1/(2n)) xi0 + 1/4 - 1/(4n)}`.
pub fn corner_threshold(n: usize, xi0: &Rational) -> Rational {
    let n = n as i64;
    let second = (exact::ratio(1, 2) + exact::ratio(1, 2 * n)) * xi0 + exact::ratio(1, 4)
        - exact::ratio(1, 4 * n);
    if &second > xi0 {
        second
    } else {
        xi0.clone()
    }
}

/// `a_n` placing the normalised corner at twice the threshold.
pub fn default_a_n(n: usize) -> Result<Rational> {
    let xi0 = compute_xi0(n)?;
    let target = int(2) * corner_threshold(n, &xi0);
    let at_zero = normalized_c11(n, &Rational::zero())?;
    let slope = normalized_c11(n, &Rational::one())? - &at_zero;
    if slope.is_zero() {
        return Err(Error::Construction(format!(
            "corner entry does not depend on a_n for n = {n}"
        )));
    }
    Ok((target - at_zero) / slope)
}

/// `(F, F^{-1})` with `F^{-1} = D C D`.
pub fn compute_f(n: usize, c: &RatMatrix) -> Result<(RatMatrix, RatMatrix)> {
    check_dimension(n)?;
    let d = d_matrix(n);
    let f_inv = d.mul(c).mul(&d);
    let c_inv = c
        .inverse()
        .ok_or_else(|| Error::Construction("C is singular".into()))?;
    let d_inv = RatMatrix::diagonal((1..=n).map(|i| d_entry(i).recip()).collect());
    let f = d_inv.mul(&c_inv).mul(&d_inv);
    if f.mul(&f_inv) != RatMatrix::identity(n) {
        return Err(Error::Consistency("F F^-1 != I".into()));
    }
    Ok((f, f_inv))
}

/// `d^2 / (2 (F^{-1} a, a))`.
pub fn max_a0(f_inv: &RatMatrix, a: &[Rational], d: &Rational) -> Result<Rational> {
    let energy = f_inv.quadratic_form(a);
    if !energy.is_positive() {
        return Err(Error::Consistency(format!(
            "(F^-1 a, a) = {energy} is not positive"
        )));
    }
    Ok(d * d / (int(2) * energy))
}

/// `M = A0 + b0 a* + I/2 - H`.
pub fn lyapunov_operator(a: &[Rational]) -> RatMatrix {
    let n = a.len();
    let h = controller::h_diagonal(n);
    let mut m = controller::closed_loop_matrix(a);
    for (i, hi) in h.iter().enumerate() {
        m[(i, i)] += exact::ratio(1, 2) - hi;
    }
    m
}

/// `F M + M* F`.
pub fn lyapunov_residual_matrix(f: &RatMatrix, a: &[Rational]) -> RatMatrix {
    let m = lyapunov_operator(a);
    f.mul(&m).add(&m.transpose().mul(f))
}

/// Max-abs entry of the exact residual matrix for a built spec.
pub fn lyapunov_residual_exact(spec: &ControllerSpec) -> Rational {
    lyapunov_residual_matrix(spec.f(), spec.gains()).max_abs()
}

/// Floating-point residual computed from the rounded `F` and `a`, relative to
/// `max|F| * max|M|`.
pub fn lyapunov_residual(spec: &ControllerSpec) -> f64 {
    lyapunov_residual_f64(spec.f(), spec.gains())
}

fn lyapunov_residual_f64(f: &RatMatrix, a: &[Rational]) -> f64 {
    let n = a.len();
    let f = f.to_f64_rows();
    let m = lyapunov_operator(a).to_f64_rows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            let mut r = 0.0;
            for k in 0..n {
                r += f[i][k] * m[k][j] + m[k][i] * f[k][j];
            }
            worst = worst.max(r.abs());
        }
    }
    let fmax = f.iter().flatten().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let mmax = m.iter().flatten().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    if fmax == 0.0 || mmax == 0.0 {
        worst
    } else {
        worst / (fmax * mmax)
    }
}

/// Exact intermediate data of one synthesis run, before validation.
#[derive(Debug, Clone)]
pub struct Construction {
    pub n: usize,
    pub d: Rational,
    pub a_n: Rational,
    pub a_n_defaulted: bool,
    pub c_scale: Rational,
    pub xi0: Rational,
    pub threshold: Rational,
    pub reduced: ReducedSolution,
    pub a: Vec<Rational>,
    pub c: RatMatrix,
    /// `None` when `C` is singular.
    pub f: Option<(RatMatrix, RatMatrix)>,
}

pub fn construct(params: &SynthesisParams) -> Result<Construction> {
    let n = params.n;
    check_dimension(n)?;
    let (a_n, a_n_defaulted) = match &params.a_n {
        Some(v) => (v.clone(), false),
        None => (default_a_n(n)?, true),
    };
    let c_scale = params.c_scale.clone().unwrap_or_else(Rational::one);
    let xi0 = compute_xi0(n)?;
    let threshold = corner_threshold(n, &xi0);
    let reduced = solve_reduced_system(n, &a_n)?;
    let a = build_gain_vector(n, &a_n)?;
    let c = build_c(n, &a_n, &c_scale)?;
    let f = compute_f(n, &c).ok();
    Ok(Construction {
        n,
        d: params.d.clone(),
        a_n,
        a_n_defaulted,
        c_scale,
        xi0,
        threshold,
        reduced,
        a,
        c,
        f,
    })
}

/// Evaluates every admissibility condition. Never fails: problems are
/// reported through `failures`.
pub fn validate_parameters(params: &SynthesisParams) -> ValidityReport {
    let mut report = ValidityReport {
        n: params.n,
        xi0: Rational::zero(),
        first_c_entry: Rational::zero(),
        threshold: Rational::zero(),
        resolved_a_n: params.a_n.clone().unwrap_or_else(Rational::zero),
        resolved_c_scale: params.c_scale.clone().unwrap_or_else(Rational::one),
        a_n_defaulted: params.a_n.is_none(),
        c_pd: false,
        c1_pd: false,
        f_pd: false,
        fhf_pd: false,
        rank_p: 0,
        det_p_zero: false,
        lyapunov_exact: Rational::zero(),
        lyapunov_residual: 0.0,
        a0: params.a0.clone().unwrap_or_else(Rational::zero),
        a0_max: Rational::zero(),
        control_sup: 0.0,
        failures: Vec::new(),
    };
    if params.n < 2 {
        report.failures.push(Condition::Dimension);
        return report;
    }
    if !params.d.is_positive() {
        report.failures.push(Condition::PositiveBound);
    }
    if let Some(c) = &params.c_scale {
        if !c.is_positive() {
            report.failures.push(Condition::PositiveScale);
        }
    }

    let built = match construct(params) {
        Ok(b) => b,
        Err(_) => {
            // Only reachable through a broken internal identity.
            report.failures.push(Condition::RankP);
            return report;
        }
    };
    let n = built.n;
    report.xi0 = built.xi0.clone();
    report.threshold = built.threshold.clone();
    report.first_c_entry = built.reduced.c0_ratio.clone();
    report.resolved_a_n = built.a_n.clone();
    report.resolved_c_scale = built.c_scale.clone();
    report.a_n_defaulted = built.a_n_defaulted;
    if report.first_c_entry <= report.threshold {
        report.failures.push(Condition::CornerThreshold);
    }

    let p = build_p(n).expect("dimension checked");
    report.rank_p = p.rank();
    report.det_p_zero = p.determinant().is_zero();
    if report.rank_p != n - 1 || !report.det_p_zero {
        report.failures.push(Condition::RankP);
    }

    report.c_pd = built.c.is_positive_definite();
    if !report.c_pd {
        report.failures.push(Condition::CPositiveDefinite);
    }
    report.c1_pd = controller::slope_form(&built.c).is_positive_definite();
    if !report.c1_pd {
        report.failures.push(Condition::C1PositiveDefinite);
    }

    if let Some((f, f_inv)) = &built.f {
        report.f_pd = f.is_positive_definite();
        report.fhf_pd = controller::slope_form(f).is_positive_definite();
        report.lyapunov_exact = lyapunov_residual_matrix(f, &built.a).max_abs();
        report.lyapunov_residual = lyapunov_residual_f64(f, &built.a);
        if report.f_pd && params.d.is_positive() {
            if let Ok(max) = max_a0(f_inv, &built.a, &params.d) {
                report.a0_max = max;
            }
        }
        let a0 = params.a0.clone().unwrap_or_else(|| report.a0_max.clone());
        report.a0 = a0.clone();
        if !a0.is_positive() || a0 > report.a0_max {
            report.failures.push(Condition::A0Range);
        }
        let sup_sq = int(2) * &a0 * f_inv.quadratic_form(&built.a);
        report.control_sup = exact::to_f64(&sup_sq).max(0.0).sqrt();
        if sup_sq > &params.d * &params.d {
            report.failures.push(Condition::ControlBound);
        }
    }
    if !report.f_pd {
        report.failures.push(Condition::FPositiveDefinite);
    }
    if !report.fhf_pd {
        report.failures.push(Condition::SlopePositiveDefinite);
    }
    if !report.lyapunov_exact.is_zero() {
        report.failures.push(Condition::LyapunovIdentity);
    }
    report
}

/// Validated synthesis: returns the frozen controller and the report, or an
/// error naming every failed condition.
pub fn synthesize(params: &SynthesisParams) -> Result<(ControllerSpec, ValidityReport)> {
    let report = validate_parameters(params);
    if !report.passed() {
        let names: Vec<String> = report.failures.iter().map(ToString::to_string).collect();
        return Err(Error::InvalidParameter(format!(
            "violated condition(s): {}",
            names.join("; ")
        )));
    }
    let built = construct(params)?;
    let (f, f_inv) = built
        .f
        .ok_or_else(|| Error::Construction("C is singular".into()))?;
    let spec = ControllerSpec::from_parts(
        built.d,
        report.a0.clone(),
        built.a,
        f,
        f_inv,
        built.c,
        Provenance {
            a_n: built.a_n,
            c_scale: built.c_scale,
            xi0: built.xi0,
            threshold: built.threshold,
        },
    )?;
    Ok((spec, report))
}

fn check_dimension(n: usize) -> Result<()> {
    if n < 2 {
        Err(Error::Dimension(n))
    } else {
        Ok(())
    }
}
