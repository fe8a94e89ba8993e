//! Exact rational linear algebra for the small dense matrices used during
//! synthesis.
//!
//! Hilbert-type matrices lose every significant digit in double precision
//! long before the dimensions used here get interesting, so everything that
//! feeds the controller construction is carried out over `BigRational`.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub use num_rational::BigRational as Rational;

/// Shorthand for `a / b` as an exact rational.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

pub fn factorial(k: usize) -> BigInt {
    (1..=k).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

/// Parses `p/q`, an integer, or a decimal with optional exponent
/// (`-1.25e-3`) into the exact rational it denotes.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    if let Some((num, den)) = text.split_once('/') {
        let num: BigInt = num.trim().parse().ok()?;
        let den: BigInt = den.trim().parse().ok()?;
        return (!den.is_zero()).then(|| Rational::new(num, den));
    }
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(pos) => (&text[..pos], text[pos + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if whole.is_empty() && frac.is_empty()
        || !whole
            .chars()
            .chain(frac.chars())
            .all(|c| c.is_ascii_digit())
    {
        return None;
    }
    let all: BigInt = format!("0{whole}{frac}").parse().ok()?;
    let scale = exponent.checked_sub(i32::try_from(frac.len()).ok()?)?;
    let ten = BigInt::from(10);
    let magnitude = if scale >= 0 {
        Rational::from_integer(all * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(all, num_traits::pow(ten, scale.unsigned_abs() as usize))
    };
    Some(if negative { -magnitude } else { magnitude })
}

/// Nearest double to an exact rational.
///
/// `Rational::to_f64` goes through the numerator and denominator separately
/// and overflows to infinity once either exceeds the f64 range, so large
/// operands are shifted down first.
pub fn to_f64(value: &Rational) -> f64 {
    if value.is_zero() {
        return 0.0;
    }
    let num = value.numer();
    let den = value.denom();
    let num_bits = num.bits() as i64;
    let den_bits = den.bits() as i64;
    // Scale so the integer quotient carries 64+ significant bits.
    let shift = 64 - (num_bits - den_bits);
    let (scaled_num, scaled_den) = if shift >= 0 {
        (num.abs() << (shift as usize), den.clone())
    } else {
        (num.abs(), den.clone() << ((-shift) as usize))
    };
    let (quotient, remainder) = scaled_num.div_rem(&scaled_den);
    // Sticky bit keeps the final rounding to 53 bits correct.
    let quotient = if remainder.is_zero() {
        quotient << 1usize
    } else {
        (quotient << 1usize) + BigInt::one()
    };
    let mantissa = quotient.to_f64().unwrap_or(f64::INFINITY);
    let exp = -(shift as i32) - 1;
    let magnitude = mantissa * 2f64.powi(exp / 2) * 2f64.powi(exp - exp / 2);
    if num.is_negative() {
        -magnitude
    } else {
        magnitude
    }
}

/// Decimal expansion of `value` with `digits` significant digits, rounded
/// toward zero, in plain or scientific notation.
pub fn to_decimal_string(value: &Rational, digits: usize) -> String {
    if value.is_zero() {
        return "0".to_string();
    }
    let negative = value.is_negative();
    let num = value.numer().abs();
    let den = value.denom().clone();

    // Decimal exponent e with 10^e <= |value| < 10^(e+1).
    let ten = BigInt::from(10);
    let mut exponent: i64 = num.to_string().len() as i64 - den.to_string().len() as i64;
    let pow10 = |k: i64| -> BigInt { num_traits::pow(ten.clone(), k.unsigned_abs() as usize) };
    let at_least = |e: i64| -> bool {
        if e >= 0 {
            num >= &den * pow10(e)
        } else {
            &num * pow10(e) >= den
        }
    };
    while !at_least(exponent) {
        exponent -= 1;
    }
    while at_least(exponent + 1) {
        exponent += 1;
    }

    // Integer holding the leading `digits` digits.
    let shift = digits as i64 - 1 - exponent;
    let scaled = if shift >= 0 {
        (&num * pow10(shift)).div_floor(&den)
    } else {
        num.div_floor(&(&den * pow10(shift)))
    };
    let mantissa = scaled.to_string();
    let trimmed = mantissa.trim_end_matches('0');
    let trimmed = if trimmed.is_empty() { "0" } else { trimmed };

    let body = if (-6..=30).contains(&exponent) {
        if exponent >= 0 {
            let int_len = exponent as usize + 1;
            if trimmed.len() <= int_len {
                format!("{}{}", trimmed, "0".repeat(int_len - trimmed.len()))
            } else {
                format!("{}.{}", &trimmed[..int_len], &trimmed[int_len..])
            }
        } else {
            format!("0.{}{}", "0".repeat((-exponent - 1) as usize), trimmed)
        }
    } else if trimmed.len() == 1 {
        format!("{}e{}", trimmed, exponent)
    } else {
        format!("{}.{}e{}", &trimmed[..1], &trimmed[1..], exponent)
    };
    if negative {
        format!("-{body}")
    } else {
        body
    }
}

/// Dense row-major matrix of exact rationals.
#[derive(Clone, PartialEq, Eq)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal((0..n).map(|_| Rational::one()).collect())
    }

    pub fn diagonal(entries: Vec<Rational>) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, e) in entries.into_iter().enumerate() {
            m[(i, i)] = e;
        }
        m
    }

    /// Builds a matrix from a generator over zero-based indices.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Rational) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        let n = rows.len();
        Self {
            rows: n,
            cols,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<Rational>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square() && (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    pub fn scale(&self, factor: &Rational) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "dimension mismatch in product");
        Self::from_fn(self.rows, other.cols, |i, j| {
            (0..self.cols).fold(Rational::zero(), |acc, k| {
                acc + &self[(i, k)] * &other[(k, j)]
            })
        })
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Vec<Rational> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(Rational::zero(), |acc, (a, b)| acc + a * b)
            })
            .collect()
    }

    /// `(M v, v)`.
    pub fn quadratic_form(&self, v: &[Rational]) -> Rational {
        dot(&self.mul_vec(v), v)
    }

    /// Copy with column `j` replaced by `column`.
    pub fn with_column(&self, j: usize, column: &[Rational]) -> Self {
        assert_eq!(column.len(), self.rows);
        let mut m = self.clone();
        for (i, v) in column.iter().enumerate() {
            m[(i, j)] = v.clone();
        }
        m
    }

    /// Contiguous sub-block `[r0, r0+nr) x [c0, c0+nc)`.
    pub fn block(&self, r0: usize, c0: usize, nr: usize, nc: usize) -> Self {
        Self::from_fn(nr, nc, |i, j| self[(r0 + i, c0 + j)].clone())
    }

    pub fn column(&self, j: usize) -> Vec<Rational> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn max_abs(&self) -> Rational {
        self.data
            .iter()
            .map(Signed::abs)
            .max()
            .unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn to_f64_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(to_f64).collect())
            .collect()
    }

    /// Determinant by Gaussian elimination with exact pivots.
    pub fn determinant(&self) -> Rational {
        assert!(self.is_square(), "determinant of a non-square matrix");
        let n = self.rows;
        let mut a = self.clone();
        let mut det = Rational::one();
        for k in 0..n {
            let Some(p) = (k..n).find(|&i| !a[(i, k)].is_zero()) else {
                return Rational::zero();
            };
            if p != k {
                a.swap_rows(p, k);
                det = -det;
            }
            let pivot = a[(k, k)].clone();
            det *= &pivot;
            for i in k + 1..n {
                if a[(i, k)].is_zero() {
                    continue;
                }
                let factor = &a[(i, k)] / &pivot;
                for j in k..n {
                    let delta = &factor * &a[(k, j)];
                    a[(i, j)] -= delta;
                }
            }
        }
        det
    }

    /// Rank by exact row reduction.
    pub fn rank(&self) -> usize {
        let mut a = self.clone();
        let mut rank = 0;
        for col in 0..self.cols {
            if rank == self.rows {
                break;
            }
            let Some(p) = (rank..self.rows).find(|&i| !a[(i, col)].is_zero()) else {
                continue;
            };
            a.swap_rows(p, rank);
            let pivot = a[(rank, col)].clone();
            for i in rank + 1..self.rows {
                if a[(i, col)].is_zero() {
                    continue;
                }
                let factor = &a[(i, col)] / &pivot;
                for j in col..self.cols {
                    let delta = &factor * &a[(rank, j)];
                    a[(i, j)] -= delta;
                }
            }
            rank += 1;
        }
        rank
    }

    /// Solves `self * X = rhs` for several right-hand sides at once by
    /// Gauss-Jordan elimination. Returns `None` when the matrix is singular.
    pub fn solve_many(&self, rhs: &[Vec<Rational>]) -> Option<Vec<Vec<Rational>>> {
        assert!(self.is_square());
        let n = self.rows;
        let m = rhs.len();
        let mut aug = Self::from_fn(n, n + m, |i, j| {
            if j < n {
                self[(i, j)].clone()
            } else {
                rhs[j - n][i].clone()
            }
        });
        for k in 0..n {
            let p = (k..n).find(|&i| !aug[(i, k)].is_zero())?;
            aug.swap_rows(p, k);
            let pivot = aug[(k, k)].clone();
            for j in k..n + m {
                aug[(k, j)] /= &pivot;
            }
            for i in 0..n {
                if i == k || aug[(i, k)].is_zero() {
                    continue;
                }
                let factor = aug[(i, k)].clone();
                for j in k..n + m {
                    let delta = &factor * &aug[(k, j)];
                    aug[(i, j)] -= delta;
                }
            }
        }
        Some((0..m).map(|c| aug.column(n + c)).collect())
    }

    pub fn solve(&self, rhs: &[Rational]) -> Option<Vec<Rational>> {
        self.solve_many(&[rhs.to_vec()]).map(|mut v| v.remove(0))
    }

    pub fn inverse(&self) -> Option<Self> {
        let n = self.rows;
        let unit: Vec<Vec<Rational>> = (0..n)
            .map(|j| {
                (0..n)
                    .map(|i| {
                        if i == j {
                            Rational::one()
                        } else {
                            Rational::zero()
                        }
                    })
                    .collect()
            })
            .collect();
        let cols = self.solve_many(&unit)?;
        Some(Self::from_fn(n, n, |i, j| cols[j][i].clone()))
    }

    /// Leading principal minors `det(M[..k, ..k])` for `k = 1..=n`, obtained
    /// from the pivots of elimination without row exchanges. Stops early
    /// (returning a shorter list ending in the first non-positive minor)
    /// once positivity fails, since later pivots are then undefined.
    pub fn leading_minors(&self) -> Vec<Rational> {
        assert!(self.is_square());
        let n = self.rows;
        let mut a = self.clone();
        let mut minors = Vec::with_capacity(n);
        let mut running = Rational::one();
        for k in 0..n {
            let pivot = a[(k, k)].clone();
            running *= &pivot;
            minors.push(running.clone());
            if !pivot.is_positive() {
                break;
            }
            for i in k + 1..n {
                if a[(i, k)].is_zero() {
                    continue;
                }
                let factor = &a[(i, k)] / &pivot;
                for j in k..n {
                    let delta = &factor * &a[(k, j)];
                    a[(i, j)] -= delta;
                }
            }
        }
        minors
    }

    /// Sylvester criterion on a symmetric matrix: every leading principal
    /// minor strictly positive.
    pub fn is_positive_definite(&self) -> bool {
        self.is_symmetric()
            && self.leading_minors().len() == self.rows
            && self.leading_minors().iter().all(Signed::is_positive)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }
}

impl Index<(usize, usize)> for RatMatrix {
    type Output = Rational;

    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for RatMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for RatMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<Vec<String>> = (0..self.rows)
            .map(|i| self.row(i).iter().map(ToString::to_string).collect())
            .collect();
        f.debug_list().entries(rows).finish()
    }
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter()
        .zip(b)
        .fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}

#[cfg(test)]
mod tests {
    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_rational("2/205"), Some(ratio(2, 205)));
        assert_eq!(parse_rational("-45"), Some(int(-45)));
        assert_eq!(parse_rational("0.125"), Some(ratio(1, 8)));
        assert_eq!(parse_rational("-1.5e-3"), Some(ratio(-3, 2000)));
        assert_eq!(parse_rational("2E3"), Some(int(2000)));
        assert_eq!(parse_rational(".5"), Some(ratio(1, 2)));
        for bad in ["", "1/0", "abc", "1.2.3", "-", "1e", "e5"] {
            assert_eq!(parse_rational(bad), None, "{bad}");
        }
    }

    use super::*;

    fn m(rows: &[&[i64]]) -> RatMatrix {
        RatMatrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| int(v)).collect())
                .collect(),
        )
    }

    #[test]
    fn determinant_and_rank_of_small_matrices() {
        let a = m(&[&[2, 1], &[1, 3]]);
        assert_eq!(a.determinant(), int(5));
        assert_eq!(a.rank(), 2);
        let singular = m(&[&[1, 2, 3], &[2, 4, 6], &[0, 1, 1]]);
        assert_eq!(singular.determinant(), int(0));
        assert_eq!(singular.rank(), 2);
        let needs_swap = m(&[&[0, 1], &[1, 0]]);
        assert_eq!(needs_swap.determinant(), int(-1));
    }

    #[test]
    fn inverse_round_trip() {
        let a = m(&[&[4, 1, 0], &[1, 3, 1], &[0, 1, 2]]);
        let inv = a.inverse().unwrap();
        assert_eq!(a.mul(&inv), RatMatrix::identity(3));
        assert!(m(&[&[1, 1], &[1, 1]]).inverse().is_none());
    }

    #[test]
    fn sylvester_rejects_indefinite() {
        assert!(m(&[&[2, -1], &[-1, 2]]).is_positive_definite());
        assert!(!m(&[&[1, 2], &[2, 1]]).is_positive_definite());
        assert!(!m(&[&[0, 0], &[0, 1]]).is_positive_definite());
        assert!(!m(&[&[1, 0], &[1, 1]]).is_positive_definite());
    }

    #[test]
    fn decimal_strings() {
        assert_eq!(to_decimal_string(&ratio(1, 3), 5), "0.33333");
        assert_eq!(to_decimal_string(&ratio(-55, 4), 30), "-13.75");
        assert_eq!(to_decimal_string(&ratio(2, 205), 6), "0.00975609");
        assert_eq!(to_decimal_string(&int(6150), 30), "6150");
        assert_eq!(to_decimal_string(&ratio(1, 10_i64.pow(12)), 3), "1e-12");
        assert_eq!(to_decimal_string(&int(0), 3), "0");
    }

    #[test]
    fn f64_conversion_survives_huge_operands() {
        let big = Rational::new(
            num_traits::pow(BigInt::from(10), 400) * BigInt::from(3),
            num_traits::pow(BigInt::from(10), 400),
        );
        assert_eq!(to_f64(&big), 3.0);
        assert_eq!(to_f64(&ratio(-1, 3)), -1.0 / 3.0);
        assert_eq!(to_f64(&ratio(2, 205)), 2.0 / 205.0);
    }
}
