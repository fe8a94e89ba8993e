//! The finished controller and its JSON representation.
//!
//! A [`ControllerSpec`] keeps the exact rational data it was built from and a
//! set of double-precision caches derived from that data once, at
//! construction. Runtime evaluation only touches the caches.

use std::path::Path;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::exact::{self, RatMatrix, Rational};

/// Significant digits in the decimal rendering of every exported number.
pub const DECIMAL_DIGITS: usize = 40;

/// Free parameters and derived thresholds recorded alongside a spec.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub a_n: Rational,
    pub c_scale: Rational,
    pub xi0: Rational,
    pub threshold: Rational,
}

#[derive(Debug, Clone)]
pub struct ControllerSpec {
    n: usize,
    d: Rational,
    a0: Rational,
    a: Vec<Rational>,
    f: RatMatrix,
    f_inv: RatMatrix,
    c: RatMatrix,
    provenance: Provenance,
    fast: FloatCache,
}

/// Double-precision views used on the hot path.
#[derive(Debug, Clone)]
pub(crate) struct FloatCache {
    pub d: f64,
    pub two_a0: f64,
    pub a: Vec<f64>,
    /// Row-major `F`.
    pub f: Vec<Dd>,
    /// Row-major `F - HF - FH`.
    pub slope: Vec<Dd>,
    /// Row-major `F(A0 + b0 a*) + (A0 + b0 a*)* F`.
    pub lie: Vec<Dd>,
    /// Diagonal of `F` in plain doubles.
    pub f_diag: Vec<f64>,
    pub control_sup: f64,
}

/// `H = diag(-(2i-1)/2)`, one-based `i`.
pub fn h_diagonal(n: usize) -> Vec<Rational> {
    (1..=n as i64)
        .map(|i| exact::ratio(-(2 * i - 1), 2))
        .collect()
}

/// `A0 + b0 a*`: the canonical pair closed with the linear gain `a`.
pub fn closed_loop_matrix(a: &[Rational]) -> RatMatrix {
    let n = a.len();
    RatMatrix::from_fn(n, n, |i, j| {
        if i == 0 {
            a[j].clone()
        } else if j + 1 == i {
            Rational::one()
        } else {
            Rational::zero()
        }
    })
}

/// `K - HK - KH` for diagonal `H`: entry `(i, j)` scales by `1 - h_i - h_j`.
pub fn slope_form(k: &RatMatrix) -> RatMatrix {
    let h = h_diagonal(k.rows());
    RatMatrix::from_fn(k.rows(), k.cols(), |i, j| {
        &k[(i, j)] * (Rational::one() - &h[i] - &h[j])
    })
}

impl ControllerSpec {
    /// Assembles a spec from exact parts. Only shapes are checked here;
    /// admissibility is the job of `synthesis::validate_parameters` and the
    /// verification routines.
    pub fn from_parts(
        d: Rational,
        a0: Rational,
        a: Vec<Rational>,
        f: RatMatrix,
        f_inv: RatMatrix,
        c: RatMatrix,
        provenance: Provenance,
    ) -> Result<Self> {
        let n = a.len();
        if n < 2 {
            return Err(Error::Dimension(n));
        }
        for (name, m) in [("F", &f), ("F_inv", &f_inv), ("C", &c)] {
            if m.rows() != n || m.cols() != n {
                return Err(Error::SpecFormat(format!(
                    "{name} is {}x{}, expected {n}x{n}",
                    m.rows(),
                    m.cols()
                )));
            }
        }
        if !d.is_positive() {
            return Err(Error::InvalidParameter(
                "control bound d must be positive".into(),
            ));
        }
        if !a0.is_positive() {
            return Err(Error::InvalidParameter("a0 must be positive".into()));
        }

        let k = closed_loop_matrix(&a);
        let lie = f.mul(&k).add(&k.transpose().mul(&f));
        let slope = slope_form(&f);
        let fa = f_inv.quadratic_form(&a);
        let sup_sq = exact::int(2) * &a0 * &fa;
        let flat = |m: &RatMatrix| -> Vec<Dd> {
            m.to_rows()
                .iter()
                .flatten()
                .map(Dd::from_rational)
                .collect()
        };
        let fast = FloatCache {
            d: exact::to_f64(&d),
            two_a0: exact::to_f64(&(exact::int(2) * &a0)),
            a: a.iter().map(exact::to_f64).collect(),
            f: flat(&f),
            slope: flat(&slope),
            lie: flat(&lie),
            f_diag: (0..n).map(|i| exact::to_f64(&f[(i, i)])).collect(),
            control_sup: exact::to_f64(&sup_sq).max(0.0).sqrt(),
        };
        Ok(Self {
            n,
            d,
            a0,
            a,
            f,
            f_inv,
            c,
            provenance,
            fast,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> &Rational {
        &self.d
    }

    pub fn a0(&self) -> &Rational {
        &self.a0
    }

    pub fn gains(&self) -> &[Rational] {
        &self.a
    }

    pub fn f(&self) -> &RatMatrix {
        &self.f
    }

    pub fn f_inv(&self) -> &RatMatrix {
        &self.f_inv
    }

    pub fn c(&self) -> &RatMatrix {
        &self.c
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub(crate) fn fast(&self) -> &FloatCache {
        &self.fast
    }

    pub fn d_f64(&self) -> f64 {
        self.fast.d
    }

    pub fn gains_f64(&self) -> &[f64] {
        &self.fast.a
    }

    /// `(F^{-1} a, a)` in exact arithmetic.
    pub fn gain_energy(&self) -> Rational {
        self.f_inv.quadratic_form(&self.a)
    }

    /// `sqrt(2 a0 (F^{-1} a, a))`, the supremum of `|u|` over the state space.
    pub fn control_sup(&self) -> f64 {
        self.fast.control_sup
    }

    /// Copy with `a0` replaced; used for scaling experiments.
    pub fn with_a0(&self, a0: Rational) -> Result<Self> {
        Self::from_parts(
            self.d.clone(),
            a0,
            self.a.clone(),
            self.f.clone(),
            self.f_inv.clone(),
            self.c.clone(),
            self.provenance.clone(),
        )
    }

    /// Copy with the gain vector replaced, keeping every other part.
    pub fn with_gains(&self, a: Vec<Rational>) -> Result<Self> {
        Self::from_parts(
            self.d.clone(),
            self.a0.clone(),
            a,
            self.f.clone(),
            self.f_inv.clone(),
            self.c.clone(),
            self.provenance.clone(),
        )
    }

    pub fn to_json(&self) -> SpecDocument {
        let mat = |m: &RatMatrix| -> Vec<Vec<ExactNumber>> {
            m.to_rows()
                .iter()
                .map(|r| r.iter().map(ExactNumber::from).collect())
                .collect()
        };
        SpecDocument {
            n: self.n,
            d: (&self.d).into(),
            a0: (&self.a0).into(),
            a: self.a.iter().map(ExactNumber::from).collect(),
            f: mat(&self.f),
            f_inv: mat(&self.f_inv),
            c: mat(&self.c),
            provenance: ProvenanceDocument {
                a_n: (&self.provenance.a_n).into(),
                c_scale: (&self.provenance.c_scale).into(),
                xi0: (&self.provenance.xi0).into(),
                threshold: (&self.provenance.threshold).into(),
            },
        }
    }

    pub fn from_json(doc: &SpecDocument) -> Result<Self> {
        let mat = |name: &str, rows: &[Vec<ExactNumber>]| -> Result<RatMatrix> {
            let parsed = rows
                .iter()
                .map(|r| {
                    r.iter()
                        .map(ExactNumber::to_rational)
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            if parsed.iter().any(|r| r.len() != parsed.len()) {
                return Err(Error::SpecFormat(format!("{name} is not square")));
            }
            Ok(RatMatrix::from_rows(parsed))
        };
        let a = doc
            .a
            .iter()
            .map(ExactNumber::to_rational)
            .collect::<Result<Vec<_>>>()?;
        if a.len() != doc.n {
            return Err(Error::SpecFormat(format!(
                "gain vector has {} entries, n = {}",
                a.len(),
                doc.n
            )));
        }
        let provenance = Provenance {
            a_n: doc.provenance.a_n.to_rational()?,
            c_scale: doc.provenance.c_scale.to_rational()?,
            xi0: doc.provenance.xi0.to_rational()?,
            threshold: doc.provenance.threshold.to_rational()?,
        };
        Self::from_parts(
            doc.d.to_rational()?,
            doc.a0.to_rational()?,
            a,
            mat("F", &doc.f)?,
            mat("F_inv", &doc.f_inv)?,
            mat("C", &doc.c)?,
            provenance,
        )
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("spec document serializes")
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let doc: SpecDocument = serde_json::from_str(text)?;
        Self::from_json(&doc)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json_string() + "\n")?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }
}

/// One exported number: decimal rendering plus the exact fraction. Readers
/// take the fraction as authoritative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactNumber {
    pub decimal: String,
    pub num: String,
    pub den: String,
}

impl From<&Rational> for ExactNumber {
    fn from(value: &Rational) -> Self {
        Self {
            decimal: exact::to_decimal_string(value, DECIMAL_DIGITS),
            num: value.numer().to_string(),
            den: value.denom().to_string(),
        }
    }
}

impl ExactNumber {
    pub fn to_rational(&self) -> Result<Rational> {
        let num: BigInt = self
            .num
            .trim()
            .parse()
            .map_err(|_| Error::SpecFormat(format!("bad numerator {:?}", self.num)))?;
        let den: BigInt = self
            .den
            .trim()
            .parse()
            .map_err(|_| Error::SpecFormat(format!("bad denominator {:?}", self.den)))?;
        if !den.is_positive() {
            return Err(Error::SpecFormat(format!(
                "denominator {den} is not positive"
            )));
        }
        Ok(Rational::new(num, den))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProvenanceDocument {
    pub a_n: ExactNumber,
    pub c_scale: ExactNumber,
    pub xi0: ExactNumber,
    pub threshold: ExactNumber,
}

/// On-disk controller description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecDocument {
    pub n: usize,
    pub d: ExactNumber,
    pub a0: ExactNumber,
    pub a: Vec<ExactNumber>,
    #[serde(rename = "F")]
    pub f: Vec<Vec<ExactNumber>>,
    #[serde(rename = "F_inv")]
    pub f_inv: Vec<Vec<ExactNumber>>,
    #[serde(rename = "C")]
    pub c: Vec<Vec<ExactNumber>>,
    pub provenance: ProvenanceDocument,
}
