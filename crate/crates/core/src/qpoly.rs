//! Exact Laurent polynomials in `q` over arbitrary-precision integers, and
//! the q-integers / Gaussian binomials built on them.

use std::fmt;
use std::iter::{Product, Sum};
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A Laurent polynomial `sum_i coeffs[i] * q^(valuation + i)`.
///
/// Always canonical: the zero polynomial has no coefficients and valuation
/// 0, otherwise the first and last coefficients are nonzero.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct QPoly {
    valuation: i64,
    coeffs: Vec<BigInt>,
}

impl QPoly {
    pub fn from_coeffs(valuation: i64, coeffs: Vec<BigInt>) -> Self {
        let mut p = QPoly { valuation, coeffs };
        p.normalize();
        p
    }

    pub fn from_i64s(valuation: i64, coeffs: &[i64]) -> Self {
        Self::from_coeffs(valuation, coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn constant(c: impl Into<BigInt>) -> Self {
        Self::from_coeffs(0, vec![c.into()])
    }

    pub fn monomial(c: impl Into<BigInt>, exponent: i64) -> Self {
        Self::from_coeffs(exponent, vec![c.into()])
    }

    /// `q^exponent`.
    pub fn q_pow(exponent: i64) -> Self {
        Self::monomial(1, exponent)
    }

    fn normalize(&mut self) {
        while self.coeffs.last().is_some_and(Zero::is_zero) {
            self.coeffs.pop();
        }
        let lead = self.coeffs.iter().take_while(|c| c.is_zero()).count();
        if lead == self.coeffs.len() {
            self.coeffs.clear();
            self.valuation = 0;
            return;
        }
        if lead > 0 {
            self.coeffs.drain(..lead);
            self.valuation += lead as i64;
        }
    }

    pub fn valuation(&self) -> i64 {
        self.valuation
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    /// Highest exponent present, `None` for zero.
    pub fn degree(&self) -> Option<i64> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.valuation + self.coeffs.len() as i64 - 1)
        }
    }

    /// Coefficient of `q^exponent`.
    pub fn coeff(&self, exponent: i64) -> BigInt {
        let idx = exponent - self.valuation;
        if idx < 0 {
            return BigInt::zero();
        }
        self.coeffs.get(idx as usize).cloned().unwrap_or_default()
    }

    /// `(exponent, coefficient)` pairs of the nonzero terms, ascending.
    pub fn terms(&self) -> impl Iterator<Item = (i64, &BigInt)> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(move |(i, c)| (self.valuation + i as i64, c))
    }

    pub fn is_nonneg(&self) -> bool {
        self.coeffs.iter().all(|c| !c.is_negative())
    }

    /// Multiply by `q^e`.
    pub fn shift(&self, e: i64) -> Self {
        if self.is_zero() {
            return QPoly::zero();
        }
        QPoly {
            valuation: self.valuation + e,
            coeffs: self.coeffs.clone(),
        }
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        Self::from_coeffs(self.valuation, self.coeffs.iter().map(|x| x * c).collect())
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = QPoly::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Exact evaluation at a rational point.
    pub fn eval_int(&self, q0: &BigRational) -> Result<BigRational> {
        if self.is_zero() {
            return Ok(BigRational::zero());
        }
        if q0.is_zero() {
            if self.valuation < 0 {
                return Err(Error::DivisionByZero);
            }
            return Ok(if self.valuation == 0 {
                BigRational::from_integer(self.coeffs[0].clone())
            } else {
                BigRational::zero()
            });
        }
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * q0 + BigRational::from_integer(c.clone());
        }
        let shift = pow_rational(q0, self.valuation);
        Ok(acc * shift)
    }

    /// Exact evaluation at an integer point; fails unless the value is an integer.
    pub fn eval_integer(&self, q0: &BigInt) -> Result<BigInt> {
        if self.valuation >= 0 {
            let mut acc = BigInt::zero();
            for c in self.coeffs.iter().rev() {
                acc = acc * q0 + c;
            }
            return Ok(acc * num_traits::pow(q0.clone(), self.valuation as usize));
        }
        let r = self.eval_int(&BigRational::from_integer(q0.clone()))?;
        if !r.is_integer() {
            return Err(Error::InvalidParameter(format!(
                "value of {self} at q={q0} is not an integer"
            )));
        }
        Ok(r.to_integer())
    }

    /// Horner evaluation in double precision.
    pub fn eval_real(&self, q0: f64) -> f64 {
        let mut acc = 0.0;
        for c in self.coeffs.iter().rev() {
            acc = acc * q0 + c.to_f64().unwrap_or(f64::NAN);
        }
        acc * q0.powi(self.valuation as i32)
    }

    fn fmt_with(&self, f: &mut fmt::Formatter<'_>, latex: bool) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (e, c) in self.terms() {
            let neg = c.is_negative();
            let mag = c.abs();
            if neg {
                f.write_str("-")?;
            } else if !first {
                f.write_str("+")?;
            }
            first = false;
            let unit = mag.is_one();
            if e == 0 {
                write!(f, "{mag}")?;
                continue;
            }
            if !unit {
                write!(f, "{mag}")?;
            }
            f.write_str("q")?;
            if e != 1 {
                if latex && !(0..10).contains(&e) {
                    write!(f, "^{{{e}}}")?;
                } else {
                    write!(f, "^{e}")?;
                }
            }
        }
        Ok(())
    }

    /// LaTeX-style rendering, e.g. `4+3q+q^2`, `q^{10}`.
    pub fn to_latex(&self) -> String {
        struct L<'a>(&'a QPoly);
        impl fmt::Display for L<'_> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                self.0.fmt_with(f, true)
            }
        }
        L(self).to_string()
    }

    /// Number of nonzero terms.
    pub fn term_count(&self) -> usize {
        self.coeffs.iter().filter(|c| !c.is_zero()).count()
    }
}

fn pow_rational(q0: &BigRational, e: i64) -> BigRational {
    let p = num_traits::pow(q0.clone(), e.unsigned_abs() as usize);
    if e < 0 {
        p.recip()
    } else {
        p
    }
}

impl fmt::Display for QPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_with(f, false)
    }
}

impl fmt::Debug for QPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "QPoly({self})")
    }
}

impl From<i64> for QPoly {
    fn from(c: i64) -> Self {
        QPoly::constant(c)
    }
}

impl From<BigInt> for QPoly {
    fn from(c: BigInt) -> Self {
        QPoly::constant(c)
    }
}

fn add_impl(a: &QPoly, b: &QPoly, negate_b: bool) -> QPoly {
    if b.is_zero() {
        return a.clone();
    }
    if a.is_zero() {
        return if negate_b { -b } else { b.clone() };
    }
    let lo = a.valuation.min(b.valuation);
    let hi = a.degree().unwrap().max(b.degree().unwrap());
    let mut out = vec![BigInt::zero(); (hi - lo + 1) as usize];
    for (i, c) in a.coeffs.iter().enumerate() {
        out[(a.valuation - lo) as usize + i] += c;
    }
    for (i, c) in b.coeffs.iter().enumerate() {
        let slot = &mut out[(b.valuation - lo) as usize + i];
        if negate_b {
            *slot -= c;
        } else {
            *slot += c;
        }
    }
    QPoly::from_coeffs(lo, out)
}

fn small_coeffs(p: &QPoly) -> Option<Vec<i64>> {
    p.coeffs.iter().map(|c| c.to_i64()).collect()
}

fn mul_impl(a: &QPoly, b: &QPoly) -> QPoly {
    if a.is_zero() || b.is_zero() {
        return QPoly::zero();
    }
    let mut out = vec![BigInt::zero(); a.coeffs.len() + b.coeffs.len() - 1];
    // Multipliers in the recurrences have machine-word coefficients.
    let (shorter, longer) = if a.coeffs.len() <= b.coeffs.len() {
        (a, b)
    } else {
        (b, a)
    };
    let small = small_coeffs(shorter)
        .map(|s| (s, longer))
        .or_else(|| small_coeffs(longer).map(|s| (s, shorter)));
    match small {
        Some((s, big)) => {
            for (i, &c) in s.iter().enumerate() {
                if c == 0 {
                    continue;
                }
                for (j, d) in big.coeffs.iter().enumerate() {
                    if !d.is_zero() {
                        out[i + j] += d * c;
                    }
                }
            }
        }
        None => {
            for (i, c) in a.coeffs.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                for (j, d) in b.coeffs.iter().enumerate() {
                    if !d.is_zero() {
                        out[i + j] += c * d;
                    }
                }
            }
        }
    }
    QPoly::from_coeffs(a.valuation + b.valuation, out)
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $body:expr) => {
        impl<'a, 'b> $tr<&'b QPoly> for &'a QPoly {
            type Output = QPoly;
            fn $method(self, rhs: &'b QPoly) -> QPoly {
                $body(self, rhs)
            }
        }
        impl $tr<QPoly> for QPoly {
            type Output = QPoly;
            fn $method(self, rhs: QPoly) -> QPoly {
                $body(&self, &rhs)
            }
        }
        impl<'b> $tr<&'b QPoly> for QPoly {
            type Output = QPoly;
            fn $method(self, rhs: &'b QPoly) -> QPoly {
                $body(&self, rhs)
            }
        }
        impl<'a> $tr<QPoly> for &'a QPoly {
            type Output = QPoly;
            fn $method(self, rhs: QPoly) -> QPoly {
                $body(self, &rhs)
            }
        }
    };
}

forward_binop!(Add, add, |a, b| add_impl(a, b, false));
forward_binop!(Sub, sub, |a, b| add_impl(a, b, true));
forward_binop!(Mul, mul, mul_impl);

impl AddAssign<&QPoly> for QPoly {
    fn add_assign(&mut self, rhs: &QPoly) {
        *self = add_impl(self, rhs, false);
    }
}

impl SubAssign<&QPoly> for QPoly {
    fn sub_assign(&mut self, rhs: &QPoly) {
        *self = add_impl(self, rhs, true);
    }
}

impl MulAssign<&QPoly> for QPoly {
    fn mul_assign(&mut self, rhs: &QPoly) {
        *self = mul_impl(self, rhs);
    }
}

impl Neg for &QPoly {
    type Output = QPoly;
    fn neg(self) -> QPoly {
        QPoly {
            valuation: self.valuation,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl Neg for QPoly {
    type Output = QPoly;
    fn neg(self) -> QPoly {
        -&self
    }
}

impl Zero for QPoly {
    fn zero() -> Self {
        QPoly {
            valuation: 0,
            coeffs: Vec::new(),
        }
    }
    fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
}

impl One for QPoly {
    fn one() -> Self {
        QPoly::constant(1)
    }
}

impl Sum for QPoly {
    fn sum<I: Iterator<Item = QPoly>>(iter: I) -> Self {
        iter.fold(QPoly::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a QPoly> for QPoly {
    fn sum<I: Iterator<Item = &'a QPoly>>(iter: I) -> Self {
        iter.fold(QPoly::zero(), |acc, x| acc + x)
    }
}

impl Product for QPoly {
    fn product<I: Iterator<Item = QPoly>>(iter: I) -> Self {
        iter.fold(QPoly::one(), |acc, x| acc * x)
    }
}

impl<'a> Product<&'a QPoly> for QPoly {
    fn product<I: Iterator<Item = &'a QPoly>>(iter: I) -> Self {
        iter.fold(QPoly::one(), |acc, x| acc * x)
    }
}

#[derive(Serialize, Deserialize)]
struct QPolyRepr {
    valuation: i64,
    coeffs: Vec<String>,
}

impl Serialize for QPoly {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        QPolyRepr {
            valuation: self.valuation,
            coeffs: self.coeffs.iter().map(|c| c.to_string()).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for QPoly {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = QPolyRepr::deserialize(deserializer)?;
        let coeffs = repr
            .coeffs
            .iter()
            .map(|s| s.parse::<BigInt>().map_err(D::Error::custom))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(QPoly::from_coeffs(repr.valuation, coeffs))
    }
}

/// The q-integer `[k] = 1 + q + ... + q^(k-1)`; `[0] = 0`.
pub fn qint(k: usize) -> QPoly {
    QPoly::from_coeffs(0, vec![BigInt::one(); k])
}

type PascalRows = Vec<Vec<Arc<QPoly>>>;

fn pascal() -> &'static RwLock<PascalRows> {
    static TABLE: OnceLock<RwLock<PascalRows>> = OnceLock::new();
    TABLE.get_or_init(|| RwLock::new(vec![vec![Arc::new(QPoly::one())]]))
}

/// Row `n` of the q-Pascal triangle, grown on demand.
fn pascal_entry(n: usize, k: usize) -> Arc<QPoly> {
    {
        let rows = pascal().read().unwrap();
        if let Some(row) = rows.get(n) {
            return row[k].clone();
        }
    }
    let mut rows = pascal().write().unwrap();
    while rows.len() <= n {
        let m = rows.len();
        let prev = &rows[m - 1];
        let mut row = Vec::with_capacity(m + 1);
        row.push(Arc::new(QPoly::one()));
        for k in 1..m {
            // [m, k] = [m-1, k-1] + q^k [m-1, k]
            row.push(Arc::new(&*prev[k - 1] + prev[k].shift(k as i64)));
        }
        row.push(Arc::new(QPoly::one()));
        rows.push(row);
    }
    rows[n][k].clone()
}

/// Gaussian binomial `[n, k]_q`; zero when `k < 0`, `k > n` or `n < 0`.
pub fn qbinom(n: i64, k: i64) -> QPoly {
    if n < 0 || k < 0 || k > n {
        return QPoly::zero();
    }
    (*pascal_entry(n as usize, k as usize)).clone()
}

/// `[n, k]_q` evaluated at a real point.
pub fn qbinom_real(n: i64, k: i64, q0: f64) -> f64 {
    if n < 0 || k < 0 || k > n {
        return 0.0;
    }
    pascal_entry(n as usize, k as usize).eval_real(q0)
}

/// `[k]` evaluated at a real point.
pub fn qint_real(k: usize, q0: f64) -> f64 {
    (0..k).map(|i| q0.powi(i as i32)).sum()
}

/// Ordinary binomial coefficient, zero outside `0 <= k <= n`.
pub fn binom(n: i64, k: i64) -> BigInt {
    if n < 0 || k < 0 || k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// `binom(a, 2)` extended to all integers as `a(a-1)/2`.
pub(crate) fn choose2(a: i64) -> i64 {
    a * (a - 1) / 2
}
