//! Spanning-tree counts of `C_q(n)` in factored form.
//!
//! `F_q(n, k, j)` is defined for `0 <= k <= n/2` and `k <= j <= n-k+1` by
//!
//! ```text
//! F(n,k,n-k+1) = 1
//! F(n,k,n-k)   = [k] + [n-k]
//! F(n,k,j)     = ([j] + [n-j]) F(n,k,j+1) - q^k [j+1-k][n-k-j] F(n,k,j+2)
//! ```
//!
//! and the count is `F(n,0,1) * prod_k F(n,k,k)^([n,k] - [n,k-1])`.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::qpoly::{binom, qbinom, qint, QPoly};

/// Default cap on the size of an expanded count.
pub const DEFAULT_MAX_BITS: u64 = 1 << 20;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factor {
    pub base: QPoly,
    pub exponent: QPoly,
}

/// `leading * prod base_i ^ exponent_i`, with exponents kept symbolic.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactoredExpr {
    pub n: usize,
    pub leading: QPoly,
    pub factors: Vec<Factor>,
}

fn check_nk(n: usize, k: usize) -> Result<()> {
    if 2 * k > n {
        return Err(Error::out_of_range(
            "k",
            format!("need 2k <= n, got n={n}, k={k}"),
        ));
    }
    Ok(())
}

type RowCache = RwLock<HashMap<(usize, usize), Arc<Vec<QPoly>>>>;

fn row_cache() -> &'static RowCache {
    static CACHE: OnceLock<RowCache> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// `F(n, k, j)` for `j = k ..= n-k+1`, stored at index `j - k`.
pub fn f_row(n: usize, k: usize) -> Result<Arc<Vec<QPoly>>> {
    check_nk(n, k)?;
    if let Some(row) = row_cache().read().unwrap().get(&(n, k)) {
        return Ok(row.clone());
    }
    let row = Arc::new(compute_row(n, k));
    let mut cache = row_cache().write().unwrap();
    Ok(cache.entry((n, k)).or_insert(row).clone())
}

fn compute_row(n: usize, k: usize) -> Vec<QPoly> {
    let top = n - k + 1;
    let mut row = vec![QPoly::zero(); top - k + 1];
    row[top - k] = QPoly::one();
    row[top - 1 - k] = qint(k) + qint(n - k);
    let weight = QPoly::q_pow(k as i64);
    for j in (k..n - k).rev() {
        let diag = qint(j) + qint(n - j);
        let off = &weight * &qint(j + 1 - k) * qint(n - k - j);
        row[j - k] = &diag * &row[j + 1 - k] - &off * &row[j + 2 - k];
    }
    row
}

pub fn f_poly(n: usize, k: usize, j: usize) -> Result<QPoly> {
    check_nk(n, k)?;
    if j < k || j > n - k + 1 {
        return Err(Error::out_of_range(
            "j",
            format!("need {k} <= j <= {}, got {j}", n - k + 1),
        ));
    }
    Ok(f_row(n, k)?[j - k].clone())
}

/// `[1][2]...[n]`.
pub fn f0_product(n: usize) -> QPoly {
    (1..=n).map(qint).product()
}

/// `[n, k] - [n, k-1]`, the multiplicity of the `k`-th block.
pub fn block_multiplicity(n: usize, k: usize) -> QPoly {
    qbinom(n as i64, k as i64) - qbinom(n as i64, k as i64 - 1)
}

pub fn complexity_factored(n: usize) -> FactoredExpr {
    complexity_factored_with(n, Exec::default())
}

pub fn complexity_factored_with(n: usize, exec: Exec) -> FactoredExpr {
    let ks: Vec<usize> = (1..=n / 2).collect();
    let factors = exec.map(&ks, |&k| Factor {
        base: f_poly(n, k, k).expect("k <= n/2"),
        exponent: block_multiplicity(n, k),
    });
    FactoredExpr {
        n,
        leading: f0_product(n),
        factors,
    }
}

fn log2_abs(x: &BigInt) -> f64 {
    let bits = x.bits();
    if bits <= 64 {
        return x.abs().to_f64().unwrap().log2();
    }
    let shift = bits - 64;
    let top = (x.abs() >> shift).to_f64().unwrap();
    top.log2() + shift as f64
}

impl FactoredExpr {
    /// Estimated bit length of the expanded value at `q0`.
    pub fn estimate_bits(&self, q0: u64) -> Result<f64> {
        let q = BigInt::from(q0);
        let mut est = 0.0;
        let lead = self.leading.eval_integer(&q)?;
        if lead.is_zero() {
            return Ok(0.0);
        }
        est += log2_abs(&lead);
        for f in &self.factors {
            let b = f.base.eval_integer(&q)?;
            let e = f.exponent.eval_integer(&q)?;
            if e.is_negative() {
                return Err(Error::InvalidParameter(format!(
                    "exponent {} is negative at q={q0}",
                    f.exponent
                )));
            }
            if b.is_zero() || e.is_zero() {
                continue;
            }
            est += log2_abs(&b) * e.to_f64().unwrap_or(f64::INFINITY);
        }
        Ok(est)
    }

    /// Expands the value at `q0 >= 1`, refusing results above `max_bits`.
    pub fn evaluate(&self, q0: u64, max_bits: u64) -> Result<BigInt> {
        if q0 < 1 {
            return Err(Error::InvalidParameter("q0 must be >= 1".into()));
        }
        let est = self.estimate_bits(q0)?;
        if est > max_bits as f64 + 1.0 {
            return Err(Error::TooLarge {
                estimated_bits: if est.is_finite() {
                    est.ceil() as u64
                } else {
                    u64::MAX
                },
                max_bits,
            });
        }
        let q = BigInt::from(q0);
        let mut acc = self.leading.eval_integer(&q)?;
        for f in &self.factors {
            let b = f.base.eval_integer(&q)?;
            let e = f.exponent.eval_integer(&q)?;
            if e.is_zero() {
                continue;
            }
            let v = if b.abs().is_one() || b.is_zero() {
                if b.is_negative() && e.is_odd_big() {
                    -BigInt::one()
                } else if b.is_zero() {
                    BigInt::zero()
                } else {
                    BigInt::one()
                }
            } else {
                // bounded by the bit estimate above
                num_traits::pow(b, e.to_usize().expect("exponent checked by estimate"))
            };
            acc *= v;
        }
        Ok(acc)
    }

    /// LaTeX rendering in the style `[2][3](4+3q+q^2)^{q(1+q)}`.
    pub fn to_latex(&self) -> String {
        self.render(true)
    }

    /// Plain-text rendering in the style `[2][3] (4+3q+q^2)^(q+q^2)`.
    pub fn to_text(&self) -> String {
        self.render(false)
    }

    fn render(&self, latex: bool) -> String {
        let poly = |p: &QPoly| if latex { p.to_latex() } else { p.to_string() };
        let mut parts: Vec<String> = Vec::new();
        if self.leading == f0_product(self.n) {
            let s: String = (2..=self.n).map(|i| format!("[{i}]")).collect();
            if !s.is_empty() {
                parts.push(s);
            }
        } else if !self.leading.is_one() {
            parts.push(wrap(&poly(&self.leading)));
        }
        for f in &self.factors {
            if f.exponent.is_zero() {
                continue;
            }
            let base = if f.base.term_count() == 1
                && f.base.valuation() == 0
                && !f.base.coeff(0).is_negative()
            {
                poly(&f.base)
            } else {
                wrap(&poly(&f.base))
            };
            if f.exponent.is_one() {
                parts.push(base);
                continue;
            }
            let exp = if latex {
                let v = f.exponent.valuation();
                let rest = f.exponent.shift(-v);
                let head = match v {
                    0 => String::new(),
                    1 => "q".to_string(),
                    v if (0..10).contains(&v) => format!("q^{v}"),
                    v => format!("q^{{{v}}}"),
                };
                if rest.is_one() {
                    head
                } else if head.is_empty() && rest.term_count() == 1 {
                    poly(&rest)
                } else {
                    format!("{head}({})", poly(&rest))
                }
            } else {
                poly(&f.exponent)
            };
            if latex {
                parts.push(format!("{base}^{{{exp}}}"));
            } else {
                parts.push(format!("{base}^({exp})"));
            }
        }
        if parts.is_empty() {
            return "1".to_string();
        }
        if latex {
            parts.concat()
        } else {
            parts.join(" ")
        }
    }
}

fn wrap(s: &str) -> String {
    format!("({s})")
}

trait BigParity {
    fn is_odd_big(&self) -> bool;
}

impl BigParity for BigInt {
    fn is_odd_big(&self) -> bool {
        num_integer::Integer::is_odd(self)
    }
}

pub fn evaluate_factored(e: &FactoredExpr, q0: u64, max_bits: u64) -> Result<BigInt> {
    e.evaluate(q0, max_bits)
}

/// `prod_{k=2}^{n} (2k)^C(n,k)`, the spanning-tree count of the ordinary n-cube.
pub fn classical_complexity(n: usize) -> Result<BigInt> {
    if n < 1 {
        return Err(Error::out_of_range("n", "need n >= 1"));
    }
    let n = n as i64;
    let mut acc = BigInt::one();
    for k in 2..=n {
        let e = binom(n, k).to_usize().expect("binomial exponent fits");
        acc *= num_traits::pow(BigInt::from(2 * k), e);
    }
    Ok(acc)
}

/// `n! * prod_{k=1}^{n/2} (prod_{j=k}^{n-k} 2j)^(C(n,k) - C(n,k-1))` with constant factors.
pub fn classical_factored(n: usize) -> Result<FactoredExpr> {
    if n < 1 {
        return Err(Error::out_of_range("n", "need n >= 1"));
    }
    let ni = n as i64;
    let fact: BigInt = (1..=ni).map(BigInt::from).product();
    let factors = (1..=ni / 2)
        .map(|k| {
            let base: BigInt = (k..=ni - k).map(|j| BigInt::from(2 * j)).product();
            Factor {
                base: QPoly::constant(base),
                exponent: QPoly::constant(binom(ni, k) - binom(ni, k - 1)),
            }
        })
        .collect();
    Ok(FactoredExpr {
        n,
        leading: QPoly::constant(fact),
        factors,
    })
}
