//! Block diagonalization of the commutant of `GL(n, F_q)` acting on the
//! subspace lattice.
//!
//! The orbit matrices `M^t_{i,j}` (rows: `i`-spaces, columns: `j`-spaces,
//! entry 1 when the intersection has dimension `t`) span the commutant.
//! `phi_image` sends each one to a tuple of `p_k x p_k` blocks, `p_k = n-2k+1`,
//! each block a scalar multiple of a single matrix unit.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::linalg::{jacobi_eigenvalues, DenseMatrix};
use crate::oracle::{is_valid_triple, Grassmann};
use crate::qpoly::{binom, choose2, qbinom, qbinom_real, QPoly};
use crate::spectral::{multiplicity_at, tridiag_block};
use crate::treecount::block_multiplicity;

/// Relative tolerance for block-algebra identities.
pub const HOM_RTOL: f64 = 1e-8;

/// Absolute tolerance for matching oracle spectra.
pub const TAU_ATOL: f64 = 1e-6;

/// Absolute tolerance for the Laplacian block comparison.
pub const LAPLACIAN_ATOL: f64 = 1e-8;

pub type Triple = (usize, usize, usize);

fn sign(e: i64) -> i64 {
    if e % 2 == 0 {
        1
    } else {
        -1
    }
}

/// `sum_u (-1)^(u-t) q^(C(u-t,2) - ku) [u,t][n-2k,u-k][n-k-u,i-u][n-k-u,j-u]`.
pub fn beta(n: usize, i: usize, j: usize, k: usize, t: usize) -> QPoly {
    let (n, i, j, k, t) = (n as i64, i as i64, j as i64, k as i64, t as i64);
    let mut acc = QPoly::zero();
    for u in t.max(k)..=i.min(j).min(n - k) {
        let term = qbinom(u, t)
            * qbinom(n - 2 * k, u - k)
            * qbinom(n - k - u, i - u)
            * qbinom(n - k - u, j - u);
        if term.is_zero() {
            continue;
        }
        let term = term.shift(choose2(u - t) - k * u);
        if sign(u - t) > 0 {
            acc += &term;
        } else {
            acc -= &term;
        }
    }
    acc
}

/// `sum_u (-1)^(u-t) q^(C(u-t,2) + k(i-u)) [u,t][n-k-u,i-u][i-k,i-u]`: the
/// eigenvalue of `M^t_{i,i}` on the `k`-th eigenspace of the q-Johnson scheme.
pub fn tau(n: usize, i: usize, t: usize, k: usize) -> QPoly {
    let (n, i, t, k) = (n as i64, i as i64, t as i64, k as i64);
    let mut acc = QPoly::zero();
    for u in t..=i {
        let term = qbinom(u, t) * qbinom(n - k - u, i - u) * qbinom(i - k, i - u);
        if term.is_zero() {
            continue;
        }
        let term = term.shift(choose2(u - t) + k * (i - u));
        if sign(u - t) > 0 {
            acc += &term;
        } else {
            acc -= &term;
        }
    }
    acc
}

/// All `(i, j, t)` with `t <= i`, `t <= j`, `i + j - t <= n`.
pub fn basis_triples(n: usize) -> Vec<Triple> {
    let mut out = Vec::new();
    for i in 0..=n {
        for j in 0..=n {
            for t in 0..=i.min(j) {
                if is_valid_triple(n, i, j, t) {
                    out.push((i, j, t));
                }
            }
        }
    }
    out
}

/// `sum_k (n-2k+1)^2 == C(n+3, 3)`.
pub fn dimension_check(n: usize) -> bool {
    let lhs: BigInt = (0..=n / 2)
        .map(|k| BigInt::from((n - 2 * k + 1).pow(2)))
        .sum();
    lhs == binom(n as i64 + 3, 3)
        && basis_triples(n).len() as u64 == (n as u64 + 3) * (n as u64 + 2) * (n as u64 + 1) / 6
}

fn random_poly(rng: &mut ChaCha8Rng) -> QPoly {
    let len = rng.gen_range(0..=5);
    let coeffs: Vec<i64> = (0..len).map(|_| rng.gen_range(-50..=50)).collect();
    QPoly::from_i64s(rng.gen_range(-3..=3), &coeffs)
}

/// `b_t = sum_u [u,t] a_u`.
pub fn qbinomial_transform(a: &[QPoly]) -> Vec<QPoly> {
    (0..a.len())
        .map(|t| {
            (t..a.len())
                .map(|u| qbinom(u as i64, t as i64) * &a[u])
                .sum()
        })
        .collect()
}

/// `a_t = sum_u (-1)^(u-t) q^C(u-t,2) [u,t] b_u`.
pub fn qbinomial_inverse(b: &[QPoly]) -> Vec<QPoly> {
    (0..b.len())
        .map(|t| {
            (t..b.len())
                .map(|u| {
                    let d = (u - t) as i64;
                    (qbinom(u as i64, t as i64) * &b[u])
                        .shift(choose2(d))
                        .scale(&BigInt::from(sign(d)))
                })
                .sum()
        })
        .collect()
}

/// q-binomial inversion recovers a random sequence of length `n + 1` exactly.
pub fn qbi_polynomial_check(n: usize, seed: u64) -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (n as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let a: Vec<QPoly> = (0..=n).map(|_| random_poly(&mut rng)).collect();
    qbinomial_inverse(&qbinomial_transform(&a)) == a
}

/// One block per `k = 0..=n/2`, block `k` indexed by `k..=n-k`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockDiagonal {
    pub n: usize,
    pub blocks: Vec<DenseMatrix>,
}

#[derive(Serialize)]
struct BlockJson<'a> {
    k: usize,
    size: usize,
    multiplicity: &'a QPoly,
    entries: Vec<Vec<f64>>,
}

impl Serialize for BlockDiagonal {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mults: Vec<QPoly> = (0..self.blocks.len())
            .map(|k| block_multiplicity(self.n, k))
            .collect();
        let blocks: Vec<BlockJson<'_>> = self
            .blocks
            .iter()
            .enumerate()
            .map(|(k, b)| BlockJson {
                k,
                size: b.dim(),
                multiplicity: &mults[k],
                entries: b.rows(),
            })
            .collect();
        let mut st = s.serialize_struct("BlockDiagonal", 2)?;
        st.serialize_field("n", &self.n)?;
        st.serialize_field("blocks", &blocks)?;
        st.end()
    }
}

impl BlockDiagonal {
    pub fn zeros(n: usize) -> Self {
        BlockDiagonal {
            n,
            blocks: (0..=n / 2)
                .map(|k| DenseMatrix::zeros(n - 2 * k + 1))
                .collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        BlockDiagonal {
            n: self.n,
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| a.mul(b))
                .collect(),
        }
    }

    pub fn add_scaled(&mut self, other: &Self, c: f64) {
        for (a, b) in self.blocks.iter_mut().zip(&other.blocks) {
            a.add_scaled(b, c);
        }
    }

    pub fn transpose(&self) -> Self {
        BlockDiagonal {
            n: self.n,
            blocks: self.blocks.iter().map(DenseMatrix::transpose).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.blocks
            .iter()
            .map(DenseMatrix::max_abs)
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(0.0, f64::max)
    }

    /// Trace of the full matrix at integer `q = p`, each block weighted by its multiplicity.
    pub fn weighted_trace(&self, p: u64) -> Result<f64> {
        let mut acc = 0.0;
        for (k, b) in self.blocks.iter().enumerate() {
            acc += multiplicity_at(self.n, k, p)? as f64 * b.trace();
        }
        Ok(acc)
    }
}

/// Scalar in block `k` of `Phi(M^t_{i,j})`, or `None` when that block vanishes.
pub fn phi_scalar(n: usize, i: usize, j: usize, t: usize, k: usize, q0: f64) -> Option<f64> {
    if k > i.min(j) || i.max(j) + k > n {
        return None;
    }
    let m = (n - 2 * k) as i64;
    let pre = q0.powf(k as f64 * (i + j) as f64 / 2.0)
        / (qbinom_real(m, (i - k) as i64, q0) * qbinom_real(m, (j - k) as i64, q0)).sqrt();
    Some(pre * beta(n, i, j, k, t).eval_real(q0))
}

pub fn phi_image(n: usize, i: usize, j: usize, t: usize, q0: f64) -> Result<BlockDiagonal> {
    if !is_valid_triple(n, i, j, t) {
        return Err(Error::InvalidTriple { n, i, j, t });
    }
    if !(q0.is_finite() && q0 > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "q must be a positive real, got {q0}"
        )));
    }
    let mut out = BlockDiagonal::zeros(n);
    for k in 0..=n / 2 {
        if let Some(s) = phi_scalar(n, i, j, t, k, q0) {
            out.blocks[k].set(i - k, j - k, s);
        }
    }
    Ok(out)
}

/// `Phi(deg - U - D)` assembled from basis images.
pub fn phi_laplacian(n: usize, q0: f64) -> Result<BlockDiagonal> {
    let mut l = BlockDiagonal::zeros(n);
    for i in 0..=n {
        let deg = crate::qpoly::qint_real(i, q0) + crate::qpoly::qint_real(n - i, q0);
        l.add_scaled(&phi_image(n, i, i, i, q0)?, deg);
        if i < n {
            l.add_scaled(&phi_image(n, i + 1, i, i, q0)?, -1.0);
            l.add_scaled(&phi_image(n, i, i + 1, i, q0)?, -1.0);
        }
    }
    Ok(l)
}

/// Largest entrywise gap between block `k` of `Phi(L)` and `N(k, n-k, n)`.
pub fn laplacian_block_deviation(n: usize, q0: f64) -> Result<f64> {
    let l = phi_laplacian(n, q0)?;
    let mut worst = 0.0f64;
    for (k, b) in l.blocks.iter().enumerate() {
        worst = worst.max(b.max_abs_diff(&tridiag_block(n, k, q0)?.to_dense()));
    }
    Ok(worst)
}

pub fn laplacian_block_check(n: usize, q0: f64) -> Result<bool> {
    Ok(laplacian_block_deviation(n, q0)? <= LAPLACIAN_ATOL)
}

/// Spectrum of `M^t_{i,i}` on the `i`-spaces versus `tau(n,i,t,k)` with
/// multiplicity `[n,k] - [n,k-1]`, for every `i <= n/2`, `t <= i`.
pub fn tau_eigen_check(n: usize, p: u64) -> Result<bool> {
    let g = Grassmann::shared(n, p)?;
    for i in 0..=n / 2 {
        let idx: Vec<usize> = g.layer(i).collect();
        for t in 0..=i {
            let m = g.m_matrix(i, i, t)?.principal(&idx).to_real();
            let got = jacobi_eigenvalues(&m);
            let mut want = Vec::with_capacity(got.len());
            for k in 0..=i {
                let v = tau(n, i, t, k).eval_real(p as f64);
                for _ in 0..multiplicity_at(n, k, p)? {
                    want.push(v);
                }
            }
            want.sort_by(f64::total_cmp);
            if want.len() != got.len()
                || want.iter().zip(&got).any(|(a, b)| (a - b).abs() > TAU_ATOL)
            {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[derive(Clone, Debug, Serialize)]
pub struct HomReport {
    pub n: usize,
    pub p: u64,
    pub pairs_checked: usize,
    pub exhaustive: bool,
    pub max_relative_error: f64,
    pub max_trace_error: f64,
    pub passed: bool,
}

/// Every `(a, b)` whose product is defined: `a = (i, j, s)`, `b = (j, l, t)`.
pub fn composable_pairs(n: usize) -> Vec<(Triple, Triple)> {
    let triples = basis_triples(n);
    let mut out = Vec::new();
    for &a in &triples {
        for &b in &triples {
            if a.1 == b.0 {
                out.push((a, b));
            }
        }
    }
    out
}

/// Checks `Phi(M_a) Phi(M_b) = sum_s c_s Phi(M^s_{i,l})` against oracle
/// structure constants at `q = p`, plus the trace identity for each `a`.
pub fn hom_check(n: usize, p: u64, samples: usize, seed: u64) -> Result<HomReport> {
    hom_check_with(n, p, samples, seed, Exec::default())
}

pub fn hom_check_with(
    n: usize,
    p: u64,
    samples: usize,
    seed: u64,
    exec: Exec,
) -> Result<HomReport> {
    let g = Grassmann::shared(n, p)?;
    let all = composable_pairs(n);
    let exhaustive = all.len() <= samples;
    let pairs: Vec<(Triple, Triple)> = if exhaustive {
        all
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..samples)
            .map(|_| all[rng.gen_range(0..all.len())])
            .collect()
    };
    let q0 = p as f64;
    let errs = exec.map(&pairs, |&(a, b)| -> Result<(f64, f64)> {
        let c = g.structure_constants_with(a, b, Exec::Sequential)?;
        let pa = phi_image(n, a.0, a.1, a.2, q0)?;
        let pb = phi_image(n, b.0, b.1, b.2, q0)?;
        let lhs = pa.mul(&pb);
        let mut rhs = BlockDiagonal::zeros(n);
        for (&s, &cs) in &c {
            if cs != 0 {
                rhs.add_scaled(&phi_image(n, a.0, b.1, s, q0)?, cs as f64);
            }
        }
        let rel = lhs.max_abs_diff(&rhs) / lhs.max_abs().max(rhs.max_abs()).max(1.0);
        Ok((rel, trace_error(&g, a, &pa, p)?))
    });
    let mut max_rel = 0.0f64;
    let mut max_trace = 0.0f64;
    for e in errs {
        let (r, t) = e?;
        max_rel = max_rel.max(r);
        max_trace = max_trace.max(t);
    }
    Ok(HomReport {
        n,
        p,
        pairs_checked: pairs.len(),
        exhaustive,
        max_relative_error: max_rel,
        max_trace_error: max_trace,
        passed: max_rel <= HOM_RTOL && max_trace <= HOM_RTOL,
    })
}

fn trace_error(g: &Grassmann, a: Triple, image: &BlockDiagonal, p: u64) -> Result<f64> {
    let m = g.m_matrix(a.0, a.1, a.2)?;
    let exact = (0..m.dim()).map(|x| m.get(x, x)).sum::<i64>() as f64;
    let via_blocks = image.weighted_trace(p)?;
    Ok((exact - via_blocks).abs() / exact.abs().max(1.0))
}

/// `Phi(M^t_{i,t}) Phi(M^t_{t,j}) = sum_u [u,t] Phi(M^u_{i,j})` for all admissible
/// `(i, j, t)`, returning the worst relative error.
pub fn common_subspace_product_error(n: usize, q0: f64) -> Result<f64> {
    let mut worst = 0.0f64;
    for (i, j, t) in basis_triples(n) {
        let lhs = phi_image(n, i, t, t, q0)?.mul(&phi_image(n, t, j, t, q0)?);
        let mut rhs = BlockDiagonal::zeros(n);
        for u in t..=i.min(j) {
            if is_valid_triple(n, i, j, u) {
                rhs.add_scaled(
                    &phi_image(n, i, j, u, q0)?,
                    qbinom_real(u as i64, t as i64, q0),
                );
            }
        }
        let scale = lhs.max_abs().max(rhs.max_abs()).max(1.0);
        worst = worst.max(lhs.max_abs_diff(&rhs) / scale);
    }
    Ok(worst)
}

/// Oracle structure constants as exact integers keyed by intersection dimension.
pub fn oracle_constants(n: usize, p: u64, a: Triple, b: Triple) -> Result<BTreeMap<usize, i64>> {
    Grassmann::shared(n, p)?.structure_constants(a, b)
}

/// Exact value `tau(n, i, t, k)` at an integer `q`.
pub fn tau_at(n: usize, i: usize, t: usize, k: usize, p: u64) -> Result<i64> {
    tau(n, i, t, k)
        .eval_integer(&BigInt::from(p))?
        .to_i64()
        .ok_or_else(|| Error::out_of_range("tau", format!("n={n} i={i} t={t} k={k}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qpoly::qint;
    use num_traits::One;

    #[test]
    fn beta_examples() {
        assert_eq!(beta(2, 1, 1, 0, 1), qint(2));
        for n in 0..=6 {
            for k in 0..=n / 2 {
                assert_eq!(beta(n, k, k, k, k), QPoly::q_pow(-((k * k) as i64)));
            }
        }
        assert!(beta(4, 1, 2, 0, 2).is_zero());
        for n in 0..=8 {
            for (i, j, t) in basis_triples(n) {
                for k in 0..=n / 2 {
                    assert_eq!(beta(n, i, j, k, t), beta(n, j, i, k, t));
                }
            }
        }
    }

    #[test]
    fn tau_examples() {
        for n in 1..=7 {
            assert_eq!(tau(n, 1, 0, 0), qint(n) - QPoly::one());
            for i in 0..=n / 2 {
                for k in 0..=i {
                    assert_eq!(tau(n, i, i, k), QPoly::one());
                }
            }
        }
        // lines of F_2^2 pairwise meet trivially: M^0_{1,1} = J - I on 3 points
        assert_eq!(tau_at(2, 1, 0, 1, 2).unwrap(), -1);
        assert_eq!(tau_at(2, 1, 0, 0, 2).unwrap(), 2);
    }

    #[test]
    fn tau_is_the_diagonal_block_scalar() {
        for n in 0..=6 {
            for i in 0..=n / 2 {
                for t in 0..=i {
                    for k in 0..=i {
                        let s = phi_scalar(n, i, i, t, k, 2.0).unwrap();
                        let v = tau(n, i, t, k).eval_real(2.0);
                        assert!(
                            (s - v).abs() <= 1e-9 * v.abs().max(1.0),
                            "n={n} i={i} t={t} k={k}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn dimension_identity() {
        for n in 0..=50 {
            assert!(dimension_check(n), "n={n}");
        }
        assert_eq!(basis_triples(2).len(), 10);
        assert_eq!(basis_triples(3).len(), 20);
    }

    #[test]
    fn qbinomial_inversion() {
        for n in 0..=10 {
            assert!(qbi_polynomial_check(n, 7));
        }
        let zero = vec![QPoly::zero(); 5];
        assert_eq!(qbinomial_inverse(&qbinomial_transform(&zero)), zero);
        let mut delta = vec![QPoly::zero(); 6];
        delta[3] = QPoly::one();
        let b = qbinomial_transform(&delta);
        for (t, bt) in b.iter().enumerate() {
            assert_eq!(*bt, qbinom(3, t as i64));
        }
        assert_eq!(qbinomial_inverse(&b), delta);
    }

    #[test]
    fn identity_slices() {
        for n in 0..=4 {
            for i in 0..=n {
                let img = phi_image(n, i, i, i, 2.0).unwrap();
                for (k, b) in img.blocks.iter().enumerate() {
                    for r in 0..b.dim() {
                        for c in 0..b.dim() {
                            let want = if k <= i && i + k <= n && r == i - k && c == i - k {
                                1.0
                            } else {
                                0.0
                            };
                            assert!((b.get(r, c) - want).abs() < 1e-12, "n={n} i={i} k={k}");
                        }
                    }
                }
            }
        }
        let img = phi_image(3, 0, 0, 0, 3.0).unwrap();
        assert_eq!(img.blocks[0].get(0, 0), 1.0);
        assert_eq!(img.blocks[1].max_abs(), 0.0);
        assert!(phi_image(2, 2, 2, 1, 2.0).is_err());
    }

    #[test]
    fn adjoint_symmetry() {
        for n in 0..=5 {
            for (i, j, t) in basis_triples(n) {
                let a = phi_image(n, i, j, t, 2.5).unwrap();
                let b = phi_image(n, j, i, t, 2.5).unwrap();
                assert!(a.transpose().max_abs_diff(&b) <= 1e-12 * a.max_abs().max(1.0));
            }
        }
    }

    #[test]
    fn laplacian_blocks() {
        for n in 0..=6 {
            for q in [1.0, 2.0, 3.0] {
                let d = laplacian_block_deviation(n, q).unwrap();
                assert!(d <= LAPLACIAN_ATOL, "n={n} q={q} dev={d}");
            }
        }
    }

    #[test]
    fn common_subspace_products() {
        for n in 0..=5 {
            assert!(common_subspace_product_error(n, 2.0).unwrap() <= HOM_RTOL);
        }
    }

    #[test]
    fn oracle_backed_checks() {
        assert!(tau_eigen_check(2, 2).unwrap());
        assert!(tau_eigen_check(3, 2).unwrap());
        let r = hom_check(2, 2, 1000, 0).unwrap();
        assert!(r.exhaustive && r.passed, "{r:?}");
        let r = hom_check(3, 2, 40, 0).unwrap();
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn json_blocks() {
        let v = serde_json::to_value(phi_image(2, 1, 1, 1, 2.0).unwrap()).unwrap();
        assert_eq!(v["n"], 2);
        assert_eq!(v["blocks"][0]["entries"][1][1], 1.0);
        assert_eq!(v["blocks"][1]["entries"][0][0], 1.0);
        assert_eq!(v["blocks"][1]["size"], 1);
    }
}
