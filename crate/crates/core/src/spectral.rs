//! Tridiagonal Laplacian blocks `N(k, n-k, n)` and spectral checks.
//!
//! Restricted to the span of one symmetric Jordan chain starting at rank
//! `k`, the Laplacian of `C_q(n)` is the symmetric tridiagonal matrix with
//! diagonal `[j] + [n-j]` and off-diagonal `-sqrt(q^k [j+1-k][n-k-j])`,
//! `k <= j <= n-k`. Everything here is evaluated at a real `q0 > 0`.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::linalg::{jacobi_eigenvalues, tridiagonal_eigenvalues, DenseMatrix};
use crate::oracle::{self, Grassmann};
use crate::qpoly::{qbinom, qint, qint_real, QPoly};
use crate::treecount::{block_multiplicity, f_poly};

/// Relative tolerance for determinant-vs-polynomial comparisons.
pub const DET_RTOL: f64 = 1e-8;

/// Absolute tolerance for matching a reconstructed spectrum.
pub const SPECTRUM_ATOL: f64 = 1e-6;

/// Dense eigensolves are limited to this many vertices.
pub const DENSE_GUARD_VERTICES: u64 = 400;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TridiagonalBlock {
    pub n: usize,
    pub k: usize,
    pub q0: f64,
    /// Entries `j = k..=n-k`.
    pub diag: Vec<f64>,
    /// Entries `j = k..n-k`, coupling `j` and `j+1`.
    pub offdiag: Vec<f64>,
}

impl TridiagonalBlock {
    pub fn size(&self) -> usize {
        self.diag.len()
    }

    pub fn max_norm(&self) -> f64 {
        self.diag
            .iter()
            .chain(&self.offdiag)
            .fold(0.0f64, |m, x| m.max(x.abs()))
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let m = self.size();
        let mut d = DenseMatrix::zeros(m);
        for i in 0..m {
            d.set(i, i, self.diag[i]);
        }
        for (i, &o) in self.offdiag.iter().enumerate() {
            d.set(i, i + 1, o);
            d.set(i + 1, i, o);
        }
        d
    }
}

fn check_q(q0: f64) -> Result<()> {
    if q0.is_finite() && q0 > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "q must be a positive real, got {q0}"
        )))
    }
}

fn check_k(n: usize, k: usize) -> Result<()> {
    if 2 * k > n {
        return Err(Error::out_of_range(
            "k",
            format!("k={k} exceeds n/2 for n={n}"),
        ));
    }
    Ok(())
}

pub fn tridiag_block(n: usize, k: usize, q0: f64) -> Result<TridiagonalBlock> {
    check_k(n, k)?;
    check_q(q0)?;
    let diag = (k..=n - k)
        .map(|j| qint_real(j, q0) + qint_real(n - j, q0))
        .collect();
    let qk = q0.powi(k as i32);
    let offdiag = (k..n - k)
        .map(|j| -(qk * qint_real(j + 1 - k, q0) * qint_real(n - k - j, q0)).sqrt())
        .collect();
    Ok(TridiagonalBlock {
        n,
        k,
        q0,
        diag,
        offdiag,
    })
}

/// Determinant of the trailing principal submatrix with rows `j_start..=n-k`.
pub fn det_tridiag(b: &TridiagonalBlock, j_start: usize) -> Result<f64> {
    let (k, n) = (b.k, b.n);
    if j_start < k || j_start > n - k + 1 {
        return Err(Error::out_of_range(
            "j",
            format!("need {k} <= j <= {} (n={n}, k={k})", n - k + 1),
        ));
    }
    // expand from the bottom: d(j) = a_j d(j+1) - b_j^2 d(j+2)
    let start = j_start - k;
    let m = b.size();
    let (mut next, mut after) = (1.0, 0.0);
    for i in (start..m).rev() {
        let off2 = if i + 1 < m {
            b.offdiag[i] * b.offdiag[i]
        } else {
            0.0
        };
        let cur = b.diag[i] * next - off2 * after;
        after = next;
        next = cur;
    }
    Ok(next)
}

fn hadamard_bound(b: &TridiagonalBlock, j_start: usize) -> f64 {
    let d = b.to_dense();
    (j_start - b.k..b.size())
        .map(|r| {
            (j_start - b.k..b.size())
                .map(|c| d.get(r, c).powi(2))
                .sum::<f64>()
                .sqrt()
        })
        .product()
}

pub fn lemma_det_check(n: usize, k: usize, j: usize, q0: f64) -> Result<bool> {
    let b = tridiag_block(n, k, q0)?;
    let det = det_tridiag(&b, j)?;
    let value = f_poly(n, k, j)?.eval_real(q0);
    // F(n,0,0) vanishes; measure against the Hadamard bound there
    let scale = if value != 0.0 {
        value.abs()
    } else {
        hadamard_bound(&b, j)
    };
    Ok((det - value).abs() <= DET_RTOL * scale)
}

/// `sqrt(q^k [u+1-k][n-k-u])`: the ratio of consecutive chain vector norms.
pub fn singular_value(n: usize, k: usize, u: usize, q0: f64) -> Result<f64> {
    check_k(n, k)?;
    check_q(q0)?;
    if u < k || u >= n - k {
        return Err(Error::out_of_range(
            "u",
            format!("need {k} <= u < {}", n - k),
        ));
    }
    Ok((q0.powi(k as i32) * qint_real(u + 1 - k, q0) * qint_real(n - k - u, q0)).sqrt())
}

/// `q^k [u+1-k][n-k-u] == [u+1][n-u] - [k][n-k+1]`.
pub fn sv_identity_a(n: usize, k: usize, u: usize) -> bool {
    let lhs = QPoly::q_pow(k as i64) * qint(u + 1 - k) * qint(n - k - u);
    let rhs = qint(u + 1) * qint(n - u) - qint(k) * qint(n - k + 1);
    lhs == rhs
}

/// `[u+1-k] [n-2k, u+1-k] == [n-k-u] [n-2k, u-k]`.
pub fn sv_identity_b(n: usize, k: usize, u: usize) -> bool {
    let m = (n - 2 * k) as i64;
    let (a, b) = ((u + 1 - k) as i64, (u - k) as i64);
    qint(u + 1 - k) * qbinom(m, a) == qint(n - k - u) * qbinom(m, b)
}

pub fn sv_identity_check(n: usize) -> bool {
    (0..=n / 2).all(|k| (k..n - k).all(|u| sv_identity_a(n, k, u) && sv_identity_b(n, k, u)))
}

pub fn block_eigenvalues(b: &TridiagonalBlock) -> Vec<f64> {
    tridiagonal_eigenvalues(&b.diag, &b.offdiag)
}

/// `[n,k] - [n,k-1]` at an integer `q`.
pub fn multiplicity_at(n: usize, k: usize, p: u64) -> Result<u64> {
    block_multiplicity(n, k)
        .eval_integer(&BigInt::from(p))?
        .to_u64()
        .ok_or_else(|| Error::out_of_range("multiplicity", format!("n={n} k={k} q={p}")))
}

/// Block eigenvalues at `q = p`, each repeated by its multiplicity, sorted.
pub fn block_spectrum(n: usize, p: u64) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for k in 0..=n / 2 {
        let eig = block_eigenvalues(&tridiag_block(n, k, p as f64)?);
        let mult = multiplicity_at(n, k, p)?;
        for _ in 0..mult {
            out.extend_from_slice(&eig);
        }
    }
    out.sort_by(f64::total_cmp);
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumComparison {
    pub n: usize,
    pub p: u64,
    pub from_blocks: Vec<f64>,
    pub oracle: Vec<f64>,
    pub max_abs_diff: f64,
}

impl SpectrumComparison {
    pub fn matches(&self) -> bool {
        self.from_blocks.len() == self.oracle.len() && self.max_abs_diff <= SPECTRUM_ATOL
    }
}

pub fn compare_spectrum(n: usize, p: u64) -> Result<SpectrumComparison> {
    let vertices = oracle::vertex_count(n, p);
    if vertices > DENSE_GUARD_VERTICES {
        return Err(Error::GuardExceeded {
            vertices,
            limit: DENSE_GUARD_VERTICES,
        });
    }
    let g = Grassmann::shared(n, p)?;
    let oracle = jacobi_eigenvalues(&g.laplacian().to_real());
    let from_blocks = block_spectrum(n, p)?;
    let max_abs_diff = if from_blocks.len() == oracle.len() {
        from_blocks
            .iter()
            .zip(&oracle)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
    } else {
        f64::INFINITY
    };
    Ok(SpectrumComparison {
        n,
        p,
        from_blocks,
        oracle,
        max_abs_diff,
    })
}

pub fn spectrum_reconstruction(n: usize, p: u64) -> Result<bool> {
    Ok(compare_spectrum(n, p)?.matches())
}

#[derive(Clone, Debug, Serialize)]
pub struct BlockEigen {
    pub k: usize,
    pub eigenvalues: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConjectureReport {
    pub n: usize,
    pub q: f64,
    pub blocks: Vec<BlockEigen>,
    /// `None` when there is only one block.
    pub min_cross_block_gap: Option<f64>,
    pub distinct_count: usize,
    pub conjectured_count: usize,
}

fn distinct(sorted: &[f64]) -> usize {
    let mut count = 0;
    let mut last: Option<f64> = None;
    for &x in sorted {
        match last {
            Some(l) if (x - l).abs() <= 1e-9 * l.abs().max(1.0) => {}
            _ => count += 1,
        }
        last = Some(x);
    }
    count
}

pub fn conjecture_report(n: usize, q0: f64) -> Result<ConjectureReport> {
    let blocks = (0..=n / 2)
        .map(|k| {
            Ok(BlockEigen {
                k,
                eigenvalues: block_eigenvalues(&tridiag_block(n, k, q0)?),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut gap: Option<f64> = None;
    for (a, ba) in blocks.iter().enumerate() {
        for bb in &blocks[a + 1..] {
            for x in &ba.eigenvalues {
                for y in &bb.eigenvalues {
                    let d = (x - y).abs();
                    gap = Some(gap.map_or(d, |g| g.min(d)));
                }
            }
        }
    }
    let mut all: Vec<f64> = blocks
        .iter()
        .flat_map(|b| b.eigenvalues.iter().copied())
        .collect();
    all.sort_by(f64::total_cmp);
    Ok(ConjectureReport {
        n,
        q: q0,
        min_cross_block_gap: gap,
        distinct_count: distinct(&all),
        conjectured_count: (n / 2 + 1) * (n.div_ceil(2) + 1),
        blocks,
    })
}

/// Data for every `1 <= n <= n_max` and every `q0` in `qs`, ordered by `(n, q)`.
pub fn conjecture_scan(n_max: usize, qs: &[f64]) -> Result<Vec<ConjectureReport>> {
    conjecture_scan_with(n_max, qs, Exec::default())
}

pub fn conjecture_scan_with(n_max: usize, qs: &[f64], exec: Exec) -> Result<Vec<ConjectureReport>> {
    let jobs: Vec<(usize, f64)> = (1..=n_max)
        .flat_map(|n| qs.iter().map(move |&q| (n, q)))
        .collect();
    exec.map(&jobs, |&(n, q)| conjecture_report(n, q))
        .into_iter()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-10 * b.abs().max(1.0)
    }

    #[test]
    fn block_entries() {
        let b = tridiag_block(2, 0, 2.0).unwrap();
        assert_eq!(b.diag, vec![3.0, 2.0, 3.0]);
        assert!(b.offdiag.iter().all(|&o| close(o, -(3f64).sqrt())));
        let b = tridiag_block(3, 1, 2.0).unwrap();
        assert_eq!(b.diag, vec![4.0, 4.0]);
        assert!(close(b.offdiag[0], -(2f64).sqrt()));
        let b = tridiag_block(4, 2, 3.0).unwrap();
        assert_eq!(b.size(), 1);
        assert!(b.offdiag.is_empty());
        assert!(close(b.diag[0], 8.0));
        assert!(tridiag_block(3, 2, 2.0).is_err());
        assert!(tridiag_block(3, 1, 0.0).is_err());
    }

    #[test]
    fn determinants() {
        let b = tridiag_block(3, 1, 2.0).unwrap();
        assert_eq!(det_tridiag(&b, 3).unwrap(), 1.0);
        assert!(close(det_tridiag(&b, 1).unwrap(), 14.0));
        let b = tridiag_block(5, 2, 2.0).unwrap();
        assert!(close(det_tridiag(&b, 2).unwrap(), 96.0));
        assert!(det_tridiag(&b, 1).is_err());
        assert!(det_tridiag(&b, 5).is_err());
        for n in 1..=8 {
            let b = tridiag_block(n, 0, 2.0).unwrap();
            let prod: f64 = (1..=n).map(|i| qint_real(i, 2.0)).product();
            assert!(close(det_tridiag(&b, 1).unwrap(), prod));
            // the whole block is singular
            assert!(det_tridiag(&b, 0).unwrap().abs() < 1e-8 * prod);
        }
    }

    #[test]
    fn determinant_identity_grid() {
        for n in 0..=8 {
            for k in 0..=n / 2 {
                for j in k..=n - k + 1 {
                    for q in [2.0, 3.0, 1.5] {
                        assert!(
                            lemma_det_check(n, k, j, q).unwrap(),
                            "n={n} k={k} j={j} q={q}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn singular_values() {
        assert!(close(singular_value(2, 0, 0, 1.0).unwrap(), 2f64.sqrt()));
        assert!(close(singular_value(3, 1, 1, 2.0).unwrap(), 2f64.sqrt()));
        assert!(singular_value(3, 1, 2, 2.0).is_err());
        assert!(sv_identity_a(3, 1, 1));
        for n in 0..=20 {
            assert!(sv_identity_check(n), "n={n}");
        }
    }

    #[test]
    fn eigenvalues_of_blocks() {
        let e = block_eigenvalues(&tridiag_block(2, 0, 1.0).unwrap());
        for (a, b) in e.iter().zip([0.0, 2.0, 4.0]) {
            assert!((a - b).abs() < 1e-9);
        }
        let e = block_eigenvalues(&tridiag_block(2, 0, 2.0).unwrap());
        for (a, b) in e.iter().zip([0.0, 3.0, 5.0]) {
            assert!((a - b).abs() < 1e-9);
        }
        for n in 1..=9 {
            for k in 0..=n / 2 {
                let b = tridiag_block(n, k, 2.5).unwrap();
                // an unreduced tridiagonal has simple spectrum
                assert!(b.offdiag.iter().all(|&o| o < 0.0));
                let e = block_eigenvalues(&b);
                assert!(e.windows(2).all(|w| w[0] <= w[1]));
                if n <= 6 {
                    assert!(e.windows(2).all(|w| w[0] < w[1]));
                }
                assert!(e[0] > -1e-9);
            }
        }
    }

    #[test]
    fn reconstruction_small() {
        for (n, p) in [(1, 2), (2, 2), (2, 3), (3, 2)] {
            let c = compare_spectrum(n, p).unwrap();
            assert!(c.matches(), "n={n} p={p} diff={}", c.max_abs_diff);
        }
        let c = compare_spectrum(3, 2).unwrap();
        assert_eq!(c.oracle.len(), 16);
        assert!(matches!(
            compare_spectrum(4, 5),
            Err(Error::GuardExceeded { .. })
        ));
    }

    #[test]
    fn conjecture_data() {
        let r = conjecture_report(2, 2.0).unwrap();
        assert_eq!((r.distinct_count, r.conjectured_count), (4, 4));
        assert!(close(r.min_cross_block_gap.unwrap(), 1.0));
        let r = conjecture_report(1, 7.0).unwrap();
        assert_eq!((r.distinct_count, r.conjectured_count), (2, 2));
        assert_eq!(r.min_cross_block_gap, None);
        let scan = conjecture_scan(4, &[2.0, 3.0]).unwrap();
        assert_eq!(scan.len(), 8);
        assert_eq!((scan[7].n, scan[7].q), (4, 3.0));
        let v = serde_json::to_value(&scan[0]).unwrap();
        for key in [
            "n",
            "q",
            "blocks",
            "min_cross_block_gap",
            "distinct_count",
            "conjectured_count",
        ] {
            assert!(v.get(key).is_some(), "{key}");
        }
    }
}
