//! Brute-force ground truth over prime fields.
//!
//! Enumerates every subspace of `F_p^n` as a canonical reduced row-echelon
//! basis, tabulates all pairwise intersection dimensions once, and derives
//! from that table the up/down operators, the Laplacian of `C_p(n)`, the
//! orbit matrices `M^t_{i,j}` and their structure constants.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::ops::Range;
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::linalg::{bareiss_determinant, IntMatrix};
use crate::qpoly::{qbinom, qint};

/// Default cap on the number of vertices of an oracle graph.
pub const DEFAULT_GUARD_VERTICES: u64 = 1500;

/// Environment variable overriding [`DEFAULT_GUARD_VERTICES`].
pub const GUARD_ENV: &str = "QCUBE_GUARD_VERTICES";

pub fn guard_vertices() -> u64 {
    std::env::var(GUARD_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_GUARD_VERTICES)
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn inv_mod(a: u32, p: u32) -> u32 {
    // Fermat: a^(p-2)
    let (mut base, mut e, mut acc) = (a as u64 % p as u64, p as u64 - 2, 1u64);
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % p as u64;
        }
        base = base * base % p as u64;
        e >>= 1;
    }
    acc as u32
}

/// Reduced row-echelon form over `F_p`, zero rows dropped.
pub fn rref_mod_p(mut rows: Vec<Vec<u32>>, p: u32) -> Vec<Vec<u32>> {
    let ncols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..ncols {
        let Some(piv) = (rank..rows.len()).find(|&r| !rows[r][col].is_multiple_of(p)) else {
            continue;
        };
        rows.swap(rank, piv);
        let inv = inv_mod(rows[rank][col], p) as u64;
        for x in rows[rank].iter_mut() {
            *x = (*x as u64 * inv % p as u64) as u32;
        }
        for r in 0..rows.len() {
            if r == rank {
                continue;
            }
            let f = rows[r][col] as u64;
            if f == 0 {
                continue;
            }
            let pivot_row = rows[rank].clone();
            for (x, &y) in rows[r].iter_mut().zip(&pivot_row) {
                let sub = f * y as u64 % p as u64;
                *x = ((*x as u64 + p as u64 - sub) % p as u64) as u32;
            }
        }
        rank += 1;
    }
    rows.truncate(rank);
    rows
}

pub fn rank_mod_p(rows: Vec<Vec<u32>>, p: u32) -> usize {
    rref_mod_p(rows, p).len()
}

/// A subspace of `F_p^n`, stored as its RREF basis (one row per dimension).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Subspace {
    n: usize,
    p: u32,
    rref: Vec<Vec<u32>>,
}

impl Subspace {
    /// The span of `rows`, which may be dependent or unreduced.
    pub fn span(n: usize, p: u32, rows: Vec<Vec<u32>>) -> Result<Self> {
        if !is_prime(p as u64) {
            return Err(Error::NotPrime(p as u64));
        }
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidParameter(format!(
                "rows must have length {n}"
            )));
        }
        Ok(Subspace {
            n,
            p,
            rref: rref_mod_p(rows, p),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.rref.len()
    }

    pub fn rref(&self) -> &[Vec<u32>] {
        &self.rref
    }

    pub fn pivots(&self) -> Vec<usize> {
        self.rref
            .iter()
            .map(|r| {
                r.iter()
                    .position(|&x| x != 0)
                    .expect("rref rows are nonzero")
            })
            .collect()
    }

    /// True when the stored basis is in reduced row-echelon form.
    pub fn is_canonical(&self) -> bool {
        let piv = self.pivots();
        piv.windows(2).all(|w| w[0] < w[1])
            && self.rref.iter().zip(&piv).all(|(r, &c)| r[c] == 1)
            && piv.iter().enumerate().all(|(i, &c)| {
                self.rref
                    .iter()
                    .enumerate()
                    .all(|(r, row)| r == i || row[c] == 0)
            })
    }

    /// Text form used in edge dumps: rows joined by `;`, entries by `,`, `-` for zero.
    pub fn rref_string(&self) -> String {
        if self.rref.is_empty() {
            return "-".into();
        }
        self.rref
            .iter()
            .map(|r| r.iter().map(u32::to_string).collect::<Vec<_>>().join(","))
            .collect::<Vec<_>>()
            .join(";")
    }
}

pub fn intersection_dim(x: &Subspace, y: &Subspace) -> Result<usize> {
    if x.n != y.n || x.p != y.p {
        return Err(Error::MismatchedAmbient);
    }
    let stacked: Vec<Vec<u32>> = x.rref.iter().chain(&y.rref).cloned().collect();
    let sum = if stacked.is_empty() {
        0
    } else {
        rank_mod_p(stacked, x.p)
    };
    Ok(x.dim() + y.dim() - sum)
}

/// Number of vertices of `C_p(n)`, i.e. `sum_k [n,k]` at `q = p`.
pub fn vertex_count(n: usize, p: u64) -> u64 {
    let q = BigInt::from(p);
    (0..=n as i64)
        .map(|k| qbinom(n as i64, k).eval_integer(&q).unwrap())
        .sum::<BigInt>()
        .to_u64()
        .unwrap_or(u64::MAX)
}

fn check_inputs(n: usize, p: u64, limit: u64) -> Result<()> {
    if !is_prime(p) || p > u32::MAX as u64 {
        return Err(Error::NotPrime(p));
    }
    let v = vertex_count(n, p);
    if v > limit {
        return Err(Error::GuardExceeded { vertices: v, limit });
    }
    Ok(())
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for c in start..n {
            if n - c < k - cur.len() {
                break;
            }
            cur.push(c);
            rec(c + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

fn enumerate_dim(n: usize, p: u32, k: usize) -> Vec<Subspace> {
    let mut out = Vec::new();
    for pivots in combinations(n, k) {
        let free: Vec<(usize, usize)> = pivots
            .iter()
            .enumerate()
            .flat_map(|(r, &pc)| {
                let pivots = &pivots;
                (pc + 1..n)
                    .filter(move |c| !pivots.contains(c))
                    .map(move |c| (r, c))
            })
            .collect();
        let mut digits = vec![0u32; free.len()];
        loop {
            let mut rows = vec![vec![0u32; n]; k];
            for (r, &pc) in pivots.iter().enumerate() {
                rows[r][pc] = 1;
            }
            for (&(r, c), &d) in free.iter().zip(&digits) {
                rows[r][c] = d;
            }
            out.push(Subspace { n, p, rref: rows });
            // odometer, last position fastest
            let Some(pos) = digits.iter().rposition(|&d| d + 1 < p) else {
                break;
            };
            digits[pos] += 1;
            digits[pos + 1..].fill(0);
        }
    }
    out
}

/// All subspaces of `F_p^n`, grouped by dimension, each exactly once.
pub fn enumerate_subspaces(n: usize, p: u64) -> Result<Vec<Vec<Subspace>>> {
    check_inputs(n, p, guard_vertices())?;
    Ok((0..=n).map(|k| enumerate_dim(n, p as u32, k)).collect())
}

/// The subspace lattice of `F_p^n` with its intersection-dimension table.
#[derive(Debug)]
pub struct Grassmann {
    n: usize,
    p: u32,
    subspaces: Vec<Subspace>,
    dims: Vec<usize>,
    offsets: Vec<usize>,
    meet: Vec<u8>,
}

type GrassmannCache = RwLock<HashMap<(usize, u64), Arc<Grassmann>>>;

fn grassmann_cache() -> &'static GrassmannCache {
    static CACHE: OnceLock<GrassmannCache> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

impl Grassmann {
    pub fn new(n: usize, p: u64) -> Result<Self> {
        Self::with_limit(n, p, guard_vertices(), Exec::default())
    }

    /// Shared instance for `(n, p)`, built once per process.
    pub fn shared(n: usize, p: u64) -> Result<Arc<Self>> {
        check_inputs(n, p, guard_vertices())?;
        if let Some(g) = grassmann_cache().read().unwrap().get(&(n, p)) {
            return Ok(g.clone());
        }
        let g = Arc::new(Self::new(n, p)?);
        Ok(grassmann_cache()
            .write()
            .unwrap()
            .entry((n, p))
            .or_insert(g)
            .clone())
    }

    pub fn with_limit(n: usize, p: u64, limit: u64, exec: Exec) -> Result<Self> {
        check_inputs(n, p, limit)?;
        let pp = p as u32;
        let mut subspaces = Vec::new();
        let mut offsets = vec![0];
        let mut dims = Vec::new();
        for k in 0..=n {
            let layer = enumerate_dim(n, pp, k);
            dims.extend(std::iter::repeat_n(k, layer.len()));
            subspaces.extend(layer);
            offsets.push(subspaces.len());
        }
        let total = subspaces.len();
        let rows = exec.map_range(0..total, |a| {
            (a..total)
                .map(|b| intersection_dim(&subspaces[a], &subspaces[b]).unwrap() as u8)
                .collect::<Vec<u8>>()
        });
        let mut meet = vec![0u8; total * total];
        for (a, row) in rows.iter().enumerate() {
            for (off, &v) in row.iter().enumerate() {
                let b = a + off;
                meet[a * total + b] = v;
                meet[b * total + a] = v;
            }
        }
        Ok(Grassmann {
            n,
            p: pp,
            subspaces,
            dims,
            offsets,
            meet,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn len(&self) -> usize {
        self.subspaces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subspaces.is_empty()
    }

    pub fn subspaces(&self) -> &[Subspace] {
        &self.subspaces
    }

    pub fn dim_of(&self, idx: usize) -> usize {
        self.dims[idx]
    }

    /// Index range of the `k`-dimensional subspaces.
    pub fn layer(&self, k: usize) -> Range<usize> {
        self.offsets[k]..self.offsets[k + 1]
    }

    pub fn meet(&self, a: usize, b: usize) -> usize {
        self.meet[a * self.len() + b] as usize
    }

    /// `[k] + [n-k]` at `q = p`.
    pub fn expected_degree(&self, k: usize) -> i64 {
        let q = BigInt::from(self.p);
        (qint(k) + qint(self.n - k))
            .eval_integer(&q)
            .unwrap()
            .to_i64()
            .unwrap()
    }

    fn covers(&self, lower: usize, upper: usize) -> bool {
        self.dims[upper] == self.dims[lower] + 1 && self.meet(lower, upper) == self.dims[lower]
    }

    /// `U(X) = sum of covers of X`; column `X`, rows its covers.
    pub fn up_matrix(&self) -> IntMatrix {
        let n = self.len();
        let mut u = IntMatrix::zeros(n);
        for x in 0..n {
            if self.dims[x] == self.n {
                continue;
            }
            for y in self.layer(self.dims[x] + 1) {
                if self.covers(x, y) {
                    u.set(y, x, 1);
                }
            }
        }
        u
    }

    pub fn down_matrix(&self) -> IntMatrix {
        let n = self.len();
        let mut d = IntMatrix::zeros(n);
        for x in 0..n {
            if self.dims[x] == 0 {
                continue;
            }
            for y in self.layer(self.dims[x] - 1) {
                if self.covers(y, x) {
                    d.set(y, x, 1);
                }
            }
        }
        d
    }

    /// Diagonal `([k] - [n-k])` at `q = p`.
    pub fn h_matrix(&self) -> IntMatrix {
        let q = BigInt::from(self.p);
        let mut h = IntMatrix::zeros(self.len());
        for x in 0..self.len() {
            let k = self.dims[x];
            let v = (qint(k) - qint(self.n - k)).eval_integer(&q).unwrap();
            h.set(x, x, v.to_i64().unwrap());
        }
        h
    }

    /// `UD - DU == H`, entrywise and exact.
    pub fn commutator_check(&self) -> bool {
        let u = self.up_matrix();
        let d = self.down_matrix();
        let comm = u.mul(&d).sub(&d.mul(&u));
        comm == self.h_matrix()
    }

    /// Laplacian of `C_p(n)` built from the comparability-with-gap-one relation.
    pub fn laplacian(&self) -> IntMatrix {
        let n = self.len();
        let mut l = IntMatrix::zeros(n);
        for x in 0..n {
            let mut deg = 0;
            for y in 0..n {
                if self.covers(x, y) || self.covers(y, x) {
                    l.set(x, y, -1);
                    deg += 1;
                }
            }
            l.set(x, x, deg);
        }
        l
    }

    /// Spanning trees of `C_p(n)`: the Laplacian minor at the zero subspace.
    pub fn matrix_tree_count(&self) -> BigInt {
        self.matrix_tree_count_with(Exec::default())
    }

    pub fn matrix_tree_count_with(&self, exec: Exec) -> BigInt {
        bareiss_determinant(&self.laplacian().without(0), exec)
    }

    pub fn m_matrix(&self, i: usize, j: usize, t: usize) -> Result<IntMatrix> {
        check_triple(self.n, i, j, t)?;
        let mut m = IntMatrix::zeros(self.len());
        for x in self.layer(i) {
            for y in self.layer(j) {
                if self.meet(x, y) == t {
                    m.set(x, y, 1);
                }
            }
        }
        Ok(m)
    }

    /// Coefficients `c_s` with `M_a M_b = sum_s c_s M^s_{i,l}`, verified to be
    /// constant on every orbit class.
    pub fn structure_constants(
        &self,
        a: (usize, usize, usize),
        b: (usize, usize, usize),
    ) -> Result<BTreeMap<usize, i64>> {
        self.structure_constants_with(a, b, Exec::default())
    }

    pub fn structure_constants_with(
        &self,
        a: (usize, usize, usize),
        b: (usize, usize, usize),
        exec: Exec,
    ) -> Result<BTreeMap<usize, i64>> {
        let (i, j, t1) = a;
        let (j2, l, t2) = b;
        check_triple(self.n, i, j, t1)?;
        check_triple(self.n, j2, l, t2)?;
        if j != j2 {
            return Ok(BTreeMap::new());
        }
        let xs: Vec<usize> = self.layer(i).collect();
        let per_x = exec.map(&xs, |&x| {
            let mids: Vec<usize> = self.layer(j).filter(|&y| self.meet(x, y) == t1).collect();
            self.layer(l)
                .map(|z| {
                    let c = mids.iter().filter(|&&y| self.meet(y, z) == t2).count() as i64;
                    (self.meet(x, z), c)
                })
                .collect::<Vec<_>>()
        });
        let mut out: BTreeMap<usize, i64> = BTreeMap::new();
        for (s, c) in per_x.into_iter().flatten() {
            match out.get(&s) {
                Some(&prev) if prev != c => {
                    return Err(Error::OrbitInconsistency {
                        s,
                        first: prev,
                        second: c,
                    });
                }
                Some(_) => {}
                None => {
                    out.insert(s, c);
                }
            }
        }
        Ok(out)
    }

    /// One line per edge `X < Y`: `dimX rrefX dimY rrefY`.
    pub fn edge_list(&self) -> String {
        let mut s = String::new();
        for x in 0..self.len() {
            if self.dims[x] == self.n {
                continue;
            }
            for y in self.layer(self.dims[x] + 1) {
                if self.covers(x, y) {
                    let (a, b) = (&self.subspaces[x], &self.subspaces[y]);
                    let _ = writeln!(
                        s,
                        "{} {} {} {}",
                        a.dim(),
                        a.rref_string(),
                        b.dim(),
                        b.rref_string()
                    );
                }
            }
        }
        s
    }
}

/// `(i, j, t)` indexes a basis element of the commutant iff
/// `t <= i`, `t <= j` and `i + j - t <= n`.
pub fn is_valid_triple(n: usize, i: usize, j: usize, t: usize) -> bool {
    t <= i && t <= j && i + j - t <= n
}

fn check_triple(n: usize, i: usize, j: usize, t: usize) -> Result<()> {
    if is_valid_triple(n, i, j, t) {
        Ok(())
    } else {
        Err(Error::InvalidTriple { n, i, j, t })
    }
}

pub fn laplacian(n: usize, p: u64) -> Result<IntMatrix> {
    Ok(Grassmann::shared(n, p)?.laplacian())
}

pub fn matrix_tree_count(n: usize, p: u64) -> Result<BigInt> {
    Ok(Grassmann::shared(n, p)?.matrix_tree_count())
}

pub fn up_matrix(n: usize, p: u64) -> Result<IntMatrix> {
    Ok(Grassmann::shared(n, p)?.up_matrix())
}

pub fn down_matrix(n: usize, p: u64) -> Result<IntMatrix> {
    Ok(Grassmann::shared(n, p)?.down_matrix())
}

pub fn commutator_check(n: usize, p: u64) -> Result<bool> {
    Ok(Grassmann::shared(n, p)?.commutator_check())
}

pub fn m_matrix(n: usize, p: u64, i: usize, j: usize, t: usize) -> Result<IntMatrix> {
    Grassmann::shared(n, p)?.m_matrix(i, j, t)
}

pub fn structure_constants(
    n: usize,
    p: u64,
    a: (usize, usize, usize),
    b: (usize, usize, usize),
) -> Result<BTreeMap<usize, i64>> {
    Grassmann::shared(n, p)?.structure_constants(a, b)
}

/// Laplacian of the ordinary hypercube on subsets of `{1..n}` (bitmask order).
pub fn hypercube_laplacian(n: usize) -> IntMatrix {
    let size = 1usize << n;
    let mut l = IntMatrix::zeros(size);
    for x in 0..size {
        for b in 0..n {
            l.set(x, x ^ (1 << b), -1);
        }
        l.set(x, x, n as i64);
    }
    l
}

pub fn hypercube_tree_count(n: usize) -> BigInt {
    hypercube_laplacian(n).without(0).determinant()
}
