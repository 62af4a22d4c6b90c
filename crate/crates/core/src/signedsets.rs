//! Signed sets `S(n)` and the generating polynomial `P(n, x, y, z)`.
//!
//! `S(n)` is a family of subsets of `{1..n} ∪ {1̄..n̄}` defined by
//! `S(0) = {∅}`, `S(1) = {{1}, {1̄}}` and
//!
//! ```text
//! S(n+1) = {X ∪ {n+1} : X ∈ S(n)}
//!        ∪ {X ∪ {(n+1)̄} : X ∈ S(n), n ∉ X}
//!        ∪ S(n-1)
//! ```
//!
//! Substituting q-integers into `P` gives a manifestly positive expression
//! for every `F_q(n, k, j)`.

use std::collections::HashMap;
use std::ops::{Add, Mul};
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::qpoly::{qint, QPoly};

/// Largest `n` for which `S(n)` (of size `2^n`) may be materialized.
pub const MAX_N: usize = 24;

/// An element of `S(n)`: bit `i - 1` of `plain` marks `i`, of `barred` marks `ī`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignedSet {
    pub plain: u32,
    pub barred: u32,
}

impl SignedSet {
    pub fn plain_indices(&self) -> Vec<usize> {
        indices(self.plain)
    }

    pub fn barred_indices(&self) -> Vec<usize> {
        indices(self.barred)
    }

    pub fn len(&self) -> usize {
        (self.plain.count_ones() + self.barred.count_ones()) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.plain == 0 && self.barred == 0
    }

    pub fn contains_plain(&self, i: usize) -> bool {
        i >= 1 && self.plain & (1 << (i - 1)) != 0
    }

    /// Membership conditions every element of `S(n)` satisfies.
    pub fn is_valid_for(&self, n: usize) -> bool {
        let mask = if n >= 32 { u32::MAX } else { (1u32 << n) - 1 };
        self.plain & self.barred == 0
            && self.plain & !mask == 0
            && self.barred & !mask == 0
            && self.len() <= n
            && (n - self.len()).is_multiple_of(2)
    }
}

fn indices(mask: u32) -> Vec<usize> {
    (0..32)
        .filter(|b| mask & (1 << b) != 0)
        .map(|b| b + 1)
        .collect()
}

impl Serialize for SignedSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            plain: Vec<usize>,
            barred: Vec<usize>,
        }
        Repr {
            plain: self.plain_indices(),
            barred: self.barred_indices(),
        }
        .serialize(serializer)
    }
}

type SetCache = RwLock<HashMap<usize, Arc<Vec<SignedSet>>>>;

fn cache() -> &'static SetCache {
    static CACHE: OnceLock<SetCache> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// `S(n)` in recursion order.
pub fn gen_s(n: usize) -> Result<Arc<Vec<SignedSet>>> {
    if n > MAX_N {
        return Err(Error::out_of_range(
            "n",
            format!("S(n) limited to n <= {MAX_N}, got {n}"),
        ));
    }
    if let Some(s) = cache().read().unwrap().get(&n) {
        return Ok(s.clone());
    }
    let mut older: Vec<SignedSet> = vec![SignedSet::default()];
    let mut newer: Vec<SignedSet> = vec![
        SignedSet {
            plain: 1,
            barred: 0,
        },
        SignedSet {
            plain: 0,
            barred: 1,
        },
    ];
    let result = if n == 0 {
        older
    } else {
        for m in 1..n {
            // S(m+1) from S(m) = newer and S(m-1) = older
            let top = 1u32 << m;
            let prev = 1u32 << (m - 1);
            let mut next = Vec::with_capacity(newer.len() * 2);
            next.extend(newer.iter().map(|x| SignedSet {
                plain: x.plain | top,
                ..*x
            }));
            next.extend(
                newer
                    .iter()
                    .filter(|x| x.plain & prev == 0)
                    .map(|x| SignedSet {
                        barred: x.barred | top,
                        ..*x
                    }),
            );
            next.extend_from_slice(&older);
            older = std::mem::replace(&mut newer, next);
        }
        newer
    };
    let result = Arc::new(result);
    // 2^20 sets is 8 MiB; larger families are regenerated on demand.
    if n <= 20 {
        cache()
            .write()
            .unwrap()
            .entry(n)
            .or_insert_with(|| result.clone());
    }
    Ok(result)
}

/// Sum of `prod_{i ∈ X} x_i * prod_{ī ∈ X} y_i * z^((n - |X|)/2)` over `S(n)`.
///
/// `xs[i - 1]` and `ys[i - 1]` hold `x_i` and `y_i`.
pub fn p_eval<T>(n: usize, xs: &[T], ys: &[T], z: &T) -> Result<T>
where
    T: Clone
        + Zero
        + One
        + Send
        + Sync
        + for<'a> Mul<&'a T, Output = T>
        + for<'a> Add<&'a T, Output = T>,
{
    p_eval_with(n, xs, ys, z, Exec::default())
}

pub fn p_eval_with<T>(n: usize, xs: &[T], ys: &[T], z: &T, exec: Exec) -> Result<T>
where
    T: Clone
        + Zero
        + One
        + Send
        + Sync
        + for<'a> Mul<&'a T, Output = T>
        + for<'a> Add<&'a T, Output = T>,
{
    if xs.len() < n || ys.len() < n {
        return Err(Error::InvalidParameter(format!(
            "P({n}, ...) needs at least {n} x and y values"
        )));
    }
    let sets = gen_s(n)?;
    let mut zpow = vec![T::one()];
    for _ in 0..n / 2 {
        let next = zpow.last().unwrap().clone() * z;
        zpow.push(next);
    }
    let term = |x: &SignedSet| -> T {
        let mut t = zpow[(n - x.len()) / 2].clone();
        let (mut pl, mut br) = (x.plain, x.barred);
        while pl != 0 {
            let b = pl.trailing_zeros() as usize;
            t = t * &xs[b];
            pl &= pl - 1;
        }
        while br != 0 {
            let b = br.trailing_zeros() as usize;
            t = t * &ys[b];
            br &= br - 1;
        }
        t
    };
    let chunks: Vec<&[SignedSet]> = sets.chunks(512).collect();
    let partial = exec.map(&chunks, |chunk| {
        chunk.iter().fold(T::zero(), |acc, x| acc + &term(x))
    });
    Ok(partial.iter().fold(T::zero(), |acc, x| acc + x))
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

/// `([n-k], [n-k-1], ..., [k], 0, ...)`, length `n + 1`.
pub fn dq_seq(n: usize, k: usize) -> Result<Vec<QPoly>> {
    check_nk(n, k)?;
    let mut d: Vec<QPoly> = (0..=n - 2 * k).map(|i| qint(n - k - i)).collect();
    d.resize(n + 1, QPoly::zero());
    Ok(d)
}

/// `([k], [k+1], ..., [n-k], 0, ...)`, length `n + 1`.
pub fn eq_seq(n: usize, k: usize) -> Result<Vec<QPoly>> {
    check_nk(n, k)?;
    let mut e: Vec<QPoly> = (0..=n - 2 * k).map(|i| qint(k + i)).collect();
    e.resize(n + 1, QPoly::zero());
    Ok(e)
}

/// `F_q(n, k, j)` as `P(n-k-j+1, d_q(n,k), e_q(n,k), [k][n-k+1])`.
pub fn f_via_p(n: usize, k: usize, j: usize) -> Result<QPoly> {
    f_via_p_with(n, k, j, Exec::default())
}

pub fn f_via_p_with(n: usize, k: usize, j: usize, exec: Exec) -> Result<QPoly> {
    check_nk(n, k)?;
    if j < k || j > n - k + 1 {
        return Err(Error::out_of_range(
            "j",
            format!("need {k} <= j <= {}, got {j}", n - k + 1),
        ));
    }
    let m = n + 1 - k - j;
    let d = dq_seq(n, k)?;
    let e = eq_seq(n, k)?;
    let z = qint(k) * qint(n - k + 1);
    p_eval_with(m, &d[..m], &e[..m], &z, exec)
}

/// Evaluator signature used by [`xy_recurrence_check_with`].
pub type PEvaluator<'a> =
    dyn Fn(usize, &[BigInt], &[BigInt], &BigInt) -> Result<BigInt> + Sync + 'a;

/// Checks `P(n+1) = (x_{n+1} + y_{n+1}) P(n) - (x_n y_{n+1} - z) P(n-1)` at
/// `trials` random integer points in `[-1000, 1000]`.
pub fn xy_recurrence_check(n: usize, trials: usize, seed: u64) -> Result<bool> {
    xy_recurrence_check_with(n, trials, seed, &|m, xs, ys, z| p_eval(m, xs, ys, z))
}

pub fn xy_recurrence_check_with(
    n: usize,
    trials: usize,
    seed: u64,
    eval: &PEvaluator<'_>,
) -> Result<bool> {
    if n < 1 || n + 1 > MAX_N {
        return Err(Error::out_of_range(
            "n",
            format!("need 1 <= n < {MAX_N}, got {n}"),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (n as u64).rotate_left(32));
    for _ in 0..trials {
        let mut draw = || BigInt::from(rng.gen_range(-1000i64..=1000));
        let xs: Vec<BigInt> = (0..=n).map(|_| draw()).collect();
        let ys: Vec<BigInt> = (0..=n).map(|_| draw()).collect();
        let z = draw();
        let lhs = eval(n + 1, &xs, &ys, &z)?;
        let p_n = eval(n, &xs, &ys, &z)?;
        let p_prev = eval(n - 1, &xs, &ys, &z)?;
        let rhs = (&xs[n] + &ys[n]) * p_n - (&xs[n - 1] * &ys[n] - &z) * p_prev;
        if lhs != rhs {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `P(n-2k+1, d(n,k), e(n,k), k(n-k+1)) == 2^(n-2k+1) * k (k+1) ... (n-k)` at `q = 1`.
pub fn q1_identity_check(n: usize, k: usize) -> Result<bool> {
    if k < 1 || 2 * k > n {
        return Err(Error::out_of_range(
            "k",
            format!("need 1 <= k <= n/2, got n={n}, k={k}"),
        ));
    }
    let m = n - 2 * k + 1;
    let d: Vec<BigInt> = (0..m).map(|i| BigInt::from(n - k - i)).collect();
    let e: Vec<BigInt> = (0..m).map(|i| BigInt::from(k + i)).collect();
    let z = BigInt::from(k * (n - k + 1));
    let lhs = p_eval(m, &d, &e, &z)?;
    let rhs: BigInt = (k..=n - k).map(BigInt::from).product::<BigInt>() << m;
    Ok(lhs == rhs)
}

/// Number of elements of `S(n)` that do not contain the plain index `n`.
pub fn count_without_top(n: usize) -> Result<usize> {
    Ok(gen_s(n)?.iter().filter(|x| !x.contains_plain(n)).count())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(plain: &[usize], barred: &[usize]) -> SignedSet {
        let mask = |v: &[usize]| v.iter().fold(0u32, |m, &i| m | (1 << (i - 1)));
        SignedSet {
            plain: mask(plain),
            barred: mask(barred),
        }
    }

    fn sorted(v: &[SignedSet]) -> Vec<SignedSet> {
        let mut v = v.to_vec();
        v.sort();
        v
    }

    #[test]
    fn small_families() {
        assert_eq!(*gen_s(0).unwrap(), vec![SignedSet::default()]);
        assert_eq!(
            sorted(&gen_s(2).unwrap()),
            sorted(&[
                set(&[], &[]),
                set(&[1, 2], &[]),
                set(&[2], &[1]),
                set(&[], &[1, 2])
            ])
        );
        let s3 = [
            set(&[1], &[]),
            set(&[], &[1]),
            set(&[3], &[]),
            set(&[], &[3]),
            set(&[1, 2, 3], &[]),
            set(&[2, 3], &[1]),
            set(&[3], &[1, 2]),
            set(&[], &[1, 2, 3]),
        ];
        assert_eq!(sorted(&gen_s(3).unwrap()), sorted(&s3));
        assert!(gen_s(MAX_N + 1).is_err());
    }

    #[test]
    fn sizes_and_membership() {
        for n in 0..=16 {
            let s = gen_s(n).unwrap();
            assert_eq!(s.len(), 1 << n);
            assert!(s.iter().all(|x| x.is_valid_for(n)), "n={n}");
            let mut uniq = s.to_vec();
            uniq.sort();
            uniq.dedup();
            assert_eq!(uniq.len(), s.len());
            if n >= 1 {
                assert_eq!(count_without_top(n).unwrap(), 1 << (n - 1));
            }
        }
    }

    #[test]
    fn p_small_values() {
        let one = [BigInt::one()];
        assert_eq!(
            p_eval(0, &one[..0], &one[..0], &BigInt::from(7)).unwrap(),
            BigInt::one()
        );
        assert_eq!(
            p_eval(1, &one, &one, &BigInt::from(9)).unwrap(),
            BigInt::from(2)
        );
        // P(2) = z + x1 x2 + y1 x2 + y1 y2 with distinct primes as variables
        let xs = [BigInt::from(2), BigInt::from(3)];
        let ys = [BigInt::from(5), BigInt::from(7)];
        let z = BigInt::from(11);
        assert_eq!(
            p_eval(2, &xs, &ys, &z).unwrap(),
            BigInt::from(11 + 6 + 15 + 35)
        );
        assert!(p_eval(3, &xs, &ys, &z).is_err());
    }

    #[test]
    fn p3_matches_worked_expansion() {
        let xs: Vec<BigInt> = [2, 3, 5].iter().map(|&v| BigInt::from(v)).collect();
        let ys: Vec<BigInt> = [7, 11, 13].iter().map(|&v| BigInt::from(v)).collect();
        let z = BigInt::from(17);
        let (x1, x2, x3) = (2, 3, 5);
        let (y1, y2, y3) = (7, 11, 13);
        let expect =
            (x1 + y1 + x3 + y3) * 17 + (x1 * x2 * x3 + y1 * x2 * x3 + y1 * y2 * x3 + y1 * y2 * y3);
        assert_eq!(p_eval(3, &xs, &ys, &z).unwrap(), BigInt::from(expect));
    }

    #[test]
    fn d_and_e_sequences() {
        assert_eq!(
            dq_seq(3, 1).unwrap(),
            vec![qint(2), qint(1), QPoly::zero(), QPoly::zero()]
        );
        assert_eq!(
            eq_seq(3, 1).unwrap(),
            vec![qint(1), qint(2), QPoly::zero(), QPoly::zero()]
        );
        assert_eq!(
            dq_seq(3, 0).unwrap(),
            vec![qint(3), qint(2), qint(1), qint(0)]
        );
        assert_eq!(dq_seq(2, 1).unwrap()[0], qint(1));
        assert_eq!(eq_seq(2, 1).unwrap()[0], qint(1));
        assert!(dq_seq(3, 2).is_err());
    }

    #[test]
    fn f_via_p_worked_examples() {
        let expect = qint(1) * qint(3) + qint(2) * qint(1) + qint(1) * qint(1) + qint(1) * qint(2);
        assert_eq!(f_via_p(3, 1, 1).unwrap(), expect);
        assert_eq!(expect, QPoly::from_i64s(0, &[4, 3, 1]));
        assert_eq!(f_via_p(3, 0, 1).unwrap(), qint(3) * qint(2) * qint(1));
        assert_eq!(f_via_p(7, 2, 6).unwrap(), QPoly::one());
        assert_eq!(
            f_via_p(5, 2, 2).unwrap(),
            QPoly::from_i64s(0, &[4, 8, 7, 4, 1])
        );
        assert!(f_via_p(5, 1, 6).is_err());
    }

    #[test]
    fn xy_recurrence_and_mutation() {
        for n in 1..=8 {
            assert!(xy_recurrence_check(n, 10, 0).unwrap(), "n={n}");
        }
        // Drop the first summand of P(m) for the largest m only.
        let corrupted = |m: usize, xs: &[BigInt], ys: &[BigInt], z: &BigInt| -> Result<BigInt> {
            let full = p_eval(m, xs, ys, z)?;
            if m != 3 {
                return Ok(full);
            }
            let x = gen_s(m)?[0];
            let mut t = num_traits::pow(z.clone(), (m - x.len()) / 2);
            for i in x.plain_indices() {
                t *= &xs[i - 1];
            }
            for i in x.barred_indices() {
                t *= &ys[i - 1];
            }
            Ok(full - t)
        };
        assert!(!xy_recurrence_check_with(2, 10, 0, &corrupted).unwrap());
        assert!(xy_recurrence_check(0, 1, 0).is_err());
    }

    #[test]
    fn q1_identity_small() {
        // P(2, (2,1), (1,2), 3) = 3 + 2 + 1 + 2 = 8 = 2^2 * 1 * 2
        assert!(q1_identity_check(3, 1).unwrap());
        assert!(q1_identity_check(2, 1).unwrap());
        assert!(q1_identity_check(4, 2).unwrap());
        for n in 2..=14 {
            for k in 1..=n / 2 {
                assert!(q1_identity_check(n, k).unwrap(), "n={n} k={k}");
            }
        }
        assert!(q1_identity_check(4, 0).is_err());
    }

    #[test]
    fn json_dump() {
        let s = serde_json::to_string(&*gen_s(2).unwrap()).unwrap();
        assert!(s.contains(r#"{"plain":[2],"barred":[1]}"#), "{s}");
    }
}
