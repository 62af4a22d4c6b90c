//! Verification suites and their machine-readable report.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use num_bigint::BigInt;
use serde::Serialize;

use crate::commutant;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::oracle;
use crate::signedsets;
use crate::spectral;
use crate::treecount::{self, complexity_factored, f_row, DEFAULT_MAX_BITS};

/// Largest `n` handled by the signed-set suite.
pub const SIGNED_SET_NMAX: usize = 16;

/// Largest `n` for which `P` is expanded symbolically.
pub const POSITIVITY_VIA_P_NMAX: usize = 12;

/// Largest `n` for the inversion check.
pub const QBI_NMAX: usize = 10;

/// Random pairs per `(n, p)` in the homomorphism check.
pub const HOM_SAMPLES: usize = 50;

/// Random substitutions per `n` in the recurrence check.
pub const XY_TRIALS: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Suite {
    Formula,
    Positivity,
    SignedSets,
    Spectral,
    Commutant,
    All,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::Formula,
        Suite::Positivity,
        Suite::SignedSets,
        Suite::Spectral,
        Suite::Commutant,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Formula => "formula",
            Suite::Positivity => "positivity",
            Suite::SignedSets => "signedsets",
            Suite::Spectral => "spectral",
            Suite::Commutant => "commutant",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "formula" => Suite::Formula,
            "positivity" => Suite::Positivity,
            "signedsets" => Suite::SignedSets,
            "spectral" => Suite::Spectral,
            "commutant" => Suite::Commutant,
            "all" => Suite::All,
            other => return Err(Error::InvalidParameter(format!("unknown suite {other:?}"))),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// A resource guard or precondition stopped the check.
    Error,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub status: Status,
    pub detail: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub millis: Option<u64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Params {
    pub nmax: usize,
    pub primes: Vec<u64>,
    pub seed: u64,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Counts {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub errors: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub suite: String,
    pub params: Params,
    pub counts: Counts,
    pub checks: Vec<CheckResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub total_millis: Option<u64>,
}

impl RunReport {
    pub fn all_passed(&self) -> bool {
        self.counts.failed == 0 && self.counts.errors == 0
    }

    /// 0 when everything passed, 1 on any failure, 2 when only guards tripped.
    pub fn exit_code(&self) -> i32 {
        if self.counts.failed > 0 {
            1
        } else if self.counts.errors > 0 {
            2
        } else {
            0
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            let tag = match c.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Error => "ERROR",
            };
            s.push_str(&format!("{tag:5} {} {}", c.name, c.detail));
            if let Some(ms) = c.millis {
                s.push_str(&format!(" ({ms} ms)"));
            }
            s.push('\n');
        }
        s.push_str(&format!(
            "{}: {} passed, {} failed, {} errors\n",
            self.suite, self.counts.passed, self.counts.failed, self.counts.errors
        ));
        s
    }
}

#[derive(Clone, Debug)]
pub struct Options {
    pub nmax: usize,
    pub primes: Vec<u64>,
    pub seed: u64,
    pub timings: bool,
    pub exec: Exec,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            nmax: 4,
            primes: vec![2, 3],
            seed: 0,
            timings: false,
            exec: Exec::default(),
        }
    }
}

type Outcome = Result<(bool, String)>;
type Job = Box<dyn Fn() -> Outcome + Send + Sync>;

struct Plan {
    jobs: Vec<(String, Job)>,
}

impl Plan {
    fn add<F>(&mut self, name: impl Into<String>, f: F)
    where
        F: Fn() -> Outcome + Send + Sync + 'static,
    {
        self.jobs.push((name.into(), Box::new(f)));
    }
}

fn ok(pass: bool, detail: impl Into<String>) -> Outcome {
    Ok((pass, detail.into()))
}

fn plan_formula(p: &mut Plan, o: &Options) {
    p.add("formula/table", || {
        let row = |n, k| f_row(n, k).map(|r| r[0].clone());
        let expect: [(usize, usize, &[i64]); 5] = [
            (3, 1, &[4, 3, 1]),
            (4, 1, &[8, 12, 12, 10, 4, 2]),
            (4, 2, &[2, 2]),
            (5, 2, &[4, 8, 7, 4, 1]),
            (5, 1, &[16, 36, 53, 65, 69, 58, 42, 26, 13, 5, 1]),
        ];
        for (n, k, c) in expect {
            if row(n, k)? != crate::QPoly::from_i64s(0, c) {
                return ok(false, format!("F({n},{k},{k}) differs"));
            }
        }
        ok(true, "F(3..5, k, k) reproduced")
    });
    for n in 1..=o.nmax {
        for &q in &o.primes {
            p.add(format!("formula/oracle n={n} p={q}"), move || {
                let formula = complexity_factored(n).evaluate(q, DEFAULT_MAX_BITS)?;
                let oracle = oracle::matrix_tree_count(n, q)?;
                ok(
                    formula == oracle,
                    format!("formula={formula} oracle={oracle}"),
                )
            });
        }
    }
    for n in 1..=o.nmax.max(1) {
        p.add(format!("formula/classical n={n}"), move || {
            let at1 = complexity_factored(n).evaluate(1, DEFAULT_MAX_BITS)?;
            let closed = treecount::classical_complexity(n)?;
            let grouped = treecount::classical_factored(n)?.evaluate(1, DEFAULT_MAX_BITS)?;
            let mut pass = at1 == closed && grouped == closed;
            if n <= 4 {
                pass &= oracle::hypercube_tree_count(n) == closed;
            }
            ok(pass, format!("c={closed}"))
        });
    }
}

fn plan_positivity(p: &mut Plan, o: &Options) {
    for n in 1..=o.nmax {
        let exec = o.exec;
        p.add(format!("positivity/coefficients n={n}"), move || {
            let mut count = 0;
            for k in 0..=n / 2 {
                for f in f_row(n, k)?.iter() {
                    count += 1;
                    if !f.is_nonneg() {
                        return ok(false, format!("negative coefficient at k={k}: {f}"));
                    }
                }
            }
            ok(true, format!("{count} polynomials"))
        });
        if n <= POSITIVITY_VIA_P_NMAX {
            p.add(format!("positivity/signed-sets n={n}"), move || {
                for k in 0..=n / 2 {
                    for j in k..=n - k + 1 {
                        if signedsets::f_via_p_with(n, k, j, exec)? != treecount::f_poly(n, k, j)? {
                            return ok(false, format!("mismatch at k={k} j={j}"));
                        }
                    }
                }
                ok(true, "F via P agrees")
            });
        }
    }
}

fn plan_signedsets(p: &mut Plan, o: &Options) {
    let seed = o.seed;
    for n in 1..=o.nmax.min(SIGNED_SET_NMAX) {
        p.add(format!("signedsets/sizes n={n}"), move || {
            let size = signedsets::gen_s(n)?.len();
            let without = signedsets::count_without_top(n)?;
            ok(
                size == 1 << n && without == 1 << (n - 1),
                format!("|S|={size} without-top={without}"),
            )
        });
        p.add(format!("signedsets/recurrence n={n}"), move || {
            let pass = signedsets::xy_recurrence_check(n, XY_TRIALS, seed)?;
            ok(pass, format!("{XY_TRIALS} random substitutions"))
        });
    }
}

fn plan_spectral(p: &mut Plan, o: &Options) {
    for n in 0..=o.nmax {
        for &q in &o.primes {
            p.add(format!("spectral/determinant n={n} q={q}"), move || {
                for k in 0..=n / 2 {
                    for j in k..=n - k + 1 {
                        if !spectral::lemma_det_check(n, k, j, q as f64)? {
                            return ok(false, format!("k={k} j={j}"));
                        }
                    }
                }
                ok(true, "tridiagonal determinants match F")
            });
        }
        p.add(format!("spectral/singular-values n={n}"), move || {
            ok(spectral::sv_identity_check(n), "exact identities")
        });
    }
    for n in 1..=o.nmax {
        for &q in &o.primes {
            p.add(format!("spectral/reconstruction n={n} p={q}"), move || {
                let c = spectral::compare_spectrum(n, q)?;
                ok(
                    c.matches(),
                    format!(
                        "{} eigenvalues, max diff {:.3e}",
                        c.oracle.len(),
                        c.max_abs_diff
                    ),
                )
            });
        }
    }
}

fn plan_commutant(p: &mut Plan, o: &Options) {
    let seed = o.seed;
    let exec = o.exec;
    for n in 0..=o.nmax {
        p.add(format!("commutant/dimension n={n}"), move || {
            ok(commutant::dimension_check(n), "sum of squared block sizes")
        });
        if n <= QBI_NMAX {
            p.add(format!("commutant/inversion n={n}"), move || {
                ok(commutant::qbi_polynomial_check(n, seed), "exact")
            });
        }
        for &q in &[2.0, 3.0] {
            p.add(
                format!("commutant/laplacian-blocks n={n} q={q}"),
                move || {
                    let d = commutant::laplacian_block_deviation(n, q)?;
                    ok(
                        d <= commutant::LAPLACIAN_ATOL,
                        format!("max deviation {d:.3e}"),
                    )
                },
            );
        }
    }
    for n in 1..=o.nmax {
        for &q in &o.primes {
            p.add(format!("commutant/commutator n={n} p={q}"), move || {
                ok(oracle::commutator_check(n, q)?, "UD - DU = H")
            });
            p.add(format!("commutant/tau n={n} p={q}"), move || {
                ok(commutant::tau_eigen_check(n, q)?, "q-Johnson eigenvalues")
            });
            p.add(format!("commutant/homomorphism n={n} p={q}"), move || {
                let r = commutant::hom_check_with(n, q, HOM_SAMPLES, seed, exec)?;
                ok(
                    r.passed,
                    format!(
                        "{} pairs{}, rel err {:.3e}, trace err {:.3e}",
                        r.pairs_checked,
                        if r.exhaustive { " (exhaustive)" } else { "" },
                        r.max_relative_error,
                        r.max_trace_error
                    ),
                )
            });
        }
    }
}

pub fn run(suite: Suite, opts: &Options) -> RunReport {
    let mut plan = Plan { jobs: Vec::new() };
    let suites: Vec<Suite> = if suite == Suite::All {
        Suite::ALL.to_vec()
    } else {
        vec![suite]
    };
    for s in suites {
        match s {
            Suite::Formula => plan_formula(&mut plan, opts),
            Suite::Positivity => plan_positivity(&mut plan, opts),
            Suite::SignedSets => plan_signedsets(&mut plan, opts),
            Suite::Spectral => plan_spectral(&mut plan, opts),
            Suite::Commutant => plan_commutant(&mut plan, opts),
            Suite::All => unreachable!(),
        }
    }
    let start = Instant::now();
    let checks = opts.exec.map(&plan.jobs, |(name, job)| {
        let t = Instant::now();
        let (status, detail) = match job() {
            Ok((true, d)) => (Status::Pass, d),
            Ok((false, d)) => (Status::Fail, d),
            Err(e) => (Status::Error, e.to_string()),
        };
        CheckResult {
            name: name.clone(),
            status,
            detail,
            millis: opts.timings.then(|| t.elapsed().as_millis() as u64),
        }
    });
    let mut counts = Counts {
        total: checks.len(),
        ..Counts::default()
    };
    for c in &checks {
        match c.status {
            Status::Pass => counts.passed += 1,
            Status::Fail => counts.failed += 1,
            Status::Error => counts.errors += 1,
        }
    }
    RunReport {
        suite: suite.name().to_string(),
        params: Params {
            nmax: opts.nmax,
            primes: opts.primes.clone(),
            seed: opts.seed,
        },
        counts,
        checks,
        total_millis: opts.timings.then(|| start.elapsed().as_millis() as u64),
    }
}

/// Number of checks of each status, keyed by suite prefix.
pub fn summary_by_suite(r: &RunReport) -> BTreeMap<String, Counts> {
    let mut out: BTreeMap<String, Counts> = BTreeMap::new();
    for c in &r.checks {
        let key = c.name.split('/').next().unwrap_or("").to_string();
        let e = out.entry(key).or_default();
        e.total += 1;
        match c.status {
            Status::Pass => e.passed += 1,
            Status::Fail => e.failed += 1,
            Status::Error => e.errors += 1,
        }
    }
    out
}

/// Exact tree count at an integer `q`, computed both ways.
pub fn formula_vs_oracle(n: usize, p: u64) -> Result<(BigInt, BigInt)> {
    Ok((
        complexity_factored(n).evaluate(p, DEFAULT_MAX_BITS)?,
        oracle::matrix_tree_count(n, p)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts(nmax: usize) -> Options {
        Options {
            nmax,
            primes: vec![2, 3],
            ..Options::default()
        }
    }

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL.iter().chain([&Suite::All]) {
            assert_eq!(s.name().parse::<Suite>().unwrap(), *s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn small_all_suite_passes() {
        let r = run(Suite::All, &opts(2));
        assert!(r.all_passed(), "{}", r.to_text());
        assert_eq!(r.exit_code(), 0);
        assert_eq!(summary_by_suite(&r).len(), 5);
    }

    #[test]
    fn guard_is_reported_per_check() {
        let r = run(
            Suite::Formula,
            &Options {
                nmax: 5,
                primes: vec![3],
                ..Options::default()
            },
        );
        let n5 = r
            .checks
            .iter()
            .find(|c| c.name == "formula/oracle n=5 p=3")
            .unwrap();
        assert_eq!(n5.status, Status::Error);
        assert!(
            r.checks
                .iter()
                .filter(|c| c.name.starts_with("formula/oracle"))
                .count()
                == 5
        );
        assert_eq!(r.exit_code(), 2);
    }

    #[test]
    fn report_is_deterministic_without_timings() {
        let a = serde_json::to_string(&run(Suite::SignedSets, &opts(5))).unwrap();
        let b = serde_json::to_string(&run(Suite::SignedSets, &opts(5))).unwrap();
        assert_eq!(a, b);
        assert!(!a.contains("millis"));
    }

    #[test]
    fn failures_outrank_guard_errors() {
        let mut r = run(Suite::SignedSets, &opts(2));
        assert_eq!(r.exit_code(), 0);
        r.counts.errors = 1;
        assert_eq!(r.exit_code(), 2);
        r.counts.failed = 1;
        assert_eq!(r.exit_code(), 1);
        assert!(!r.all_passed());
    }

    #[test]
    fn oracle_pair() {
        let (f, o) = formula_vs_oracle(3, 2).unwrap();
        assert_eq!(f, o);
        assert_eq!(f, BigInt::from(21) * num_traits::pow(BigInt::from(14), 6));
    }
}
