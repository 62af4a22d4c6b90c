//! Acceptance run: one line per criterion, non-zero exit if any fails.

use std::time::{Duration, Instant};

use qcube::commutant;
use qcube::oracle;
use qcube::signedsets;
use qcube::spectral;
use qcube::treecount::{self, evaluate_factored, f_poly, DEFAULT_MAX_BITS};
use qcube::{complexity_factored, qint, QPoly};

fn p(c: &[i64]) -> QPoly {
    QPoly::from_i64s(0, c)
}

fn mono(e: i64) -> QPoly {
    QPoly::q_pow(e)
}

fn table() -> Result<(), String> {
    let leading = |n: usize| -> QPoly { (1..=n).map(qint).product() };
    let f311 = p(&[4, 3, 1]);
    let f411 = p(&[8, 12, 12, 10, 4, 2]);
    let f422 = p(&[2, 2]);
    let f522 = p(&[4, 8, 7, 4, 1]);
    let f511 = p(&[16, 36, 53, 65, 69, 58, 42, 26, 13, 5, 1]);
    let one_q = p(&[1, 1]);
    let expected: Vec<(usize, Vec<(QPoly, QPoly)>)> = vec![
        (1, vec![]),
        (2, vec![(p(&[2]), mono(1))]),
        (3, vec![(f311.clone(), mono(1) * &one_q)]),
        (
            4,
            vec![
                (f411.clone(), mono(1) * p(&[1, 1, 1])),
                (f422.clone(), mono(2) * p(&[1, 0, 1])),
            ],
        ),
        (
            5,
            vec![
                (f511.clone(), mono(1) * &one_q * p(&[1, 0, 1])),
                (f522.clone(), mono(2) * qint(5)),
            ],
        ),
    ];
    for (n, factors) in expected {
        let e = complexity_factored(n);
        if e.leading != leading(n) {
            return Err(format!("leading factor of n={n}"));
        }
        let got: Vec<(QPoly, QPoly)> = e
            .factors
            .iter()
            .map(|f| (f.base.clone(), f.exponent.clone()))
            .collect();
        if got != factors {
            return Err(format!("factors of n={n}"));
        }
    }
    for (n, k, f) in [
        (3, 1, &f311),
        (4, 1, &f411),
        (4, 2, &f422),
        (5, 1, &f511),
        (5, 2, &f522),
    ] {
        if f_poly(n, k, k).map_err(|e| e.to_string())? != *f {
            return Err(format!("F({n},{k},{k})"));
        }
    }
    if complexity_factored(3).to_latex() != "[2][3](4+3q+q^2)^{q(1+q)}" {
        return Err("latex for n=3".into());
    }
    Ok(())
}

fn oracle_equality() -> Result<(), String> {
    for n in 1..=4 {
        for q in [2u64, 3] {
            let formula = evaluate_factored(&complexity_factored(n), q, DEFAULT_MAX_BITS)
                .map_err(|e| e.to_string())?;
            let brute = oracle::matrix_tree_count(n, q).map_err(|e| e.to_string())?;
            if formula != brute {
                return Err(format!("n={n} p={q}: formula {formula} oracle {brute}"));
            }
        }
    }
    Ok(())
}

fn classical_bridge() -> Result<(), String> {
    for n in 1..=10 {
        let at1 = evaluate_factored(&complexity_factored(n), 1, DEFAULT_MAX_BITS)
            .map_err(|e| e.to_string())?;
        let closed = treecount::classical_complexity(n).map_err(|e| e.to_string())?;
        let grouped = treecount::classical_factored(n)
            .and_then(|e| e.evaluate(1, DEFAULT_MAX_BITS))
            .map_err(|e| e.to_string())?;
        if at1 != closed || grouped != closed {
            return Err(format!("n={n}"));
        }
    }
    let mut observed = Vec::new();
    for n in 2..=4 {
        let brute = oracle::hypercube_tree_count(n);
        if brute != treecount::classical_complexity(n).unwrap() {
            return Err(format!("hypercube n={n}"));
        }
        observed.push(brute.to_string());
    }
    if observed[..2] != ["4".to_string(), "384".to_string()] {
        return Err(format!("hypercube values {observed:?}"));
    }
    println!("    hypercube tree counts n=2,3,4: {}", observed.join(", "));
    Ok(())
}

fn positivity() -> Result<(), String> {
    for n in 1..=12 {
        for k in 0..=n / 2 {
            for j in k..=n - k + 1 {
                let a = signedsets::f_via_p(n, k, j).map_err(|e| e.to_string())?;
                let b = f_poly(n, k, j).map_err(|e| e.to_string())?;
                if a != b {
                    return Err(format!("P mismatch at ({n},{k},{j})"));
                }
            }
        }
    }
    for n in 1..=16 {
        for k in 0..=n / 2 {
            for f in treecount::f_row(n, k).map_err(|e| e.to_string())?.iter() {
                if !f.is_nonneg() {
                    return Err(format!("negative coefficient n={n} k={k}"));
                }
            }
        }
    }
    Ok(())
}

fn signed_set_structure() -> Result<(), String> {
    for n in 1..=16 {
        let size = signedsets::gen_s(n).map_err(|e| e.to_string())?.len();
        let without = signedsets::count_without_top(n).map_err(|e| e.to_string())?;
        if size != 1 << n || without != 1 << (n - 1) {
            return Err(format!("n={n}: |S|={size}, without top={without}"));
        }
        if !signedsets::xy_recurrence_check(n, 10, 0).map_err(|e| e.to_string())? {
            return Err(format!("recurrence n={n}"));
        }
    }
    Ok(())
}

fn tridiagonal_determinants() -> Result<(), String> {
    for n in 0..=8 {
        for k in 0..=n / 2 {
            for j in k..=n - k + 1 {
                for q in [2.0, 3.0] {
                    if !spectral::lemma_det_check(n, k, j, q).map_err(|e| e.to_string())? {
                        return Err(format!("(n,k,j,q)=({n},{k},{j},{q})"));
                    }
                }
            }
        }
    }
    Ok(())
}

fn singular_values() -> Result<(), String> {
    match (0..=20).find(|&n| !spectral::sv_identity_check(n)) {
        Some(n) => Err(format!("n={n}")),
        None => Ok(()),
    }
}

fn reconstruction() -> Result<(), String> {
    for (n, q) in [(1, 2), (2, 2), (2, 3), (3, 2), (3, 3)] {
        let c = spectral::compare_spectrum(n, q).map_err(|e| e.to_string())?;
        if !c.matches() {
            return Err(format!("(n,p)=({n},{q}) max diff {:e}", c.max_abs_diff));
        }
    }
    Ok(())
}

fn commutant_suite() -> Result<(), String> {
    if let Some(n) = (0..=50).find(|&n| !commutant::dimension_check(n)) {
        return Err(format!("dimension identity n={n}"));
    }
    if let Some(n) = (0..=10).find(|&n| !commutant::qbi_polynomial_check(n, 0)) {
        return Err(format!("inversion n={n}"));
    }
    let limit = oracle::guard_vertices();
    let mut covered = Vec::new();
    for q in [2u64, 3, 5, 7] {
        for n in 1.. {
            if oracle::vertex_count(n, q) > limit {
                break;
            }
            if !oracle::commutator_check(n, q).map_err(|e| e.to_string())? {
                return Err(format!("[U,D] != H at (n,p)=({n},{q})"));
            }
            covered.push(format!("({n},{q})"));
        }
    }
    println!("    [U,D] = H checked at {}", covered.join(" "));
    for n in 1..=4 {
        for q in [2u64, 3] {
            let r = commutant::hom_check(n, q, 50, 0).map_err(|e| e.to_string())?;
            if !r.passed {
                return Err(format!("homomorphism at ({n},{q}): {r:?}"));
            }
            if !commutant::tau_eigen_check(n, q).map_err(|e| e.to_string())? {
                return Err(format!("tau spectrum at ({n},{q})"));
            }
        }
    }
    for n in 0..=6 {
        for q in [2.0, 3.0] {
            let d = commutant::laplacian_block_deviation(n, q).map_err(|e| e.to_string())?;
            if d > 1e-8 {
                return Err(format!("Laplacian blocks n={n} q={q}: {d:e}"));
            }
        }
    }
    Ok(())
}

fn scaling() -> Result<(), String> {
    let mut sizes = Vec::new();
    for n in [10usize, 20, 30, 40, 50] {
        let e = complexity_factored(n);
        let json = serde_json::to_string(&e).map_err(|e| e.to_string())?;
        sizes.push((n, json.len()));
    }
    let (_, big) = *sizes.last().unwrap();
    let growth: Vec<String> = sizes.iter().map(|(n, s)| format!("n={n}:{s}B")).collect();
    println!("    JSON size {}", growth.join(" "));
    // log-log slope between n=20 and n=50
    let slope = ((sizes[4].1 as f64) / (sizes[1].1 as f64)).ln() / (50f64 / 20.0).ln();
    println!("    empirical size exponent {slope:.2}");
    if big >= 100 * 1024 * 1024 {
        return Err(format!("JSON for n=50 is {big} bytes"));
    }
    Ok(())
}

type Criterion = (usize, &'static str, u64, fn() -> Result<(), String>);

fn main() {
    let criteria: [Criterion; 10] = [
        (1, "table reproduction", 1, table),
        (2, "oracle equality", 60, oracle_equality),
        (3, "classical bridge", 30, classical_bridge),
        (4, "positivity", 60, positivity),
        (5, "signed-set structure", 30, signed_set_structure),
        (6, "tridiagonal determinants", 10, tridiagonal_determinants),
        (7, "singular-value identities", 5, singular_values),
        (8, "spectrum reconstruction", 30, reconstruction),
        (9, "commutant", 120, commutant_suite),
        (10, "scaling to n=50", 10, scaling),
    ];
    let mut failed = 0;
    for (id, name, budget, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let verdict = match (&outcome, elapsed <= Duration::from_secs(budget)) {
            (Ok(()), true) => "PASS".to_string(),
            (Ok(()), false) => format!("FAIL (over {budget} s budget)"),
            (Err(e), _) => format!("FAIL ({e})"),
        };
        if !verdict.starts_with("PASS") {
            failed += 1;
        }
        println!(
            "criterion {id:2} {name}: {verdict} [{:.2} s / {budget} s]",
            elapsed.as_secs_f64()
        );
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
