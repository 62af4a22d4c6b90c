use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use qcube::commutant;
use qcube::oracle::Grassmann;
use qcube::signedsets;
use qcube::spectral;
use qcube::treecount::{self, DEFAULT_MAX_BITS};
use qcube::verify::{self, Options, Suite};
use qcube::{complexity_factored, Error, Exec};

#[derive(Parser)]
#[command(
    name = "qcube",
    version,
    about = "Spanning trees of the q-analog of the n-cube"
)]
struct Cli {
    /// Worker threads for parallel kernels (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum Format {
    Json,
    Latex,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Factored spanning-tree count of C_q(n), optionally evaluated at an integer q.
    Complexity {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        #[arg(long)]
        q: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_MAX_BITS)]
        max_bits: u64,
    },
    /// The polynomial F_q(n, k, j).
    Fpoly {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        j: usize,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Run a verification suite; exit 0 if all checks pass, 1 on failure, 2 on guard errors.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 4)]
        nmax: usize,
        #[arg(long = "prime")]
        primes: Vec<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        /// Include wall-clock timings (makes output non-reproducible).
        #[arg(long)]
        timings: bool,
    },
    /// Block eigenvalue data for every n <= nmax and each q.
    Conjecture {
        #[arg(long)]
        nmax: usize,
        #[arg(long = "q")]
        qs: Vec<f64>,
    },
    /// Eigenvalues of the tridiagonal Laplacian blocks of C_q(n).
    Spectrum {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        q: f64,
    },
    /// Block images of the orbit matrix M^t_{i,j}.
    Blocks {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        i: usize,
        #[arg(long)]
        j: usize,
        #[arg(long)]
        t: usize,
        #[arg(long)]
        q: f64,
    },
    /// Exact block coefficient beta(n, i, j, k, t).
    Beta {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        i: usize,
        #[arg(long)]
        j: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        t: usize,
    },
    /// Exact q-Johnson eigenvalue tau(n, i, t, k).
    Tau {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        i: usize,
        #[arg(long)]
        t: usize,
        #[arg(long)]
        k: usize,
    },
    /// The signed-set family S(n) as JSON.
    SignedSets {
        #[arg(long)]
        n: usize,
    },
    /// Edge list of C_p(n) for a prime p.
    Edges {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        prime: u64,
    },
    /// Spanning-tree count of C_p(n) by brute force.
    Oracle {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        prime: u64,
    },
}

enum Failure {
    Usage(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

/// Writes to stdout, treating a closed pipe as a normal end of output.
fn emit(s: &str) -> Result<(), Failure> {
    let mut out = std::io::stdout().lock();
    match out.write_all(s.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Failure::Usage(e.to_string())),
        _ => Ok(()),
    }
}

fn print_json<T: Serialize>(v: &T) -> Result<(), Failure> {
    emit(&(serde_json::to_string_pretty(v)? + "\n"))
}

fn integer_q(q: f64) -> Result<u64, Failure> {
    if q >= 0.0 && q.fract() == 0.0 && q <= u64::MAX as f64 {
        Ok(q as u64)
    } else {
        Err(Failure::Usage(format!(
            "--q must be a nonnegative integer here, got {q}"
        )))
    }
}

fn complexity(n: usize, format: Format, q: Option<f64>, max_bits: u64) -> Result<(), Failure> {
    let e = complexity_factored(n);
    let value = match q {
        Some(q) => {
            let q = integer_q(q)?;
            Some((q, e.evaluate(q, max_bits)?))
        }
        None => None,
    };
    match format {
        Format::Json => {
            let mut out = json!({ "n": n, "factored": e });
            if let Some((q, v)) = &value {
                out["q"] = json!(q);
                out["value"] = json!(v.to_string());
            }
            print_json(&out)?;
        }
        Format::Latex | Format::Text => {
            let s = if format == Format::Latex {
                e.to_latex()
            } else {
                e.to_text()
            };
            let mut text = format!("{s}\n");
            if let Some((q, v)) = value {
                text.push_str(&format!("at q={q}: {v}\n"));
            }
            emit(&text)?;
        }
    }
    Ok(())
}

fn spectrum(n: usize, q: f64) -> Result<Value, Failure> {
    let integral = (q.fract() == 0.0 && q >= 1.0).then_some(q as u64);
    let mut blocks = Vec::new();
    for k in 0..=n / 2 {
        let b = spectral::tridiag_block(n, k, q)?;
        let mut entry = json!({
            "k": k,
            "size": b.size(),
            "eigenvalues": spectral::block_eigenvalues(&b),
            "multiplicity_poly": treecount::block_multiplicity(n, k),
        });
        if let Some(p) = integral {
            entry["multiplicity"] = json!(spectral::multiplicity_at(n, k, p)?);
        }
        blocks.push(entry);
    }
    Ok(json!({ "n": n, "q": q, "blocks": blocks }))
}

fn run(cli: Cli) -> Result<i32, Failure> {
    match cli.command {
        Command::Complexity {
            n,
            format,
            q,
            max_bits,
        } => complexity(n, format, q, max_bits)?,
        Command::Fpoly { n, k, j, format } => {
            let f = treecount::f_poly(n, k, j)?;
            match format {
                Format::Json => print_json(&f)?,
                Format::Latex => emit(&format!("{}\n", f.to_latex()))?,
                Format::Text => emit(&format!("{f}\n"))?,
            }
        }
        Command::Verify {
            suite,
            nmax,
            primes,
            seed,
            format,
            timings,
        } => {
            let suite: Suite = suite.parse()?;
            let opts = Options {
                nmax,
                primes: if primes.is_empty() {
                    vec![2, 3]
                } else {
                    primes
                },
                seed,
                timings,
                exec: Exec::default(),
            };
            let report = verify::run(suite, &opts);
            match format {
                Format::Json => print_json(&report)?,
                _ => emit(&report.to_text())?,
            }
            for c in report
                .checks
                .iter()
                .filter(|c| c.status != verify::Status::Pass)
            {
                eprintln!("{:?}: {} ({})", c.status, c.name, c.detail);
            }
            return Ok(report.exit_code());
        }
        Command::Conjecture { nmax, qs } => {
            let qs = if qs.is_empty() { vec![2.0, 3.0] } else { qs };
            print_json(&spectral::conjecture_scan(nmax, &qs)?)?;
        }
        Command::Spectrum { n, q } => print_json(&spectrum(n, q)?)?,
        Command::Blocks { n, i, j, t, q } => print_json(&commutant::phi_image(n, i, j, t, q)?)?,
        Command::Beta { n, i, j, k, t } => print_json(
            &json!({ "n": n, "i": i, "j": j, "k": k, "t": t, "beta": commutant::beta(n, i, j, k, t) }),
        )?,
        Command::Tau { n, i, t, k } => print_json(
            &json!({ "n": n, "i": i, "t": t, "k": k, "tau": commutant::tau(n, i, t, k) }),
        )?,
        Command::SignedSets { n } => print_json(&*signedsets::gen_s(n)?)?,
        Command::Edges { n, prime } => emit(&Grassmann::new(n, prime)?.edge_list())?,
        Command::Oracle { n, prime } => {
            let g = Grassmann::new(n, prime)?;
            print_json(&json!({
                "n": n,
                "p": prime,
                "vertices": g.len(),
                "spanning_trees": g.matrix_tree_count().to_string(),
            }))?
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        #[cfg(feature = "parallel")]
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
        #[cfg(not(feature = "parallel"))]
        let _ = jobs;
    }
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
