//! `tfree`: batch command-line access to the permanent, density, bounds and
//! synthesis computations. Output is JSON (one record per line) or CSV on
//! stdout; diagnostics go to stderr.

mod output;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use tfree_core::density::{
    bounds_report, census, inequality_suite, monte_carlo, truncated_rows, CensusOptions, DensityError, Predicate,
    CENSUS_CAP_LOG2,
};
use tfree_core::exec::Exec;
use tfree_core::levi::{
    enumerate_matchings, incidence_matrix, permanent_with, schrijver_bound, van_der_waerden_bound, LeviError,
    PermanentOptions,
};
use tfree_core::pg2::Plane;
use tfree_core::precise::{Interval, Reported};
use tfree_core::synth::{sample_transverse_free, tangency_system, DEFAULT_MAX_ATTEMPTS};

use output::{Format, Output};

#[derive(Parser, Debug)]
#[command(name = "tfree", version, about = "Transverse-free plane curves over finite fields")]
struct Cli {
    /// Worker threads for the parallel kernels; 0 means one per core.
    #[arg(long, global = true, env = "TFREE_THREADS", default_value_t = 0)]
    threads: usize,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Permanent of the point-line incidence matrix of PG(2, q).
    Permanent {
        #[arg(long)]
        q: u32,
        /// Required for q = 5, which takes a long time.
        #[arg(long)]
        allow_long: bool,
        /// File recording finished partitions; an existing file is resumed.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Exact density of a predicate by enumerating every form of degree d.
    Census {
        #[command(flatten)]
        target: Target,
        /// Refuse censuses larger than 2^cap-log2 forms.
        #[arg(long, default_value_t = CENSUS_CAP_LOG2)]
        cap_log2: u32,
    },
    /// Monte Carlo density estimate with a 95% Wilson interval.
    Sample {
        #[command(flatten)]
        target: Target,
        #[arg(long, default_value_t = 10_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Closed-form lower and upper bounds on the density of smooth transverse-free curves.
    Bounds {
        #[arg(long)]
        q: u32,
    },
    /// The auxiliary inequalities for every prime power up to q.
    Inequalities {
        /// Largest prime power checked.
        #[arg(long, default_value_t = 9)]
        q: u32,
    },
    /// Truncated tangency products for r = 1..=r.
    Truncated {
        #[arg(long)]
        q: u32,
        #[arg(long, default_value_t = 20)]
        r: u32,
    },
    /// A smooth transverse-free form tangent to each line at its matched point.
    Synth {
        #[arg(long)]
        q: u32,
        #[arg(long)]
        d: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Index of the point-line matching in lexicographic order.
        #[arg(long, default_value_t = 0)]
        matching: usize,
        #[arg(long, default_value_t = DEFAULT_MAX_ATTEMPTS)]
        max_attempts: u64,
    },
    /// Recompute the reference values; one JSON line per check.
    Verify,
}

#[derive(Args, Debug)]
struct Target {
    #[arg(long)]
    q: u32,
    #[arg(long)]
    d: u32,
    /// Predicate such as `tL`, `sQ(2)`, `F` or `tLP(0,1) & !sQ(e2:13)`.
    #[arg(long)]
    target: String,
}

/// Failure classes, mapped to exit codes.
#[derive(Debug)]
enum Failure {
    /// A check or synthesis did not succeed; the report is still printed.
    Mismatch(Output),
    Usage(String),
    Cap(String),
    Other(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Mismatch(_) | Failure::Other(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Cap(_) => 3,
        }
    }
}

impl std::fmt::Debug for Output {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Output({} records)", self.records.len())
    }
}

fn plane(q: u32) -> Result<Plane, Failure> {
    Plane::new(q).map_err(|e| Failure::Usage(e.to_string()))
}

fn density_failure(e: DensityError) -> Failure {
    match e {
        DensityError::SizeCap { exponent, cap_log2 } => Failure::Cap(format!(
            "census of q^{exponent} forms exceeds the cap 2^{cap_log2}; use `tfree sample` for an estimate"
        )),
        DensityError::Parse { .. } | DensityError::Plane(_) | DensityError::NoSamples => Failure::Usage(e.to_string()),
    }
}

fn reported(iv: &Interval) -> Value {
    serde_json::to_value(Reported::of(iv)).expect("serializable")
}

fn cmd_permanent(q: u32, allow_long: bool, checkpoint: Option<PathBuf>) -> Result<Output, Failure> {
    if !(2..=5).contains(&q) {
        return Err(Failure::Usage(format!("permanent needs q in 2..=5, got {q}")));
    }
    if q == 5 && !allow_long {
        return Err(Failure::Cap(
            "q = 5 sums 2^31 Ryser terms and runs for a long time; pass --allow-long \
             (and --checkpoint FILE to make it resumable)"
                .into(),
        ));
    }
    let m = incidence_matrix(q).map_err(|e| Failure::Other(e.into()))?;
    let n = m.n() as u32;
    let start = Instant::now();
    let opts = PermanentOptions {
        checkpoint,
        ..Default::default()
    };
    let per = permanent_with(&m, &opts).map_err(|e| match e {
        LeviError::DimensionCap { .. } => Failure::Cap(e.to_string()),
        _ => Failure::Other(e.into()),
    })?;
    let per_value = match u64::try_from(&per) {
        Ok(v) => json!(v),
        Err(_) => json!(per.to_string()),
    };
    Ok(Output::one(json!({
        "q": q,
        "n": n,
        "permanent": per_value,
        "schrijver_bound": reported(&Interval::exact(schrijver_bound(n, q + 1))),
        "van_der_waerden_bound": reported(&van_der_waerden_bound(q)),
        "elapsed_ms": start.elapsed().as_millis() as u64,
    })))
}

fn cmd_census(t: &Target, cap_log2: u32) -> Result<Output, Failure> {
    let plane = plane(t.q)?;
    let pred = Predicate::parse(&plane, &t.target).map_err(density_failure)?;
    let opts = CensusOptions {
        cap_log2,
        exec: Exec::Parallel,
    };
    let est = census(&plane, t.d, &pred, &opts).map_err(density_failure)?;
    Ok(Output::one(serde_json::to_value(est).expect("serializable")))
}

fn cmd_sample(t: &Target, samples: u64, seed: u64) -> Result<Output, Failure> {
    let plane = plane(t.q)?;
    let pred = Predicate::parse(&plane, &t.target).map_err(density_failure)?;
    let est = monte_carlo(&plane, t.d, &pred, samples, seed, Exec::Parallel).map_err(density_failure)?;
    Ok(Output::one(serde_json::to_value(est).expect("serializable")))
}

fn cmd_bounds(q: u32) -> Result<Output, Failure> {
    plane(q)?;
    let b = bounds_report(q);
    let mut v = serde_json::to_value(&b).expect("serializable");
    v["ordered"] = json!(b.is_ordered());
    Ok(Output::one(v))
}

fn cmd_inequalities(q_max: u32) -> Result<Output, Failure> {
    if q_max < 2 {
        return Err(Failure::Usage("inequalities needs q >= 2".into()));
    }
    let report = inequality_suite(q_max);
    let rows: Vec<Value> = report
        .rows
        .iter()
        .map(|r| serde_json::to_value(r).expect("serializable"))
        .collect();
    let out = Output::one(serde_json::to_value(&report).expect("serializable")).with_table(rows);
    if report.all_pass() {
        Ok(out)
    } else {
        Err(Failure::Mismatch(out))
    }
}

fn cmd_truncated(q: u32, r: u32) -> Result<Output, Failure> {
    plane(q)?;
    if r == 0 {
        return Err(Failure::Usage("truncated needs r >= 1".into()));
    }
    let rows = truncated_rows(q, r)
        .iter()
        .map(|row| serde_json::to_value(row).expect("serializable"))
        .collect();
    Ok(Output::lines(rows))
}

fn cmd_synth(q: u32, d: u32, seed: u64, matching: usize, max_attempts: u64) -> Result<Output, Failure> {
    let plane = plane(q)?;
    let m = incidence_matrix(q).map_err(|e| Failure::Other(e.into()))?;
    let sigma = enumerate_matchings(&m, matching.saturating_add(1))
        .nth(matching)
        .ok_or_else(|| Failure::Usage(format!("matching index {matching} is past the last matching")))?;
    let system = tangency_system(&plane, &sigma, d).map_err(|e| Failure::Usage(e.to_string()))?;
    match sample_transverse_free(&plane, &system, seed, max_attempts) {
        Ok(s) => {
            let mut v = serde_json::to_value(&s).expect("serializable");
            v["matching"] = json!(matching);
            v["verified"] = json!(true);
            Ok(Output::one(v))
        }
        Err(f) => {
            let v = json!({
                "q": q,
                "d": d,
                "seed": seed,
                "matching": matching,
                "sigma": sigma.sigma(),
                "kernel_dim": system.kernel_dim(),
                "failure": f,
            });
            Err(Failure::Mismatch(Output::one(v)))
        }
    }
}

fn run(cli: &Cli) -> Result<Output, Failure> {
    match &cli.cmd {
        Cmd::Permanent {
            q,
            allow_long,
            checkpoint,
        } => cmd_permanent(*q, *allow_long, checkpoint.clone()),
        Cmd::Census { target, cap_log2 } => cmd_census(target, *cap_log2),
        Cmd::Sample { target, samples, seed } => cmd_sample(target, *samples, *seed),
        Cmd::Bounds { q } => cmd_bounds(*q),
        Cmd::Inequalities { q } => cmd_inequalities(*q),
        Cmd::Truncated { q, r } => cmd_truncated(*q, *r),
        Cmd::Synth {
            q,
            d,
            seed,
            matching,
            max_attempts,
        } => cmd_synth(*q, *d, *seed, *matching, *max_attempts),
        Cmd::Verify => {
            let records = verify::run_all();
            let pass = records.iter().all(|r| r["pass"] == json!(true));
            let out = Output::lines(records);
            if pass {
                Ok(out)
            } else {
                Err(Failure::Mismatch(out))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("tfree: thread pool: {e}");
            return ExitCode::from(1);
        }
    };
    let result = pool.install(|| run(&cli));
    let mut stdout = std::io::stdout().lock();
    match result {
        Ok(out) => match out.write(cli.format, &mut stdout) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("tfree: {e}");
                ExitCode::from(1)
            }
        },
        Err(fail) => {
            let code = fail.code();
            match fail {
                Failure::Mismatch(out) => {
                    if let Err(e) = out.write(cli.format, &mut stdout) {
                        eprintln!("tfree: {e}");
                    }
                    eprintln!("tfree: check failed");
                }
                Failure::Usage(m) | Failure::Cap(m) => eprintln!("tfree: {m}"),
                Failure::Other(e) => eprintln!("tfree: {e:#}"),
            }
            ExitCode::from(code)
        }
    }
}
