use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::SeedableRng;

use leftfact::analysis::{
    counterexample_probability, expected_low_residues, kurepa_scan_over, socialist_bruteforce,
    socialist_filter,
};
use leftfact::pipeline::{
    read_csv, scan_with_store, write_csv, CheckpointStore, DEFAULT_BLOCK_BUDGET,
};
use leftfact::{left_factorial_oracle, par, primes_in, scan_interval, verify_residue};

/// Left factorial residues `!p mod p` and Kurepa's conjecture.
#[derive(Debug, Parser)]
#[command(name = "leftfact", version)]
struct Cli {
    /// Worker threads (default: all available cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Residues for every prime in (from, to], as `p,residue` CSV.
    Scan(ScanArgs),
    /// One residue by the square-root verifier, or a sample over a range.
    Verify(VerifyArgs),
    /// One residue by direct O(p) summation.
    Oracle {
        #[arg(long)]
        prime: u64,
    },
    /// Socialist-prime filter and brute-force check over (from, to].
    Socialist {
        #[command(flatten)]
        interval: Interval,
    },
    /// Heuristic near-miss count and counterexample chance for (2^m, 2^n).
    Predict {
        #[arg(long)]
        from_exp: f64,
        #[arg(long)]
        to_exp: f64,
        /// Near-miss threshold: count primes with |r_p| < ell.
        #[arg(long, alias = "threshold", default_value_t = 100)]
        ell: u64,
    },
    /// Near-miss report for an existing CSV.
    Report {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 100)]
        threshold: u64,
        /// Print JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Args)]
struct Interval {
    /// Exclusive lower end.
    #[arg(long)]
    from: u64,
    /// Inclusive upper end.
    #[arg(long)]
    to: u64,
}

impl Interval {
    fn checked(&self) -> Result<(u64, u64)> {
        if self.from >= self.to {
            bail!("need --from < --to, got {} and {}", self.from, self.to);
        }
        Ok((self.from, self.to))
    }
}

#[derive(Debug, Args)]
struct ScanArgs {
    #[command(flatten)]
    interval: Interval,
    /// CSV destination (default: standard output).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Near-miss threshold for the report.
    #[arg(long, default_value_t = 100)]
    threshold: u64,
    /// Directory of prefix checkpoints to resume from and extend.
    #[arg(long)]
    checkpoint_dir: Option<PathBuf>,
    /// Width of the sub-intervals processed at once.
    #[arg(long, default_value_t = DEFAULT_BLOCK_BUDGET)]
    block_budget: u64,
    /// Also write the report as JSON.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long, conflicts_with_all = ["from", "to"])]
    prime: Option<u64>,
    /// Exclusive lower end of a range to sample.
    #[arg(long, requires = "to")]
    from: Option<u64>,
    #[arg(long, requires = "from")]
    to: Option<u64>,
    /// Primes drawn from the range (default: all of them).
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also compare each sampled residue against the O(p) oracle.
    #[arg(long)]
    check: bool,
}

/// Outcome of a successful run.
enum Found {
    Nothing,
    Counterexample,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(Found::Nothing) => ExitCode::SUCCESS,
        Ok(Found::Counterexample) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<Found> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            bail!("--threads must be positive");
        }
        if !par::configure_threads(threads) {
            eprintln!("warning: --threads ignored in this build");
        }
    }
    match cli.command {
        Command::Scan(args) => scan(args),
        Command::Verify(args) => verify(args),
        Command::Oracle { prime } => {
            if !leftfact::primes::is_prime(prime) {
                bail!("{prime} is not prime");
            }
            let r = leftfact::balance(left_factorial_oracle(prime), prime)?;
            println!("{}", r.value);
            Ok(Found::Nothing)
        }
        Command::Socialist { interval } => socialist(interval.checked()?),
        Command::Predict {
            from_exp,
            to_exp,
            ell,
        } => {
            let expected = expected_low_residues(from_exp, to_exp, ell)?;
            let chance = counterexample_probability(from_exp, to_exp)?;
            println!("expected primes with |r_p| < {ell}: {expected:.1}");
            println!("counterexample probability: {chance:.4}");
            Ok(Found::Nothing)
        }
        Command::Report {
            input,
            threshold,
            json,
        } => {
            let file =
                File::open(&input).with_context(|| format!("opening {}", input.display()))?;
            let records = read_csv(BufReader::new(file))
                .with_context(|| format!("reading {}", input.display()))?;
            let lo = records.first().map_or(0, |r| r.p);
            let hi = records.last().map_or(0, |r| r.p);
            let report = kurepa_scan_over(&records, threshold, lo, hi)?;
            if json {
                println!("{}", report.to_json()?);
            } else {
                println!("{report}");
            }
            Ok(found(report.counterexamples.is_empty()))
        }
    }
}

fn found(none: bool) -> Found {
    if none {
        Found::Nothing
    } else {
        Found::Counterexample
    }
}

fn scan(args: ScanArgs) -> Result<Found> {
    let (m, n) = args.interval.checked()?;
    let output = match &args.checkpoint_dir {
        Some(dir) => {
            let store = CheckpointStore::open(dir)
                .with_context(|| format!("opening checkpoint directory {}", dir.display()))?;
            scan_with_store(m, n, &store, args.block_budget)?
        }
        None => scan_interval(m, n, None, args.block_budget)?,
    };
    let report = kurepa_scan_over(&output.records, args.threshold, m, n)?;
    match &args.out {
        Some(path) => {
            let file =
                File::create(path).with_context(|| format!("creating {}", path.display()))?;
            write_csv(&output.records, BufWriter::new(file))?;
            println!("{report}");
        }
        None => {
            write_csv(&output.records, io::stdout().lock())?;
            eprintln!("{report}");
        }
    }
    if let Some(path) = &args.report {
        std::fs::write(path, report.to_json()?)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(found(report.counterexamples.is_empty()))
}

fn verify(args: VerifyArgs) -> Result<Found> {
    if let Some(p) = args.prime {
        if !leftfact::primes::is_prime(p) {
            bail!("{p} is not prime");
        }
        let r = verify_residue(p)?;
        if args.check {
            let want = left_factorial_oracle(p);
            if r.canonical() != want {
                bail!(
                    "verifier gives {} but the oracle gives {want} for p = {p}",
                    r.canonical()
                );
            }
        }
        println!("{}", r.value);
        return Ok(found(r.value != 0));
    }
    let (Some(from), Some(to)) = (args.from, args.to) else {
        bail!("give --prime or --from/--to");
    };
    let (from, to) = Interval { from, to }.checked()?;
    // the verifier needs p > 3
    let mut primes: Vec<u64> = primes_in(from.max(3), to).primes;
    if let Some(k) = args.samples {
        let mut rng = StdRng::seed_from_u64(args.seed);
        primes = primes.choose_multiple(&mut rng, k).copied().collect();
        primes.sort_unstable();
    }
    let mut out = BufWriter::new(io::stdout().lock());
    writeln!(out, "p,residue")?;
    let mut zero = false;
    for p in primes {
        let r = verify_residue(p)?;
        if args.check && r.canonical() != left_factorial_oracle(p) {
            bail!("verifier disagrees with the oracle at p = {p}");
        }
        zero |= r.value == 0;
        writeln!(out, "{p},{}", r.value)?;
    }
    out.flush()?;
    Ok(found(!zero))
}

fn socialist((m, n): (u64, u64)) -> Result<Found> {
    let records = scan_interval(m, n, None, DEFAULT_BLOCK_BUDGET)?.records;
    let (mut examined, mut passes, mut socialist_primes) = (0usize, Vec::new(), Vec::new());
    for rec in &records {
        if socialist_bruteforce(rec.p) {
            socialist_primes.push(rec.p);
        }
        if rec.p > 5 {
            examined += 1;
            if socialist_filter(rec.p, rec.residue.canonical())? {
                passes.push(rec.p);
            }
        }
    }
    println!("primes above 5 examined: {examined}");
    println!("passing (r_p - 2)^2 = 1: {}", passes.len());
    let passing_social: Vec<u64> = passes
        .iter()
        .copied()
        .filter(|p| socialist_primes.contains(p))
        .collect();
    println!(
        "of those, socialist by brute force: {}",
        passing_social.len()
    );
    println!("socialist primes in range: {socialist_primes:?}");
    if let Some(p) = socialist_primes
        .iter()
        .find(|&&p| p > 5 && !passes.contains(&p))
    {
        bail!("socialist prime {p} fails the necessary congruence");
    }
    Ok(Found::Nothing)
}
