use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use kmismatch::harness::generate::{gen_random, gen_similar};
use kmismatch::harness::{run, sweep, write_csv, CsvRow, InstanceConfig, StructureKind, Workload};
use kmismatch::Error;

#[derive(Parser)]
#[command(name = "kmismatch", version, about = "Dynamic k-mismatch structures: workloads, replay and counters")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded workload file.
    Gen(GenArgs),
    /// Replay a workload and report counters as CSV.
    Run(RunArgs),
    /// Replay a workload once per subepoch length x.
    Sweep(SweepArgs),
    /// Replay a workload in lockstep with the oracle.
    Verify(RunArgs),
}

#[derive(Args, Clone)]
struct InstanceArgs {
    #[arg(long, value_enum, default_value = "kangaroo")]
    structure: StructureKind,
    /// Text length.
    #[arg(long)]
    n: Option<usize>,
    /// Pattern length.
    #[arg(long)]
    m: Option<usize>,
    /// Mismatch threshold.
    #[arg(long)]
    k: Option<usize>,
    /// Subepoch length (tradeoff only).
    #[arg(long)]
    x: Option<usize>,
    /// Alphabet size [default: 2].
    #[arg(long)]
    sigma: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
    /// Check every query against the oracle.
    #[arg(long)]
    verify: bool,
    /// Spread epoch rebuilds over the updates (fastq, tradeoff).
    #[arg(long)]
    deamortize: bool,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// Number of operations.
    #[arg(long, default_value_t = 1000)]
    ops: usize,
    /// Fraction of operations that are queries.
    #[arg(long, default_value_t = 0.5)]
    query_ratio: f64,
    /// Tile the text from the pattern and resample this fraction of positions.
    #[arg(long)]
    noise: Option<f64>,
    /// Workload file to write; stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    /// Workload file produced by `gen`.
    #[arg(long)]
    workload: PathBuf,
    #[command(flatten)]
    instance: InstanceArgs,
    /// Also print one answer per query.
    #[arg(long)]
    answers: bool,
    /// CSV file to write; stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    workload: PathBuf,
    #[command(flatten)]
    instance: InstanceArgs,
    /// Comma-separated subepoch lengths.
    #[arg(long, value_delimiter = ',', required = true)]
    xs: Vec<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl InstanceArgs {
    fn fresh(&self) -> kmismatch::Result<InstanceConfig> {
        let missing = |f: &str| Error::InvalidConfig(format!("--{f} is required"));
        let n = self.n.ok_or_else(|| missing("n"))?;
        let m = self.m.ok_or_else(|| missing("m"))?;
        let k = self.k.ok_or_else(|| missing("k"))?;
        let mut c = InstanceConfig::new(n, m, k, self.sigma.unwrap_or(2), self.structure)
            .with_seed(self.seed.unwrap_or(0))
            .with_verify(self.verify)
            .with_deamortize(self.deamortize);
        c.x = self.x;
        c.validate()?;
        Ok(c)
    }

    /// The workload's configuration with the given flags applied on top.
    fn over(&self, base: &InstanceConfig) -> kmismatch::Result<InstanceConfig> {
        let mut c = *base;
        c.structure = self.structure;
        c.k = self.k.unwrap_or(c.k);
        c.x = self.x.or(c.x);
        c.seed = self.seed.unwrap_or(c.seed);
        c.verify = self.verify;
        c.deamortize = self.deamortize;
        if self.n.is_some_and(|n| n != c.n) || self.m.is_some_and(|m| m != c.m) {
            return Err(Error::InvalidConfig("--n and --m must match the workload".into()));
        }
        c.validate()?;
        Ok(c)
    }
}

fn output(path: &Option<PathBuf>) -> kmismatch::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(std::io::BufWriter::new(std::fs::File::create(p)?)),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn execute(cli: Cli) -> kmismatch::Result<()> {
    match cli.command {
        Command::Gen(args) => {
            let config = args.instance.fresh()?;
            let w = match args.noise {
                Some(noise) => gen_similar(&config, args.ops, args.query_ratio, noise.clamp(0.0, 1.0))?,
                None => gen_random(&config, args.ops, args.query_ratio)?,
            };
            w.write_to(output(&args.out)?)
        }
        Command::Run(args) => replay(args, false),
        Command::Verify(args) => replay(args, true),
        Command::Sweep(args) => {
            let w = Workload::load(&args.workload)?;
            let config = args.instance.over(&w.header.config)?;
            let reports = sweep(&w, &config, &args.xs)?;
            let rows: Vec<CsvRow> = reports.iter().map(|r| r.csv_row()).collect();
            write_csv(&rows, output(&args.out)?)
        }
    }
}

fn replay(args: RunArgs, verify: bool) -> kmismatch::Result<()> {
    let w = Workload::load(&args.workload)?;
    let mut config = args.instance.over(&w.header.config)?;
    config.verify |= verify;
    let report = run(&w, &config)?;
    if args.answers {
        let mut out = std::io::stdout().lock();
        for a in &report.answers {
            writeln!(out, "{a}")?;
        }
    }
    if verify {
        eprintln!("ok: {} operations, {} queries agree with the oracle", w.records.len(), report.answers.len());
    }
    write_csv(&[report.csv_row()], output(&args.out)?)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ Error::DivergenceDetected { .. }) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
