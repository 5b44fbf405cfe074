use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anarchy::cli::{run, Action, ExperimentConfig, Report};
use anarchy::mechanism::Domain;
use anarchy::packing::InstanceKind;
use anarchy::rational::{parse, RatStr};
use anyhow::{bail, Context, Result};
use clap::Parser;

/// Relax-and-round mechanisms: solve, round, verify smoothness and lemma
/// bounds, reproduce counterexamples and run Hedge dynamics.
#[derive(Parser, Debug)]
#[command(name = "anarchy", version)]
struct Args {
    /// packing | flow | maxtsp | auctions
    domain: Domain,
    /// gen | solve | round | check-smoothness | check-lemma | counterexample | dynamics | paper-table
    action: Action,
    #[arg(long)]
    instance: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    /// Rounding slack as P/Q.
    #[arg(long)]
    eps: Option<String>,
    #[arg(long)]
    rounds: Option<usize>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    grid: Option<usize>,
    /// Random instances in a lemma sweep.
    #[arg(long)]
    count: Option<usize>,
    /// multi-unit | gap | sparse-random
    #[arg(long)]
    kind: Option<InstanceKind>,
    /// Generate symmetric (cardinality) auction valuations.
    #[arg(long)]
    symmetric: bool,
    /// Output file; `.json` or `.csv`.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Args {
    fn config(&self) -> Result<ExperimentConfig> {
        if let Some(p) = &self.instance {
            if !p.exists() {
                bail!("instance file {} does not exist", p.display());
            }
        }
        let eps = match &self.eps {
            Some(s) => Some(RatStr(parse(s).with_context(|| format!("--eps {s:?}"))?)),
            None => None,
        };
        Ok(ExperimentConfig {
            instance: self.instance.clone(),
            seed: self.seed,
            n: self.n,
            d: self.d,
            k: self.k,
            m: self.m,
            eps,
            rounds: self.rounds,
            eta: self.eta,
            grid: self.grid,
            count: self.count,
            kind: self.kind,
            symmetric: self.symmetric,
            ..ExperimentConfig::new(self.domain, self.action)
        })
    }
}

fn write(report: &Report, out: Option<&PathBuf>) -> Result<()> {
    let Some(path) = out else {
        let stdout = io::stdout();
        let mut lock = stdout.lock();
        match &report.artifact {
            Some(a) => {
                serde_json::to_writer_pretty(&mut lock, a)?;
                writeln!(lock)?;
            }
            None => report.write_csv(&mut lock)?,
        }
        return Ok(());
    };
    let file = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    match path.extension().and_then(|e| e.to_str()) {
        Some("json") => match &report.artifact {
            Some(a) => serde_json::to_writer_pretty(file, a)?,
            None => report.write_json(file)?,
        },
        Some("csv") => report.write_csv(file)?,
        _ => bail!("--out must end in .json or .csv"),
    }
    if report.artifact.is_some() {
        report.write_csv(io::stdout().lock())?;
    }
    Ok(())
}

fn broken_pipe(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        let io = c.downcast_ref::<io::Error>().or(match c.downcast_ref::<anarchy::Error>() {
            Some(anarchy::Error::Io(io)) => Some(io),
            _ => None,
        });
        io.is_some_and(|io| io.kind() == io::ErrorKind::BrokenPipe)
    })
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result = args
        .config()
        .and_then(|cfg| run(&cfg).map_err(anyhow::Error::from))
        .and_then(|report| write(&report, args.out.as_ref()).map(|_| report));
    match result {
        Ok(report) if report.violated() => ExitCode::from(2),
        Ok(_) => ExitCode::SUCCESS,
        Err(e) if broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
