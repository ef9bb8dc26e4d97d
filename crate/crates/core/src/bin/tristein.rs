use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand as ClapSub};
use tristein::experiment::{patterns_csv, run, ConfigLayer, ExperimentConfig, Subcommand, OUT_DIR_ENV};
use tristein::{Error, ProxyVariant};

#[derive(Parser)]
#[command(name = "tristein", version, about = "Triangle-count normal approximation experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(ClapSub)]
enum Cmd {
    /// Exact moments of T and the regime rate
    Moments(Flags),
    /// Regime rates and the extended bound evaluated at them
    Bound(Flags),
    /// Monte Carlo Kolmogorov distance of W per n
    SampleDk(Flags),
    /// Exhaustive-enumeration reports (n <= 7)
    Oracle(Flags),
    /// Monte Carlo r-term estimates and the assembled bound
    Coupling(Flags),
    /// Four-triangle pattern tables (CSV on stdout)
    Patterns(Flags),
    /// Log-log slope fit over a prior records file
    RateFit(Flags),
    /// Independent proxy model: exact quantities and Monte Carlo dk
    Proxy(Flags),
}

#[derive(Args)]
struct Flags {
    /// TOML file with the same keys as the flags; flags win
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated vertex counts
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    /// `0.5`, `fixed:0.5`, `power:alpha` or `power:c:alpha`
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    streams: Option<usize>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    t_grid: Option<Vec<f64>>,
    /// JSON-lines file to append to (default: $TRISTEIN_OUT_DIR/<subcommand>.jsonl)
    #[arg(long)]
    output: Option<PathBuf>,
    /// r411, r412, r413 or r414
    #[arg(long)]
    anchor: Option<String>,
    /// literal or iid
    #[arg(long)]
    variant: Option<String>,
    /// Records file read by rate-fit
    #[arg(long)]
    input: Option<PathBuf>,
    /// Quantity selected by rate-fit
    #[arg(long)]
    quantity: Option<String>,
    /// theoretical, estimate or a fixed r̃₃
    #[arg(long)]
    policy: Option<String>,
    /// DKW confidence parameter
    #[arg(long)]
    delta: Option<f64>,
}

impl Flags {
    fn layer(self) -> Result<ConfigLayer, Error> {
        let variant = self
            .variant
            .map(|v| match v.as_str() {
                "literal" => Ok(ProxyVariant::Literal),
                "iid" => Ok(ProxyVariant::Iid),
                other => Err(Error::Config(format!("unknown proxy variant {other:?}"))),
            })
            .transpose()?;
        let flags = ConfigLayer {
            n: self.n,
            p: self.p,
            samples: self.samples,
            seed: self.seed,
            streams: self.streams,
            t_grid: self.t_grid,
            output: self.output,
            anchor: self.anchor,
            variant,
            input: self.input,
            quantity: self.quantity,
            policy: self.policy,
            delta: self.delta,
        };
        let base = match &self.config {
            Some(path) => {
                let text =
                    std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
                ConfigLayer::from_toml(&text)?
            }
            None => ConfigLayer::default(),
        };
        Ok(base.overlay(flags))
    }
}

fn execute(cmd: Cmd) -> Result<(), Error> {
    let (sub, flags) = match cmd {
        Cmd::Moments(f) => (Subcommand::Moments, f),
        Cmd::Bound(f) => (Subcommand::Bound, f),
        Cmd::SampleDk(f) => (Subcommand::SampleDk, f),
        Cmd::Oracle(f) => (Subcommand::Oracle, f),
        Cmd::Coupling(f) => (Subcommand::Coupling, f),
        Cmd::Patterns(f) => (Subcommand::Patterns, f),
        Cmd::RateFit(f) => (Subcommand::RateFit, f),
        Cmd::Proxy(f) => (Subcommand::Proxy, f),
    };
    let out_dir = std::env::var_os(OUT_DIR_ENV).map(PathBuf::from);
    let cfg = ExperimentConfig::resolve(sub, flags.layer()?, out_dir)?;
    let records = run(&cfg)?;
    let mut stdout = std::io::stdout().lock();
    if sub == Subcommand::Patterns {
        write!(stdout, "{}", patterns_csv(&cfg))?;
    } else {
        for r in &records {
            writeln!(stdout, "{}", serde_json::to_string(r)?)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match execute(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("tristein: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
