use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use entloss::channels::{parse_zoo_spec, KrausChannel, KrausJson};
use entloss::recovery::{fig2_qutrit_curve, write_fig2_csv};
use entloss::state::{DensityMatrix, DensityMatrixJson};
use entloss::suite::{
    channel_report, parse_dims, run_verify, ChannelFamily, Format, ReportConfig, SuiteConfig, Tolerances,
};
use entloss::Error;

#[derive(Parser)]
#[command(name = "entloss", version, about = "Entanglement-loss bounds: verification suites, reports and figure data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum ChannelsArg {
    Random,
    Unitary,
}

#[derive(Subcommand)]
enum Command {
    /// Run the seeded verification suites and write a report.
    Verify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Dimension pairs, e.g. `2x2,2x3,3x3`.
        #[arg(long, default_value = "2x2,2x3,3x3")]
        dims: String,
        /// Random instances per dimension pair.
        #[arg(long)]
        instances: Option<usize>,
        /// Restarts for the recovery and entanglement-of-formation optimizers.
        #[arg(long)]
        restarts: Option<usize>,
        /// Cap instances and restarts for a fast run.
        #[arg(long)]
        quick: bool,
        /// Replace every state-level tolerance.
        #[arg(long)]
        tolerance: Option<f64>,
        /// Channel family for the random state–channel instances.
        #[arg(long, value_enum, default_value_t = ChannelsArg::Random)]
        channels: ChannelsArg,
        /// Report path; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = FormatArg::Json)]
        format: FormatArg,
    },
    /// Write the coherent-information bound against entanglement of formation as CSV.
    Fig2 {
        #[arg(long, default_value_t = 1001)]
        grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate every quantity and bound for one channel.
    Report {
        /// Zoo spec such as `depolarizing:p=0.3,d=2`, or a Kraus JSON file.
        #[arg(long)]
        channel: String,
        /// `mixed`, `diag:p1,p2,...`, or a density-matrix JSON file.
        #[arg(long)]
        state: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        quick: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn output(path: Option<&Path>) -> entloss::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> entloss::Result<T> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn parse_channel(spec: &str) -> entloss::Result<KrausChannel> {
    let path = Path::new(spec);
    if path.is_file() {
        KrausChannel::try_from(read_json::<KrausJson>(path)?)
    } else {
        parse_zoo_spec(spec)
    }
}

fn parse_state(spec: &str, dim: usize) -> entloss::Result<DensityMatrix> {
    if spec == "mixed" {
        return Ok(DensityMatrix::maximally_mixed(dim));
    }
    if let Some(rest) = spec.strip_prefix("diag:") {
        let probs = rest
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("bad probability `{p}`")))
            })
            .collect::<entloss::Result<Vec<f64>>>()?;
        return DensityMatrix::diagonal(&probs);
    }
    DensityMatrix::try_from(read_json::<DensityMatrixJson>(Path::new(spec))?)
}

fn verify(cfg: SuiteConfig, out: Option<&Path>) -> entloss::Result<i32> {
    let report = run_verify(&cfg)?;
    let mut w = output(out)?;
    report.write(cfg.format, &mut w)?;
    w.flush()?;
    for (name, c) in &report.counts {
        eprintln!(
            "{name:<16} pass {:>5}  fail {:>4}  skipped {:>5}  conditional {:>4}",
            c.pass, c.fail, c.skipped, c.conditional
        );
    }
    Ok(report.exit_code())
}

fn run(cli: Cli) -> entloss::Result<i32> {
    match cli.command {
        Command::Verify {
            seed,
            dims,
            instances,
            restarts,
            quick,
            tolerance,
            channels,
            out,
            format,
        } => {
            let mut cfg = SuiteConfig {
                seed,
                dims: parse_dims(&dims)?,
                channels: match channels {
                    ChannelsArg::Random => ChannelFamily::Random,
                    ChannelsArg::Unitary => ChannelFamily::Unitary,
                },
                format: match format {
                    FormatArg::Json => Format::Json,
                    FormatArg::Csv => Format::Csv,
                },
                ..SuiteConfig::default()
            };
            if let Some(n) = instances {
                cfg.instances = n;
            }
            if let Some(r) = restarts {
                cfg.restarts = r;
            }
            if let Some(t) = tolerance {
                cfg.tolerances = Tolerances::uniform(t);
            }
            if quick {
                cfg = cfg.quick();
            }
            verify(cfg, out.as_deref())
        }
        Command::Fig2 { grid, out } => {
            if grid < 2 {
                return Err(Error::Config("--grid must be at least 2".into()));
            }
            let mut w = output(out.as_deref())?;
            write_fig2_csv(&fig2_qutrit_curve(grid)?, &mut w)?;
            w.flush()?;
            Ok(0)
        }
        Command::Report {
            channel,
            state,
            seed,
            quick,
            out,
        } => {
            let ch = parse_channel(&channel)?;
            let rho = state.map(|s| parse_state(&s, ch.dim_in())).transpose()?;
            let report = channel_report(&ch, &channel, rho.as_ref(), &ReportConfig { seed, quick })?;
            let mut w = output(out.as_deref())?;
            serde_json::to_writer_pretty(&mut w, &report)?;
            writeln!(w)?;
            w.flush()?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::InternalConsistency(_) => 3,
                _ => 2,
            })
        }
    }
}
