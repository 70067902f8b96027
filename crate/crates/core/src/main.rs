use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ffgate::error::Result;
use ffgate::harness::calibrate::{fit_efficiencies, CalibrationTargets};
use ffgate::harness::engine::{run_point, sweep_analyzer, sweep_delay, sweep_overlap, Channel, CountsRecord, Engine};
use ffgate::harness::{emit_csv, parse_scenario, write_csv, Scenario, SweepKind};

#[derive(Parser)]
#[command(name = "ffgate", version, about = "Simulate the feed-forward quantum parity check")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the scenario's fixed operating point.
    Run(Common),
    /// Coincidence rate against the analyzer angle.
    SweepAnalyzer(Common),
    /// Coincidence rate against the extra electronic delay.
    SweepDelay(Common),
    /// Coincidence rate against photon overlap or path delay.
    SweepOverlap(Common),
    /// Fit detector efficiencies to measured peak rates.
    Calibrate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value_t = 131.0)]
        passive_peak: f64,
        #[arg(long, default_value_t = 247.0)]
        orgate_peak: f64,
    },
}

#[derive(Args)]
struct Common {
    /// Scenario file.
    #[arg(long)]
    scenario: PathBuf,
    /// Master seed for Monte Carlo runs.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Pairs sampled per point; exact rates when omitted.
    #[arg(long)]
    shots: Option<u64>,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ChannelArg::Both)]
    channel: ChannelArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum ChannelArg {
    D2a,
    D2b,
    Both,
}

impl From<ChannelArg> for Channel {
    fn from(c: ChannelArg) -> Self {
        match c {
            ChannelArg::D2a => Channel::D2a,
            ChannelArg::D2b => Channel::D2b,
            ChannelArg::Both => Channel::Both,
        }
    }
}

fn load(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path)?;
    Ok(parse_scenario(&text)?)
}

impl Common {
    fn engine(&self) -> Result<Engine> {
        match self.shots {
            None => Ok(Engine::Analytic),
            Some(0) => Err(ffgate::error::Error::Validation("--shots must be at least 1".into())),
            Some(shots) => Ok(Engine::MonteCarlo { shots, seed: self.seed }),
        }
    }

    fn write(&self, records: &[CountsRecord]) -> Result<()> {
        match &self.out {
            Some(p) => emit_csv(records, p),
            None => Ok(write_csv(records, std::io::stdout().lock())?),
        }
    }
}

/// Sweep points from the file, or the defaults for `kind` when the file
/// describes a different sweep.
fn points(s: &Scenario, kind: SweepKind) -> Vec<f64> {
    if s.sweep.kind == kind {
        s.sweep.points.clone()
    } else {
        ffgate::harness::scenario::Sweep::default_points(kind, s.sweep.overlap_axis, s.imperfections.coherence_time_ns)
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(c) => {
            let s = load(&c.scenario)?;
            c.write(&[run_point(&s, c.engine()?, c.channel.into())?])
        }
        Command::SweepAnalyzer(c) => {
            let s = load(&c.scenario)?;
            let pts = points(&s, SweepKind::Analyzer);
            c.write(&sweep_analyzer(&s, &pts, c.engine()?, c.channel.into())?)
        }
        Command::SweepDelay(c) => {
            let s = load(&c.scenario)?;
            let pts = points(&s, SweepKind::Delay);
            let d = sweep_delay(&s, &pts, c.engine()?, c.channel.into())?;
            match d.plateau {
                Some(p) => eprintln!(
                    "plateau: center {:.3} ns, FWHM {:.3} ns, peak {:.3}/min",
                    p.center_ns, p.fwhm_ns, p.peak_rate
                ),
                None => eprintln!("plateau: not resolved in the scanned range"),
            }
            c.write(&d.curve)
        }
        Command::SweepOverlap(c) => {
            let s = load(&c.scenario)?;
            let pts = points(&s, SweepKind::Overlap);
            let o = sweep_overlap(&s, &pts, c.engine()?, c.channel.into())?;
            for (x, v) in &o.visibility {
                match v {
                    Some(v) => eprintln!("visibility at {x}: {v:.4}"),
                    None => eprintln!("visibility at {x}: undefined (zero curve)"),
                }
            }
            c.write(&o.curve)
        }
        Command::Calibrate { scenario, passive_peak, orgate_peak } => {
            let s = load(&scenario)?;
            let fit = fit_efficiencies(&s, CalibrationTargets { passive_peak, orgate_peak })?;
            let c = &fit.calibration;
            println!("[imperfections]");
            for id in ["D1", "D2a", "D2b"] {
                println!("efficiency_{} = {:.6}", id.to_lowercase(), c.efficiency(id));
            }
            eprintln!(
                "passive peak {:.3}/min, OR-gate peak {:.3}/min, ratio {:.4}, worst relative error {:.2}%",
                fit.passive_peak,
                fit.orgate_peak,
                fit.ratio(),
                100.0 * fit.max_relative_error
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
