use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qsync::{Format, RunArtifact, Scenario};

#[derive(Parser)]
#[command(
    name = "qsync",
    version,
    about = "Simulate and analyse synchronization in open quantum systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the scenario and run every analysis it defines.
    Run(RunArgs),
    /// Evaluate the coupling-detuning sweep only.
    Sweep(RunArgs),
    /// Print the generator spectrum and time-scale gap.
    Spectrum(RunArgs),
    /// Check a scenario file and print it with defaults filled in.
    Validate { scenario: PathBuf },
}

#[derive(Args)]
struct RunArgs {
    scenario: PathBuf,
    /// Output directory; defaults to the scenario's `output.dir`, then
    /// `out/<name>`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated list of csv, json, svg.
    #[arg(long, value_delimiter = ',')]
    format: Option<Vec<Format>>,
    /// Worker threads for sweeps.
    #[arg(long, env = "QSYNC_THREADS")]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> qsync::Result<()> {
    match cli.command {
        Command::Validate { scenario } => {
            let s = qsync::load_scenario(&scenario)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&s).map_err(|e| qsync::Error::Serialize(e.to_string()))?
            );
            Ok(())
        }
        Command::Run(args) => execute(args, qsync::run_scenario),
        Command::Sweep(args) => execute(args, qsync::run_sweep),
        Command::Spectrum(args) => execute(args, qsync::run_spectrum),
    }
}

fn execute(args: RunArgs, f: fn(&Scenario) -> qsync::Result<RunArtifact>) -> qsync::Result<()> {
    if let Some(n) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("could not configure {n} threads: {e}");
        }
    }
    let scenario = qsync::load_scenario(&args.scenario)?;
    let artifact = f(&scenario)?;
    summarize(&artifact);
    let dir = args
        .out
        .or_else(|| scenario.output.dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| Path::new("out").join(&scenario.name));
    let formats = args.format.unwrap_or_else(|| scenario.output.formats.clone());
    for path in qsync::export(&artifact, &formats, &dir)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn summarize(a: &RunArtifact) {
    for s in &a.sync {
        let onset = s.onset.map_or("none".to_string(), |t| format!("{t}"));
        print!("C({}, {}): onset {onset}", s.a, s.b);
        if let (Some([from, to]), Some(sustained)) = (s.span, s.sustained) {
            print!(", |C| >= {} on [{from}, {to}]: {sustained}", s.threshold);
        }
        if let Some(m) = s.min_abs {
            print!(" (min |C| {m:.6})");
        }
        println!();
    }
    if let Some(modes) = &a.modes {
        println!(
            "mode frequencies {:?}, noiseless modes {:?}",
            modes.frequencies, modes.noiseless
        );
    }
    if let Some(spec) = &a.spectrum {
        println!("{} spectrum: {} eigenvalues", spec.generator, spec.eigenvalues.len());
        for [re, im] in spec.eigenvalues.iter().take(8) {
            println!("  {re:+.6e} {im:+.6e}i");
        }
        if let Some(g) = &spec.gap {
            println!(
                "gap: slow rate {:.6e}, next rate {}, ratio {}, degenerate frequencies {}",
                g.slow_rate,
                g.next_rate.map_or("none".into(), |r| format!("{r:.6e}")),
                g.gap_ratio.map_or("none".into(), |r| format!("{r:.6}")),
                g.degenerate_frequencies
            );
        }
    }
    if let Some(scan) = &a.dephasing_scan {
        for k in 0..scan.gamma_z.len() {
            println!(
                "gamma_z {}: gap ratio {}, shift error {:.3e}",
                scan.gamma_z[k],
                scan.gap_ratio[k].map_or("none".into(), |r| format!("{r:.6}")),
                scan.max_shift_error[k]
            );
        }
    }
    if let Some(sweep) = &a.sweep {
        let m = sweep.matrix();
        for i in 0..sweep.lambdas.len() {
            println!("lambda {:.4}: sync width {}", sweep.lambdas[i], m.sync_width(i, 0.9));
        }
    }
}
