mod config;
mod experiments;
mod output;
mod svg;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use config::{Diagnostic, ExperimentConfig, Overrides};
use output::{write_summary, Report, RunInfo};

/// Monte Carlo experiments on Brownian path space.
#[derive(Parser, Debug)]
#[command(name = "pathspace", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one experiment and write its artifacts.
    Run {
        experiment: String,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Check a config file and list every problem with its field path.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// List the available experiments.
    List,
}

const EXIT_FAIL: u8 = 1;
const EXIT_INPUT: u8 = 2;

fn print_diagnostics(ds: &[Diagnostic]) {
    for d in ds {
        eprintln!("error: {d}");
    }
}

/// Honours PATHSPACE_THREADS; anything unparsable falls back to rayon's default.
fn init_threads() {
    if let Ok(v) = std::env::var("PATHSPACE_THREADS") {
        match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => eprintln!("warning: ignoring PATHSPACE_THREADS={v}"),
        }
    }
}

fn write_artifacts(dir: &Path, report: &Report, plot: bool) -> anyhow::Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for t in &report.tables {
        let p = dir.join(&t.file);
        t.write(&p)?;
        files.push(p);
    }
    if let (true, Some(chart)) = (plot, &report.plot) {
        let p = dir.join("plot.svg");
        std::fs::write(&p, chart.render())?;
        files.push(p);
    }
    Ok(files)
}

fn run(experiment: String, file: Option<PathBuf>, seed: Option<u64>, out: Option<PathBuf>, o: Overrides) -> u8 {
    let Some(runner) = experiments::runner(&experiment) else {
        eprintln!("error: unknown experiment '{experiment}' (see `pathspace list`)");
        return EXIT_INPUT;
    };
    let mut cfg = match &file {
        Some(p) => match config::load(p) {
            Ok(c) => c,
            Err(ds) => {
                print_diagnostics(&ds);
                return EXIT_INPUT;
            }
        },
        None => ExperimentConfig::default(),
    };
    cfg.experiment = Some(experiment.clone());
    cfg.apply(o);
    let ds = cfg.diagnostics();
    if !ds.is_empty() {
        print_diagnostics(&ds);
        return EXIT_INPUT;
    }
    let seed = seed.or(cfg.seed).unwrap_or(1);
    let root = out.or(cfg.out.as_ref().map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("out"));
    let dir = root.join(&experiment).join(seed.to_string());
    if let Err(e) = std::fs::create_dir_all(&dir) {
        eprintln!("error: cannot create {}: {e}", dir.display());
        return EXIT_FAIL;
    }
    init_threads();
    // inequality reports always carry their chart
    let plot = cfg.plot.unwrap_or(false) || matches!(experiment.as_str(), "lsi" | "poincare");

    let start = Instant::now();
    let result = runner(&cfg, seed).and_then(|r| write_artifacts(&dir, &r, plot).map(|files| (r, files)));
    let info = RunInfo { experiment: &experiment, seed, wall_time: start.elapsed().as_secs_f64() };
    let (verdict, code, summary) = match &result {
        Ok((r, files)) => {
            let pass = r.pass();
            for c in r.checks.iter().filter(|c| !c.pass) {
                eprintln!("{} {}: {:.4}", if c.mandatory { "FAIL" } else { "note" }, c.name, c.value);
            }
            let verdict = if pass { "PASS" } else { "FAIL" };
            (verdict, if pass { 0 } else { EXIT_FAIL }, write_summary(&dir, &info, verdict, Some(r), files, None))
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ("ERROR", EXIT_FAIL, write_summary(&dir, &info, "ERROR", None, &[], Some(&format!("{e:#}"))))
        }
    };
    if let Err(e) = summary {
        eprintln!("error: {e:#}");
        return EXIT_FAIL;
    }
    println!("{experiment} seed {seed}: {verdict} ({:.1} s) -> {}", info.wall_time, dir.display());
    code
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run { experiment, config, seed, out, overrides } => run(experiment, config, seed, out, overrides),
        Command::Validate { config } => {
            let ds = config::validate_file(&config);
            if ds.is_empty() {
                println!("{}: ok", config.display());
                0
            } else {
                for d in &ds {
                    println!("{d}");
                }
                EXIT_FAIL
            }
        }
        Command::List => {
            for (id, what) in experiments::EXPERIMENTS {
                println!("{id:<18} {what}");
            }
            0
        }
    };
    ExitCode::from(code)
}
