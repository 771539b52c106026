use std::fs;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use siamstream::config::ExperimentConfig;
use siamstream::eval::{read_aggregate_csv, AggregateCurve};
use siamstream::experiment::{
    generate_stream, read_sweep_csv, run_dir, run_experiment, sweep_budget, write_experiment,
    write_stream_csv, write_sweep,
};
use siamstream::plot::{render_curves, render_sweep};

/// Online stream classification with siamese networks and active learning.
///
/// Every config key can be given after the verb as `--key=value`, e.g.
/// `siamstream run -o runs --dataset=circles10 --B=0.05 --reps=10`. Verb
/// options such as `-o` must come before the first override.
#[derive(Parser, Debug)]
#[command(name = "siamstream", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Dump one repetition's labelled stream as CSV (t,x1,x2,y).
    Generate {
        #[command(flatten)]
        common: Common,
        /// Repetition index; the stream seed is `seed + rep`.
        #[arg(long, default_value_t = 0)]
        rep: usize,
        /// Output file; stdout when omitted.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Run every configured learner over all repetitions.
    Run {
        #[command(flatten)]
        common: Common,
        /// Root directory; results go to `<root>/<config hash>/`.
        #[arg(short, long, default_value = "runs")]
        out: PathBuf,
    },
    /// Final G-mean for every budget in `budgets`.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(short, long, default_value = "runs")]
        out: PathBuf,
    },
    /// Re-render plots from CSVs written by `run` or `sweep`.
    Plot {
        /// A run directory (with `*_aggregate.csv`) or a `sweep.csv` file.
        input: PathBuf,
        /// SVG path; defaults to `curves.svg` or `sweep.svg` next to the input.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// Config file of `key = value` lines (`#` starts a comment).
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// `--key=value` overrides, applied after the config file.
    #[arg(
        trailing_var_arg = true,
        allow_hyphen_values = true,
        value_name = "--KEY=VALUE"
    )]
    overrides: Vec<String>,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => {
                let text =
                    fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                ExperimentConfig::from_text(&text).with_context(|| format!("in {}", p.display()))?
            }
            None => ExperimentConfig::default(),
        };
        cfg.apply_overrides(&self.overrides)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn generate(common: &Common, rep: usize, out: Option<&Path>) -> Result<()> {
    let cfg = common.load()?;
    let instances = generate_stream(&cfg, rep)?;
    match out {
        Some(p) => write_stream_csv(BufWriter::new(fs::File::create(p)?), &instances)?,
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            write_stream_csv(&mut lock, &instances)?;
            lock.flush()?;
        }
    }
    Ok(())
}

fn run(common: &Common, root: &Path) -> Result<()> {
    let cfg = common.load()?;
    let dir = run_dir(root, &cfg);
    let res = run_experiment(&cfg)?;
    write_experiment(&dir, &res)?;
    println!("{}", dir.display());
    for l in &res.learners {
        let queries: u64 = l.runs.iter().map(|r| r.queries).sum();
        println!(
            "{:<12} final G-mean {:.4} ± {:.4}  mean queries {:.1}",
            l.learner.as_str(),
            l.aggregate.final_mean(),
            l.aggregate.final_stderr(),
            queries as f64 / l.runs.len() as f64
        );
    }
    Ok(())
}

fn sweep(common: &Common, root: &Path) -> Result<()> {
    let cfg = common.load()?;
    let dir = run_dir(root, &cfg);
    let res = sweep_budget(&cfg, &cfg.budgets)?;
    write_sweep(&dir, &res)?;
    fs::write(dir.join("config.txt"), cfg.canonical())?;
    for e in &res.experiments {
        write_experiment(&run_dir(root, &e.config), e)?;
    }
    println!("{}", dir.display());
    for r in &res.rows {
        println!(
            "B={:<6} {:<12} {:.4} ± {:.4}",
            r.budget,
            r.learner.as_str(),
            r.mean,
            r.stderr
        );
    }
    Ok(())
}

fn plot(input: &Path, out: Option<&Path>) -> Result<()> {
    if input.is_file() {
        let rows = read_sweep_csv(BufReader::new(fs::File::open(input)?))
            .with_context(|| format!("reading {}", input.display()))?;
        let target = out.map_or_else(|| input.with_file_name("sweep.svg"), Path::to_path_buf);
        render_sweep(&rows, &target)?;
        println!("{}", target.display());
        return Ok(());
    }
    let mut series: Vec<(String, AggregateCurve)> = Vec::new();
    let mut entries: Vec<PathBuf> = fs::read_dir(input)
        .with_context(|| format!("reading {}", input.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<io::Result<_>>()?;
    entries.sort();
    for path in entries {
        let name = path
            .file_name()
            .and_then(|n| n.to_str())
            .unwrap_or_default();
        if let Some(learner) = name.strip_suffix("_aggregate.csv") {
            let agg = read_aggregate_csv(BufReader::new(fs::File::open(&path)?))
                .with_context(|| format!("reading {}", path.display()))?;
            series.push((learner.to_string(), agg));
        }
    }
    if series.is_empty() {
        bail!("no *_aggregate.csv files in {}", input.display());
    }
    let drift = match fs::read_to_string(input.join("config.txt")) {
        Ok(text) => ExperimentConfig::from_text(&text)?.drift_step,
        Err(_) => None,
    };
    let refs: Vec<(String, &AggregateCurve)> = series.iter().map(|(n, a)| (n.clone(), a)).collect();
    let target = out.map_or_else(|| input.join("curves.svg"), Path::to_path_buf);
    render_curves(&refs, drift, &target)?;
    println!("{}", target.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.command {
        Command::Generate { common, rep, out } => generate(common, *rep, out.as_deref()),
        Command::Run { common, out } => run(common, out),
        Command::Sweep { common, out } => sweep(common, out),
        Command::Plot { input, out } => plot(input, out.as_deref()),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
