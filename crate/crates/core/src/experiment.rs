//! Seeded multi-repetition experiments and budget sweeps.
//!
//! Repetition `r` uses seed `base + r`. Each stochastic component draws from
//! its own ChaCha stream of that seed, so all learners in a repetition see
//! the same data stream and initial labelled set.

use std::fs;
use std::io::{BufRead, BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{ExperimentConfig, Precision};
use crate::error::{domain, Result};
use crate::eval::{
    aggregate, write_aggregate_csv, write_curve_csv, AggregateCurve, PrequentialState,
};
use crate::learners::{build_learner, LearnerKind, StreamOracle};
use crate::plot;
use crate::scalar::Scalar;
use crate::streamgen::{make_initial_labelled, Instance};

/// ChaCha stream ids of the independent random sources of one repetition.
#[derive(Debug, Clone, Copy)]
#[repr(u64)]
pub enum RngStream {
    Generator = 0,
    InitialSet = 1,
    Weights = 2,
    Strategy = 3,
    Training = 4,
}

pub fn component_rng(seed: u64, stream: RngStream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub config_hash: String,
    pub seed: u64,
    pub learner: LearnerKind,
    pub budget: f64,
    pub window: usize,
    pub horizon: u64,
    pub final_gmean: f64,
    /// Prequential G-mean after every step.
    pub curve: Vec<f64>,
    /// Labels revealed by the oracle.
    pub queries: u64,
    pub trainings: u64,
}

impl RunRecord {
    pub fn query_fraction(&self) -> f64 {
        self.queries as f64 / self.horizon as f64
    }

    /// Realised labelling fraction is at most `B + w / T`.
    pub fn respects_budget(&self) -> bool {
        self.query_fraction() <= self.budget + self.window as f64 / self.horizon as f64
    }
}

/// Runs one learner for one repetition.
pub fn run_single(
    cfg: &ExperimentConfig,
    learner: LearnerKind,
    repetition: usize,
) -> Result<RunRecord> {
    match cfg.precision {
        Precision::F32 => run_single_as::<f32>(cfg, learner, repetition),
        Precision::F64 => run_single_as::<f64>(cfg, learner, repetition),
    }
}

pub fn run_single_as<S: Scalar>(
    cfg: &ExperimentConfig,
    kind: LearnerKind,
    repetition: usize,
) -> Result<RunRecord> {
    let seed = cfg.seed + repetition as u64;
    let stream = cfg.stream()?;
    let k = stream.classes();
    let initial = if kind.uses_memory() {
        let mut rng = component_rng(seed, RngStream::InitialSet);
        make_initial_labelled::<S, _>(&mut rng, &stream.dataset, cfg.learner.per_class)?
    } else {
        Vec::new()
    };
    let mut learner = build_learner::<S>(
        kind,
        &cfg.learner,
        stream.dataset.dim(),
        k,
        initial,
        &mut component_rng(seed, RngStream::Weights),
        component_rng(seed, RngStream::Strategy),
        component_rng(seed, RngStream::Training),
    )?;

    let mut gen = component_rng(seed, RngStream::Generator);
    let mut oracle = StreamOracle::new();
    let mut preq = PrequentialState::new(k, cfg.fading)?;
    let mut curve = Vec::with_capacity(cfg.horizon as usize);
    let mut trainings = 0;
    for t in 0..cfg.horizon {
        let inst = stream.sample::<S, _>(&mut gen, t);
        let y = inst.y.expect("generated instances are labelled");
        oracle.present(y);
        let out = learner.step(&inst.x, &mut oracle)?;
        oracle.withdraw();
        trainings += u64::from(out.trained);
        preq.update(y, out.prediction)?;
        curve.push(preq.gmean());
    }

    Ok(RunRecord {
        config_hash: cfg.hash(),
        seed,
        learner: kind,
        budget: cfg.learner.budget,
        window: cfg.learner.window,
        horizon: cfg.horizon,
        final_gmean: curve.last().copied().unwrap_or(0.0),
        curve,
        queries: oracle.reveals(),
        trainings,
    })
}

/// The labelled stream repetition `repetition` is evaluated on.
pub fn generate_stream(cfg: &ExperimentConfig, repetition: usize) -> Result<Vec<Instance<f64>>> {
    let stream = cfg.stream()?;
    let mut gen = component_rng(cfg.seed + repetition as u64, RngStream::Generator);
    Ok((0..cfg.horizon)
        .map(|t| stream.sample(&mut gen, t))
        .collect())
}

/// CSV with columns `t,x1,x2,...,y`.
pub fn write_stream_csv<W: Write>(mut out: W, instances: &[Instance<f64>]) -> Result<()> {
    let dim = instances.first().map_or(2, Instance::dim);
    let xs: Vec<String> = (1..=dim).map(|i| format!("x{i}")).collect();
    writeln!(out, "t,{},y", xs.join(","))?;
    for inst in instances {
        let x: Vec<String> = inst.x.iter().map(f64::to_string).collect();
        let y = inst.y.map_or(String::new(), |y| y.to_string());
        writeln!(out, "{},{},{y}", inst.t, x.join(","))?;
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct LearnerResult {
    pub learner: LearnerKind,
    pub aggregate: AggregateCurve,
    pub runs: Vec<RunRecord>,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub learners: Vec<LearnerResult>,
}

impl ExperimentResult {
    pub fn get(&self, kind: LearnerKind) -> Option<&LearnerResult> {
        self.learners.iter().find(|l| l.learner == kind)
    }
}

/// All configured learners over all repetitions. Runs execute in parallel;
/// results are ordered by learner, then repetition.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let jobs: Vec<(LearnerKind, usize)> = cfg
        .learners
        .iter()
        .flat_map(|&l| (0..cfg.repetitions).map(move |r| (l, r)))
        .collect();
    let records: Vec<RunRecord> = jobs
        .par_iter()
        .map(|&(l, r)| run_single(cfg, l, r))
        .collect::<Result<_>>()?;

    let mut learners = Vec::new();
    for (i, &kind) in cfg.learners.iter().enumerate() {
        let runs = records[i * cfg.repetitions..(i + 1) * cfg.repetitions].to_vec();
        let curves: Vec<Vec<f64>> = runs.iter().map(|r| r.curve.clone()).collect();
        learners.push(LearnerResult {
            learner: kind,
            aggregate: aggregate(&curves)?,
            runs,
        });
    }
    Ok(ExperimentResult {
        config: cfg.clone(),
        learners,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub budget: f64,
    pub learner: LearnerKind,
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub experiments: Vec<ExperimentResult>,
}

impl SweepResult {
    pub fn row(&self, budget: f64, learner: LearnerKind) -> Option<&SweepRow> {
        self.rows
            .iter()
            .find(|r| r.budget == budget && r.learner == learner)
    }
}

/// Final prequential G-mean (mean and standard error over repetitions) for
/// every budget and learner.
pub fn sweep_budget(cfg: &ExperimentConfig, budgets: &[f64]) -> Result<SweepResult> {
    let mut rows = Vec::new();
    let mut experiments = Vec::new();
    for &b in budgets {
        let res = run_experiment(&cfg.with_budget(b))?;
        for l in &res.learners {
            rows.push(SweepRow {
                budget: b,
                learner: l.learner,
                mean: l.aggregate.final_mean(),
                stderr: l.aggregate.final_stderr(),
                n: l.aggregate.n,
            });
        }
        experiments.push(res);
    }
    Ok(SweepResult { rows, experiments })
}

pub fn run_dir(root: &Path, cfg: &ExperimentConfig) -> PathBuf {
    root.join(cfg.hash())
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    Ok(BufWriter::new(fs::File::create(path)?))
}

/// Writes `config.txt`, per-run curves, per-learner aggregates, `runs.csv`
/// and `curves.svg` under `dir`.
pub fn write_experiment(dir: &Path, res: &ExperimentResult) -> Result<()> {
    fs::create_dir_all(dir.join("curves"))?;
    fs::write(dir.join("config.txt"), res.config.canonical())?;
    let mut runs =
        String::from("config_hash,seed,learner,budget,final_gmean,queries,trainings,horizon\n");
    for l in &res.learners {
        write_aggregate_csv(
            create(&dir.join(format!("{}_aggregate.csv", l.learner)))?,
            &l.aggregate,
        )?;
        for r in &l.runs {
            let name = format!("{}_seed{}.csv", l.learner, r.seed);
            write_curve_csv(create(&dir.join("curves").join(name))?, &r.curve)?;
            runs.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                r.config_hash,
                r.seed,
                r.learner,
                r.budget,
                r.final_gmean,
                r.queries,
                r.trainings,
                r.horizon
            ));
        }
    }
    fs::write(dir.join("runs.csv"), runs)?;
    let series: Vec<(String, &AggregateCurve)> = res
        .learners
        .iter()
        .map(|l| (l.learner.to_string(), &l.aggregate))
        .collect();
    plot::render_curves(&series, res.config.drift_step, &dir.join("curves.svg"))?;
    Ok(())
}

pub fn read_sweep_csv<R: BufRead>(input: R) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    for (i, line) in input.lines().enumerate().skip(1) {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = || domain(format!("malformed sweep CSV at line {}", i + 1));
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        let [b, l, m, s, n] = f[..] else {
            return Err(bad());
        };
        rows.push(SweepRow {
            budget: b.parse().map_err(|_| bad())?,
            learner: l.parse()?,
            mean: m.parse().map_err(|_| bad())?,
            stderr: s.parse().map_err(|_| bad())?,
            n: n.parse().map_err(|_| bad())?,
        });
    }
    Ok(rows)
}

pub fn write_sweep(dir: &Path, sweep: &SweepResult) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut csv = String::from("budget,learner,mean,stderr,n\n");
    for r in &sweep.rows {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            r.budget, r.learner, r.mean, r.stderr, r.n
        ));
    }
    fs::write(dir.join("sweep.csv"), csv)?;
    plot::render_sweep(&sweep.rows, &dir.join("sweep.svg"))?;
    Ok(())
}
