//! Experiment configuration as `key = value` lines.
//!
//! Blank lines and `#` comments are ignored. Every key can also be given on
//! the command line as `--key=value`. The canonical rendering (all keys, in a
//! fixed order) is hashed to name the output directory.

use std::fmt::Write as _;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::learners::{LearnerKind, LearnerParams};
use crate::streamgen::{Circle, Circles10Config, Dataset, ImbalanceProfile, Sea4Config, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetKind {
    Sea4,
    Circles10,
}

impl FromStr for DatasetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sea4" => Ok(DatasetKind::Sea4),
            "circles10" => Ok(DatasetKind::Circles10),
            _ => Err(Error::Config(format!("unknown dataset `{s}`"))),
        }
    }
}

impl DatasetKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            DatasetKind::Sea4 => "sea4",
            DatasetKind::Circles10 => "circles10",
        }
    }

    pub fn classes(&self) -> usize {
        match self {
            DatasetKind::Sea4 => 4,
            DatasetKind::Circles10 => 10,
        }
    }

    /// Majority prior of the multi-minority profile.
    pub fn default_majority_prior(&self) -> f64 {
        match self {
            DatasetKind::Sea4 => 0.97,
            DatasetKind::Circles10 => 0.955,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PriorKind {
    Balanced,
    MultiMinority,
}

impl FromStr for PriorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "balanced" => Ok(PriorKind::Balanced),
            "multi_minority" => Ok(PriorKind::MultiMinority),
            _ => Err(Error::Config(format!("unknown priors profile `{s}`"))),
        }
    }
}

impl PriorKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            PriorKind::Balanced => "balanced",
            PriorKind::MultiMinority => "multi_minority",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precision {
    F32,
    F64,
}

impl FromStr for Precision {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "f32" => Ok(Precision::F32),
            "f64" => Ok(Precision::F64),
            _ => Err(Error::Config(format!("unknown precision `{s}`"))),
        }
    }
}

impl Precision {
    pub fn as_str(&self) -> &'static str {
        match self {
            Precision::F32 => "f32",
            Precision::F64 => "f64",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub dataset: DatasetKind,
    pub priors: PriorKind,
    pub majority_class: usize,
    /// Overrides the dataset's default majority prior.
    pub majority_prior: Option<f64>,
    pub drift_step: Option<u64>,
    pub horizon: u64,
    pub learners: Vec<LearnerKind>,
    pub repetitions: usize,
    pub seed: u64,
    pub fading: f64,
    pub budgets: Vec<f64>,
    pub precision: Precision,
    pub sea4: Sea4Config,
    pub circles10: Circles10Config,
    pub learner: LearnerParams,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            dataset: DatasetKind::Sea4,
            priors: PriorKind::Balanced,
            majority_class: 0,
            majority_prior: None,
            drift_step: None,
            horizon: 5000,
            learners: LearnerKind::ALL.to_vec(),
            repetitions: 30,
            seed: 0,
            fading: 0.99,
            budgets: vec![0.01, 0.05, 0.1, 0.2, 0.5, 1.0],
            precision: Precision::F64,
            sea4: Sea4Config::default(),
            circles10: Circles10Config::default(),
            learner: LearnerParams::default(),
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("bad value `{value}` for key `{key}`")))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(|v| parse(key, v))
        .collect()
}

fn parse_triple(key: &str, value: &str) -> Result<[f64; 3]> {
    let v: Vec<f64> = parse_list(key, value)?;
    v.try_into()
        .map_err(|_| Error::Config(format!("`{key}` needs exactly three numbers")))
}

/// `cx:cy:r;cx:cy:r;...`
fn parse_circles(key: &str, value: &str) -> Result<Vec<Circle>> {
    value
        .split(';')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(|c| {
            let parts: Vec<f64> = c
                .split(':')
                .map(|p| parse(key, p.trim()))
                .collect::<Result<_>>()?;
            match parts[..] {
                [cx, cy, r] => Ok(Circle::new(cx, cy, r)),
                _ => Err(Error::Config(format!("`{key}` entries must be cx:cy:r"))),
            }
        })
        .collect()
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

fn circles_str(c: &[Circle]) -> String {
    c.iter()
        .map(|c| format!("{}:{}:{}", c.cx, c.cy, c.r))
        .collect::<Vec<_>>()
        .join(";")
}

impl ExperimentConfig {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        let p = &mut self.learner;
        match key.trim() {
            "dataset" => self.dataset = parse(key, value)?,
            "priors" => self.priors = parse(key, value)?,
            "majority_class" => self.majority_class = parse(key, value)?,
            "majority_prior" => {
                self.majority_prior = match value {
                    "default" => None,
                    v => Some(parse(key, v)?),
                }
            }
            "drift_step" => {
                self.drift_step = match value {
                    "none" | "" => None,
                    v => Some(parse(key, v)?),
                }
            }
            "T" | "horizon" => self.horizon = parse(key, value)?,
            "learners" | "learner" => self.learners = parse_list(key, value)?,
            "repetitions" | "reps" => self.repetitions = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "fading" => self.fading = parse(key, value)?,
            "budgets" => self.budgets = parse_list(key, value)?,
            "precision" => self.precision = parse(key, value)?,
            "sea4_thresholds" => {
                let drifted = self.sea4.drifted_thresholds();
                self.sea4 = Sea4Config::new(parse_triple(key, value)?, drifted, None)?;
            }
            "sea4_drifted_thresholds" => {
                let base = self.sea4.thresholds();
                self.sea4 = Sea4Config::new(base, parse_triple(key, value)?, None)?;
            }
            "circles" => {
                let drifted = self.circles10.drifted_circles().to_vec();
                self.circles10 = Circles10Config::new(parse_circles(key, value)?, drifted, None)?;
            }
            "drifted_circles" => {
                let base = self.circles10.circles().to_vec();
                self.circles10 = Circles10Config::new(base, parse_circles(key, value)?, None)?;
            }
            "B" | "budget" => p.budget = parse(key, value)?,
            "E" => p.per_class = parse(key, value)?,
            "w" => p.window = parse(key, value)?,
            "s" => p.step_size = parse(key, value)?,
            "delta" => p.spread = parse(key, value)?,
            "theta0" => p.theta0 = parse(key, value)?,
            "theta_fixed" => p.theta_fixed = parse(key, value)?,
            "strategy" => p.strategy = parse(key, value)?,
            "budget_mechanism" => p.mechanism = parse(key, value)?,
            "lr" => p.optimizer.lr = parse(key, value)?,
            "beta1" => p.optimizer.beta1 = parse(key, value)?,
            "beta2" => p.optimizer.beta2 = parse(key, value)?,
            "eps" => p.optimizer.eps = parse(key, value)?,
            "batch_size" => p.batch_size = parse(key, value)?,
            "leaky_slope" => p.leaky_slope = parse(key, value)?,
            "hidden" => p.hidden = parse_list(key, value)?,
            other => return Err(Error::UnknownKey(other.to_string())),
        }
        Ok(())
    }

    /// Applies every non-comment line of a `key = value` document.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!(
                    "line {}: expected key = value, got `{raw}`",
                    lineno + 1
                ))
            })?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Applies `--key=value` (or `key=value`) overrides.
    pub fn apply_overrides<I, T>(&mut self, args: I) -> Result<()>
    where
        I: IntoIterator<Item = T>,
        T: AsRef<str>,
    {
        for arg in args {
            let arg = arg.as_ref();
            let body = arg.strip_prefix("--").unwrap_or(arg);
            let (k, v) = body.split_once('=').ok_or_else(|| {
                Error::Config(format!("override `{arg}` must look like --key=value"))
            })?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon < 1 {
            return Err(Error::Config("horizon T must be >= 1".into()));
        }
        if self.repetitions < 1 {
            return Err(Error::Config("repetitions must be >= 1".into()));
        }
        if self.learners.is_empty() {
            return Err(Error::Config("at least one learner is required".into()));
        }
        if !(0.0..=1.0).contains(&self.learner.budget) {
            return Err(Error::Config(format!(
                "budget B = {} outside [0,1]",
                self.learner.budget
            )));
        }
        if let Some(b) = self.budgets.iter().find(|b| !(0.0..=1.0).contains(*b)) {
            return Err(Error::Config(format!("sweep budget {b} outside [0,1]")));
        }
        if !(self.fading > 0.0 && self.fading <= 1.0) {
            return Err(Error::Config(format!(
                "fading factor {} outside (0,1]",
                self.fading
            )));
        }
        if self.learner.window == 0 {
            return Err(Error::Config("window w must be >= 1".into()));
        }
        self.learner.validate()?;
        self.stream()?;
        Ok(())
    }

    pub fn classes(&self) -> usize {
        self.dataset.classes()
    }

    pub fn stream(&self) -> Result<Stream> {
        let dataset = match self.dataset {
            DatasetKind::Sea4 => Dataset::Sea4(self.sea4.clone().with_drift_step(self.drift_step)),
            DatasetKind::Circles10 => {
                Dataset::Circles10(self.circles10.clone().with_drift_step(self.drift_step))
            }
        };
        let k = self.classes();
        let profile = match self.priors {
            PriorKind::Balanced => ImbalanceProfile::balanced(k)?,
            PriorKind::MultiMinority => ImbalanceProfile::multi_minority(
                k,
                self.majority_class,
                self.majority_prior
                    .unwrap_or(self.dataset.default_majority_prior()),
            )?,
        };
        Stream::new(dataset, profile)
    }

    /// Copy with a different labelling budget.
    pub fn with_budget(&self, budget: f64) -> Self {
        let mut cfg = self.clone();
        cfg.learner.budget = budget;
        cfg
    }

    /// Every key in a fixed order; parsing this back yields an equal config.
    pub fn canonical(&self) -> String {
        let p = &self.learner;
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("dataset", self.dataset.as_str().into());
        kv("priors", self.priors.as_str().into());
        kv("majority_class", self.majority_class.to_string());
        kv(
            "majority_prior",
            self.majority_prior
                .map_or("default".into(), |v| v.to_string()),
        );
        kv(
            "drift_step",
            self.drift_step.map_or("none".into(), |v| v.to_string()),
        );
        kv("T", self.horizon.to_string());
        kv("learners", join(&self.learners));
        kv("repetitions", self.repetitions.to_string());
        kv("seed", self.seed.to_string());
        kv("fading", self.fading.to_string());
        kv("budgets", join(&self.budgets));
        kv("precision", self.precision.as_str().into());
        kv("sea4_thresholds", join(&self.sea4.thresholds()));
        kv(
            "sea4_drifted_thresholds",
            join(&self.sea4.drifted_thresholds()),
        );
        kv("circles", circles_str(self.circles10.circles()));
        kv(
            "drifted_circles",
            circles_str(self.circles10.drifted_circles()),
        );
        kv("B", p.budget.to_string());
        kv("E", p.per_class.to_string());
        kv("w", p.window.to_string());
        kv("s", p.step_size.to_string());
        kv("delta", p.spread.to_string());
        kv("theta0", p.theta0.to_string());
        kv("theta_fixed", p.theta_fixed.to_string());
        kv("strategy", p.strategy.to_string());
        kv("budget_mechanism", p.mechanism.to_string());
        kv("lr", p.optimizer.lr.to_string());
        kv("beta1", p.optimizer.beta1.to_string());
        kv("beta2", p.optimizer.beta2.to_string());
        kv("eps", p.optimizer.eps.to_string());
        kv("batch_size", p.batch_size.to_string());
        kv("leaky_slope", p.leaky_slope.to_string());
        kv("hidden", join(&p.hidden));
        s
    }

    /// Short content hash of the canonical rendering.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        hex::encode(&digest[..6])
    }
}
