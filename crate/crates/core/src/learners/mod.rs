//! The compared online learners behind one interface.
//!
//! Every learner runs the same loop per arriving instance: predict, and if
//! the labelling budget allows and the query strategy fires on the
//! learner's criterion, reveal the label and train once. Budget expenses
//! are updated on every step.

mod actiq;
mod actisiamese;
mod classifier;
mod incremental;
mod siamese;

use std::fmt;
use std::str::FromStr;

use rand_chacha::ChaCha8Rng;

pub use actiq::ActiQ;
pub use actisiamese::{argmax_mean, ActiSiamese, SiamesePrediction};
pub use classifier::SoftmaxClassifier;
pub use incremental::Incremental;
pub use siamese::SiameseModel;

use crate::active::{BudgetMechanism, BudgetState, Strategy, StrategyKind, VariableThreshold};
use crate::error::{Error, Result};
use crate::nn::{RadamConfig, DEFAULT_LEAKY_SLOPE};
use crate::scalar::Scalar;
use crate::streamgen::Instance;

/// Source of true labels. Each call to [`Oracle::reveal`] is one label
/// request.
pub trait Oracle {
    fn reveal(&mut self) -> Result<usize>;
}

/// Oracle over a labelled stream: the harness presents each step's true
/// label, and the oracle counts how many were actually revealed.
#[derive(Debug, Default, Clone)]
pub struct StreamOracle {
    current: Option<usize>,
    reveals: u64,
}

impl StreamOracle {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn present(&mut self, label: usize) {
        self.current = Some(label);
    }

    pub fn withdraw(&mut self) {
        self.current = None;
    }

    pub fn reveals(&self) -> u64 {
        self.reveals
    }
}

impl Oracle for StreamOracle {
    fn reveal(&mut self) -> Result<usize> {
        let y = self.current.ok_or(Error::OracleUnavailable)?;
        self.reveals += 1;
        Ok(y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub prediction: usize,
    pub queried: bool,
    pub trained: bool,
    pub criterion: f64,
}

pub trait OnlineLearner<S: Scalar>: Send {
    fn kind(&self) -> LearnerKind;

    fn predict(&self, x: &[S]) -> Result<usize>;

    /// Processes one arriving instance: predicts, maybe queries and trains,
    /// and closes the step in the budget.
    fn step(&mut self, x: &[S], oracle: &mut dyn Oracle) -> Result<StepOutcome>;

    fn budget(&self) -> &BudgetState;

    /// Number of instances held in memory.
    fn stored(&self) -> usize;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LearnerKind {
    Incremental,
    ActiQ,
    ActiSiamese,
}

impl LearnerKind {
    pub const ALL: [LearnerKind; 3] = [
        LearnerKind::Incremental,
        LearnerKind::ActiQ,
        LearnerKind::ActiSiamese,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            LearnerKind::Incremental => "incremental",
            LearnerKind::ActiQ => "actiq",
            LearnerKind::ActiSiamese => "actisiamese",
        }
    }

    pub fn uses_memory(&self) -> bool {
        !matches!(self, LearnerKind::Incremental)
    }
}

impl fmt::Display for LearnerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LearnerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "incremental" => Ok(LearnerKind::Incremental),
            "actiq" => Ok(LearnerKind::ActiQ),
            "actisiamese" => Ok(LearnerKind::ActiSiamese),
            _ => Err(Error::Config(format!("unknown learner `{s}`"))),
        }
    }
}

/// Hyperparameters shared by the learners.
#[derive(Debug, Clone, PartialEq)]
pub struct LearnerParams {
    pub hidden: Vec<usize>,
    pub leaky_slope: f64,
    pub optimizer: RadamConfig,
    pub batch_size: usize,
    /// Queue capacity per class.
    pub per_class: usize,
    pub strategy: StrategyKind,
    pub theta0: f64,
    pub theta_fixed: f64,
    pub step_size: f64,
    pub spread: f64,
    pub mechanism: BudgetMechanism,
    pub budget: f64,
    pub window: usize,
}

impl Default for LearnerParams {
    fn default() -> Self {
        LearnerParams {
            hidden: vec![32, 32, 32],
            leaky_slope: DEFAULT_LEAKY_SLOPE,
            optimizer: RadamConfig::default(),
            batch_size: 64,
            per_class: 5,
            strategy: StrategyKind::Variable,
            theta0: 1.0,
            theta_fixed: 0.9,
            step_size: 0.01,
            spread: 1.0,
            mechanism: BudgetMechanism::WindowApprox,
            budget: 0.05,
            window: 300,
        }
    }
}

impl LearnerParams {
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<()> {
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            return Err(Error::Config("hidden layer sizes must be positive".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch size must be >= 1".into()));
        }
        if self.per_class < 2 {
            return Err(Error::Config(format!(
                "per-class memory E must be >= 2, got {}",
                self.per_class
            )));
        }
        if !(0.0..1.0).contains(&self.leaky_slope) {
            return Err(Error::Config("leaky slope must lie in [0,1)".into()));
        }
        if !(self.optimizer.lr > 0.0) {
            return Err(Error::Config("learning rate must be positive".into()));
        }
        Ok(())
    }
}

/// Budget gate plus query strategy, shared by all learners.
#[derive(Debug, Clone)]
pub(crate) struct QueryControl {
    strategy: Strategy,
    budget: BudgetState,
    step: u64,
}

impl QueryControl {
    pub fn new(params: &LearnerParams, strategy_rng: ChaCha8Rng) -> Result<Self> {
        let strategy = match params.strategy {
            StrategyKind::Fixed => Strategy::Fixed {
                theta: params.theta_fixed,
            },
            StrategyKind::Variable => Strategy::Variable(VariableThreshold::new(
                params.theta0,
                params.step_size,
                params.spread,
                strategy_rng,
            )?),
        };
        Ok(QueryControl {
            strategy,
            budget: BudgetState::new(params.mechanism, params.budget, params.window)?,
            step: 0,
        })
    }

    pub fn budget(&self) -> &BudgetState {
        &self.budget
    }

    /// Whether to request this step's label. The strategy is only consulted
    /// while expenses are within budget.
    pub fn wants_label(&mut self, criterion: f64) -> bool {
        self.budget.within_budget() && self.strategy.should_query(criterion)
    }

    pub fn close(&mut self, queried: bool) -> Result<()> {
        self.budget.record(self.step, queried)?;
        self.step += 1;
        Ok(())
    }

    /// Reveals the label if the strategy asks for it. On oracle failure the
    /// step is closed uncharged and the error returned.
    pub fn acquire(&mut self, criterion: f64, oracle: &mut dyn Oracle) -> Result<Option<usize>> {
        if !self.wants_label(criterion) {
            return Ok(None);
        }
        match oracle.reveal() {
            Ok(y) => Ok(Some(y)),
            Err(e) => {
                self.close(false)?;
                Err(e)
            }
        }
    }
}

/// Builds a learner of the given kind. `initial` seeds the queues of the
/// memory-based learners and is ignored by the incremental one.
#[allow(clippy::too_many_arguments)]
pub fn build_learner<S: Scalar>(
    kind: LearnerKind,
    params: &LearnerParams,
    input_dim: usize,
    classes: usize,
    initial: Vec<Instance<S>>,
    init_rng: &mut ChaCha8Rng,
    strategy_rng: ChaCha8Rng,
    train_rng: ChaCha8Rng,
) -> Result<Box<dyn OnlineLearner<S>>> {
    Ok(match kind {
        LearnerKind::Incremental => Box::new(Incremental::new(
            params,
            input_dim,
            classes,
            init_rng,
            strategy_rng,
        )?),
        LearnerKind::ActiQ => Box::new(ActiQ::new(
            params,
            input_dim,
            classes,
            initial,
            init_rng,
            strategy_rng,
            train_rng,
        )?),
        LearnerKind::ActiSiamese => Box::new(ActiSiamese::new(
            params,
            input_dim,
            classes,
            initial,
            init_rng,
            strategy_rng,
            train_rng,
        )?),
    })
}

pub(crate) fn argmax<S: Scalar>(v: &[S]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x > v[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argmax_prefers_lowest_index_on_ties() {
        assert_eq!(argmax(&[0.1_f64, 0.5, 0.5]), 1);
        assert_eq!(argmax(&[0.3_f64; 4]), 0);
    }

    #[test]
    fn oracle_counts_reveals() {
        let mut o = StreamOracle::new();
        assert!(matches!(o.reveal(), Err(Error::OracleUnavailable)));
        o.present(3);
        assert_eq!(o.reveal().unwrap(), 3);
        assert_eq!(o.reveals(), 1);
    }

    #[test]
    fn learner_names_round_trip() {
        for k in LearnerKind::ALL {
            assert_eq!(k.as_str().parse::<LearnerKind>().unwrap(), k);
        }
        assert!("svm".parse::<LearnerKind>().is_err());
    }
}
