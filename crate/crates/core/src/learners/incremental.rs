use rand_chacha::ChaCha8Rng;

use super::{
    LearnerKind, LearnerParams, OnlineLearner, Oracle, QueryControl, SoftmaxClassifier, StepOutcome,
};
use crate::active::BudgetState;
use crate::error::Result;
use crate::scalar::Scalar;

/// One-pass learner: a softmax network updated on each queried instance
/// alone, keeping no history.
#[derive(Debug, Clone)]
pub struct Incremental<S> {
    model: SoftmaxClassifier<S>,
    control: QueryControl,
}

impl<S: Scalar> Incremental<S> {
    pub fn new(
        params: &LearnerParams,
        input_dim: usize,
        classes: usize,
        init_rng: &mut ChaCha8Rng,
        strategy_rng: ChaCha8Rng,
    ) -> Result<Self> {
        params.validate()?;
        Ok(Incremental {
            model: SoftmaxClassifier::new(params, input_dim, classes, init_rng)?,
            control: QueryControl::new(params, strategy_rng)?,
        })
    }

    pub fn model(&self) -> &SoftmaxClassifier<S> {
        &self.model
    }
}

impl<S: Scalar> OnlineLearner<S> for Incremental<S> {
    fn kind(&self) -> LearnerKind {
        LearnerKind::Incremental
    }

    fn predict(&self, x: &[S]) -> Result<usize> {
        Ok(self.model.predict(x)?.0)
    }

    fn step(&mut self, x: &[S], oracle: &mut dyn Oracle) -> Result<StepOutcome> {
        let (prediction, confidence) = self.model.predict(x)?;
        let criterion = confidence.as_f64();
        let label = self.control.acquire(criterion, oracle)?;
        if let Some(y) = label {
            self.model.train_batch(&[(x, y)])?;
        }
        self.control.close(label.is_some())?;
        Ok(StepOutcome {
            prediction,
            queried: label.is_some(),
            trained: label.is_some(),
            criterion,
        })
    }

    fn budget(&self) -> &BudgetState {
        self.control.budget()
    }

    fn stored(&self) -> usize {
        0
    }
}
