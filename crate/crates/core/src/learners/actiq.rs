use rand_chacha::ChaCha8Rng;

use super::{
    LearnerKind, LearnerParams, OnlineLearner, Oracle, QueryControl, SoftmaxClassifier, StepOutcome,
};
use crate::active::BudgetState;
use crate::error::Result;
use crate::memory::QueueStore;
use crate::scalar::Scalar;
use crate::streamgen::Instance;

/// Softmax network trained on the class-balanced queues: each queried
/// instance is appended to its queue, then the network makes one pass over
/// everything stored.
#[derive(Debug, Clone)]
pub struct ActiQ<S> {
    model: SoftmaxClassifier<S>,
    store: QueueStore<S>,
    control: QueryControl,
    train_rng: ChaCha8Rng,
}

impl<S: Scalar> ActiQ<S> {
    pub fn new(
        params: &LearnerParams,
        input_dim: usize,
        classes: usize,
        initial: Vec<Instance<S>>,
        init_rng: &mut ChaCha8Rng,
        strategy_rng: ChaCha8Rng,
        train_rng: ChaCha8Rng,
    ) -> Result<Self> {
        params.validate()?;
        Ok(ActiQ {
            model: SoftmaxClassifier::new(params, input_dim, classes, init_rng)?,
            store: QueueStore::with_initial(classes, params.per_class, initial)?,
            control: QueryControl::new(params, strategy_rng)?,
            train_rng,
        })
    }

    pub fn model(&self) -> &SoftmaxClassifier<S> {
        &self.model
    }

    pub fn store(&self) -> &QueueStore<S> {
        &self.store
    }

    /// One epoch over the stored examples; returns the mini-batch count.
    pub fn train_on_store(&mut self) -> Result<usize> {
        let examples: Vec<(&[S], usize)> = self
            .store
            .snapshot()
            .into_iter()
            .map(|(inst, c)| (inst.x.as_slice(), c))
            .collect();
        self.model.train_epoch(&examples, &mut self.train_rng)
    }
}

impl<S: Scalar> OnlineLearner<S> for ActiQ<S> {
    fn kind(&self) -> LearnerKind {
        LearnerKind::ActiQ
    }

    fn predict(&self, x: &[S]) -> Result<usize> {
        Ok(self.model.predict(x)?.0)
    }

    fn step(&mut self, x: &[S], oracle: &mut dyn Oracle) -> Result<StepOutcome> {
        let (prediction, confidence) = self.model.predict(x)?;
        let criterion = confidence.as_f64();
        let t = self.control.budget().steps();
        let label = self.control.acquire(criterion, oracle)?;
        if let Some(y) = label {
            self.store.append(Instance::labelled(x.to_vec(), y, t))?;
            self.train_on_store()?;
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
        self.store.len()
    }
}
