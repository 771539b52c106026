use rand_chacha::ChaCha8Rng;

use super::{
    LearnerKind, LearnerParams, OnlineLearner, Oracle, QueryControl, SiameseModel, StepOutcome,
};
use crate::active::BudgetState;
use crate::error::{Error, Result};
use crate::memory::QueueStore;
use crate::scalar::Scalar;
use crate::streamgen::Instance;

/// Class with the highest mean similarity (ties to the lowest index), and
/// the per-class means. `sims[c]` holds the similarities to queue `c`.
pub fn argmax_mean<S: Scalar>(sims: &[Vec<S>]) -> Result<(usize, Vec<S>)> {
    let mut means = Vec::with_capacity(sims.len());
    for (c, s) in sims.iter().enumerate() {
        if s.is_empty() {
            return Err(Error::Precondition(format!("queue {c} is empty")));
        }
        means.push(s.iter().copied().sum::<S>() / S::lit(s.len() as f64));
    }
    Ok((super::argmax(&means), means))
}

/// Siamese network over the class-balanced queues, queried by maximum
/// similarity within the predicted class.
#[derive(Debug, Clone)]
pub struct ActiSiamese<S> {
    model: SiameseModel<S>,
    store: QueueStore<S>,
    control: QueryControl,
    train_rng: ChaCha8Rng,
    /// Embeddings of the stored instances, per class in queue order.
    stored_embeddings: Vec<Vec<Vec<S>>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SiamesePrediction<S> {
    pub class: usize,
    pub mean_similarity: Vec<S>,
    /// Maximum similarity within the predicted class.
    pub criterion: S,
}

impl<S: Scalar> ActiSiamese<S> {
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
        let model = SiameseModel::new(params, input_dim, init_rng)?;
        let store = QueueStore::with_initial(classes, params.per_class, initial)?;
        Self::from_parts(model, store, params, strategy_rng, train_rng)
    }

    pub fn from_parts(
        model: SiameseModel<S>,
        store: QueueStore<S>,
        params: &LearnerParams,
        strategy_rng: ChaCha8Rng,
        train_rng: ChaCha8Rng,
    ) -> Result<Self> {
        let mut learner = ActiSiamese {
            model,
            store,
            control: QueryControl::new(params, strategy_rng)?,
            train_rng,
            stored_embeddings: Vec::new(),
        };
        learner.refresh_embeddings()?;
        Ok(learner)
    }

    pub fn model(&self) -> &SiameseModel<S> {
        &self.model
    }

    pub fn store(&self) -> &QueueStore<S> {
        &self.store
    }

    fn refresh_embeddings(&mut self) -> Result<()> {
        self.stored_embeddings = (0..self.store.classes())
            .map(|c| {
                self.store
                    .queue(c)
                    .iter()
                    .map(|inst| self.model.embed(&inst.x))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        Ok(())
    }

    /// Similarities of `x` to every stored instance, per class.
    pub fn similarities(&self, x: &[S]) -> Result<Vec<Vec<S>>> {
        let e = self.model.embed(x)?;
        Ok(self
            .stored_embeddings
            .iter()
            .map(|queue| {
                queue
                    .iter()
                    .map(|stored| self.model.similarity_of_embeddings(&e, stored))
                    .collect()
            })
            .collect())
    }

    pub fn predict_detailed(&self, x: &[S]) -> Result<SiamesePrediction<S>> {
        let sims = self.similarities(x)?;
        let (class, mean_similarity) = argmax_mean(&sims)?;
        let criterion = sims[class].iter().copied().fold(S::zero(), S::max);
        Ok(SiamesePrediction {
            class,
            mean_similarity,
            criterion,
        })
    }

    /// Appends a labelled instance and trains one epoch on fresh pairs.
    /// Returns the number of mini-batches.
    pub fn learn(&mut self, inst: Instance<S>) -> Result<usize> {
        self.store.append(inst)?;
        let pairs = self.store.prepare_pairs(&mut self.train_rng)?;
        let batches = self.model.train_epoch(&pairs)?;
        self.refresh_embeddings()?;
        Ok(batches)
    }
}

impl<S: Scalar> OnlineLearner<S> for ActiSiamese<S> {
    fn kind(&self) -> LearnerKind {
        LearnerKind::ActiSiamese
    }

    fn predict(&self, x: &[S]) -> Result<usize> {
        Ok(self.predict_detailed(x)?.class)
    }

    fn step(&mut self, x: &[S], oracle: &mut dyn Oracle) -> Result<StepOutcome> {
        let pred = self.predict_detailed(x)?;
        let criterion = pred.criterion.as_f64();
        let t = self.control.budget().steps();
        let label = self.control.acquire(criterion, oracle)?;
        if let Some(y) = label {
            self.learn(Instance::labelled(x.to_vec(), y, t))?;
        }
        self.control.close(label.is_some())?;
        Ok(StepOutcome {
            prediction: pred.class,
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
