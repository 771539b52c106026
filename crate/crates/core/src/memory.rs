//! Class-balanced sliding-window memory: one bounded FIFO queue per class,
//! and the pair construction that turns its contents into a balanced set of
//! positive (same class) and negative (different class) training pairs.

use std::collections::VecDeque;

use rand::seq::{index, SliceRandom};
use rand::Rng;

use crate::error::{domain, Error, Result};
use crate::scalar::Scalar;
use crate::streamgen::Instance;

#[derive(Debug, Clone)]
pub struct QueueStore<S> {
    queues: Vec<VecDeque<Instance<S>>>,
    capacity: usize,
}

impl<S: Scalar> QueueStore<S> {
    pub fn new(classes: usize, capacity: usize) -> Result<Self> {
        if classes < 2 || capacity == 0 {
            return Err(Error::Config(format!(
                "queue store needs >= 2 classes and capacity >= 1 (got {classes}, {capacity})"
            )));
        }
        Ok(QueueStore {
            queues: (0..classes)
                .map(|_| VecDeque::with_capacity(capacity + 1))
                .collect(),
            capacity,
        })
    }

    /// A store seeded with an initial labelled set, in the given order.
    pub fn with_initial(
        classes: usize,
        capacity: usize,
        initial: impl IntoIterator<Item = Instance<S>>,
    ) -> Result<Self> {
        let mut store = Self::new(classes, capacity)?;
        for inst in initial {
            store.append(inst)?;
        }
        Ok(store)
    }

    pub fn classes(&self) -> usize {
        self.queues.len()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Queue of `class`, oldest first.
    pub fn queue(&self, class: usize) -> &VecDeque<Instance<S>> {
        &self.queues[class]
    }

    pub fn len(&self) -> usize {
        self.queues.iter().map(VecDeque::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.queues.iter().all(VecDeque::is_empty)
    }

    pub fn is_full(&self) -> bool {
        self.queues.iter().all(|q| q.len() == self.capacity)
    }

    /// Pushes `inst` onto its class queue, evicting the oldest element when
    /// the queue is over capacity.
    pub fn append(&mut self, inst: Instance<S>) -> Result<()> {
        let class = inst
            .y
            .ok_or_else(|| domain("cannot store an unlabelled instance"))?;
        let k = self.queues.len();
        let queue = self
            .queues
            .get_mut(class)
            .ok_or_else(|| domain(format!("label {class} outside 0..{k}")))?;
        queue.push_back(inst);
        if queue.len() > self.capacity {
            queue.pop_front();
        }
        Ok(())
    }

    /// All stored elements with their class, grouped by class and in queue
    /// order within each class.
    pub fn snapshot(&self) -> Vec<(&Instance<S>, usize)> {
        self.queues
            .iter()
            .enumerate()
            .flat_map(|(c, q)| q.iter().map(move |inst| (inst, c)))
            .collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Instance<S>> {
        self.queues.iter().flatten()
    }

    /// Balanced training pairs built from the current contents.
    pub fn prepare_pairs<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<PairSet<S>> {
        if let Some((c, q)) = self.queues.iter().enumerate().find(|(_, q)| q.len() < 2) {
            return Err(Error::Precondition(format!(
                "queue {c} holds {} instance(s); pairing needs at least 2 per class",
                q.len()
            )));
        }
        let instances: Vec<Instance<S>> = self.iter().cloned().collect();
        Ok(self.candidates().balance(instances, rng))
    }

    /// Every unbalanced candidate pair over the snapshot order.
    pub fn candidates(&self) -> PairCandidates {
        let classes: Vec<usize> = self.snapshot().iter().map(|&(_, c)| c).collect();
        PairCandidates::enumerate(&classes)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pair {
    pub a: usize,
    pub b: usize,
    pub same: bool,
}

impl Pair {
    pub fn target<S: Scalar>(&self) -> S {
        if self.same {
            S::one()
        } else {
            S::zero()
        }
    }
}

/// Training pairs indexing into an owned copy of the stored instances.
#[derive(Debug, Clone)]
pub struct PairSet<S> {
    instances: Vec<Instance<S>>,
    pairs: Vec<Pair>,
}

impl<S: Scalar> PairSet<S> {
    pub fn pairs(&self) -> &[Pair] {
        &self.pairs
    }

    pub fn instances(&self) -> &[Instance<S>] {
        &self.instances
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn get(&self, i: usize) -> (&Instance<S>, &Instance<S>, bool) {
        let p = self.pairs[i];
        (&self.instances[p.a], &self.instances[p.b], p.same)
    }

    pub fn positives(&self) -> usize {
        self.pairs.iter().filter(|p| p.same).count()
    }

    pub fn negatives(&self) -> usize {
        self.pairs.len() - self.positives()
    }
}

/// Unordered pairs with replacement over positions `0..n`, split by kind.
#[derive(Debug, Clone, Default)]
pub struct PairCandidates {
    pub identical: Vec<Pair>,
    pub same: Vec<Pair>,
    pub diff: Vec<Pair>,
}

impl PairCandidates {
    pub fn enumerate(classes: &[usize]) -> Self {
        let mut out = PairCandidates::default();
        for i in 0..classes.len() {
            out.identical.push(Pair {
                a: i,
                b: i,
                same: true,
            });
            for j in i + 1..classes.len() {
                if classes[i] == classes[j] {
                    out.same.push(Pair {
                        a: i,
                        b: j,
                        same: true,
                    });
                } else {
                    out.diff.push(Pair {
                        a: i,
                        b: j,
                        same: false,
                    });
                }
            }
        }
        out
    }

    /// Downsamples whichever of positives/negatives is larger to the size
    /// of the other, then shuffles the union.
    pub fn balance<S: Scalar, R: Rng + ?Sized>(
        self,
        instances: Vec<Instance<S>>,
        rng: &mut R,
    ) -> PairSet<S> {
        let mut positives = self.identical;
        positives.extend(self.same);
        let mut negatives = self.diff;
        let keep = positives.len().min(negatives.len());
        let downsample = |v: &mut Vec<Pair>, rng: &mut R| {
            if v.len() > keep {
                let chosen = index::sample(rng, v.len(), keep);
                *v = chosen.iter().map(|i| v[i]).collect();
            }
        };
        downsample(&mut positives, rng);
        downsample(&mut negatives, rng);
        positives.extend(negatives);
        positives.shuffle(rng);
        PairSet {
            instances,
            pairs: positives,
        }
    }
}
