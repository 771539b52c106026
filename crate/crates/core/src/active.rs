//! One-by-one active learning: query strategies over a scalar criterion in
//! `[0, 1]` (lower means less confident) and budget spending mechanisms.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Lower clamp of the adaptive threshold.
pub const THETA_FLOOR: f64 = 1e-6;

/// Fixed uncertainty: query when the criterion is below a constant.
pub fn should_query_fixed(theta: f64, criterion: f64) -> bool {
    criterion < theta
}

/// Randomised variable threshold. The threshold shrinks by a factor `1 - s`
/// after each query and grows by `1 + s` otherwise; the comparison is made
/// against the threshold scaled by `eta ~ Normal(1, delta)`.
#[derive(Debug, Clone)]
pub struct VariableThreshold {
    theta: f64,
    step: f64,
    spread: f64,
    rng: ChaCha8Rng,
}

impl VariableThreshold {
    // negated comparisons also reject NaN
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn new(theta0: f64, step: f64, spread: f64, rng: ChaCha8Rng) -> Result<Self> {
        if !(step > 0.0) || !(spread >= 0.0) || !(theta0 > 0.0 && theta0 <= 1.0) {
            return Err(Error::Config(format!(
                "variable threshold needs theta0 in (0,1], s > 0, delta >= 0 (got {theta0}, {step}, {spread})"
            )));
        }
        Ok(VariableThreshold {
            theta: theta0,
            step,
            spread,
            rng,
        })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn should_query(&mut self, criterion: f64) -> bool {
        let z: f64 = StandardNormal.sample(&mut self.rng);
        let randomised = self.theta * (1.0 + self.spread * z);
        let query = criterion < randomised;
        self.theta *= if query {
            1.0 - self.step
        } else {
            1.0 + self.step
        };
        self.theta = self.theta.clamp(THETA_FLOOR, 1.0);
        query
    }
}

#[derive(Debug, Clone)]
#[allow(clippy::large_enum_variant)]
pub enum Strategy {
    Fixed { theta: f64 },
    Variable(VariableThreshold),
}

impl Strategy {
    pub fn should_query(&mut self, criterion: f64) -> bool {
        match self {
            Strategy::Fixed { theta } => should_query_fixed(*theta, criterion),
            Strategy::Variable(v) => v.should_query(criterion),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StrategyKind {
    Fixed,
    Variable,
}

impl FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed" => Ok(StrategyKind::Fixed),
            "variable" => Ok(StrategyKind::Variable),
            _ => Err(Error::Config(format!("unknown strategy `{s}`"))),
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StrategyKind::Fixed => "fixed",
            StrategyKind::Variable => "variable",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BudgetMechanism {
    /// Total queries over total steps.
    Exact,
    /// Exact query count over the last `w` steps, divided by `w`.
    WindowExact,
    /// Exponentially faded query count with factor `(w - 1) / w`, over `w`.
    WindowApprox,
}

impl FromStr for BudgetMechanism {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(BudgetMechanism::Exact),
            "window_exact" => Ok(BudgetMechanism::WindowExact),
            "window_approx" => Ok(BudgetMechanism::WindowApprox),
            _ => Err(Error::Config(format!("unknown budget mechanism `{s}`"))),
        }
    }
}

impl fmt::Display for BudgetMechanism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BudgetMechanism::Exact => "exact",
            BudgetMechanism::WindowExact => "window_exact",
            BudgetMechanism::WindowApprox => "window_approx",
        })
    }
}

/// Labelling expenses of one learner.
#[derive(Debug, Clone)]
pub struct BudgetState {
    mechanism: BudgetMechanism,
    budget: f64,
    window: usize,
    steps: u64,
    queried: u64,
    recent: VecDeque<bool>,
    recent_count: usize,
    faded: f64,
}

impl BudgetState {
    pub fn new(mechanism: BudgetMechanism, budget: f64, window: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&budget) {
            return Err(Error::Config(format!("budget {budget} outside [0,1]")));
        }
        if window == 0 {
            return Err(Error::Config("budget window must be >= 1".into()));
        }
        Ok(BudgetState {
            mechanism,
            budget,
            window,
            steps: 0,
            queried: 0,
            recent: VecDeque::with_capacity(window),
            recent_count: 0,
            faded: 0.0,
        })
    }

    pub fn mechanism(&self) -> BudgetMechanism {
        self.mechanism
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn window(&self) -> usize {
        self.window
    }

    /// Steps recorded so far.
    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn total_queried(&self) -> u64 {
        self.queried
    }

    pub fn fading(&self) -> f64 {
        (self.window as f64 - 1.0) / self.window as f64
    }

    /// Approximate windowed query count.
    pub fn faded_count(&self) -> f64 {
        self.faded
    }

    /// Current spending estimate in `[0, 1]`; zero before the first step.
    pub fn spending(&self) -> f64 {
        match self.mechanism {
            BudgetMechanism::Exact if self.steps == 0 => 0.0,
            BudgetMechanism::Exact => self.queried as f64 / self.steps as f64,
            BudgetMechanism::WindowExact => self.recent_count as f64 / self.window as f64,
            BudgetMechanism::WindowApprox => self.faded / self.window as f64,
        }
    }

    pub fn within_budget(&self) -> bool {
        self.spending() < self.budget
    }

    /// Closes time step `step` (0-based), which must be the next unrecorded
    /// one.
    pub fn record(&mut self, step: u64, queried: bool) -> Result<()> {
        if step != self.steps {
            return Err(Error::Usage(format!(
                "budget step {step} recorded out of order (expected {})",
                self.steps
            )));
        }
        self.steps += 1;
        self.queried += u64::from(queried);
        match self.mechanism {
            BudgetMechanism::Exact => {}
            BudgetMechanism::WindowExact => {
                self.recent.push_back(queried);
                self.recent_count += usize::from(queried);
                if self.recent.len() > self.window && self.recent.pop_front() == Some(true) {
                    self.recent_count -= 1;
                }
            }
            BudgetMechanism::WindowApprox => {
                self.faded = self.fading() * self.faded + f64::from(u8::from(queried));
            }
        }
        Ok(())
    }
}

/// Draws `Bernoulli(q)` outcomes; used by audits of the spending estimators.
pub fn bernoulli<R: Rng + ?Sized>(rng: &mut R, q: f64) -> bool {
    rng.random::<f64>() < q
}
