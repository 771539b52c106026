//! Synthetic data streams: `sea4` (four bands separated by thresholds on
//! `x1 + x2`) and `circles10` (ten class discs), with abrupt drift and
//! configurable class priors. Features are normalised to the unit square.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::error::{domain, Error, Result};
use crate::scalar::Scalar;

/// One stream element.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance<S> {
    pub x: Vec<S>,
    pub y: Option<usize>,
    pub t: u64,
}

impl<S: Scalar> Instance<S> {
    pub fn labelled(x: Vec<S>, y: usize, t: u64) -> Self {
        Instance { x, y: Some(y), t }
    }

    pub fn unlabelled(x: Vec<S>, t: u64) -> Self {
        Instance { x, y: None, t }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    /// Copy without the label, as seen by a learner before it queries.
    pub fn hide_label(&self) -> Self {
        Instance {
            x: self.x.clone(),
            y: None,
            t: self.t,
        }
    }
}

const SEA4_SPAN: f64 = 10.0;
const CIRCLES_SPAN: f64 = 15.0;

fn check_thresholds(th: &[f64; 3]) -> Result<()> {
    let ok = 0.0 < th[0] && th[0] < th[1] && th[1] < th[2] && th[2] < SEA4_SPAN;
    if ok {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "sea4 thresholds must satisfy 0 < t1 < t2 < t3 < 10, got {th:?}"
        )))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sea4Config {
    thresholds: [f64; 3],
    drifted_thresholds: [f64; 3],
    drift_step: Option<u64>,
}

impl Default for Sea4Config {
    fn default() -> Self {
        Sea4Config {
            thresholds: [3.0, 5.0, 7.0],
            drifted_thresholds: [2.0, 6.0, 8.0],
            drift_step: None,
        }
    }
}

impl Sea4Config {
    pub fn new(
        thresholds: [f64; 3],
        drifted_thresholds: [f64; 3],
        drift_step: Option<u64>,
    ) -> Result<Self> {
        check_thresholds(&thresholds)?;
        check_thresholds(&drifted_thresholds)?;
        Ok(Sea4Config {
            thresholds,
            drifted_thresholds,
            drift_step,
        })
    }

    pub fn with_drift_step(mut self, drift_step: Option<u64>) -> Self {
        self.drift_step = drift_step;
        self
    }

    pub fn thresholds(&self) -> [f64; 3] {
        self.thresholds
    }

    pub fn drifted_thresholds(&self) -> [f64; 3] {
        self.drifted_thresholds
    }

    pub fn drift_step(&self) -> Option<u64> {
        self.drift_step
    }

    /// Threshold triple in force at step `t`.
    pub fn active_thresholds(&self, t: u64) -> [f64; 3] {
        match self.drift_step {
            Some(d) if t >= d => self.drifted_thresholds,
            _ => self.thresholds,
        }
    }
}

/// Class of a raw `sea4` point. Bands are left-inclusive; the top band is
/// closed at 10.
pub fn sea4_label(x_raw: [f64; 2], cfg: &Sea4Config, t: u64) -> Result<usize> {
    if x_raw.iter().any(|v| !(0.0..=SEA4_SPAN).contains(v)) {
        return Err(domain(format!("sea4 input {x_raw:?} outside [0,10]^2")));
    }
    let sum = x_raw[0] + x_raw[1];
    let th = cfg.active_thresholds(t);
    Ok(th.iter().take_while(|&&b| sum >= b).count())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circle {
    pub cx: f64,
    pub cy: f64,
    pub r: f64,
}

impl Circle {
    pub const fn new(cx: f64, cy: f64, r: f64) -> Self {
        Circle { cx, cy, r }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        (x - self.cx).powi(2) + (y - self.cy).powi(2) <= self.r * self.r
    }
}

/// Staggered layout of ten radius-2 discs. The first three form the left
/// column; classes 0, 1, 2 and 6 change radius under drift, the others move
/// by (+1, +1).
const DEFAULT_CIRCLES: [Circle; 10] = [
    Circle::new(3.0, 2.5, 2.0),
    Circle::new(3.0, 7.5, 2.0),
    Circle::new(3.0, 12.5, 2.0),
    Circle::new(6.5, 5.0, 2.0),
    Circle::new(6.5, 10.0, 2.0),
    Circle::new(9.5, 2.5, 2.0),
    Circle::new(9.5, 7.5, 2.0),
    Circle::new(9.5, 12.5, 2.0),
    Circle::new(12.5, 5.0, 2.0),
    Circle::new(12.5, 10.0, 2.0),
];

const DEFAULT_RESIZED: [usize; 4] = [0, 1, 2, 6];
const DEFAULT_RESIZE_FACTOR: f64 = 1.5;

#[derive(Debug, Clone, PartialEq)]
pub struct Circles10Config {
    circles: Vec<Circle>,
    drifted_circles: Vec<Circle>,
    drift_step: Option<u64>,
}

impl Default for Circles10Config {
    fn default() -> Self {
        let circles = DEFAULT_CIRCLES.to_vec();
        let drifted_circles = circles
            .iter()
            .enumerate()
            .map(|(i, c)| {
                if DEFAULT_RESIZED.contains(&i) {
                    Circle::new(c.cx, c.cy, c.r * DEFAULT_RESIZE_FACTOR)
                } else {
                    Circle::new(c.cx + 1.0, c.cy + 1.0, c.r)
                }
            })
            .collect();
        Circles10Config {
            circles,
            drifted_circles,
            drift_step: None,
        }
    }
}

fn check_circles(circles: &[Circle]) -> Result<()> {
    if circles.len() != 10 {
        return Err(Error::Config(format!(
            "circles10 needs exactly 10 circles, got {}",
            circles.len()
        )));
    }
    for c in circles {
        let in_box = (0.0..=CIRCLES_SPAN).contains(&c.cx) && (0.0..=CIRCLES_SPAN).contains(&c.cy);
        if !(c.r > 0.0 && in_box) {
            return Err(Error::Config(format!("invalid circle {c:?}")));
        }
    }
    Ok(())
}

impl Circles10Config {
    pub fn new(
        circles: Vec<Circle>,
        drifted_circles: Vec<Circle>,
        drift_step: Option<u64>,
    ) -> Result<Self> {
        check_circles(&circles)?;
        check_circles(&drifted_circles)?;
        Ok(Circles10Config {
            circles,
            drifted_circles,
            drift_step,
        })
    }

    pub fn with_drift_step(mut self, drift_step: Option<u64>) -> Self {
        self.drift_step = drift_step;
        self
    }

    pub fn circles(&self) -> &[Circle] {
        &self.circles
    }

    pub fn drifted_circles(&self) -> &[Circle] {
        &self.drifted_circles
    }

    pub fn drift_step(&self) -> Option<u64> {
        self.drift_step
    }

    pub fn active_circles(&self, t: u64) -> &[Circle] {
        match self.drift_step {
            Some(d) if t >= d => &self.drifted_circles,
            _ => &self.circles,
        }
    }
}

/// Class prior `p(y)` of arriving instances.
#[derive(Debug, Clone)]
pub struct ImbalanceProfile {
    priors: Vec<f64>,
    sampler: WeightedIndex<f64>,
}

impl PartialEq for ImbalanceProfile {
    fn eq(&self, other: &Self) -> bool {
        self.priors == other.priors
    }
}

impl ImbalanceProfile {
    pub fn new(priors: Vec<f64>) -> Result<Self> {
        if priors.len() < 2 {
            return Err(Error::Config("need at least two class priors".into()));
        }
        if priors.iter().any(|&p| !(p > 0.0 && p.is_finite())) {
            return Err(Error::Config(format!(
                "priors must be positive: {priors:?}"
            )));
        }
        let total: f64 = priors.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!("priors sum to {total}, not 1")));
        }
        let sampler = WeightedIndex::new(&priors).map_err(|e| Error::Config(e.to_string()))?;
        Ok(ImbalanceProfile { priors, sampler })
    }

    pub fn balanced(k: usize) -> Result<Self> {
        Self::new(vec![1.0 / k as f64; k])
    }

    /// One majority class at `majority_prior`; the remaining mass is split
    /// evenly across the other `k - 1` classes.
    pub fn multi_minority(k: usize, majority: usize, majority_prior: f64) -> Result<Self> {
        if majority >= k || k < 2 {
            return Err(Error::Config(format!(
                "majority class {majority} invalid for {k} classes"
            )));
        }
        let minor = (1.0 - majority_prior) / (k - 1) as f64;
        let priors = (0..k)
            .map(|c| if c == majority { majority_prior } else { minor })
            .collect();
        Self::new(priors)
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    pub fn classes(&self) -> usize {
        self.priors.len()
    }

    pub fn draw_class<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.sampler.sample(rng)
    }
}

/// Raw `sea4` point of class `class`, by rejection from the uniform square.
fn sea4_point<R: Rng + ?Sized>(rng: &mut R, cfg: &Sea4Config, class: usize, t: u64) -> [f64; 2] {
    loop {
        let p = [
            rng.random::<f64>() * SEA4_SPAN,
            rng.random::<f64>() * SEA4_SPAN,
        ];
        if sea4_label(p, cfg, t).expect("point drawn inside the square") == class {
            return p;
        }
    }
}

/// Raw point uniform inside the class disc, before clamping.
pub fn circle_point<R: Rng + ?Sized>(rng: &mut R, circle: &Circle) -> [f64; 2] {
    let radius = circle.r * rng.random::<f64>().sqrt();
    let angle = rng.random::<f64>() * std::f64::consts::TAU;
    [
        circle.cx + radius * angle.cos(),
        circle.cy + radius * angle.sin(),
    ]
}

fn normalise<S: Scalar>(raw: [f64; 2], span: f64) -> Vec<S> {
    raw.iter()
        .map(|v| S::lit((v / span).clamp(0.0, 1.0)))
        .collect()
}

pub fn sample_sea4<S: Scalar, R: Rng + ?Sized>(
    rng: &mut R,
    cfg: &Sea4Config,
    profile: &ImbalanceProfile,
    t: u64,
) -> Instance<S> {
    let class = profile.draw_class(rng);
    let raw = sea4_point(rng, cfg, class, t);
    Instance::labelled(normalise(raw, SEA4_SPAN), class, t)
}

pub fn sample_circles10<S: Scalar, R: Rng + ?Sized>(
    rng: &mut R,
    cfg: &Circles10Config,
    profile: &ImbalanceProfile,
    t: u64,
) -> Instance<S> {
    let class = profile.draw_class(rng);
    circles10_instance(rng, cfg, class, t)
}

fn circles10_instance<S: Scalar, R: Rng + ?Sized>(
    rng: &mut R,
    cfg: &Circles10Config,
    class: usize,
    t: u64,
) -> Instance<S> {
    let raw = circle_point(rng, &cfg.active_circles(t)[class]);
    let clamped = [
        raw[0].clamp(0.0, CIRCLES_SPAN),
        raw[1].clamp(0.0, CIRCLES_SPAN),
    ];
    Instance::labelled(normalise(clamped, CIRCLES_SPAN), class, t)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Dataset {
    Sea4(Sea4Config),
    Circles10(Circles10Config),
}

impl Dataset {
    pub fn name(&self) -> &'static str {
        match self {
            Dataset::Sea4(_) => "sea4",
            Dataset::Circles10(_) => "circles10",
        }
    }

    pub fn classes(&self) -> usize {
        match self {
            Dataset::Sea4(_) => 4,
            Dataset::Circles10(_) => 10,
        }
    }

    pub fn dim(&self) -> usize {
        2
    }

    pub fn drift_step(&self) -> Option<u64> {
        match self {
            Dataset::Sea4(c) => c.drift_step(),
            Dataset::Circles10(c) => c.drift_step(),
        }
    }

    pub fn without_drift(&self) -> Dataset {
        match self {
            Dataset::Sea4(c) => Dataset::Sea4(c.clone().with_drift_step(None)),
            Dataset::Circles10(c) => Dataset::Circles10(c.clone().with_drift_step(None)),
        }
    }

    /// Class-conditional draw, independent of any prior.
    pub fn sample_class<S: Scalar, R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        class: usize,
        t: u64,
    ) -> Instance<S> {
        match self {
            Dataset::Sea4(cfg) => Instance::labelled(
                normalise(sea4_point(rng, cfg, class, t), SEA4_SPAN),
                class,
                t,
            ),
            Dataset::Circles10(cfg) => circles10_instance(rng, cfg, class, t),
        }
    }
}

/// A dataset paired with the prior used to draw arriving classes.
#[derive(Debug, Clone, PartialEq)]
pub struct Stream {
    pub dataset: Dataset,
    pub profile: ImbalanceProfile,
}

impl Stream {
    pub fn new(dataset: Dataset, profile: ImbalanceProfile) -> Result<Self> {
        if profile.classes() != dataset.classes() {
            return Err(Error::Config(format!(
                "{} has {} classes but the prior has {}",
                dataset.name(),
                dataset.classes(),
                profile.classes()
            )));
        }
        Ok(Stream { dataset, profile })
    }

    pub fn classes(&self) -> usize {
        self.dataset.classes()
    }

    pub fn sample<S: Scalar, R: Rng + ?Sized>(&self, rng: &mut R, t: u64) -> Instance<S> {
        match &self.dataset {
            Dataset::Sea4(cfg) => sample_sea4(rng, cfg, &self.profile, t),
            Dataset::Circles10(cfg) => sample_circles10(rng, cfg, &self.profile, t),
        }
    }
}

/// `per_class` labelled instances of each of the dataset's classes, drawn
/// from the pre-drift concept at `t = 0`, grouped by class.
pub fn make_initial_labelled<S: Scalar, R: Rng + ?Sized>(
    rng: &mut R,
    dataset: &Dataset,
    per_class: usize,
) -> Result<Vec<Instance<S>>> {
    if per_class < 2 {
        return Err(Error::Config(format!(
            "need at least two initial examples per class, got {per_class}"
        )));
    }
    let k = dataset.classes();
    let base = dataset.without_drift();
    let mut out = Vec::with_capacity(k * per_class);
    for class in 0..k {
        for _ in 0..per_class {
            out.push(base.sample_class(rng, class, 0));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sea(drift: Option<u64>) -> Sea4Config {
        Sea4Config::default().with_drift_step(drift)
    }

    #[test]
    fn sea4_bands() {
        assert_eq!(sea4_label([1.0, 1.0], &sea(Some(10)), 0).unwrap(), 0);
        // exactly on the first threshold belongs to the upper band
        assert_eq!(sea4_label([1.5, 1.5], &sea(None), 0).unwrap(), 1);
        assert_eq!(sea4_label([5.0, 5.0], &sea(None), 0).unwrap(), 3);
        assert_eq!(sea4_label([0.0, 0.0], &sea(None), 0).unwrap(), 0);
    }

    #[test]
    fn sea4_drift_is_abrupt() {
        let cfg = sea(Some(100));
        assert_eq!(sea4_label([1.0, 1.5], &cfg, 99).unwrap(), 0);
        assert_eq!(sea4_label([1.0, 1.5], &cfg, 100).unwrap(), 1);
        assert_eq!(sea4_label([1.0, 1.5], &cfg, 10_000).unwrap(), 1);
    }

    #[test]
    fn sea4_rejects_out_of_range() {
        assert!(matches!(
            sea4_label([10.5, 0.0], &sea(None), 0),
            Err(Error::Domain(_))
        ));
        assert!(sea4_label([-0.1, 0.0], &sea(None), 0).is_err());
    }

    #[test]
    fn threshold_ordering_enforced() {
        assert!(Sea4Config::new([3.0, 2.0, 7.0], [2.0, 6.0, 8.0], None).is_err());
        assert!(Sea4Config::new([3.0, 5.0, 10.0], [2.0, 6.0, 8.0], None).is_err());
        assert!(Sea4Config::new([3.0, 5.0, 7.0], [2.0, 6.0, 8.0], Some(5)).is_ok());
    }

    #[test]
    fn priors_validated() {
        assert!(ImbalanceProfile::new(vec![0.5, 0.4]).is_err());
        assert!(ImbalanceProfile::new(vec![1.0, 0.0]).is_err());
        let p = ImbalanceProfile::multi_minority(4, 0, 0.97).unwrap();
        for (a, b) in p.priors().iter().zip([0.97, 0.01, 0.01, 0.01]) {
            assert!((a - b).abs() < 1e-12);
        }
        let p = ImbalanceProfile::multi_minority(10, 0, 0.955).unwrap();
        assert!((p.priors().iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!((p.priors()[3] - 0.005).abs() < 1e-12);
    }

    #[test]
    fn balanced_sea4_frequencies() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let stream = Stream::new(
            Dataset::Sea4(sea(None)),
            ImbalanceProfile::balanced(4).unwrap(),
        )
        .unwrap();
        let n = 100_000;
        let mut counts = [0usize; 4];
        for t in 0..n {
            let inst: Instance<f64> = stream.sample(&mut rng, t);
            assert!(inst.x.iter().all(|v| (0.0..=1.0).contains(v)));
            let y = inst.y.unwrap();
            let raw = [inst.x[0] * 10.0, inst.x[1] * 10.0];
            assert_eq!(sea4_label(raw, &sea(None), t).unwrap(), y);
            counts[y] += 1;
        }
        for c in counts {
            assert!((c as f64 / n as f64 - 0.25).abs() < 0.01, "{counts:?}");
        }
    }

    #[test]
    fn imbalanced_sea4_majority_frequency() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let stream = Stream::new(
            Dataset::Sea4(sea(None)),
            ImbalanceProfile::multi_minority(4, 0, 0.97).unwrap(),
        )
        .unwrap();
        let n = 50_000;
        let majority = (0..n)
            .filter(|&t| stream.sample::<f64, _>(&mut rng, t).y == Some(0))
            .count();
        assert!((majority as f64 / n as f64 - 0.97).abs() < 0.005);
    }

    // chi-square critical values at p = 0.001 for 3 and 9 degrees of freedom
    const CHI2_CRIT: [(usize, f64); 2] = [(4, 16.266), (10, 27.877)];

    #[test]
    fn class_frequencies_pass_chi_square() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let streams = [
            Stream::new(
                Dataset::Sea4(sea(None)),
                ImbalanceProfile::multi_minority(4, 0, 0.97).unwrap(),
            )
            .unwrap(),
            Stream::new(
                Dataset::Circles10(Circles10Config::default()),
                ImbalanceProfile::multi_minority(10, 0, 0.955).unwrap(),
            )
            .unwrap(),
        ];
        let n = 100_000;
        for (stream, (k, crit)) in streams.iter().zip(CHI2_CRIT) {
            let mut counts = vec![0usize; k];
            for t in 0..n {
                counts[stream.sample::<f64, _>(&mut rng, t as u64).y.unwrap()] += 1;
            }
            let chi2: f64 = counts
                .iter()
                .zip(stream.profile.priors())
                .map(|(&o, &p)| {
                    let e = p * n as f64;
                    (o as f64 - e).powi(2) / e
                })
                .sum();
            assert!(chi2 < crit, "chi2 = {chi2} for {counts:?}");
        }
    }

    #[test]
    fn circle_points_inside_disc() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let c = Circle::new(4.0, 5.0, 2.5);
        for _ in 0..10_000 {
            let p = circle_point(&mut rng, &c);
            assert!(c.contains(p[0], p[1]) || (p[0] - 4.0).hypot(p[1] - 5.0) - 2.5 < 1e-12);
        }
    }

    #[test]
    fn circles_drift_shifts_mean() {
        let cfg = Circles10Config::default().with_drift_step(Some(1));
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let ds = Dataset::Circles10(cfg);
        // class 3 is translated, and stays away from the border
        let n = 100_000;
        let mean = |rng: &mut ChaCha8Rng, t: u64| {
            let mut acc = [0.0; 2];
            for _ in 0..n {
                let inst: Instance<f64> = ds.sample_class(rng, 3, t);
                acc[0] += inst.x[0];
                acc[1] += inst.x[1];
            }
            [acc[0] / n as f64, acc[1] / n as f64]
        };
        let before = mean(&mut rng, 0);
        let after = mean(&mut rng, 1);
        for d in 0..2 {
            assert!(((after[d] - before[d]) - 1.0 / 15.0).abs() < 0.005);
        }
    }

    #[test]
    fn circles_clamped_to_unit_square() {
        let cfg = Circles10Config::default().with_drift_step(Some(0));
        let profile = ImbalanceProfile::balanced(10).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for t in 0..20_000 {
            let inst: Instance<f32> = sample_circles10(&mut rng, &cfg, &profile, t);
            assert!(inst.x.iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }

    #[test]
    fn circles_config_validated() {
        let mut circles = DEFAULT_CIRCLES.to_vec();
        assert!(Circles10Config::new(circles.clone(), circles.clone(), None).is_ok());
        circles[4].r = 0.0;
        assert!(Circles10Config::new(circles.clone(), DEFAULT_CIRCLES.to_vec(), None).is_err());
        circles.pop();
        assert!(Circles10Config::new(circles, DEFAULT_CIRCLES.to_vec(), None).is_err());
    }

    #[test]
    fn initial_set_sizes() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let ds = Dataset::Sea4(sea(Some(0)));
        let set: Vec<Instance<f64>> = make_initial_labelled(&mut rng, &ds, 5).unwrap();
        assert_eq!(set.len(), 20);
        for c in 0..4 {
            assert_eq!(set.iter().filter(|i| i.y == Some(c)).count(), 5);
        }
        // drawn from the pre-drift concept even though drift starts at 0
        for inst in &set {
            let raw = [inst.x[0] * 10.0, inst.x[1] * 10.0];
            assert_eq!(sea4_label(raw, &sea(None), 0).unwrap(), inst.y.unwrap());
        }
        let ds2 = Dataset::Circles10(Circles10Config::default());
        let two: Vec<Instance<f64>> = make_initial_labelled(&mut rng, &ds2, 2).unwrap();
        assert_eq!(two.len(), 20);
        assert!(matches!(
            make_initial_labelled::<f64, _>(&mut rng, &ds, 1),
            Err(Error::Config(_))
        ));
    }
}
