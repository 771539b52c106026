//! Prequential (test-then-train) G-mean with a fading factor, and
//! aggregation of per-run curves into mean and standard error.

use std::io::{BufRead, Write};

use crate::error::{domain, Error, Result};

/// Faded per-class support and hit counts.
///
/// Every update first multiplies all counters by the fading factor `f`, then
/// credits the true class. With `f = 1` the recalls are the plain running
/// recalls.
#[derive(Debug, Clone, PartialEq)]
pub struct PrequentialState {
    fading: f64,
    support: Vec<f64>,
    hits: Vec<f64>,
    seen: Vec<bool>,
}

impl PrequentialState {
    pub fn new(classes: usize, fading: f64) -> Result<Self> {
        if !(fading > 0.0 && fading <= 1.0) {
            return Err(Error::Config(format!(
                "fading factor {fading} outside (0,1]"
            )));
        }
        Ok(PrequentialState {
            fading,
            support: vec![0.0; classes],
            hits: vec![0.0; classes],
            seen: vec![false; classes],
        })
    }

    pub fn classes(&self) -> usize {
        self.support.len()
    }

    pub fn fading(&self) -> f64 {
        self.fading
    }

    pub fn support(&self, class: usize) -> f64 {
        self.support[class]
    }

    pub fn hits(&self, class: usize) -> f64 {
        self.hits[class]
    }

    pub fn update(&mut self, y_true: usize, y_pred: usize) -> Result<()> {
        let k = self.classes();
        if y_true >= k || y_pred >= k {
            return Err(domain(format!(
                "class pair ({y_true}, {y_pred}) outside 0..{k}"
            )));
        }
        for (n, h) in self.support.iter_mut().zip(&mut self.hits) {
            *n *= self.fading;
            *h *= self.fading;
        }
        self.support[y_true] += 1.0;
        if y_pred == y_true {
            self.hits[y_true] += 1.0;
        }
        self.seen[y_true] = true;
        Ok(())
    }

    /// Faded recall of `class`, or `None` if it has not been seen.
    pub fn recall(&self, class: usize) -> Option<f64> {
        self.seen[class].then(|| self.hits[class] / self.support[class])
    }

    /// Geometric mean of the recalls of all classes seen so far; zero when
    /// nothing has been seen.
    pub fn gmean(&self) -> f64 {
        gmean_of((0..self.classes()).filter_map(|c| self.recall(c)))
    }
}

/// Geometric mean, zero for an empty input or any zero factor.
pub fn gmean_of(recalls: impl IntoIterator<Item = f64>) -> f64 {
    let mut product = 1.0;
    let mut n = 0;
    for r in recalls {
        if r <= 0.0 {
            return 0.0;
        }
        product *= r;
        n += 1;
    }
    if n == 0 {
        0.0
    } else {
        product.powf(1.0 / n as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub t: u64,
    pub gmean: f64,
}

/// Per-step mean and standard error over repetitions.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateCurve {
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    pub n: usize,
}

impl AggregateCurve {
    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }

    pub fn final_mean(&self) -> f64 {
        self.mean.last().copied().unwrap_or(0.0)
    }

    pub fn final_stderr(&self) -> f64 {
        self.stderr.last().copied().unwrap_or(0.0)
    }
}

/// Mean and standard error (sample std over `sqrt(n)`) at every step. A
/// single curve yields zero standard error.
pub fn aggregate(curves: &[Vec<f64>]) -> Result<AggregateCurve> {
    let first = curves
        .first()
        .ok_or_else(|| domain("aggregate needs at least one curve"))?;
    let len = first.len();
    if let Some(bad) = curves.iter().find(|c| c.len() != len) {
        return Err(domain(format!(
            "curve lengths differ ({} vs {})",
            len,
            bad.len()
        )));
    }
    let n = curves.len();
    let mut mean = Vec::with_capacity(len);
    let mut stderr = Vec::with_capacity(len);
    for t in 0..len {
        let m = curves.iter().map(|c| c[t]).sum::<f64>() / n as f64;
        let se = if n > 1 {
            let var = curves.iter().map(|c| (c[t] - m).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        mean.push(m);
        stderr.push(se);
    }
    Ok(AggregateCurve { mean, stderr, n })
}

pub fn write_curve_csv<W: Write>(mut out: W, curve: &[f64]) -> Result<()> {
    writeln!(out, "t,gmean")?;
    for (t, g) in curve.iter().enumerate() {
        writeln!(out, "{t},{g}")?;
    }
    Ok(())
}

pub fn write_aggregate_csv<W: Write>(mut out: W, agg: &AggregateCurve) -> Result<()> {
    writeln!(out, "t,mean,stderr,n")?;
    for (t, (m, s)) in agg.mean.iter().zip(&agg.stderr).enumerate() {
        writeln!(out, "{t},{m},{s},{}", agg.n)?;
    }
    Ok(())
}

fn parse_field<T: std::str::FromStr>(s: Option<&str>, line: usize) -> Result<T> {
    s.and_then(|v| v.trim().parse().ok())
        .ok_or_else(|| domain(format!("malformed CSV at line {line}")))
}

pub fn read_curve_csv<R: BufRead>(input: R) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate().skip(1) {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut f = line.split(',');
        let _t: u64 = parse_field(f.next(), i + 1)?;
        out.push(parse_field(f.next(), i + 1)?);
    }
    Ok(out)
}

pub fn read_aggregate_csv<R: BufRead>(input: R) -> Result<AggregateCurve> {
    let mut agg = AggregateCurve {
        mean: Vec::new(),
        stderr: Vec::new(),
        n: 0,
    };
    for (i, line) in input.lines().enumerate().skip(1) {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut f = line.split(',');
        let _t: u64 = parse_field(f.next(), i + 1)?;
        agg.mean.push(parse_field(f.next(), i + 1)?);
        agg.stderr.push(parse_field(f.next(), i + 1)?);
        agg.n = parse_field(f.next(), i + 1)?;
    }
    Ok(agg)
}
