//! Error traces and the scalar metrics built on them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::Table;

/// Normalized error sampled over time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorTrace {
    pub label: String,
    samples: Vec<(f64, f64)>,
}

impl ErrorTrace {
    pub fn new(label: impl Into<String>) -> Self {
        Self { label: label.into(), samples: Vec::new() }
    }

    pub fn from_samples(label: impl Into<String>, samples: Vec<(f64, f64)>) -> Result<Self> {
        let mut trace = Self::new(label);
        for (t, v) in samples {
            trace.push(t, v)?;
        }
        Ok(trace)
    }

    /// Appends a sample; times must increase strictly and values be non-negative.
    pub fn push(&mut self, t: f64, value: f64) -> Result<()> {
        if let Some(&(last, _)) = self.samples.last() {
            if t.partial_cmp(&last) != Some(std::cmp::Ordering::Greater) {
                return Err(Error::Config(format!("sample time {t} does not follow {last}")));
            }
        }
        if !(value >= 0.0) {
            return Err(Error::Config(format!("error value {value} is negative or NaN")));
        }
        self.samples.push((t, value));
        Ok(())
    }

    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.0)
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.1)
    }

    pub fn last_value(&self) -> Option<f64> {
        self.samples.last().map(|s| s.1)
    }

    pub fn to_table(&self) -> Table {
        let mut table = Table::new(["t", "error"]).comment(format!("label={}", self.label));
        for &(t, v) in &self.samples {
            table.push_numbers(&[t, v]);
        }
        table
    }

    pub fn from_table(table: &Table) -> Result<Self> {
        let label = table
            .comments
            .iter()
            .find_map(|c| c.strip_prefix("label="))
            .unwrap_or_default()
            .to_string();
        let t = table.column_f64("t")?;
        let v = table.column_f64("error")?;
        Self::from_samples(label, t.into_iter().zip(v).collect())
    }
}

/// Mean of `|numeric - exact| / normalizer` over all points.
pub fn mean_abs_error(numeric: &[f64], exact: &[f64], normalizer: f64) -> Result<f64> {
    if numeric.len() != exact.len() {
        return Err(Error::LengthMismatch(numeric.len(), exact.len()));
    }
    if !(normalizer > 0.0) {
        return Err(Error::Config(format!("normalizer must be positive, got {normalizer}")));
    }
    if numeric.is_empty() {
        return Ok(0.0);
    }
    let sum: f64 = numeric.iter().zip(exact).map(|(a, b)| (a - b).abs()).sum();
    Ok(sum / normalizer / numeric.len() as f64)
}

/// Fraction of samples at which `a` is strictly below `b`.
pub fn pct_better(a: &ErrorTrace, b: &ErrorTrace) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::MisalignedTimes(0));
    }
    for (i, (ta, tb)) in a.times().zip(b.times()).enumerate() {
        if (ta - tb).abs() > 1e-9 * ta.abs().max(1.0) {
            return Err(Error::MisalignedTimes(i));
        }
    }
    if a.is_empty() {
        return Ok(0.0);
    }
    let better = a.values().zip(b.values()).filter(|(x, y)| x < y).count();
    Ok(better as f64 / a.len() as f64)
}
