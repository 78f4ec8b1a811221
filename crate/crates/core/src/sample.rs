use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Squared projected radii `Y = X1² + X2²`, sorted ascending.
///
/// Tied observations are kept in `values` and merged into `distinct` with
/// their multiplicities in `counts`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SquaredRadiusSample {
    values: Vec<f64>,
    distinct: Vec<f64>,
    counts: Vec<usize>,
}

impl SquaredRadiusSample {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return invalid("sample is empty");
        }
        if let Some(bad) = values.iter().find(|y| !(y.is_finite() && **y > 0.0)) {
            return invalid(format!("squared radii must be positive and finite, found {bad}"));
        }
        values.sort_by(f64::total_cmp);
        let mut distinct: Vec<f64> = Vec::new();
        let mut counts: Vec<usize> = Vec::new();
        for &y in &values {
            match distinct.last() {
                Some(&last) if last == y => *counts.last_mut().unwrap() += 1,
                _ => {
                    distinct.push(y);
                    counts.push(1);
                }
            }
        }
        Ok(Self { values, distinct, counts })
    }

    /// Squared radii from projected positions.
    pub fn from_positions(positions: &[(f64, f64)]) -> Result<Self> {
        Self::new(positions.iter().map(|(a, b)| a * a + b * b).collect())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// All observations, sorted, with repetitions.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn distinct(&self) -> &[f64] {
        &self.distinct
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn max(&self) -> f64 {
        *self.values.last().unwrap()
    }

    pub fn contains(&self, y: f64) -> bool {
        self.distinct.binary_search_by(|v| v.total_cmp(&y)).is_ok()
    }

    /// Empirical distribution function of the observations.
    pub fn edf(&self, y: f64) -> f64 {
        self.values.partition_point(|&v| v <= y) as f64 / self.len() as f64
    }

    /// `(distinct value, multiplicity)` pairs.
    pub fn iter_weighted(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.distinct.iter().zip(&self.counts).map(|(&y, &c)| (y, c as f64))
    }
}

impl TryFrom<Vec<f64>> for SquaredRadiusSample {
    type Error = crate::Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

impl From<SquaredRadiusSample> for Vec<f64> {
    fn from(sample: SquaredRadiusSample) -> Self {
        sample.values
    }
}
