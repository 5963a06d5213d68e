use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Observations strictly inside (0, 1), kept both sorted and in arrival order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    sorted: Vec<f64>,
    original: Vec<f64>,
}

impl Sample {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Invalid("sample is empty".into()));
        }
        if let Some((i, &x)) = values
            .iter()
            .enumerate()
            .find(|(_, &x)| !(x > 0.0 && x < 1.0))
        {
            return Err(Error::Domain(format!(
                "observation {} = {x} is not strictly inside (0, 1)",
                i + 1
            )));
        }
        let mut sorted = values.clone();
        sorted.sort_by(f64::total_cmp);
        Ok(Self {
            sorted,
            original: values,
        })
    }

    /// Order statistics x_{1:n} ≤ … ≤ x_{n:n}.
    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    pub fn original(&self) -> &[f64] {
        &self.original
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.sorted.iter().sum::<f64>() / self.len() as f64
    }

    /// The sample with every observation raised to the power `a`.
    pub fn powf(&self, a: f64) -> Result<Self> {
        Self::new(self.original.iter().map(|x| x.powf(a)).collect())
    }
}
