use std::fmt;

use serde::{Deserialize, Serialize};

/// A list of named, non-negative residuals.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    pub entries: Vec<(String, f64)>,
}

impl Residuals {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, name: impl Into<String>, value: f64) {
        self.entries.push((name.into(), value));
    }

    pub fn with(mut self, name: impl Into<String>, value: f64) -> Self {
        self.push(name, value);
        self
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.entries.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    pub fn max(&self) -> f64 {
        self.entries.iter().map(|(_, v)| *v).fold(0.0, f64::max)
    }

    /// True iff every residual is at most `tol` (NaN fails).
    pub fn passes(&self, tol: f64) -> bool {
        self.entries.iter().all(|(_, v)| *v <= tol)
    }

    pub fn extend_prefixed(&mut self, prefix: &str, other: &Residuals) {
        for (n, v) in &other.entries {
            self.entries.push((format!("{prefix}.{n}"), *v));
        }
    }
}

impl fmt::Display for Residuals {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, v) in &self.entries {
            writeln!(f, "{n:<32} {v:.3e}")?;
        }
        Ok(())
    }
}
