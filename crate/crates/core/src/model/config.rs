use serde::{Deserialize, Serialize};

use crate::polycore::MAX_DEGREE;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    /// Lifted channel count.
    pub width: usize,
    pub n_layers: usize,
    /// Polynomial degree of every spectral layer (number of modes minus one).
    pub degree: usize,
    pub in_channels: usize,
    pub out_channels: usize,
    pub seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self { width: 32, n_layers: 4, degree: 16, in_channels: 1, out_channels: 1, seed: 0 }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.width == 0 {
            return Err(Error::Config("width must be at least 1".into()));
        }
        if self.n_layers == 0 {
            return Err(Error::Config("n_layers must be at least 1".into()));
        }
        if self.degree > MAX_DEGREE {
            return Err(Error::Config(format!("degree {} exceeds {MAX_DEGREE}", self.degree)));
        }
        if self.in_channels == 0 || self.out_channels == 0 {
            return Err(Error::Config("channel counts must be positive".into()));
        }
        Ok(())
    }

    /// Trainable scalar count; depends on the configuration only.
    pub fn parameter_count(&self) -> usize {
        let (w, modes) = (self.width, self.degree + 1);
        let lift = w * self.in_channels + w;
        let layer = modes * w * w + w * w + w;
        let project = w * w + w + self.out_channels * w + self.out_channels;
        lift + self.n_layers * layer + project
    }
}
