use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use crate::{Error, Result};

/// Strictly increasing, finite sample locations (at least two).
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    points: Vec<f64>,
}

impl Grid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 points, got {}",
                points.len()
            )));
        }
        if let Some(p) = points.iter().find(|p| !p.is_finite()) {
            return Err(Error::InvalidGrid(format!("non-finite point {p}")));
        }
        if let Some(w) = points.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid(format!(
                "points not strictly increasing at {} -> {}",
                w[0], w[1]
            )));
        }
        Ok(Self { points })
    }

    /// `n` points from `start` to `end`, both endpoints included.
    pub fn uniform(start: f64, end: f64, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 points, got {n}")));
        }
        let step = (end - start) / (n - 1) as f64;
        let mut points: Vec<f64> = (0..n).map(|i| start + step * i as f64).collect();
        points[n - 1] = end;
        Self::new(points)
    }

    /// `n` points `i * length / n` covering one period `[0, length)`.
    pub fn periodic(length: f64, n: usize) -> Result<Self> {
        Self::new((0..n).map(|i| length * i as f64 / n as f64).collect())
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.points[0]
    }

    pub fn max(&self) -> f64 {
        self.points[self.points.len() - 1]
    }

    /// Every `stride`-th point counted back from the last one, so the
    /// right endpoint is always kept.
    pub fn subsample(&self, stride: usize) -> Result<Self> {
        if stride == 0 {
            return Err(Error::InvalidGrid("stride must be positive".into()));
        }
        let skip = (self.points.len() - 1) % stride;
        Self::new(self.points.iter().skip(skip).step_by(stride).copied().collect())
    }

    /// Content hash of the exact point bits together with a degree.
    pub fn content_hash(&self, degree: usize) -> u64 {
        let mut h = DefaultHasher::new();
        for p in &self.points {
            p.to_bits().hash(&mut h);
        }
        degree.hash(&mut h);
        h.finish()
    }

    pub(crate) fn bit_key(&self) -> Vec<u64> {
        self.points.iter().map(|p| p.to_bits()).collect()
    }
}

/// Affine map sending `[lo, hi]` onto `[-1, 1]`.
///
/// Stored by its bounds so both endpoints land exactly on `-1` and `+1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainMap {
    lo: f64,
    hi: f64,
}

impl DomainMap {
    pub fn from_bounds(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(Error::InvalidGrid(format!("non-finite bounds [{lo}, {hi}]")));
        }
        if lo == hi {
            return Err(Error::DegenerateGrid(lo));
        }
        if hi < lo {
            return Err(Error::InvalidGrid(format!("reversed bounds [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    /// The identity map on `[-1, 1]`.
    pub fn identity() -> Self {
        Self { lo: -1.0, hi: 1.0 }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn scale(&self) -> f64 {
        2.0 / (self.hi - self.lo)
    }

    pub fn shift(&self) -> f64 {
        -(self.hi + self.lo) / (self.hi - self.lo)
    }

    pub fn apply(&self, x: f64) -> f64 {
        if self.lo == -1.0 && self.hi == 1.0 {
            return x;
        }
        ((x - self.lo) - (self.hi - x)) / (self.hi - self.lo)
    }

    pub fn invert(&self, z: f64) -> f64 {
        0.5 * ((1.0 - z) * self.lo + (1.0 + z) * self.hi)
    }
}

pub fn rescale_domain(grid: &Grid) -> Result<DomainMap> {
    DomainMap::from_bounds(grid.min(), grid.max())
}

/// Values of one function on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSignal {
    pub values: Vec<f64>,
}

impl SampledSignal {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl From<Vec<f64>> for SampledSignal {
    fn from(values: Vec<f64>) -> Self {
        Self { values }
    }
}
