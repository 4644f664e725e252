use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::polycore::{Grid, SampledSignal};

/// `f(t) = Σ_k a_k sin(2π k t / period + φ_k)`, `k = 1..=K`.
#[derive(Debug, Clone, PartialEq)]
pub struct Forcing {
    pub amplitudes: Vec<f64>,
    pub phases: Vec<f64>,
    pub period: f64,
}

impl Forcing {
    pub fn new(amplitudes: Vec<f64>, phases: Vec<f64>, period: f64) -> Self {
        assert_eq!(amplitudes.len(), phases.len());
        Self { amplitudes, phases, period }
    }

    pub fn zero(period: f64) -> Self {
        Self::new(Vec::new(), Vec::new(), period)
    }

    pub fn eval(&self, t: f64) -> f64 {
        let w = 2.0 * std::f64::consts::PI * t / self.period;
        self.amplitudes
            .iter()
            .zip(&self.phases)
            .enumerate()
            .map(|(i, (a, p))| a * ((i + 1) as f64 * w + p).sin())
            .sum()
    }

    pub fn sample(&self, grid: &Grid) -> SampledSignal {
        SampledSignal::new(grid.points().iter().map(|&t| self.eval(t)).collect())
    }
}

/// Band-limited random sinusoids: `a_k ~ N(0, (scale / k)^2)`, `φ_k ~ U[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForcingSampler {
    pub seed: u64,
    pub band: usize,
    pub scale: f64,
}

impl ForcingSampler {
    /// Random stream for one sample; independent of generation order.
    pub fn rng(&self, index: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index as u64);
        rng
    }

    pub fn draw(&self, index: usize, period: f64) -> Forcing {
        self.draw_with(&mut self.rng(index), period)
    }

    pub fn draw_with(&self, rng: &mut ChaCha8Rng, period: f64) -> Forcing {
        let mut amplitudes = Vec::with_capacity(self.band);
        let mut phases = Vec::with_capacity(self.band);
        for k in 1..=self.band {
            let sd = self.scale / k as f64;
            let a = if sd > 0.0 { Normal::new(0.0, sd).expect("positive sd").sample(rng) } else { 0.0 };
            amplitudes.push(a);
            phases.push(rng.random_range(0.0..std::f64::consts::TAU));
        }
        Forcing::new(amplitudes, phases, period)
    }
}

/// Forcing number `index` on `grid`; the period is the grid's span.
pub fn sample_forcing(sampler: &ForcingSampler, index: usize, grid: &Grid) -> SampledSignal {
    sampler.draw(index, grid.max() - grid.min()).sample(grid)
}
