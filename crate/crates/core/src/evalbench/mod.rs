//! Test-split metrics, the zero-shot super-resolution protocol and the
//! decomposition runtime benchmark against a radix-2 FFT.

mod bench;
mod fft;
mod metrics;
mod superres;

pub use bench::{log_log_slope, percentile, runtime_bench, timer_resolution, BenchMethod, RuntimeReport};
pub use fft::{fft_radix2, ifft_radix2, FftPlan};
pub use metrics::{evaluate, evaluate_predictions, model_inputs, per_sample_rel_l2, EvalReport};
pub use superres::{nested_stride, superres_eval, SuperResReport};
