use std::fmt::Write as _;
use std::hint::black_box;
use std::str::FromStr;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::fft::FftPlan;
use crate::polycore::{fit_poly, FitOperator, Grid, SampledSignal};
use crate::{Error, Result};

const MIN_REPS: usize = 20;
const MIN_SIZE: usize = 1 << 10;
const WARMUP: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchMethod {
    /// Polynomial fit with a precomputed fit operator.
    PolyFit,
    /// Polynomial fit including building the fit operator.
    PolyFitCold,
    Fft,
}

impl BenchMethod {
    pub fn name(self) -> &'static str {
        match self {
            BenchMethod::PolyFit => "poly-fit",
            BenchMethod::PolyFitCold => "poly-fit-cold",
            BenchMethod::Fft => "fft",
        }
    }
}

impl FromStr for BenchMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "poly-fit" => Ok(BenchMethod::PolyFit),
            "poly-fit-cold" => Ok(BenchMethod::PolyFitCold),
            "fft" => Ok(BenchMethod::Fft),
            _ => Err(Error::Config(format!("unknown benchmark method {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RuntimeReport {
    pub method: BenchMethod,
    pub sizes: Vec<usize>,
    /// Seconds per call.
    pub median: Vec<f64>,
    pub p10: Vec<f64>,
    pub p90: Vec<f64>,
    /// Least-squares slope of `ln median` against `ln n`.
    pub slope: f64,
}

impl RuntimeReport {
    /// Header plus one row per size; reports can be concatenated after the
    /// first header.
    pub fn csv_rows(&self, header: bool) -> String {
        let mut s = String::new();
        if header {
            s.push_str("method,n,median_s,p10_s,p90_s\n");
        }
        for i in 0..self.sizes.len() {
            let _ = writeln!(
                s,
                "{},{},{:e},{:e},{:e}",
                self.method.name(),
                self.sizes[i],
                self.median[i],
                self.p10[i],
                self.p90[i]
            );
        }
        s
    }
}

/// Linear-interpolated percentile of sorted data, `q` in `[0, 1]`.
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let (i, frac) = (pos.floor() as usize, pos.fract());
    if i + 1 < sorted.len() {
        sorted[i] * (1.0 - frac) + sorted[i + 1] * frac
    } else {
        sorted[i]
    }
}

pub fn log_log_slope(sizes: &[usize], times: &[f64]) -> f64 {
    let xs: Vec<f64> = sizes.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = times.iter().map(|t| t.ln()).collect();
    let k = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / k, ys.iter().sum::<f64>() / k);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Smallest observable nonzero step of the monotonic clock.
pub fn timer_resolution() -> Duration {
    (0..16)
        .map(|_| {
            let start = Instant::now();
            loop {
                let d = start.elapsed();
                if d > Duration::ZERO {
                    break d;
                }
            }
        })
        .min()
        .expect("nonempty")
}

/// Medians must be at least 100 clock ticks long to be meaningful.
fn check_clock(resolution: f64, median: f64) -> Result<()> {
    if median < 100.0 * resolution {
        return Err(Error::ClockTooCoarse { resolution_ns: resolution * 1e9, median_ns: median * 1e9 });
    }
    Ok(())
}

fn time_reps(reps: usize, mut f: impl FnMut()) -> Vec<f64> {
    for _ in 0..WARMUP {
        f();
    }
    let mut times: Vec<f64> = (0..reps)
        .map(|_| {
            let start = Instant::now();
            f();
            start.elapsed().as_secs_f64()
        })
        .collect();
    times.sort_by(f64::total_cmp);
    times
}

/// Time the decomposition step of each method at each size on the calling
/// thread.
pub fn runtime_bench(methods: &[BenchMethod], sizes: &[usize], degree: usize, reps: usize) -> Result<Vec<RuntimeReport>> {
    if reps < MIN_REPS {
        return Err(Error::Config(format!("at least {MIN_REPS} repetitions required, got {reps}")));
    }
    if sizes.len() < 2 {
        return Err(Error::Config("need at least two sizes for a slope".into()));
    }
    if let Some(&n) = sizes.iter().find(|&&n| !n.is_power_of_two()) {
        return Err(Error::LengthNotPow2(n));
    }
    if let Some(&n) = sizes.iter().find(|&&n| n < MIN_SIZE) {
        return Err(Error::Config(format!("size {n} below the minimum {MIN_SIZE}")));
    }
    let resolution = timer_resolution().as_secs_f64();
    let mut reports = Vec::with_capacity(methods.len());
    for &method in methods {
        let mut report = RuntimeReport { method, sizes: sizes.to_vec(), median: vec![], p10: vec![], p90: vec![], slope: 0.0 };
        for &n in sizes {
            let grid = Grid::uniform(0.0, 1.0, n)?;
            let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
            let values: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let times = match method {
                BenchMethod::PolyFit => {
                    let fitop = FitOperator::for_grid(&grid, degree)?;
                    let signal = SampledSignal::new(values);
                    time_reps(reps, || {
                        black_box(fit_poly(black_box(&signal), &fitop).expect("sizes match"));
                    })
                }
                BenchMethod::PolyFitCold => {
                    FitOperator::for_grid(&grid, degree)?;
                    let signal = SampledSignal::new(values);
                    time_reps(reps, || {
                        let fitop = FitOperator::for_grid(black_box(&grid), degree).expect("validated grid");
                        black_box(fit_poly(&signal, &fitop).expect("sizes match"));
                    })
                }
                BenchMethod::Fft => {
                    let plan = FftPlan::new(n)?;
                    let input: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
                    let mut out = vec![Complex64::default(); n];
                    time_reps(reps, || {
                        plan.forward(black_box(&input), &mut out);
                        black_box(&out);
                    })
                }
            };
            let median = percentile(&times, 0.5);
            check_clock(resolution, median)?;
            report.median.push(median);
            report.p10.push(percentile(&times, 0.1));
            report.p90.push(percentile(&times, 0.9));
        }
        report.slope = log_log_slope(sizes, &report.median);
        reports.push(report);
    }
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn percentiles_interpolate() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(percentile(&v, 0.5), 3.0);
        assert_eq!(percentile(&v, 0.1), 1.4);
        assert_eq!(percentile(&v, 1.0), 5.0);
    }

    #[test]
    fn short_medians_are_rejected() {
        assert!(check_clock(1e-7, 1e-5).is_ok());
        assert!(matches!(check_clock(1e-7, 9e-6), Err(Error::ClockTooCoarse { .. })));
    }

    #[test]
    fn slope_of_power_laws() {
        let sizes = [1024, 2048, 4096, 8192];
        let t: Vec<f64> = sizes.iter().map(|&n| 3e-9 * (n as f64).powf(1.5)).collect();
        assert!((log_log_slope(&sizes, &t) - 1.5).abs() < 1e-12);
    }

    #[test]
    fn validates_arguments() {
        let m = [BenchMethod::Fft];
        assert!(matches!(runtime_bench(&m, &[1024, 2048], 4, 5), Err(Error::Config(_))));
        assert_eq!(runtime_bench(&m, &[1024, 3000], 4, 20), Err(Error::LengthNotPow2(3000)));
        assert!(matches!(runtime_bench(&m, &[256, 512], 4, 20), Err(Error::Config(_))));
        assert_eq!("poly-fit-cold".parse::<BenchMethod>().unwrap(), BenchMethod::PolyFitCold);
        assert!("dft".parse::<BenchMethod>().is_err());
    }

    #[test]
    fn small_benchmark_reports_positive_times() {
        let r = runtime_bench(&[BenchMethod::PolyFit, BenchMethod::Fft], &[4096, 8192], 4, 20).unwrap();
        for rep in &r {
            assert!(rep.median.iter().all(|&t| t > 0.0));
            assert!(rep.p10.iter().zip(&rep.p90).all(|(a, b)| a <= b));
        }
        assert_eq!(r[0].csv_rows(true).lines().count(), 3);
    }
}
