use num_complex::Complex64;

use crate::{Error, Result};

/// Precomputed bit-reversal permutation and twiddle factors for an
/// iterative radix-2 Cooley-Tukey transform of one length.
#[derive(Debug, Clone)]
pub struct FftPlan {
    n: usize,
    bitrev: Vec<usize>,
    /// `exp(-2πi k / n)` for `k < n / 2`.
    twiddles: Vec<Complex64>,
}

impl FftPlan {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || !n.is_power_of_two() {
            return Err(Error::LengthNotPow2(n));
        }
        let bits = n.trailing_zeros();
        let bitrev = (0..n)
            .map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (usize::BITS - bits) })
            .collect();
        let twiddles = (0..n / 2)
            .map(|k| Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * k as f64 / n as f64))
            .collect();
        Ok(Self { n, bitrev, twiddles })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Unnormalized forward DFT of `input` into `out`; no allocation.
    pub fn forward(&self, input: &[Complex64], out: &mut [Complex64]) {
        self.run(input, out, false);
    }

    /// Inverse DFT including the `1/n` factor.
    pub fn inverse(&self, input: &[Complex64], out: &mut [Complex64]) {
        self.run(input, out, true);
        let s = 1.0 / self.n as f64;
        out.iter_mut().for_each(|v| *v *= s);
    }

    fn run(&self, input: &[Complex64], out: &mut [Complex64], inverse: bool) {
        assert_eq!(input.len(), self.n, "input length must match the plan");
        assert_eq!(out.len(), self.n, "output length must match the plan");
        for (i, &r) in self.bitrev.iter().enumerate() {
            out[r] = input[i];
        }
        let mut half = 1;
        while half < self.n {
            let step = self.n / (2 * half);
            for block in out.chunks_exact_mut(2 * half) {
                let (lo, hi) = block.split_at_mut(half);
                for k in 0..half {
                    let w = self.twiddles[k * step];
                    let w = if inverse { w.conj() } else { w };
                    let t = w * hi[k];
                    hi[k] = lo[k] - t;
                    lo[k] += t;
                }
            }
            half *= 2;
        }
    }
}

/// DFT of a real signal whose length is a power of two.
pub fn fft_radix2(signal: &[f64]) -> Result<Vec<Complex64>> {
    let plan = FftPlan::new(signal.len())?;
    let input: Vec<Complex64> = signal.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let mut out = vec![Complex64::default(); signal.len()];
    plan.forward(&input, &mut out);
    Ok(out)
}

pub fn ifft_radix2(spectrum: &[Complex64]) -> Result<Vec<Complex64>> {
    let plan = FftPlan::new(spectrum.len())?;
    let mut out = vec![Complex64::default(); spectrum.len()];
    plan.inverse(spectrum, &mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn naive_dft(x: &[f64]) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                x.iter()
                    .enumerate()
                    .map(|(j, &v)| {
                        let ang = -2.0 * std::f64::consts::PI * ((j * k) % n) as f64 / n as f64;
                        Complex64::from_polar(v, ang)
                    })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn impulse_gives_flat_spectrum() {
        let mut x = vec![0.0; 16];
        x[0] = 1.0;
        for v in fft_radix2(&x).unwrap() {
            assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn harmonic_hits_one_bin_pair() {
        let n = 64;
        let x: Vec<f64> = (0..n).map(|j| (2.0 * std::f64::consts::PI * 5.0 * j as f64 / n as f64).cos()).collect();
        let s = fft_radix2(&x).unwrap();
        let naive = naive_dft(&x);
        for (k, v) in s.iter().enumerate() {
            let expect = if k == 5 || k == n - 5 { n as f64 / 2.0 } else { 0.0 };
            assert!((v.norm() - expect).abs() < 1e-10, "bin {k}");
            assert!((v - naive[k]).norm() < 1e-10);
        }
    }

    #[test]
    fn random_signal_matches_naive_dft_and_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x: Vec<f64> = (0..1024).map(|_| rng.random_range(-1.0..1.0)).collect();
        let s = fft_radix2(&x).unwrap();
        for (a, b) in s.iter().zip(naive_dft(&x)) {
            assert!((a - b).norm() < 1e-9);
        }
        let back = ifft_radix2(&s).unwrap();
        for (a, b) in back.iter().zip(&x) {
            assert!((a.re - b).abs() < 1e-10 && a.im.abs() < 1e-10);
        }
        let energy: f64 = x.iter().map(|v| v * v).sum();
        let spec_energy: f64 = s.iter().map(|v| v.norm_sqr()).sum::<f64>() / x.len() as f64;
        assert!((energy - spec_energy).abs() <= 1e-9 * energy);
    }

    #[test]
    fn rejects_other_lengths() {
        assert_eq!(fft_radix2(&[0.0; 12]).unwrap_err(), Error::LengthNotPow2(12));
        assert_eq!(FftPlan::new(0).unwrap_err(), Error::LengthNotPow2(0));
        assert_eq!(fft_radix2(&[2.5]).unwrap()[0], Complex64::new(2.5, 0.0));
    }
}
