use super::grid::{DomainMap, Grid, SampledSignal};
use crate::{Error, Result};

/// Highest supported degree; `20!` is the last factorial exact in `f64`.
pub const MAX_DEGREE: usize = 20;

/// Allowed overshoot of normalized evaluation points beyond `[-1, 1]`.
pub const EXTRAPOLATION_MARGIN: f64 = 0.05;

/// Monomial coefficients `a_0..a_d` on the normalized domain.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyCoeffs {
    pub coeffs: Vec<f64>,
    pub domain_map: DomainMap,
}

impl PolyCoeffs {
    pub fn new(coeffs: Vec<f64>, domain_map: DomainMap) -> Self {
        assert!(!coeffs.is_empty(), "a polynomial needs at least one coefficient");
        Self { coeffs, domain_map }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }
}

/// Sumudu image of a polynomial: entry `n` holds `n! * c_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SumuduSpectrum {
    pub scaled_coeffs: Vec<f64>,
    pub domain_map: DomainMap,
}

impl SumuduSpectrum {
    pub fn degree(&self) -> usize {
        self.scaled_coeffs.len() - 1
    }
}

/// `[0!, 1!, ..., degree!]` by repeated multiplication.
pub fn factorials(degree: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(degree + 1);
    let mut f = 1.0;
    out.push(f);
    for k in 1..=degree {
        f *= k as f64;
        out.push(f);
    }
    out
}

pub fn sumudu_forward(p: &PolyCoeffs) -> Result<SumuduSpectrum> {
    super::fit::check_degree(p.degree())?;
    let fact = factorials(p.degree());
    Ok(SumuduSpectrum {
        scaled_coeffs: p.coeffs.iter().zip(&fact).map(|(c, f)| c * f).collect(),
        domain_map: p.domain_map,
    })
}

pub fn sumudu_inverse(s: &SumuduSpectrum) -> Result<PolyCoeffs> {
    super::fit::check_degree(s.degree())?;
    let fact = factorials(s.degree());
    Ok(PolyCoeffs {
        coeffs: s.scaled_coeffs.iter().zip(&fact).map(|(c, f)| c / f).collect(),
        domain_map: s.domain_map,
    })
}

/// Evaluate `p` on `grid` (raw coordinates, mapped through `p.domain_map`).
pub fn horner_eval(p: &PolyCoeffs, grid: &Grid) -> Result<SampledSignal> {
    let nodes = grid
        .points()
        .iter()
        .map(|&x| {
            let z = p.domain_map.apply(x);
            check_node(x, z).map(|_| z)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SampledSignal::new(nodes.iter().map(|&z| horner(&p.coeffs, z)).collect()))
}

/// Evaluate monomial coefficients at already-normalized nodes.
pub fn horner_eval_normalized(coeffs: &[f64], nodes: &[f64]) -> Vec<f64> {
    nodes.iter().map(|&z| horner(coeffs, z)).collect()
}

pub(crate) fn check_node(x: f64, z: f64) -> Result<()> {
    // Allow a few ulps beyond the margin so grids built by subsampling land inside.
    if !(z.abs() <= 1.0 + EXTRAPOLATION_MARGIN + 1e-12) {
        return Err(Error::ExtrapolationOutOfRange { point: x, normalized: z });
    }
    Ok(())
}

#[inline]
pub(crate) fn horner(coeffs: &[f64], z: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * z + c)
}
