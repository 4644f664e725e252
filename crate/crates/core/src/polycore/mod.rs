//! Polynomial regression kernel and the factorial-scaled Sumudu maps.
//!
//! A signal sampled on a [`Grid`] is mapped to the normalized domain
//! `[-1, 1]`, fitted in the monomial basis through the pseudoinverse of the
//! Vandermonde matrix, and moved to and from the Sumudu representation by
//! multiplying / dividing the `n`-th coefficient by `n!`.

mod cache;
mod chebyshev;
mod fit;
mod grid;
mod matrix;
mod sumudu;

pub use cache::{global_fit_cache, FitCache};
pub use fit::{
    build_vandermonde, compute_fit_operator, fit_poly, vandermonde_rows, FitOperator,
    CONDITION_LIMIT,
};
pub use grid::{rescale_domain, DomainMap, Grid, SampledSignal};
pub use matrix::Matrix;
pub(crate) use sumudu::{check_node, horner};
pub use sumudu::{
    factorials, horner_eval, horner_eval_normalized, sumudu_forward, sumudu_inverse, PolyCoeffs,
    SumuduSpectrum, EXTRAPOLATION_MARGIN, MAX_DEGREE,
};
