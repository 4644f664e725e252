use super::chebyshev::ChebyshevFit;
use super::grid::{rescale_domain, DomainMap, Grid, SampledSignal};
use super::matrix::Matrix;
use super::sumudu::{PolyCoeffs, MAX_DEGREE};
use crate::{Error, Result};

/// Systems whose pivoted-QR condition estimate exceeds this are rejected.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Rows `[1, z, z^2, ..., z^degree]` for the given normalized locations.
///
/// No validation: use [`build_vandermonde`] for grids.
pub fn vandermonde_rows(nodes: &[f64], degree: usize) -> Matrix {
    let cols = degree + 1;
    let mut v = Matrix::zeros(nodes.len(), cols);
    for (i, &z) in nodes.iter().enumerate() {
        let mut p = 1.0;
        for j in 0..cols {
            v[(i, j)] = p;
            p *= z;
        }
    }
    v
}

pub fn build_vandermonde(grid: &Grid, degree: usize, map: &DomainMap) -> Result<Matrix> {
    check_degree(degree)?;
    if grid.len() < degree + 1 {
        return Err(Error::Underdetermined { points: grid.len(), degree });
    }
    let nodes: Vec<f64> = grid.points().iter().map(|&x| map.apply(x)).collect();
    Ok(vandermonde_rows(&nodes, degree))
}

pub(crate) fn check_degree(degree: usize) -> Result<()> {
    if degree > MAX_DEGREE {
        return Err(Error::DegreeTooHigh { degree, max: MAX_DEGREE });
    }
    Ok(())
}

/// Least-squares fitting operator for one (grid, degree) pair.
///
/// `pinv` is the `(d+1) x n` Moore-Penrose pseudoinverse of the `n x (d+1)`
/// Vandermonde matrix, so `coeffs = pinv * values`.
#[derive(Debug, Clone)]
pub struct FitOperator {
    pub grid_id: u64,
    pub pinv: Matrix,
    pub vandermonde: Matrix,
    pub domain_map: DomainMap,
    /// Normalized sample locations (`vandermonde` column 1 when degree > 0).
    pub nodes: Vec<f64>,
    /// `|R_00| / |R_dd|` from the pivoted QR factorization.
    pub condition: f64,
    /// Streaming form of `pinv` for grids built by [`FitOperator::for_grid`].
    pub(crate) streaming: Option<ChebyshevFit>,
}

impl FitOperator {
    /// Normalize `grid`, build its Vandermonde matrix and factor it.
    pub fn for_grid(grid: &Grid, degree: usize) -> Result<Self> {
        let map = rescale_domain(grid)?;
        let v = build_vandermonde(grid, degree, &map)?;
        let nodes: Vec<f64> = grid.points().iter().map(|&x| map.apply(x)).collect();
        let mut op = factor(v)?;
        op.grid_id = grid.content_hash(degree);
        op.domain_map = map;
        op.streaming = ChebyshevFit::new(&nodes, degree);
        op.nodes = nodes;
        Ok(op)
    }

    pub fn degree(&self) -> usize {
        self.pinv.rows() - 1
    }

    pub fn n(&self) -> usize {
        self.pinv.cols()
    }
}

/// Pseudoinverse of a Vandermonde matrix through Householder QR with column
/// pivoting: `V P = Q R`, `V+ = P R^-1 Q^T`.
///
/// The returned operator assumes the identity domain map and takes its nodes
/// from column 1 of `v` (all zeros when `v` has a single column).
pub fn compute_fit_operator(v: Matrix) -> Result<FitOperator> {
    let mut op = factor(v)?;
    op.grid_id = {
        use std::hash::{Hash, Hasher};
        let mut h = std::collections::hash_map::DefaultHasher::new();
        for x in op.vandermonde.as_slice() {
            x.to_bits().hash(&mut h);
        }
        h.finish()
    };
    Ok(op)
}

fn factor(v: Matrix) -> Result<FitOperator> {
    let n = v.rows();
    let p = v.cols();
    if p == 0 {
        return Err(Error::ShapeMismatch("matrix with zero columns".into()));
    }
    check_degree(p - 1)?;
    if n < p {
        return Err(Error::Underdetermined { points: n, degree: p - 1 });
    }

    let qr = PivotedQr::factor(&v);
    let r00 = qr.r(0, 0).abs();
    let rdd = qr.r(p - 1, p - 1).abs();
    let condition = if rdd == 0.0 { f64::INFINITY } else { r00 / rdd };
    if !(condition <= CONDITION_LIMIT) {
        return Err(Error::IllConditioned(condition));
    }

    let pinv = qr.pseudoinverse();

    let nodes = if p > 1 { (0..n).map(|i| v[(i, 1)]).collect() } else { vec![0.0; n] };
    Ok(FitOperator {
        grid_id: 0,
        pinv,
        vandermonde: v,
        domain_map: DomainMap::identity(),
        nodes,
        condition,
        streaming: None,
    })
}

/// Monomial coefficients of the least-squares polynomial through `signal`.
pub fn fit_poly(signal: &SampledSignal, fitop: &FitOperator) -> Result<PolyCoeffs> {
    if signal.len() != fitop.n() {
        return Err(Error::ShapeMismatch(format!(
            "signal has {} samples, fit operator expects {}",
            signal.len(),
            fitop.n()
        )));
    }
    if let Some(s) = &fitop.streaming {
        return Ok(PolyCoeffs::new(s.apply(&fitop.nodes, &signal.values), fitop.domain_map));
    }
    let n = fitop.n();
    let mut coeffs = vec![0.0; fitop.degree() + 1];
    // Blocked so each signal chunk stays in L1 while every pinv row passes.
    const BLOCK: usize = 2048;
    for start in (0..n).step_by(BLOCK) {
        let end = (start + BLOCK).min(n);
        let y = &signal.values[start..end];
        for (m, c) in coeffs.iter_mut().enumerate() {
            *c += dot(&fitop.pinv.row(m)[start..end], y);
        }
    }
    Ok(PolyCoeffs::new(coeffs, fitop.domain_map))
}

struct PivotedQr {
    /// Column-major: Householder vectors on and below the diagonal, R above.
    cols: Vec<Vec<f64>>,
    diag: Vec<f64>,
    betas: Vec<f64>,
    perm: Vec<usize>,
}

impl PivotedQr {
    fn factor(v: &Matrix) -> Self {
        let n = v.rows();
        let p = v.cols();
        let mut cols: Vec<Vec<f64>> = (0..p).map(|_| Vec::with_capacity(n)).collect();
        for row in v.as_slice().chunks_exact(p) {
            for (c, &x) in cols.iter_mut().zip(row) {
                c.push(x);
            }
        }
        let mut perm: Vec<usize> = (0..p).collect();
        let mut betas = vec![0.0; p];
        let mut diag = vec![0.0; p];

        // Squared trailing column norms, downdated after each step and
        // recomputed when cancellation makes the downdate unreliable.
        let mut norms: Vec<f64> = cols.iter().map(|c| dot(c, c)).collect();
        let mut fresh = norms.clone();
        for k in 0..p {
            if k > 0 {
                for j in k..p {
                    let r = cols[j][k - 1];
                    norms[j] -= r * r;
                    if norms[j] <= 1e-6 * fresh[j] {
                        norms[j] = dot(&cols[j][k..], &cols[j][k..]);
                        fresh[j] = norms[j];
                    }
                }
            }
            let mut best = k;
            let mut best_norm = norms[k];
            for (j, &nrm) in norms.iter().enumerate().skip(k + 1) {
                if nrm > best_norm {
                    best_norm = nrm;
                    best = j;
                }
            }
            norms.swap(k, best);
            fresh.swap(k, best);
            let best_norm = dot(&cols[best][k..], &cols[best][k..]);
            cols.swap(k, best);
            perm.swap(k, best);

            let alpha = best_norm.sqrt();
            if alpha == 0.0 {
                continue;
            }
            let (done, rest) = cols.split_at_mut(k + 1);
            let hv = &mut done[k][k..];
            let x0 = hv[0];
            let r_kk = if x0 >= 0.0 { -alpha } else { alpha };
            // v = x - r_kk e1 replaces x in place.
            hv[0] = x0 - r_kk;
            let beta = 2.0 / dot(hv, hv);
            betas[k] = beta;
            diag[k] = r_kk;
            for other in rest.iter_mut() {
                let s = beta * dot(hv, &other[k..]);
                axpy(-s, hv, &mut other[k..]);
            }
        }
        Self { cols, diag, betas, perm }
    }

    fn r(&self, i: usize, j: usize) -> f64 {
        match i.cmp(&j) {
            std::cmp::Ordering::Equal => self.diag[j],
            std::cmp::Ordering::Less => self.cols[j][i],
            std::cmp::Ordering::Greater => 0.0,
        }
    }

    /// Row-major inverse of the upper-triangular `R`.
    fn r_inverse(&self) -> Vec<f64> {
        let p = self.diag.len();
        let mut inv = vec![0.0; p * p];
        for j in 0..p {
            inv[j * p + j] = 1.0 / self.r(j, j);
            for i in (0..j).rev() {
                let s: f64 = (i + 1..=j).map(|k| self.r(i, k) * inv[k * p + j]).sum();
                inv[i * p + j] = -s / self.r(i, i);
            }
        }
        inv
    }

    /// `V+ = P R^-1 Q^T`. Column `m` of `Q R^-T` is row `perm[m]` of `V+`.
    ///
    /// `Q = H_0 ... H_{p-1} = I - Y T Y^T` (compact WY form) and `R^-T`
    /// only fills the top `p` rows, so `Q [R^-T; 0] = [R^-T; 0] - Y U` with
    /// a small `U`; the tall products run in blocks of rows so each pass over
    /// the Householder vectors is served from cache.
    fn pseudoinverse(&self) -> Matrix {
        const BLOCK: usize = 512;
        let n = self.cols.first().map_or(0, Vec::len);
        let p = self.cols.len();
        // y_k has support on rows >= k; the R part above must be skipped.
        let y = |k: usize, lo: usize, hi: usize| -> &[f64] {
            let lo = lo.max(k).min(hi);
            &self.cols[k][lo..hi]
        };

        // S = Y^T Y
        let mut s = vec![0.0; p * p];
        for lo in (0..n).step_by(BLOCK) {
            let hi = (lo + BLOCK).min(n);
            for k in 0..p {
                let yk = y(k, lo, hi);
                let off = hi - yk.len();
                for j in 0..=k {
                    s[j * p + k] += dot(&self.cols[j][off..hi], yk);
                }
            }
        }
        for k in 0..p {
            for j in 0..k {
                s[k * p + j] = s[j * p + k];
            }
        }

        // T, upper triangular: T[:k, k] = -beta_k T[:k, :k] S[:k, k].
        let mut t = vec![0.0; p * p];
        for k in 0..p {
            let beta = self.betas[k];
            t[k * p + k] = beta;
            for i in 0..k {
                let acc: f64 = (i..k).map(|l| t[i * p + l] * s[l * p + k]).sum();
                t[i * p + k] = -beta * acc;
            }
        }

        // X = [R^-T; 0]: X[i][m] = Rinv[m][i]. W = Y^T X touches rows < p.
        let rinv = self.r_inverse();
        let x = |i: usize, m: usize| if i < p { rinv[m * p + i] } else { 0.0 };
        let mut w = vec![0.0; p * p];
        for k in 0..p {
            for m in 0..p {
                w[k * p + m] = (k..p.min(n)).map(|i| self.cols[k][i] * x(i, m)).sum();
            }
        }
        // U = T W
        let mut u = vec![0.0; p * p];
        for i in 0..p {
            for m in 0..p {
                u[i * p + m] = (i..p).map(|l| t[i * p + l] * w[l * p + m]).sum();
            }
        }

        let mut out = Matrix::zeros(p, n);
        for m in 0..p {
            let row = out.row_mut(self.perm[m]);
            for (i, r) in row.iter_mut().enumerate().take(p) {
                *r = x(i, m);
            }
        }
        for lo in (0..n).step_by(BLOCK) {
            let hi = (lo + BLOCK).min(n);
            for m in 0..p {
                let row = out.row_mut(self.perm[m]);
                for k in 0..p {
                    let yk = y(k, lo, hi);
                    let off = hi - yk.len();
                    axpy(-u[k * p + m], yk, &mut row[off..hi]);
                }
            }
        }
        out
    }
}

/// Dot product with four independent partial sums.
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        for i in 0..4 {
            acc[i] += x[i] * y[i];
        }
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}
