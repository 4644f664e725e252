//! Streaming evaluation of `V+ y` for Vandermonde fits.
//!
//! With `C` the Chebyshev-Vandermonde matrix of the same nodes and `M` the
//! Chebyshev-to-monomial change of basis, `V = C M^-1`, hence
//! `V+ = M (C^T C)^-1 C^T`. `C` is well conditioned on `[-1, 1]`, so its
//! small Gram matrix can be inverted safely, and `C^T y` is generated from
//! the nodes on the fly: a fit reads `2n` values instead of the `(d+1) n`
//! entries of the stored pseudoinverse.

use super::matrix::Matrix;
use super::sumudu::MAX_DEGREE;

const LANES: usize = 4;
/// Gram matrices worse than this fall back to the stored pseudoinverse.
const GRAM_CONDITION_LIMIT: f64 = 1e6;

#[derive(Debug, Clone)]
pub(crate) struct ChebyshevFit {
    /// `M (C^T C)^-1`, `(d+1) x (d+1)`.
    solve: Matrix,
}

/// `out[k] = Σ_i T_k(z_i) y_i` for `k <= degree`, four points at a time.
fn moments(nodes: &[f64], y: &[f64], out: &mut [f64]) {
    let modes = out.len();
    let mut acc = [[0.0; LANES]; 2 * MAX_DEGREE + 1];
    let (zc, yc) = (nodes.chunks_exact(LANES), y.chunks_exact(LANES));
    let (zr, yr) = (zc.remainder(), yc.remainder());
    for (z, yv) in zc.zip(yc) {
        let z: [f64; LANES] = z.try_into().expect("lane chunk");
        let yv: [f64; LANES] = yv.try_into().expect("lane chunk");
        let mut t0 = [1.0; LANES];
        let mut t1 = z;
        for l in 0..LANES {
            acc[0][l] += yv[l];
        }
        if modes > 1 {
            for l in 0..LANES {
                acc[1][l] += z[l] * yv[l];
            }
        }
        for a in acc.iter_mut().take(modes).skip(2) {
            let mut t2 = [0.0; LANES];
            for l in 0..LANES {
                t2[l] = 2.0 * z[l] * t1[l] - t0[l];
                a[l] += t2[l] * yv[l];
            }
            t0 = t1;
            t1 = t2;
        }
    }
    for (k, o) in out.iter_mut().enumerate() {
        *o = (acc[k][0] + acc[k][1]) + (acc[k][2] + acc[k][3]);
    }
    for (&z, &v) in zr.iter().zip(yr) {
        let (mut t0, mut t1) = (1.0, z);
        for (k, o) in out.iter_mut().enumerate() {
            let t = match k {
                0 => 1.0,
                1 => z,
                _ => {
                    let t2 = 2.0 * z * t1 - t0;
                    t0 = t1;
                    t1 = t2;
                    t2
                }
            };
            *o += t * v;
        }
    }
}

/// `M[j][k]`: coefficient of `z^j` in `T_k(z)`.
fn chebyshev_to_monomial(modes: usize) -> Matrix {
    let mut m = Matrix::zeros(modes, modes);
    let mut prev = vec![0.0; modes];
    let mut cur = vec![0.0; modes];
    prev[0] = 1.0;
    if modes > 1 {
        cur[1] = 1.0;
    }
    for k in 0..modes {
        let col = match k {
            0 => prev.clone(),
            1 => cur.clone(),
            _ => {
                let mut next = vec![0.0; modes];
                for j in 0..modes {
                    let shifted = if j > 0 { 2.0 * cur[j - 1] } else { 0.0 };
                    next[j] = shifted - prev[j];
                }
                prev = std::mem::replace(&mut cur, next);
                cur.clone()
            }
        };
        for j in 0..modes {
            m[(j, k)] = col[j];
        }
    }
    m
}

/// Inverse of a symmetric positive definite matrix via Cholesky, with the
/// ratio of extreme squared pivots as a cheap condition estimate.
fn spd_inverse(g: &Matrix) -> Option<(Matrix, f64)> {
    let p = g.rows();
    let mut l = Matrix::zeros(p, p);
    for j in 0..p {
        let d = g[(j, j)] - (0..j).map(|k| l[(j, k)] * l[(j, k)]).sum::<f64>();
        if !(d > 0.0) {
            return None;
        }
        l[(j, j)] = d.sqrt();
        for i in j + 1..p {
            let s = g[(i, j)] - (0..j).map(|k| l[(i, k)] * l[(j, k)]).sum::<f64>();
            l[(i, j)] = s / l[(j, j)];
        }
    }
    let diag: Vec<f64> = (0..p).map(|i| l[(i, i)] * l[(i, i)]).collect();
    let cond = diag.iter().cloned().fold(0.0, f64::max) / diag.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut inv = Matrix::zeros(p, p);
    let mut x = vec![0.0; p];
    for c in 0..p {
        // L L^T x = e_c
        for i in 0..p {
            let rhs = if i == c { 1.0 } else { 0.0 };
            x[i] = (rhs - (0..i).map(|k| l[(i, k)] * x[k]).sum::<f64>()) / l[(i, i)];
        }
        for i in (0..p).rev() {
            x[i] = (x[i] - (i + 1..p).map(|k| l[(k, i)] * x[k]).sum::<f64>()) / l[(i, i)];
        }
        for i in 0..p {
            inv[(i, c)] = x[i];
        }
    }
    Some((inv, cond))
}

impl ChebyshevFit {
    /// `None` when the nodes leave `[-1, 1]` or the Chebyshev Gram matrix is
    /// not comfortably well conditioned.
    pub(crate) fn new(nodes: &[f64], degree: usize) -> Option<Self> {
        if nodes.iter().any(|z| z.abs() > 1.0) {
            return None;
        }
        // T_i T_j = (T_{i+j} + T_{|i-j|}) / 2, so the Gram matrix needs only
        // the node sums of T_0 .. T_{2d}.
        let modes = degree + 1;
        let mut mu = vec![0.0; 2 * degree + 1];
        moments(nodes, &vec![1.0; nodes.len()], &mut mu);
        let mut g = Matrix::zeros(modes, modes);
        for i in 0..modes {
            for j in 0..modes {
                g[(i, j)] = 0.5 * (mu[i + j] + mu[i.abs_diff(j)]);
            }
        }
        let (ginv, cond) = spd_inverse(&g)?;
        if cond > GRAM_CONDITION_LIMIT {
            return None;
        }
        Some(Self { solve: chebyshev_to_monomial(modes).matmul(&ginv) })
    }

    pub(crate) fn apply(&self, nodes: &[f64], y: &[f64]) -> Vec<f64> {
        let mut m = vec![0.0; self.solve.rows()];
        moments(nodes, y, &mut m);
        self.solve.matvec(&m)
    }
}
