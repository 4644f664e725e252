use crate::polycore::Grid;
use crate::{Error, Result};

pub const LORENZ_SIGMA: f64 = 10.0;
pub const LORENZ_BETA: f64 = 8.0 / 3.0;
/// State magnitude treated as divergence.
pub const DIVERGENCE_LIMIT: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    /// RK4 steps per grid interval.
    pub substeps: usize,
    /// Index reported in [`Error::SolverDiverged`].
    pub sample: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self { substeps: 4, sample: 0 }
    }
}

/// One classical Runge-Kutta step of `y' = f(t, y)`.
pub fn rk4_step<const N: usize>(f: &impl Fn(f64, &[f64; N]) -> [f64; N], t: f64, y: &[f64; N], h: f64) -> [f64; N] {
    let axpy = |a: &[f64; N], s: f64, b: &[f64; N]| -> [f64; N] { std::array::from_fn(|i| a[i] + s * b[i]) };
    let k1 = f(t, y);
    let k2 = f(t + 0.5 * h, &axpy(y, 0.5 * h, &k1));
    let k3 = f(t + 0.5 * h, &axpy(y, 0.5 * h, &k2));
    let k4 = f(t + h, &axpy(y, h, &k3));
    std::array::from_fn(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
}

/// State at every grid point, starting from `y0` at `grid.min()`.
fn integrate<const N: usize>(
    f: impl Fn(f64, &[f64; N]) -> [f64; N],
    y0: [f64; N],
    grid: &Grid,
    opts: OdeOptions,
) -> Result<Vec<[f64; N]>> {
    if opts.substeps == 0 {
        return Err(Error::Config("substeps must be positive".into()));
    }
    let pts = grid.points();
    let mut out = Vec::with_capacity(pts.len());
    let mut y = y0;
    out.push(y);
    for w in pts.windows(2) {
        let h = (w[1] - w[0]) / opts.substeps as f64;
        for s in 0..opts.substeps {
            let t = w[0] + s as f64 * h;
            y = rk4_step(&f, t, &y, h);
            if y.iter().any(|v| !v.is_finite() || v.abs() > DIVERGENCE_LIMIT) {
                return Err(Error::SolverDiverged { sample: opts.sample, time: t + h });
            }
        }
        out.push(y);
    }
    Ok(out)
}

/// `x'' + c x' + α x + β x³ = f(t)`; returns `[x, x']` at every grid point.
pub fn solve_duffing(
    forcing: impl Fn(f64) -> f64,
    damping: f64,
    (alpha, beta): (f64, f64),
    initial: [f64; 2],
    grid: &Grid,
    opts: OdeOptions,
) -> Result<Vec<[f64; 2]>> {
    integrate(
        |t, y: &[f64; 2]| [y[1], forcing(t) - damping * y[1] - alpha * y[0] - beta * y[0].powi(3)],
        initial,
        grid,
        opts,
    )
}

/// `θ'' + c θ' + sin θ = f(t)`; returns `[θ, θ']`.
pub fn solve_pendulum(
    forcing: impl Fn(f64) -> f64,
    damping: f64,
    initial: [f64; 2],
    grid: &Grid,
    opts: OdeOptions,
) -> Result<Vec<[f64; 2]>> {
    integrate(|t, y: &[f64; 2]| [y[1], forcing(t) - damping * y[1] - y[0].sin()], initial, grid, opts)
}

/// Lorenz system with σ = 10, β = 8/3; returns `[x, y, z]`.
pub fn solve_lorenz(initial: [f64; 3], rho: f64, grid: &Grid, opts: OdeOptions) -> Result<Vec<[f64; 3]>> {
    integrate(
        |_, s: &[f64; 3]| {
            [
                LORENZ_SIGMA * (s[1] - s[0]),
                s[0] * (rho - s[2]) - s[1],
                s[0] * s[1] - LORENZ_BETA * s[2],
            ]
        },
        initial,
        grid,
        opts,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts(substeps: usize) -> OdeOptions {
        OdeOptions { substeps, sample: 0 }
    }

    fn max_diff(a: &[[f64; 2]], b: &[[f64; 2]]) -> f64 {
        a.iter().zip(b).map(|(p, q)| (p[0] - q[0]).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn unforced_rest_stays_at_rest() {
        let g = Grid::uniform(0.0, 10.0, 64).unwrap();
        let x = solve_duffing(|_| 0.0, 0.0, (1.0, 1.0), [0.0, 0.0], &g, opts(4)).unwrap();
        assert!(x.iter().all(|s| s[0] == 0.0 && s[1] == 0.0));
        let th = solve_pendulum(|_| 0.0, 0.0, [0.0, 0.0], &g, opts(4)).unwrap();
        assert!(th.iter().all(|s| s[0] == 0.0));
    }

    #[test]
    fn linear_oscillator_matches_closed_form() {
        // x'' + x = sin(ωt), x(0) = x'(0) = 0:
        // x(t) = (sin(ωt) − ω sin(t)) / (1 − ω²).
        let w: f64 = 2.0;
        let g = Grid::uniform(0.0, 10.0, 1001).unwrap();
        let x = solve_duffing(|t| (w * t).sin(), 0.0, (1.0, 0.0), [0.0, 0.0], &g, opts(4)).unwrap();
        for (s, &t) in x.iter().zip(g.points()) {
            let exact = ((w * t).sin() - w * t.sin()) / (1.0 - w * w);
            assert!((s[0] - exact).abs() < 1e-6, "t = {t}");
        }
    }

    #[test]
    fn substep_halving_is_consistent() {
        let g = Grid::uniform(0.0, 10.0, 1024).unwrap();
        let f = |t: f64| 0.8 * (0.6 * t).sin() + 0.3 * (1.7 * t + 0.4).cos();
        let a = solve_duffing(f, 0.0, (1.0, 1.0), [0.0, 0.0], &g, opts(4)).unwrap();
        let b = solve_duffing(f, 0.0, (1.0, 1.0), [0.0, 0.0], &g, opts(8)).unwrap();
        assert!(max_diff(&a, &b) < 1e-8, "{}", max_diff(&a, &b));
    }

    #[test]
    fn fourth_order_self_convergence() {
        let g = Grid::uniform(0.0, 10.0, 101).unwrap();
        let f = |t: f64| (0.9 * t).sin();
        let reference = solve_duffing(f, 0.1, (1.0, 1.0), [0.0, 0.0], &g, opts(256)).unwrap();
        let e1 = max_diff(&solve_duffing(f, 0.1, (1.0, 1.0), [0.0, 0.0], &g, opts(1)).unwrap(), &reference);
        let e2 = max_diff(&solve_duffing(f, 0.1, (1.0, 1.0), [0.0, 0.0], &g, opts(2)).unwrap(), &reference);
        let ratio = e1 / e2;
        assert!((12.0..=20.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn small_angle_pendulum_is_linear() {
        // θ ~ 1e-3: sin θ − θ ~ θ³/6 ~ 2e-10, so the two agree to 1e-8.
        let g = Grid::uniform(0.0, 10.0, 256).unwrap();
        let f = |t: f64| 1e-3 * (0.7 * t).sin();
        let p = solve_pendulum(f, 0.0, [0.0, 0.0], &g, opts(4)).unwrap();
        let l = solve_duffing(f, 0.0, (1.0, 0.0), [0.0, 0.0], &g, opts(4)).unwrap();
        assert!(max_diff(&p, &l) < 1e-8);
    }

    #[test]
    fn pendulum_energy_is_conserved() {
        let g = Grid::uniform(0.0, 10.0, 1001).unwrap();
        let s = solve_pendulum(|_| 0.0, 0.0, [0.5, 0.0], &g, opts(4)).unwrap();
        let energy = |y: &[f64; 2]| 0.5 * y[1] * y[1] + 1.0 - y[0].cos();
        let e0 = energy(&s[0]);
        let drift = s.iter().map(|y| (energy(y) - e0).abs()).fold(0.0, f64::max);
        assert!(drift < 1e-7, "drift {drift}");
    }

    #[test]
    fn lorenz_origin_is_an_equilibrium() {
        let g = Grid::uniform(0.0, 5.0, 64).unwrap();
        let s = solve_lorenz([0.0; 3], 0.0, &g, opts(4)).unwrap();
        assert!(s.iter().all(|v| *v == [0.0; 3]));
    }

    #[test]
    fn lorenz_below_onset_settles() {
        let g = Grid::uniform(0.0, 50.0, 2001).unwrap();
        let s = solve_lorenz([1.0, -1.0, 2.0], 5.0, &g, opts(4)).unwrap();
        let y = s.last().unwrap();
        let d = [
            LORENZ_SIGMA * (y[1] - y[0]),
            y[0] * (5.0 - y[2]) - y[1],
            y[0] * y[1] - LORENZ_BETA * y[2],
        ];
        let norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(norm < 1e-3, "{norm}");
    }

    #[test]
    fn lorenz_substep_halving() {
        let g = Grid::uniform(0.0, 2.0, 201).unwrap();
        let a = solve_lorenz([1.0, 1.0, 1.0], 5.0, &g, opts(4)).unwrap();
        let b = solve_lorenz([1.0, 1.0, 1.0], 5.0, &g, opts(8)).unwrap();
        let d = a.iter().zip(&b).flat_map(|(p, q)| (0..3).map(move |i| (p[i] - q[i]).abs())).fold(0.0, f64::max);
        assert!(d < 1e-6, "{d}");
    }

    #[test]
    fn divergence_is_reported() {
        let g = Grid::uniform(0.0, 10.0, 32).unwrap();
        let err = solve_duffing(|_| 0.0, 0.0, (-1.0, -1.0), [1.0, 1.0], &g, OdeOptions { substeps: 4, sample: 7 });
        assert!(matches!(err, Err(Error::SolverDiverged { sample: 7, .. })));
    }
}
