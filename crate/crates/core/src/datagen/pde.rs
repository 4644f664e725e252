use crate::polycore::Grid;
use crate::{Error, Result};

/// Stability bound on `dt max|u| / dx` for the explicit advection stage.
pub const BURGERS_CFL_LIMIT: f64 = 1.0;

/// Periodic space grid plus the output times of a PDE solve.
#[derive(Debug, Clone, PartialEq)]
pub struct PdeGrids {
    /// `x_i = i L / n`.
    pub x: Grid,
    pub length: f64,
    /// Increasing output times, all > 0.
    pub times: Vec<f64>,
    /// Time steps between consecutive outputs.
    pub substeps: usize,
}

impl PdeGrids {
    /// `n_x` periodic points on `[0, length)` and `n_t` outputs at
    /// `t_j = (j + 1) duration / n_t`.
    pub fn new(length: f64, n_x: usize, duration: f64, n_t: usize, substeps: usize) -> Result<Self> {
        if n_x < 3 || n_t == 0 || substeps == 0 || !(duration > 0.0) || !(length > 0.0) {
            return Err(Error::Config(format!(
                "bad PDE grid: n_x {n_x}, n_t {n_t}, substeps {substeps}, duration {duration}, length {length}"
            )));
        }
        Ok(Self {
            x: Grid::periodic(length, n_x)?,
            length,
            times: output_times(duration, n_t),
            substeps,
        })
    }

    pub fn dx(&self) -> f64 {
        self.length / self.x.len() as f64
    }

    /// Step sizes in order, `substeps` per output interval.
    fn steps(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        let mut prev = 0.0;
        self.times.iter().enumerate().map(move |(j, &t)| {
            let dt = (t - prev) / self.substeps as f64;
            prev = t;
            (j, dt)
        })
    }
}

/// `n_t` equally spaced times ending at `duration`, excluding 0.
pub fn output_times(duration: f64, n_t: usize) -> Vec<f64> {
    (1..=n_t).map(|j| duration * j as f64 / n_t as f64).collect()
}

/// Cyclic tridiagonal system with constant bands, factored once
/// (Thomas algorithm plus a Sherman-Morrison correction for the corners).
#[derive(Debug, Clone)]
pub struct CyclicTridiagonal {
    lower: f64,
    upper: f64,
    diag0: f64,
    cp: Vec<f64>,
    denom: Vec<f64>,
    z: Vec<f64>,
    gamma: f64,
    beta: f64,
}

impl CyclicTridiagonal {
    /// Row `i`: `lower x[i-1] + diag x[i] + upper x[i+1]`, indices mod `n`.
    pub fn new(n: usize, lower: f64, diag: f64, upper: f64) -> Self {
        assert!(n >= 3, "cyclic system needs n >= 3");
        let gamma = -diag;
        let alpha = upper; // A[n-1][0]
        let beta = lower; // A[0][n-1]
        let mut bb = vec![diag; n];
        bb[0] = diag - gamma;
        bb[n - 1] = diag - alpha * beta / gamma;
        let mut cp = vec![0.0; n];
        let mut denom = vec![0.0; n];
        denom[0] = bb[0];
        cp[0] = upper / bb[0];
        for i in 1..n {
            denom[i] = bb[i] - lower * cp[i - 1];
            cp[i] = upper / denom[i];
        }
        let mut me = Self { lower, upper, diag0: bb[0], cp, denom, z: Vec::new(), gamma, beta };
        let mut u = vec![0.0; n];
        u[0] = gamma;
        u[n - 1] = alpha;
        me.thomas(&mut u);
        me.z = u;
        me
    }

    fn thomas(&self, r: &mut [f64]) {
        let n = r.len();
        r[0] /= self.diag0;
        for i in 1..n {
            r[i] = (r[i] - self.lower * r[i - 1]) / self.denom[i];
        }
        for i in (0..n - 1).rev() {
            r[i] -= self.cp[i] * r[i + 1];
        }
    }

    /// Solve in place.
    pub fn solve(&self, r: &mut [f64]) {
        let n = r.len();
        self.thomas(r);
        let fact = (r[0] + self.beta * r[n - 1] / self.gamma) / (1.0 + self.z[0] + self.beta * self.z[n - 1] / self.gamma);
        for (x, z) in r.iter_mut().zip(&self.z) {
            *x -= fact * z;
        }
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }
}

/// Crank-Nicolson stepper for `u_t = k u_xx` with a fixed step.
struct CnDiffusion {
    half_r: f64,
    system: CyclicTridiagonal,
    scratch: Vec<f64>,
}

impl CnDiffusion {
    fn new(n: usize, k: f64, dt: f64, dx: f64) -> Self {
        let r = k * dt / (dx * dx);
        Self {
            half_r: 0.5 * r,
            system: CyclicTridiagonal::new(n, -0.5 * r, 1.0 + r, -0.5 * r),
            scratch: vec![0.0; n],
        }
    }

    fn step(&mut self, u: &mut [f64]) {
        let n = u.len();
        for i in 0..n {
            let l = u[(i + n - 1) % n];
            let r = u[(i + 1) % n];
            self.scratch[i] = u[i] + self.half_r * (l - 2.0 * u[i] + r);
        }
        self.system.solve(&mut self.scratch);
        u.copy_from_slice(&self.scratch);
    }
}

fn check_ic(u0: &[f64], grids: &PdeGrids) -> Result<()> {
    if u0.len() != grids.x.len() {
        return Err(Error::ShapeMismatch(format!(
            "initial field has {} points, grid has {}",
            u0.len(),
            grids.x.len()
        )));
    }
    Ok(())
}

/// Run `step(u, dt)` over the output schedule, caching one stepper per
/// distinct `dt`.
fn march<S>(u0: &[f64], grids: &PdeGrids, mut make: impl FnMut(f64) -> S, mut step: impl FnMut(&mut S, &mut [f64]) -> Result<()>) -> Result<Vec<Vec<f64>>> {
    let mut u = u0.to_vec();
    let mut out = Vec::with_capacity(grids.times.len());
    let mut cached: Option<(f64, S)> = None;
    for (_, dt) in grids.steps() {
        let reuse = matches!(&cached, Some((d, _)) if (d - dt).abs() <= 1e-14 * dt.abs());
        if !reuse {
            cached = Some((dt, make(dt)));
        }
        let stepper = &mut cached.as_mut().expect("stepper").1;
        for _ in 0..grids.substeps {
            step(stepper, &mut u)?;
        }
        out.push(u.clone());
    }
    Ok(out)
}

/// `u_t = k u_xx` on a periodic domain; one row per output time.
pub fn solve_diffusion(u0: &[f64], k: f64, grids: &PdeGrids) -> Result<Vec<Vec<f64>>> {
    check_ic(u0, grids)?;
    let (n, dx) = (grids.x.len(), grids.dx());
    march(u0, grids, |dt| CnDiffusion::new(n, k, dt, dx), |cn, u| {
        cn.step(u);
        Ok(())
    })
}

/// Third-order upwind-biased flux difference of `(u²/2)_x` with global
/// Lax-Friedrichs splitting.
fn burgers_advection(u: &[f64], dx: f64, out: &mut [f64]) {
    let n = u.len();
    let alpha = u.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let fp: Vec<f64> = u.iter().map(|&v| 0.5 * (0.5 * v * v + alpha * v)).collect();
    let fm: Vec<f64> = u.iter().map(|&v| 0.5 * (0.5 * v * v - alpha * v)).collect();
    let at = |f: &[f64], i: isize| f[i.rem_euclid(n as isize) as usize];
    let flux = |i: isize| -> f64 {
        let plus = (-at(&fp, i - 1) + 5.0 * at(&fp, i) + 2.0 * at(&fp, i + 1)) / 6.0;
        let minus = (2.0 * at(&fm, i) + 5.0 * at(&fm, i + 1) - at(&fm, i + 2)) / 6.0;
        plus + minus
    };
    let mut prev = flux(-1);
    for (i, o) in out.iter_mut().enumerate() {
        let next = flux(i as isize);
        *o = -(next - prev) / dx;
        prev = next;
    }
}

/// `u_t + u u_x = ν u_xx`: Strang splitting of half-step CN diffusion and a
/// strong-stability-preserving RK3 advection step.
pub fn solve_burgers(u0: &[f64], nu: f64, grids: &PdeGrids) -> Result<Vec<Vec<f64>>> {
    check_ic(u0, grids)?;
    let (n, dx) = (grids.x.len(), grids.dx());
    let mut k1 = vec![0.0; n];
    let mut stage = vec![0.0; n];
    march(
        u0,
        grids,
        |dt| (CnDiffusion::new(n, nu, 0.5 * dt, dx), dt),
        |(cn, dt), u| {
            let dt = *dt;
            cn.step(u);
            let umax = u.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            let courant = dt * umax / dx;
            if courant > BURGERS_CFL_LIMIT {
                return Err(Error::CflViolation { courant, limit: BURGERS_CFL_LIMIT });
            }
            burgers_advection(u, dx, &mut k1);
            for i in 0..n {
                stage[i] = u[i] + dt * k1[i];
            }
            burgers_advection(&stage, dx, &mut k1);
            for i in 0..n {
                stage[i] = 0.75 * u[i] + 0.25 * (stage[i] + dt * k1[i]);
            }
            burgers_advection(&stage, dx, &mut k1);
            for i in 0..n {
                u[i] = u[i] / 3.0 + 2.0 / 3.0 * (stage[i] + dt * k1[i]);
            }
            cn.step(u);
            if u.iter().any(|v| !v.is_finite()) {
                return Err(Error::NumericalFault("Burgers solution became non-finite".into()));
            }
            Ok(())
        },
    )
}

/// Exact solution of `u' = r u (1 - u)` after time `tau`.
fn logistic(u: f64, r: f64, tau: f64) -> f64 {
    let e = (r * tau).exp();
    u * e / (1.0 + u * (e - 1.0))
}

/// `u_t = k u_xx + r u (1 - u)`: Strang splitting with exact half-step
/// logistic reactions around a CN diffusion step.
pub fn solve_diffusion_reaction(u0: &[f64], k: f64, r: f64, grids: &PdeGrids) -> Result<Vec<Vec<f64>>> {
    check_ic(u0, grids)?;
    let (n, dx) = (grids.x.len(), grids.dx());
    march(
        u0,
        grids,
        |dt| (CnDiffusion::new(n, k, dt, dx), dt),
        |(cn, dt), u| {
            let half = 0.5 * *dt;
            u.iter_mut().for_each(|v| *v = logistic(*v, r, half));
            cn.step(u);
            u.iter_mut().for_each(|v| *v = logistic(*v, r, half));
            if u.iter().any(|v| !v.is_finite()) {
                return Err(Error::NumericalFault("reaction-diffusion solution became non-finite".into()));
            }
            Ok(())
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    fn rel_l2(a: &[f64], b: &[f64]) -> f64 {
        let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
        let den: f64 = b.iter().map(|y| y * y).sum();
        (num / den).sqrt()
    }

    #[test]
    fn cyclic_solver_matches_dense_product() {
        let n = 7;
        let sys = CyclicTridiagonal::new(n, -0.3, 1.9, -0.45);
        let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).sin() + 0.2).collect();
        let mut b: Vec<f64> = (0..n)
            .map(|i| -0.3 * x[(i + n - 1) % n] + 1.9 * x[i] - 0.45 * x[(i + 1) % n])
            .collect();
        sys.solve(&mut b);
        assert!(max_abs_diff(&b, &x) < 1e-13);
    }

    #[test]
    fn heat_mode_matches_analytic_decay() {
        let k = 0.01;
        let g = PdeGrids::new(1.0, 64, 0.2, 16, 4).unwrap();
        let u0: Vec<f64> = g.x.points().iter().map(|x| (2.0 * PI * x).sin()).collect();
        let u = solve_diffusion(&u0, k, &g).unwrap();
        let mut worst: f64 = 0.0;
        for (row, &t) in u.iter().zip(&g.times) {
            let decay = (-k * 4.0 * PI * PI * t).exp();
            let exact: Vec<f64> = u0.iter().map(|v| decay * v).collect();
            worst = worst.max(max_abs_diff(row, &exact));
        }
        assert!(worst < 1e-4, "{worst}");
    }

    #[test]
    fn constants_are_stationary() {
        let g = PdeGrids::new(1.0, 32, 1.0, 8, 4).unwrap();
        let u0 = vec![0.7; 32];
        for row in solve_diffusion(&u0, 0.05, &g).unwrap() {
            assert!(max_abs_diff(&row, &u0) < 1e-14);
        }
        for row in solve_burgers(&u0, 0.05, &g).unwrap() {
            assert!(max_abs_diff(&row, &u0) < 1e-13);
        }
    }

    #[test]
    fn diffusion_conserves_mean_per_step() {
        let g = PdeGrids::new(1.0, 64, 1.0, 64, 1).unwrap();
        let u0: Vec<f64> = g.x.points().iter().map(|x| 0.3 + (2.0 * PI * x).sin() + 0.5 * (6.0 * PI * x).cos()).collect();
        let u = solve_diffusion(&u0, 0.01, &g).unwrap();
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let mut prev = mean(&u0);
        for row in &u {
            let m = mean(row);
            assert!((m - prev).abs() < 1e-12);
            prev = m;
        }
    }

    #[test]
    fn burgers_zero_stays_zero() {
        let g = PdeGrids::new(1.0, 64, 1.0, 8, 8).unwrap();
        for row in solve_burgers(&[0.0; 64], 0.05, &g).unwrap() {
            assert!(row.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn burgers_refinement_is_consistent() {
        let ic = |x: f64| 0.8 * (2.0 * PI * x).sin() + 0.3 * (4.0 * PI * x + 0.5).cos();
        let coarse_g = PdeGrids::new(1.0, 128, 0.5, 8, 32).unwrap();
        let fine_g = PdeGrids::new(1.0, 256, 0.5, 8, 64).unwrap();
        let coarse = solve_burgers(&coarse_g.x.points().iter().map(|&x| ic(x)).collect::<Vec<_>>(), 0.05, &coarse_g).unwrap();
        let fine = solve_burgers(&fine_g.x.points().iter().map(|&x| ic(x)).collect::<Vec<_>>(), 0.05, &fine_g).unwrap();
        for (c, f) in coarse.iter().zip(&fine) {
            let sub: Vec<f64> = f.iter().step_by(2).copied().collect();
            let e = rel_l2(c, &sub);
            assert!(e < 1e-2, "{e}");
        }
    }

    #[test]
    fn burgers_cfl_violation() {
        let g = PdeGrids::new(1.0, 64, 1.0, 4, 1).unwrap();
        let u0: Vec<f64> = g.x.points().iter().map(|x| (2.0 * PI * x).sin()).collect();
        assert!(matches!(solve_burgers(&u0, 0.05, &g), Err(Error::CflViolation { .. })));
    }

    #[test]
    fn logistic_equilibria() {
        let g = PdeGrids::new(1.0, 32, 1.0, 8, 4).unwrap();
        for c in [0.0, 1.0] {
            for row in solve_diffusion_reaction(&[c; 32], 0.01, 2.0, &g).unwrap() {
                assert!(row.iter().all(|&v| (v - c).abs() < 1e-13));
            }
        }
    }

    #[test]
    fn pure_reaction_is_exact_logistic() {
        let g = PdeGrids::new(1.0, 32, 2.0, 16, 3).unwrap();
        let r = 1.5;
        let u0: Vec<f64> = g.x.points().iter().map(|x| 0.5 + 0.4 * (2.0 * PI * x).sin()).collect();
        let u = solve_diffusion_reaction(&u0, 0.0, r, &g).unwrap();
        for (row, &t) in u.iter().zip(&g.times) {
            let e = (r * t).exp();
            let exact: Vec<f64> = u0.iter().map(|&v| v * e / (1.0 + v * (e - 1.0))).collect();
            assert!(max_abs_diff(row, &exact) < 1e-6);
        }
    }

    #[test]
    fn reaction_diffusion_step_halving() {
        let a_g = PdeGrids::new(1.0, 64, 1.0, 16, 32).unwrap();
        let b_g = PdeGrids::new(1.0, 64, 1.0, 16, 64).unwrap();
        let u0: Vec<f64> = a_g.x.points().iter().map(|x| 0.5 + 0.3 * (2.0 * PI * x).sin()).collect();
        let a = solve_diffusion_reaction(&u0, 0.005, 1.0, &a_g).unwrap();
        let b = solve_diffusion_reaction(&u0, 0.005, 1.0, &b_g).unwrap();
        let d = a.iter().zip(&b).map(|(p, q)| max_abs_diff(p, q)).fold(0.0, f64::max);
        assert!(d < 1e-6, "{d}");
    }
}
