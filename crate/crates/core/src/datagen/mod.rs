//! Deterministic benchmark data: forced Duffing and pendulum oscillators and
//! the Lorenz system (RK4), and periodic 1D diffusion, viscous Burgers and
//! Fisher-KPP diffusion-reaction (Crank-Nicolson based finite differences).

mod dataset;
mod forcing;
mod ode;
mod pde;
mod spec;

pub use dataset::{
    build_dataset, read_dataset, task_grid, write_dataset, NormStats, TaskDataset, DATASET_MAGIC,
    DATASET_VERSION,
};
pub use forcing::{sample_forcing, Forcing, ForcingSampler};
pub use ode::{
    rk4_step, solve_duffing, solve_lorenz, solve_pendulum, OdeOptions, DIVERGENCE_LIMIT,
    LORENZ_BETA, LORENZ_SIGMA,
};
pub use pde::{
    output_times, solve_burgers, solve_diffusion, solve_diffusion_reaction, CyclicTridiagonal, PdeGrids,
    BURGERS_CFL_LIMIT,
};
pub use spec::{TaskKind, TaskParams, TaskSpec};
