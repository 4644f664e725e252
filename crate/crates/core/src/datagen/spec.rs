use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    Duffing,
    Pendulum,
    Lorenz,
    Diffusion,
    Burgers,
    DiffusionReaction,
}

impl TaskKind {
    pub fn is_pde(self) -> bool {
        matches!(self, TaskKind::Diffusion | TaskKind::Burgers | TaskKind::DiffusionReaction)
    }

    pub fn name(self) -> &'static str {
        match self {
            TaskKind::Duffing => "duffing",
            TaskKind::Pendulum => "pendulum",
            TaskKind::Lorenz => "lorenz",
            TaskKind::Diffusion => "diffusion",
            TaskKind::Burgers => "burgers",
            TaskKind::DiffusionReaction => "diffusion_reaction",
        }
    }
}

/// Physical parameters; unset fields take per-task defaults (see the
/// accessor methods on [`TaskSpec`]).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskParams {
    pub damping: Option<f64>,
    pub rho: Option<f64>,
    pub viscosity: Option<f64>,
    pub diffusivity: Option<f64>,
    pub reaction: Option<f64>,
    pub duration: Option<f64>,
    pub length: Option<f64>,
    /// Number of sinusoidal components in forcings / initial conditions.
    pub modes: Option<usize>,
    pub amplitude: Option<f64>,
    /// Solver steps per output interval.
    pub substeps: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskSpec {
    pub task: TaskKind,
    pub samples: usize,
    /// Samples along the time axis, the axis the operator acts on.
    pub resolution: usize,
    /// Spatial points of PDE tasks; each becomes one channel.
    #[serde(default)]
    pub space_points: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub params: TaskParams,
}

/// Largest Lorenz ρ accepted: below the chaotic onset at ≈ 24.74.
const LORENZ_RHO_MAX: f64 = 24.0;

impl TaskSpec {
    pub fn new(task: TaskKind, samples: usize, resolution: usize) -> Self {
        Self { task, samples, resolution, space_points: None, seed: 0, params: TaskParams::default() }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: TaskSpec = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("task spec serializes")
    }

    pub fn damping(&self) -> f64 {
        self.params.damping.unwrap_or(0.0)
    }

    pub fn rho(&self) -> f64 {
        self.params.rho.unwrap_or(10.0)
    }

    pub fn viscosity(&self) -> f64 {
        self.params.viscosity.unwrap_or(0.05)
    }

    pub fn diffusivity(&self) -> f64 {
        self.params.diffusivity.unwrap_or(0.005)
    }

    pub fn reaction(&self) -> f64 {
        self.params.reaction.unwrap_or(1.0)
    }

    pub fn duration(&self) -> f64 {
        self.params.duration.unwrap_or(match self.task {
            TaskKind::Duffing | TaskKind::Pendulum => 10.0,
            TaskKind::Lorenz => 5.0,
            _ => 1.0,
        })
    }

    pub fn length(&self) -> f64 {
        self.params.length.unwrap_or(1.0)
    }

    pub fn modes(&self) -> usize {
        self.params.modes.unwrap_or(if self.task.is_pde() { 3 } else { 5 })
    }

    pub fn amplitude(&self) -> f64 {
        self.params.amplitude.unwrap_or(match self.task {
            TaskKind::Burgers => 0.5,
            TaskKind::Lorenz => 5.0,
            _ => 1.0,
        })
    }

    pub fn substeps(&self) -> usize {
        self.params.substeps.unwrap_or(match self.task {
            TaskKind::Burgers => 16,
            TaskKind::DiffusionReaction => 8,
            _ => 4,
        })
    }

    pub fn space_points(&self) -> usize {
        self.space_points.unwrap_or(64)
    }

    /// Lorenz: x0, y0, z0 and a time ramp. PDEs: the initial field at each
    /// spatial point, held along time, and a time ramp.
    pub fn in_channels(&self) -> usize {
        match self.task {
            TaskKind::Lorenz => 4,
            t if t.is_pde() => self.space_points() + 1,
            _ => 1,
        }
    }

    pub fn out_channels(&self) -> usize {
        if self.task.is_pde() {
            self.space_points()
        } else {
            1
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.resolution < 32 {
            return bad(format!("resolution {} < 32", self.resolution));
        }
        if self.samples == 0 {
            return bad("samples must be positive".into());
        }
        if self.substeps() == 0 {
            return bad("substeps must be positive".into());
        }
        if self.task.is_pde() && self.space_points() < 32 {
            return bad(format!("space_points {} < 32", self.space_points()));
        }
        if !(self.duration() > 0.0) || !(self.length() > 0.0) {
            return bad("duration and length must be positive".into());
        }
        if !(self.amplitude() >= 0.0) || !(self.damping() >= 0.0) {
            return bad("amplitude and damping must be non-negative".into());
        }
        match self.task {
            TaskKind::Lorenz if !(0.0..=LORENZ_RHO_MAX).contains(&self.rho()) => {
                bad(format!("rho {} outside [0, {LORENZ_RHO_MAX}]", self.rho()))
            }
            TaskKind::Diffusion | TaskKind::DiffusionReaction if !(self.diffusivity() >= 0.0) || !(self.reaction() >= 0.0) => {
                bad("diffusivity and reaction must be non-negative".into())
            }
            TaskKind::Burgers => {
                // Shock width ~ ν / |u|max must cover 4 cells; the nominal
                // |u|max is the first-mode amplitude.
                let dx = self.length() / self.space_points() as f64;
                let need = 4.0 * dx * self.amplitude();
                if !(self.viscosity() > 0.0) || self.viscosity() < need {
                    bad(format!("viscosity {} below the resolvable minimum {need}", self.viscosity()))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }
}
