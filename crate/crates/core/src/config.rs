use crate::error::{Error, Result};
use crate::field::{InitialData, InitialKind, Support};
use crate::grid::Grid;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Advection {
    /// Second-order centered differences.
    Centered2,
    /// First-order upwind; with explicit diffusion the update is monotone.
    Upwind1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Diffusion {
    /// Diffusion inside the explicit Heun stages.
    Explicit,
    /// Crank-Nicolson diffusion coupled to Heun for the remaining terms in one
    /// implicit-explicit trapezoidal step.
    CrankNicolson,
    /// Strang splitting: half Crank-Nicolson step, Heun transport step, half Crank-Nicolson step.
    Strang,
}

impl std::str::FromStr for Advection {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "centered2" => Ok(Advection::Centered2),
            "upwind1" => Ok(Advection::Upwind1),
            o => Err(Error::InvalidParameter(format!("unknown advection scheme `{o}`"))),
        }
    }
}

impl std::str::FromStr for Diffusion {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "explicit" => Ok(Diffusion::Explicit),
            "crank_nicolson" => Ok(Diffusion::CrankNicolson),
            "strang" => Ok(Diffusion::Strang),
            o => Err(Error::InvalidParameter(format!("unknown diffusion scheme `{o}`"))),
        }
    }
}

impl Advection {
    pub fn name(self) -> &'static str {
        match self {
            Advection::Centered2 => "centered2",
            Advection::Upwind1 => "upwind1",
        }
    }
}

impl Diffusion {
    pub fn name(self) -> &'static str {
        match self {
            Diffusion::Explicit => "explicit",
            Diffusion::CrankNicolson => "crank_nicolson",
            Diffusion::Strang => "strang",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scheme {
    pub advection: Advection,
    pub diffusion: Diffusion,
}

impl Scheme {
    pub const DEFAULT: Scheme = Scheme {
        advection: Advection::Centered2,
        diffusion: Diffusion::CrankNicolson,
    };
    pub const MONOTONE: Scheme = Scheme {
        advection: Advection::Upwind1,
        diffusion: Diffusion::Explicit,
    };
}

impl Default for Scheme {
    fn default() -> Self {
        Scheme::DEFAULT
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ForcingKind {
    None,
    /// Sources of the built-in manufactured solution.
    Manufactured,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridParams {
    pub r_min: f64,
    pub r_max: f64,
    pub l_z: f64,
    pub n_r: usize,
    pub n_z: usize,
}

impl GridParams {
    pub fn build(&self) -> Result<Grid> {
        Grid::new(self.r_min, self.r_max, self.l_z, self.n_r, self.n_z)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub grid: GridParams,
    /// Fixed step; when `None` the step follows the stability bound scaled by `cfl`.
    pub dt: Option<f64>,
    /// Safety factor in (0, 1].
    pub cfl: f64,
    /// Upper bound on adaptive steps.
    pub dt_max: Option<f64>,
    pub scheme: Scheme,
    pub t_end: f64,
    /// Time between diagnostics records.
    pub output_every: f64,
    pub forcing: ForcingKind,
    pub initial: InitialData,
    pub seed: u64,
    /// Write a checkpoint every this many records (0: final state only).
    pub checkpoint_every: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            grid: GridParams {
                r_min: 1.0,
                r_max: 5.0,
                l_z: 2.0 * std::f64::consts::PI,
                n_r: 129,
                n_z: 128,
            },
            dt: None,
            cfl: 0.5,
            dt_max: None,
            scheme: Scheme::DEFAULT,
            t_end: 1.0,
            output_every: 0.05,
            forcing: ForcingKind::None,
            initial: InitialData {
                kind: InitialKind::SwirlBump,
                amplitude: 1.0,
                secondary_amplitude: 0.0,
                support: Support {
                    r_center: 2.0,
                    r_half_width: 0.6,
                    z_center: std::f64::consts::PI,
                    z_half_width: 1.0,
                },
                seed: 1,
                modes: 3,
            },
            seed: 1,
            checkpoint_every: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<Grid> {
        let grid = self.grid.build()?;
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "cfl must lie in (0, 1], got {}",
                self.cfl
            )));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "t_end must be finite and >= 0, got {}",
                self.t_end
            )));
        }
        if !(self.output_every > 0.0) {
            return Err(Error::InvalidParameter("output_every must be positive".into()));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
            }
        }
        if let Some(dt) = self.dt_max {
            if !(dt > 0.0) {
                return Err(Error::InvalidParameter(format!("dt_max must be positive, got {dt}")));
            }
        }
        Ok(grid)
    }

    /// Cap on adaptive steps: `dt_max`, or half the finer mesh spacing.
    pub fn dt_cap(&self, grid: &Grid) -> f64 {
        self.dt_max.unwrap_or(0.5 * grid.h_r.min(grid.h_z))
    }
}
