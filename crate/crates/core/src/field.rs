//! Node-valued fields and the axisymmetric state `(Gamma, omega, psi, u)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::elliptic::StreamSolver;
use crate::error::{Error, Result};
use crate::grid::Grid;

/// Condition at `r = r_min`. The outer truncation `r = R` is always homogeneous Dirichlet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryKind {
    /// `d_r f = alpha f` at `r_min`, i.e. `d_n f + alpha f = 0` with `n = -e_r`.
    Robin(f64),
    Dirichlet0,
    None,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
    bc: BoundaryKind,
}

impl ScalarField {
    pub fn zeros(grid: Grid, bc: BoundaryKind) -> Self {
        ScalarField {
            grid,
            values: vec![0.0; grid.len()],
            bc,
        }
    }

    pub fn from_values(grid: Grid, values: Vec<f64>, bc: BoundaryKind) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::ShapeMismatch {
                expected_r: grid.n_r,
                expected_z: grid.n_z,
                got_r: values.len() / grid.n_z.max(1),
                got_z: grid.n_z,
            });
        }
        Ok(ScalarField { grid, values, bc })
    }

    /// Samples `f(r, z)` at every node.
    pub fn from_fn(grid: Grid, bc: BoundaryKind, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..grid.n_r {
            let r = grid.r(i);
            for j in 0..grid.n_z {
                values.push(f(r, grid.z(j)));
            }
        }
        ScalarField { grid, values, bc }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn bc(&self) -> BoundaryKind {
        self.bc
    }

    pub fn with_bc(mut self, bc: BoundaryKind) -> Self {
        self.bc = bc;
        self
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.grid.n_z + j]
    }

    pub fn integral(&self) -> f64 {
        self.grid.integrate(&self.values)
    }

    pub fn lp_norm(&self, p: crate::grid::Exponent) -> Result<f64> {
        self.grid.lp_norm(&self.values, p)
    }

    pub fn l2(&self) -> f64 {
        self.grid.l2_sq(&self.values).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn scaled(&self, a: f64) -> Self {
        ScalarField {
            grid: self.grid,
            values: self.values.iter().map(|v| a * v).collect(),
            bc: self.bc,
        }
    }

    /// `self - other`, keeping `self`'s boundary kind.
    pub fn minus(&self, other: &ScalarField) -> Self {
        assert_eq!(self.values.len(), other.values.len());
        ScalarField {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
            bc: self.bc,
        }
    }

    /// Pointwise product with a function of the radius.
    pub fn times_radial(&self, f: impl Fn(f64) -> f64) -> Self {
        let g = self.grid;
        let mut values = self.values.clone();
        for i in 0..g.n_r {
            let w = f(g.r(i));
            for v in &mut values[i * g.n_z..(i + 1) * g.n_z] {
                *v *= w;
            }
        }
        ScalarField {
            grid: g,
            values,
            bc: self.bc,
        }
    }

    /// Zeroes the Dirichlet rows: always `r = R`, and `r = r_min` for `Dirichlet0`.
    pub fn enforce_bc(&mut self) {
        let nz = self.grid.n_z;
        let last = self.grid.n_r - 1;
        self.values[last * nz..].iter_mut().for_each(|v| *v = 0.0);
        if self.bc == BoundaryKind::Dirichlet0 {
            self.values[..nz].iter_mut().for_each(|v| *v = 0.0);
        }
    }
}

/// `u^r = -(1/r) d_z psi`, `u^z = (1/r) d_r psi`.
pub fn velocity_from_stream(psi: &ScalarField) -> (ScalarField, ScalarField) {
    let g = *psi.grid();
    let (dr, dz) = g.grad(psi.values());
    let mut ur = ScalarField::from_values(g, dz, BoundaryKind::Dirichlet0).expect("shape");
    let mut uz = ScalarField::from_values(g, dr, BoundaryKind::None).expect("shape");
    for i in 0..g.n_r {
        let inv_r = 1.0 / g.r(i);
        for j in 0..g.n_z {
            let n = g.idx(i, j);
            ur.values[n] *= -inv_r;
            uz.values[n] *= inv_r;
        }
    }
    (ur, uz)
}

/// `u^theta = Gamma / r`.
pub fn swirl_velocity(gamma: &ScalarField) -> ScalarField {
    gamma.times_radial(|r| 1.0 / r).with_bc(BoundaryKind::None)
}

/// `omega^theta = d_z u^r - d_r u^z`.
pub fn azimuthal_vorticity_of(ur: &ScalarField, uz: &ScalarField) -> ScalarField {
    let g = *ur.grid();
    let dz = g.d_z(ur.values());
    let dr = g.d_r(uz.values());
    let values = dz.iter().zip(&dr).map(|(a, b)| a - b).collect();
    ScalarField::from_values(g, values, BoundaryKind::None).expect("shape")
}

/// Dynamical state plus the fields derived from it.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisymState {
    pub t: f64,
    /// `Gamma = r u^theta`, Robin `2/r_min` at the inner wall.
    pub gamma: ScalarField,
    /// Azimuthal vorticity, zero at both radial walls.
    pub omega: ScalarField,
    pub psi: ScalarField,
    pub ur: ScalarField,
    pub uth: ScalarField,
    pub uz: ScalarField,
}

impl AxisymState {
    /// Builds the state from its dynamical variables, re-imposing the
    /// boundary rows and deriving `psi` and the velocity.
    pub fn from_dynamic(t: f64, mut gamma: ScalarField, mut omega: ScalarField, solver: &StreamSolver) -> Self {
        let g = *gamma.grid();
        gamma = gamma.with_bc(BoundaryKind::Robin(2.0 / g.r_min));
        omega = omega.with_bc(BoundaryKind::Dirichlet0);
        gamma.enforce_bc();
        omega.enforce_bc();
        let psi = solver.solve_stream(&omega);
        let (ur, uz) = velocity_from_stream(&psi);
        let uth = swirl_velocity(&gamma);
        AxisymState {
            t,
            gamma,
            omega,
            psi,
            ur,
            uth,
            uz,
        }
    }

    pub fn zero(grid: Grid, solver: &StreamSolver) -> Self {
        AxisymState::from_dynamic(
            0.0,
            ScalarField::zeros(grid, BoundaryKind::Robin(2.0 / grid.r_min)),
            ScalarField::zeros(grid, BoundaryKind::Dirichlet0),
            solver,
        )
    }

    pub fn grid(&self) -> &Grid {
        self.gamma.grid()
    }

    pub fn is_finite(&self) -> bool {
        self.gamma.is_finite() && self.omega.is_finite() && self.psi.is_finite()
    }

    /// `int |u|^2` over the domain (no factor 1/2).
    pub fn kinetic_energy(&self) -> f64 {
        let g = self.grid();
        g.l2_sq(self.ur.values()) + g.l2_sq(self.uth.values()) + g.l2_sq(self.uz.values())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialKind {
    /// `Gamma_0 = 0`, a single vorticity bump.
    NoSwirlBump,
    /// A swirl-momentum bump, optionally with a vorticity bump of `secondary_amplitude`.
    SwirlBump,
    /// Radial bumps times random axial Fourier modes in both `Gamma` and `omega`.
    RandomModes,
}

impl std::str::FromStr for InitialKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "no_swirl_bump" => Ok(InitialKind::NoSwirlBump),
            "swirl_bump" => Ok(InitialKind::SwirlBump),
            "random_modes" => Ok(InitialKind::RandomModes),
            other => Err(Error::InvalidParameter(format!("unknown initial kind `{other}`"))),
        }
    }
}

impl InitialKind {
    pub fn name(self) -> &'static str {
        match self {
            InitialKind::NoSwirlBump => "no_swirl_bump",
            InitialKind::SwirlBump => "swirl_bump",
            InitialKind::RandomModes => "random_modes",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Support {
    pub r_center: f64,
    pub r_half_width: f64,
    pub z_center: f64,
    pub z_half_width: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitialData {
    pub kind: InitialKind,
    pub amplitude: f64,
    pub secondary_amplitude: f64,
    pub support: Support,
    pub seed: u64,
    /// Number of modes for `RandomModes`.
    pub modes: usize,
}

/// `(1 - s^2)^4` on `|s| < 1`: compactly supported, C^3 at the edges.
#[inline]
pub fn bump(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        let q = 1.0 - s * s;
        let q2 = q * q;
        q2 * q2
    }
}

/// Signed periodic distance `z - c` folded into `[-L/2, L/2)`.
#[inline]
pub fn periodic_offset(z: f64, c: f64, l: f64) -> f64 {
    let d = (z - c).rem_euclid(l);
    if d >= 0.5 * l {
        d - l
    } else {
        d
    }
}

/// Product bump centred at `support`, periodic in z.
pub fn bump_field(grid: Grid, support: &Support, bc: BoundaryKind) -> ScalarField {
    ScalarField::from_fn(grid, bc, |r, z| {
        bump((r - support.r_center) / support.r_half_width)
            * bump(periodic_offset(z, support.z_center, grid.l_z) / support.z_half_width)
    })
}

pub fn check_support(grid: &Grid, s: &Support) -> Result<()> {
    if !(s.r_half_width > 0.0 && s.z_half_width > 0.0) {
        return Err(Error::SupportOutsideDomain("half-widths must be positive".into()));
    }
    if s.r_center - s.r_half_width <= grid.r_min || s.r_center + s.r_half_width >= grid.r_max {
        return Err(Error::SupportOutsideDomain(format!(
            "radial support [{}, {}] not inside ({}, {})",
            s.r_center - s.r_half_width,
            s.r_center + s.r_half_width,
            grid.r_min,
            grid.r_max
        )));
    }
    if s.z_half_width > 0.5 * grid.l_z {
        return Err(Error::SupportOutsideDomain(format!(
            "axial half-width {} exceeds L_z/2 = {}",
            s.z_half_width,
            0.5 * grid.l_z
        )));
    }
    Ok(())
}

pub fn make_initial_data(grid: Grid, spec: &InitialData, solver: &StreamSolver) -> Result<AxisymState> {
    check_support(&grid, &spec.support)?;
    let robin = BoundaryKind::Robin(2.0 / grid.r_min);
    let (gamma, omega) = match spec.kind {
        InitialKind::NoSwirlBump => (
            ScalarField::zeros(grid, robin),
            bump_field(grid, &spec.support, BoundaryKind::Dirichlet0).scaled(spec.amplitude),
        ),
        InitialKind::SwirlBump => {
            let shape = bump_field(grid, &spec.support, robin);
            (
                shape.scaled(spec.amplitude),
                shape.scaled(spec.secondary_amplitude).with_bc(BoundaryKind::Dirichlet0),
            )
        }
        InitialKind::RandomModes => random_modes(grid, spec),
    };
    Ok(AxisymState::from_dynamic(0.0, gamma, omega, solver))
}

fn random_modes(grid: Grid, spec: &InitialData) -> (ScalarField, ScalarField) {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let s = &spec.support;
    let build = |rng: &mut ChaCha8Rng, bc| {
        let mut f = ScalarField::zeros(grid, bc);
        for _ in 0..spec.modes.max(1) {
            let a: f64 = rng.gen_range(-1.0..1.0);
            let width = s.r_half_width * rng.gen_range(0.4..1.0);
            let centre = s.r_center + (s.r_half_width - width) * rng.gen_range(-1.0..1.0);
            let n: u32 = rng.gen_range(1..=3);
            let phase: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let k = std::f64::consts::TAU * n as f64 / grid.l_z;
            for i in 0..grid.n_r {
                let radial = bump((grid.r(i) - centre) / width);
                if radial == 0.0 {
                    continue;
                }
                for j in 0..grid.n_z {
                    f.values[grid.idx(i, j)] += a * radial * (k * grid.z(j) + phase).cos();
                }
            }
        }
        f.scaled(spec.amplitude)
    };
    let gamma = build(&mut rng, BoundaryKind::Robin(2.0 / grid.r_min));
    let omega = build(&mut rng, BoundaryKind::Dirichlet0);
    (gamma, omega)
}
