//! Stream-function solve and implicit steps of the scalar parabolic operators.

use crate::field::{BoundaryKind, ScalarField};
use crate::grid::{apply_operator, Grid, Operator};
use crate::spectral::ModalSystem;

/// Solves `d_r((1/r) d_r psi) + (1/r) d_zz psi = -omega` with `psi = 0` at
/// both radial walls.
///
/// Multiplying by `r` turns the left side into `L1 psi`, so the modal system
/// is the `L1` stencil with Dirichlet rows and right side `-r omega`.
pub struct StreamSolver {
    grid: Grid,
    system: ModalSystem,
}

impl StreamSolver {
    pub fn new(grid: &Grid) -> Self {
        StreamSolver {
            grid: *grid,
            system: ModalSystem::new(Operator::L1, BoundaryKind::Dirichlet0, grid, 0.0, 1.0),
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn solve_stream(&self, omega: &ScalarField) -> ScalarField {
        let g = &self.grid;
        assert_eq!(omega.grid(), g, "vorticity lives on a different grid");
        let rhs = omega.times_radial(|r| -r);
        let psi = self.system.solve(rhs.values());
        ScalarField::from_values(*g, psi, BoundaryKind::Dirichlet0).expect("shape")
    }

    /// Max-norm residual of the discrete stream equation (multiplied by r),
    /// relative to `max |r omega|`.
    pub fn relative_residual(&self, omega: &ScalarField, psi: &ScalarField) -> f64 {
        let lpsi = apply_operator(Operator::L1, psi);
        let g = &self.grid;
        let (mut res, mut scale) = (0.0_f64, 0.0_f64);
        for i in 1..g.n_r - 1 {
            let r = g.r(i);
            for j in 0..g.n_z {
                res = res.max((lpsi.at(i, j) + r * omega.at(i, j)).abs());
                scale = scale.max((r * omega.at(i, j)).abs());
            }
        }
        if scale == 0.0 {
            res
        } else {
            res / scale
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeScheme {
    CrankNicolson,
    BackwardEuler,
}

impl TimeScheme {
    fn theta(self) -> f64 {
        match self {
            TimeScheme::CrankNicolson => 0.5,
            TimeScheme::BackwardEuler => 1.0,
        }
    }
}

/// One implicit step `f -> f'` of `d_t f = B f` for a fixed `dt`, with the
/// factorizations cached.
pub struct HeatStepper {
    op: Operator,
    bc: BoundaryKind,
    dt: f64,
    scheme: TimeScheme,
    system: ModalSystem,
}

impl HeatStepper {
    pub fn new(op: Operator, bc: BoundaryKind, grid: &Grid, dt: f64, scheme: TimeScheme) -> Self {
        assert!(dt > 0.0 && dt.is_finite(), "dt must be positive");
        let theta = scheme.theta();
        HeatStepper {
            op,
            bc,
            dt,
            scheme,
            system: ModalSystem::new(op, bc, grid, 1.0, -theta * dt),
        }
    }

    /// Stepper with the operator's own boundary condition.
    pub fn natural(op: Operator, grid: &Grid, dt: f64, scheme: TimeScheme) -> Self {
        HeatStepper::new(op, op.natural_bc(grid.r_min), grid, dt, scheme)
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn bc(&self) -> BoundaryKind {
        self.bc
    }

    pub fn step(&self, f: &ScalarField) -> ScalarField {
        let g = *f.grid();
        let f = f.clone().with_bc(self.bc);
        let explicit = 1.0 - self.scheme.theta();
        let mut rhs = f.values().to_vec();
        if explicit > 0.0 {
            let bf = apply_operator(self.op, &f);
            for (r, b) in rhs.iter_mut().zip(bf.values()) {
                *r += explicit * self.dt * b;
            }
        }
        let out = self.system.solve(&rhs);
        ScalarField::from_values(g, out, self.bc).expect("shape")
    }

    /// Solves `(I - theta dt B) x = rhs`; rows outside the unknowns come back zero.
    pub fn solve_implicit(&self, rhs: &[f64], grid: &Grid) -> ScalarField {
        ScalarField::from_values(*grid, self.system.solve(rhs), self.bc).expect("shape")
    }

    /// `n` successive steps.
    pub fn advance(&self, f: &ScalarField, n: usize) -> ScalarField {
        let mut cur = f.clone().with_bc(self.bc);
        for _ in 0..n {
            cur = self.step(&cur);
        }
        cur
    }
}
