//! Time integration of the coupled swirl-momentum / azimuthal-vorticity system
//!
//! ```text
//! d_t Gamma + v . grad Gamma = L1 Gamma                                   (Robin 2/r_min)
//! d_t omega + v . grad omega - (u^r / r) omega = L0 omega + d_z(Gamma^2) / r^3   (omega = 0)
//! ```
//!
//! with `v = (u^r, u^z)` recovered from `omega` through the stream function.

use std::sync::Arc;

use crate::config::{Advection, Diffusion, Scheme};
use crate::elliptic::{HeatStepper, StreamSolver, TimeScheme};
use crate::error::{Error, Result};
use crate::field::{AxisymState, BoundaryKind, ScalarField};
use crate::grid::{apply_operator, robin_ghost, Grid, Operator};

/// Norm beyond which a run is declared blown up.
pub const BLOWUP_LIMIT: f64 = 1e12;

/// Prescribed sources added to the two evolution equations.
pub trait Forcing: Send + Sync {
    /// `(S_Gamma, S_omega)` at every node at time `t`.
    fn sources(&self, grid: &Grid, t: f64) -> (Vec<f64>, Vec<f64>);
}

/// Fields the transport stage reads: the drift `(u^r, u^z)` and the swirl
/// momentum feeding the vortex-stretching source.
#[derive(Debug, Clone)]
pub struct Coefficients {
    pub ur: Vec<f64>,
    pub uz: Vec<f64>,
    pub gamma: Vec<f64>,
}

impl Coefficients {
    pub fn zero(grid: &Grid) -> Self {
        Coefficients {
            ur: vec![0.0; grid.len()],
            uz: vec![0.0; grid.len()],
            gamma: vec![0.0; grid.len()],
        }
    }

    pub fn of_state(state: &AxisymState) -> Self {
        Coefficients {
            ur: state.ur.values().to_vec(),
            uz: state.uz.values().to_vec(),
            gamma: state.gamma.values().to_vec(),
        }
    }

    /// Coefficients of the state built from `(gamma, omega)`.
    pub fn of_fields(gamma: &ScalarField, omega: &ScalarField, solver: &StreamSolver) -> Self {
        let psi = solver.solve_stream(omega);
        let (ur, uz) = crate::field::velocity_from_stream(&psi);
        Coefficients {
            ur: ur.into_values(),
            uz: uz.into_values(),
            gamma: gamma.values().to_vec(),
        }
    }
}

/// `-v . grad f` on every row that is not a Dirichlet row of `f`.
pub fn transport(f: &ScalarField, ur: &[f64], uz: &[f64], advection: Advection) -> Vec<f64> {
    let g = f.grid();
    let (nr, nz, hr, hz) = (g.n_r, g.n_z, g.h_r, g.h_z);
    let v = f.values();
    let first = match f.bc() {
        BoundaryKind::Robin(_) => 0,
        _ => 1,
    };
    let mut out = vec![0.0; v.len()];
    for i in first..nr - 1 {
        for j in 0..nz {
            let n = i * nz + j;
            let c = v[n];
            let above = v[n + nz];
            let below = if i == 0 {
                match f.bc() {
                    BoundaryKind::Robin(alpha) => robin_ghost(c, above, alpha, hr),
                    _ => unreachable!(),
                }
            } else {
                v[n - nz]
            };
            let up = v[i * nz + (j + 1) % nz];
            let down = v[i * nz + (j + nz - 1) % nz];
            let (a, b) = (ur[n], uz[n]);
            let (dr, dz) = match advection {
                Advection::Centered2 => ((above - below) / (2.0 * hr), (up - down) / (2.0 * hz)),
                Advection::Upwind1 => (
                    if a > 0.0 { (c - below) / hr } else { (above - c) / hr },
                    if b > 0.0 { (c - down) / hz } else { (up - c) / hz },
                ),
            };
            out[n] = -(a * dr + b * dz);
        }
    }
    out
}

/// `d_z(Gamma^2) / r^3` on the vorticity unknown rows.
pub fn swirl_stretching(grid: &Grid, gamma: &[f64]) -> Vec<f64> {
    let sq: Vec<f64> = gamma.iter().map(|v| v * v).collect();
    let mut out = grid.d_z(&sq);
    let nz = grid.n_z;
    for i in 0..grid.n_r {
        let r = grid.r(i);
        let w = if i == 0 || i == grid.n_r - 1 {
            0.0
        } else {
            1.0 / (r * r * r)
        };
        out[i * nz..(i + 1) * nz].iter_mut().for_each(|v| *v *= w);
    }
    out
}

/// Tendency of `Gamma`: `-v . grad Gamma + L1 Gamma` (no source).
pub fn rhs_swirl(state: &AxisymState, advection: Advection) -> Vec<f64> {
    let mut out = transport(&state.gamma, state.ur.values(), state.uz.values(), advection);
    let diff = apply_operator(Operator::L1, &state.gamma);
    for (o, d) in out.iter_mut().zip(diff.values()) {
        *o += d;
    }
    out
}

/// Tendency of `omega`: `-v . grad omega + (u^r / r) omega + L0 omega + d_z(Gamma^2)/r^3`.
pub fn rhs_vorticity(state: &AxisymState, advection: Advection) -> Vec<f64> {
    let coeffs = Coefficients::of_state(state);
    let mut out = vorticity_transport(&state.omega, &coeffs, advection);
    let diff = apply_operator(Operator::L0p, &state.omega);
    for (o, d) in out.iter_mut().zip(diff.values()) {
        *o += d;
    }
    out
}

fn vorticity_transport(omega: &ScalarField, c: &Coefficients, advection: Advection) -> Vec<f64> {
    let g = omega.grid();
    let mut out = transport(omega, &c.ur, &c.uz, advection);
    let stretch = swirl_stretching(g, &c.gamma);
    let nz = g.n_z;
    for i in 1..g.n_r - 1 {
        let inv_r = 1.0 / g.r(i);
        for j in 0..nz {
            let n = i * nz + j;
            out[n] += c.ur[n] * inv_r * omega.values()[n] + stretch[n];
        }
    }
    out
}

/// Largest step the scheme accepts for the given drift.
///
/// Explicit diffusion: the reciprocal of the largest diagonal magnitude of the
/// forward-Euler update, which keeps the upwind swirl update a convex
/// combination. Implicit diffusion: the advective bound
/// `1 / max(|u^r|/h_r + |u^z|/h_z)`.
pub fn stability_bound(grid: &Grid, scheme: Scheme, ur: &[f64], uz: &[f64]) -> f64 {
    let (nr, nz, hr, hz) = (grid.n_r, grid.n_z, grid.h_r, grid.h_z);
    let mut worst: f64 = 0.0;
    for i in 0..nr - 1 {
        let r = grid.r(i);
        let diag = match scheme.diffusion {
            Diffusion::CrankNicolson | Diffusion::Strang => 0.0,
            Diffusion::Explicit => {
                let (lo, mid, _) = crate::grid::radial_stencil(Operator::L1, r, hr);
                let robin_extra = if i == 0 {
                    2.0 * hr * (2.0 / grid.r_min) * lo
                } else {
                    0.0
                };
                let gamma_diag = -mid + robin_extra + 2.0 / (hz * hz);
                let omega_diag = 2.0 / (hr * hr) + 1.0 / (r * r) + 2.0 / (hz * hz);
                gamma_diag.max(omega_diag)
            }
        };
        for j in 0..nz {
            let n = i * nz + j;
            let mut c = diag + ur[n].abs() / hr + uz[n].abs() / hz;
            if scheme.diffusion == Diffusion::Explicit {
                c += ur[n].abs() / r;
            }
            worst = worst.max(c);
        }
    }
    if worst == 0.0 {
        f64::INFINITY
    } else {
        1.0 / worst
    }
}

pub struct Stepper {
    grid: Grid,
    scheme: Scheme,
    solver: Arc<StreamSolver>,
    forcing: Option<Arc<dyn Forcing>>,
    /// Implicit systems for `(Gamma, omega)`, keyed by the step they were built for.
    implicit: Option<(u64, HeatStepper, HeatStepper)>,
}

impl Stepper {
    pub fn new(grid: Grid, scheme: Scheme, solver: Arc<StreamSolver>, forcing: Option<Arc<dyn Forcing>>) -> Self {
        assert_eq!(solver.grid(), &grid);
        Stepper {
            grid,
            scheme,
            solver,
            forcing,
            implicit: None,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn solver(&self) -> &Arc<StreamSolver> {
        &self.solver
    }

    pub fn stability_bound(&self, state: &AxisymState) -> f64 {
        stability_bound(&self.grid, self.scheme, state.ur.values(), state.uz.values())
    }

    /// One step of the nonlinear system.
    pub fn step(&mut self, state: &AxisymState, dt: f64) -> Result<AxisymState> {
        let solver = Arc::clone(&self.solver);
        let (gamma, omega) = self.step_with(&state.gamma, &state.omega, state.t, dt, |_, _, g, w| {
            Coefficients::of_fields(g, w, &solver)
        })?;
        let next = AxisymState::from_dynamic(state.t + dt, gamma, omega, &self.solver);
        check_blowup(&next, 0)?;
        Ok(next)
    }

    /// One step with externally supplied coefficients.
    ///
    /// `coeffs(stage, time, gamma, omega)` is called for the two Heun stages
    /// (stage 0 at `t`, stage 1 at `t + dt`) with the provisional unknowns.
    pub fn step_with<F>(
        &mut self,
        gamma: &ScalarField,
        omega: &ScalarField,
        t: f64,
        dt: f64,
        mut coeffs: F,
    ) -> Result<(ScalarField, ScalarField)>
    where
        F: FnMut(usize, f64, &ScalarField, &ScalarField) -> Coefficients,
    {
        let robin = BoundaryKind::Robin(2.0 / self.grid.r_min);
        let mut gamma = gamma.clone().with_bc(robin);
        let mut omega = omega.clone().with_bc(BoundaryKind::Dirichlet0);
        gamma.enforce_bc();
        omega.enforce_bc();
        match self.scheme.diffusion {
            Diffusion::CrankNicolson => {
                let (g, w) = self.imex(&gamma, &omega, t, dt, &mut coeffs)?;
                gamma = g;
                omega = w;
            }
            Diffusion::Strang => {
                self.half_diffuse(&mut gamma, &mut omega, dt);
                let (g, w) = self.heun(&gamma, &omega, t, dt, &mut coeffs, false)?;
                gamma = g;
                omega = w;
                self.half_diffuse(&mut gamma, &mut omega, dt);
            }
            Diffusion::Explicit => {
                let (g, w) = self.heun(&gamma, &omega, t, dt, &mut coeffs, true)?;
                gamma = g;
                omega = w;
            }
        }
        gamma.enforce_bc();
        omega.enforce_bc();
        Ok((gamma, omega))
    }

    /// Builds (or reuses) the implicit systems `I - (dt'/2) L` with `dt' = dt / 2`
    /// for Strang half steps and `dt' = dt` for the trapezoidal step.
    fn implicit_for(&mut self, dt: f64) -> (&HeatStepper, &HeatStepper) {
        let step = if self.scheme.diffusion == Diffusion::Strang {
            0.5 * dt
        } else {
            dt
        };
        let key = step.to_bits();
        if self.implicit.as_ref().map(|h| h.0) != Some(key) {
            self.implicit = Some((
                key,
                HeatStepper::natural(Operator::L1, &self.grid, step, TimeScheme::CrankNicolson),
                HeatStepper::natural(Operator::L0p, &self.grid, step, TimeScheme::CrankNicolson),
            ));
        }
        let (_, sg, sw) = self.implicit.as_ref().unwrap();
        (sg, sw)
    }

    fn half_diffuse(&mut self, gamma: &mut ScalarField, omega: &mut ScalarField, dt: f64) {
        let (sg, sw) = self.implicit_for(dt);
        *gamma = sg.step(gamma);
        *omega = sw.step(omega);
    }

    /// Implicit-explicit trapezoidal step: Heun on transport, reaction and
    /// sources, trapezoidal rule on diffusion, both stages solved implicitly.
    fn imex<F>(
        &mut self,
        gamma: &ScalarField,
        omega: &ScalarField,
        t: f64,
        dt: f64,
        coeffs: &mut F,
    ) -> Result<(ScalarField, ScalarField)>
    where
        F: FnMut(usize, f64, &ScalarField, &ScalarField) -> Coefficients,
    {
        self.implicit_for(dt);
        let half_explicit = |f: &ScalarField, op| -> Vec<f64> {
            let lf = apply_operator(op, f);
            f.values()
                .iter()
                .zip(lf.values())
                .map(|(a, b)| a + 0.5 * dt * b)
                .collect()
        };
        let base_g = half_explicit(gamma, Operator::L1);
        let base_w = half_explicit(omega, Operator::L0p);
        let c0 = coeffs(0, t, gamma, omega);
        self.check_step(&c0, t, dt)?;
        let (k0g, k0w) = self.tendency(gamma, omega, &c0, t, false);
        let (_, sg, sw) = self.implicit.as_ref().unwrap();
        let shifted =
            |base: &[f64], k: &[f64], w: f64| -> Vec<f64> { base.iter().zip(k).map(|(b, k)| b + w * dt * k).collect() };
        let gp = sg.solve_implicit(&shifted(&base_g, &k0g, 1.0), &self.grid);
        let wp = sw.solve_implicit(&shifted(&base_w, &k0w, 1.0), &self.grid);
        let c1 = coeffs(1, t + dt, &gp, &wp);
        self.check_step(&c1, t, dt)?;
        let (k1g, k1w) = self.tendency(&gp, &wp, &c1, t + dt, false);
        let kg: Vec<f64> = k0g.iter().zip(&k1g).map(|(a, b)| 0.5 * (a + b)).collect();
        let kw: Vec<f64> = k0w.iter().zip(&k1w).map(|(a, b)| 0.5 * (a + b)).collect();
        let (_, sg, sw) = self.implicit.as_ref().unwrap();
        Ok((
            sg.solve_implicit(&shifted(&base_g, &kg, 1.0), &self.grid),
            sw.solve_implicit(&shifted(&base_w, &kw, 1.0), &self.grid),
        ))
    }

    fn tendency(
        &self,
        gamma: &ScalarField,
        omega: &ScalarField,
        c: &Coefficients,
        t: f64,
        with_diffusion: bool,
    ) -> (Vec<f64>, Vec<f64>) {
        let adv = self.scheme.advection;
        let mut dg = transport(gamma, &c.ur, &c.uz, adv);
        let mut dw = vorticity_transport(omega, c, adv);
        if with_diffusion {
            let lg = apply_operator(Operator::L1, gamma);
            let lw = apply_operator(Operator::L0p, omega);
            dg.iter_mut().zip(lg.values()).for_each(|(a, b)| *a += b);
            dw.iter_mut().zip(lw.values()).for_each(|(a, b)| *a += b);
        }
        if let Some(f) = &self.forcing {
            let (sg, sw) = f.sources(&self.grid, t);
            dg.iter_mut().zip(&sg).for_each(|(a, b)| *a += b);
            dw.iter_mut().zip(&sw).for_each(|(a, b)| *a += b);
        }
        mask_dirichlet_rows(&self.grid, &mut dg, &mut dw);
        (dg, dw)
    }

    /// Heun's method in its convex-combination form
    /// `u' = u/2 + (u_p + dt k(u_p))/2` with `u_p = u + dt k(u)`.
    fn heun<F>(
        &self,
        gamma: &ScalarField,
        omega: &ScalarField,
        t: f64,
        dt: f64,
        coeffs: &mut F,
        with_diffusion: bool,
    ) -> Result<(ScalarField, ScalarField)>
    where
        F: FnMut(usize, f64, &ScalarField, &ScalarField) -> Coefficients,
    {
        let c0 = coeffs(0, t, gamma, omega);
        self.check_step(&c0, t, dt)?;
        let (k0g, k0w) = self.tendency(gamma, omega, &c0, t, with_diffusion);
        let gp = euler(gamma, &k0g, dt);
        let wp = euler(omega, &k0w, dt);
        let c1 = coeffs(1, t + dt, &gp, &wp);
        self.check_step(&c1, t, dt)?;
        let (k1g, k1w) = self.tendency(&gp, &wp, &c1, t + dt, with_diffusion);
        let g2 = euler(&gp, &k1g, dt);
        let w2 = euler(&wp, &k1w, dt);
        Ok((average(gamma, &g2), average(omega, &w2)))
    }

    fn check_step(&self, c: &Coefficients, t: f64, dt: f64) -> Result<()> {
        let bound = stability_bound(&self.grid, self.scheme, &c.ur, &c.uz);
        if dt > bound * (1.0 + 1e-12) {
            return Err(Error::CflViolation { t, dt, bound });
        }
        Ok(())
    }
}

fn mask_dirichlet_rows(grid: &Grid, dg: &mut [f64], dw: &mut [f64]) {
    let nz = grid.n_z;
    let last = (grid.n_r - 1) * nz;
    dg[last..].iter_mut().for_each(|v| *v = 0.0);
    dw[last..].iter_mut().for_each(|v| *v = 0.0);
    dw[..nz].iter_mut().for_each(|v| *v = 0.0);
}

fn euler(f: &ScalarField, k: &[f64], dt: f64) -> ScalarField {
    let values = f.values().iter().zip(k).map(|(a, b)| a + dt * b).collect();
    ScalarField::from_values(*f.grid(), values, f.bc()).expect("shape")
}

fn average(a: &ScalarField, b: &ScalarField) -> ScalarField {
    let values = a
        .values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| 0.5 * x + 0.5 * y)
        .collect();
    ScalarField::from_values(*a.grid(), values, a.bc()).expect("shape")
}

pub fn check_blowup(state: &AxisymState, step: usize) -> Result<()> {
    let worst = state
        .gamma
        .max_abs()
        .max(state.omega.max_abs())
        .max(state.psi.max_abs());
    if !state.is_finite() || !(worst <= BLOWUP_LIMIT) {
        return Err(Error::BlowUp {
            t: state.t,
            step,
            what: format!("field magnitude {worst:e}"),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{make_initial_data, InitialData, InitialKind, Support};

    fn setup(n: usize, scheme: Scheme) -> (Grid, Arc<StreamSolver>, Stepper) {
        let g = Grid::new(1.0, 4.0, 4.0, n + 1, n).unwrap();
        let solver = Arc::new(StreamSolver::new(&g));
        let st = Stepper::new(g, scheme, Arc::clone(&solver), None);
        (g, solver, st)
    }

    fn swirl(g: Grid, solver: &StreamSolver, kind: InitialKind) -> AxisymState {
        let spec = InitialData {
            kind,
            amplitude: 1.0,
            secondary_amplitude: 0.5,
            support: Support {
                r_center: 2.0,
                r_half_width: 0.7,
                z_center: 2.0,
                z_half_width: 1.0,
            },
            seed: 3,
            modes: 2,
        };
        make_initial_data(g, &spec, solver).unwrap()
    }

    #[test]
    fn zero_state_tendencies_vanish() {
        let (g, solver, mut st) = setup(16, Scheme::DEFAULT);
        let z = AxisymState::zero(g, &solver);
        assert!(rhs_swirl(&z, Advection::Centered2).iter().all(|v| *v == 0.0));
        assert!(rhs_vorticity(&z, Advection::Centered2).iter().all(|v| *v == 0.0));
        let next = st.step(&z, 0.01).unwrap();
        assert_eq!(next.gamma.max_abs(), 0.0);
        assert_eq!(next.omega.max_abs(), 0.0);
    }

    #[test]
    fn l1_kernel_has_no_swirl_tendency() {
        let (g, solver, _) = setup(16, Scheme::DEFAULT);
        let gamma = ScalarField::from_fn(g, BoundaryKind::Robin(2.0), |r, _| r * r);
        let omega = ScalarField::zeros(g, BoundaryKind::Dirichlet0);
        let mut s = AxisymState::from_dynamic(0.0, gamma.clone(), omega, &solver);
        // keep the profile at r = R so only the operator is being tested
        s.gamma = gamma;
        let rhs = rhs_swirl(&s, Advection::Centered2);
        for i in 0..g.n_r - 1 {
            assert!(rhs[i * g.n_z].abs() < 1e-9, "row {i}: {}", rhs[i * g.n_z]);
        }
    }

    #[test]
    fn axially_uniform_swirl_has_no_stretching() {
        let (g, solver, _) = setup(16, Scheme::DEFAULT);
        let gamma = ScalarField::from_fn(g, BoundaryKind::Robin(2.0), |r, _| crate::field::bump((r - 2.5) / 1.0));
        let s = AxisymState::from_dynamic(0.0, gamma, ScalarField::zeros(g, BoundaryKind::Dirichlet0), &solver);
        assert!(swirl_stretching(&g, s.gamma.values()).iter().all(|v| v.abs() < 1e-14));
        assert!(rhs_vorticity(&s, Advection::Centered2).iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn boundary_rows_hold_after_steps() {
        for scheme in [Scheme::DEFAULT, Scheme::MONOTONE] {
            let (g, solver, mut st) = setup(24, scheme);
            let mut s = swirl(g, &solver, InitialKind::RandomModes);
            for _ in 0..5 {
                let dt = 0.5 * st.stability_bound(&s).min(0.02);
                s = st.step(&s, dt).unwrap();
            }
            for j in 0..g.n_z {
                assert_eq!(s.omega.at(0, j), 0.0);
                assert_eq!(s.omega.at(g.n_r - 1, j), 0.0);
                assert_eq!(s.ur.at(0, j), 0.0);
                assert_eq!(s.ur.at(g.n_r - 1, j), 0.0);
                assert_eq!(s.gamma.at(g.n_r - 1, j), 0.0);
            }
        }
    }

    #[test]
    fn no_swirl_data_stays_swirl_free() {
        let (g, solver, mut st) = setup(24, Scheme::DEFAULT);
        let mut s = swirl(g, &solver, InitialKind::NoSwirlBump);
        for _ in 0..10 {
            s = st.step(&s, 0.01).unwrap();
        }
        assert_eq!(s.gamma.max_abs(), 0.0);
        assert!(s.omega.max_abs() > 0.0);
    }

    #[test]
    fn cfl_violation_is_reported() {
        let (g, solver, mut st) = setup(24, Scheme::MONOTONE);
        let s = swirl(g, &solver, InitialKind::SwirlBump);
        let bound = st.stability_bound(&s);
        assert!(matches!(st.step(&s, 3.0 * bound), Err(Error::CflViolation { .. })));
    }

    #[test]
    fn monotone_update_matrix_is_nonnegative_and_substochastic() {
        // brute force on a 16 x 16 grid: push every unit vector through one
        // forward-Euler swirl update with a fixed drift
        let g = Grid::new(1.0, 2.5, 1.5, 16, 16).unwrap();
        let solver = StreamSolver::new(&g);
        let psi = ScalarField::from_fn(g, BoundaryKind::Dirichlet0, |r, z| {
            0.8 * ((r - 1.0) * (2.5 - r)).powi(2) * (std::f64::consts::TAU * z / 1.5).sin()
        });
        let (ur, uz) = crate::field::velocity_from_stream(&psi);
        let c = Coefficients {
            ur: ur.into_values(),
            uz: uz.into_values(),
            gamma: vec![0.0; g.len()],
        };
        let dt = stability_bound(&g, Scheme::MONOTONE, &c.ur, &c.uz);
        let _ = solver;
        let n = g.len();
        let rows = (g.n_r - 1) * g.n_z;
        let mut row_sums = vec![0.0; n];
        for k in 0..rows {
            let mut e = ScalarField::zeros(g, BoundaryKind::Robin(2.0));
            e.values_mut()[k] = 1.0;
            let mut upd = transport(&e, &c.ur, &c.uz, Advection::Upwind1);
            let l = apply_operator(Operator::L1, &e);
            for (u, d) in upd.iter_mut().zip(l.values()) {
                *u += d;
            }
            for m in 0..rows {
                let entry = e.values()[m] + dt * upd[m];
                assert!(entry >= -1e-14, "negative coefficient {entry} at ({m}, {k})");
                row_sums[m] += entry;
            }
        }
        for m in 0..rows {
            assert!(row_sums[m] <= 1.0 + 1e-12, "row {m} sums to {}", row_sums[m]);
        }
    }
}
