//! Picard iteration of the reduced system. Iterate `j + 1` solves the linear
//! problem whose drift, reaction and swirl source are frozen at iterate `j`;
//! the first iterate has none of them.

use std::sync::Arc;

use crate::config::Scheme;
use crate::diagnostics::{grad_u_pointwise, magnitude};
use crate::elliptic::StreamSolver;
use crate::error::{Error, Result};
use crate::evolution::{Coefficients, Stepper};
use crate::field::{swirl_velocity, velocity_from_stream, AxisymState, ScalarField};
use crate::grid::{Exponent, Grid};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardParams {
    pub t_end: f64,
    pub dt: f64,
    pub j_max: usize,
    /// Integrability exponent, `3 < p < inf`.
    pub p: f64,
    pub scheme: Scheme,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardIterate {
    pub j: usize,
    /// `sup_t t^g (||u_j||_p + t^{1/2} ||grad u_j||_p)`, `g = 1/2 - 3/(2p)`.
    pub k: f64,
    /// Same weighted norm of `u_{j+1} - u_j`; absent for the last iterate.
    pub delta: Option<f64>,
    /// `delta_j / delta_{j-1}`.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct PicardReport {
    pub iterates: Vec<PicardIterate>,
    /// `||u_{j_max}(T) - u_direct(T)||_2`.
    pub direct_diff: f64,
    /// `10 (h^2 + dt^2) ||u_0||_2`.
    pub direct_tolerance: f64,
    pub u0_l2: f64,
    pub steps: usize,
}

impl PicardReport {
    pub fn ratios(&self) -> Vec<f64> {
        self.iterates.iter().filter_map(|it| it.ratio).collect()
    }
}

/// Velocity `(u^r, u^theta, u^z)` at one time.
type Velocity = [Vec<f64>; 3];

fn velocity_of(gamma: &ScalarField, omega: &ScalarField, solver: &StreamSolver) -> Velocity {
    let psi = solver.solve_stream(omega);
    let (ur, uz) = velocity_from_stream(&psi);
    [ur.into_values(), swirl_velocity(gamma).into_values(), uz.into_values()]
}

fn weighted_norm(grid: &Grid, u: &Velocity, t: f64, p: f64) -> Result<f64> {
    let e = Exponent::Finite(p);
    let m = grid.lp_norm(&magnitude(&u[0], &u[1], &u[2]), e)?;
    let gm = grid.lp_norm(&grad_u_pointwise(&u[0], &u[1], &u[2], grid), e)?;
    Ok(t.powf(0.5 - 1.5 / p) * (m + t.sqrt() * gm))
}

fn difference(a: &Velocity, b: &Velocity) -> Velocity {
    let d = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(s, t)| s - t).collect::<Vec<f64>>();
    [d(&a[0], &b[0]), d(&a[1], &b[1]), d(&a[2], &b[2])]
}

fn velocity_l2(grid: &Grid, u: &Velocity) -> f64 {
    (grid.l2_sq(&u[0]) + grid.l2_sq(&u[1]) + grid.l2_sq(&u[2])).sqrt()
}

/// One linear solve over `[0, T]`. Returns the velocity after every step and
/// the stage coefficients the next iterate freezes.
fn linear_solve(
    stepper: &mut Stepper,
    initial: &AxisymState,
    frozen: Option<&[[Coefficients; 2]]>,
    dt: f64,
    steps: usize,
) -> Result<(Vec<Velocity>, Vec<[Coefficients; 2]>)> {
    let grid = *stepper.grid();
    let solver = Arc::clone(stepper.solver());
    let mut gamma = initial.gamma.clone();
    let mut omega = initial.omega.clone();
    let mut trajectory = Vec::with_capacity(steps);
    let mut own = Vec::with_capacity(steps);
    for n in 0..steps {
        let mut recorded: [Option<Coefficients>; 2] = [None, None];
        let t = n as f64 * dt;
        let (g, w) = stepper.step_with(&gamma, &omega, t, dt, |stage, _, sg, sw| {
            recorded[stage] = Some(Coefficients::of_fields(sg, sw, &solver));
            match frozen {
                Some(c) => c[n][stage].clone(),
                None => Coefficients::zero(&grid),
            }
        })?;
        if !(g.is_finite() && w.is_finite()) {
            return Err(Error::BlowUp {
                t: t + dt,
                step: n + 1,
                what: "picard iterate".into(),
            });
        }
        let [a, b] = recorded;
        own.push([a.expect("stage 0 evaluated"), b.expect("stage 1 evaluated")]);
        trajectory.push(velocity_of(&g, &w, &solver));
        gamma = g;
        omega = w;
    }
    Ok((trajectory, own))
}

/// Runs `j_max` Picard iterates from `initial` and compares the last one with
/// the direct solver at `t = T`.
pub fn picard_iterate(initial: &AxisymState, solver: Arc<StreamSolver>, params: &PicardParams) -> Result<PicardReport> {
    let PicardParams {
        t_end,
        dt,
        j_max,
        p,
        scheme,
    } = *params;
    if !(t_end > 0.0 && dt > 0.0 && dt <= t_end) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < dt <= T, got dt = {dt}, T = {t_end}"
        )));
    }
    if j_max < 2 {
        return Err(Error::InvalidParameter("j_max must be at least 2".into()));
    }
    if !(p > 3.0 && p.is_finite()) {
        return Err(Error::InvalidParameter(format!("p must lie in (3, inf), got {p}")));
    }
    let grid = *initial.grid();
    let steps = (t_end / dt).round().max(1.0) as usize;
    let dt = t_end / steps as f64;
    let times: Vec<f64> = (1..=steps).map(|n| n as f64 * dt).collect();
    let mut stepper = Stepper::new(grid, scheme, Arc::clone(&solver), None);

    let mut iterates: Vec<PicardIterate> = Vec::with_capacity(j_max);
    let mut frozen: Option<Vec<[Coefficients; 2]>> = None;
    let mut previous: Option<Vec<Velocity>> = None;
    let mut growth = 0;
    for j in 1..=j_max {
        let (traj, own) = linear_solve(&mut stepper, initial, frozen.as_deref(), dt, steps)?;
        let mut k = 0.0_f64;
        for (u, &t) in traj.iter().zip(&times) {
            k = k.max(weighted_norm(&grid, u, t, p)?);
        }
        if let Some(prev) = &previous {
            let mut delta = 0.0_f64;
            for ((a, b), &t) in traj.iter().zip(prev).zip(&times) {
                delta = delta.max(weighted_norm(&grid, &difference(a, b), t, p)?);
            }
            let last = iterates.last_mut().expect("previous iterate");
            last.delta = Some(delta);
            if iterates.len() >= 2 {
                let before = iterates[iterates.len() - 2].delta.expect("delta recorded");
                let ratio = if before > 0.0 { delta / before } else { 0.0 };
                iterates.last_mut().unwrap().ratio = Some(ratio);
                growth = if delta > before { growth + 1 } else { 0 };
                if growth >= 3 {
                    return Err(Error::PicardDivergence { iterate: j - 1 });
                }
            }
        }
        iterates.push(PicardIterate {
            j,
            k,
            delta: None,
            ratio: None,
        });
        frozen = Some(own);
        previous = Some(traj);
    }

    let mut state = initial.clone();
    for _ in 0..steps {
        state = stepper.step(&state, dt)?;
    }
    let direct = [
        state.ur.values().to_vec(),
        state.uth.values().to_vec(),
        state.uz.values().to_vec(),
    ];
    let last = previous.expect("at least one iterate");
    let direct_diff = velocity_l2(&grid, &difference(&last[steps - 1], &direct));
    let u0 = [
        initial.ur.values().to_vec(),
        initial.uth.values().to_vec(),
        initial.uz.values().to_vec(),
    ];
    let u0_l2 = velocity_l2(&grid, &u0);
    let h = grid.h_r.max(grid.h_z);
    Ok(PicardReport {
        iterates,
        direct_diff,
        direct_tolerance: 10.0 * (h * h + dt * dt) * u0_l2,
        u0_l2,
        steps,
    })
}
