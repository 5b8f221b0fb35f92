//! Driving the stepper over a run: cadence, budgets, checkpoints and halts.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::checkpoint;
use crate::config::{Scheme, SolverConfig};
use crate::diagnostics::{h1_proxy, snapshot, Budgets, DiagnosticsRecord, Snapshot};
use crate::elliptic::StreamSolver;
use crate::error::{Error, Result};
use crate::evolution::{check_blowup, stability_bound, Coefficients, Forcing, Stepper};
use crate::field::{make_initial_data, AxisymState, BoundaryKind, ScalarField};
use crate::grid::{Exponent, Grid};

/// A state together with its step bookkeeping and time-integrated budgets.
#[derive(Debug, Clone)]
pub struct StepperState {
    pub state: AxisymState,
    pub dt_current: f64,
    pub step: usize,
    pub budgets: Budgets,
    pub initial: Snapshot,
    pub current: Snapshot,
    /// Largest `sup|Gamma^n| - sup|Gamma^0|` over all steps.
    pub max_margin_1_6: f64,
    /// Largest relative one-step increase of `||omega/r||_2`.
    pub max_rise_om_over_r: f64,
    /// Largest far-field leakage seen.
    pub max_leakage: f64,
}

impl StepperState {
    pub fn new(state: AxisymState) -> Self {
        let snap = snapshot(&state);
        StepperState {
            state,
            dt_current: 0.0,
            step: 0,
            budgets: Budgets::default(),
            initial: snap,
            current: snap,
            max_margin_1_6: 0.0,
            max_rise_om_over_r: f64::NEG_INFINITY,
            max_leakage: snap.leakage,
        }
    }

    pub fn advance(&mut self, stepper: &mut Stepper, dt: f64) -> Result<()> {
        let next = stepper.step(&self.state, dt).map_err(|e| match e {
            Error::BlowUp { t, what, .. } => Error::BlowUp {
                t,
                step: self.step + 1,
                what,
            },
            other => other,
        })?;
        let snap = snapshot(&next);
        self.budgets.accumulate(&self.current, &snap);
        self.max_margin_1_6 = self.max_margin_1_6.max(snap.sup_gamma - self.initial.sup_gamma);
        if self.current.l2_om_over_r > 0.0 {
            let rise = (snap.l2_om_over_r - self.current.l2_om_over_r) / self.current.l2_om_over_r;
            self.max_rise_om_over_r = self.max_rise_om_over_r.max(rise);
        }
        self.max_leakage = self.max_leakage.max(snap.leakage);
        self.current = snap;
        self.state = next;
        self.dt_current = dt;
        self.step += 1;
        Ok(())
    }

    pub fn record(&self) -> DiagnosticsRecord {
        DiagnosticsRecord::new(&self.current, &self.initial, &self.budgets)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RunStatus {
    Completed,
    HaltedBlowup(String),
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub records: Vec<DiagnosticsRecord>,
    /// `h1_proxy` of the state behind each record.
    pub h1: Vec<f64>,
    pub last: StepperState,
    pub checkpoints: Vec<PathBuf>,
    pub status: RunStatus,
}

/// Output times `0, dT, 2 dT, ...` up to `t_end`, with `t_end` appended when
/// it is not a multiple of the cadence.
pub fn output_times(t_end: f64, every: f64) -> Vec<f64> {
    let mut times = vec![0.0];
    let n = (t_end / every * (1.0 + 1e-12)).floor() as usize;
    for k in 1..=n {
        times.push((k as f64 * every).min(t_end));
    }
    if t_end - times.last().unwrap() > 1e-12 * t_end.max(1.0) {
        times.push(t_end);
    }
    times
}

/// Steps of the interval `[t0, t1]`: `n` equal steps no longer than `dt`.
fn split(t0: f64, t1: f64, dt: f64) -> (usize, f64) {
    let n = ((t1 - t0) / dt * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    (n, (t1 - t0) / n as f64)
}

/// Runs from an explicit initial state.
pub fn run_from_state(
    config: &SolverConfig,
    initial: AxisymState,
    forcing: Option<Arc<dyn Forcing>>,
    checkpoint_dir: Option<&Path>,
) -> Result<RunOutput> {
    let grid = config.validate()?;
    if initial.grid() != &grid {
        return Err(Error::InvalidGrid("initial state lives on another grid".into()));
    }
    let solver = Arc::new(StreamSolver::new(&grid));
    let mut stepper = Stepper::new(grid, config.scheme, solver, forcing);
    let t0 = initial.t;
    let mut st = StepperState::new(initial);
    let mut records = vec![st.record()];
    let mut h1 = vec![h1_proxy(&st.state)];
    let mut checkpoints = Vec::new();
    let cap = config.dt_cap(&grid);
    let times: Vec<f64> = output_times(config.t_end, config.output_every)
        .into_iter()
        .map(|t| t + t0)
        .collect();
    let mut status = RunStatus::Completed;
    'outer: for (k, &target) in times.iter().enumerate().skip(1) {
        match config.dt {
            Some(dt) => {
                let (n, h) = split(st.state.t, target, dt);
                for _ in 0..n {
                    if let Err(e) = st.advance(&mut stepper, h) {
                        status = halt_or_fail(e)?;
                        break 'outer;
                    }
                }
            }
            None => {
                while target - st.state.t > 1e-12 * target.abs().max(1.0) {
                    let bound = config.cfl * stepper.stability_bound(&st.state);
                    let mut h = cap.min(bound);
                    let left = target - st.state.t;
                    if h >= left {
                        h = left;
                    } else if 2.0 * h > left {
                        h = 0.5 * left;
                    }
                    if let Err(e) = st.advance(&mut stepper, h) {
                        status = halt_or_fail(e)?;
                        break 'outer;
                    }
                }
            }
        }
        st.state.t = target;
        st.current.t = target;
        records.push(st.record());
        h1.push(h1_proxy(&st.state));
        if let (Some(dir), true) = (checkpoint_dir, config.checkpoint_every > 0) {
            if k % config.checkpoint_every == 0 {
                checkpoints.push(write_checkpoint(dir, &st.state, k)?);
            }
        }
    }
    if status != RunStatus::Completed {
        records.push(st.record());
        h1.push(h1_proxy(&st.state));
    }
    if let Some(dir) = checkpoint_dir {
        checkpoints.push(write_checkpoint(dir, &st.state, usize::MAX)?);
    }
    Ok(RunOutput {
        records,
        h1,
        last: st,
        checkpoints,
        status,
    })
}

fn halt_or_fail(e: Error) -> Result<RunStatus> {
    match e {
        Error::BlowUp { t, step, what } => Ok(RunStatus::HaltedBlowup(format!("step {step}, t = {t}: {what}"))),
        other => Err(other),
    }
}

fn write_checkpoint(dir: &Path, state: &AxisymState, k: usize) -> Result<PathBuf> {
    let name = if k == usize::MAX {
        "final.ckpt".to_string()
    } else {
        format!("checkpoint_{k:05}.ckpt")
    };
    let path = dir.join(name);
    checkpoint::save(state, &path)?;
    Ok(path)
}

/// Builds the initial state from `config.initial` and runs.
pub fn run_simulation(
    config: &SolverConfig,
    forcing: Option<Arc<dyn Forcing>>,
    checkpoint_dir: Option<&Path>,
) -> Result<RunOutput> {
    let grid = config.validate()?;
    let solver = StreamSolver::new(&grid);
    let initial = make_initial_data(grid, &config.initial, &solver)?;
    run_from_state(config, initial, forcing, checkpoint_dir)
}

/// Prescribed drift for [`drift_diffusion_run`].
#[derive(Debug, Clone, PartialEq)]
pub enum DriftSpec {
    Zero,
    /// `b = (-d_z psi_b / r, d_r psi_b / r)` of a fixed stream function.
    Fixed {
        psi: ScalarField,
    },
    /// `t^{-(1/2 - 3/(2p))} b_hat`, time clamped below at `t_floor`.
    Modulated {
        psi: ScalarField,
        p: f64,
        t_floor: f64,
    },
}

impl DriftSpec {
    /// Stream function `amplitude * bump * bump`, zero at both walls when the
    /// support is interior, so `b . n = 0` at `r_min`.
    pub fn bump_stream(grid: Grid, support: &crate::field::Support, amplitude: f64) -> Result<ScalarField> {
        crate::field::check_support(&grid, support)?;
        Ok(crate::field::bump_field(grid, support, BoundaryKind::Dirichlet0).scaled(amplitude))
    }

    fn at(&self, grid: &Grid, t: f64) -> Coefficients {
        let zero = vec![0.0; grid.len()];
        match self {
            DriftSpec::Zero => Coefficients::zero(grid),
            DriftSpec::Fixed { psi } => {
                let (ur, uz) = crate::field::velocity_from_stream(psi);
                Coefficients {
                    ur: ur.into_values(),
                    uz: uz.into_values(),
                    gamma: zero,
                }
            }
            DriftSpec::Modulated { psi, p, t_floor } => {
                let (ur, uz) = crate::field::velocity_from_stream(psi);
                let s = t.max(*t_floor).powf(-(0.5 - 1.5 / p));
                Coefficients {
                    ur: ur.values().iter().map(|v| s * v).collect(),
                    uz: uz.values().iter().map(|v| s * v).collect(),
                    gamma: zero,
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftRecord {
    pub t: f64,
    pub sup: f64,
    pub inf: f64,
    pub l2: f64,
    pub l4: f64,
    /// Largest `max|Gamma^n|` over the steps since the previous record.
    pub max_abs_since_last: f64,
}

/// Solves the swirl drift-diffusion equation with a prescribed drift.
pub fn drift_diffusion_run(
    gamma0: &ScalarField,
    drift: &DriftSpec,
    scheme: Scheme,
    dt: f64,
    t_end: f64,
    output_every: f64,
) -> Result<Vec<DriftRecord>> {
    let grid = *gamma0.grid();
    if !(dt > 0.0 && output_every > 0.0 && t_end >= 0.0) {
        return Err(Error::InvalidParameter(
            "dt, output_every must be positive and t_end >= 0".into(),
        ));
    }
    if let DriftSpec::Modulated { p, t_floor, .. } = drift {
        if !(*p > 3.0) || !(*t_floor > 0.0) {
            return Err(Error::InvalidParameter(
                "modulated drift needs p > 3 and t_floor > 0".into(),
            ));
        }
    }
    let solver = Arc::new(StreamSolver::new(&grid));
    let mut stepper = Stepper::new(grid, scheme, solver, None);
    let mut gamma = gamma0.clone().with_bc(BoundaryKind::Robin(2.0 / grid.r_min));
    gamma.enforce_bc();
    let mut omega = ScalarField::zeros(grid, BoundaryKind::Dirichlet0);
    let measure = |g: &ScalarField, t: f64, m: f64| -> Result<DriftRecord> {
        Ok(DriftRecord {
            t,
            sup: g.max(),
            inf: g.min(),
            l2: g.l2(),
            l4: g.lp_norm(Exponent::Finite(4.0))?,
            max_abs_since_last: m,
        })
    };
    let mut out = vec![measure(&gamma, 0.0, gamma.max_abs())?];
    let mut t = 0.0;
    for &target in output_times(t_end, output_every).iter().skip(1) {
        let (n, h) = split(t, target, dt);
        let mut m: f64 = 0.0;
        for _ in 0..n {
            let (g, w) = stepper.step_with(&gamma, &omega, t, h, |_, s, _, _| drift.at(&grid, s))?;
            gamma = g;
            omega = w;
            t += h;
            if !gamma.is_finite() || gamma.max_abs() > crate::evolution::BLOWUP_LIMIT {
                return Err(Error::BlowUp {
                    t,
                    step: 0,
                    what: "drift-diffusion".into(),
                });
            }
            m = m.max(gamma.max_abs());
        }
        t = target;
        out.push(measure(&gamma, t, m)?);
    }
    Ok(out)
}

/// Largest step the scheme accepts for a drift, for choosing `dt` in [`drift_diffusion_run`].
pub fn drift_stability_bound(grid: &Grid, drift: &DriftSpec, scheme: Scheme, t_min: f64) -> f64 {
    let c = drift.at(grid, t_min);
    stability_bound(grid, scheme, &c.ur, &c.uz)
}

/// Re-checks blow-up on a state; convenience for callers building states by hand.
pub fn ensure_finite(state: &AxisymState) -> Result<()> {
    check_blowup(state, 0)
}
