//! Runs of one initial-data recipe on the family of domains `r > eps`.

use rayon::prelude::*;

use crate::config::SolverConfig;
use crate::diagnostics::{energy_budget_check, vorticity_budgets_check};
use crate::error::{Error, Result};
use crate::simulation::{run_simulation, RunStatus};

#[derive(Debug, Clone, PartialEq)]
pub struct EpsSummary {
    pub eps: f64,
    /// `completed`, `halted_blowup` or `failed`.
    pub status: String,
    pub sup_h1: f64,
    /// Max relative energy budget residual, wall term `(2/eps) int |u^theta|^2` included.
    pub residual_6_1: f64,
    /// `max_t (lhs_1_11 - E) / E`.
    pub excess_6_2: f64,
    /// Fitted constant of the swirl-free enstrophy bound.
    pub c_6_3: f64,
    pub message: Option<String>,
}

impl EpsSummary {
    pub fn completed(&self) -> bool {
        self.status == "completed"
    }

    fn failed(eps: f64, status: &str, message: String) -> Self {
        EpsSummary {
            eps,
            status: status.into(),
            sup_h1: f64::NAN,
            residual_6_1: f64::NAN,
            excess_6_2: f64::NAN,
            c_6_3: f64::NAN,
            message: Some(message),
        }
    }
}

fn one(template: &SolverConfig, eps: f64) -> Result<EpsSummary> {
    let s = &template.initial.support;
    if s.r_center - s.r_half_width < 1.0 {
        return Err(Error::SupportOutsideDomain(format!(
            "sweep data must live in r >= 1, support starts at {}",
            s.r_center - s.r_half_width
        )));
    }
    let mut config = template.clone();
    config.grid.r_min = eps;
    let out = run_simulation(&config, None, None)?;
    let vb = vorticity_budgets_check(&out.records)?;
    let (status, message) = match &out.status {
        RunStatus::Completed => ("completed", None),
        RunStatus::HaltedBlowup(m) => ("halted_blowup", Some(m.clone())),
    };
    Ok(EpsSummary {
        eps,
        status: status.into(),
        sup_h1: out.h1.iter().copied().fold(0.0, f64::max),
        residual_6_1: energy_budget_check(&out.records)?,
        excess_6_2: vb.excess_1_11,
        c_6_3: vb.c_6_3,
        message,
    })
}

/// One run per `eps` with `r_min = eps`; a failing run is recorded and the
/// sweep goes on.
pub fn eps_sweep(template: &SolverConfig, eps: &[f64]) -> Vec<EpsSummary> {
    eps.par_iter()
        .map(|&e| one(template, e).unwrap_or_else(|err| EpsSummary::failed(e, "failed", err.to_string())))
        .collect()
}

/// `(max - min) / min` of `sup_h1` over completed runs.
pub fn h1_variation(summaries: &[EpsSummary]) -> Option<f64> {
    let v: Vec<f64> = summaries.iter().filter(|s| s.completed()).map(|s| s.sup_h1).collect();
    if v.is_empty() {
        return None;
    }
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(0.0, f64::max);
    Some(if lo > 0.0 { (hi - lo) / lo } else { 0.0 })
}

pub const SUMMARY_COLUMNS: [&str; 7] = [
    "eps",
    "status",
    "sup_h1",
    "residual_6_1",
    "excess_6_2",
    "c_6_3",
    "message",
];

pub fn write_summaries<W: std::io::Write>(out: &mut W, rows: &[EpsSummary]) -> std::io::Result<()> {
    writeln!(out, "{}", SUMMARY_COLUMNS.join(","))?;
    for r in rows {
        let msg = r.message.as_deref().unwrap_or("").replace([',', '\n'], ";");
        writeln!(
            out,
            "{:.16e},{},{:.16e},{:.16e},{:.16e},{:.16e},{}",
            r.eps, r.status, r.sup_h1, r.residual_6_1, r.excess_6_2, r.c_6_3, msg
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::GridParams;
    use crate::field::InitialKind;

    fn template() -> SolverConfig {
        let mut c = SolverConfig::default();
        c.grid = GridParams {
            r_min: 1.0,
            r_max: 4.0,
            l_z: 4.0,
            n_r: 33,
            n_z: 32,
        };
        c.initial.kind = InitialKind::NoSwirlBump;
        c.initial.support.z_center = 2.0;
        c.t_end = 0.1;
        c.output_every = 0.05;
        c
    }

    #[test]
    fn unit_eps_matches_the_plain_run() {
        let t = template();
        let s = &eps_sweep(&t, &[1.0])[0];
        let out = run_simulation(&t, None, None).unwrap();
        assert_eq!(s.residual_6_1, energy_budget_check(&out.records).unwrap());
        assert_eq!(s.sup_h1, out.h1.iter().copied().fold(0.0, f64::max));
    }

    #[test]
    fn failures_are_recorded_not_fatal() {
        let t = template();
        let rows = eps_sweep(&t, &[1.0, -0.5]);
        assert!(rows[0].completed());
        assert_eq!(rows[1].status, "failed");
        assert!(rows[1].message.is_some());
        assert_eq!(h1_variation(&rows), Some(0.0));
    }

    #[test]
    fn data_inside_r_below_one_is_rejected() {
        let mut t = template();
        t.initial.support.r_center = 1.3;
        let rows = eps_sweep(&t, &[0.5]);
        assert_eq!(rows[0].status, "failed");
    }
}
