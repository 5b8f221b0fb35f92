//! Norms, budgets and the checks built on them.

use crate::error::{Error, Result};
use crate::field::{AxisymState, ScalarField};
use crate::grid::{Exponent, Grid};

/// Instantaneous quantities of one state. Squared integrals are suffixed `_sq`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Snapshot {
    pub t: f64,
    /// `int |u|^2` (no factor 1/2).
    pub e_kin: f64,
    /// `int |grad v|^2` with the cylindrical metric term `(u^r/r)^2`.
    pub diss_v: f64,
    pub diss_uth: f64,
    pub diss_swirl_weight: f64,
    pub bdry_flux: f64,
    pub sup_gamma: f64,
    pub l4_uth: f64,
    pub l2_om_over_r: f64,
    pub l2_om: f64,
    pub grad_om_over_r_sq: f64,
    pub grad_om_sq: f64,
    pub dev_5_3: f64,
    /// Mass of `|Gamma| + |omega|` on the last interior ring before `r = R`.
    pub leakage: f64,
}

/// `int |grad v|^2 = |d_r u^r|^2 + |d_z u^r|^2 + |u^r/r|^2 + |d_r u^z|^2 + |d_z u^z|^2`.
pub fn grad_v_sq(ur: &ScalarField, uz: &ScalarField) -> f64 {
    let g = ur.grid();
    let over_r = ur.times_radial(|r| 1.0 / r);
    g.grad_energy(ur.values()) + g.l2_sq(over_r.values()) + g.grad_energy(uz.values())
}

/// Frobenius norm squared of the cylindrical gradient of `(u^r, u^theta, u^z)`.
pub fn grad_u_sq(ur: &ScalarField, uth: &ScalarField, uz: &ScalarField) -> f64 {
    let g = ur.grid();
    grad_v_sq(ur, uz) + g.grad_energy(uth.values()) + g.l2_sq(uth.times_radial(|r| 1.0 / r).values())
}

/// Pointwise `|grad u|` of `(u^r, u^theta, u^z)`, cylindrical metric included.
pub fn grad_u_pointwise(ur: &[f64], uth: &[f64], uz: &[f64], g: &Grid) -> Vec<f64> {
    let mut acc = vec![0.0; g.len()];
    for f in [ur, uth, uz] {
        let (a, b) = g.grad(f);
        for k in 0..acc.len() {
            acc[k] += a[k] * a[k] + b[k] * b[k];
        }
    }
    for i in 0..g.n_r {
        let inv = 1.0 / g.r(i);
        for j in 0..g.n_z {
            let k = g.idx(i, j);
            acc[k] += (ur[k] * inv).powi(2) + (uth[k] * inv).powi(2);
        }
    }
    acc.iter().map(|v| v.sqrt()).collect()
}

/// Pointwise `|u|` of a three-component field.
pub fn magnitude(a: &[f64], b: &[f64], c: &[f64]) -> Vec<f64> {
    a.iter()
        .zip(b)
        .zip(c)
        .map(|((x, y), z)| (x * x + y * y + z * z).sqrt())
        .collect()
}

/// `| ||grad v|| - ||omega|| | / max(||omega||, tiny)`.
pub fn identity_5_3_check(state: &AxisymState) -> f64 {
    let gv = grad_v_sq(&state.ur, &state.uz).sqrt();
    let om = state.omega.l2();
    (gv - om).abs() / om.max(f64::MIN_POSITIVE)
}

pub fn snapshot(state: &AxisymState) -> Snapshot {
    let g = *state.grid();
    let e_kin = state.kinetic_energy();
    let diss_v = grad_v_sq(&state.ur, &state.uz);
    let diss_uth = g.grad_energy(state.uth.values());
    let diss_swirl_weight = g.l2_sq(state.uth.times_radial(|r| 1.0 / r).values());
    let bdry_flux = g.inner_boundary_flux(state.uth.values());
    let om_over_r = state.omega.times_radial(|r| 1.0 / r);
    let l2_om = state.omega.l2();
    let dev_5_3 = (diss_v.sqrt() - l2_om).abs() / l2_om.max(f64::MIN_POSITIVE);
    let ring = g.n_r - 2;
    let leakage: f64 = (0..g.n_z)
        .map(|j| state.gamma.at(ring, j).abs() + state.omega.at(ring, j).abs())
        .sum::<f64>()
        * 2.0
        * std::f64::consts::PI
        * g.r(ring)
        * g.h_z;
    Snapshot {
        t: state.t,
        e_kin,
        diss_v,
        diss_uth,
        diss_swirl_weight,
        bdry_flux,
        sup_gamma: state.gamma.max_abs(),
        l4_uth: state.uth.lp_norm(Exponent::Finite(4.0)).expect("finite exponent"),
        l2_om_over_r: om_over_r.l2(),
        l2_om,
        grad_om_over_r_sq: g.grad_energy(om_over_r.values()),
        grad_om_sq: g.grad_energy(state.omega.values()),
        dev_5_3,
        leakage,
    }
}

/// Time integrals accumulated by the trapezoid rule at every step.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Budgets {
    pub diss_v: f64,
    pub diss_uth: f64,
    pub diss_swirl_weight: f64,
    pub bdry_flux: f64,
    pub grad_om_over_r_sq: f64,
    /// `int (|grad omega|^2 + |omega/r|^2)`.
    pub vort_1_12: f64,
}

impl Budgets {
    pub fn accumulate(&mut self, a: &Snapshot, b: &Snapshot) {
        let h = 0.5 * (b.t - a.t);
        self.diss_v += h * (a.diss_v + b.diss_v);
        self.diss_uth += h * (a.diss_uth + b.diss_uth);
        self.diss_swirl_weight += h * (a.diss_swirl_weight + b.diss_swirl_weight);
        self.bdry_flux += h * (a.bdry_flux + b.bdry_flux);
        self.grad_om_over_r_sq += h * (a.grad_om_over_r_sq + b.grad_om_over_r_sq);
        self.vort_1_12 +=
            h * (a.grad_om_sq + a.l2_om_over_r * a.l2_om_over_r + b.grad_om_sq + b.l2_om_over_r * b.l2_om_over_r);
    }

    /// Everything the kinetic energy loses: `2 int (dissipation + boundary flux)`.
    pub fn energy_loss(&self) -> f64 {
        2.0 * (self.diss_v + self.diss_uth + self.diss_swirl_weight + self.bdry_flux)
    }
}

/// One row of the diagnostics CSV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub e_kin: f64,
    pub diss_v: f64,
    pub diss_uth: f64,
    pub diss_swirl_weight: f64,
    pub bdry_flux: f64,
    pub budget_residual_1_5: f64,
    pub sup_gamma: f64,
    pub l4_uth: f64,
    pub l2_om_over_r: f64,
    pub l2_om: f64,
    pub e_bound_1_11: f64,
    pub lhs_1_11: f64,
    pub lhs_1_12: f64,
    pub margin_1_6: f64,
    pub margin_1_7: f64,
    pub dev_5_3: f64,
}

pub const CSV_COLUMNS: [&str; 17] = [
    "t",
    "E_kin",
    "diss_v",
    "diss_uth",
    "diss_swirl_weight",
    "bdry_flux",
    "budget_residual_1_5",
    "sup_Gamma",
    "l4_uth",
    "l2_om_over_r",
    "l2_om",
    "E_bound_1_11",
    "lhs_1_11",
    "lhs_1_12",
    "margin_1_6",
    "margin_1_7",
    "dev_5_3",
];

impl DiagnosticsRecord {
    /// Builds the row from the current snapshot, the initial one and the accumulated integrals.
    pub fn new(now: &Snapshot, initial: &Snapshot, budgets: &Budgets) -> Self {
        let e0 = initial.e_kin;
        let num = now.e_kin + budgets.energy_loss() - e0;
        let budget_residual_1_5 = if e0 > 0.0 { num / e0 } else { num };
        let e_bound = initial.l2_om_over_r.powi(2) + initial.sup_gamma.powi(2) * e0;
        DiagnosticsRecord {
            t: now.t,
            e_kin: now.e_kin,
            diss_v: now.diss_v,
            diss_uth: now.diss_uth,
            diss_swirl_weight: now.diss_swirl_weight,
            bdry_flux: now.bdry_flux,
            budget_residual_1_5,
            sup_gamma: now.sup_gamma,
            l4_uth: now.l4_uth,
            l2_om_over_r: now.l2_om_over_r,
            l2_om: now.l2_om,
            e_bound_1_11: e_bound,
            lhs_1_11: now.l2_om_over_r.powi(2) + budgets.grad_om_over_r_sq,
            lhs_1_12: now.l2_om.powi(2) + budgets.vort_1_12,
            margin_1_6: now.sup_gamma - initial.sup_gamma,
            margin_1_7: now.l4_uth - (initial.sup_gamma * e0.sqrt()).sqrt(),
            dev_5_3: now.dev_5_3,
        }
    }

    pub fn values(&self) -> [f64; 17] {
        [
            self.t,
            self.e_kin,
            self.diss_v,
            self.diss_uth,
            self.diss_swirl_weight,
            self.bdry_flux,
            self.budget_residual_1_5,
            self.sup_gamma,
            self.l4_uth,
            self.l2_om_over_r,
            self.l2_om,
            self.e_bound_1_11,
            self.lhs_1_11,
            self.lhs_1_12,
            self.margin_1_6,
            self.margin_1_7,
            self.dev_5_3,
        ]
    }

    pub fn from_values(v: [f64; 17]) -> Self {
        DiagnosticsRecord {
            t: v[0],
            e_kin: v[1],
            diss_v: v[2],
            diss_uth: v[3],
            diss_swirl_weight: v[4],
            bdry_flux: v[5],
            budget_residual_1_5: v[6],
            sup_gamma: v[7],
            l4_uth: v[8],
            l2_om_over_r: v[9],
            l2_om: v[10],
            e_bound_1_11: v[11],
            lhs_1_11: v[12],
            lhs_1_12: v[13],
            margin_1_6: v[14],
            margin_1_7: v[15],
            dev_5_3: v[16],
        }
    }
}

/// Writes the series as CSV with 17 significant digits per float.
pub fn write_csv<W: std::io::Write>(out: &mut W, records: &[DiagnosticsRecord]) -> std::io::Result<()> {
    writeln!(out, "{}", CSV_COLUMNS.join(","))?;
    for r in records {
        let row: Vec<String> = r.values().iter().map(|v| format!("{v:.16e}")).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

/// Max over t of the relative energy budget residual.
pub fn energy_budget_check(records: &[DiagnosticsRecord]) -> Result<f64> {
    if records.is_empty() {
        return Err(Error::EmptySeries);
    }
    Ok(records.iter().fold(0.0_f64, |m, r| m.max(r.budget_residual_1_5.abs())))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwirlMargins {
    /// `max_t sup|Gamma(t)| - sup|Gamma_0|`.
    pub max_principle: f64,
    /// `max_t ||u^theta||_4 - ||Gamma_0||_inf^{1/2} ||u_0||_2^{1/2}`.
    pub l4: f64,
    /// The bound in the L4 margin, for relative tolerances.
    pub l4_bound: f64,
}

pub fn swirl_bounds_check(records: &[DiagnosticsRecord], r_min: f64) -> Result<SwirlMargins> {
    let first = records.first().ok_or(Error::EmptySeries)?;
    if r_min < 1.0 {
        return Err(Error::InvalidParameter(format!(
            "the L4 swirl bound needs r_min >= 1, got {r_min}"
        )));
    }
    let l4_bound = (first.sup_gamma * first.e_kin.sqrt()).sqrt();
    Ok(SwirlMargins {
        max_principle: records.iter().map(|r| r.margin_1_6).fold(f64::NEG_INFINITY, f64::max),
        l4: records.iter().map(|r| r.margin_1_7).fold(f64::NEG_INFINITY, f64::max),
        l4_bound,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VorticityBudgets {
    /// `max_t (lhs_1_11 - E) / E`; non-positive when the bound holds.
    pub excess_1_11: f64,
    /// Smallest `C` making the right side of the `||omega||^2` bound hold at every record.
    pub c_1_12: f64,
    /// Same fit against the swirl-free right side `C ||omega_0/r||^{3/2} ||u_0||^{5/2}`.
    pub c_6_3: f64,
}

pub fn vorticity_budgets_check(records: &[DiagnosticsRecord]) -> Result<VorticityBudgets> {
    let first = records.first().ok_or(Error::EmptySeries)?;
    let e = first.e_bound_1_11;
    let excess_1_11 = records
        .iter()
        .map(|r| if e > 0.0 { (r.lhs_1_11 - e) / e } else { r.lhs_1_11 })
        .fold(f64::NEG_INFINITY, f64::max);
    let om0_sq = first.lhs_1_12;
    let u0 = first.e_kin.sqrt();
    let g0 = first.sup_gamma;
    let rhs_1_12 = (e.powf(0.75) * u0.sqrt() + g0 * g0) * u0 * u0;
    let rhs_6_3 = first.l2_om_over_r.powf(1.5) * u0.powf(2.5);
    let fit = |den: f64| {
        records.iter().fold(0.0_f64, |c, r| {
            let excess = r.lhs_1_12 - om0_sq;
            if excess <= 0.0 {
                c
            } else if den > 0.0 {
                c.max(excess / den)
            } else {
                f64::INFINITY
            }
        })
    };
    Ok(VorticityBudgets {
        excess_1_11,
        c_1_12: fit(rhs_1_12),
        c_6_3: fit(rhs_6_3),
    })
}

/// `(||u||^2 + ||grad v||^2 + ||grad u^theta||^2)^{1/2}`.
pub fn h1_proxy(state: &AxisymState) -> f64 {
    let g = state.grid();
    (state.kinetic_energy() + grad_v_sq(&state.ur, &state.uz) + g.grad_energy(state.uth.values())).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptic::StreamSolver;
    use crate::field::{make_initial_data, BoundaryKind, InitialData, InitialKind, Support};

    fn grid() -> Grid {
        Grid::new(1.0, 5.0, 4.0, 65, 64).unwrap()
    }

    #[test]
    fn zero_state_measures_zero() {
        let g = grid();
        let solver = StreamSolver::new(&g);
        let s = AxisymState::zero(g, &solver);
        let snap = snapshot(&s);
        assert_eq!(snap.e_kin, 0.0);
        assert_eq!(snap.dev_5_3, 0.0);
        assert_eq!(identity_5_3_check(&s), 0.0);
        let rec = DiagnosticsRecord::new(&snap, &snap, &Budgets::default());
        assert!(rec.values().iter().all(|v| *v == 0.0));
        assert_eq!(energy_budget_check(&[rec]).unwrap(), 0.0);
        let m = swirl_bounds_check(&[rec], 1.0).unwrap();
        assert_eq!((m.max_principle, m.l4), (0.0, 0.0));
        let v = vorticity_budgets_check(&[rec]).unwrap();
        assert_eq!(v.c_1_12, 0.0);
    }

    #[test]
    fn empty_series_is_an_error() {
        assert!(matches!(energy_budget_check(&[]), Err(Error::EmptySeries)));
        assert!(swirl_bounds_check(&[], 1.0).is_err());
    }

    #[test]
    fn l4_margin_needs_r_min_one() {
        let rec = DiagnosticsRecord::from_values([0.0; 17]);
        assert!(swirl_bounds_check(&[rec], 0.5).is_err());
    }

    #[test]
    fn trapezoid_accumulation() {
        let a = Snapshot {
            t: 0.0,
            diss_v: 1.0,
            bdry_flux: 2.0,
            ..Default::default()
        };
        let b = Snapshot {
            t: 0.5,
            diss_v: 3.0,
            bdry_flux: 2.0,
            ..Default::default()
        };
        let mut acc = Budgets::default();
        acc.accumulate(&a, &b);
        assert!((acc.diss_v - 1.0).abs() < 1e-15);
        assert!((acc.bdry_flux - 1.0).abs() < 1e-15);
        assert!((acc.energy_loss() - 4.0).abs() < 1e-15);
    }

    #[test]
    fn grad_v_of_pure_radial_field() {
        // u^r = 1/r has |grad v|^2 = 2/r^4 pointwise
        let g = Grid::new(1.0, 3.0, 1.0, 801, 4).unwrap();
        let ur = ScalarField::from_fn(g, BoundaryKind::None, |r, _| 1.0 / r);
        let uz = ScalarField::zeros(g, BoundaryKind::None);
        let exact = 2.0 * std::f64::consts::PI * 2.0 * (1.0 - 1.0 / 9.0) / 2.0;
        assert!((grad_v_sq(&ur, &uz) - exact).abs() / exact < 1e-4);
    }

    #[test]
    fn identity_holds_for_compact_vorticity() {
        let g = Grid::new(1.0, 5.0, 4.0, 129, 128).unwrap();
        let solver = StreamSolver::new(&g);
        let spec = InitialData {
            kind: InitialKind::NoSwirlBump,
            amplitude: 1.0,
            secondary_amplitude: 0.0,
            support: Support {
                r_center: 2.2,
                r_half_width: 0.7,
                z_center: 2.0,
                z_half_width: 1.0,
            },
            seed: 1,
            modes: 1,
        };
        let s = make_initial_data(g, &spec, &solver).unwrap();
        assert!(identity_5_3_check(&s) < 1e-2, "{}", identity_5_3_check(&s));
    }

    #[test]
    fn csv_round_trips_every_float() {
        let rec = DiagnosticsRecord::from_values(std::array::from_fn(|k| (k as f64 + 0.1).sqrt() * 1e-7));
        let mut buf = Vec::new();
        write_csv(&mut buf, &[rec]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_COLUMNS.join(","));
        let vals: Vec<f64> = lines.next().unwrap().split(',').map(|s| s.parse().unwrap()).collect();
        assert_eq!(vals, rec.values().to_vec());
    }
}
