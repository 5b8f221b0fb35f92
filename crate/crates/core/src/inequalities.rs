//! Sampled checks of the interpolation inequalities and identities used by the
//! vorticity estimates. Constant-bearing inequalities report their largest
//! sample ratio as the fitted constant.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::diagnostics::{grad_u_pointwise, grad_v_sq};
use crate::elliptic::StreamSolver;
use crate::error::{Error, Result};
use crate::field::{bump, periodic_offset, AxisymState, BoundaryKind, ScalarField};
use crate::grid::{Exponent, Grid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InequalityId {
    E1_7,
    E1_10,
    E5_3,
    E5_4,
    E5_5,
    E5_6,
    E5_7,
    E5_8,
    B1,
    B2,
}

impl InequalityId {
    pub const ALL: [InequalityId; 10] = [
        InequalityId::E1_7,
        InequalityId::E1_10,
        InequalityId::E5_3,
        InequalityId::E5_4,
        InequalityId::E5_5,
        InequalityId::E5_6,
        InequalityId::E5_7,
        InequalityId::E5_8,
        InequalityId::B1,
        InequalityId::B2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            InequalityId::E1_7 => "E1_7",
            InequalityId::E1_10 => "E1_10",
            InequalityId::E5_3 => "E5_3",
            InequalityId::E5_4 => "E5_4",
            InequalityId::E5_5 => "E5_5",
            InequalityId::E5_6 => "E5_6",
            InequalityId::E5_7 => "E5_7",
            InequalityId::E5_8 => "E5_8",
            InequalityId::B1 => "B1",
            InequalityId::B2 => "B2",
        }
    }

    /// How a sample ratio is judged.
    pub fn kind(self) -> CheckKind {
        match self {
            InequalityId::E1_7 | InequalityId::E5_8 => CheckKind::Bound { tol: 1e-8 },
            InequalityId::E5_7 => CheckKind::Identity { tol: 1e-8 },
            InequalityId::E5_3 => CheckKind::Identity { tol: 1e-2 },
            _ => CheckKind::Fitted,
        }
    }
}

impl std::str::FromStr for InequalityId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        InequalityId::ALL
            .into_iter()
            .find(|id| id.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown inequality `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CheckKind {
    /// `lhs <= rhs`; violation when the ratio exceeds `1 + tol`.
    Bound { tol: f64 },
    /// `lhs = rhs`; violation when the ratio leaves `[1 - tol, 1 + tol]`.
    Identity { tol: f64 },
    /// `lhs <= C rhs`; the largest ratio is the fitted `C`.
    Fitted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InequalityReport {
    pub id: InequalityId,
    pub ratios: Vec<f64>,
    /// Fitted constant for constant-bearing inequalities.
    pub max_ratio: f64,
    pub samples: usize,
    /// Violations beyond tolerance; `None` for constant-bearing inequalities.
    pub violations: Option<usize>,
}

impl InequalityReport {
    fn from_ratios(id: InequalityId, ratios: Vec<f64>, extra_violations: usize) -> Self {
        let max_ratio = ratios.iter().copied().fold(0.0, f64::max);
        let violations = match id.kind() {
            CheckKind::Bound { tol } => Some(ratios.iter().filter(|&&q| q > 1.0 + tol).count() + extra_violations),
            CheckKind::Identity { tol } => Some(ratios.iter().filter(|&&q| (q - 1.0).abs() > tol).count()),
            CheckKind::Fitted => None,
        };
        InequalityReport {
            id,
            samples: ratios.len(),
            ratios,
            max_ratio,
            violations,
        }
    }
}

/// Exponents `(p, q)` of the two Sobolev interpolation checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interpolation {
    pub p: f64,
    pub q: f64,
}

impl Interpolation {
    /// `sigma = 3 (1/q - 1/p)`; rejects `sigma >= 1` and `q > p`.
    pub fn sigma(&self) -> Result<f64> {
        let Interpolation { p, q } = *self;
        if !(q >= 1.0 && p >= q) {
            return Err(Error::InvalidParameter(format!(
                "need 1 <= q <= p, got p = {p}, q = {q}"
            )));
        }
        let s = 3.0 * (1.0 / q - 1.0 / p);
        if s >= 1.0 {
            return Err(Error::InvalidParameter(format!(
                "sigma = 3(1/q - 1/p) = {s} must be < 1"
            )));
        }
        Ok(s)
    }
}

impl Default for Interpolation {
    fn default() -> Self {
        Interpolation { p: 4.0, q: 2.0 }
    }
}

/// Random sum of product bumps. Parameters are drawn relative to the domain
/// so that one sample index names the same function on every grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BumpSum {
    /// `(amplitude, r_center, r_half_width, z_center, z_half_width)`.
    pub terms: Vec<(f64, f64, f64, f64, f64)>,
}

impl BumpSum {
    pub fn draw(rng: &mut ChaCha8Rng, grid: &Grid, max_terms: usize) -> Self {
        let span = grid.r_max - grid.r_min;
        let n = rng.gen_range(1..=max_terms.max(1));
        let terms = (0..n)
            .map(|_| {
                let wr = span * rng.gen_range(0.08..0.2);
                let lo = grid.r_min + wr + 0.01 * span;
                let hi = (grid.r_min + 0.6 * span - wr).max(lo + 1e-9);
                let rc = rng.gen_range(lo..hi);
                let wz = grid.l_z * rng.gen_range(0.1..0.25);
                let zc = rng.gen_range(0.0..grid.l_z);
                let a = rng.gen_range(-1.0..1.0);
                (a, rc, wr, zc, wz)
            })
            .collect();
        BumpSum { terms }
    }

    pub fn eval(&self, grid: &Grid, r: f64, z: f64) -> f64 {
        self.terms
            .iter()
            .map(|&(a, rc, wr, zc, wz)| a * bump((r - rc) / wr) * bump(periodic_offset(z, zc, grid.l_z) / wz))
            .sum()
    }

    pub fn field(&self, grid: Grid, bc: BoundaryKind) -> ScalarField {
        ScalarField::from_fn(grid, bc, |r, z| self.eval(&grid, r, z))
    }
}

/// Generator for sample `index` under `seed`. Each index owns its own stream.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Flow sample: `Gamma` and `omega` independent bump sums.
pub fn sample_state(grid: Grid, solver: &StreamSolver, seed: u64, index: u64) -> AxisymState {
    let mut rng = sample_rng(seed, index);
    let g = BumpSum::draw(&mut rng, &grid, 3);
    let w = BumpSum::draw(&mut rng, &grid, 3);
    AxisymState::from_dynamic(
        0.0,
        g.field(grid, BoundaryKind::Robin(2.0 / grid.r_min)),
        w.field(grid, BoundaryKind::Dirichlet0),
        solver,
    )
}

/// Scalar sample. With `trace` a wall layer that does not vanish at `r_min` is added.
pub fn sample_scalar(grid: Grid, seed: u64, index: u64, trace: bool) -> ScalarField {
    let mut rng = sample_rng(seed, index);
    let body = BumpSum::draw(&mut rng, &grid, 3);
    let mut f = body.field(grid, BoundaryKind::None);
    if trace {
        let c = rng.gen_range(0.3..1.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let w = (grid.r_max - grid.r_min) * rng.gen_range(0.1..0.3);
        let a = rng.gen_range(-0.8..0.8);
        let k = std::f64::consts::TAU / grid.l_z;
        let layer = ScalarField::from_fn(grid, BoundaryKind::None, |r, z| {
            c * bump((r - grid.r_min) / w) * (1.0 + a * (k * z).cos())
        });
        f = ScalarField::from_values(
            grid,
            f.values().iter().zip(layer.values()).map(|(x, y)| x + y).collect(),
            BoundaryKind::None,
        )
        .expect("shape");
    }
    f
}

fn norm(grid: &Grid, v: &[f64], p: f64) -> f64 {
    grid.lp_norm(v, Exponent::Finite(p)).expect("p >= 1")
}

fn grad_magnitude(grid: &Grid, f: &[f64]) -> Vec<f64> {
    let (a, b) = grid.grad(f);
    a.iter().zip(&b).map(|(x, y)| (x * x + y * y).sqrt()).collect()
}

fn ratio(lhs: f64, rhs: f64) -> Option<f64> {
    (rhs > 0.0).then(|| lhs / rhs)
}

/// Sample ratio `lhs / rhs` (constant omitted) of a flow inequality, with a
/// flag for a failed intermediate link. `None` when both sides vanish.
pub fn flow_ratio(id: InequalityId, s: &AxisymState) -> Option<(f64, bool)> {
    let g = s.grid();
    let (ur, uth, uz, om) = (s.ur.values(), s.uth.values(), s.uz.values(), s.omega.values());
    let over_r = |v: &[f64]| -> Vec<f64> { (0..g.len()).map(|k| v[k] / g.r(k / g.n_z)).collect() };
    let u2 = (g.l2_sq(ur) + g.l2_sq(uth) + g.l2_sq(uz)).sqrt();
    let gamma_inf = s.gamma.max_abs();
    match id {
        InequalityId::E1_7 => ratio(norm(g, uth, 4.0), gamma_inf.sqrt() * u2.sqrt()).map(|q| (q, false)),
        InequalityId::E5_8 => {
            let uor = over_r(uth);
            let l4 = norm(g, uth, 4.0);
            let first = norm(g, &uor, 4.0);
            let last = gamma_inf.sqrt() * norm(g, &uor, 2.0).sqrt();
            let link_fails = l4 > 0.0 && first > l4 * (1.0 + 1e-8) || l4 > last * (1.0 + 1e-8) && last > 0.0;
            ratio(first, last).map(|q| (q, link_fails))
        }
        InequalityId::E1_10 => {
            let v: Vec<f64> = ur.iter().zip(uz).map(|(a, b)| (a * a + b * b).sqrt()).collect();
            let v2 = norm(g, &v, 2.0);
            ratio(norm(g, &v, 4.0), v2.powf(0.25) * (v2 + s.omega.l2()).powf(0.75)).map(|q| (q, false))
        }
        InequalityId::E5_3 => {
            let w = s.omega.l2();
            ratio(grad_v_sq(&s.ur, &s.uz).sqrt(), w).map(|q| (q, false))
        }
        InequalityId::E5_4 => {
            ratio(norm(g, ur, 4.0), norm(g, ur, 2.0).powf(0.25) * s.omega.l2().powf(0.75)).map(|q| (q, false))
        }
        InequalityId::E5_5 => {
            let z2 = norm(g, uz, 2.0);
            ratio(norm(g, uz, 4.0), z2.powf(0.25) * (z2 + s.omega.l2()).powf(0.75)).map(|q| (q, false))
        }
        InequalityId::E5_6 => {
            let gw = norm(g, &grad_magnitude(g, om), 2.0);
            ratio(norm(g, om, 4.0), s.omega.l2().powf(0.25) * gw.powf(0.75)).map(|q| (q, false))
        }
        InequalityId::E5_7 => {
            let zero = vec![0.0; g.len()];
            let lhs = norm(g, &grad_u_pointwise(&zero, om, &zero, g), 2.0);
            let rhs = (g.l2_sq(&grad_magnitude(g, om)) + g.l2_sq(&over_r(om))).sqrt();
            ratio(lhs, rhs).map(|q| (q, false))
        }
        InequalityId::B1 | InequalityId::B2 => None,
    }
}

/// Sample ratio of the interior interpolation (`with_trace = false`) or of the one with a wall trace term.
pub fn sobolev_ratio(f: &ScalarField, exps: Interpolation, with_trace: bool) -> Result<Option<f64>> {
    let sigma = exps.sigma()?;
    let g = f.grid();
    let fq = norm(g, f.values(), exps.q);
    let gq = norm(g, &grad_magnitude(g, f.values()), exps.q);
    let top = if with_trace { fq + gq } else { gq };
    Ok(ratio(
        norm(g, f.values(), exps.p),
        fq.powf(1.0 - sigma) * top.powf(sigma),
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteParams {
    pub seed: u64,
    /// First sample index; batches use disjoint index ranges.
    pub first: u64,
    pub count: usize,
    pub interpolation: Interpolation,
}

/// Runs every requested inequality over `count` samples on `grid`.
pub fn interpolation_suite(grid: Grid, ids: &[InequalityId], params: &SuiteParams) -> Result<Vec<InequalityReport>> {
    params.interpolation.sigma()?;
    let flows = ids.iter().any(|id| !matches!(id, InequalityId::B1 | InequalityId::B2));
    if flows && grid.r_min < 1.0 {
        return Err(Error::InvalidParameter(format!(
            "flow inequalities need r_min >= 1, got {}",
            grid.r_min
        )));
    }
    let indices: Vec<u64> = (params.first..params.first + params.count as u64).collect();
    let solver = StreamSolver::new(&grid);
    let states: Vec<AxisymState> = if flows {
        indices
            .par_iter()
            .map(|&k| sample_state(grid, &solver, params.seed, k))
            .collect()
    } else {
        Vec::new()
    };
    let mut out = Vec::with_capacity(ids.len());
    for &id in ids {
        let report = match id {
            InequalityId::B1 | InequalityId::B2 => {
                let trace = id == InequalityId::B2;
                let ratios: Result<Vec<Option<f64>>> = indices
                    .par_iter()
                    .map(|&k| sobolev_ratio(&sample_scalar(grid, params.seed, k, trace), params.interpolation, trace))
                    .collect();
                InequalityReport::from_ratios(id, ratios?.into_iter().flatten().collect(), 0)
            }
            _ => {
                let pairs: Vec<(f64, bool)> = states.par_iter().filter_map(|s| flow_ratio(id, s)).collect();
                let broken = pairs.iter().filter(|p| p.1).count();
                InequalityReport::from_ratios(id, pairs.into_iter().map(|p| p.0).collect(), broken)
            }
        };
        out.push(report);
    }
    Ok(out)
}

pub const REPORT_COLUMNS: [&str; 5] = ["id", "samples", "max_ratio", "violations", "kind"];

pub fn write_reports<W: std::io::Write>(out: &mut W, reports: &[InequalityReport]) -> std::io::Result<()> {
    writeln!(out, "{}", REPORT_COLUMNS.join(","))?;
    for r in reports {
        let kind = match r.id.kind() {
            CheckKind::Bound { .. } => "bound",
            CheckKind::Identity { .. } => "identity",
            CheckKind::Fitted => "fitted",
        };
        let v = r.violations.map(|v| v.to_string()).unwrap_or_default();
        writeln!(out, "{},{},{:.16e},{},{}", r.id.name(), r.samples, r.max_ratio, v, kind)?;
    }
    Ok(())
}
