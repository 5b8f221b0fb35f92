//! Manufactured solution of the coupled system and the refinement study built on it.
//!
//! ```text
//! psi*   = A(t) p(r) sin kz,            p = (r - a)^3 (b - r)^3
//! omega* = A(t) q(r) sin kz,            q = -(p'' - p'/r - k^2 p) / r
//! Gamma* = B(t) g(r) (c0 + cos kz),     g = (b - r)^2 (1 + c (r - a)),  c = 2/a + 2/(b - a)
//! ```
//!
//! `omega*` vanishes at both walls, `L1 psi* = -r omega*` holds exactly and
//! `Gamma*` satisfies `d_r Gamma = (2/a) Gamma` at `r = a`, so the discrete
//! solver sees the same boundary value problem as the exact solution.

use std::sync::Arc;

use crate::config::{Scheme, SolverConfig};
use crate::elliptic::StreamSolver;
use crate::error::{Error, Result};
use crate::evolution::{Forcing, Stepper};
use crate::field::{AxisymState, BoundaryKind, ScalarField};
use crate::grid::Grid;

/// Finite sum `sum_n c_n r^n` over integer powers, negative ones included.
#[derive(Debug, Clone, PartialEq)]
pub struct Laurent {
    low: i32,
    coeffs: Vec<f64>,
}

impl Laurent {
    pub fn monomial(c: f64, n: i32) -> Self {
        Laurent {
            low: n,
            coeffs: vec![c],
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::monomial(c, 0)
    }

    /// `r - x0`.
    pub fn linear(x0: f64) -> Self {
        Laurent {
            low: 0,
            coeffs: vec![-x0, 1.0],
        }
    }

    fn high(&self) -> i32 {
        self.low + self.coeffs.len() as i32 - 1
    }

    pub fn coeff(&self, n: i32) -> f64 {
        if n < self.low || n > self.high() {
            0.0
        } else {
            self.coeffs[(n - self.low) as usize]
        }
    }

    pub fn add(&self, o: &Laurent) -> Laurent {
        let low = self.low.min(o.low);
        let high = self.high().max(o.high());
        Laurent {
            low,
            coeffs: (low..=high).map(|n| self.coeff(n) + o.coeff(n)).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Laurent {
        Laurent {
            low: self.low,
            coeffs: self.coeffs.iter().map(|c| s * c).collect(),
        }
    }

    pub fn sub(&self, o: &Laurent) -> Laurent {
        self.add(&o.scale(-1.0))
    }

    pub fn mul(&self, o: &Laurent) -> Laurent {
        let mut coeffs = vec![0.0; self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Laurent {
            low: self.low + o.low,
            coeffs,
        }
    }

    pub fn pow(&self, n: u32) -> Laurent {
        (0..n).fold(Laurent::constant(1.0), |acc, _| acc.mul(self))
    }

    /// Multiplication by `r^n`.
    pub fn shift(&self, n: i32) -> Laurent {
        Laurent {
            low: self.low + n,
            coeffs: self.coeffs.clone(),
        }
    }

    pub fn deriv(&self) -> Laurent {
        let low = self.low - 1;
        let coeffs = (0..self.coeffs.len())
            .map(|k| (self.low + k as i32) as f64 * self.coeffs[k])
            .collect();
        Laurent { low, coeffs }
    }

    pub fn eval(&self, r: f64) -> f64 {
        let mut acc = 0.0;
        for c in self.coeffs.iter().rev() {
            acc = acc * r + c;
        }
        acc * r.powi(self.low)
    }
}

/// Radial profiles and their derivatives, evaluated once per radius.
#[derive(Debug, Clone)]
struct Profiles {
    p: [Laurent; 2],
    q: [Laurent; 3],
    g: [Laurent; 3],
}

#[derive(Debug, Clone)]
pub struct Manufactured {
    pub a: f64,
    pub b: f64,
    /// Axial wavenumber `2 pi m / L_z`.
    pub k: f64,
    pub amp_psi: f64,
    pub amp_gamma: f64,
    pub c0: f64,
    prof: Profiles,
}

impl Manufactured {
    pub fn new(grid: &Grid, axial_mode: u32, amp_psi: f64, amp_gamma: f64) -> Self {
        let (a, b) = (grid.r_min, grid.r_max);
        let k = std::f64::consts::TAU * axial_mode as f64 / grid.l_z;
        let p = Laurent::linear(a).pow(3).mul(&Laurent::linear(b).scale(-1.0).pow(3));
        let p1 = p.deriv();
        let p2 = p1.deriv();
        let q = p2.sub(&p1.shift(-1)).sub(&p.scale(k * k)).shift(-1).scale(-1.0);
        let c = 2.0 / a + 2.0 / (b - a);
        let g = Laurent::linear(b)
            .pow(2)
            .mul(&Laurent::linear(a).scale(c).add(&Laurent::constant(1.0)));
        let prof = Profiles {
            p: [p, p1],
            q: [q.clone(), q.deriv(), q.deriv().deriv()],
            g: [g.clone(), g.deriv(), g.deriv().deriv()],
        };
        Manufactured {
            a,
            b,
            k,
            amp_psi,
            amp_gamma,
            c0: 1.5,
            prof,
        }
    }

    /// `(A, A')`.
    fn a_t(&self, t: f64) -> (f64, f64) {
        let e = (-0.5 * t).exp();
        (self.amp_psi * e, -0.5 * self.amp_psi * e)
    }

    /// `(B, B')`.
    fn b_t(&self, t: f64) -> (f64, f64) {
        (self.amp_gamma * (1.0 + 0.5 * t.sin()), self.amp_gamma * 0.5 * t.cos())
    }

    pub fn gamma(&self, r: f64, z: f64, t: f64) -> f64 {
        self.b_t(t).0 * self.prof.g[0].eval(r) * (self.c0 + (self.k * z).cos())
    }

    pub fn omega(&self, r: f64, z: f64, t: f64) -> f64 {
        self.a_t(t).0 * self.prof.q[0].eval(r) * (self.k * z).sin()
    }

    pub fn psi(&self, r: f64, z: f64, t: f64) -> f64 {
        self.a_t(t).0 * self.prof.p[0].eval(r) * (self.k * z).sin()
    }

    /// `(u^r, u^z)` of the exact stream function.
    pub fn velocity(&self, r: f64, z: f64, t: f64) -> (f64, f64) {
        let a = self.a_t(t).0;
        let (s, c) = (self.k * z).sin_cos();
        (
            -a * self.k * self.prof.p[0].eval(r) * c / r,
            a * self.prof.p[1].eval(r) * s / r,
        )
    }

    /// `(S_Gamma, S_omega)` at one point.
    pub fn source_at(&self, r: f64, z: f64, t: f64) -> (f64, f64) {
        let (a, da) = self.a_t(t);
        let (b, db) = self.b_t(t);
        let k = self.k;
        let (s, c) = (k * z).sin_cos();
        let (ur, uz) = self.velocity(r, z, t);
        let [g, g1, g2] = [0, 1, 2].map(|n| self.prof.g[n].eval(r));
        let [q, q1, q2] = [0, 1, 2].map(|n| self.prof.q[n].eval(r));
        let h = self.c0 + c;
        let (hz, hzz) = (-k * s, -k * k * c);

        let gam = b * g * h;
        let l1_gamma = b * ((g2 - g1 / r) * h + g * hzz);
        let s_gamma = db * g * h + ur * b * g1 * h + uz * b * g * hz - l1_gamma;

        let om = a * q * s;
        let l0_omega = a * (q2 + q1 / r - q / (r * r) - k * k * q) * s;
        let stretch = 2.0 * gam * b * g * hz / (r * r * r);
        let s_omega = da * q * s + ur * a * q1 * s + uz * a * q * k * c - ur / r * om - l0_omega - stretch;
        (s_gamma, s_omega)
    }

    pub fn exact_state(&self, grid: Grid, t: f64, solver: &StreamSolver) -> AxisymState {
        let gamma = ScalarField::from_fn(grid, BoundaryKind::Robin(2.0 / grid.r_min), |r, z| self.gamma(r, z, t));
        let omega = ScalarField::from_fn(grid, BoundaryKind::Dirichlet0, |r, z| self.omega(r, z, t));
        let mut s = AxisymState::from_dynamic(t, gamma, omega, solver);
        s.t = t;
        s
    }
}

impl Forcing for Manufactured {
    fn sources(&self, grid: &Grid, t: f64) -> (Vec<f64>, Vec<f64>) {
        let mut sg = Vec::with_capacity(grid.len());
        let mut sw = Vec::with_capacity(grid.len());
        for i in 0..grid.n_r {
            let r = grid.r(i);
            for j in 0..grid.n_z {
                let (a, b) = self.source_at(r, grid.z(j), t);
                sg.push(a);
                sw.push(b);
            }
        }
        (sg, sw)
    }
}

/// Errors of one level of the ladder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MmsLevel {
    pub n: usize,
    pub h: f64,
    pub dt: f64,
    pub err_gamma: f64,
    pub err_omega: f64,
    /// `||e_Gamma||_2 + ||e_omega||_2`, relative to the exact solution's norm.
    pub err: f64,
    /// Observed order against the previous level; `None` on the first.
    pub order: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MmsSetup {
    pub r_min: f64,
    pub r_max: f64,
    pub l_z: f64,
    pub axial_mode: u32,
    pub amp_psi: f64,
    pub amp_gamma: f64,
    pub t_end: f64,
    /// `dt = courant * h_r`.
    pub courant: f64,
    pub scheme: Scheme,
}

impl Default for MmsSetup {
    fn default() -> Self {
        MmsSetup {
            r_min: 1.0,
            r_max: 3.0,
            l_z: 2.0,
            axial_mode: 1,
            amp_psi: 0.3,
            amp_gamma: 1.0,
            t_end: 0.5,
            courant: 0.4,
            scheme: Scheme::DEFAULT,
        }
    }
}

/// Error of the forced run at `t_end` on an `(n+1) x n` grid.
pub fn mms_level(setup: &MmsSetup, n: usize) -> Result<MmsLevel> {
    let grid = Grid::new(setup.r_min, setup.r_max, setup.l_z, n + 1, n)?;
    let ms = Arc::new(Manufactured::new(
        &grid,
        setup.axial_mode,
        setup.amp_psi,
        setup.amp_gamma,
    ));
    let solver = Arc::new(StreamSolver::new(&grid));
    let mut stepper = Stepper::new(
        grid,
        setup.scheme,
        Arc::clone(&solver),
        Some(ms.clone() as Arc<dyn Forcing>),
    );
    let mut state = ms.exact_state(grid, 0.0, &solver);
    let steps = if setup.t_end > 0.0 {
        (setup.t_end / (setup.courant * grid.h_r)).ceil() as usize
    } else {
        0
    };
    let dt = if steps > 0 { setup.t_end / steps as f64 } else { 0.0 };
    for _ in 0..steps {
        state = stepper.step(&state, dt)?;
    }
    let exact = ms.exact_state(grid, setup.t_end, &solver);
    let eg = state.gamma.minus(&exact.gamma).l2();
    let ew = state.omega.minus(&exact.omega).l2();
    let scale = exact.gamma.l2() + exact.omega.l2();
    Ok(MmsLevel {
        n,
        h: grid.h_r,
        dt,
        err_gamma: eg,
        err_omega: ew,
        err: (eg + ew) / scale,
        order: None,
    })
}

/// Runs the ladder and fills in observed orders from the actual spacing ratios.
pub fn mms_convergence(setup: &MmsSetup, ladder: &[usize]) -> Result<Vec<MmsLevel>> {
    if ladder.is_empty() {
        return Err(Error::InvalidParameter("empty refinement ladder".into()));
    }
    let mut out: Vec<MmsLevel> = Vec::with_capacity(ladder.len());
    for &n in ladder {
        let mut lvl = mms_level(setup, n)?;
        if let Some(prev) = out.last() {
            lvl.order = Some((prev.err / lvl.err).ln() / (prev.h / lvl.h).ln());
        }
        out.push(lvl);
    }
    Ok(out)
}

/// Config-driven front end: uses the grid extents and scheme of `config`.
pub fn setup_from_config(config: &SolverConfig) -> MmsSetup {
    MmsSetup {
        r_min: config.grid.r_min,
        r_max: config.grid.r_max,
        l_z: config.grid.l_z,
        t_end: config.t_end,
        scheme: config.scheme,
        ..MmsSetup::default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn central(f: impl Fn(f64) -> f64, x: f64) -> (f64, f64) {
        let h = 1e-4;
        (
            (f(x + h) - f(x - h)) / (2.0 * h),
            (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h),
        )
    }

    #[test]
    fn laurent_algebra() {
        let p = Laurent::linear(1.0).mul(&Laurent::monomial(2.0, -1));
        // 2 (r - 1) / r = 2 - 2/r
        assert!((p.eval(2.0) - 1.0).abs() < 1e-15);
        assert!((p.deriv().eval(2.0) - 0.5).abs() < 1e-15);
        assert_eq!(Laurent::linear(0.0).pow(3).coeff(3), 1.0);
    }

    #[test]
    fn profiles_meet_boundary_conditions() {
        let g = Grid::new(1.0, 3.0, 2.0, 5, 4).unwrap();
        let m = Manufactured::new(&g, 1, 1.0, 1.0);
        for z in [0.1, 0.7] {
            assert!(m.omega(1.0, z, 0.3).abs() < 1e-10);
            assert!(m.omega(3.0, z, 0.3).abs() < 1e-10);
            assert!(m.psi(3.0, z, 0.3).abs() < 1e-10);
            assert!(m.gamma(3.0, z, 0.3).abs() < 1e-10);
            let (d, _) = central(|r| m.gamma(r, z, 0.3), 1.0);
            assert!((d - 2.0 * m.gamma(1.0, z, 0.3)).abs() < 1e-6);
        }
    }

    #[test]
    fn stream_relation_holds_exactly() {
        // L1 psi = -r omega, checked by finite differences of the closed forms
        let g = Grid::new(1.0, 3.0, 2.0, 5, 4).unwrap();
        let m = Manufactured::new(&g, 1, 0.7, 1.0);
        for (r, z) in [(1.4, 0.3), (2.2, 1.1)] {
            let (pr, prr) = central(|x| m.psi(x, z, 0.0), r);
            let (_, pzz) = central(|y| m.psi(r, y, 0.0), z);
            let l1 = prr - pr / r + pzz;
            assert!((l1 + r * m.omega(r, z, 0.0)).abs() < 1e-5);
        }
    }

    #[test]
    fn sources_match_finite_difference_oracle() {
        // independent oracle: every derivative by nested central differences
        let g = Grid::new(1.0, 3.0, 2.0, 5, 4).unwrap();
        let m = Manufactured::new(&g, 1, 0.8, 1.3);
        let (r, z, t) = (1.7, 0.45, 0.4);
        let (ur, uz) = m.velocity(r, z, t);
        let dt = central(|s| m.gamma(r, z, s), t).0;
        let (gr, grr) = central(|x| m.gamma(x, z, t), r);
        let (gz, gzz) = central(|y| m.gamma(r, y, t), z);
        let sg = dt + ur * gr + uz * gz - (grr - gr / r + gzz);
        let wt = central(|s| m.omega(r, z, s), t).0;
        let (wr, wrr) = central(|x| m.omega(x, z, t), r);
        let (wz, wzz) = central(|y| m.omega(r, y, t), z);
        let w = m.omega(r, z, t);
        let sq_z = central(|y| m.gamma(r, y, t).powi(2), z).0;
        let sw = wt + ur * wr + uz * wz - ur / r * w - (wrr + wr / r - w / (r * r) + wzz) - sq_z / r.powi(3);
        let (a, b) = m.source_at(r, z, t);
        assert!((a - sg).abs() < 1e-5 * sg.abs().max(1.0), "{a} vs {sg}");
        assert!((b - sw).abs() < 1e-5 * sw.abs().max(1.0), "{b} vs {sw}");
    }

    #[test]
    fn exact_initial_state_has_zero_error() {
        let setup = MmsSetup {
            t_end: 0.0,
            ..MmsSetup::default()
        };
        let lvl = mms_level(&setup, 16).unwrap();
        assert_eq!(lvl.err, 0.0);
    }

    #[test]
    fn single_level_has_no_order() {
        let setup = MmsSetup {
            t_end: 0.05,
            ..MmsSetup::default()
        };
        let out = mms_convergence(&setup, &[16]).unwrap();
        assert!(out[0].order.is_none());
    }

    #[test]
    fn coarse_ladder_is_second_order() {
        let setup = MmsSetup {
            t_end: 0.25,
            ..MmsSetup::default()
        };
        let out = mms_convergence(&setup, &[16, 32]).unwrap();
        let p = out[1].order.unwrap();
        assert!((1.7..2.3).contains(&p), "order {p}");
    }
}
