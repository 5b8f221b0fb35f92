//! Smoothing rates of the linear semigroups `e^{tL}` and the intertwining
//! `r e^{t L0} g = e^{t L1} (r g)`.

use crate::elliptic::{HeatStepper, TimeScheme};
use crate::error::{Error, Result};
use crate::field::{bump, periodic_offset, ScalarField};
use crate::grid::{Exponent, Grid, Operator};

#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit {
    pub op: Operator,
    pub p: Exponent,
    pub k: u32,
    pub family: DecayFamily,
    /// Fitted `alpha` in `||d^k e^{tL} f_t||_inf ~ t^{-alpha}`.
    pub exponent: f64,
    /// Standard error of the fitted slope.
    pub std_err: f64,
    /// `3/(2p) + k/2`.
    pub target: f64,
    /// `1/p + k/2`, the rate of ring-shaped data whose cross-section scales like `sqrt(t)`.
    pub ring_rate: f64,
    pub samples: Vec<(f64, f64)>,
}

/// Where the test profiles sit and which time window is fitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecayFamily {
    /// Centred at mid-annulus; window `[16 h^2, d^2/9]`, `d` the distance to the
    /// nearest wall. While `sqrt(t)` stays below the ring radius the profiles
    /// are thin rings and the fit sees the cross-sectional rate `1/p + k/2`.
    Ring,
    /// Centred on the inner wall at mid-height; window
    /// `[max(16 h^2, (4 r_min)^2), d^2/16]` with `d = min(R - r_min, L_z/2)`.
    /// Once `sqrt(t)` exceeds `r_min` the profiles are balls around the axis.
    Axis,
}

impl std::str::FromStr for DecayFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "ring" => Ok(DecayFamily::Ring),
            "axis" => Ok(DecayFamily::Axis),
            o => Err(Error::InvalidParameter(format!("unknown decay family `{o}`"))),
        }
    }
}

impl DecayFamily {
    pub fn name(self) -> &'static str {
        match self {
            DecayFamily::Ring => "ring",
            DecayFamily::Axis => "axis",
        }
    }

    /// `(r_c, z_c, t0, t1)`.
    pub fn window(self, grid: &Grid) -> (f64, f64, f64, f64) {
        let h = grid.h_r.max(grid.h_z);
        let zc = 0.5 * grid.l_z;
        match self {
            DecayFamily::Ring => {
                let rc = 0.5 * (grid.r_min + grid.r_max);
                let d = (rc - grid.r_min).min(grid.r_max - rc).min(zc);
                (rc, zc, 16.0 * h * h, d * d / 9.0)
            }
            DecayFamily::Axis => {
                let d = (grid.r_max - grid.r_min).min(zc);
                (0.0, zc, (16.0 * h * h).max((4.0 * grid.r_min).powi(2)), d * d / 16.0)
            }
        }
    }
}

/// Profile of width `2.5 sqrt(t)` around `(r_c, z_c)`, normalized to `||f||_p = 1`.
fn scaled_profile(grid: &Grid, op: Operator, t: f64, p: Exponent, rc: f64, zc: f64) -> Result<ScalarField> {
    let w = 2.5 * t.sqrt();
    let f = ScalarField::from_fn(*grid, op.natural_bc(grid.r_min), |r, z| {
        let dz = periodic_offset(z, zc, grid.l_z);
        bump(((r - rc).powi(2) + dz * dz).sqrt() / w)
    });
    let n = f.lp_norm(p)?;
    Ok(f.scaled(1.0 / n))
}

fn sup_of_derivative(f: &ScalarField, k: u32) -> f64 {
    match k {
        0 => f.max_abs(),
        _ => {
            let (fr, fz) = f.grid().grad(f.values());
            fr.iter()
                .zip(&fz)
                .fold(0.0_f64, |m, (a, b)| m.max((a * a + b * b).sqrt()))
        }
    }
}

/// `e^{tB} f` by Crank-Nicolson after four backward-Euler half steps, which
/// damp the stiff wall modes that Crank-Nicolson alone carries undamped at large `dt`.
fn evolve(op: Operator, grid: &Grid, f: &ScalarField, t: f64, steps: usize) -> ScalarField {
    let dt = t / steps as f64;
    let start = HeatStepper::natural(op, grid, 0.5 * dt, TimeScheme::BackwardEuler).advance(f, 4);
    HeatStepper::natural(op, grid, dt, TimeScheme::CrankNicolson).advance(&start, steps - 2)
}

/// Least-squares slope of `y` against `x` and its standard error.
pub fn fit_slope(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let resid: f64 = x.iter().zip(y).map(|(a, b)| (b - my - slope * (a - mx)).powi(2)).sum();
    let se = if n > 2.0 { (resid / (n - 2.0) / sxx).sqrt() } else { 0.0 };
    (slope, se)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayParams {
    pub family: DecayFamily,
    pub n_samples: usize,
    pub steps_per_sample: usize,
}

impl Default for DecayParams {
    fn default() -> Self {
        DecayParams {
            family: DecayFamily::Axis,
            n_samples: 8,
            steps_per_sample: 32,
        }
    }
}

/// Fits the decay exponent of `sup_f ||d^k e^{tL} f||_inf / ||f||_p` over the
/// family's window. At each sample time `f` is the width-`sqrt(t)` profile,
/// the data that realizes the sup up to a constant.
pub fn semigroup_decay_fit(op: Operator, grid: &Grid, p: Exponent, k: u32, params: &DecayParams) -> Result<DecayFit> {
    let DecayParams {
        family,
        n_samples,
        steps_per_sample,
    } = *params;
    if k > 1 {
        return Err(Error::InvalidParameter(format!(
            "derivative order {k} not supported (0 or 1)"
        )));
    }
    if n_samples < 3 || steps_per_sample < 3 {
        return Err(Error::InvalidParameter(
            "need at least 3 samples and 3 steps per sample".into(),
        ));
    }
    let (rc, zc, t0, t1) = family.window(grid);
    if !(t1 > 2.0 * t0) {
        return Err(Error::BadWindow {
            t0,
            t1,
            reason: "domain too small or grid too coarse for the window".into(),
        });
    }
    let mut samples = Vec::with_capacity(n_samples);
    for m in 0..n_samples {
        let t = t0 * (t1 / t0).powf(m as f64 / (n_samples - 1) as f64);
        let f = scaled_profile(grid, op, t, p, rc, zc)?;
        let u = evolve(op, grid, &f, t, steps_per_sample);
        samples.push((t, sup_of_derivative(&u, k)));
    }
    let x: Vec<f64> = samples.iter().map(|s| s.0.ln()).collect();
    let y: Vec<f64> = samples.iter().map(|s| s.1.ln()).collect();
    let (slope, std_err) = fit_slope(&x, &y);
    let inv_p = p.reciprocal();
    Ok(DecayFit {
        op,
        p,
        k,
        family,
        exponent: -slope,
        std_err,
        target: 1.5 * inv_p + 0.5 * k as f64,
        ring_rate: inv_p + 0.5 * k as f64,
        samples,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommutationLevel {
    pub n: usize,
    pub h: f64,
    pub dt: f64,
    pub deviation: f64,
    /// Deviation of the previous level over this one.
    pub ratio: Option<f64>,
}

/// `||r e^{t L0} g - e^{t L1}(r g)||_inf` on `(n+1) x n` grids. The coarsest
/// level takes `dt <= courant * h_r`; finer levels scale `dt` with `h`.
pub fn commutation_check(
    r_min: f64,
    r_max: f64,
    l_z: f64,
    t: f64,
    courant: f64,
    ladder: &[usize],
) -> Result<Vec<CommutationLevel>> {
    if !(t >= 0.0 && t.is_finite() && courant > 0.0) {
        return Err(Error::InvalidParameter("need t >= 0 and courant > 0".into()));
    }
    let Some(&n0) = ladder.first() else {
        return Ok(Vec::new());
    };
    let mut out: Vec<CommutationLevel> = Vec::new();
    let mut base_steps = None;
    for &n in ladder {
        let g = Grid::new(r_min, r_max, l_z, n + 1, n)?;
        let rc = 0.5 * (r_min + r_max);
        let wr = 0.3 * (r_max - r_min);
        let gamma = ScalarField::from_fn(g, Operator::L0.natural_bc(r_min), |r, z| {
            bump((r - rc) / wr) * bump(periodic_offset(z, 0.5 * l_z, l_z) / (0.3 * l_z))
        });
        let base = *base_steps.get_or_insert((t / (courant * g.h_r)).ceil() as usize);
        let steps = ((base * n) as f64 / n0 as f64).round() as usize;
        let dt = if steps > 0 { t / steps as f64 } else { 0.0 };
        let rg = gamma.times_radial(|r| r).with_bc(Operator::L1.natural_bc(r_min));
        let (a, b) = if steps == 0 {
            (rg.clone(), rg)
        } else {
            let a = HeatStepper::natural(Operator::L0, &g, dt, TimeScheme::CrankNicolson)
                .advance(&gamma, steps)
                .times_radial(|r| r);
            (
                a,
                HeatStepper::natural(Operator::L1, &g, dt, TimeScheme::CrankNicolson).advance(&rg, steps),
            )
        };
        let deviation = a.minus(&b).max_abs();
        let ratio = out.last().map(|prev| prev.deviation / deviation);
        out.push(CommutationLevel {
            n,
            h: g.h_r,
            dt,
            deviation,
            ratio,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_exact_power_law() {
        let x: Vec<f64> = (1..6).map(|v| (v as f64).ln()).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 - 0.75 * v).collect();
        let (s, se) = fit_slope(&x, &y);
        assert!((s + 0.75).abs() < 1e-14);
        assert!(se < 1e-12);
    }

    #[test]
    fn windows() {
        let g = Grid::new(1.0, 5.0, 4.0, 65, 64).unwrap();
        let (rc, zc, t0, t1) = DecayFamily::Ring.window(&g);
        assert_eq!((rc, zc), (3.0, 2.0));
        assert!((t0 - 16.0 * (4.0f64 / 64.0).powi(2)).abs() < 1e-14);
        assert!((t1 - 4.0 / 9.0).abs() < 1e-14);
        let g = Grid::new(1.0, 41.0, 80.0, 81, 160).unwrap();
        assert_eq!(DecayFamily::Axis.window(&g), (0.0, 40.0, 16.0, 100.0));
    }

    #[test]
    fn sup_norm_decay_is_flat() {
        let g = Grid::new(1.0, 5.0, 4.0, 65, 64).unwrap();
        let params = DecayParams {
            family: DecayFamily::Ring,
            n_samples: 6,
            steps_per_sample: 16,
        };
        let fit = semigroup_decay_fit(Operator::L1, &g, Exponent::Infinity, 0, &params).unwrap();
        assert!(fit.exponent.abs() < 0.08, "{}", fit.exponent);
        assert_eq!(fit.target, 0.0);
    }

    #[test]
    fn ring_profiles_decay_at_the_cross_sectional_rate() {
        let g = Grid::new(1.0, 5.0, 4.0, 65, 64).unwrap();
        let params = DecayParams {
            family: DecayFamily::Ring,
            n_samples: 6,
            steps_per_sample: 16,
        };
        let fit = semigroup_decay_fit(Operator::L0p, &g, Exponent::Finite(2.0), 0, &params).unwrap();
        assert!((fit.exponent - fit.ring_rate).abs() < 0.05, "{}", fit.exponent);
    }

    #[test]
    fn rejects_coarse_grids_and_bad_orders() {
        let g = Grid::new(1.0, 2.0, 1.0, 9, 8).unwrap();
        let params = DecayParams {
            family: DecayFamily::Ring,
            n_samples: 5,
            steps_per_sample: 4,
        };
        assert!(matches!(
            semigroup_decay_fit(Operator::L0, &g, Exponent::Finite(2.0), 0, &params),
            Err(Error::BadWindow { .. })
        ));
        assert!(matches!(
            semigroup_decay_fit(Operator::L0, &g, Exponent::Finite(2.0), 0, &DecayParams::default()),
            Err(Error::BadWindow { .. })
        ));
        let g = Grid::new(1.0, 5.0, 4.0, 65, 64).unwrap();
        assert!(semigroup_decay_fit(Operator::L0, &g, Exponent::Finite(2.0), 2, &params).is_err());
    }

    #[test]
    fn zero_time_commutes_exactly() {
        let lv = commutation_check(1.0, 3.0, 2.0, 0.0, 0.5, &[8, 16]).unwrap();
        assert!(lv.iter().all(|l| l.deviation == 0.0));
        assert!(commutation_check(1.0, 3.0, 2.0, -1.0, 0.5, &[8]).is_err());
    }

    #[test]
    fn commutation_deviation_shrinks() {
        let lv = commutation_check(1.0, 3.0, 2.0, 0.05, 0.5, &[16, 32]).unwrap();
        assert!(lv[1].ratio.unwrap() > 3.0, "{:?}", lv);
    }
}
