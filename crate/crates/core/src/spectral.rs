//! Axial Fourier transform plus per-mode radial tridiagonal solves.
//!
//! Every implicit system in the solver has the form
//! `(shift I + scale (A_r + lambda_m I)) f_m = rhs_m` where `A_r` is a
//! three-point radial stencil and `lambda_m` is the symbol of the periodic
//! centered second difference in z. Transforming along z decouples the modes.

use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::field::BoundaryKind;
use crate::grid::{radial_stencil, Grid, Operator};

pub(crate) struct ZTransform {
    n_r: usize,
    n_z: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    /// Eigenvalues of the periodic second difference, one per mode.
    pub(crate) symbols: Vec<f64>,
}

impl ZTransform {
    pub(crate) fn new(grid: &Grid) -> Self {
        let mut planner = FftPlanner::new();
        let n_z = grid.n_z;
        let symbols = (0..n_z)
            .map(|m| {
                let s = (std::f64::consts::PI * m as f64 / n_z as f64).sin();
                -4.0 * s * s / (grid.h_z * grid.h_z)
            })
            .collect();
        ZTransform {
            n_r: grid.n_r,
            n_z,
            fwd: planner.plan_fft_forward(n_z),
            inv: planner.plan_fft_inverse(n_z),
            symbols,
        }
    }

    /// Real radial-major values to mode-major spectrum: `out[m * n_r + i]`.
    pub(crate) fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        let (nr, nz) = (self.n_r, self.n_z);
        let mut rows: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        rows.par_chunks_mut(nz).for_each(|row| self.fwd.process(row));
        let mut out = vec![Complex64::new(0.0, 0.0); nr * nz];
        for i in 0..nr {
            for m in 0..nz {
                out[m * nr + i] = rows[i * nz + m];
            }
        }
        out
    }

    /// Inverse of [`forward`](Self::forward), keeping the real part.
    pub(crate) fn inverse(&self, spectrum: &[Complex64]) -> Vec<f64> {
        let (nr, nz) = (self.n_r, self.n_z);
        let mut rows = vec![Complex64::new(0.0, 0.0); nr * nz];
        for m in 0..nz {
            for i in 0..nr {
                rows[i * nz + m] = spectrum[m * nr + i];
            }
        }
        rows.par_chunks_mut(nz).for_each(|row| self.inv.process(row));
        let scale = 1.0 / nz as f64;
        rows.iter().map(|c| c.re * scale).collect()
    }
}

/// Thomas factorization of a real tridiagonal matrix.
#[derive(Debug, Clone)]
pub(crate) struct Tridiag {
    lower: Vec<f64>,
    upper_mod: Vec<f64>,
    pivot_inv: Vec<f64>,
}

impl Tridiag {
    pub(crate) fn factor(lower: &[f64], diag: &[f64], upper: &[f64]) -> Self {
        let n = diag.len();
        let mut upper_mod = vec![0.0; n];
        let mut pivot_inv = vec![0.0; n];
        let mut prev = 0.0;
        for k in 0..n {
            let pivot = diag[k] - if k > 0 { lower[k] * prev } else { 0.0 };
            assert!(
                pivot.abs() > 1e-300 && pivot.is_finite(),
                "singular radial system at row {k}"
            );
            pivot_inv[k] = 1.0 / pivot;
            prev = if k + 1 < n { upper[k] * pivot_inv[k] } else { 0.0 };
            upper_mod[k] = prev;
        }
        Tridiag {
            lower: lower.to_vec(),
            upper_mod,
            pivot_inv,
        }
    }

    pub(crate) fn solve(&self, rhs: &mut [Complex64]) {
        let n = rhs.len();
        debug_assert_eq!(n, self.pivot_inv.len());
        rhs[0] *= self.pivot_inv[0];
        for k in 1..n {
            let prev = rhs[k - 1];
            rhs[k] = (rhs[k] - prev * self.lower[k]) * self.pivot_inv[k];
        }
        for k in (0..n - 1).rev() {
            let next = rhs[k + 1];
            rhs[k] -= next * self.upper_mod[k];
        }
    }
}

/// Radial rows of an operator with its boundary rows folded in.
///
/// Unknowns run over `first..n_r-1`: the `R` row is always Dirichlet, the
/// `r_min` row is an unknown only for Robin conditions (ghost folded in).
#[derive(Debug, Clone)]
pub(crate) struct RadialRows {
    pub first: usize,
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

impl RadialRows {
    pub(crate) fn new(op: Operator, bc: BoundaryKind, grid: &Grid) -> Self {
        let h = grid.h_r;
        let first = match bc {
            BoundaryKind::Robin(_) => 0,
            _ => 1,
        };
        let last = grid.n_r - 2;
        let mut rows = RadialRows {
            first,
            lower: vec![],
            diag: vec![],
            upper: vec![],
        };
        for i in first..=last {
            let (mut lo, mut mid, mut up) = radial_stencil(op, grid.r(i), h);
            if i == 0 {
                if let BoundaryKind::Robin(alpha) = bc {
                    // f_{-1} = f_1 - 2 h alpha f_0
                    mid -= 2.0 * h * alpha * lo;
                    up += lo;
                    lo = 0.0;
                }
            }
            if i == first {
                lo = 0.0;
            }
            if i == last {
                up = 0.0;
            }
            rows.lower.push(lo);
            rows.diag.push(mid);
            rows.upper.push(up);
        }
        rows
    }

    /// Factorizes `shift I + scale (A_r + lambda I)`.
    pub(crate) fn factor_mode(&self, shift: f64, scale: f64, lambda: f64) -> Tridiag {
        let lower: Vec<f64> = self.lower.iter().map(|v| scale * v).collect();
        let upper: Vec<f64> = self.upper.iter().map(|v| scale * v).collect();
        let diag: Vec<f64> = self.diag.iter().map(|v| shift + scale * (v + lambda)).collect();
        Tridiag::factor(&lower, &diag, &upper)
    }
}

/// A family of per-mode factorizations sharing one transform.
pub(crate) struct ModalSystem {
    pub(crate) transform: ZTransform,
    pub(crate) first: usize,
    n_r: usize,
    modes: Vec<Tridiag>,
}

impl ModalSystem {
    pub(crate) fn new(op: Operator, bc: BoundaryKind, grid: &Grid, shift: f64, scale: f64) -> Self {
        let transform = ZTransform::new(grid);
        let rows = RadialRows::new(op, bc, grid);
        let modes = transform
            .symbols
            .iter()
            .map(|&lambda| rows.factor_mode(shift, scale, lambda))
            .collect();
        ModalSystem {
            transform,
            first: rows.first,
            n_r: grid.n_r,
            modes,
        }
    }

    /// Solves for the unknown rows given a right-hand side on every node;
    /// rows outside the unknown range come back as zero.
    pub(crate) fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let nr = self.n_r;
        let first = self.first;
        let mut spec = self.transform.forward(rhs);
        spec.par_chunks_mut(nr)
            .zip(self.modes.par_iter())
            .for_each(|(col, tri)| {
                for v in &mut col[..first] {
                    *v = Complex64::new(0.0, 0.0);
                }
                col[nr - 1] = Complex64::new(0.0, 0.0);
                tri.solve(&mut col[first..nr - 1]);
            });
        self.transform.inverse(&spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thomas_matches_dense_solve() {
        let lower = [0.0, 1.0, -0.5, 0.25];
        let diag = [4.0, 5.0, 3.5, 6.0];
        let upper = [1.5, -1.0, 0.75, 0.0];
        let x = [1.0, -2.0, 0.5, 3.0];
        let mut b: Vec<Complex64> = (0..4)
            .map(|k| {
                let mut s = diag[k] * x[k];
                if k > 0 {
                    s += lower[k] * x[k - 1];
                }
                if k < 3 {
                    s += upper[k] * x[k + 1];
                }
                Complex64::new(s, -s)
            })
            .collect();
        Tridiag::factor(&lower, &diag, &upper).solve(&mut b);
        for k in 0..4 {
            assert!((b[k].re - x[k]).abs() < 1e-14);
            assert!((b[k].im + x[k]).abs() < 1e-14);
        }
    }

    #[test]
    fn transform_round_trip() {
        let g = Grid::new(1.0, 2.0, 1.0, 6, 8).unwrap();
        let zt = ZTransform::new(&g);
        let vals: Vec<f64> = (0..g.len()).map(|n| (n as f64 * 0.37).sin()).collect();
        let back = zt.inverse(&zt.forward(&vals));
        for (a, b) in vals.iter().zip(&back) {
            assert!((a - b).abs() < 1e-14);
        }
    }
}
