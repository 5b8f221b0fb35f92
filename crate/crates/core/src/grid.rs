//! Annular-cylindrical mesh `[r_min, R] x [0, L_z)` with the measure `2 pi r dr dz`,
//! and the finite-difference cylindrical operators built on it.
//!
//! Nodes are stored radial-major: `values[i * n_z + j]` is the value at
//! `(r_i, z_j)`, so every radial node owns one contiguous periodic z-row.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::field::{BoundaryKind, ScalarField};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub r_min: f64,
    pub r_max: f64,
    pub l_z: f64,
    pub n_r: usize,
    pub n_z: usize,
    pub h_r: f64,
    pub h_z: f64,
}

impl Grid {
    /// `n_r` counts both radial boundary nodes; `n_z` excludes the periodic
    /// duplicate at `z = L_z`.
    pub fn new(r_min: f64, r_max: f64, l_z: f64, n_r: usize, n_z: usize) -> Result<Self> {
        if !(r_min.is_finite() && r_max.is_finite() && l_z.is_finite()) {
            return Err(Error::InvalidGrid("non-finite extent".into()));
        }
        if r_min <= 0.0 {
            return Err(Error::InvalidGrid(format!("r_min must be positive, got {r_min}")));
        }
        if r_max <= r_min {
            return Err(Error::InvalidGrid(format!("R = {r_max} must exceed r_min = {r_min}")));
        }
        if l_z <= 0.0 {
            return Err(Error::InvalidGrid(format!("L_z must be positive, got {l_z}")));
        }
        if n_r < 4 || n_z < 4 {
            return Err(Error::InvalidGrid(format!("need n_r, n_z >= 4, got {n_r} x {n_z}")));
        }
        Ok(Grid {
            r_min,
            r_max,
            l_z,
            n_r,
            n_z,
            h_r: (r_max - r_min) / (n_r - 1) as f64,
            h_z: l_z / n_z as f64,
        })
    }

    #[inline]
    pub fn r(&self, i: usize) -> f64 {
        self.r_min + i as f64 * self.h_r
    }

    #[inline]
    pub fn z(&self, j: usize) -> f64 {
        j as f64 * self.h_z
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.n_z + j
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n_r * self.n_z
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn radii(&self) -> Vec<f64> {
        (0..self.n_r).map(|i| self.r(i)).collect()
    }

    /// Quadrature weight of node `(i, *)`: trapezoid in r, rectangle in z,
    /// including the Jacobian `2 pi r`.
    #[inline]
    pub fn weight(&self, i: usize) -> f64 {
        let trap = if i == 0 || i == self.n_r - 1 { 0.5 } else { 1.0 };
        2.0 * PI * self.r(i) * trap * self.h_r * self.h_z
    }

    /// Same grid with a different inner radius, keeping the node counts.
    pub fn with_r_min(&self, r_min: f64) -> Result<Self> {
        Grid::new(r_min, self.r_max, self.l_z, self.n_r, self.n_z)
    }

    fn check_len(&self, values: &[f64]) {
        assert_eq!(values.len(), self.len(), "field length does not match grid");
    }

    /// `int f 2 pi r dr dz` over the node values.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.check_len(values);
        let mut total = 0.0;
        for i in 0..self.n_r {
            let row: f64 = values[i * self.n_z..(i + 1) * self.n_z].iter().sum();
            total += self.weight(i) * row;
        }
        total
    }

    pub fn lp_norm(&self, values: &[f64], p: Exponent) -> Result<f64> {
        self.check_len(values);
        match p {
            Exponent::Infinity => Ok(values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))),
            Exponent::Finite(p) => {
                if !(p >= 1.0) || !p.is_finite() {
                    return Err(Error::InvalidParameter(format!("L^p exponent must be >= 1, got {p}")));
                }
                let mut total = 0.0;
                for i in 0..self.n_r {
                    let row: f64 = values[i * self.n_z..(i + 1) * self.n_z]
                        .iter()
                        .map(|v| v.abs().powf(p))
                        .sum();
                    total += self.weight(i) * row;
                }
                Ok(total.powf(1.0 / p))
            }
        }
    }

    /// Squared L2 norm, the workhorse of every budget.
    pub fn l2_sq(&self, values: &[f64]) -> f64 {
        self.check_len(values);
        let mut total = 0.0;
        for i in 0..self.n_r {
            let row: f64 = values[i * self.n_z..(i + 1) * self.n_z].iter().map(|v| v * v).sum();
            total += self.weight(i) * row;
        }
        total
    }

    /// `(1/r_min) * surface integral over r = r_min of f^2`, with `dH = r_min dtheta dz`.
    pub fn inner_boundary_flux(&self, values: &[f64]) -> f64 {
        self.check_len(values);
        let row: f64 = values[..self.n_z].iter().map(|v| v * v).sum();
        2.0 * PI * row * self.h_z
    }

    /// Radial derivative: centered inside, one-sided second order at both ends.
    pub fn d_r(&self, values: &[f64]) -> Vec<f64> {
        self.check_len(values);
        let (nr, nz, h) = (self.n_r, self.n_z, self.h_r);
        let mut out = vec![0.0; values.len()];
        for j in 0..nz {
            let at = |i: usize| values[i * nz + j];
            out[j] = (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h);
            for i in 1..nr - 1 {
                out[i * nz + j] = (at(i + 1) - at(i - 1)) / (2.0 * h);
            }
            let l = nr - 1;
            out[l * nz + j] = (3.0 * at(l) - 4.0 * at(l - 1) + at(l - 2)) / (2.0 * h);
        }
        out
    }

    /// Axial derivative, centered and periodic.
    pub fn d_z(&self, values: &[f64]) -> Vec<f64> {
        self.check_len(values);
        let nz = self.n_z;
        let mut out = vec![0.0; values.len()];
        for i in 0..self.n_r {
            let row = &values[i * nz..(i + 1) * nz];
            for j in 0..nz {
                let up = row[(j + 1) % nz];
                let down = row[(j + nz - 1) % nz];
                out[i * nz + j] = (up - down) / (2.0 * self.h_z);
            }
        }
        out
    }

    /// Periodic centered second derivative in z.
    pub fn d_zz(&self, values: &[f64]) -> Vec<f64> {
        self.check_len(values);
        let nz = self.n_z;
        let inv = 1.0 / (self.h_z * self.h_z);
        let mut out = vec![0.0; values.len()];
        for i in 0..self.n_r {
            let row = &values[i * nz..(i + 1) * nz];
            for j in 0..nz {
                out[i * nz + j] = (row[(j + 1) % nz] - 2.0 * row[j] + row[(j + nz - 1) % nz]) * inv;
            }
        }
        out
    }

    /// `(d_r f, d_z f)`.
    pub fn grad(&self, values: &[f64]) -> (Vec<f64>, Vec<f64>) {
        (self.d_r(values), self.d_z(values))
    }

    /// `int |grad f|^2` from face differences: radial faces at `r_{i+1/2}`
    /// with the midpoint rule, axial faces on the node weights. This is the
    /// energy that the three-point diffusion stencils dissipate.
    pub fn grad_energy(&self, values: &[f64]) -> f64 {
        self.check_len(values);
        let (nr, nz) = (self.n_r, self.n_z);
        let mut total = 0.0;
        for i in 0..nr - 1 {
            let rf = self.r_min + (i as f64 + 0.5) * self.h_r;
            let row: f64 = (0..nz)
                .map(|j| {
                    let d = values[(i + 1) * nz + j] - values[i * nz + j];
                    d * d
                })
                .sum();
            total += 2.0 * PI * rf * self.h_z / self.h_r * row;
        }
        for i in 0..nr {
            let row = &values[i * nz..(i + 1) * nz];
            let sum: f64 = (0..nz).map(|j| (row[(j + 1) % nz] - row[j]).powi(2)).sum();
            total += self.weight(i) * sum / (self.h_z * self.h_z);
        }
        total
    }

    /// `int |grad f|^2` with the solver's centered gradient.
    pub fn grad_l2_sq(&self, values: &[f64]) -> f64 {
        let (fr, fz) = self.grad(values);
        self.l2_sq(&fr) + self.l2_sq(&fz)
    }
}

/// Exponent of an L^p norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    /// `1/p`, zero for `p = inf`.
    pub fn reciprocal(self) -> f64 {
        match self {
            Exponent::Finite(p) => 1.0 / p,
            Exponent::Infinity => 0.0,
        }
    }
}

impl std::fmt::Display for Exponent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Infinity => write!(f, "inf"),
        }
    }
}

impl std::str::FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("inf") || s.eq_ignore_ascii_case("infinity") {
            return Ok(Exponent::Infinity);
        }
        s.parse::<f64>()
            .map(Exponent::Finite)
            .map_err(|_| Error::InvalidParameter(format!("bad exponent `{s}`")))
    }
}

/// The scalar elliptic operators of the axisymmetric problem.
///
/// * `L0  = Delta - 1/r^2` (swirl velocity, Robin `d_r f = f / r_min`)
/// * `L1  = Delta - (2/r) d_r` (swirl momentum `Gamma = r u^theta`, Robin `d_r f = 2 f / r_min`)
/// * `L0p = Delta - 1/r^2` with homogeneous Dirichlet data (azimuthal vorticity)
///
/// with `Delta = d_rr + (1/r) d_r + d_zz`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Operator {
    L0,
    L1,
    L0p,
}

impl Operator {
    /// The boundary condition each operator carries at `r = r_min`.
    pub fn natural_bc(self, r_min: f64) -> BoundaryKind {
        match self {
            Operator::L0 => BoundaryKind::Robin(1.0 / r_min),
            Operator::L1 => BoundaryKind::Robin(2.0 / r_min),
            Operator::L0p => BoundaryKind::Dirichlet0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Operator::L0 => "L0",
            Operator::L1 => "L1",
            Operator::L0p => "L0p",
        }
    }
}

impl std::str::FromStr for Operator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "L0" | "l0" => Ok(Operator::L0),
            "L1" | "l1" => Ok(Operator::L1),
            "L0p" | "l0p" | "L0'" => Ok(Operator::L0p),
            other => Err(Error::InvalidParameter(format!("unknown operator `{other}`"))),
        }
    }
}

/// Three-point radial stencil `(lower, centre, upper)` of the r-part of an
/// operator at radius `r`. Centered differences: `f_rr +- f_r / r` plus any
/// zeroth-order term.
pub(crate) fn radial_stencil(op: Operator, r: f64, h: f64) -> (f64, f64, f64) {
    let d2 = 1.0 / (h * h);
    let d1 = 1.0 / (2.0 * h * r);
    match op {
        // d_rr + (1/r) d_r - 1/r^2
        Operator::L0 | Operator::L0p => (d2 - d1, -2.0 * d2 - 1.0 / (r * r), d2 + d1),
        // d_rr - (1/r) d_r
        Operator::L1 => (d2 + d1, -2.0 * d2, d2 - d1),
    }
}

/// Ghost value below `r_min` for a Robin row: `(f_1 - f_{-1}) / 2h = alpha f_0`.
#[inline]
pub(crate) fn robin_ghost(f0: f64, f1: f64, alpha: f64, h: f64) -> f64 {
    f1 - 2.0 * h * alpha * f0
}

/// Applies `op` to `f`. Rows with a Dirichlet value (r = R always, r = r_min
/// unless `f` is Robin) are returned as zero.
pub fn apply_operator(op: Operator, f: &ScalarField) -> ScalarField {
    let g = f.grid();
    let (nr, nz, h) = (g.n_r, g.n_z, g.h_r);
    let v = f.values();
    let zz = g.d_zz(v);
    let mut out = vec![0.0; v.len()];
    for i in 0..nr - 1 {
        let (lo, mid, up) = radial_stencil(op, g.r(i), h);
        for j in 0..nz {
            let c = v[i * nz + j];
            let above = v[(i + 1) * nz + j];
            let below = if i == 0 {
                match f.bc() {
                    BoundaryKind::Robin(alpha) => robin_ghost(c, above, alpha, h),
                    _ => continue,
                }
            } else {
                v[(i - 1) * nz + j]
            };
            out[i * nz + j] = lo * below + mid * c + up * above + zz[i * nz + j];
        }
    }
    ScalarField::from_values(*g, out, f.bc()).expect("same shape")
}

pub fn apply_l0(f: &ScalarField) -> ScalarField {
    apply_operator(Operator::L0, f)
}

pub fn apply_l1(f: &ScalarField) -> ScalarField {
    apply_operator(Operator::L1, f)
}

pub fn apply_l0p(f: &ScalarField) -> ScalarField {
    apply_operator(Operator::L0p, f)
}
