//! Discrete fields in physical space `(r_i, z_j)` and in mode space `(r_i, xi_m)`.
//!
//! Physical arrays are `n_r x n_z` matrices (row = radius, column = axial sample).
//! Mode arrays have the same shape with columns in the FFT order of
//! [`ModeSet`](crate::grid::ModeSet).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{shape_err, Result};
use crate::grid::{ModeSet, RadialGrid};

pub type Modes = DMatrix<Complex64>;

/// Iteration unknown: stream-function modes and swirl modes.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamState {
    pub psi_modes: Modes,
    pub swirl_modes: Modes,
}

impl StreamState {
    pub fn zeros(n_r: usize, n_z: usize) -> Self {
        Self {
            psi_modes: Modes::zeros(n_r, n_z),
            swirl_modes: Modes::zeros(n_r, n_z),
        }
    }

    pub fn n_r(&self) -> usize {
        self.psi_modes.nrows()
    }

    pub fn n_z(&self) -> usize {
        self.psi_modes.ncols()
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            psi_modes: &self.psi_modes * Complex64::from(a),
            swirl_modes: &self.swirl_modes * Complex64::from(a),
        }
    }

    /// `self + a * other`
    pub fn axpy(&self, a: f64, other: &Self) -> Self {
        let a = Complex64::from(a);
        Self {
            psi_modes: &self.psi_modes + &other.psi_modes * a,
            swirl_modes: &self.swirl_modes + &other.swirl_modes * a,
        }
    }

    /// Combined weighted L^2 norm of `psi` and `v_theta` over the periodic cell.
    pub fn l2r(&self, grid: &RadialGrid, modes: &ModeSet) -> f64 {
        (modes_l2r_sq(&self.psi_modes, grid, modes) + modes_l2r_sq(&self.swirl_modes, grid, modes))
            .sqrt()
    }

    /// Largest violation of `c(-xi) = conj(c(xi))` over both arrays.
    pub fn reality_defect(&self, modes: &ModeSet) -> f64 {
        reality_defect(&self.psi_modes, modes).max(reality_defect(&self.swirl_modes, modes))
    }
}

pub(crate) fn reality_defect(a: &Modes, modes: &ModeSet) -> f64 {
    let mut worst: f64 = 0.0;
    for m in 0..a.ncols() {
        let mm = modes.mirror(m);
        for i in 0..a.nrows() {
            worst = worst.max((a[(i, m)] - a[(i, mm)].conj()).norm());
        }
    }
    worst
}

/// `int int |g|^2 r dr dz` for a field given by its modes (Parseval).
pub fn modes_l2r_sq(a: &Modes, grid: &RadialGrid, modes: &ModeSet) -> f64 {
    let period = 2.0 * modes.half_period;
    let mut acc = 0.0;
    for m in 0..a.ncols() {
        for i in 0..a.nrows() {
            acc += grid.quad_weights[i] * a[(i, m)].norm_sqr();
        }
    }
    period * acc
}

/// Perturbation velocity `(v^r, v^theta, v^z)` on the `(r, z)` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityField {
    pub vr: DMatrix<f64>,
    pub vtheta: DMatrix<f64>,
    pub vz: DMatrix<f64>,
}

impl VelocityField {
    pub fn zeros(n_r: usize, n_z: usize) -> Self {
        Self {
            vr: DMatrix::zeros(n_r, n_z),
            vtheta: DMatrix::zeros(n_r, n_z),
            vz: DMatrix::zeros(n_r, n_z),
        }
    }

    pub fn components(&self) -> [&DMatrix<f64>; 3] {
        [&self.vr, &self.vtheta, &self.vz]
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            vr: &self.vr - &other.vr,
            vtheta: &self.vtheta - &other.vtheta,
            vz: &self.vz - &other.vz,
        }
    }

    /// Only the meridional part `(v^r, 0, v^z)`.
    pub fn meridional(&self) -> Self {
        Self {
            vr: self.vr.clone(),
            vtheta: DMatrix::zeros(self.vr.nrows(), self.vr.ncols()),
            vz: self.vz.clone(),
        }
    }

    pub fn radial_only(&self) -> Self {
        let z = DMatrix::zeros(self.vr.nrows(), self.vr.ncols());
        Self {
            vr: self.vr.clone(),
            vtheta: z.clone(),
            vz: z,
        }
    }

    pub fn swirl_only(&self) -> Self {
        let z = DMatrix::zeros(self.vr.nrows(), self.vr.ncols());
        Self {
            vr: z.clone(),
            vtheta: self.vtheta.clone(),
            vz: z,
        }
    }
}

/// External force `(F^r, F^theta, F^z)` on the `(r, z)` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ForcingField {
    pub fr: DMatrix<f64>,
    pub ftheta: DMatrix<f64>,
    pub fz: DMatrix<f64>,
}

impl ForcingField {
    pub fn zeros(n_r: usize, n_z: usize) -> Self {
        Self {
            fr: DMatrix::zeros(n_r, n_z),
            ftheta: DMatrix::zeros(n_r, n_z),
            fz: DMatrix::zeros(n_r, n_z),
        }
    }

    /// Sample `f(r, z) -> (F^r, F^theta, F^z)` on the grid.
    pub fn from_fn(
        grid: &RadialGrid,
        modes: &ModeSet,
        f: impl Fn(f64, f64) -> (f64, f64, f64),
    ) -> Self {
        let z = modes.z_nodes();
        let mut out = Self::zeros(grid.len(), modes.len());
        for (i, &r) in grid.nodes.iter().enumerate() {
            for (j, &zj) in z.iter().enumerate() {
                let (a, b, c) = f(r, zj);
                out.fr[(i, j)] = a;
                out.ftheta[(i, j)] = b;
                out.fz[(i, j)] = c;
            }
        }
        out
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            fr: &self.fr * a,
            ftheta: &self.ftheta * a,
            fz: &self.fz * a,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            fr: &self.fr + &other.fr,
            ftheta: &self.ftheta + &other.ftheta,
            fz: &self.fz + &other.fz,
        }
    }

    pub fn components(&self) -> [&DMatrix<f64>; 3] {
        [&self.fr, &self.ftheta, &self.fz]
    }
}

/// Perturbation flux `int_0^1 r v^z dr` at every axial sample.
pub fn flux(vz: &DMatrix<f64>, grid: &RadialGrid) -> Result<Vec<f64>> {
    if vz.nrows() != grid.len() {
        return Err(shape_err(
            format!("{} radial rows", grid.len()),
            format!("{} rows", vz.nrows()),
        ));
    }
    Ok(vz
        .column_iter()
        .map(|col| grid.quad_weights.dot(&DVector::from_column_slice(col.as_slice())))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flux_of_zero_field() {
        let g = RadialGrid::new(16).unwrap();
        let vz = DMatrix::zeros(16, 8);
        assert!(flux(&vz, &g).unwrap().iter().all(|&f| f == 0.0));
    }

    #[test]
    fn flux_of_manufactured_profile_vanishes() {
        let g = RadialGrid::new(32).unwrap();
        let col = g.sample(|r| -(4.0 * r * r - 10.0 * r.powi(3) + 6.0 * r.powi(4)));
        let vz = DMatrix::from_fn(32, 4, |i, _| col[i]);
        assert!(flux(&vz, &g).unwrap().iter().all(|f| f.abs() < 1e-14));
    }

    #[test]
    fn flux_of_unit_profile() {
        let g = RadialGrid::new(32).unwrap();
        let vz = DMatrix::from_element(32, 4, 1.0);
        assert!(flux(&vz, &g).unwrap().iter().all(|f| (f - 0.5).abs() < 1e-14));
    }

    #[test]
    fn flux_shape_mismatch() {
        let g = RadialGrid::new(16).unwrap();
        assert!(flux(&DMatrix::zeros(15, 8), &g).is_err());
    }
}
