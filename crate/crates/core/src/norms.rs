//! Weighted norms on the periodic cell.
//!
//! All norms use the measure `r dr dz` on `(0,1] x [-L_z, L_z)`; the constant
//! `2 pi` of the azimuthal integral is left out. Axial integrals are evaluated
//! through Parseval, `int |g|^2 dz = 2 L_z sum_m |g_m|^2`.
//!
//! Velocity Sobolev norms treat `v^r` and `v^theta` as components of a
//! Cartesian vector field, so their gradients carry the curvature terms
//! `v/r`. The fractional orders are not genuine fractional norms; they are the
//! interpolation products
//!
//! | order | value |
//! |-------|-------|
//! | 5/3   | `L2^(1/5) H2^(4/5)` |
//! | 19/12 | `L2^(1/20) H(5/3)^(19/20)` |

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{PipeError, Result};
use crate::fields::{check_field, dr_modes, map_columns, velocity_from_stream};
use crate::grid::{ModeSet, RadialGrid};
use crate::mode_solver::div_r;
use crate::radial::{assemble_l, real_times_complex};
use crate::state::{modes_l2r_sq, Modes, StreamState, VelocityField};
use crate::transform::{dz_modes, forward_transform};

/// Sobolev orders with a defined norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SobolevOrder {
    L2,
    H1,
    H5Over3,
    H19Over12,
    H2,
}

impl SobolevOrder {
    pub const ALL: [SobolevOrder; 5] = [
        SobolevOrder::L2,
        SobolevOrder::H19Over12,
        SobolevOrder::H1,
        SobolevOrder::H5Over3,
        SobolevOrder::H2,
    ];

    pub fn from_value(s: f64) -> Result<Self> {
        let close = |x: f64| (s - x).abs() < 1e-12;
        if close(0.0) {
            Ok(Self::L2)
        } else if close(1.0) {
            Ok(Self::H1)
        } else if close(5.0 / 3.0) {
            Ok(Self::H5Over3)
        } else if close(19.0 / 12.0) {
            Ok(Self::H19Over12)
        } else if close(2.0) {
            Ok(Self::H2)
        } else {
            Err(PipeError::UnsupportedOrder(format!("{s}")))
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Self::L2 => 0.0,
            Self::H1 => 1.0,
            Self::H5Over3 => 5.0 / 3.0,
            Self::H19Over12 => 19.0 / 12.0,
            Self::H2 => 2.0,
        }
    }
}

impl std::str::FromStr for SobolevOrder {
    type Err = PipeError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "0" | "L2" => Ok(Self::L2),
            "1" | "H1" => Ok(Self::H1),
            "5/3" => Ok(Self::H5Over3),
            "19/12" => Ok(Self::H19Over12),
            "2" | "H2" => Ok(Self::H2),
            other => other
                .parse::<f64>()
                .map_err(|_| PipeError::UnsupportedOrder(other.to_string()))
                .and_then(Self::from_value),
        }
    }
}

/// `sqrt(int int |g|^2 r dr dz)` of a physical field.
pub fn weighted_l2(g: &DMatrix<f64>, grid: &RadialGrid, modes: &ModeSet) -> Result<f64> {
    check_field(g, grid, modes)?;
    let mut acc = 0.0;
    for j in 0..g.ncols() {
        for i in 0..g.nrows() {
            acc += grid.quad_weights[i] * g[(i, j)] * g[(i, j)];
        }
    }
    Ok((acc * modes.dz()).sqrt())
}

/// Same as [`weighted_l2`] for a field given by its modes.
pub fn weighted_l2_modes(a: &Modes, grid: &RadialGrid, modes: &ModeSet) -> f64 {
    modes_l2r_sq(a, grid, modes).sqrt()
}

fn over_r_modes(a: &Modes, grid: &RadialGrid) -> Modes {
    Modes::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] / grid.nodes[i])
}

/// Squared `L^2`, first-derivative and second-derivative energies of one
/// component.
fn component_energies(
    c: &Modes,
    vector: bool,
    grid: &RadialGrid,
    modes: &ModeSet,
) -> [f64; 3] {
    let sq = |a: &Modes| modes_l2r_sq(a, grid, modes);
    let cr = dr_modes(c, grid);
    let cz = dz_modes(c, modes);
    let crr = dr_modes(&cr, grid);
    let crz = dz_modes(&cr, modes);
    let czz = dz_modes(&cz, modes);
    let l2 = sq(c);
    if vector {
        let c_r = over_r_modes(c, grid);
        let cr_r = over_r_modes(&cr, grid);
        let cz_r = over_r_modes(&cz, grid);
        let twist = &cr_r - over_r_modes(&c_r, grid);
        let h1 = sq(&cr) + sq(&c_r) + sq(&cz);
        let h2 = sq(&crr) + 3.0 * sq(&twist) + 2.0 * sq(&crz) + 2.0 * sq(&cz_r) + sq(&czz);
        [l2, h1, h2]
    } else {
        let cr_r = over_r_modes(&cr, grid);
        let h1 = sq(&cr) + sq(&cz);
        let h2 = sq(&crr) + sq(&cr_r) + 2.0 * sq(&crz) + sq(&czz);
        [l2, h1, h2]
    }
}

/// Integer-order energies `[|v|_0^2, |grad v|^2, |grad^2 v|^2]` summed over
/// the components.
fn velocity_energies(v: &VelocityField, grid: &RadialGrid, modes: &ModeSet) -> Result<[f64; 3]> {
    let mut acc = [0.0; 3];
    for (c, vector) in [(&v.vr, true), (&v.vtheta, true), (&v.vz, false)] {
        check_field(c, grid, modes)?;
        let e = component_energies(&forward_transform(c, modes)?, vector, grid, modes);
        for k in 0..3 {
            acc[k] += e[k];
        }
    }
    Ok(acc)
}

fn from_energies(e: [f64; 3], order: SobolevOrder) -> f64 {
    let l2 = e[0].sqrt();
    let h1 = (e[0] + e[1]).sqrt();
    let h2 = (e[0] + e[1] + e[2]).sqrt();
    let h53 = l2.powf(0.2) * h2.powf(0.8);
    match order {
        SobolevOrder::L2 => l2,
        SobolevOrder::H1 => h1,
        SobolevOrder::H2 => h2,
        SobolevOrder::H5Over3 => h53,
        SobolevOrder::H19Over12 => l2.powf(1.0 / 20.0) * h53.powf(19.0 / 20.0),
    }
}

/// Sobolev norm of a velocity field; `s` must be one of `0, 1, 5/3, 19/12, 2`.
pub fn sobolev_norm(v: &VelocityField, s: f64, grid: &RadialGrid, modes: &ModeSet) -> Result<f64> {
    let order = SobolevOrder::from_value(s)?;
    Ok(from_energies(velocity_energies(v, grid, modes)?, order))
}

pub fn sobolev_norm_order(
    v: &VelocityField,
    order: SobolevOrder,
    grid: &RadialGrid,
    modes: &ModeSet,
) -> Result<f64> {
    Ok(from_energies(velocity_energies(v, grid, modes)?, order))
}

/// The composite stream-function norm: per mode, the sum of
///
/// ```text
/// |(r L p)'|^2 / r + xi^2 |L p|^2 r + xi^4 |(r p)'|^2 / r + xi^6 |p|^2 r
/// + |L p|^2 r + xi^2 |(r p)'|^2 / r + xi^4 |p|^2 r
/// + |(r p)'|^2 / r + xi^2 |p|^2 r + |p|^2 r
/// ```
///
/// integrated in `r`, summed over modes with the Parseval factor `2 L_z`, and
/// square-rooted.
pub fn hr3_norm(state: &StreamState, grid: &RadialGrid, modes: &ModeSet) -> f64 {
    let l = assemble_l(grid).matrix;
    let mut total = 0.0;
    for (m, &xi) in modes.frequencies.iter().enumerate() {
        let p = DVector::from_iterator(grid.len(), state.psi_modes.column(m).iter().copied());
        total += hr3_mode(&p, xi, &l, grid);
    }
    (2.0 * modes.half_period * total).sqrt()
}

fn hr3_mode(p: &DVector<Complex64>, xi: f64, l: &DMatrix<f64>, grid: &RadialGrid) -> f64 {
    let mass = |g: &DVector<Complex64>| grid.integrate_r(&g.map(|c| c.norm_sqr()));
    let lp = real_times_complex(l, p);
    let d_lp = mass(&div_r(&lp, grid));
    let m_lp = mass(&lp);
    let d_p = mass(&div_r(p, grid));
    let m_p = mass(p);
    let x2 = xi * xi;
    (d_lp + x2 * m_lp + x2 * x2 * d_p + x2 * x2 * x2 * m_p)
        + (m_lp + x2 * d_p + x2 * x2 * m_p)
        + (d_p + x2 * m_p + m_p)
}

/// Norms of a state and its velocity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub l2r: f64,
    pub h1: f64,
    pub h2: f64,
    pub h_5_3: f64,
    pub h_19_12: f64,
    pub hr3: f64,
}

impl NormReport {
    pub fn of_state(state: &StreamState, grid: &RadialGrid, modes: &ModeSet) -> Result<Self> {
        let v = velocity_from_stream(state, grid, modes)?;
        let e = velocity_energies(&v, grid, modes)?;
        Ok(Self {
            l2r: from_energies(e, SobolevOrder::L2),
            h1: from_energies(e, SobolevOrder::H1),
            h2: from_energies(e, SobolevOrder::H2),
            h_5_3: from_energies(e, SobolevOrder::H5Over3),
            h_19_12: from_energies(e, SobolevOrder::H19Over12),
            hr3: hr3_norm(state, grid, modes),
        })
    }
}

/// `L^2_r` norm of `L psi` over the cell, for comparison with [`hr3_norm`].
pub fn l_psi_norm(state: &StreamState, grid: &RadialGrid, modes: &ModeSet) -> f64 {
    let l = assemble_l(grid).matrix;
    let lp = map_columns(&state.psi_modes, |_, c| real_times_complex(&l, c));
    weighted_l2_modes(&lp, grid, modes)
}
