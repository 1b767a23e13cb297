//! Velocity and vorticity reconstruction from the stream function, and the
//! quadratic forcing terms of the fixed-point iteration.
//!
//! The meridional velocity is `v^r = d_z psi`, `v^z = -(1/r) d_r(r psi)`, and the
//! azimuthal vorticity is `omega = (L + d_z^2) psi`. The nonlinear forcing is
//!
//! ```text
//! F*      = (-v^z omega + (v^theta)^2 / r) e_r + v^r omega e_z
//! F^theta = -(v^r d_r + v^z d_z) v^theta - v^r v^theta / r
//! ```
//!
//! formed pointwise in physical space.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{shape_err, Result};
use crate::grid::{ModeSet, RadialGrid};
use crate::mode_solver::div_r;
use crate::radial::{assemble_l, real_times_complex};
use crate::state::{ForcingField, Modes, StreamState, VelocityField};
use crate::transform::{dealias, dz_modes, forward_transform, inverse_transform};

fn check_state(state: &StreamState, grid: &RadialGrid, modes: &ModeSet) -> Result<()> {
    let shape = (grid.len(), modes.len());
    for a in [&state.psi_modes, &state.swirl_modes] {
        if a.shape() != shape {
            return Err(shape_err(format!("{shape:?} modes"), format!("{:?}", a.shape())));
        }
    }
    Ok(())
}

pub(crate) fn check_field(f: &DMatrix<f64>, grid: &RadialGrid, modes: &ModeSet) -> Result<()> {
    let shape = (grid.len(), modes.len());
    if f.shape() != shape {
        return Err(shape_err(format!("{shape:?} samples"), format!("{:?}", f.shape())));
    }
    Ok(())
}

/// Apply `op` to every mode column.
pub(crate) fn map_columns(
    a: &Modes,
    op: impl Fn(usize, &DVector<Complex64>) -> DVector<Complex64>,
) -> Modes {
    let mut out = Modes::zeros(a.nrows(), a.ncols());
    for m in 0..a.ncols() {
        let col = DVector::from_iterator(a.nrows(), a.column(m).iter().copied());
        out.set_column(m, &op(m, &col));
    }
    out
}

/// Radial derivative of every column.
pub(crate) fn dr_modes(a: &Modes, grid: &RadialGrid) -> Modes {
    map_columns(a, |_, c| real_times_complex(&grid.d1, c))
}

pub(crate) fn dr_field(f: &DMatrix<f64>, grid: &RadialGrid) -> DMatrix<f64> {
    &grid.d1 * f
}

/// Velocity modes `(v^r, v^theta, v^z)` of a state.
pub fn velocity_modes(state: &StreamState, grid: &RadialGrid, modes: &ModeSet) -> [Modes; 3] {
    let vr = dz_modes(&state.psi_modes, modes);
    let vz = map_columns(&state.psi_modes, |_, c| -div_r(c, grid));
    [vr, state.swirl_modes.clone(), vz]
}

pub fn velocity_from_stream(
    state: &StreamState,
    grid: &RadialGrid,
    modes: &ModeSet,
) -> Result<VelocityField> {
    check_state(state, grid, modes)?;
    let [vr, vtheta, vz] = velocity_modes(state, grid, modes);
    Ok(VelocityField {
        vr: inverse_transform(&vr, modes)?,
        vtheta: inverse_transform(&vtheta, modes)?,
        vz: inverse_transform(&vz, modes)?,
    })
}

/// `(L - xi^2) psi` per mode.
pub fn vorticity_modes(state: &StreamState, grid: &RadialGrid, modes: &ModeSet) -> Modes {
    let l = assemble_l(grid).matrix;
    map_columns(&state.psi_modes, |m, c| {
        let xi = modes.frequencies[m];
        real_times_complex(&l, c) - c * Complex64::from(xi * xi)
    })
}

pub fn azimuthal_vorticity(
    state: &StreamState,
    grid: &RadialGrid,
    modes: &ModeSet,
) -> Result<DMatrix<f64>> {
    check_state(state, grid, modes)?;
    inverse_transform(&vorticity_modes(state, grid, modes), modes)
}

/// Axial derivative of a physical field, taken through its modes.
pub fn dz_field(f: &DMatrix<f64>, modes: &ModeSet) -> Result<DMatrix<f64>> {
    inverse_transform(&dz_modes(&forward_transform(f, modes)?, modes), modes)
}

/// `g / r` at the nodes. Every node is strictly positive, and fields entering
/// here vanish on the axis, so the quotient stays bounded.
pub(crate) fn over_r(f: &DMatrix<f64>, grid: &RadialGrid) -> DMatrix<f64> {
    DMatrix::from_fn(f.nrows(), f.ncols(), |i, j| f[(i, j)] / grid.nodes[i])
}

fn truncate(f: DMatrix<f64>, modes: &ModeSet, enabled: bool) -> Result<DMatrix<f64>> {
    if !enabled {
        return Ok(f);
    }
    let mut c = forward_transform(&f, modes)?;
    dealias(&mut c, modes);
    inverse_transform(&c, modes)
}

/// Quadratic forcing `(F*, F^theta)` of a velocity field, returned as one
/// [`ForcingField`] with `fr`, `fz` from `F*` and `ftheta` from `F^theta`.
///
/// The vorticity is recomputed from `v` as `d_z v^r - d_r v^z`, which agrees
/// with [`azimuthal_vorticity`] for fields built by [`velocity_from_stream`].
pub fn nonlinear_forcing(
    v: &VelocityField,
    grid: &RadialGrid,
    modes: &ModeSet,
    dealias: bool,
) -> Result<ForcingField> {
    for c in v.components() {
        check_field(c, grid, modes)?;
    }
    let omega = dz_field(&v.vr, modes)? - dr_field(&v.vz, grid);
    let vth_r = over_r(&v.vtheta, grid);
    let dr_vth = dr_field(&v.vtheta, grid);
    let dz_vth = dz_field(&v.vtheta, modes)?;

    let fr = -v.vz.component_mul(&omega) + v.vtheta.component_mul(&vth_r);
    let fz = v.vr.component_mul(&omega);
    let ftheta = -(v.vr.component_mul(&dr_vth) + v.vz.component_mul(&dz_vth))
        - v.vr.component_mul(&vth_r);
    Ok(ForcingField {
        fr: truncate(fr, modes, dealias)?,
        ftheta: truncate(ftheta, modes, dealias)?,
        fz: truncate(fz, modes, dealias)?,
    })
}

/// Weighted `L^2_r` norms of the five stream-function quantities bounded by
/// the `H^1` norm of the velocity:
/// `[L psi, d_z^2 psi, (1/r) d_r(r psi), d_z psi, psi]`.
pub fn stream_bound_terms(state: &StreamState, grid: &RadialGrid, modes: &ModeSet) -> [f64; 5] {
    use crate::state::modes_l2r_sq;
    let psi = &state.psi_modes;
    let l = assemble_l(grid).matrix;
    let lpsi = map_columns(psi, |_, c| real_times_complex(&l, c));
    let dzz = dz_modes(&dz_modes(psi, modes), modes);
    let divr = map_columns(psi, |_, c| div_r(c, grid));
    let dz = dz_modes(psi, modes);
    [&lpsi, &dzz, &divr, &dz, psi].map(|a| modes_l2r_sq(a, grid, modes).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn setup(n_r: usize, n_z: usize, l: f64) -> (RadialGrid, ModeSet) {
        (RadialGrid::new(n_r).unwrap(), ModeSet::new(n_z, l).unwrap())
    }

    fn state_from(grid: &RadialGrid, modes: &ModeSet, psi: impl Fn(f64, f64) -> f64) -> StreamState {
        let z = modes.z_nodes();
        let phys = DMatrix::from_fn(grid.len(), modes.len(), |i, j| psi(grid.nodes[i], z[j]));
        StreamState {
            psi_modes: forward_transform(&phys, modes).unwrap(),
            swirl_modes: Modes::zeros(grid.len(), modes.len()),
        }
    }

    fn stream(r: f64) -> f64 {
        r.powi(3) * (1.0 - r).powi(2)
    }

    #[test]
    fn z_independent_stream() {
        let (g, m) = setup(32, 16, 4.0);
        let s = state_from(&g, &m, |r, _| stream(r));
        let v = velocity_from_stream(&s, &g, &m).unwrap();
        assert!(v.vr.amax() < 1e-13);
        let err = DMatrix::from_fn(32, 16, |i, j| {
            let r = g.nodes[i];
            v.vz[(i, j)] + 4.0 * r * r - 10.0 * r.powi(3) + 6.0 * r.powi(4)
        });
        assert!(err.amax() < 1e-11, "{:e}", err.amax());
        let w = azimuthal_vorticity(&s, &g, &m).unwrap();
        let err = DMatrix::from_fn(32, 16, |i, j| {
            let r = g.nodes[i];
            w[(i, j)] - (8.0 * r - 30.0 * r * r + 24.0 * r.powi(3))
        });
        assert!(err.amax() < 1e-9, "{:e}", err.amax());
    }

    #[test]
    fn zero_stream_gives_zero_fields() {
        let (g, m) = setup(16, 8, 1.0);
        let s = StreamState::zeros(16, 8);
        let v = velocity_from_stream(&s, &g, &m).unwrap();
        assert_eq!(v, VelocityField::zeros(16, 8));
        assert!(azimuthal_vorticity(&s, &g, &m).unwrap().amax() == 0.0);
        let f = nonlinear_forcing(&v, &g, &m, true).unwrap();
        assert_eq!(f, ForcingField::zeros(16, 8));
    }

    #[test]
    fn harmonic_stream_radial_velocity() {
        let l = 3.0;
        let (g, m) = setup(24, 32, l);
        let s = state_from(&g, &m, |r, z| stream(r) * (PI * z / l).sin());
        let v = velocity_from_stream(&s, &g, &m).unwrap();
        let z = m.z_nodes();
        let err = DMatrix::from_fn(24, 32, |i, j| {
            v.vr[(i, j)] - PI / l * stream(g.nodes[i]) * (PI * z[j] / l).cos()
        });
        assert!(err.amax() < 1e-13);
        // Vorticity stays on the same pair of frequencies.
        let w = forward_transform(&azimuthal_vorticity(&s, &g, &m).unwrap(), &m).unwrap();
        for k in 0..32 {
            let size = w.column(k).camax();
            if k == 1 || k == 31 {
                assert!(size > 1e-3);
            } else {
                assert!(size < 1e-12, "k={k} {size:e}");
            }
        }
    }

    #[test]
    fn swirl_only_forcing() {
        let (g, m) = setup(24, 16, 2.0);
        let mut v = VelocityField::zeros(24, 16);
        v.vtheta = DMatrix::from_fn(24, 16, |i, _| g.nodes[i] * (1.0 - g.nodes[i]));
        let f = nonlinear_forcing(&v, &g, &m, true).unwrap();
        let err = DMatrix::from_fn(24, 16, |i, j| {
            let r = g.nodes[i];
            f.fr[(i, j)] - r * (1.0 - r).powi(2)
        });
        assert!(err.amax() < 1e-14);
        assert!(f.fz.amax() < 1e-14 && f.ftheta.amax() < 1e-14);
    }

    #[test]
    fn axial_only_forcing() {
        let (g, m) = setup(24, 16, 2.0);
        let s = state_from(&g, &m, |r, _| stream(r));
        let v = velocity_from_stream(&s, &g, &m).unwrap();
        let w = azimuthal_vorticity(&s, &g, &m).unwrap();
        let f = nonlinear_forcing(&v, &g, &m, false).unwrap();
        assert!(f.fz.amax() < 1e-12);
        assert!((f.fr + v.vz.component_mul(&w)).amax() < 1e-9);
    }

    #[test]
    fn reconstruction_is_divergence_and_flux_free() {
        let l = 4.0;
        let (g, m) = setup(32, 32, l);
        let s = state_from(&g, &m, |r, z| {
            stream(r) * ((PI * z / l).cos() + 0.5 * (2.0 * PI * z / l).sin()) + r * r * (1.0 - r).powi(2)
        });
        let v = velocity_from_stream(&s, &g, &m).unwrap();
        let div = dr_field(&v.vr, &g) + over_r(&v.vr, &g) + dz_field(&v.vz, &m).unwrap();
        let worst = div.rows(1, 30).amax();
        assert!(worst < 1e-8, "{worst:e}");
        let flux = crate::state::flux(&v.vz, &g).unwrap();
        assert!(flux.iter().all(|f| f.abs() < 1e-10));
        // No slip at the wall.
        for c in v.components() {
            assert!(c.row(31).amax() < 1e-10);
        }
    }

    #[test]
    fn stream_bounds_of_zero_state() {
        let (g, m) = setup(16, 8, 1.0);
        assert_eq!(stream_bound_terms(&StreamState::zeros(16, 8), &g, &m), [0.0; 5]);
    }
}
