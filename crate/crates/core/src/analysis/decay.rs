//! Exponential decay-rate fits of a velocity field along the pipe.
//!
//! At every axial sample in the window the cross-sectional norm
//! `(int_0^1 |v(r, z)|^2 r dr)^(1/2)` is computed, and `log` of it is fitted
//! by a straight line in `z`. The decay rate is minus the slope.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::analysis::scaling::linear_fit;
use crate::error::{PipeError, Result};
use crate::fields::check_field;
use crate::grid::{ModeSet, RadialGrid};
use crate::state::VelocityField;

/// Norms below this are treated as zero and not fitted.
pub const DECAY_FLOOR: f64 = 1e-14;

/// Minimum number of axial samples in a fit window.
pub const MIN_WINDOW_SAMPLES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpFit {
    pub rate: f64,
    pub r_squared: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub phi: Option<f64>,
    pub window: (f64, f64),
    pub n_samples: usize,
    pub total: ExpFit,
    pub vr: Option<ExpFit>,
    pub vtheta: Option<ExpFit>,
    pub vz: Option<ExpFit>,
    /// Components that could not be fitted, with the reason.
    pub rejected: Vec<String>,
    /// Whether the window keeps a margin of 3 from the forcing and from the
    /// periodic wrap.
    pub placement_ok: bool,
}

fn slice_norms(f: &DMatrix<f64>, cols: &[usize], grid: &RadialGrid) -> Vec<f64> {
    cols.iter()
        .map(|&j| {
            let mut acc = 0.0;
            for i in 0..f.nrows() {
                acc += grid.quad_weights[i] * f[(i, j)] * f[(i, j)];
            }
            acc.sqrt()
        })
        .collect()
}

fn fit(z: &[f64], norms: &[f64]) -> std::result::Result<ExpFit, String> {
    if norms.iter().any(|n| !(*n >= DECAY_FLOOR)) {
        return Err(format!("field below floor {DECAY_FLOOR:e}"));
    }
    let y: Vec<f64> = norms.iter().map(|n| n.ln()).collect();
    let (slope, intercept) = linear_fit(z, &y);
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let ss_res: f64 = z
        .iter()
        .zip(&y)
        .map(|(x, v)| (v - (intercept + slope * x)).powi(2))
        .sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok(ExpFit {
        rate: -slope,
        r_squared,
    })
}

/// Fit the decay rate over `window = (z0, z1)`; `support` is the half-width
/// of the forcing's axial support.
pub fn fit_decay_rate(
    v: &VelocityField,
    window: (f64, f64),
    support: f64,
    grid: &RadialGrid,
    modes: &ModeSet,
) -> Result<DecayReport> {
    for c in v.components() {
        check_field(c, grid, modes)?;
    }
    let (z0, z1) = window;
    if !(z0 < z1) || z1 > modes.half_period {
        return Err(PipeError::Input(format!(
            "window [{z0}, {z1}] must be increasing and inside the domain"
        )));
    }
    if z0 <= support {
        return Err(PipeError::Input(format!(
            "window [{z0}, {z1}] touches the forcing support |z| <= {support}"
        )));
    }
    let znodes = modes.z_nodes();
    let cols: Vec<usize> = (0..znodes.len())
        .filter(|&j| znodes[j] >= z0 && znodes[j] <= z1)
        .collect();
    if cols.len() < MIN_WINDOW_SAMPLES {
        return Err(PipeError::Input(format!(
            "window holds {} samples, at least {MIN_WINDOW_SAMPLES} required",
            cols.len()
        )));
    }
    let z: Vec<f64> = cols.iter().map(|&j| znodes[j]).collect();
    let per: Vec<Vec<f64>> = v.components().iter().map(|c| slice_norms(c, &cols, grid)).collect();
    let total: Vec<f64> = (0..cols.len())
        .map(|k| per.iter().map(|p| p[k] * p[k]).sum::<f64>().sqrt())
        .collect();
    let total = fit(&z, &total).map_err(PipeError::Input)?;
    let mut rejected = Vec::new();
    let mut comp = |name: &str, norms: &[f64]| match fit(&z, norms) {
        Ok(f) => Some(f),
        Err(e) => {
            rejected.push(format!("{name}: {e}"));
            None
        }
    };
    let vr = comp("vr", &per[0]);
    let vtheta = comp("vtheta", &per[1]);
    let vz = comp("vz", &per[2]);
    Ok(DecayReport {
        phi: None,
        window,
        n_samples: cols.len(),
        total,
        vr,
        vtheta,
        vz,
        rejected,
        placement_ok: z0 >= support + 3.0 && z1 <= modes.half_period - 3.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (RadialGrid, ModeSet) {
        (RadialGrid::new(16).unwrap(), ModeSet::new(256, 16.0).unwrap())
    }

    #[test]
    fn planted_rate_is_recovered() {
        let (g, m) = setup();
        let z = m.z_nodes();
        let mut v = VelocityField::zeros(16, 256);
        v.vz = DMatrix::from_fn(16, 256, |i, j| {
            let r = g.nodes[i];
            (1.0 - r * r) * (-0.5 * z[j]).exp()
        });
        v.vr = v.vz.map(|x| 0.3 * x);
        let rep = fit_decay_rate(&v, (5.0, 12.0), 2.0, &g, &m).unwrap();
        assert!((rep.total.rate - 0.5).abs() < 1e-6);
        assert!((rep.vz.unwrap().rate - 0.5).abs() < 1e-6);
        assert!(rep.total.r_squared > 0.999_999);
        assert!(rep.vtheta.is_none());
        assert_eq!(rep.rejected.len(), 1);
        assert!(rep.placement_ok);
    }

    #[test]
    fn zero_field_is_rejected() {
        let (g, m) = setup();
        let err = fit_decay_rate(&VelocityField::zeros(16, 256), (5.0, 12.0), 2.0, &g, &m)
            .unwrap_err()
            .to_string();
        assert!(err.contains("field below floor 1e-14"), "{err}");
    }

    #[test]
    fn window_checks() {
        let (g, m) = setup();
        let v = VelocityField::zeros(16, 256);
        assert!(fit_decay_rate(&v, (1.5, 12.0), 2.0, &g, &m).is_err());
        assert!(fit_decay_rate(&v, (5.0, 5.5), 2.0, &g, &m)
            .unwrap_err()
            .to_string()
            .contains("at least 8"));
        assert!(fit_decay_rate(&v, (5.0, 20.0), 2.0, &g, &m).is_err());
    }
}
