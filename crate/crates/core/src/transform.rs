//! Axial Fourier transforms on the periodic cell `[-L_z, L_z)`.
//!
//! Coefficients are normalized so that `g(z_j) = sum_m c_m exp(i xi_m z_j)`;
//! hence `int |g|^2 dz = 2 L_z sum_m |c_m|^2`. The Nyquist coefficient is
//! always dropped.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{shape_err, Result};
use crate::grid::ModeSet;
use crate::state::Modes;

fn check(cols: usize, modes: &ModeSet) -> Result<()> {
    if cols != modes.len() {
        return Err(shape_err(
            format!("{} axial samples", modes.len()),
            format!("{cols}"),
        ));
    }
    Ok(())
}

fn parity(k: i64) -> f64 {
    if k.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

pub fn forward_transform(field: &DMatrix<f64>, modes: &ModeSet) -> Result<Modes> {
    check(field.ncols(), modes)?;
    let n = modes.len();
    let fft = FftPlanner::new().plan_fft_forward(n);
    let mut out = Modes::zeros(field.nrows(), n);
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    let inv_n = 1.0 / n as f64;
    for i in 0..field.nrows() {
        for (j, b) in buf.iter_mut().enumerate() {
            *b = Complex64::new(field[(i, j)], 0.0);
        }
        fft.process(&mut buf);
        for (m, b) in buf.iter().enumerate() {
            // z_0 = -L_z shifts every coefficient by exp(i pi k) = (-1)^k.
            out[(i, m)] = b * (parity(modes.wavenumber(m)) * inv_n);
        }
        out[(i, modes.nyquist())] = Complex64::new(0.0, 0.0);
    }
    Ok(out)
}

pub fn inverse_transform(coeffs: &Modes, modes: &ModeSet) -> Result<DMatrix<f64>> {
    check(coeffs.ncols(), modes)?;
    let n = modes.len();
    let fft = FftPlanner::new().plan_fft_inverse(n);
    let mut out = DMatrix::zeros(coeffs.nrows(), n);
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for i in 0..coeffs.nrows() {
        for (m, b) in buf.iter_mut().enumerate() {
            *b = if m == modes.nyquist() {
                Complex64::new(0.0, 0.0)
            } else {
                coeffs[(i, m)] * parity(modes.wavenumber(m))
            };
        }
        fft.process(&mut buf);
        for (j, b) in buf.iter().enumerate() {
            out[(i, j)] = b.re;
        }
    }
    Ok(out)
}

/// Zero the upper third of the axial spectrum in place.
pub fn dealias(coeffs: &mut Modes, modes: &ModeSet) {
    for m in 0..coeffs.ncols() {
        if !modes.retained_by_dealias(m) {
            coeffs.column_mut(m).fill(Complex64::new(0.0, 0.0));
        }
    }
}

/// Multiply every mode column by `i xi`.
pub fn dz_modes(coeffs: &Modes, modes: &ModeSet) -> Modes {
    let mut out = coeffs.clone();
    for (m, &xi) in modes.frequencies.iter().enumerate() {
        let f = Complex64::new(0.0, xi);
        out.column_mut(m).iter_mut().for_each(|c| *c *= f);
    }
    out
}
