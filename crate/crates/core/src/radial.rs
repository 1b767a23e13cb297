//! The axisymmetric radial operator `L = d^2/dr^2 + (1/r) d/dr - 1/r^2` and the
//! linear functionals that encode the axis and wall conditions.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::grid::{barycentric_weights, diff_matrices, RadialGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OperatorKind {
    L,
    LSquared,
    D1,
    IdentityWeighted,
}

#[derive(Debug, Clone)]
pub struct RadialOperator {
    pub matrix: DMatrix<f64>,
    pub kind: OperatorKind,
}

impl RadialOperator {
    pub fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.matrix * v
    }

    pub fn apply_complex(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        real_times_complex(&self.matrix, v)
    }

    /// Comma-separated dump of the matrix, one row per line.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for i in 0..self.matrix.nrows() {
            let row: Vec<String> = self
                .matrix
                .row(i)
                .iter()
                .map(|v| format!("{v:.17e}"))
                .collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

pub(crate) fn real_times_complex(m: &DMatrix<f64>, v: &DVector<Complex64>) -> DVector<Complex64> {
    let re = m * v.map(|c| c.re);
    let im = m * v.map(|c| c.im);
    DVector::from_fn(v.len(), |i, _| Complex64::new(re[i], im[i]))
}

pub fn assemble_l(grid: &RadialGrid) -> RadialOperator {
    let n = grid.len();
    let mut m = grid.d2.clone();
    for i in 0..n {
        let r = grid.nodes[i];
        for j in 0..n {
            m[(i, j)] += grid.d1[(i, j)] / r;
        }
        m[(i, i)] -= 1.0 / (r * r);
    }
    RadialOperator {
        matrix: m,
        kind: OperatorKind::L,
    }
}

pub fn assemble_l_squared(grid: &RadialGrid) -> RadialOperator {
    let l = assemble_l(grid).matrix;
    RadialOperator {
        matrix: &l * &l,
        kind: OperatorKind::LSquared,
    }
}

pub fn assemble_d1(grid: &RadialGrid) -> RadialOperator {
    RadialOperator {
        matrix: grid.d1.clone(),
        kind: OperatorKind::D1,
    }
}

/// Quadrature weights on the diagonal: `v^T W u ~ int_0^1 v u r dr`.
pub fn assemble_weight(grid: &RadialGrid) -> RadialOperator {
    RadialOperator {
        matrix: DMatrix::from_diagonal(&grid.quad_weights),
        kind: OperatorKind::IdentityWeighted,
    }
}

/// Two linear functionals on nodal values.
#[derive(Debug, Clone)]
pub struct ConstraintRows {
    pub first: DVector<f64>,
    pub second: DVector<f64>,
}

impl ConstraintRows {
    pub fn apply(&self, v: &DVector<f64>) -> (f64, f64) {
        (self.first.dot(v), self.second.dot(v))
    }

    pub fn apply_complex(&self, v: &DVector<Complex64>) -> (Complex64, Complex64) {
        let dot = |row: &DVector<f64>| {
            row.iter()
                .zip(v.iter())
                .fold(Complex64::new(0.0, 0.0), |acc, (a, b)| acc + b * *a)
        };
        (dot(&self.first), dot(&self.second))
    }
}

/// Axis functionals: `first` extrapolates the value to `r = 0`, `second`
/// extrapolates the second derivative there. For a smooth
/// `psi = a1 r + a2 r^2 + ...` one has `L psi(0) = 3 a2 = (3/2) psi''(0)`, so the
/// pair enforces `psi(0) = L psi(0) = 0`.
pub fn axis_rows(grid: &RadialGrid) -> ConstraintRows {
    let n = grid.len();
    let mut ext = Vec::with_capacity(n + 1);
    ext.push(0.0);
    ext.extend(grid.nodes.iter().copied());
    let w = barycentric_weights(&ext);
    let (_, d2) = diff_matrices(&ext, &w);

    // Lagrange basis of the original nodes evaluated at 0.
    let terms: Vec<f64> = (0..n).map(|j| grid.bary[j] / (0.0 - grid.nodes[j])).collect();
    let denom: f64 = terms.iter().sum();
    let first = DVector::from_fn(n, |j, _| terms[j] / denom);
    let second = DVector::from_fn(n, |j, _| d2[(0, 0)] * first[j] + d2[(0, j + 1)]);
    ConstraintRows { first, second }
}

/// Wall functionals: value and slope at `r = 1`.
pub fn wall_rows(grid: &RadialGrid) -> ConstraintRows {
    let n = grid.len();
    let mut first = DVector::zeros(n);
    first[n - 1] = 1.0;
    let second = grid.d1.row(n - 1).transpose();
    ConstraintRows { first, second }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> RadialGrid {
        RadialGrid::new(n).unwrap()
    }

    #[test]
    fn l_annihilates_r() {
        let g = grid(32);
        assert!(assemble_l(&g).apply(&g.sample(|r| r)).amax() < 1e-10);
        // Entries grow like n^4 near the axis; round-off grows with them.
        let g = grid(64);
        assert!(assemble_l(&g).apply(&g.sample(|r| r)).amax() < 1e-9);
    }

    #[test]
    fn l_on_r2_and_r3() {
        let g = grid(64);
        let l = assemble_l(&g);
        let out = l.apply(&g.sample(|r| r * r));
        assert!(out.iter().all(|v| (v - 3.0).abs() < 1e-9), "{:e}", (out.add_scalar(-3.0)).amax());
        let out = l.apply(&g.sample(|r| r.powi(3)));
        assert!((out - g.sample(|r| 8.0 * r)).amax() < 1e-9);
    }

    #[test]
    fn l_squared_of_manufactured_stream() {
        let g = grid(12);
        let l2 = assemble_l_squared(&g);
        let psi = g.sample(|r| r.powi(3) * (1.0 - r).powi(2));
        let err = (l2.apply(&psi) - g.sample(|r| -90.0 + 192.0 * r)).amax();
        assert!(err < 1e-8, "{err:e}");
    }

    #[test]
    fn l_converges_spectrally_on_smooth_function() {
        let exact = |r: f64| {
            use std::f64::consts::PI;
            3.0 * PI * (PI * r).cos() - PI * PI * r * (PI * r).sin()
        };
        let errs: Vec<f64> = [8, 12, 16]
            .iter()
            .map(|&n| {
                let g = grid(n);
                let l = assemble_l(&g);
                let f = g.sample(|r| r * (std::f64::consts::PI * r).sin());
                (l.apply(&f) - g.sample(exact)).amax()
            })
            .collect();
        assert!(errs[0] / errs[1] > 1e3, "{errs:?}");
        assert!(errs[1] / errs[2] > 1e3, "{errs:?}");
        assert!(errs[2] < 1e-9, "{errs:?}");
    }

    #[test]
    fn axis_rows_on_manufactured_stream() {
        let g = grid(64);
        let rows = axis_rows(&g);
        let (a, b) = rows.apply(&g.sample(|r| r.powi(3) * (1.0 - r).powi(2)));
        assert!(a.abs() < 1e-10 && b.abs() < 1e-8, "{a:e} {b:e}");
    }

    #[test]
    fn axis_rows_detect_r_squared() {
        let g = grid(64);
        let (a, b) = axis_rows(&g).apply(&g.sample(|r| r * r));
        assert!(a.abs() < 1e-10);
        assert!((b - 2.0).abs() < 1e-8, "{b}");
        let (a, b) = axis_rows(&g).apply(&DVector::zeros(64));
        assert_eq!((a, b), (0.0, 0.0));
    }

    #[test]
    fn wall_rows_values() {
        let g = grid(32);
        let rows = wall_rows(&g);
        let (a, b) = rows.apply(&g.sample(|r| r.powi(3) * (1.0 - r).powi(2)));
        assert!(a.abs() < 1e-14 && b.abs() < 1e-10);
        let (a, b) = rows.apply(&g.sample(|r| r));
        assert!((a - 1.0).abs() < 1e-14 && (b - 1.0).abs() < 1e-10);
        let (a, b) = rows.apply(&g.sample(|r| 1.0 - r));
        assert!(a.abs() < 1e-14 && (b + 1.0).abs() < 1e-10);
    }

    #[test]
    fn csv_dump_shape() {
        let g = grid(8);
        let csv = assemble_d1(&g).to_csv();
        assert_eq!(csv.lines().count(), 8);
        assert!(csv.lines().all(|l| l.split(',').count() == 8));
    }
}
