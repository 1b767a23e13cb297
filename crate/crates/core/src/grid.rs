//! Radial collocation grid on `(0, 1]` and the truncated axial mode set.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::error::{PipeError, Result};

/// Collocation nodes, differentiation matrices and quadrature weights in `r`.
///
/// Nodes are Chebyshev-Gauss-Radau points mapped to `(0, 1]`: the wall
/// `r = 1` is a node, the axis `r = 0` is not. Functions are represented by
/// the polynomial of degree `n_r - 1` through the nodal values.
#[derive(Debug, Clone)]
pub struct RadialGrid {
    pub nodes: DVector<f64>,
    pub d1: DMatrix<f64>,
    pub d2: DMatrix<f64>,
    /// `sum_i w_i g(r_i) ~ int_0^1 g(r) r dr`
    pub quad_weights: DVector<f64>,
    /// `sum_i w_i g(r_i) ~ int_0^1 g(r) dr`
    pub plain_weights: DVector<f64>,
    pub(crate) bary: DVector<f64>,
}

/// Barycentric weights of an arbitrary node set, normalized to unit max.
pub(crate) fn barycentric_weights(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut w: Vec<f64> = (0..n)
        .map(|j| {
            let p: f64 = (0..n).filter(|&k| k != j).map(|k| x[j] - x[k]).product();
            1.0 / p
        })
        .collect();
    let scale = w.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    w.iter_mut().for_each(|v| *v /= scale);
    w
}

/// First and second derivative matrices of polynomial interpolation on `x`.
pub(crate) fn diff_matrices(x: &[f64], w: &[f64]) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = w.len();
    let mut d1 = DMatrix::zeros(n, n);
    let mut d2 = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                d1[(i, j)] = (w[j] / w[i]) / (x[i] - x[j]);
            }
        }
        let diag: f64 = -(0..n).filter(|&j| j != i).map(|j| d1[(i, j)]).sum::<f64>();
        d1[(i, i)] = diag;
    }
    for i in 0..n {
        for j in 0..n {
            if i != j {
                d2[(i, j)] = 2.0 * d1[(i, j)] * (d1[(i, i)] - 1.0 / (x[i] - x[j]));
            }
        }
        let diag: f64 = -(0..n).filter(|&j| j != i).map(|j| d2[(i, j)]).sum::<f64>();
        d2[(i, i)] = diag;
    }
    (d1, d2)
}

/// `int_{-1}^{1} T_k(x) dx`
fn cheb_integral(k: usize) -> f64 {
    if k % 2 == 1 {
        0.0
    } else {
        2.0 / (1.0 - (k * k) as f64)
    }
}

/// Interpolatory weights for the moments `moment(k) = int_0^1 T_k(2r-1) rho(r) dr`.
fn interpolatory_weights(nodes: &[f64], moment: impl Fn(usize) -> f64) -> DVector<f64> {
    let n = nodes.len();
    // vt[(k, j)] = T_k(x_j)
    let mut vt = DMatrix::zeros(n, n);
    for (j, &r) in nodes.iter().enumerate() {
        let x = 2.0 * r - 1.0;
        let (mut t0, mut t1) = (1.0, x);
        for k in 0..n {
            let tk = if k == 0 {
                1.0
            } else if k == 1 {
                x
            } else {
                let t2 = 2.0 * x * t1 - t0;
                t0 = t1;
                t1 = t2;
                t2
            };
            vt[(k, j)] = tk;
        }
    }
    let m = DVector::from_fn(n, |k, _| moment(k));
    vt.lu().solve(&m).expect("Chebyshev-Vandermonde system is nonsingular")
}

impl RadialGrid {
    pub fn new(n_r: usize) -> Result<Self> {
        if n_r < 8 {
            return Err(PipeError::Invariant {
                key: "n_r",
                message: "must be at least 8".into(),
            });
        }
        // Radau points x_j = cos(2 pi j / (2n - 1)); r = (1 + x)/2 = cos^2(theta_j),
        // stored in increasing order.
        let theta: Vec<f64> = (0..n_r)
            .rev()
            .map(|j| PI * j as f64 / (2 * n_r - 1) as f64)
            .collect();
        let nodes: Vec<f64> = theta.iter().map(|t| t.cos().powi(2)).collect();
        let bary = barycentric_weights(&nodes);
        let (d1, d2) = diff_matrices(&nodes, &bary);
        let quad_weights = interpolatory_weights(&nodes, |k| {
            let j = if k == 0 {
                0.0
            } else {
                0.5 * (cheb_integral(k + 1) + cheb_integral(k - 1))
            };
            0.25 * (cheb_integral(k) + j)
        });
        let plain_weights = interpolatory_weights(&nodes, |k| 0.5 * cheb_integral(k));
        Ok(Self {
            nodes: DVector::from_vec(nodes),
            d1,
            d2,
            quad_weights,
            plain_weights,
            bary: DVector::from_vec(bary),
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Evaluate `f` at every node.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> DVector<f64> {
        self.nodes.map(f)
    }

    /// `int_0^1 g r dr` by quadrature.
    pub fn integrate_r(&self, g: &DVector<f64>) -> f64 {
        self.quad_weights.dot(g)
    }

    /// `int_0^1 g dr` by quadrature.
    pub fn integrate(&self, g: &DVector<f64>) -> f64 {
        self.plain_weights.dot(g)
    }

    /// Value of the interpolating polynomial at an arbitrary point.
    pub fn interpolate(&self, values: &[f64], at: f64) -> f64 {
        let (mut num, mut den) = (0.0, 0.0);
        for (j, (&r, &v)) in self.nodes.iter().zip(values).enumerate() {
            let diff = at - r;
            if diff == 0.0 {
                return v;
            }
            let c = self.bary[j] / diff;
            num += c * v;
            den += c;
        }
        num / den
    }
}

/// Axial Fourier frequencies on the periodic surrogate `[-L_z, L_z)`.
///
/// Modes are stored in FFT order: index `m < n_z/2` holds `k = m`, the rest
/// hold `k = m - n_z`. The unpaired Nyquist index `n_z/2` is kept at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSet {
    pub frequencies: Vec<f64>,
    pub half_period: f64,
}

impl ModeSet {
    pub fn new(n_z: usize, half_period: f64) -> Result<Self> {
        if n_z < 8 || !n_z.is_power_of_two() {
            return Err(PipeError::Invariant {
                key: "n_z",
                message: "must be a power of two and at least 8".into(),
            });
        }
        if !(half_period > 0.0) {
            return Err(PipeError::Invariant {
                key: "half_period",
                message: "must be positive".into(),
            });
        }
        let frequencies = (0..n_z)
            .map(|m| PI * Self::wavenumber_of(m, n_z) as f64 / half_period)
            .collect();
        Ok(Self {
            frequencies,
            half_period,
        })
    }

    fn wavenumber_of(m: usize, n_z: usize) -> i64 {
        if m < n_z / 2 {
            m as i64
        } else {
            m as i64 - n_z as i64
        }
    }

    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    pub fn wavenumber(&self, m: usize) -> i64 {
        Self::wavenumber_of(m, self.len())
    }

    pub fn nyquist(&self) -> usize {
        self.len() / 2
    }

    /// Index holding `-xi_m`.
    pub fn mirror(&self, m: usize) -> usize {
        (self.len() - m) % self.len()
    }

    /// Whether the mode at `m` is the independent member of its `+-xi` pair.
    pub fn is_primary(&self, m: usize) -> bool {
        m < self.nyquist()
    }

    pub fn dz(&self) -> f64 {
        2.0 * self.half_period / self.len() as f64
    }

    pub fn z_nodes(&self) -> Vec<f64> {
        let dz = self.dz();
        (0..self.len())
            .map(|j| -self.half_period + j as f64 * dz)
            .collect()
    }

    /// Whether the 2/3 rule retains this mode.
    pub fn retained_by_dealias(&self, m: usize) -> bool {
        3 * self.wavenumber(m).unsigned_abs() < self.len() as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_increasing_and_exclude_axis() {
        let g = RadialGrid::new(32).unwrap();
        assert!(g.nodes[0] > 0.0);
        assert_eq!(g.nodes[g.len() - 1], 1.0);
        assert!(g.nodes.as_slice().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn d1_kills_constants() {
        let g = RadialGrid::new(64).unwrap();
        let ones = DVector::from_element(64, 1.0);
        assert!((&g.d1 * &ones).amax() < 1e-9);
        assert!((&g.d2 * &ones).amax() < 1e-6);
    }

    #[test]
    fn d1_on_monomials() {
        let g = RadialGrid::new(64).unwrap();
        for m in 1..=10 {
            let f = g.sample(|r| r.powi(m));
            let df = g.sample(|r| m as f64 * r.powi(m - 1));
            let err = (&g.d1 * f - df).amax();
            assert!(err < 1e-10, "m={m} err={err:e}");
        }
    }

    #[test]
    fn quadrature_moments() {
        for n in [8, 16, 64, 128] {
            let g = RadialGrid::new(n).unwrap();
            for m in 0..(n - 1) as i32 {
                let f = g.sample(|r| r.powi(m));
                let exact = 1.0 / (m as f64 + 2.0);
                assert!((g.integrate_r(&f) - exact).abs() < 1e-12, "n={n} m={m}");
                let exact = 1.0 / (m as f64 + 1.0);
                assert!((g.integrate(&f) - exact).abs() < 1e-12, "n={n} m={m}");
            }
        }
    }

    #[test]
    fn interpolation_extrapolates_to_axis() {
        let g = RadialGrid::new(16).unwrap();
        let v: Vec<f64> = g.nodes.iter().map(|r| 2.0 + r - r * r * r).collect();
        assert!((g.interpolate(&v, 0.0) - 2.0).abs() < 1e-11);
        assert!((g.interpolate(&v, 0.5) - (2.5 - 0.125)).abs() < 1e-12);
    }

    #[test]
    fn mode_set_layout() {
        let modes = ModeSet::new(16, 4.0).unwrap();
        assert_eq!(modes.wavenumber(0), 0);
        assert_eq!(modes.wavenumber(7), 7);
        assert_eq!(modes.wavenumber(8), -8);
        assert_eq!(modes.wavenumber(15), -1);
        assert_eq!(modes.mirror(3), 13);
        assert_eq!(modes.mirror(0), 0);
        assert!((modes.frequencies[1] - PI / 4.0).abs() < 1e-15);
        assert!((modes.frequencies[15] + PI / 4.0).abs() < 1e-15);
        assert!(modes.retained_by_dealias(5));
        assert!(!modes.retained_by_dealias(6));
        assert!(ModeSet::new(12, 1.0).is_err());
    }
}
