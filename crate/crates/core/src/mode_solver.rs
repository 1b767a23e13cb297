//! Per-frequency solvers for the linearized stream-function and swirl problems
//! around Hagen-Poiseuille flow, and the energy balances they satisfy.
//!
//! For a fixed axial frequency `xi` the stream function solves
//!
//! ```text
//! i xi U(r) (L - xi^2) psi - (L - xi^2)^2 psi = f,
//! psi(0) = L psi(0) = psi(1) = psi'(1) = 0,
//! ```
//!
//! and the swirl solves `i xi U v - (L - xi^2) v = F_theta` with `v(0) = v(1) = 0`.
//! Each problem is one dense bordered collocation system: the boundary
//! functionals replace the collocation rows nearest the axis and the wall.

use nalgebra::{DMatrix, DVector, Dyn, LU};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{shape_err, PipeError, Result};
use crate::grid::RadialGrid;
use crate::radial::{assemble_l, axis_rows, real_times_complex, wall_rows, ConstraintRows};

type C64 = Complex64;

/// Hagen-Poiseuille profile `U(r) = (2 phi / pi)(1 - r^2)` on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BaseFlow {
    pub profile: DVector<f64>,
    pub phi: f64,
}

pub fn hagen_poiseuille(phi: f64, grid: &RadialGrid) -> Result<BaseFlow> {
    if !(phi > 0.0) {
        return Err(PipeError::Invariant {
            key: "phi",
            message: "must be positive".into(),
        });
    }
    let amp = 2.0 * phi / std::f64::consts::PI;
    Ok(BaseFlow {
        profile: grid.sample(|r| amp * (1.0 - r * r)),
        phi,
    })
}

/// Radial operators shared by every mode solve on one grid.
#[derive(Debug, Clone)]
pub struct RadialOps {
    pub l: DMatrix<f64>,
    pub axis: ConstraintRows,
    pub wall: ConstraintRows,
}

impl RadialOps {
    pub fn new(grid: &RadialGrid) -> Self {
        Self {
            l: assemble_l(grid).matrix,
            axis: axis_rows(grid),
            wall: wall_rows(grid),
        }
    }
}

fn check_len(v: usize, grid: &RadialGrid) -> Result<()> {
    if v != grid.len() {
        return Err(shape_err(format!("{} radial values", grid.len()), v));
    }
    Ok(())
}

/// `f = i xi F^r - d/dr F^z` for one mode.
pub fn stream_rhs(
    fr_hat: &DVector<C64>,
    fz_hat: &DVector<C64>,
    xi: f64,
    grid: &RadialGrid,
) -> Result<DVector<C64>> {
    check_len(fr_hat.len(), grid)?;
    check_len(fz_hat.len(), grid)?;
    let dfz = real_times_complex(&grid.d1, fz_hat);
    Ok(fr_hat * C64::new(0.0, xi) - dfz)
}

/// `(L - xi^2)` as a real matrix.
fn shifted_l(ops: &RadialOps, xi: f64) -> DMatrix<f64> {
    let mut m = ops.l.clone();
    for i in 0..m.nrows() {
        m[(i, i)] -= xi * xi;
    }
    m
}

/// Unbordered stream operator `i xi U (L - xi^2) - (L - xi^2)^2`.
pub fn stream_operator(xi: f64, base: &BaseFlow, ops: &RadialOps) -> DMatrix<C64> {
    let s = shifted_l(ops, xi);
    let s2 = &s * &s;
    DMatrix::from_fn(s.nrows(), s.ncols(), |i, j| {
        C64::new(-s2[(i, j)], xi * base.profile[i] * s[(i, j)])
    })
}

/// Unbordered swirl operator `i xi U - (L - xi^2)`.
pub fn swirl_operator(xi: f64, base: &BaseFlow, ops: &RadialOps) -> DMatrix<C64> {
    let s = shifted_l(ops, xi);
    DMatrix::from_fn(s.nrows(), s.ncols(), |i, j| {
        let diag = if i == j { xi * base.profile[i] } else { 0.0 };
        C64::new(-s[(i, j)], diag)
    })
}

/// Per-mode solve diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeDiagnostics {
    pub xi: f64,
    pub residual: f64,
    pub condition: f64,
}

/// Which rows of an `n`-row system are collocation rows (not boundary rows).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Border {
    /// Two axis rows and two wall rows.
    Stream,
    /// One axis row and one wall row.
    Swirl,
}

impl Border {
    pub fn interior(self, n: usize) -> std::ops::Range<usize> {
        match self {
            Border::Stream => 2..n - 2,
            Border::Swirl => 1..n - 1,
        }
    }
}

/// A factored bordered system for one frequency.
#[derive(Debug, Clone)]
pub struct ModeSystem {
    pub xi: f64,
    pub border: Border,
    operator: DMatrix<C64>,
    lu: LU<C64, Dyn, Dyn>,
    pub condition: f64,
}

fn one_norm(m: &DMatrix<C64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|v| v.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

impl ModeSystem {
    fn factor(xi: f64, border: Border, operator: DMatrix<C64>, ops: &RadialOps) -> Result<Self> {
        let n = operator.nrows();
        let interior = border.interior(n);
        let scale = interior
            .clone()
            .map(|i| operator.row(i).iter().map(|v| v.norm()).fold(0.0, f64::max))
            .fold(0.0, f64::max)
            .max(1.0);
        let mut bordered = operator.clone();
        let mut set_row = |i: usize, row: &DVector<f64>| {
            let rmax = row.amax();
            for j in 0..n {
                bordered[(i, j)] = C64::new(row[j] * scale / rmax, 0.0);
            }
        };
        match border {
            Border::Stream => {
                set_row(0, &ops.axis.first);
                set_row(1, &ops.axis.second);
                set_row(n - 2, &ops.wall.second);
                set_row(n - 1, &ops.wall.first);
            }
            Border::Swirl => {
                set_row(0, &ops.axis.first);
                set_row(n - 1, &ops.wall.first);
            }
        }
        let norm = one_norm(&bordered);
        let lu = bordered.lu();
        let condition = match lu.try_inverse() {
            Some(inv) => norm * one_norm(&inv),
            None => f64::INFINITY,
        };
        if !condition.is_finite() || condition > 1e17 {
            return Err(PipeError::SingularMode { xi, condition });
        }
        Ok(Self {
            xi,
            border,
            operator,
            lu,
            condition,
        })
    }

    pub fn stream(xi: f64, base: &BaseFlow, ops: &RadialOps) -> Result<Self> {
        Self::factor(xi, Border::Stream, stream_operator(xi, base, ops), ops)
    }

    pub fn swirl(xi: f64, base: &BaseFlow, ops: &RadialOps) -> Result<Self> {
        Self::factor(xi, Border::Swirl, swirl_operator(xi, base, ops), ops)
    }

    /// Solve with `rhs` on the collocation rows; boundary rows get zero data.
    pub fn solve(&self, rhs: &DVector<C64>) -> DVector<C64> {
        let n = rhs.len();
        let mut b = rhs.clone();
        let interior = self.border.interior(n);
        for i in 0..n {
            if !interior.contains(&i) {
                b[i] = C64::new(0.0, 0.0);
            }
        }
        self.lu.solve(&b).expect("factorization checked at construction")
    }

    /// Unbordered operator applied to `v`.
    pub fn apply(&self, v: &DVector<C64>) -> DVector<C64> {
        &self.operator * v
    }

    /// Max collocation-row residual relative to the larger of `|A v|` and `|rhs|`.
    pub fn residual(&self, v: &DVector<C64>, rhs: &DVector<C64>) -> f64 {
        let av = self.apply(v);
        let mut num: f64 = 0.0;
        let mut den: f64 = 0.0;
        for i in self.border.interior(v.len()) {
            num = num.max((av[i] - rhs[i]).norm());
            den = den.max(av[i].norm()).max(rhs[i].norm());
        }
        if den == 0.0 {
            num
        } else {
            num / den
        }
    }

    pub fn diagnostics(&self, v: &DVector<C64>, rhs: &DVector<C64>) -> ModeDiagnostics {
        ModeDiagnostics {
            xi: self.xi,
            residual: self.residual(v, rhs),
            condition: self.condition,
        }
    }
}

pub fn solve_stream_mode(
    xi: f64,
    f_hat: &DVector<C64>,
    base: &BaseFlow,
    grid: &RadialGrid,
) -> Result<DVector<C64>> {
    check_len(f_hat.len(), grid)?;
    check_len(base.profile.len(), grid)?;
    let sys = ModeSystem::stream(xi, base, &RadialOps::new(grid))?;
    Ok(sys.solve(f_hat))
}

pub fn solve_swirl_mode(
    xi: f64,
    ftheta_hat: &DVector<C64>,
    base: &BaseFlow,
    grid: &RadialGrid,
) -> Result<DVector<C64>> {
    check_len(ftheta_hat.len(), grid)?;
    check_len(base.profile.len(), grid)?;
    let sys = ModeSystem::swirl(xi, base, &RadialOps::new(grid))?;
    Ok(sys.solve(ftheta_hat))
}

/// Two sides of an integral identity evaluated by quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Balance {
    pub lhs: C64,
    pub rhs: C64,
}

impl Balance {
    pub fn residual(&self) -> f64 {
        (self.lhs - self.rhs).norm()
    }

    /// Residual relative to the larger side; zero when both sides vanish.
    pub fn relative(&self) -> f64 {
        let scale = self.lhs.norm().max(self.rhs.norm());
        if scale == 0.0 {
            0.0
        } else {
            self.residual() / scale
        }
    }
}

/// `int_0^1 a conj(b) r dr`
fn inner_r(a: &DVector<C64>, b: &DVector<C64>, grid: &RadialGrid) -> C64 {
    a.iter()
        .zip(b.iter())
        .zip(grid.quad_weights.iter())
        .fold(C64::new(0.0, 0.0), |acc, ((x, y), w)| acc + x * y.conj() * *w)
}

/// `(1/r) d/dr (r g)` at the nodes.
pub(crate) fn div_r(g: &DVector<C64>, grid: &RadialGrid) -> DVector<C64> {
    let dg = real_times_complex(&grid.d1, g);
    DVector::from_fn(g.len(), |i, _| dg[i] + g[i] / grid.nodes[i])
}

/// Stream-side convective dissipation terms
/// `(int U |(r psi)'|^2 / r dr, int U |psi|^2 r dr)`.
fn convective_terms(psi: &DVector<C64>, base: &BaseFlow, grid: &RadialGrid) -> (f64, f64) {
    let dr = div_r(psi, grid);
    let a = grid.integrate_r(&DVector::from_fn(psi.len(), |i, _| {
        base.profile[i] * dr[i].norm_sqr()
    }));
    let b = grid.integrate_r(&DVector::from_fn(psi.len(), |i, _| {
        base.profile[i] * psi[i].norm_sqr()
    }));
    (a, b)
}

/// Balance for a stream mode forced by `f = i xi F^r`:
/// `xi A + xi^3 B = -Re int xi F^r conj(psi) r dr`.
pub fn energy_balance_radial(
    psi: &DVector<C64>,
    fr_hat: &DVector<C64>,
    xi: f64,
    base: &BaseFlow,
    grid: &RadialGrid,
) -> Balance {
    let (a, b) = convective_terms(psi, base, grid);
    let lhs = xi * a + xi.powi(3) * b;
    let rhs = -(xi * inner_r(fr_hat, psi, grid)).re;
    Balance {
        lhs: lhs.into(),
        rhs: rhs.into(),
    }
}

/// `|LHS - RHS|` of [`energy_balance_radial`].
pub fn energy_identity_residual(
    psi: &DVector<C64>,
    fr_hat: &DVector<C64>,
    xi: f64,
    base: &BaseFlow,
    grid: &RadialGrid,
) -> f64 {
    energy_balance_radial(psi, fr_hat, xi, base, grid).residual()
}

/// Balance for a stream mode forced by `f = -d/dr F^z`:
/// `xi A + xi^3 B = -Im int F^z d/dr(r conj(psi)) dr`.
pub fn energy_balance_axial(
    psi: &DVector<C64>,
    fz_hat: &DVector<C64>,
    xi: f64,
    base: &BaseFlow,
    grid: &RadialGrid,
) -> Balance {
    let (a, b) = convective_terms(psi, base, grid);
    let lhs = xi * a + xi.powi(3) * b;
    let dr = div_r(psi, grid);
    let rhs = -inner_r(fz_hat, &dr, grid).im;
    Balance {
        lhs: lhs.into(),
        rhs: rhs.into(),
    }
}

fn swirl_lhs(v: &DVector<C64>, xi: f64, base: &BaseFlow, grid: &RadialGrid) -> C64 {
    let dr = div_r(v, grid);
    let conv = grid.integrate_r(&DVector::from_fn(v.len(), |i, _| {
        base.profile[i] * v[i].norm_sqr()
    }));
    let grad = grid.integrate_r(&dr.map(|c| c.norm_sqr()));
    let mass = grid.integrate_r(&v.map(|c| c.norm_sqr()));
    C64::new(grad + xi * xi * mass, xi * conv)
}

/// Swirl balance `i xi int U |v|^2 r + int |(r v)'|^2 / r + xi^2 int |v|^2 r = int F conj(v) r`.
pub fn swirl_balance(
    v: &DVector<C64>,
    ftheta_hat: &DVector<C64>,
    xi: f64,
    base: &BaseFlow,
    grid: &RadialGrid,
) -> Balance {
    Balance {
        lhs: swirl_lhs(v, xi, base, grid),
        rhs: inner_r(ftheta_hat, v, grid),
    }
}

/// Swirl balance for a forcing in divergence form `F = i xi G`.
pub fn swirl_balance_divergence(
    v: &DVector<C64>,
    gtheta_hat: &DVector<C64>,
    xi: f64,
    base: &BaseFlow,
    grid: &RadialGrid,
) -> Balance {
    Balance {
        lhs: swirl_lhs(v, xi, base, grid),
        rhs: C64::new(0.0, xi) * inner_r(gtheta_hat, v, grid),
    }
}

/// `int |L g|^2 r + xi^2 int |(r g)'|^2 / r + xi^4 int |g|^2 r`, the left side
/// of the uniform a priori bounds.
pub fn a_priori_functional(g: &DVector<C64>, xi: f64, ops: &RadialOps, grid: &RadialGrid) -> f64 {
    let lg = real_times_complex(&ops.l, g);
    let dr = div_r(g, grid);
    grid.integrate_r(&lg.map(|c| c.norm_sqr()))
        + xi * xi * grid.integrate_r(&dr.map(|c| c.norm_sqr()))
        + xi.powi(4) * grid.integrate_r(&g.map(|c| c.norm_sqr()))
}

/// `int |g|^2 r dr`
pub fn mass_r(g: &DVector<C64>, grid: &RadialGrid) -> f64 {
    grid.integrate_r(&g.map(|c| c.norm_sqr()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cplx(v: DVector<f64>) -> DVector<C64> {
        v.map(C64::from)
    }

    fn manufactured(r: f64) -> f64 {
        r.powi(3) * (1.0 - r).powi(2)
    }

    #[test]
    fn base_flow_profile() {
        let g = RadialGrid::new(32).unwrap();
        let b = hagen_poiseuille(std::f64::consts::PI, &g).unwrap();
        assert!(b.profile[g.len() - 1].abs() < 1e-15);
        assert!((g.interpolate(b.profile.as_slice(), 0.0) - 2.0).abs() < 1e-12);
        let b = hagen_poiseuille(1.0, &g).unwrap();
        let flux = 2.0 * std::f64::consts::PI * g.integrate_r(&b.profile);
        assert!((flux - 1.0).abs() < 1e-13);
        assert!(hagen_poiseuille(0.0, &g).is_err());
        assert!(hagen_poiseuille(-2.0, &g).is_err());
    }

    #[test]
    fn stream_rhs_cases() {
        let g = RadialGrid::new(16).unwrap();
        let zero = DVector::zeros(16);
        assert_eq!(stream_rhs(&zero, &zero, 2.0, &g).unwrap(), zero);
        let fr = cplx(g.sample(|r| r * r + 1.0));
        assert!(stream_rhs(&fr, &zero, 0.0, &g).unwrap().camax() == 0.0);
        let fz = cplx(g.sample(|r| r));
        let out = stream_rhs(&zero, &fz, 3.0, &g).unwrap();
        assert!(out.iter().all(|c| (c - C64::new(-1.0, 0.0)).norm() < 1e-12));
        assert!(stream_rhs(&DVector::zeros(15), &zero, 0.0, &g).is_err());
    }

    #[test]
    fn stream_manufactured_xi_zero() {
        let g = RadialGrid::new(64).unwrap();
        let b = hagen_poiseuille(10.0, &g).unwrap();
        let f = cplx(g.sample(|r| 90.0 - 192.0 * r));
        let psi = solve_stream_mode(0.0, &f, &b, &g).unwrap();
        let err = (psi - cplx(g.sample(manufactured))).camax();
        assert!(err < 1e-8, "{err:e}");
    }

    #[test]
    fn homogeneous_problems_have_zero_solution() {
        let g = RadialGrid::new(32).unwrap();
        let b = hagen_poiseuille(50.0, &g).unwrap();
        let zero = DVector::zeros(32);
        for xi in [0.0, 0.5, 4.0] {
            assert_eq!(solve_stream_mode(xi, &zero, &b, &g).unwrap().camax(), 0.0);
            assert_eq!(solve_swirl_mode(xi, &zero, &b, &g).unwrap().camax(), 0.0);
        }
    }

    #[test]
    fn stream_round_trip_at_xi_one() {
        let g = RadialGrid::new(48).unwrap();
        let b = hagen_poiseuille(10.0, &g).unwrap();
        let ops = RadialOps::new(&g);
        let sys = ModeSystem::stream(1.0, &b, &ops).unwrap();
        let target = cplx(g.sample(manufactured));
        let rhs = sys.apply(&target);
        let psi = sys.solve(&rhs);
        assert!((psi - target).camax() < 1e-8);
    }

    #[test]
    fn swirl_manufactured_and_round_trip() {
        let g = RadialGrid::new(64).unwrap();
        let b = hagen_poiseuille(10.0, &g).unwrap();
        let f = DVector::from_element(64, C64::new(3.0, 0.0));
        let v = solve_swirl_mode(0.0, &f, &b, &g).unwrap();
        assert!((v - cplx(g.sample(|r| r * (1.0 - r)))).camax() < 1e-8);

        let ops = RadialOps::new(&g);
        let sys = ModeSystem::swirl(2.0, &b, &ops).unwrap();
        let target = cplx(g.sample(|r| r * (1.0 - r)));
        let v = sys.solve(&sys.apply(&target));
        assert!((v - target).camax() < 1e-8);
    }

    #[test]
    fn boundary_functionals_hold_after_solve() {
        let g = RadialGrid::new(64).unwrap();
        let b = hagen_poiseuille(100.0, &g).unwrap();
        let ops = RadialOps::new(&g);
        let f = cplx(g.sample(|r| (3.0 * r).cos() + r));
        for xi in [0.0, 0.3, 2.0, 20.0] {
            let sys = ModeSystem::stream(xi, &b, &ops).unwrap();
            let psi = sys.solve(&f);
            let (a0, a2) = ops.axis.apply_complex(&psi);
            let (w0, w1) = ops.wall.apply_complex(&psi);
            let scale = psi.camax().max(1e-300);
            for c in [a0, a2, w0, w1] {
                assert!(c.norm() / scale < 1e-8, "xi={xi} {c}");
            }
            assert!(sys.residual(&psi, &f) < 1e-8, "xi={xi}");
        }
    }

    #[test]
    fn identity_trivial_cases() {
        let g = RadialGrid::new(16).unwrap();
        let b = hagen_poiseuille(10.0, &g).unwrap();
        let psi = cplx(g.sample(manufactured));
        let fr = cplx(g.sample(|r| r));
        assert_eq!(energy_identity_residual(&psi, &fr, 0.0, &b, &g), 0.0);
        let zero = DVector::zeros(16);
        assert_eq!(energy_identity_residual(&zero, &zero, 1.0, &b, &g), 0.0);
    }

    #[test]
    fn identities_hold_for_solved_modes() {
        let g = RadialGrid::new(64).unwrap();
        let b = hagen_poiseuille(10.0, &g).unwrap();
        let ops = RadialOps::new(&g);
        let fr = DVector::from_fn(64, |i, _| {
            let r = g.nodes[i];
            C64::new(r * (1.0 - r * r), 0.5 * r * r)
        });
        let xi = 1.0;
        let sys = ModeSystem::stream(xi, &b, &ops).unwrap();
        let zero = DVector::zeros(64);
        let psi = sys.solve(&stream_rhs(&fr, &zero, xi, &g).unwrap());
        let bal = energy_balance_radial(&psi, &fr, xi, &b, &g);
        assert!(bal.relative() < 1e-6, "{bal:?}");

        let fz = fr.map(|c| c + C64::new(0.3, 0.0));
        let psi = sys.solve(&stream_rhs(&zero, &fz, xi, &g).unwrap());
        let bal = energy_balance_axial(&psi, &fz, xi, &b, &g);
        assert!(bal.relative() < 1e-6, "{bal:?}");

        let sw = ModeSystem::swirl(xi, &b, &ops).unwrap();
        let v = sw.solve(&fr);
        let bal = swirl_balance(&v, &fr, xi, &b, &g);
        assert!(bal.relative() < 1e-6, "{bal:?}");
        let rhs = &fr * C64::new(0.0, xi);
        let v = sw.solve(&rhs);
        let bal = swirl_balance_divergence(&v, &fr, xi, &b, &g);
        assert!(bal.relative() < 1e-6, "{bal:?}");
    }
}
