//! Quadrature checks of three families of one-dimensional radial inequalities.
//!
//! | family | inequality |
//! |--------|------------|
//! | `poincare` | `int g^2 r <= int (rg)'^2 / r`; with `g(0) = g(1) = 0` also `int (rg)'^2 / r <= (int (Lg)^2 r)^(1/2) (int g^2 r)^(1/2) <= int (Lg)^2 r` |
//! | `hardy` | for `g(0) = 0`: `int g^2 dr <= (1/2) int g'^2 (1 - r^2) dr` and `int g^2 r <= C int (rg)'^2 (1 - r^2) / r` |
//! | `interpolation` | `int g^2 r <= C (a^(2/3) b^(1/3) + a)` with `a = int (1-r^2) g^2 r`, `b = int (rg)'^2 / r`, and the analogue one derivative up |
//!
//! Samples are nodal values on a [`RadialGrid`]; derivatives are spectral, so
//! polynomial samples of degree below `n_r` are differentiated exactly.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::analysis::sampler::ForcingSampler;
use crate::error::{PipeError, Result};
use crate::grid::RadialGrid;
use crate::radial::{assemble_l, axis_rows};

/// Slack below which an inequality counts as violated.
pub const VIOLATION_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityCheck {
    pub name: String,
    pub checked: usize,
    /// Smallest `rhs - lhs`; `None` for the measured-constant forms.
    pub worst_slack: Option<f64>,
    pub violations: usize,
    /// Largest constant needed by any sample; `None` for the sharp forms.
    pub measured_constant: Option<f64>,
    /// Samples where the constant is undefined (both sides zero).
    pub degenerate: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub family: String,
    pub n_samples: usize,
    pub checks: Vec<InequalityCheck>,
}

impl InequalityReport {
    pub fn violations(&self) -> usize {
        self.checks.iter().map(|c| c.violations).sum()
    }

    pub fn worst_slack(&self) -> Option<f64> {
        self.checks
            .iter()
            .filter_map(|c| c.worst_slack)
            .fold(None, |acc, s| Some(acc.map_or(s, |a: f64| a.min(s))))
    }

    pub fn check(&self, name: &str) -> Option<&InequalityCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

struct Sharp {
    name: &'static str,
    checked: usize,
    worst: Option<f64>,
    violations: usize,
}

impl Sharp {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            checked: 0,
            worst: None,
            violations: 0,
        }
    }

    fn record(&mut self, lhs: f64, rhs: f64) {
        let slack = rhs - lhs;
        self.checked += 1;
        self.worst = Some(self.worst.map_or(slack, |w| w.min(slack)));
        if slack < -VIOLATION_SLACK {
            self.violations += 1;
        }
    }

    fn finish(self) -> InequalityCheck {
        InequalityCheck {
            name: self.name.to_string(),
            checked: self.checked,
            worst_slack: self.worst,
            violations: self.violations,
            measured_constant: None,
            degenerate: 0,
        }
    }
}

struct Measured {
    name: &'static str,
    checked: usize,
    constant: Option<f64>,
    degenerate: usize,
}

impl Measured {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            checked: 0,
            constant: None,
            degenerate: 0,
        }
    }

    /// Record the constant needed for `lhs <= C rhs`.
    fn record(&mut self, lhs: f64, rhs: f64) {
        self.checked += 1;
        if rhs > 0.0 {
            let c = lhs / rhs;
            self.constant = Some(self.constant.map_or(c, |m| m.max(c)));
        } else if lhs == 0.0 {
            self.degenerate += 1;
        } else {
            self.constant = Some(f64::INFINITY);
        }
    }

    fn finish(self) -> InequalityCheck {
        InequalityCheck {
            name: self.name.to_string(),
            checked: self.checked,
            worst_slack: None,
            violations: 0,
            measured_constant: self.constant,
            degenerate: self.degenerate,
        }
    }
}

/// Quadratures shared by the checkers.
struct Radial<'a> {
    grid: &'a RadialGrid,
    l: nalgebra::DMatrix<f64>,
    axis: DVector<f64>,
}

impl<'a> Radial<'a> {
    fn new(grid: &'a RadialGrid) -> Self {
        Self {
            grid,
            l: assemble_l(grid).matrix,
            axis: axis_rows(grid).first,
        }
    }

    fn at_axis(&self, g: &DVector<f64>) -> f64 {
        self.axis.dot(g)
    }

    fn at_wall(&self, g: &DVector<f64>) -> f64 {
        g[g.len() - 1]
    }

    /// `(1/r) (r g)'`
    fn div_r(&self, g: &DVector<f64>) -> DVector<f64> {
        let dg = &self.grid.d1 * g;
        DVector::from_fn(g.len(), |i, _| dg[i] + g[i] / self.grid.nodes[i])
    }

    fn weighted(&self, g: &DVector<f64>, w: impl Fn(f64) -> f64) -> f64 {
        let h = DVector::from_fn(g.len(), |i, _| w(self.grid.nodes[i]) * g[i] * g[i]);
        self.grid.integrate_r(&h)
    }

    fn plain(&self, g: &DVector<f64>, w: impl Fn(f64) -> f64) -> f64 {
        let h = DVector::from_fn(g.len(), |i, _| w(self.grid.nodes[i]) * g[i] * g[i]);
        self.grid.integrate(&h)
    }

    /// `int g^2 r`
    fn mass(&self, g: &DVector<f64>) -> f64 {
        self.weighted(g, |_| 1.0)
    }

    /// `int (rg)'^2 / r`
    fn grad(&self, g: &DVector<f64>) -> f64 {
        self.mass(&self.div_r(g))
    }

    /// `int (Lg)^2 r`
    fn lap(&self, g: &DVector<f64>) -> f64 {
        self.mass(&(&self.l * g))
    }
}

const AXIS_TOL: f64 = 1e-10;

/// Both Poincare-type forms. The second form is only evaluated on samples that
/// vanish at both ends.
pub fn check_poincare(samples: &[DVector<f64>], grid: &RadialGrid) -> InequalityReport {
    let q = Radial::new(grid);
    let mut first = Sharp::new("mass<=gradient");
    let mut middle = Sharp::new("gradient<=geometric-mean");
    let mut last = Sharp::new("gradient<=laplacian");
    for g in samples {
        let (m, d) = (q.mass(g), q.grad(g));
        first.record(m, d);
        if q.at_axis(g).abs() < AXIS_TOL && q.at_wall(g).abs() < AXIS_TOL {
            let lap = q.lap(g);
            middle.record(d, (lap * m).sqrt());
            last.record(d, lap);
        }
    }
    InequalityReport {
        family: "poincare".into(),
        n_samples: samples.len(),
        checks: vec![first.finish(), middle.finish(), last.finish()],
    }
}

/// Hardy-type forms: the sharp one with constant 1/2, and the measured constant of the
/// weighted form. Every sample must vanish on the axis.
pub fn check_hlp(samples: &[DVector<f64>], grid: &RadialGrid) -> Result<InequalityReport> {
    let q = Radial::new(grid);
    let mut sharp = Sharp::new("hlp-half");
    let mut weighted = Measured::new("hlp-weighted");
    for (k, g) in samples.iter().enumerate() {
        let g0 = q.at_axis(g);
        if g0.abs() > AXIS_TOL {
            return Err(PipeError::Input(format!(
                "sample {k} has g(0) = {g0:e}; the inequality needs g(0) = 0"
            )));
        }
        let dg = &grid.d1 * g;
        sharp.record(q.plain(g, |_| 1.0), 0.5 * q.plain(&dg, |r| 1.0 - r * r));
        weighted.record(q.mass(g), q.weighted(&q.div_r(g), |r| 1.0 - r * r));
    }
    Ok(InequalityReport {
        family: "hardy".into(),
        n_samples: samples.len(),
        checks: vec![sharp.finish(), weighted.finish()],
    })
}

/// Measured constants of both weighted interpolation forms.
pub fn check_weighted_interpolation(samples: &[DVector<f64>], grid: &RadialGrid) -> InequalityReport {
    let q = Radial::new(grid);
    let mut low = Measured::new("interpolation-mass");
    let mut high = Measured::new("interpolation-gradient");
    let wall = |r: f64| 1.0 - r * r;
    for g in samples {
        let a = q.weighted(g, wall);
        let b = q.grad(g);
        low.record(q.mass(g), a.powf(2.0 / 3.0) * b.powf(1.0 / 3.0) + a);
        let dr = q.div_r(g);
        let a2 = q.weighted(&dr, wall);
        high.record(b, a2.powf(2.0 / 3.0) * q.lap(g).powf(1.0 / 3.0) + a2);
    }
    InequalityReport {
        family: "interpolation".into(),
        n_samples: samples.len(),
        checks: vec![low.finish(), high.finish()],
    }
}

/// Boundary behaviour of a random polynomial family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyKind {
    /// `g = r p(r)`
    AxisZero,
    /// `g = r (1 - r) p(r)`
    BothZero,
}

/// `n` random polynomials `g = r p(r)` or `r (1-r) p(r)` with `p` of degree
/// `degree` and coefficients uniform in `[-1, 1)`.
pub fn polynomial_family(
    n: usize,
    degree: usize,
    kind: FamilyKind,
    seed: u64,
    grid: &RadialGrid,
) -> Vec<DVector<f64>> {
    let mut s = ForcingSampler::new(seed);
    (0..n)
        .map(|_| {
            let c = s.coefficients(degree + 1);
            grid.sample(|r| {
                let p = c.iter().rev().fold(0.0, |acc, a| acc * r + a);
                match kind {
                    FamilyKind::AxisZero => r * p,
                    FamilyKind::BothZero => r * (1.0 - r) * p,
                }
            })
        })
        .collect()
}

/// Polynomial degree of the standard families.
pub const FAMILY_DEGREE: usize = 6;

/// Run all three checkers on the standard families of `n` samples each:
/// alternating axis-zero and both-ends-zero polynomials for the Poincare
/// forms, and axis-zero polynomials led by the equality case `g = r` for the
/// other two.
pub fn inequality_suite(n: usize, seed: u64, grid: &RadialGrid) -> Result<[InequalityReport; 3]> {
    if n == 0 {
        return Err(PipeError::Input("inequality families need at least one sample".into()));
    }
    let axis = polynomial_family(n, FAMILY_DEGREE, FamilyKind::AxisZero, seed, grid);
    let both = polynomial_family(n, FAMILY_DEGREE, FamilyKind::BothZero, seed.wrapping_add(1), grid);
    let mixed: Vec<DVector<f64>> = (0..n)
        .map(|k| if k % 2 == 0 { axis[k].clone() } else { both[k].clone() })
        .collect();
    let mut hardy = axis.clone();
    hardy[0] = grid.sample(|r| r);
    Ok([
        check_poincare(&mixed, grid),
        check_hlp(&hardy, grid)?,
        check_weighted_interpolation(&axis, grid),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> RadialGrid {
        RadialGrid::new(32).unwrap()
    }

    #[test]
    fn poincare_on_linear_function() {
        let g = grid();
        let rep = check_poincare(&[g.sample(|r| r)], &g);
        let c = rep.check("mass<=gradient").unwrap();
        assert!((c.worst_slack.unwrap() - 1.75).abs() < 1e-12);
        // r does not vanish at the wall: the second form is skipped.
        assert_eq!(rep.check("gradient<=laplacian").unwrap().checked, 0);
    }

    #[test]
    fn zero_function_everywhere() {
        let g = grid();
        let zero = vec![DVector::zeros(32)];
        let p = check_poincare(&zero, &g);
        assert_eq!(p.violations(), 0);
        assert_eq!(p.worst_slack(), Some(0.0));
        let w = check_weighted_interpolation(&zero, &g);
        assert!(w.checks.iter().all(|c| c.degenerate == 1 && c.measured_constant.is_none()));
    }

    #[test]
    fn hlp_examples() {
        let g = grid();
        let rep = check_hlp(&[g.sample(|r| r)], &g).unwrap();
        assert!(rep.check("hlp-half").unwrap().worst_slack.unwrap().abs() < 1e-9);
        let rep = check_hlp(&[g.sample(|r| r * r)], &g).unwrap();
        let s = rep.check("hlp-half").unwrap().worst_slack.unwrap();
        assert!((s - 1.0 / 15.0).abs() < 1e-12, "{s}");
        assert!(check_hlp(&[g.sample(|r| 1.0 + r)], &g).is_err());
    }

    #[test]
    fn random_families_have_no_violations() {
        let g = grid();
        let both = polynomial_family(100, 5, FamilyKind::BothZero, 3, &g);
        let rep = check_poincare(&both, &g);
        assert_eq!(rep.violations(), 0);
        assert_eq!(rep.check("gradient<=laplacian").unwrap().checked, 100);
        let axis = polynomial_family(100, 5, FamilyKind::AxisZero, 4, &g);
        let rep = check_hlp(&axis, &g).unwrap();
        assert_eq!(rep.violations(), 0);
        assert!(rep.check("hlp-weighted").unwrap().measured_constant.unwrap().is_finite());
    }

    #[test]
    fn suite_includes_equality_case() {
        let g = grid();
        let [p, h, i] = inequality_suite(20, 5, &g).unwrap();
        assert_eq!(p.check("gradient<=laplacian").unwrap().checked, 10);
        assert!(h.check("hlp-half").unwrap().worst_slack.unwrap().abs() < 1e-9);
        assert_eq!(p.violations() + h.violations() + i.violations(), 0);
        assert!(inequality_suite(0, 5, &g).is_err());
    }

    #[test]
    fn interpolation_constant_of_simple_profile() {
        let g = grid();
        let rep = check_weighted_interpolation(&[g.sample(|r| r * (1.0 - r))], &g);
        for c in &rep.checks {
            let k = c.measured_constant.unwrap();
            assert!(k.is_finite() && k > 0.0);
        }
    }

    #[test]
    fn interpolation_constants_stable_under_refinement() {
        let (a, b) = (RadialGrid::new(32).unwrap(), RadialGrid::new(64).unwrap());
        let ca = check_weighted_interpolation(&polynomial_family(50, 5, FamilyKind::AxisZero, 9, &a), &a);
        let cb = check_weighted_interpolation(&polynomial_family(50, 5, FamilyKind::AxisZero, 9, &b), &b);
        for (x, y) in ca.checks.iter().zip(&cb.checks) {
            let (x, y) = (x.measured_constant.unwrap(), y.measured_constant.unwrap());
            assert!((x / y - 1.0).abs() < 0.2);
        }
    }
}
