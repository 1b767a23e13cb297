//! Single-mode solves against closed-form solutions, and the convergence of
//! a non-polynomial one as the radial grid is refined.

use nalgebra::DVector;
use num_complex::Complex64;
use pipeflow::grid::RadialGrid;
use pipeflow::mode_solver::{hagen_poiseuille, solve_stream_mode, solve_swirl_mode, ModeSystem, RadialOps};

fn cplx(v: DVector<f64>) -> DVector<Complex64> {
    v.map(Complex64::from)
}

fn main() -> pipeflow::error::Result<()> {
    let g = RadialGrid::new(64)?;
    let base = hagen_poiseuille(100.0, &g)?;

    // -L^2 psi = 90 - 192 r  has  psi = r^3 (1 - r)^2.
    let psi = solve_stream_mode(0.0, &cplx(g.sample(|r| 90.0 - 192.0 * r)), &base, &g)?;
    let err = (psi - cplx(g.sample(|r| r.powi(3) * (1.0 - r).powi(2)))).camax();
    println!("stream, xi = 0: max error {err:.2e}");

    // -L v = 3  has  v = r (1 - r).
    let v = solve_swirl_mode(0.0, &DVector::from_element(64, Complex64::new(3.0, 0.0)), &base, &g)?;
    let err = (v - cplx(g.sample(|r| r * (1.0 - r)))).camax();
    println!("swirl,  xi = 0: max error {err:.2e}");

    // psi = r sin(pi r)^2 at xi = 2: apply the operator, then solve it back.
    let exact = |r: f64| r * (std::f64::consts::PI * r).sin().powi(2);
    for n in [8, 12, 16, 24, 32] {
        let g = RadialGrid::new(n)?;
        let base = hagen_poiseuille(100.0, &g)?;
        let sys = ModeSystem::stream(2.0, &base, &RadialOps::new(&g))?;
        let target = cplx(g.sample(exact));
        let rhs = sys.apply(&target);
        let cond = sys.diagnostics(&target, &rhs).condition;
        let err = (sys.solve(&rhs) - target).camax();
        println!("n_r = {n:>2}: round-trip error {err:.2e}, condition {cond:.1e}");
    }
    Ok(())
}
