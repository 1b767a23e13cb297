use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use pipeflow::analysis::{check_hlp, check_poincare};
use pipeflow::fields::velocity_from_stream;
use pipeflow::grid::{ModeSet, RadialGrid};
use pipeflow::mode_solver::hagen_poiseuille;
use pipeflow::nonlinear::LinearSolver;
use pipeflow::state::{flux, ForcingField};
use pipeflow::transform::{forward_transform, inverse_transform};

const NR: usize = 16;
const NZ: usize = 32;

fn solver() -> &'static LinearSolver {
    static S: OnceLock<LinearSolver> = OnceLock::new();
    S.get_or_init(|| {
        let g = RadialGrid::new(NR).unwrap();
        let m = ModeSet::new(NZ, 4.0).unwrap();
        LinearSolver::new(hagen_poiseuille(30.0, &g).unwrap(), g, m).unwrap()
    })
}

fn field() -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-1.0f64..1.0, NR * NZ).prop_map(|v| DMatrix::from_vec(NR, NZ, v))
}

fn forcing() -> impl Strategy<Value = ForcingField> {
    (field(), field(), field()).prop_map(|(fr, ftheta, fz)| ForcingField { fr, ftheta, fz })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn transform_is_a_projection(f in field()) {
        let m = &solver().modes;
        let c = forward_transform(&f, m).unwrap();
        let back = forward_transform(&inverse_transform(&c, m).unwrap(), m).unwrap();
        prop_assert!((back - c).camax() < 1e-13);
    }

    #[test]
    fn solutions_keep_reality_symmetry(f in forcing()) {
        let s = solver();
        let state = s.solve(&f).unwrap();
        let scale = state.psi_modes.camax().max(state.swirl_modes.camax()).max(1e-300);
        prop_assert!(state.reality_defect(&s.modes) / scale < 1e-12);
    }

    #[test]
    fn solve_is_linear(f in forcing(), g in forcing(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let s = solver();
        let lhs = s.solve(&f.scaled(a).add(&g.scaled(b))).unwrap();
        let rhs = s.solve(&f).unwrap().scaled(a).axpy(b, &s.solve(&g).unwrap());
        let diff = lhs.axpy(-1.0, &rhs);
        let scale = rhs.l2r(&s.grid, &s.modes).max(1e-300);
        prop_assert!(diff.l2r(&s.grid, &s.modes) / scale < 1e-10);
    }

    #[test]
    fn reconstructed_velocity_has_zero_flux(f in forcing()) {
        let s = solver();
        let v = velocity_from_stream(&s.solve(&f).unwrap(), &s.grid, &s.modes).unwrap();
        let scale = v.vz.amax().max(1e-300);
        for q in flux(&v.vz, &s.grid).unwrap() {
            prop_assert!(q.abs() / scale < 1e-10);
        }
    }

    #[test]
    fn quadrature_is_exact_for_monomials(m in 0usize..NR - 1) {
        let g = &solver().grid;
        let got = g.integrate_r(&g.sample(|r| r.powi(m as i32)));
        prop_assert!((got - 1.0 / (m as f64 + 2.0)).abs() < 1e-12);
    }

    #[test]
    fn radial_inequalities_hold(c in prop::collection::vec(-1.0f64..1.0, 1..7)) {
        let g = RadialGrid::new(32).unwrap();
        let p = |r: f64| c.iter().rev().fold(0.0, |acc, a| acc * r + a);
        let axis = g.sample(|r| r * p(r));
        let both = g.sample(|r| r * (1.0 - r) * p(r));
        prop_assert_eq!(check_poincare(&[axis.clone(), both], &g).violations(), 0);
        prop_assert_eq!(check_hlp(&[axis], &g).unwrap().violations(), 0);
    }
}

#[test]
fn zero_forcing_gives_zero_state() {
    let s = solver();
    let state = s.solve(&ForcingField::zeros(NR, NZ)).unwrap();
    assert_eq!(state.l2r(&s.grid, &s.modes), 0.0);
    let zero = DVector::<f64>::zeros(NR);
    assert_eq!(check_poincare(&[zero], &s.grid).violations(), 0);
}
