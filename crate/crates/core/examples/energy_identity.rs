//! Energy balances of solved modes for a few frequencies and fluxes.

use nalgebra::DVector;
use num_complex::Complex64;
use pipeflow::analysis::sampler::ForcingSampler;
use pipeflow::grid::RadialGrid;
use pipeflow::mode_solver::{
    energy_balance_axial, energy_balance_radial, hagen_poiseuille, stream_rhs, swirl_balance, ModeSystem, RadialOps,
};

fn main() -> pipeflow::error::Result<()> {
    let g = RadialGrid::new(64)?;
    let ops = RadialOps::new(&g);
    let mut sampler = ForcingSampler::new(7);
    let fr: DVector<Complex64> = DVector::from_vec(sampler.radial_profile(&g, true)).map(Complex64::from);
    let fz: DVector<Complex64> = DVector::from_vec(sampler.radial_profile(&g, false)).map(Complex64::from);
    let zero = DVector::zeros(g.len());

    println!("{:>6} {:>5} {:>12} {:>12} {:>12}", "phi", "xi", "radial", "axial", "swirl");
    for phi in [10.0, 100.0, 1000.0] {
        let base = hagen_poiseuille(phi, &g)?;
        for xi in [0.2, 1.0, 5.0] {
            let stream = ModeSystem::stream(xi, &base, &ops)?;
            let swirl = ModeSystem::swirl(xi, &base, &ops)?;
            let a = stream.solve(&stream_rhs(&fr, &zero, xi, &g)?);
            let b = stream.solve(&stream_rhs(&zero, &fz, xi, &g)?);
            let v = swirl.solve(&fr);
            println!(
                "{phi:>6} {xi:>5} {:>12.2e} {:>12.2e} {:>12.2e}",
                energy_balance_radial(&a, &fr, xi, &base, &g).relative(),
                energy_balance_axial(&b, &fz, xi, &base, &g).relative(),
                swirl_balance(&v, &fr, xi, &base, &g).relative()
            );
        }
    }
    Ok(())
}
