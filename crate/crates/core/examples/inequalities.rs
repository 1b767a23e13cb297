//! Radial inequality checks on random polynomial families, at two radial
//! resolutions.

use pipeflow::analysis::inequality_suite;
use pipeflow::grid::RadialGrid;

fn main() -> pipeflow::error::Result<()> {
    for n in [32, 64, 128] {
        let grid = RadialGrid::new(n)?;
        println!("n_r = {n}");
        for rep in inequality_suite(100, 1729, &grid)? {
            for c in &rep.checks {
                match (c.worst_slack, c.measured_constant) {
                    (Some(s), _) => println!(
                        "  {:<14} {:<26} checked {:>3}  violations {}  worst slack {s:.3e}",
                        rep.family, c.name, c.checked, c.violations
                    ),
                    (None, k) => println!(
                        "  {:<14} {:<26} checked {:>3}  constant {}",
                        rep.family,
                        c.name,
                        c.checked,
                        k.map_or("-".into(), |k| format!("{k:.6}"))
                    ),
                }
            }
        }
    }
    Ok(())
}
