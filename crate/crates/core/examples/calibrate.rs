//! Calibrated solve constants as the flux varies.

use pipeflow::config::FlowConfig;
use pipeflow::nonlinear::calibrate;

fn main() -> pipeflow::error::Result<()> {
    for phi in [10.0, 100.0, 1000.0, 10000.0] {
        let cfg = FlowConfig { phi, n_z: 128, ..FlowConfig::default() };
        let c = calibrate(&cfg, 20)?;
        println!("phi = {phi:>7}: c1 = {:.4}  c2 = {:.4}", c.c1_cal, c.c2_cal);
    }
    Ok(())
}
