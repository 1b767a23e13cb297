//! Seeded random smooth forcings.
//!
//! Each component is a random polynomial in `r^2` (times `r` for the radial
//! and azimuthal components, so every sample is smooth across the axis)
//! multiplied by a smooth bump in `z` supported in `|z| < support` and
//! modulated by a random low-frequency cosine.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::grid::{ModeSet, RadialGrid};
use crate::norms::weighted_l2;
use crate::state::ForcingField;

/// Which forcing components a sample populates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Components {
    pub radial: bool,
    pub swirl: bool,
    pub axial: bool,
}

impl Components {
    pub const ALL: Self = Self {
        radial: true,
        swirl: true,
        axial: true,
    };
    pub const RADIAL: Self = Self {
        radial: true,
        swirl: false,
        axial: false,
    };
    pub const SWIRL: Self = Self {
        radial: false,
        swirl: true,
        axial: false,
    };
    pub const AXIAL: Self = Self {
        radial: false,
        swirl: false,
        axial: true,
    };
}

#[derive(Debug, Clone)]
pub struct ForcingSampler {
    rng: ChaCha8Rng,
    /// Half-width of the axial support.
    pub support: f64,
}

impl ForcingSampler {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            support: 2.0,
        }
    }

    fn coeffs(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.rng.gen_range(-1.0..1.0)).collect()
    }

    /// Random `p(r^2)` of degree 3 in `r^2`, times `r` when `odd`.
    pub fn radial_profile(&mut self, grid: &RadialGrid, odd: bool) -> Vec<f64> {
        let c = self.coeffs(4);
        grid.nodes
            .iter()
            .map(|&r| {
                let s = r * r;
                let p = c[0] + s * (c[1] + s * (c[2] + s * c[3]));
                if odd {
                    r * p
                } else {
                    p
                }
            })
            .collect()
    }

    /// Random bump in `z`, exactly zero for `|z| >= support`: a Gaussian of
    /// width about `0.15 support` tapered by `exp(1 - 1/(1 - (z/support)^2))`
    /// and modulated by `cos(k z + phase)`.
    pub fn axial_profile(&mut self, modes: &ModeSet) -> Vec<f64> {
        let support = self.support;
        let width = self.rng.gen_range(0.150..0.165) * support;
        let k = self.rng.gen_range(0.0..1.5);
        let phase = self.rng.gen_range(0.0..std::f64::consts::TAU);
        modes
            .z_nodes()
            .iter()
            .map(|&z| {
                let s = z / support;
                if s.abs() >= 1.0 {
                    0.0
                } else {
                    let taper = (1.0 - 1.0 / (1.0 - s * s)).exp();
                    (-(z * z) / (2.0 * width * width)).exp() * taper * (k * z + phase).cos()
                }
            })
            .collect()
    }

    fn component(&mut self, grid: &RadialGrid, modes: &ModeSet, odd: bool) -> DMatrix<f64> {
        let a = self.radial_profile(grid, odd);
        let b = self.axial_profile(modes);
        DMatrix::from_fn(grid.len(), modes.len(), |i, j| a[i] * b[j])
    }

    /// One random forcing with the selected components, scaled to unit
    /// weighted `L^2` norm.
    pub fn sample(&mut self, grid: &RadialGrid, modes: &ModeSet, which: Components) -> ForcingField {
        let mut f = ForcingField::zeros(grid.len(), modes.len());
        if which.radial {
            f.fr = self.component(grid, modes, true);
        }
        if which.swirl {
            f.ftheta = self.component(grid, modes, true);
        }
        if which.axial {
            f.fz = self.component(grid, modes, false);
        }
        let norm = forcing_norm(&f, grid, modes);
        if norm > 0.0 {
            f.scaled(1.0 / norm)
        } else {
            f
        }
    }

    /// `n` coefficients drawn uniformly from `[-1, 1)`.
    pub fn coefficients(&mut self, n: usize) -> Vec<f64> {
        self.coeffs(n)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.gen_range(lo..hi)
    }
}

/// The first sample of `seed` with all three components, scaled to norm
/// `phi^(1/96)`.
pub fn regime_forcing(phi: f64, seed: u64, grid: &RadialGrid, modes: &ModeSet) -> ForcingField {
    ForcingSampler::new(seed)
        .sample(grid, modes, Components::ALL)
        .scaled(phi.powf(1.0 / 96.0))
}

/// Weighted `L^2` norm over all three components.
pub fn forcing_norm(f: &ForcingField, grid: &RadialGrid, modes: &ModeSet) -> f64 {
    f.components()
        .iter()
        .map(|c| weighted_l2(c, grid, modes).map(|v| v * v).unwrap_or(f64::NAN))
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_sample() {
        let g = RadialGrid::new(16).unwrap();
        let m = ModeSet::new(64, 8.0).unwrap();
        let a = ForcingSampler::new(7).sample(&g, &m, Components::ALL);
        let b = ForcingSampler::new(7).sample(&g, &m, Components::ALL);
        assert_eq!(a, b);
        let c = ForcingSampler::new(8).sample(&g, &m, Components::ALL);
        assert_ne!(a, c);
    }

    #[test]
    fn unit_norm_and_support() {
        let g = RadialGrid::new(16).unwrap();
        let m = ModeSet::new(128, 8.0).unwrap();
        let mut s = ForcingSampler::new(1);
        let f = s.sample(&g, &m, Components::RADIAL);
        assert!((forcing_norm(&f, &g, &m) - 1.0).abs() < 1e-12);
        assert_eq!(f.fz.amax(), 0.0);
        let z = m.z_nodes();
        for (j, zj) in z.iter().enumerate() {
            if zj.abs() >= 2.0 {
                assert_eq!(f.fr.column(j).amax(), 0.0);
            }
        }
    }
}
