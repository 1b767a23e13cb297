//! Phi-scaling sweeps of the linear estimates.
//!
//! For each case a random family of forcings is pushed through the linear
//! solution map at every flux in the sweep. The worst output/input ratio is
//! normalized by `phi^exponent`; an upper bound with that exponent holds
//! uniformly iff the normalized ratio stays bounded.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::analysis::sampler::{forcing_norm, Components, ForcingSampler};
use crate::config::FlowConfig;
use crate::error::{PipeError, Result};
use crate::fields::{dz_field, velocity_from_stream};
use crate::mode_solver::hagen_poiseuille;
use crate::nonlinear::LinearSolver;
use crate::norms::{sobolev_norm_order, weighted_l2, weighted_l2_modes, SobolevOrder};
use crate::state::ForcingField;
use crate::transform::dz_modes;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepCase {
    /// `|(v^r, v^z)|_{L^2}` against `|F^r|`.
    RadialToMeridionalL2,
    /// `|(v^r, v^z)|_{H^{19/12}}` against `|F^r|`.
    RadialToMeridionalH1912,
    /// `|v^r|_{L^2}` against `|F^z|`.
    AxialToRadialL2,
    /// `|v^r|_{H^{19/12}}` against `|F^z|`.
    AxialToRadialH1912,
    /// `|d_z v^theta|_{L^2}` against `|F^theta|`.
    SwirlToDzSwirlL2,
    /// `|v^theta|_{L^2}` against `|G^theta|` for the forcing `F^theta = d_z G^theta`.
    DivergenceSwirlL2,
}

impl SweepCase {
    pub const ALL: [SweepCase; 6] = [
        SweepCase::RadialToMeridionalL2,
        SweepCase::RadialToMeridionalH1912,
        SweepCase::AxialToRadialL2,
        SweepCase::AxialToRadialH1912,
        SweepCase::SwirlToDzSwirlL2,
        SweepCase::DivergenceSwirlL2,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Self::RadialToMeridionalL2 => "Fr→v:L2",
            Self::RadialToMeridionalH1912 => "Fr→v:H19/12",
            Self::AxialToRadialL2 => "Fz→vr:L2",
            Self::AxialToRadialH1912 => "Fz→vr:H19/12",
            Self::SwirlToDzSwirlL2 => "Ftheta→dzvtheta:L2",
            Self::DivergenceSwirlL2 => "Gtheta→vtheta:L2",
        }
    }

    /// Exponent `e` in `output <= C phi^e input`.
    pub fn exponent(self) -> f64 {
        match self {
            Self::RadialToMeridionalL2 => -2.0 / 3.0,
            Self::RadialToMeridionalH1912 => -1.0 / 30.0,
            Self::AxialToRadialL2 => -1.0 / 2.0,
            Self::AxialToRadialH1912 => -1.0 / 40.0,
            Self::SwirlToDzSwirlL2 => -1.0 / 3.0,
            Self::DivergenceSwirlL2 => -1.0 / 3.0,
        }
    }

    fn components(self) -> Components {
        match self {
            Self::RadialToMeridionalL2 | Self::RadialToMeridionalH1912 => Components::RADIAL,
            Self::AxialToRadialL2 | Self::AxialToRadialH1912 => Components::AXIAL,
            Self::SwirlToDzSwirlL2 | Self::DivergenceSwirlL2 => Components::SWIRL,
        }
    }

    pub fn supported_tags() -> String {
        Self::ALL.map(|c| c.tag()).join(", ")
    }
}

impl fmt::Display for SweepCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for SweepCase {
    type Err = PipeError;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().replace("->", "→");
        Self::ALL
            .into_iter()
            .find(|c| c.tag() == norm)
            .ok_or_else(|| PipeError::UnknownCase {
                tag: s.to_string(),
                supported: Self::supported_tags(),
            })
    }
}

/// One `(phi, sample)` cell of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub phi: f64,
    pub sample: usize,
    pub input_norm: f64,
    pub output_norm: f64,
    pub ratio: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub case: String,
    pub claimed_exponent: f64,
    pub seed: u64,
    pub n_samples: usize,
    pub phis: Vec<f64>,
    pub worst_ratios: Vec<f64>,
    /// `worst_ratio * phi^(-claimed_exponent)`
    pub normalized: Vec<f64>,
    /// Least-squares slope of `log(worst_ratio)` against `log(phi)`.
    pub slope: f64,
    /// `max / min` of the normalized ratios.
    pub spread: f64,
    /// Largest normalized ratio divided by the one at the smallest flux.
    pub growth: f64,
    pub failures: usize,
    pub cells: Vec<SweepCell>,
}

impl ScalingReport {
    /// One row per cell: `case,phi,sample,input_norm,output_norm,ratio,error`.
    pub fn cells_csv(&self) -> String {
        let mut out = String::from("case,phi,sample,input_norm,output_norm,ratio,error\n");
        for c in &self.cells {
            out.push_str(&format!(
                "{},{:.16e},{},{:.16e},{:.16e},{:.16e},{}\n",
                self.case,
                c.phi,
                c.sample,
                c.input_norm,
                c.output_norm,
                c.ratio,
                c.error.as_deref().unwrap_or("")
            ));
        }
        out
    }
}

/// Least-squares slope and intercept of `y` against `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

fn measure(case: SweepCase, f: &ForcingField, solver: &LinearSolver) -> Result<(f64, f64)> {
    let (grid, modes) = (&solver.grid, &solver.modes);
    match case {
        SweepCase::DivergenceSwirlL2 => {
            let g = f;
            let mut forced = ForcingField::zeros(grid.len(), modes.len());
            forced.ftheta = dz_field(&g.ftheta, modes)?;
            let s = solver.solve(&forced)?;
            Ok((
                weighted_l2(&g.ftheta, grid, modes)?,
                weighted_l2_modes(&s.swirl_modes, grid, modes),
            ))
        }
        _ => {
            let s = solver.solve(f)?;
            let input = forcing_norm(f, grid, modes);
            let v = velocity_from_stream(&s, grid, modes)?;
            let out = match case {
                SweepCase::RadialToMeridionalL2 => {
                    sobolev_norm_order(&v.meridional(), SobolevOrder::L2, grid, modes)?
                }
                SweepCase::RadialToMeridionalH1912 => {
                    sobolev_norm_order(&v.meridional(), SobolevOrder::H19Over12, grid, modes)?
                }
                SweepCase::AxialToRadialL2 => weighted_l2(&v.vr, grid, modes)?,
                SweepCase::AxialToRadialH1912 => {
                    sobolev_norm_order(&v.radial_only(), SobolevOrder::H19Over12, grid, modes)?
                }
                SweepCase::SwirlToDzSwirlL2 => {
                    weighted_l2_modes(&dz_modes(&s.swirl_modes, modes), grid, modes)
                }
                SweepCase::DivergenceSwirlL2 => unreachable!(),
            };
            Ok((input, out))
        }
    }
}

/// Sweep `case` over `phis` with `n_samples` forcings drawn from the
/// configuration seed; the same forcings are used at every flux.
pub fn phi_sweep(case: &str, phis: &[f64], n_samples: usize, config: &FlowConfig) -> Result<ScalingReport> {
    let case: SweepCase = case.parse()?;
    config.validate()?;
    if phis.len() < 3 {
        return Err(PipeError::Input("a sweep needs at least three flux values".into()));
    }
    if phis.windows(2).any(|w| !(w[0] < w[1])) || phis.iter().any(|p| !(*p > 0.0)) {
        return Err(PipeError::Input("flux values must be positive and increasing".into()));
    }
    if n_samples == 0 {
        return Err(PipeError::Input("a sweep needs at least one sample".into()));
    }
    let grid = config.radial_grid()?;
    let modes = config.mode_set()?;
    let mut cells = Vec::new();
    let mut worst_ratios = Vec::new();
    for &phi in phis {
        let solver = LinearSolver::new(hagen_poiseuille(phi, &grid)?, grid.clone(), modes.clone());
        let mut sampler = ForcingSampler::new(config.seed);
        let mut worst: f64 = 0.0;
        for sample in 0..n_samples {
            let f = sampler.sample(&grid, &modes, case.components());
            let result = solver.as_ref().map_err(|e| e.to_string()).and_then(|s| {
                measure(case, &f, s).map_err(|e| e.to_string())
            });
            let cell = match result {
                Ok((input, output)) => {
                    let ratio = output / input;
                    worst = worst.max(ratio);
                    SweepCell {
                        phi,
                        sample,
                        input_norm: input,
                        output_norm: output,
                        ratio,
                        error: None,
                    }
                }
                Err(e) => SweepCell {
                    phi,
                    sample,
                    input_norm: f64::NAN,
                    output_norm: f64::NAN,
                    ratio: f64::NAN,
                    error: Some(e),
                },
            };
            cells.push(cell);
        }
        worst_ratios.push(if worst > 0.0 { worst } else { f64::NAN });
    }
    let e = case.exponent();
    let normalized: Vec<f64> = phis
        .iter()
        .zip(&worst_ratios)
        .map(|(p, w)| w * p.powf(-e))
        .collect();
    let lx: Vec<f64> = phis.iter().map(|p| p.ln()).collect();
    let ly: Vec<f64> = worst_ratios.iter().map(|w| w.ln()).collect();
    let (slope, _) = linear_fit(&lx, &ly);
    let max = normalized.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = normalized.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(ScalingReport {
        case: case.tag().to_string(),
        claimed_exponent: e,
        seed: config.seed,
        n_samples,
        phis: phis.to_vec(),
        worst_ratios,
        spread: max / min,
        growth: max / normalized[0],
        normalized,
        slope,
        failures: cells.iter().filter(|c| c.error.is_some()).count(),
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tags_round_trip_with_both_arrows() {
        for c in SweepCase::ALL {
            assert_eq!(c.tag().parse::<SweepCase>().unwrap(), c);
            assert_eq!(c.tag().replace('→', "->").parse::<SweepCase>().unwrap(), c);
        }
    }

    #[test]
    fn unknown_tag_lists_supported() {
        let err = phi_sweep("Fx→v:L2", &[1.0, 2.0, 3.0], 1, &FlowConfig::default()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("Fr→v:L2") && msg.contains("Gtheta→vtheta:L2"), "{msg}");
    }

    #[test]
    fn linear_fit_recovers_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 - 0.5 * v).collect();
        let (s, b) = linear_fit(&x, &y);
        assert!((s + 0.5).abs() < 1e-14 && (b - 2.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_short_sweeps() {
        assert!(phi_sweep("Fr→v:L2", &[10.0, 100.0], 1, &FlowConfig::default()).is_err());
        assert!(phi_sweep("Fr→v:L2", &[100.0, 10.0, 1000.0], 1, &FlowConfig::default()).is_err());
    }

    #[test]
    fn small_sweep_is_deterministic() {
        let cfg = FlowConfig {
            n_r: 16,
            n_z: 32,
            half_period: 6.0,
            ..FlowConfig::default()
        };
        let a = phi_sweep("Fz->vr:L2", &[10.0, 100.0, 1000.0], 2, &cfg).unwrap();
        let b = phi_sweep("Fz→vr:L2", &[10.0, 100.0, 1000.0], 2, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.cells.len(), 6);
        assert_eq!(a.failures, 0);
        assert!(a.worst_ratios.iter().all(|w| *w > 0.0));
        assert_eq!(a.cells_csv().lines().count(), 7);
    }
}
