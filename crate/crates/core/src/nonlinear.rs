//! Fixed-point iteration for the full steady problem.
//!
//! With `T` the solution map of the linearized problem around
//! Hagen-Poiseuille flow, the iteration is
//!
//! ```text
//! Psi_0     = T(F)
//! Psi_{n+1} = Psi_n + relaxation * (Psi_0 + T(F*_n, F^theta_n) - Psi_n)
//! ```
//!
//! where `(F*_n, F^theta_n)` is the quadratic forcing of the velocity of
//! `Psi_n`. Every iterate is checked against the four bounds of the invariant
//! set `S`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::sampler::{forcing_norm, Components, ForcingSampler};
use crate::config::FlowConfig;
use crate::error::{PipeError, Result};
use crate::fields::{check_field, dr_field, dz_field, nonlinear_forcing, over_r, velocity_from_stream};
use crate::grid::{ModeSet, RadialGrid};
use crate::mode_solver::{hagen_poiseuille, stream_rhs, BaseFlow, ModeDiagnostics, ModeSystem, RadialOps};
use crate::norms::{sobolev_norm_order, weighted_l2_modes, SobolevOrder};
use crate::radial::assemble_l;
use crate::state::{ForcingField, Modes, StreamState, VelocityField};
use crate::transform::{dz_modes, forward_transform};

type C64 = Complex64;

/// The linear solution map `T`, factored once for every independent mode.
#[derive(Debug, Clone)]
pub struct LinearSolver {
    pub grid: RadialGrid,
    pub modes: ModeSet,
    pub base: BaseFlow,
    stream: Vec<ModeSystem>,
    swirl: Vec<ModeSystem>,
}

fn column(a: &Modes, m: usize) -> DVector<C64> {
    DVector::from_iterator(a.nrows(), a.column(m).iter().copied())
}

impl LinearSolver {
    pub fn new(base: BaseFlow, grid: RadialGrid, modes: ModeSet) -> Result<Self> {
        let ops = RadialOps::new(&grid);
        let primary: Vec<usize> = (0..modes.nyquist()).collect();
        let systems: Vec<(ModeSystem, ModeSystem)> = primary
            .par_iter()
            .map(|&m| {
                let xi = modes.frequencies[m];
                Ok((
                    ModeSystem::stream(xi, &base, &ops)?,
                    ModeSystem::swirl(xi, &base, &ops)?,
                ))
            })
            .collect::<Result<_>>()?;
        let (stream, swirl) = systems.into_iter().unzip();
        Ok(Self {
            grid,
            modes,
            base,
            stream,
            swirl,
        })
    }

    pub fn from_config(cfg: &FlowConfig) -> Result<Self> {
        cfg.validate()?;
        let grid = cfg.radial_grid()?;
        let base = hagen_poiseuille(cfg.phi, &grid)?;
        Self::new(base, grid, cfg.mode_set()?)
    }

    pub fn phi(&self) -> f64 {
        self.base.phi
    }

    /// `T` applied to forcing modes. Negative frequencies are filled by
    /// conjugation, so the result is the transform of a real field.
    pub fn solve_modes(&self, fr: &Modes, ftheta: &Modes, fz: &Modes) -> StreamState {
        let cols: Vec<(DVector<C64>, DVector<C64>)> = (0..self.stream.len())
            .into_par_iter()
            .map(|m| {
                let xi = self.modes.frequencies[m];
                let f = stream_rhs(&column(fr, m), &column(fz, m), xi, &self.grid)
                    .expect("forcing modes match the grid");
                (self.stream[m].solve(&f), self.swirl[m].solve(&column(ftheta, m)))
            })
            .collect();
        let (n_r, n_z) = (self.grid.len(), self.modes.len());
        let mut out = StreamState::zeros(n_r, n_z);
        for (m, (psi, v)) in cols.iter().enumerate() {
            out.psi_modes.set_column(m, psi);
            out.swirl_modes.set_column(m, v);
            if m > 0 {
                let mm = self.modes.mirror(m);
                out.psi_modes.set_column(mm, &psi.map(|c| c.conj()));
                out.swirl_modes.set_column(mm, &v.map(|c| c.conj()));
            }
        }
        out
    }

    pub fn solve(&self, f: &ForcingField) -> Result<StreamState> {
        for c in f.components() {
            check_field(c, &self.grid, &self.modes)?;
        }
        Ok(self.solve_modes(
            &forward_transform(&f.fr, &self.modes)?,
            &forward_transform(&f.ftheta, &self.modes)?,
            &forward_transform(&f.fz, &self.modes)?,
        ))
    }

    /// Solve and report `(stream, swirl)` diagnostics for every independent mode.
    pub fn solve_with_diagnostics(
        &self,
        f: &ForcingField,
    ) -> Result<(StreamState, Vec<(ModeDiagnostics, ModeDiagnostics)>)> {
        let state = self.solve(f)?;
        let fr = forward_transform(&f.fr, &self.modes)?;
        let fz = forward_transform(&f.fz, &self.modes)?;
        let ft = forward_transform(&f.ftheta, &self.modes)?;
        let diags = (0..self.stream.len())
            .map(|m| {
                let xi = self.modes.frequencies[m];
                let rhs = stream_rhs(&column(&fr, m), &column(&fz, m), xi, &self.grid)
                    .expect("forcing modes match the grid");
                (
                    self.stream[m].diagnostics(&column(&state.psi_modes, m), &rhs),
                    self.swirl[m].diagnostics(&column(&state.swirl_modes, m), &column(&ft, m)),
                )
            })
            .collect();
        Ok((state, diags))
    }
}

/// One application of `T` with a freshly factored solver.
pub fn linear_solve_t(
    f: &ForcingField,
    base: &BaseFlow,
    grid: &RadialGrid,
    modes: &ModeSet,
) -> Result<StreamState> {
    LinearSolver::new(base.clone(), grid.clone(), modes.clone())?.solve(f)
}

/// One bound of the invariant set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetSItem {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    /// `bound - value`; negative when violated.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetSCheck {
    pub items: Vec<SetSItem>,
    pub member: bool,
}

impl SetSCheck {
    pub fn margin(&self, name: &str) -> Option<f64> {
        self.items.iter().find(|i| i.name == name).map(|i| i.margin)
    }
}

/// Evaluate the four bounds
///
/// | name               | quantity                     | bound                  |
/// |--------------------|------------------------------|------------------------|
/// | `v_star_h19_12`    | `(v^r, v^z)` in `H^{19/12}`  | `2 c1 phi^(1/96)`      |
/// | `vr_l2`            | `v^r` in `L^2`               | `phi^(-15/32)`         |
/// | `vtheta_h19_12`    | `v^theta` in `H^{19/12}`     | `2 c2 phi^(1/96)`      |
/// | `dz_vtheta_l2`     | `d_z v^theta` in `L^2`       | `phi^(-5/16)`          |
pub fn set_s_check(
    state: &StreamState,
    config: &FlowConfig,
    grid: &RadialGrid,
    modes: &ModeSet,
) -> Result<SetSCheck> {
    let v = velocity_from_stream(state, grid, modes)?;
    let phi = config.phi;
    let h = SobolevOrder::H19Over12;
    let values = [
        sobolev_norm_order(&v.meridional(), h, grid, modes)?,
        sobolev_norm_order(&v.radial_only(), SobolevOrder::L2, grid, modes)?,
        sobolev_norm_order(&v.swirl_only(), h, grid, modes)?,
        weighted_l2_modes(&dz_modes(&state.swirl_modes, modes), grid, modes),
    ];
    let bounds = [
        2.0 * config.c1_cal * phi.powf(1.0 / 96.0),
        phi.powf(-15.0 / 32.0),
        2.0 * config.c2_cal * phi.powf(1.0 / 96.0),
        phi.powf(-5.0 / 16.0),
    ];
    let names = ["v_star_h19_12", "vr_l2", "vtheta_h19_12", "dz_vtheta_l2"];
    let items: Vec<SetSItem> = (0..4)
        .map(|k| SetSItem {
            name: names[k].to_string(),
            value: values[k],
            bound: bounds[k],
            margin: bounds[k] - values[k],
        })
        .collect();
    let member = items.iter().all(|i| i.margin >= 0.0);
    Ok(SetSCheck { items, member })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IterationStatus {
    Converged,
    MaxIter,
    Diverged,
}

impl IterationStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Converged => "converged",
            Self::MaxIter => "max-iter",
            Self::Diverged => "diverged",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Weighted `L^2` norm of `Psi_{n+1} - Psi_n`.
    pub residual: f64,
    pub set_s: SetSCheck,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationReport {
    pub phi: f64,
    pub seed: u64,
    pub relaxation: f64,
    pub status: IterationStatus,
    pub records: Vec<IterationRecord>,
}

impl IterationReport {
    pub fn residuals(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.residual).collect()
    }

    pub fn final_residual(&self) -> Option<f64> {
        self.records.last().map(|r| r.residual)
    }

    /// Largest ratio of consecutive residuals from iteration `from` on.
    pub fn worst_contraction(&self, from: usize) -> Option<f64> {
        let r = self.residuals();
        r.windows(2)
            .enumerate()
            .filter(|(k, w)| k + 1 >= from && w[0] > 0.0)
            .map(|(_, w)| w[1] / w[0])
            .fold(None, |acc: Option<f64>, x| Some(acc.map_or(x, |a| a.max(x))))
    }

    /// Residual history as CSV with header `iteration,residual,set_s_member`.
    pub fn residual_csv(&self) -> String {
        let mut out = String::from("iteration,residual,set_s_member\n");
        for r in &self.records {
            out.push_str(&format!("{},{:.16e},{}\n", r.iteration, r.residual, r.set_s.member));
        }
        out
    }
}

/// The quadratic forcing of a state.
pub fn state_forcing(state: &StreamState, solver: &LinearSolver, dealias: bool) -> Result<ForcingField> {
    let v = velocity_from_stream(state, &solver.grid, &solver.modes)?;
    nonlinear_forcing(&v, &solver.grid, &solver.modes, dealias)
}

fn diff_norm(a: &StreamState, b: &StreamState, solver: &LinearSolver) -> f64 {
    a.axpy(-1.0, b).l2r(&solver.grid, &solver.modes)
}

/// Run the iteration with a prepared solver, optionally from a custom first
/// iterate (default `T(F)`).
pub fn picard_iterate(
    f: &ForcingField,
    config: &FlowConfig,
    solver: &LinearSolver,
    initial: Option<&StreamState>,
) -> Result<(StreamState, IterationReport)> {
    config.validate()?;
    let (grid, modes) = (&solver.grid, &solver.modes);
    let psi0 = solver.solve(f)?;
    let mut current = initial.cloned().unwrap_or_else(|| psi0.clone());
    let mut records = Vec::new();
    let mut status = IterationStatus::MaxIter;
    let mut first: Option<f64> = None;
    for iteration in 0..config.picard_max_iter {
        let t = solver.solve(&state_forcing(&current, solver, config.dealias)?)?;
        let target = psi0.axpy(1.0, &t);
        let next = current.axpy(config.relaxation, &target.axpy(-1.0, &current));
        let residual = diff_norm(&next, &current, solver);
        current = next;
        let set_s = if residual.is_finite() {
            set_s_check(&current, config, grid, modes)?
        } else {
            SetSCheck {
                items: Vec::new(),
                member: false,
            }
        };
        records.push(IterationRecord {
            iteration,
            residual,
            set_s,
        });
        let r0 = *first.get_or_insert(residual);
        if !residual.is_finite() || (r0 > 0.0 && residual > 1e6 * r0) {
            status = IterationStatus::Diverged;
            break;
        }
        if residual <= config.picard_tol {
            status = IterationStatus::Converged;
            break;
        }
    }
    let report = IterationReport {
        phi: config.phi,
        seed: config.seed,
        relaxation: config.relaxation,
        status,
        records,
    };
    Ok((current, report))
}

pub fn picard_solve(f: &ForcingField, config: &FlowConfig) -> Result<(StreamState, IterationReport)> {
    let solver = LinearSolver::from_config(config)?;
    picard_iterate(f, config, &solver, None)
}

/// `|| Psi - T(F) - T(F*(Psi)) ||` in the weighted `L^2` norm.
pub fn fixed_point_defect(
    state: &StreamState,
    f: &ForcingField,
    solver: &LinearSolver,
    dealias: bool,
) -> Result<f64> {
    let image = solver
        .solve(f)?
        .axpy(1.0, &solver.solve(&state_forcing(state, solver, dealias)?)?);
    Ok(diff_norm(state, &image, solver))
}

/// Residual of the steady equations for `u = U + v`, in curl form for the
/// meridional part and directly for the azimuthal component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentumResidual {
    pub curl: f64,
    pub curl_scale: f64,
    pub swirl: f64,
    pub swirl_scale: f64,
}

impl MomentumResidual {
    pub fn relative(&self) -> f64 {
        let rel = |a: f64, s: f64| if s > 0.0 { a / s } else { a };
        rel(self.curl, self.curl_scale).max(rel(self.swirl, self.swirl_scale))
    }
}

fn rows_l2(f: &DMatrix<f64>, rows: std::ops::Range<usize>, grid: &RadialGrid, modes: &ModeSet) -> f64 {
    let mut acc = 0.0;
    for j in 0..f.ncols() {
        for i in rows.clone() {
            acc += grid.quad_weights[i] * f[(i, j)] * f[(i, j)];
        }
    }
    (acc * modes.dz()).sqrt()
}

/// Evaluate the steady equations on the reconstructed velocity, using the
/// convective form `(u . grad) u` rather than the rotational form used by the
/// iteration. Norms are taken over collocation rows only.
pub fn momentum_residual(
    state: &StreamState,
    f: &ForcingField,
    base: &BaseFlow,
    grid: &RadialGrid,
    modes: &ModeSet,
) -> Result<MomentumResidual> {
    let v: VelocityField = velocity_from_stream(state, grid, modes)?;
    let (n_r, n_z) = (grid.len(), modes.len());
    let u = DMatrix::from_fn(n_r, n_z, |i, _| base.profile[i]);
    let du = dr_field(&u, grid);
    let dz = |x: &DMatrix<f64>| dz_field(x, modes);
    let dr = |x: &DMatrix<f64>| dr_field(x, grid);
    let l = assemble_l(grid).matrix;
    let laplace = |x: &DMatrix<f64>| -> Result<DMatrix<f64>> { Ok(&l * x + dz(&dz(x)?)?) };

    let (vr, vt, vz) = (&v.vr, &v.vtheta, &v.vz);
    let (vr_z, vz_z, vt_z) = (dz(vr)?, dz(vz)?, dz(vt)?);
    let (vr_r, vz_r, vt_r) = (dr(vr), dr(vz), dr(vt));
    let vt_over_r = over_r(vt, grid);

    let conv_r = u.component_mul(&vr_z) + vr.component_mul(&vr_r) + vz.component_mul(&vr_z)
        - vt.component_mul(&vt_over_r);
    let conv_z = u.component_mul(&vz_z)
        + vr.component_mul(&du)
        + vr.component_mul(&vz_r)
        + vz.component_mul(&vz_z);
    let omega = &vr_z - &vz_r;
    let visc = laplace(&omega)?;
    let curl_conv = dz(&conv_r)? - dr(&conv_z);
    let curl_f = dz(&f.fr)? - dr(&f.fz);
    let curl = &curl_conv - &visc - &curl_f;

    let conv_t = u.component_mul(&vt_z)
        + vr.component_mul(&vt_r)
        + vz.component_mul(&vt_z)
        + vr.component_mul(&vt_over_r);
    let visc_t = laplace(vt)?;
    let swirl = &conv_t - &visc_t - &f.ftheta;

    let stream_rows = 2..n_r - 2;
    let swirl_rows = 1..n_r - 1;
    let nrm = |x: &DMatrix<f64>, rows: std::ops::Range<usize>| rows_l2(x, rows, grid, modes);
    Ok(MomentumResidual {
        curl: nrm(&curl, stream_rows.clone()),
        curl_scale: nrm(&curl_conv, stream_rows.clone())
            + nrm(&visc, stream_rows.clone())
            + nrm(&curl_f, stream_rows),
        swirl: nrm(&swirl, swirl_rows.clone()),
        swirl_scale: nrm(&conv_t, swirl_rows.clone())
            + nrm(&visc_t, swirl_rows.clone())
            + nrm(&f.ftheta, swirl_rows),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniquenessReport {
    pub n_seeds: usize,
    pub converged: usize,
    pub failed: usize,
    /// Largest pairwise `H^{19/12}` distance between converged states.
    pub max_distance: f64,
}

/// Run the iteration from `n_seeds` perturbations of `T(F)` and compare the
/// limits. Perturbations are `T` of random forcings, scaled to a small
/// fraction of the set-S bound on `v^r`.
pub fn uniqueness_probe(f: &ForcingField, config: &FlowConfig, n_seeds: usize) -> Result<UniquenessReport> {
    let solver = LinearSolver::from_config(config)?;
    uniqueness_probe_with(f, config, &solver, n_seeds)
}

pub fn uniqueness_probe_with(
    f: &ForcingField,
    config: &FlowConfig,
    solver: &LinearSolver,
    n_seeds: usize,
) -> Result<UniquenessReport> {
    let (grid, modes) = (&solver.grid, &solver.modes);
    let psi0 = solver.solve(f)?;
    let mut sampler = ForcingSampler::new(config.seed);
    let size = 0.1 * config.phi.powf(-15.0 / 32.0);
    let mut limits: Vec<VelocityField> = Vec::new();
    let mut failed = 0;
    for _ in 0..n_seeds {
        let g = sampler.sample(grid, modes, Components::ALL);
        let p = solver.solve(&g)?;
        let scale = size / p.l2r(grid, modes).max(f64::MIN_POSITIVE);
        let start = psi0.axpy(scale, &p);
        let (state, report) = picard_iterate(f, config, solver, Some(&start))?;
        if report.status == IterationStatus::Converged {
            limits.push(velocity_from_stream(&state, grid, modes)?);
        } else {
            failed += 1;
        }
    }
    let mut max_distance: f64 = 0.0;
    for a in 0..limits.len() {
        for b in a + 1..limits.len() {
            let d = sobolev_norm_order(&limits[a].sub(&limits[b]), SobolevOrder::H19Over12, grid, modes)?;
            max_distance = max_distance.max(d);
        }
    }
    Ok(UniquenessReport {
        n_seeds,
        converged: limits.len(),
        failed,
        max_distance,
    })
}

/// Measured constants of the linear bounds
/// `|v*|_{H^{5/3}} <= c1 |F*|` and `|v^theta|_{H^2} <= c2 |F^theta|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub phi: f64,
    pub seed: u64,
    pub n_samples: usize,
    pub c1_cal: f64,
    pub c2_cal: f64,
}

pub fn calibrate(config: &FlowConfig, n_samples: usize) -> Result<Calibration> {
    let solver = LinearSolver::from_config(config)?;
    calibrate_with(config, &solver, n_samples)
}

pub fn calibrate_with(config: &FlowConfig, solver: &LinearSolver, n_samples: usize) -> Result<Calibration> {
    if n_samples == 0 {
        return Err(PipeError::Input("calibration needs at least one sample".into()));
    }
    let (grid, modes) = (&solver.grid, &solver.modes);
    let mut sampler = ForcingSampler::new(config.seed);
    let (mut c1, mut c2): (f64, f64) = (0.0, 0.0);
    for _ in 0..n_samples {
        let f = sampler.sample(grid, modes, Components::ALL);
        let v = velocity_from_stream(&solver.solve(&f)?, grid, modes)?;
        let mut fstar = f.clone();
        fstar.ftheta.fill(0.0);
        let mut fth = f.clone();
        fth.fr.fill(0.0);
        fth.fz.fill(0.0);
        c1 = c1.max(sobolev_norm_order(&v.meridional(), SobolevOrder::H5Over3, grid, modes)? / forcing_norm(&fstar, grid, modes));
        c2 = c2.max(sobolev_norm_order(&v.swirl_only(), SobolevOrder::H2, grid, modes)? / forcing_norm(&fth, grid, modes));
    }
    Ok(Calibration {
        phi: config.phi,
        seed: config.seed,
        n_samples,
        c1_cal: c1,
        c2_cal: c2,
    })
}
