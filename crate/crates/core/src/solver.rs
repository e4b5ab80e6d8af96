//! Field-circuit-coupled transient solver: implicit Euler in time, Newton in
//! each step, banded Cholesky for the linearized systems.
//!
//! Voltage drive solves ĥ(a, ȧ) + M_σ·ȧ = X·u; current drive solves
//! ĥ(a, ȧ) + (M_σ − X·R·Xᵀ)·ȧ = X·R·i with R_m = 1/G_m. The dynamic sheet
//! term is folded into the per-point material evaluation (its ∂H/∂Ḃ is
//! constant), so ĥ carries both the static and dynamic parts.
//!
//! Loss channels are accumulated per step with backward differences and
//! end-of-step fields, the same quadrature implicit Euler defines; the
//! per-cycle energy balance then closes to solver tolerance.

use std::time::Instant;

use rayon::prelude::*;

use crate::assembly::{
    add_scaled_full_matrix, assemble_h_vec, assemble_jacobian, jacobian_pattern, CircuitMatrices,
    DofMap, MaterialKernel, MaterialLaw, PointEval,
};
use crate::circuit::{CircuitSpec, DriveMode};
use crate::error::{Error, Result};
use crate::math::{SymMat2, Vec2, MU0};
use crate::mesh::{Mesh, RegionTag};
use crate::play::PlayState;
use crate::sparse::{solve_lowrank_downdate, BandCholesky, SymCsr};

#[derive(Clone, Copy, Debug)]
pub struct SolverSettings {
    /// Newton residual target relative to the source norm.
    pub newton_tol: f64,
    pub newton_max_iter: u32,
    /// Fixed iteration count for runtime benchmarks (skips the residual test).
    pub fixed_newton: Option<u32>,
    /// Worker threads for the per-point material evaluation.
    pub threads: usize,
    /// dt halvings before a step is abandoned.
    pub max_dt_halvings: u32,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            newton_tol: 1e-6,
            newton_max_iter: 14,
            fixed_newton: None,
            threads: 1,
            max_dt_halvings: 3,
        }
    }
}

/// A BH probe resolved onto the mesh.
#[derive(Clone, Debug)]
pub struct BhProbe {
    pub label: String,
    pub tri: usize,
    /// index into the iron integration-point ordering
    pub iron_idx: usize,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct BhSample {
    pub b: Vec2,
    pub h: Vec2,
}

#[derive(Clone, Debug)]
pub struct ProbeSeries {
    pub label: String,
    pub tri: usize,
    pub samples: Vec<BhSample>,
}

/// Time series of one transient run. All per-step series have one row per
/// archived time (row 0 is the zero initial state; step powers at row k
/// cover the interval times[k-1] → times[k]).
#[derive(Clone, Debug)]
pub struct SolutionArchive {
    pub times: Vec<f64>,
    pub a: Vec<Vec<f64>>,
    pub u: Vec<Vec<f64>>,
    pub i_cond: Vec<Vec<f64>>,
    /// Σ_m u_m·i_m, W/m.
    pub input_power: Vec<f64>,
    pub p_res: Vec<f64>,
    pub p_eddy: Vec<f64>,
    pub p_hyst: Vec<f64>,
    /// rate of stored magnetic energy, W/m
    pub w_rate: Vec<f64>,
    /// accumulated stored magnetic energy, J/m
    pub w_mag: Vec<f64>,
    pub newton_iters: Vec<u32>,
    pub probes: Vec<ProbeSeries>,
    /// wall time spent in the parallel material-evaluation phase, s
    pub material_seconds: f64,
    pub n_iron_points: usize,
    pub drive_period: Option<f64>,
    pub nominal_dt: f64,
    /// committed play states at the end of the run (hysteretic runs)
    pub final_play: Vec<PlayState>,
}

impl SolutionArchive {
    pub fn n_steps(&self) -> usize {
        self.times.len() - 1
    }

    /// Index range (start, end] of the `cycle`-th full drive period
    /// (1-based); rows are selected by time.
    pub fn cycle_rows(&self, cycle: usize) -> Option<(usize, usize)> {
        let period = self.drive_period?;
        let t0 = (cycle - 1) as f64 * period;
        let t1 = cycle as f64 * period;
        let eps = 1e-9 * period;
        let start = self.times.iter().position(|&t| t >= t0 - eps)?;
        let end = self.times.iter().position(|&t| t >= t1 - eps)?;
        Some((start, end))
    }
}

/// One configured transient problem.
pub struct Simulation {
    pub mesh: Mesh,
    pub dofs: DofMap,
    pub kernel: MaterialKernel,
    pub circuit: CircuitSpec,
    pub matrices: CircuitMatrices,
    pub settings: SolverSettings,
    pub dt: f64,
    pub duration: f64,
    pub bh_probes: Vec<BhProbe>,
    pool: rayon::ThreadPool,
    /// map triangle index -> iron point index (usize::MAX elsewhere)
    iron_idx_of_tri: Vec<usize>,
}

/// Outcome of one accepted implicit Euler step.
struct StepOutcome {
    a_next: Vec<f64>,
    b_next: Vec<Vec2>,
    evals: Vec<PointEval>,
    newton_iters: u32,
    material_seconds: f64,
}

impl Simulation {
    pub fn new(
        mesh: Mesh,
        kernel: MaterialKernel,
        circuit: CircuitSpec,
        matrices: CircuitMatrices,
        settings: SolverSettings,
        dt: f64,
        duration: f64,
        bh_points: &[(String, Vec2)],
    ) -> Result<Simulation> {
        if circuit.n_cond != matrices.x_cols.len() {
            return Err(Error::config(format!(
                "circuit declares {} conductors, geometry has {}",
                circuit.n_cond,
                matrices.x_cols.len()
            )));
        }
        if !(dt > 0.0) || !(duration > 0.0) {
            return Err(Error::config("dt and duration must be positive"));
        }
        let steps = duration / dt;
        if (steps - steps.round()).abs() > 1e-9 * steps.max(1.0) {
            return Err(Error::config("duration must be a multiple of dt"));
        }
        if settings.threads < 1 {
            return Err(Error::config("thread count must be at least 1"));
        }
        let dofs = DofMap::new(&mesh);
        let mut iron_idx_of_tri = vec![usize::MAX; mesh.n_tris()];
        for (k, &t) in mesh.iron_tris.iter().enumerate() {
            iron_idx_of_tri[t] = k;
        }
        let mut bh_probes = Vec::new();
        for (label, p) in bh_points {
            let tri = mesh
                .find_triangle(*p)
                .ok_or_else(|| Error::config(format!("probe '{label}' outside the mesh")))?;
            if mesh.tags[tri] != RegionTag::Iron {
                return Err(Error::config(format!("probe '{label}' is not in iron")));
            }
            bh_probes.push(BhProbe { label: label.clone(), tri, iron_idx: iron_idx_of_tri[tri] });
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(settings.threads)
            .build()
            .map_err(|e| Error::config(format!("thread pool: {e}")))?;
        Ok(Simulation {
            mesh,
            dofs,
            kernel,
            circuit,
            matrices,
            settings,
            dt,
            duration,
            bh_probes,
            pool,
            iron_idx_of_tri,
        })
    }

    pub fn n_iron_points(&self) -> usize {
        self.mesh.iron_tris.len()
    }

    fn virgin_states(&self) -> Vec<PlayState> {
        match self.kernel.law {
            MaterialLaw::Hysteretic => {
                vec![self.kernel.play.virgin_state(); self.n_iron_points()]
            }
            MaterialLaw::Anhysteretic => Vec::new(),
        }
    }

    /// rhs vector X·u or X·R·i on the full node set, plus the raw source.
    fn rhs_at(&self, t: f64) -> (Vec<f64>, Vec<f64>) {
        let source = self.circuit.source_at(t);
        let mut rhs = vec![0.0; self.mesh.n_nodes()];
        for (m, col) in self.matrices.x_cols.iter().enumerate() {
            let scale = match self.circuit.drive {
                DriveMode::Voltage => source[m],
                DriveMode::Current => source[m] / self.matrices.g[m],
            };
            for &(n, v) in col {
                rhs[n] += scale * v;
            }
        }
        (rhs, source)
    }

    /// Evaluate all iron points for candidate flux densities (parallel map,
    /// deterministic ordering; the reduction happens serially afterwards).
    fn evaluate_materials(
        &self,
        b: &[Vec2],
        b_prev: &[Vec2],
        dt: f64,
        play: &[PlayState],
        h_warm: &[Vec2],
        material_seconds: &mut f64,
    ) -> Result<Vec<PointEval>> {
        let iron = &self.mesh.iron_tris;
        let kernel = &self.kernel;
        let start = Instant::now();
        let results: Vec<Result<PointEval>> = self.pool.install(|| {
            iron.par_iter()
                .enumerate()
                .map(|(k, &t)| {
                    let state = match kernel.law {
                        MaterialLaw::Hysteretic => &play[k],
                        MaterialLaw::Anhysteretic => &play[0.min(play.len().wrapping_sub(1))],
                    };
                    kernel.evaluate(b[t], b_prev[t], dt, state, h_warm[k])
                })
                .collect()
        });
        *material_seconds += start.elapsed().as_secs_f64();
        let mut evals = Vec::with_capacity(results.len());
        for (k, r) in results.into_iter().enumerate() {
            match r {
                Ok(e) => evals.push(e),
                // fill in which integration point failed; the caller reduces dt
                Err(Error::InversionFailure { residual, iterations, .. }) => {
                    return Err(Error::InversionFailure {
                        point: k,
                        triangle: iron[k],
                        residual,
                        iterations,
                    })
                }
                Err(other) => return Err(other),
            }
        }
        Ok(evals)
    }

    /// One implicit Euler step from (a_prev, states) to t_next = t + dt_step.
    #[allow(clippy::too_many_arguments)]
    fn newton_time_step(
        &self,
        a_prev: &[f64],
        b_prev: &[Vec2],
        play: &[PlayState],
        h_warm: &[Vec2],
        t_next: f64,
        dt_step: f64,
        source_scale: &mut f64,
        pattern: &mut SymCsr,
        chol: &mut BandCholesky,
    ) -> Result<StepOutcome> {
        let n_tris = self.mesh.n_tris();
        let (rhs_full, _source) = self.rhs_at(t_next);
        let rhs_free = self.dofs.restrict(&rhs_full);
        let rhs_norm = norm(&rhs_free);
        *source_scale = source_scale.max(rhs_norm);
        let tol_scale = source_scale.max(1e-300);

        let mut a = a_prev.to_vec();
        let mut material_seconds = 0.0;
        let mut b_cand: Vec<Vec2> = vec![Vec2::ZERO; n_tris];
        let mut dhdb: Vec<SymMat2> = vec![crate::assembly::vacuum_dhdb(); n_tris];
        let mut h_tri: Vec<Vec2> = vec![Vec2::ZERO; n_tris];
        let mut solves: u32 = 0;
        let max_iter = self.settings.fixed_newton.unwrap_or(self.settings.newton_max_iter);
        let fixed = self.settings.fixed_newton.is_some();

        let evals = loop {
            for t in 0..n_tris {
                b_cand[t] = self.mesh.flux_density(&a, t);
            }
            let evals =
                self.evaluate_materials(&b_cand, b_prev, dt_step, play, h_warm, &mut material_seconds)?;
            for t in 0..n_tris {
                match self.iron_idx_of_tri[t] {
                    usize::MAX => {
                        h_tri[t] = b_cand[t] * (1.0 / MU0);
                        // dhdb stays vacuum
                    }
                    k => {
                        h_tri[t] = evals[k].h_total;
                        dhdb[t] = evals[k].dhdb;
                    }
                }
            }
            let h_vec = assemble_h_vec(&self.mesh, &h_tri);
            // residual on free nodes
            let mut r = vec![0.0; self.mesh.n_nodes()];
            let mut da = vec![0.0; self.mesh.n_nodes()];
            for n in 0..self.mesh.n_nodes() {
                da[n] = a[n] - a_prev[n];
            }
            let mut m_da = vec![0.0; self.mesh.n_nodes()];
            self.matrices.m_sigma.matvec(&da, &mut m_da);
            for n in 0..self.mesh.n_nodes() {
                r[n] = h_vec[n] + m_da[n] / dt_step - rhs_full[n];
            }
            if self.circuit.drive == DriveMode::Current {
                for (m, col) in self.matrices.x_cols.iter().enumerate() {
                    let xda: f64 = col.iter().map(|&(n, v)| v * da[n]).sum();
                    let coeff = xda / (self.matrices.g[m] * dt_step);
                    for &(n, v) in col {
                        r[n] -= coeff * v;
                    }
                }
            }
            let r_free = self.dofs.restrict(&r);
            let r_norm = norm(&r_free);
            if std::env::var_os("HYSTERMAG_TRACE_NEWTON").is_some() {
                eprintln!(
                    "newton t={t_next:.3e} solve {solves}: |r|={r_norm:.6e} target={:.3e}",
                    self.settings.newton_tol * tol_scale
                );
            }
            let converged = r_norm <= self.settings.newton_tol * tol_scale;
            if !fixed && converged {
                break evals;
            }
            if solves >= max_iter {
                if fixed {
                    break evals;
                }
                // step-rejected signal: the caller reduces dt
                return Err(Error::StepRejected { time: t_next, halvings: 0 });
            }
            // Jacobian and linear solve
            assemble_jacobian(&self.mesh, &self.dofs, &dhdb, pattern);
            add_scaled_full_matrix(&self.matrices.m_sigma, 1.0 / dt_step, &self.dofs, pattern);
            chol.factor(pattern)?;
            let neg_r: Vec<f64> = r_free.iter().map(|v| -v).collect();
            let delta = match self.circuit.drive {
                DriveMode::Voltage => chol.solve(&neg_r)?,
                DriveMode::Current => {
                    let u_free: Vec<Vec<(usize, f64)>> = self
                        .matrices
                        .x_cols
                        .iter()
                        .map(|col| {
                            col.iter()
                                .filter_map(|&(n, v)| {
                                    let f = self.dofs.free_of_node[n];
                                    (f >= 0).then_some((f as usize, v))
                                })
                                .collect()
                        })
                        .collect();
                    let c: Vec<f64> = self
                        .matrices
                        .g
                        .iter()
                        .map(|&gm| 1.0 / (gm * dt_step))
                        .collect();
                    solve_lowrank_downdate(chol, &u_free, &c, &neg_r)?
                }
            };
            for (f, &n) in self.dofs.node_of_free.iter().enumerate() {
                a[n] += delta[f];
            }
            solves += 1;
        };
        Ok(StepOutcome {
            a_next: a,
            b_next: b_cand,
            evals,
            newton_iters: solves.max(1),
            material_seconds,
        })
    }

    /// Run the transient problem from zero initial state and virgin material
    /// history. Deterministic for a fixed configuration and thread count.
    pub fn transient_solve(&self) -> Result<SolutionArchive> {
        let n_nodes = self.mesh.n_nodes();
        let n_tris = self.mesh.n_tris();
        let n_iron = self.n_iron_points();
        let mut pattern = jacobian_pattern(&self.mesh, &self.dofs);
        let mut chol = BandCholesky::plan(&pattern);

        let mut a = vec![0.0; n_nodes];
        let mut b_prev = vec![Vec2::ZERO; n_tris];
        let mut play = self.virgin_states();
        if play.is_empty() {
            // anhysteretic runs still need one dummy state slot for the API
            play.push(self.kernel.play.virgin_state());
        }
        let mut h_comm = vec![Vec2::ZERO; n_iron];
        let mut source_scale = 0.0f64;

        let mut archive = SolutionArchive {
            times: vec![0.0],
            a: vec![a.clone()],
            u: vec![vec![0.0; self.circuit.n_cond]],
            i_cond: vec![vec![0.0; self.circuit.n_cond]],
            input_power: vec![0.0],
            p_res: vec![0.0],
            p_eddy: vec![0.0],
            p_hyst: vec![0.0],
            w_rate: vec![0.0],
            w_mag: vec![0.0],
            newton_iters: vec![0],
            probes: self
                .bh_probes
                .iter()
                .map(|p| ProbeSeries {
                    label: p.label.clone(),
                    tri: p.tri,
                    samples: vec![BhSample::default()],
                })
                .collect(),
            material_seconds: 0.0,
            n_iron_points: n_iron,
            drive_period: self.circuit.period(),
            nominal_dt: self.dt,
            final_play: Vec::new(),
        };

        let mut t = 0.0f64;
        let t_end = self.duration;
        while t < t_end - 1e-9 * self.dt {
            let mut dt_step = self.dt.min(t_end - t);
            let mut halvings = 0u32;
            let outcome = loop {
                match self.newton_time_step(
                    &a,
                    &b_prev,
                    &play,
                    &h_comm,
                    t + dt_step,
                    dt_step,
                    &mut source_scale,
                    &mut pattern,
                    &mut chol,
                ) {
                    Ok(out) => break out,
                    Err(Error::StepRejected { .. }) | Err(Error::InversionFailure { .. })
                        if halvings < self.settings.max_dt_halvings =>
                    {
                        halvings += 1;
                        dt_step *= 0.5;
                    }
                    Err(Error::StepRejected { .. }) | Err(Error::InversionFailure { .. }) => {
                        return Err(Error::StepRejected { time: t + dt_step, halvings });
                    }
                    Err(other) => return Err(other),
                }
            };
            t += dt_step;
            archive.material_seconds += outcome.material_seconds;
            self.commit_step(
                t,
                dt_step,
                outcome,
                &mut a,
                &mut b_prev,
                &mut play,
                &mut h_comm,
                &mut archive,
            )?;
        }
        if self.kernel.law == MaterialLaw::Hysteretic {
            archive.final_play = play;
        }
        Ok(archive)
    }

    /// Commit an accepted step: update material history, accumulate the loss
    /// channels with the implicit Euler quadrature, append archive rows.
    #[allow(clippy::too_many_arguments)]
    fn commit_step(
        &self,
        t: f64,
        dt_step: f64,
        outcome: StepOutcome,
        a: &mut Vec<f64>,
        b_prev: &mut Vec<Vec2>,
        play: &mut [PlayState],
        h_comm: &mut [Vec2],
        archive: &mut SolutionArchive,
    ) -> Result<()> {
        let StepOutcome { a_next, b_next, evals, newton_iters, .. } = outcome;
        let n_nodes = self.mesh.n_nodes();
        let mut adot = vec![0.0; n_nodes];
        for n in 0..n_nodes {
            adot[n] = (a_next[n] - a[n]) / dt_step;
        }
        // circuit quantities at the end of the step
        let source = self.circuit.source_at(t);
        let mut u = vec![0.0; self.circuit.n_cond];
        let mut i_c = vec![0.0; self.circuit.n_cond];
        for m in 0..self.circuit.n_cond {
            let x_adot: f64 =
                self.matrices.x_cols[m].iter().map(|&(n, v)| v * adot[n]).sum();
            match self.circuit.drive {
                DriveMode::Current => {
                    i_c[m] = source[m];
                    u[m] = (i_c[m] + x_adot) / self.matrices.g[m];
                }
                DriveMode::Voltage => {
                    u[m] = source[m];
                    i_c[m] = self.matrices.g[m] * u[m] - x_adot;
                }
            }
        }
        let input: f64 = u.iter().zip(&i_c).map(|(a, b)| a * b).sum();
        // resistive loss ∫σ|E|² over conductors, assembled from the same
        // matrices the solve used: Σ G u² − 2 Σ u·(Xᵀȧ) + ȧᵀ M_σ ȧ
        let mut p_res = self.matrices.m_sigma.quadratic_form(&adot);
        for m in 0..self.circuit.n_cond {
            let x_adot: f64 =
                self.matrices.x_cols[m].iter().map(|&(n, v)| v * adot[n]).sum();
            p_res += self.matrices.g[m] * u[m] * u[m] - 2.0 * u[m] * x_adot;
        }

        let c_sheet = self.kernel.sheet.coefficient();
        let mut p_eddy = 0.0;
        let mut p_hyst = 0.0;
        let mut w_rate = 0.0;
        for t_idx in 0..self.mesh.n_tris() {
            let area = self.mesh.areas[t_idx];
            let db = b_next[t_idx] - b_prev[t_idx];
            match self.iron_idx_of_tri[t_idx] {
                usize::MAX => {
                    // linear regions: ΔB·H₁ is pure stored-energy rate
                    w_rate += area * db.dot(b_next[t_idx]) / (MU0 * dt_step);
                }
                k => {
                    let h_static = evals[k].h_static;
                    if c_sheet != 0.0 {
                        p_eddy += area * c_sheet * db.norm_sq() / (dt_step * dt_step);
                    }
                    match self.kernel.law {
                        MaterialLaw::Anhysteretic => {
                            w_rate += area * db.dot(h_static) / dt_step;
                        }
                        MaterialLaw::Hysteretic => {
                            let new_state = self.kernel.play.play_update(&play[k], h_static)?;
                            let (p, w) = self.kernel.play.loss_and_energy_rates(
                                &play[k],
                                &new_state,
                                h_comm[k],
                                h_static,
                                dt_step,
                            )?;
                            p_hyst += area * p;
                            w_rate += area * w;
                            play[k] = new_state;
                        }
                    }
                    h_comm[k] = h_static;
                }
            }
        }

        for (probe, series) in self.bh_probes.iter().zip(archive.probes.iter_mut()) {
            series.samples.push(BhSample {
                b: b_next[probe.tri],
                h: evals[probe.iron_idx].h_total,
            });
        }

        *a = a_next;
        *b_prev = b_next;
        archive.times.push(t);
        archive.a.push(a.clone());
        archive.u.push(u);
        archive.i_cond.push(i_c);
        archive.input_power.push(input);
        archive.p_res.push(p_res);
        archive.p_eddy.push(p_eddy);
        archive.p_hyst.push(p_hyst);
        archive.w_rate.push(w_rate);
        let w_prev = *archive.w_mag.last().unwrap();
        archive.w_mag.push(w_prev + w_rate * dt_step);
        archive.newton_iters.push(newton_iters);
        Ok(())
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::anhysteretic::AnhystereticCurve;
    use crate::assembly::assemble_circuit_matrices;
    use crate::circuit::Waveform;
    use crate::geometry::{BoundarySpec, ElementSizes, GeometrySpec, Rect};
    use crate::inversion::{InversionSettings, Scheme};
    use crate::mesh::build_mesh;
    use crate::play::PlayConfig;
    use crate::sheet::SheetParams;
    use std::sync::Arc;

    fn kernel(law: MaterialLaw, dynamic: bool) -> MaterialKernel {
        let curve = Arc::new(AnhystereticCurve::with_defaults());
        let play = PlayConfig::m235(curve.clone());
        let inversion = InversionSettings::new(Scheme::Preconditioned, 1e-9, &play).unwrap();
        MaterialKernel {
            law,
            curve,
            play,
            inversion,
            sheet: SheetParams { enabled: dynamic, ..SheetParams::default() },
        }
    }

    /// Small air-core problem: one conductor in air, no iron.
    fn air_core(drive: DriveMode, waveform: Waveform, dt: f64, duration: f64) -> Simulation {
        let geom = GeometrySpec {
            domain: Rect::new(0.0, 0.0, 0.12, 0.12),
            iron: vec![],
            conductors: vec![Rect::new(0.05, 0.05, 0.07, 0.07)],
            boundary: BoundarySpec {
                bottom: crate::geometry::BoundaryKind::Dirichlet0,
                ..BoundarySpec::default()
            },
            element_size: ElementSizes { air: 0.015, iron: 0.015, conductor: 0.008 },
        };
        let mesh = build_mesh(&geom).unwrap();
        let matrices = assemble_circuit_matrices(&mesh, 5.8e6, 0.0).unwrap();
        let circuit = CircuitSpec::new(1, drive, waveform).unwrap();
        Simulation::new(
            mesh,
            kernel(MaterialLaw::Anhysteretic, false),
            circuit,
            matrices,
            SolverSettings::default(),
            dt,
            duration,
            &[],
        )
        .unwrap()
    }

    #[test]
    fn zero_drive_zero_solution() {
        let sim = air_core(DriveMode::Current, Waveform::Zero, 1e-4, 1e-3);
        let archive = sim.transient_solve().unwrap();
        assert_eq!(archive.n_steps(), 10);
        for a in &archive.a {
            assert!(a.iter().all(|&v| v == 0.0));
        }
        assert!(archive.newton_iters[1..].iter().all(|&n| n == 1));
        assert!(archive.input_power.iter().all(|&p| p == 0.0));
    }

    #[test]
    fn linear_material_single_newton_iteration() {
        let w = Waveform::Sinusoid { amplitude: 1000.0, frequency: 50.0 };
        let sim = air_core(DriveMode::Current, w, 1e-4, 2e-3);
        let archive = sim.transient_solve().unwrap();
        // purely linear problem: the first solve lands on the solution
        assert!(
            archive.newton_iters[1..].iter().all(|&n| n <= 2),
            "iters: {:?}",
            &archive.newton_iters[1..]
        );
        assert!(archive.input_power.iter().any(|&p| p != 0.0));
    }

    #[test]
    fn implicit_euler_first_order_in_dt() {
        // global error of the air-core flux at t = 5 ms halves with dt
        let w = || Waveform::Sinusoid { amplitude: 5000.0, frequency: 50.0 };
        let probe = |dt: f64| {
            let sim = air_core(DriveMode::Current, w(), dt, 5e-3);
            let archive = sim.transient_solve().unwrap();
            let tri = sim.mesh.find_triangle(Vec2::new(0.02, 0.02)).unwrap();
            sim.mesh.flux_density(archive.a.last().unwrap(), tri).y
        };
        let reference = probe(6.25e-6);
        let e1 = (probe(1e-4) - reference).abs();
        let e2 = (probe(5e-5) - reference).abs();
        let ratio = e1 / e2;
        assert!(
            (1.5..=3.0).contains(&ratio),
            "expected first-order convergence, got ratio {ratio} (e1={e1:.3e}, e2={e2:.3e})"
        );
    }

    #[test]
    fn voltage_drive_reproduces_current_drive() {
        let w = Waveform::Sinusoid { amplitude: 2000.0, frequency: 500.0 };
        let sim = air_core(DriveMode::Current, w, 1e-5, 1e-3);
        let archive = sim.transient_solve().unwrap();
        // replay the recorded voltage in voltage-driven mode
        let times = archive.times[1..].to_vec();
        let volts: Vec<f64> = archive.u[1..].iter().map(|u| u[0]).collect();
        let mut t_samples = vec![0.0];
        let mut v_samples = vec![volts[0]];
        t_samples.extend_from_slice(&times);
        v_samples.extend_from_slice(&volts);
        let wf = Waveform::Samples { t: t_samples, v: v_samples };
        let sim_v = air_core(DriveMode::Voltage, wf, 1e-5, 1e-3);
        let archive_v = sim_v.transient_solve().unwrap();
        let imax = archive
            .i_cond
            .iter()
            .map(|i| i[0].abs())
            .fold(0.0f64, f64::max);
        for (iv, ic) in archive_v.i_cond.iter().zip(&archive.i_cond).skip(1) {
            assert!(
                (iv[0] - ic[0]).abs() <= 1e-3 * imax,
                "current mismatch: {} vs {}",
                iv[0],
                ic[0]
            );
        }
    }

    #[test]
    fn energy_identity_closes_per_step() {
        // input = P_res + P_eddy + P_hyst + dW/dt at every step, to solver
        // tolerance, for the hysteretic dynamic model on a small iron problem
        let geom = GeometrySpec {
            domain: Rect::new(0.0, 0.0, 0.1, 0.1),
            iron: vec![Rect::new(0.0, 0.02, 0.04, 0.06)],
            conductors: vec![Rect::new(0.06, 0.02, 0.08, 0.04)],
            boundary: BoundarySpec::default(),
            element_size: ElementSizes { air: 0.012, iron: 0.008, conductor: 0.007 },
        };
        let mesh = build_mesh(&geom).unwrap();
        let matrices = assemble_circuit_matrices(&mesh, 5.8e6, SheetParams::default().coefficient())
            .unwrap();
        let circuit = CircuitSpec::new(
            1,
            DriveMode::Current,
            Waveform::Sinusoid { amplitude: 8000.0, frequency: 500.0 },
        )
        .unwrap();
        let sim = Simulation::new(
            mesh,
            kernel(MaterialLaw::Hysteretic, true),
            circuit,
            matrices,
            SolverSettings::default(),
            1e-5,
            1e-3,
            &[],
        )
        .unwrap();
        let archive = sim.transient_solve().unwrap();
        let mut e_in = 0.0;
        let mut e_out = 0.0;
        for k in 1..archive.times.len() {
            let dt = archive.times[k] - archive.times[k - 1];
            e_in += archive.input_power[k] * dt;
            e_out += (archive.p_res[k] + archive.p_eddy[k] + archive.p_hyst[k]
                + archive.w_rate[k])
                * dt;
            assert!(archive.p_hyst[k] >= -1e-12);
            assert!(archive.p_eddy[k] >= 0.0);
        }
        let defect = (e_in - e_out).abs() / e_in.abs().max(1e-30);
        assert!(defect < 1e-4, "energy identity defect {defect:.3e}");
    }
}
