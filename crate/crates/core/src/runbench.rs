//! Runtime scaling benchmark: material-evaluation wall time against the
//! number of iron integration points, at a fixed Newton iteration count.

use crate::config::RunConfig;
use crate::error::Result;

#[derive(Clone, Copy, Debug)]
pub struct RuntimeRow {
    pub level: usize,
    pub threads: usize,
    pub n_int_fe: usize,
    pub n_nodes: usize,
    pub material_seconds: f64,
    pub per_point_us: f64,
    pub total_seconds: f64,
}

#[derive(Clone, Debug, Default)]
pub struct RuntimeReport {
    pub rows: Vec<RuntimeRow>,
    /// material-time ratios between successive single-thread levels
    pub doubling_ratios: Vec<f64>,
    /// single-thread / multi-thread material time on the finest level
    pub speedup_finest: Option<f64>,
    /// slope of the least-squares fit material_seconds ~ slope·n_int_fe
    pub fit_slope_us: f64,
}

impl RuntimeReport {
    pub fn to_csv(&self, meta: &str) -> String {
        let mut out = String::from(meta);
        out.push_str("level,threads,n_int_fe,n_nodes,material_seconds,per_point_us,total_seconds\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.level,
                r.threads,
                r.n_int_fe,
                r.n_nodes,
                r.material_seconds,
                r.per_point_us,
                r.total_seconds
            ));
        }
        out
    }
}

/// Run the configured scenario over `levels` uniformly refined meshes
/// (element sizes scaled by 1/√2 per level, roughly doubling the iron point
/// count), with the Newton count pinned. Each level runs single-threaded;
/// the finest level is repeated with `speedup_threads` workers when > 1.
pub fn run_scaling(
    base: &RunConfig,
    levels: usize,
    fixed_newton: u32,
    speedup_threads: usize,
) -> Result<RuntimeReport> {
    let mut report = RuntimeReport::default();
    let mut serial_times = Vec::new();
    for level in 0..levels {
        let mut cfg = base.clone();
        cfg.solver.fixed_newton = Some(fixed_newton);
        cfg.solver.threads = 1;
        let scale = (0.5f64).powf(level as f64 / 2.0);
        cfg.geometry.element_size = base.geometry.element_size.scaled(scale);
        let row = run_level(&cfg, level, 1)?;
        serial_times.push((row.n_int_fe as f64, row.material_seconds));
        report.rows.push(row);
    }
    for w in serial_times.windows(2) {
        report.doubling_ratios.push(w[1].1 / w[0].1);
    }
    // least-squares through the origin: material time per point
    let num: f64 = serial_times.iter().map(|(n, t)| n * t).sum();
    let den: f64 = serial_times.iter().map(|(n, _)| n * n).sum();
    report.fit_slope_us = 1e6 * num / den;
    if speedup_threads > 1 && levels > 0 {
        let level = levels - 1;
        let mut cfg = base.clone();
        cfg.solver.fixed_newton = Some(fixed_newton);
        cfg.solver.threads = speedup_threads;
        let scale = (0.5f64).powf(level as f64 / 2.0);
        cfg.geometry.element_size = base.geometry.element_size.scaled(scale);
        let row = run_level(&cfg, level, speedup_threads)?;
        report.speedup_finest =
            Some(serial_times.last().unwrap().1 / row.material_seconds);
        report.rows.push(row);
    }
    Ok(report)
}

fn run_level(cfg: &RunConfig, level: usize, threads: usize) -> Result<RuntimeRow> {
    let sim = cfg.build_simulation()?;
    let start = std::time::Instant::now();
    let archive = sim.transient_solve()?;
    let total = start.elapsed().as_secs_f64();
    let evals = archive.n_steps() as f64
        * cfg.solver.fixed_newton.unwrap_or(1) as f64
        * archive.n_iron_points as f64;
    Ok(RuntimeRow {
        level,
        threads,
        n_int_fe: archive.n_iron_points,
        n_nodes: sim.mesh.n_nodes(),
        material_seconds: archive.material_seconds,
        per_point_us: 1e6 * archive.material_seconds / evals.max(1.0),
        total_seconds: total,
    })
}
