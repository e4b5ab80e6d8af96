//! Command-line interface: scenario runs, benchmark harnesses, mesh export.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};

use crate::config::RunConfig;
use crate::csvio;
use crate::error::{Error, Result};
use crate::inversion::{bench_sweep, Scheme};
use crate::math::Vec2;
use crate::mesh::build_mesh;
use crate::postproc;
use crate::runbench;

#[derive(Parser, Debug)]
#[command(name = "hystermag", version, about = "Transient 2-D magnetoquasistatic FE solver with hysteresis")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a transient scenario and write the CSV set.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (one per run).
        #[arg(long)]
        out: PathBuf,
        /// Overwrite an existing non-empty output directory.
        #[arg(long)]
        force: bool,
        /// Material-evaluation worker threads (overrides HYSTERMAG_THREADS and config).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Inversion-scheme benchmark over distinct angles.
    BenchInversion {
        /// Comma-separated relative tolerances.
        #[arg(long, default_value = "1e-3,1e-6,1e-9")]
        tol: String,
        /// Initial guess magnitude, A/m.
        #[arg(long, default_value_t = 100.0)]
        h0: f64,
        #[arg(long, default_value_t = 36000)]
        angles: usize,
        /// direct | newton | preconditioned | all
        #[arg(long, default_value = "all")]
        scheme: String,
        /// Target |B*|, tesla.
        #[arg(long, default_value_t = 0.7)]
        b_mag: f64,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Runtime scaling of the material-evaluation phase over mesh refinements.
    BenchRuntime {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 3)]
        refinements: usize,
        /// Worker threads for the finest-mesh speedup measurement.
        #[arg(long, default_value_t = 2)]
        threads: usize,
        #[arg(long, default_value_t = 5)]
        fixed_newton: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the mesh of a configuration as nodes/elements CSV.
    MeshExport {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        force: bool,
    },
    /// Print a bundled example configuration (sinusoid | pulse).
    ExampleConfig {
        #[arg(long, default_value = "sinusoid")]
        scenario: String,
    },
}

/// Entry point; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let is_help = e.use_stderr();
            let _ = e.print();
            return if is_help { 2 } else { 0 };
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { config, out, force, threads } => simulate(&config, &out, force, threads),
        Command::BenchInversion { tol, h0, angles, scheme, b_mag, out } => {
            bench_inversion(&tol, h0, angles, &scheme, b_mag, &out)
        }
        Command::BenchRuntime { config, refinements, threads, fixed_newton, out } => {
            bench_runtime(&config, refinements, threads, fixed_newton, &out)
        }
        Command::MeshExport { config, out, force } => mesh_export(&config, &out, force),
        Command::ExampleConfig { scenario } => {
            let cfg = match scenario.as_str() {
                "sinusoid" => RunConfig::example_sinusoid(),
                "pulse" => RunConfig::example_pulse(),
                other => return Err(Error::invalid(format!("unknown scenario '{other}'"))),
            };
            println!("{}", serde_json::to_string_pretty(&cfg).expect("config serializes"));
            Ok(())
        }
    }
}

fn prepare_out_dir(out: &Path, force: bool) -> Result<()> {
    if out.exists() {
        let non_empty = out.read_dir()?.next().is_some();
        if non_empty && !force {
            return Err(Error::config(format!(
                "output directory {} is not empty (use --force to overwrite)",
                out.display()
            )));
        }
    }
    std::fs::create_dir_all(out)?;
    Ok(())
}

fn config_stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "config".into())
}

fn simulate(config_path: &Path, out: &Path, force: bool, threads: Option<usize>) -> Result<()> {
    let mut cfg = RunConfig::from_path(config_path)?;
    cfg.resolve_threads(threads);
    prepare_out_dir(out, force)?;
    let sim = cfg.build_simulation()?;
    let wall = Instant::now();
    let archive = sim.transient_solve()?;
    let elapsed = wall.elapsed().as_secs_f64();
    let newton_total: u32 = archive.newton_iters.iter().sum();
    eprintln!(
        "simulate: N_t={} steps, {} Newton iterations total, {} iron points, {:.2} s wall ({:.2} s material)",
        archive.n_steps(),
        newton_total,
        archive.n_iron_points,
        elapsed,
        archive.material_seconds
    );

    let detail = format!(
        "run=simulate; config={}; threads={}; nt={}",
        config_stem(config_path),
        cfg.solver.threads,
        archive.n_steps()
    );
    let meta = csvio::metadata_line("simulate", &detail);

    csvio::write_file(&out.join("losses.csv"), &csvio::losses_csv(&archive, &meta))?;
    csvio::write_file(&out.join("circuit.csv"), &csvio::circuit_csv(&archive, &meta))?;

    let dipole_point = Vec2::new(cfg.probes.dipole[0], cfg.probes.dipole[1]);
    let dipole = postproc::probe_dipole(&sim.mesh, &archive, dipole_point)?;
    csvio::write_file(
        &out.join("probe_dipole.csv"),
        &csvio::dipole_csv(&archive.times, &dipole, &meta),
    )?;

    for probe in &archive.probes {
        let samples: Vec<(Vec2, Vec2)> = probe.samples.iter().map(|s| (s.b, s.h)).collect();
        csvio::write_file(
            &out.join(format!("probe_bh_{}.csv", probe.label)),
            &csvio::probe_bh_csv(&archive.times, &samples, &meta),
        )?;
    }

    if archive.drive_period.is_some() {
        let balance = postproc::energy_balance(&archive)?;
        csvio::write_file(&out.join("balance.csv"), &csvio::balance_csv(&balance, &meta))?;
    }
    Ok(())
}

fn bench_inversion(
    tols: &str,
    h0: f64,
    angles: usize,
    scheme: &str,
    b_mag: f64,
    out: &Path,
) -> Result<()> {
    let tols: Vec<f64> = tols
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|e| Error::invalid(format!("bad tol '{s}': {e}"))))
        .collect::<Result<_>>()?;
    let schemes: Vec<Scheme> = match scheme {
        "all" => Scheme::all().to_vec(),
        other => vec![other.parse()?],
    };
    let curve = std::sync::Arc::new(crate::anhysteretic::AnhystereticCurve::with_defaults());
    let play = crate::play::PlayConfig::m235(curve);
    let report = bench_sweep(&play, &schemes, &tols, angles, h0, b_mag)?;
    for row in &report.rows {
        eprintln!(
            "bench-inversion: {} tol={:.0e} h0={} A/m -> {:.1} iterations, {:.2} us/problem (converged {:.1}%)",
            row.scheme.label(),
            row.tol,
            row.h0_apm,
            row.mean_iters,
            row.mean_time_us,
            100.0 * row.converged_fraction
        );
    }
    let meta = csvio::metadata_line(
        "bench-inversion",
        &format!("angles={angles}; h0={h0}; b_mag={b_mag}"),
    );
    csvio::write_file(out, &format!("{meta}{}", report.to_csv()))?;
    Ok(())
}

fn bench_runtime(
    config_path: &Path,
    refinements: usize,
    threads: usize,
    fixed_newton: u32,
    out: &Path,
) -> Result<()> {
    let cfg = RunConfig::from_path(config_path)?;
    let report = runbench::run_scaling(&cfg, refinements, fixed_newton, threads)?;
    for r in &report.rows {
        eprintln!(
            "bench-runtime: level {} ({} threads): N_int_fe={}, material {:.3} s ({:.2} us/point)",
            r.level, r.threads, r.n_int_fe, r.material_seconds, r.per_point_us
        );
    }
    eprintln!(
        "bench-runtime: fit {:.2} us/point; doubling ratios {:?}; finest-mesh speedup {:?}",
        report.fit_slope_us, report.doubling_ratios, report.speedup_finest
    );
    let meta = csvio::metadata_line(
        "bench-runtime",
        &format!(
            "config={}; refinements={refinements}; fixed_newton={fixed_newton}",
            config_stem(config_path)
        ),
    );
    csvio::write_file(out, &report.to_csv(&meta))?;
    Ok(())
}

fn mesh_export(config_path: &Path, out: &Path, force: bool) -> Result<()> {
    let cfg = RunConfig::from_path(config_path)?;
    prepare_out_dir(out, force)?;
    let mesh = build_mesh(&cfg.geometry)?;
    let (nodes, elems) = mesh.export_csv();
    let meta = csvio::metadata_line("mesh-export", &format!("config={}", config_stem(config_path)));
    csvio::write_file(&out.join("mesh_nodes.csv"), &format!("{meta}{nodes}"))?;
    csvio::write_file(&out.join("mesh_elements.csv"), &format!("{meta}{elems}"))?;
    eprintln!(
        "mesh-export: {} nodes, {} triangles ({} iron)",
        mesh.n_nodes(),
        mesh.n_tris(),
        mesh.iron_tris.len()
    );
    Ok(())
}
