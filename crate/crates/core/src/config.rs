//! JSON run configuration and its mapping onto a `Simulation`.

use std::path::Path;
use std::sync::Arc;

use crate::anhysteretic::{AnhystereticCurve, AnhystereticParams};
use crate::assembly::{assemble_circuit_matrices, MaterialKernel, MaterialLaw};
use crate::circuit::{CircuitSpec, DriveMode, Waveform};
use crate::error::{Error, Result};
use crate::geometry::GeometrySpec;
use crate::inversion::{InversionSettings, Scheme};
use crate::math::Vec2;
use crate::mesh::build_mesh;
use crate::play::{PlayConfig, M235_KAPPA, M235_WEIGHTS};
use crate::sheet::SheetParams;
use crate::solver::{Simulation, SolverSettings};

#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "GeometrySpec::quarter_dipole")]
    pub geometry: GeometrySpec,
    /// Material law of the iron yoke.
    #[serde(default = "default_material")]
    pub material: MaterialLaw,
    #[serde(default)]
    pub anhysteretic: AnhystereticParams,
    /// Cell weights and pinning forces; defaults to the built-in M235-35A set.
    #[serde(default)]
    pub hysteresis: HysteresisSection,
    /// Thin-sheet dynamic model parameters.
    #[serde(default)]
    pub dynamic: SheetParams,
    /// Required: drive mode, waveform and conductor conductivity.
    pub excitation: ExcitationSection,
    #[serde(default)]
    pub time: TimeSection,
    #[serde(default)]
    pub probes: ProbesSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub postproc: PostprocSection,
}

fn default_material() -> MaterialLaw {
    MaterialLaw::Hysteretic
}

#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HysteresisSection {
    pub w: Vec<f64>,
    pub kappa: Vec<f64>,
}

impl Default for HysteresisSection {
    fn default() -> Self {
        HysteresisSection { w: M235_WEIGHTS.to_vec(), kappa: M235_KAPPA.to_vec() }
    }
}

#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExcitationSection {
    pub drive: DriveMode,
    pub waveform: Waveform,
    /// Solid-conductor conductivity, S/m.
    #[serde(default = "default_sigma_conductor")]
    pub sigma_conductor: f64,
}

fn default_sigma_conductor() -> f64 {
    5.8e6
}

#[derive(Clone, Copy, Debug, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeSection {
    /// Implicit Euler step, s.
    pub dt: f64,
    pub duration: f64,
}

impl Default for TimeSection {
    fn default() -> Self {
        TimeSection { dt: 1e-5, duration: 6e-3 }
    }
}

#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BhProbeSpec {
    pub label: String,
    pub point: [f64; 2],
}

#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbesSection {
    /// Aperture dipole probe point.
    pub dipole: [f64; 2],
    pub bh: Vec<BhProbeSpec>,
}

impl Default for ProbesSection {
    fn default() -> Self {
        ProbesSection {
            dipole: [0.005, 0.005],
            bh: vec![
                BhProbeSpec { label: "A".into(), point: [0.025, 0.060] },
                BhProbeSpec { label: "B".into(), point: [0.090, 0.125] },
                BhProbeSpec { label: "C".into(), point: [0.170, 0.050] },
                BhProbeSpec { label: "D".into(), point: [0.030, 0.030] },
            ],
        }
    }
}

#[derive(Clone, Copy, Debug, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub newton_tol: f64,
    pub newton_max_iter: u32,
    /// Fixed Newton iteration count (runtime benchmark mode).
    pub fixed_newton: Option<u32>,
    pub inversion_tol: f64,
    pub inversion_max_iter: u32,
    pub threads: usize,
}

impl Default for SolverSection {
    fn default() -> Self {
        SolverSection {
            newton_tol: 1e-6,
            newton_max_iter: 14,
            fixed_newton: None,
            inversion_tol: 1e-9,
            inversion_max_iter: 20,
            threads: 1,
        }
    }
}

#[derive(Clone, Copy, Debug, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PostprocSection {
    /// Mass density of the lamination stack, kg/m³.
    pub gamma: f64,
    /// A-posteriori hysteresis coefficient, W/(kg·Hz·T²).
    pub k_hyst: f64,
    /// A-posteriori eddy coefficient, W/(kg·Hz²·T²).
    pub k_eddy: f64,
}

impl Default for PostprocSection {
    fn default() -> Self {
        PostprocSection { gamma: 7600.0, k_hyst: 13.88e-3, k_eddy: 44.77e-6 }
    }
}

impl RunConfig {
    /// Parse a config file, reporting schema violations with the JSON path of
    /// the offending key.
    pub fn from_path(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<RunConfig> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let mut path = e
                .path()
                .iter()
                .map(|seg| seg.to_string())
                .collect::<Vec<_>>()
                .join("/");
            let message = e.inner().to_string();
            // a missing top-level section reports at the root; name the field
            if let Some(field) = message
                .strip_prefix("missing field `")
                .and_then(|rest| rest.split('`').next())
            {
                if path.is_empty() {
                    path = field.to_string();
                } else {
                    path = format!("{path}/{field}");
                }
            }
            Error::ConfigSchema { path: format!("/{path}"), message }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.geometry.validate()?;
        self.excitation.waveform.validate()?;
        self.dynamic.validate()?;
        if !(self.time.dt > 0.0) {
            return Err(Error::config("time/dt must be positive"));
        }
        let steps = self.time.duration / self.time.dt;
        if steps < 0.5 || (steps - steps.round()).abs() > 1e-9 * steps {
            return Err(Error::config("time/duration must be a positive multiple of dt"));
        }
        if self.solver.threads < 1 {
            return Err(Error::config("solver/threads must be at least 1"));
        }
        if !(self.postproc.gamma > 0.0) {
            return Err(Error::config("postproc/gamma must be positive"));
        }
        Ok(())
    }

    /// Override the worker count (CLI flag beats HYSTERMAG_THREADS beats the
    /// config value).
    pub fn resolve_threads(&mut self, cli: Option<usize>) {
        if let Some(n) = cli {
            self.solver.threads = n.max(1);
        } else if let Ok(v) = std::env::var("HYSTERMAG_THREADS") {
            if let Ok(n) = v.parse::<usize>() {
                self.solver.threads = n.max(1);
            }
        }
    }

    pub fn build_kernel(&self) -> Result<MaterialKernel> {
        let curve = Arc::new(AnhystereticCurve::new(self.anhysteretic)?);
        let play = PlayConfig::new(&self.hysteresis.w, &self.hysteresis.kappa, curve.clone())?;
        let inversion = InversionSettings::new(
            Scheme::Preconditioned,
            self.solver.inversion_tol,
            &play,
        )?
        .with_max_iter(self.solver.inversion_max_iter);
        Ok(MaterialKernel { law: self.material, curve, play, inversion, sheet: self.dynamic })
    }

    pub fn build_simulation(&self) -> Result<Simulation> {
        let mesh = build_mesh(&self.geometry)?;
        let kernel = self.build_kernel()?;
        let matrices = assemble_circuit_matrices(
            &mesh,
            self.excitation.sigma_conductor,
            kernel.sheet.coefficient(),
        )?;
        let circuit = CircuitSpec::new(
            self.geometry.conductors.len(),
            self.excitation.drive,
            self.excitation.waveform.clone(),
        )?;
        let settings = SolverSettings {
            newton_tol: self.solver.newton_tol,
            newton_max_iter: self.solver.newton_max_iter,
            fixed_newton: self.solver.fixed_newton,
            threads: self.solver.threads,
            max_dt_halvings: 3,
        };
        let bh_points: Vec<(String, Vec2)> = self
            .probes
            .bh
            .iter()
            .map(|p| (p.label.clone(), Vec2::new(p.point[0], p.point[1])))
            .collect();
        Simulation::new(
            mesh,
            kernel,
            circuit,
            matrices,
            settings,
            self.time.dt,
            self.time.duration,
            &bh_points,
        )
    }

    /// The bundled sinusoidal reference scenario: 12.5 kA at 500 Hz, three
    /// periods, 100 steps per millisecond, hysteretic dynamic material.
    pub fn example_sinusoid() -> RunConfig {
        RunConfig {
            geometry: GeometrySpec::quarter_dipole(),
            material: MaterialLaw::Hysteretic,
            anhysteretic: AnhystereticParams::default(),
            hysteresis: HysteresisSection::default(),
            dynamic: SheetParams::default(),
            excitation: ExcitationSection {
                drive: DriveMode::Current,
                waveform: Waveform::Sinusoid { amplitude: 12.5e3, frequency: 500.0 },
                sigma_conductor: default_sigma_conductor(),
            },
            time: TimeSection { dt: 1e-5, duration: 6e-3 },
            probes: ProbesSection::default(),
            solver: SolverSection::default(),
            postproc: PostprocSection::default(),
        }
    }

    /// The bundled pulsed scenario: bipolar triangular pulse sweeping
    /// ±12.5 kA with fall rates four times the rise rates, 100 Hz repetition.
    pub fn example_pulse() -> RunConfig {
        let mut cfg = RunConfig::example_sinusoid();
        cfg.excitation.waveform = Waveform::BipolarPulse {
            amplitude: 12.5e3,
            t_rise: 0.8e-3,
            fall_rate_multiple: 4.0,
            repetition_hz: 100.0,
        };
        cfg.time = TimeSection { dt: 1e-5, duration: 20e-3 };
        cfg
    }
}
