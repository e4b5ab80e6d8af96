//! Fixed-point inversion of the hysteretic map B → H.
//!
//! Three schemes on the residual g(H, B*) = B(H) − B*:
//!   direct:         Q = H − (μ0·μ_r,max)⁻¹ g
//!   newton:         Q = H − (∂B/∂H)⁻¹ g        (deliberately unrelaxed)
//!   preconditioned: Q = H − [B_an⁻¹(B(H)) − B_an⁻¹(B*)]
//!
//! The preconditioned residual reuses the cheap anhysteretic inverse lookup;
//! it converges from poor initial guesses where the plain Newton scheme
//! diverges. Candidate fields are always evaluated against the same previous
//! play state; the caller commits the state after acceptance.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::math::{Vec2, MU0};
use crate::play::{PlayConfig, PlayState};

/// Relative-error floor: convergence thresholds are tol·max(|B*|, B_FLOOR)
/// so targets near B = 0 do not demand absolute zeros.
const B_FLOOR: f64 = 1e-2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Direct,
    Newton,
    Preconditioned,
}

impl Scheme {
    pub fn all() -> [Scheme; 3] {
        [Scheme::Direct, Scheme::Newton, Scheme::Preconditioned]
    }

    pub fn label(self) -> &'static str {
        match self {
            Scheme::Direct => "direct",
            Scheme::Newton => "newton",
            Scheme::Preconditioned => "preconditioned",
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Scheme> {
        match s {
            "direct" => Ok(Scheme::Direct),
            "newton" => Ok(Scheme::Newton),
            "preconditioned" | "precond" => Ok(Scheme::Preconditioned),
            other => Err(Error::invalid(format!("unknown inversion scheme '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct InversionSettings {
    pub scheme: Scheme,
    /// Relative error target on |B(H) − B*| / |B*|.
    pub tol: f64,
    pub max_iter: u32,
    /// Maximum relative differential permeability; the direct scheme divides
    /// by μ0·μ_r,max. Default 1 + χ_max of the material curve.
    pub mu_r_max: f64,
}

impl InversionSettings {
    pub fn new(scheme: Scheme, tol: f64, config: &PlayConfig) -> Result<Self> {
        let s = InversionSettings {
            scheme,
            tol,
            max_iter: 20,
            mu_r_max: 1.0 + config.curve().chi_max(),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::invalid("inversion tol must be positive"));
        }
        if self.max_iter < 1 {
            return Err(Error::invalid("inversion max_iter must be at least 1"));
        }
        if !(self.mu_r_max >= 1.0) {
            return Err(Error::invalid("mu_r_max must be at least 1"));
        }
        Ok(())
    }

    pub fn with_max_iter(mut self, max_iter: u32) -> Self {
        self.max_iter = max_iter;
        self
    }
}

/// Result of one inversion: best iterate, applications of Q, convergence flag.
#[derive(Clone, Copy, Debug)]
pub struct InvertOutcome {
    pub h: Vec2,
    pub iterations: u32,
    pub converged: bool,
    /// |B(h) − B*| at the returned iterate.
    pub residual: f64,
}

/// Solve B(H) = B* against a fixed play state. The initial residual check
/// counts as iteration 0; every application of Q increments the count.
/// Non-convergence returns the best iterate with `converged = false`.
pub fn invert(
    settings: &InversionSettings,
    config: &PlayConfig,
    state: &PlayState,
    b_star: Vec2,
    h0: Vec2,
) -> Result<InvertOutcome> {
    settings.validate()?;
    if !(b_star.is_finite() && h0.is_finite()) {
        return Err(Error::invalid("non-finite inversion inputs"));
    }
    let threshold = settings.tol * b_star.norm().max(B_FLOOR);
    let mut h = h0;
    let mut g = config.b_of_h(state, h)? - b_star;
    if g.norm() <= threshold {
        return Ok(InvertOutcome { h, iterations: 0, converged: true, residual: g.norm() });
    }
    let mut best = (h, g.norm());
    for it in 1..=settings.max_iter {
        let step = match settings.scheme {
            Scheme::Direct => g * (1.0 / (MU0 * settings.mu_r_max)),
            Scheme::Newton => {
                let (_, tensor, _) = config.eval(state, h)?;
                tensor.inverse().apply(g)
            }
            Scheme::Preconditioned => {
                let b_h = config.b_of_h(state, h)?;
                inverse_anhysteretic(config, b_h)? - inverse_anhysteretic(config, b_star)?
            }
        };
        h = h - step;
        if !h.is_finite() {
            return Ok(InvertOutcome {
                h: best.0,
                iterations: it,
                converged: false,
                residual: best.1,
            });
        }
        g = config.b_of_h(state, h)? - b_star;
        let gn = g.norm();
        if gn < best.1 {
            best = (h, gn);
        }
        if gn <= threshold {
            return Ok(InvertOutcome { h, iterations: it, converged: true, residual: gn });
        }
    }
    Ok(InvertOutcome {
        h: best.0,
        iterations: settings.max_iter,
        converged: false,
        residual: best.1,
    })
}

/// Odd, isotropic extension of the scalar anhysteretic inverse lookup.
/// Out-of-range magnitudes saturate at the table end instead of failing, so a
/// diverging candidate still produces a finite (rejected) iterate.
fn inverse_anhysteretic(config: &PlayConfig, b: Vec2) -> Result<Vec2> {
    let curve = config.curve();
    match b.unit() {
        Some(e) => {
            let mag = b.norm().min(curve.b_max());
            Ok(e * curve.invert_abs(mag)?)
        }
        None => Ok(Vec2::ZERO),
    }
}

/// One row of the inversion benchmark report.
#[derive(Clone, Debug)]
pub struct BenchRow {
    pub scheme: Scheme,
    pub tol: f64,
    pub h0_apm: f64,
    pub mean_iters: f64,
    pub mean_time_us: f64,
    pub converged_fraction: f64,
}

/// Benchmark report over all requested (scheme, tol) combinations.
#[derive(Clone, Debug, Default)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("scheme,tol,h0_Apm,mean_iters,mean_time_us,converged_fraction\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{:e},{},{},{},{}\n",
                r.scheme.label(),
                r.tol,
                r.h0_apm,
                r.mean_iters,
                r.mean_time_us,
                r.converged_fraction
            ));
        }
        out
    }
}

/// Sweep the one-dimensional inverse problem B* = b_mag·e_θ over `n_angles`
/// distinct angles, serially (timing fidelity). Each problem starts from the
/// prepared ascending major branch along e_θ with initial guess h0·e_θ.
pub fn bench_sweep(
    config: &PlayConfig,
    schemes: &[Scheme],
    tols: &[f64],
    n_angles: usize,
    h0: f64,
    b_mag: f64,
) -> Result<BenchReport> {
    if n_angles == 0 {
        return Err(Error::invalid("n_angles must be at least 1"));
    }
    let mut report = BenchReport::default();
    for &scheme in schemes {
        for &tol in tols {
            let settings = InversionSettings::new(scheme, tol, config)?;
            let mut iters: u64 = 0;
            let mut converged: u64 = 0;
            let start = Instant::now();
            for a in 0..n_angles {
                let theta = std::f64::consts::TAU * a as f64 / n_angles as f64;
                let e = Vec2::from_polar(1.0, theta);
                let state = config.prepare_major_branch(e * -2000.0, Vec2::ZERO)?;
                let out = invert(&settings, config, &state, e * b_mag, e * h0)?;
                iters += out.iterations as u64;
                converged += out.converged as u64;
            }
            let elapsed = start.elapsed();
            report.rows.push(BenchRow {
                scheme,
                tol,
                h0_apm: h0,
                mean_iters: iters as f64 / n_angles as f64,
                mean_time_us: elapsed.as_secs_f64() * 1e6 / n_angles as f64,
                converged_fraction: converged as f64 / n_angles as f64,
            });
        }
    }
    Ok(report)
}
