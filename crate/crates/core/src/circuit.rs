//! Excitation waveforms and circuit drive data for field-circuit coupling.

use crate::error::{Error, Result};

/// Drive mode of the coupled circuit equations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DriveMode {
    /// Known conductor currents i_m(t).
    Current,
    /// Known conductor voltages u_m(t).
    Voltage,
}

/// Time-dependent source definition.
///
/// `TriangularPulse` rises linearly for `t_rise`, falls at `fall_rate_multiple`
/// times the rise rate back to zero and holds until the next repetition.
/// `BipolarPulse` is the signed two-segment variant sweeping 0 → +A → −A → 0
/// with the same rise/fall-rate convention, for full-loop ramps.
#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Waveform {
    Zero,
    Sinusoid {
        /// Amplitude, A or V.
        amplitude: f64,
        /// Frequency, Hz.
        frequency: f64,
    },
    TriangularPulse {
        amplitude: f64,
        /// Rise time to peak, s.
        t_rise: f64,
        /// Fall rate as a multiple of the rise rate.
        #[serde(default = "default_fall_multiple")]
        fall_rate_multiple: f64,
        /// Repetition rate, Hz.
        repetition_hz: f64,
    },
    BipolarPulse {
        amplitude: f64,
        t_rise: f64,
        #[serde(default = "default_fall_multiple")]
        fall_rate_multiple: f64,
        repetition_hz: f64,
    },
    /// Piecewise-linear samples (t ascending); constant beyond the ends.
    Samples { t: Vec<f64>, v: Vec<f64> },
}

fn default_fall_multiple() -> f64 {
    4.0
}

impl Waveform {
    pub fn validate(&self) -> Result<()> {
        match self {
            Waveform::Zero => Ok(()),
            Waveform::Sinusoid { frequency, .. } => {
                if *frequency <= 0.0 {
                    return Err(Error::invalid("sinusoid frequency must be positive"));
                }
                Ok(())
            }
            Waveform::TriangularPulse { t_rise, fall_rate_multiple, repetition_hz, .. }
            | Waveform::BipolarPulse { t_rise, fall_rate_multiple, repetition_hz, .. } => {
                if *t_rise <= 0.0 || *fall_rate_multiple <= 0.0 || *repetition_hz <= 0.0 {
                    return Err(Error::invalid("pulse timing parameters must be positive"));
                }
                let active = match self {
                    Waveform::TriangularPulse { .. } => t_rise * (1.0 + 1.0 / fall_rate_multiple),
                    _ => t_rise * (2.0 + 2.0 / fall_rate_multiple),
                };
                if active > 1.0 / repetition_hz {
                    return Err(Error::invalid(
                        "pulse active phase does not fit into the repetition period",
                    ));
                }
                Ok(())
            }
            Waveform::Samples { t, v } => {
                if t.len() != v.len() || t.is_empty() {
                    return Err(Error::invalid("sample arrays must be non-empty, equal length"));
                }
                if t.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::invalid("sample times must be strictly increasing"));
                }
                Ok(())
            }
        }
    }

    /// Fundamental period, for cycle-based post-processing. `None` when the
    /// waveform has no natural period.
    pub fn period(&self) -> Option<f64> {
        match self {
            Waveform::Zero | Waveform::Samples { .. } => None,
            Waveform::Sinusoid { frequency, .. } => Some(1.0 / frequency),
            Waveform::TriangularPulse { repetition_hz, .. }
            | Waveform::BipolarPulse { repetition_hz, .. } => Some(1.0 / repetition_hz),
        }
    }

    /// Source value at time t ≥ 0.
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Waveform::Zero => 0.0,
            Waveform::Sinusoid { amplitude, frequency } => {
                amplitude * (std::f64::consts::TAU * frequency * t).sin()
            }
            Waveform::TriangularPulse { amplitude, t_rise, fall_rate_multiple, repetition_hz } => {
                let tau = t.rem_euclid(1.0 / repetition_hz);
                let t_fall = t_rise / fall_rate_multiple;
                if tau < *t_rise {
                    amplitude * tau / t_rise
                } else if tau < t_rise + t_fall {
                    amplitude * (1.0 - (tau - t_rise) / t_fall)
                } else {
                    0.0
                }
            }
            Waveform::BipolarPulse { amplitude, t_rise, fall_rate_multiple, repetition_hz } => {
                let tau = t.rem_euclid(1.0 / repetition_hz);
                // 0 -> +A at the rise rate, +A -> -A at fall_rate_multiple
                // times the rise rate, -A -> 0 at the rise rate, hold 0
                let t_fall = 2.0 * t_rise / fall_rate_multiple;
                if tau < *t_rise {
                    amplitude * tau / t_rise
                } else if tau < t_rise + t_fall {
                    amplitude * (1.0 - 2.0 * (tau - t_rise) / t_fall)
                } else if tau < 2.0 * t_rise + t_fall {
                    -amplitude * (1.0 - (tau - t_rise - t_fall) / t_rise)
                } else {
                    0.0
                }
            }
            Waveform::Samples { t: ts, v } => {
                if t <= ts[0] {
                    return v[0];
                }
                if t >= *ts.last().unwrap() {
                    return *v.last().unwrap();
                }
                let i = ts.partition_point(|&x| x <= t);
                let (t0, t1) = (ts[i - 1], ts[i]);
                let (v0, v1) = (v[i - 1], v[i]);
                v0 + (v1 - v0) * (t - t0) / (t1 - t0)
            }
        }
    }
}

/// Lumped circuit data of the solid conductors. Resistances follow from the
/// conductor conductances R_m = 1/G_m computed during assembly; all
/// conductors carry the same source by default (series wiring), with an
/// optional per-conductor override.
#[derive(Clone, Debug)]
pub struct CircuitSpec {
    pub n_cond: usize,
    pub drive: DriveMode,
    /// Shared source; `per_conductor` overrides it entry-wise when present.
    pub waveform: Waveform,
    pub per_conductor: Option<Vec<Waveform>>,
}

impl CircuitSpec {
    pub fn new(n_cond: usize, drive: DriveMode, waveform: Waveform) -> Result<Self> {
        waveform.validate()?;
        if n_cond == 0 {
            return Err(Error::invalid("circuit needs at least one conductor"));
        }
        Ok(CircuitSpec { n_cond, drive, waveform, per_conductor: None })
    }

    pub fn with_per_conductor(mut self, waveforms: Vec<Waveform>) -> Result<Self> {
        if waveforms.len() != self.n_cond {
            return Err(Error::invalid("per-conductor waveform count mismatch"));
        }
        for w in &waveforms {
            w.validate()?;
        }
        self.per_conductor = Some(waveforms);
        Ok(self)
    }

    /// Source vector at time t (A in current drive, V in voltage drive).
    pub fn source_at(&self, t: f64) -> Vec<f64> {
        match &self.per_conductor {
            Some(ws) => ws.iter().map(|w| w.eval(t)).collect(),
            None => vec![self.waveform.eval(t); self.n_cond],
        }
    }

    pub fn period(&self) -> Option<f64> {
        self.waveform.period()
    }
}
