//! Loss accounting, a-posteriori estimates, field probes and energy-balance
//! reporting over a solution archive.

use crate::error::{Error, Result};
use crate::math::Vec2;
use crate::mesh::{Mesh, RegionTag};
use crate::solver::{ProbeSeries, SolutionArchive};

/// Normalization of the a-posteriori hysteresis formula:
/// ∫_0^{2π} |2π cos θ| dθ / 2π = 4.
pub const APOSTERIORI_HYST_DENOMINATOR: f64 = 4.0;
/// Normalization of the a-posteriori eddy formula:
/// ∫_0^{2π} |2π cos θ|² dθ / 2π = 2π².
pub const APOSTERIORI_EDDY_DENOMINATOR: f64 =
    2.0 * std::f64::consts::PI * std::f64::consts::PI;

/// Loss channels of one run, per metre of magnet length.
#[derive(Clone, Debug)]
pub struct LossSeries {
    pub t: Vec<f64>,
    pub p_res: Vec<f64>,
    pub p_eddy: Vec<f64>,
    pub p_hyst: Vec<f64>,
    pub w_mag: Vec<f64>,
}

impl LossSeries {
    pub fn from_archive(archive: &SolutionArchive) -> LossSeries {
        LossSeries {
            t: archive.times.clone(),
            p_res: archive.p_res.clone(),
            p_eddy: archive.p_eddy.clone(),
            p_hyst: archive.p_hyst.clone(),
            w_mag: archive.w_mag.clone(),
        }
    }
}

/// Lumped "voltage form" of the resistive loss Σ_m u_m²/R_m = Σ_m G_m·u_m².
/// Agrees with the archived ∫σ|E|² when the current distribution in each
/// conductor is uniform (e.g. DC steady state).
pub fn resistive_voltage_form(archive: &SolutionArchive, g: &[f64]) -> Vec<f64> {
    archive
        .u
        .iter()
        .map(|u| u.iter().zip(g).map(|(um, gm)| gm * um * um).sum())
        .collect()
}

/// Integrate one per-step power series over archive rows (start, end].
pub fn integrate_rows(archive: &SolutionArchive, series: &[f64], start: usize, end: usize) -> f64 {
    let mut acc = 0.0;
    for k in start + 1..=end {
        acc += series[k] * (archive.times[k] - archive.times[k - 1]);
    }
    acc
}

/// Per-cycle energy balance row.
#[derive(Clone, Copy, Debug)]
pub struct CycleBalance {
    pub cycle: usize,
    pub input_j: f64,
    pub delta_w_j: f64,
    pub res_j: f64,
    pub eddy_j: f64,
    pub hyst_j: f64,
    /// |input − (ΔW + losses)| / max(|input|, Σ|channels|)
    pub defect_rel: f64,
}

/// Energy-balance closure per full drive cycle.
pub fn energy_balance(archive: &SolutionArchive) -> Result<Vec<CycleBalance>> {
    let period = archive
        .drive_period
        .ok_or_else(|| Error::invalid("energy balance needs a periodic drive"))?;
    let n_cycles = ((archive.times.last().unwrap() + 1e-9 * period) / period) as usize;
    let mut out = Vec::new();
    for cycle in 1..=n_cycles {
        let (start, end) = match archive.cycle_rows(cycle) {
            Some(r) => r,
            None => break,
        };
        let input = integrate_rows(archive, &archive.input_power, start, end);
        let res = integrate_rows(archive, &archive.p_res, start, end);
        let eddy = integrate_rows(archive, &archive.p_eddy, start, end);
        let hyst = integrate_rows(archive, &archive.p_hyst, start, end);
        let dw = archive.w_mag[end] - archive.w_mag[start];
        let scale = input.abs().max(res + eddy + hyst + dw.abs()).max(1e-30);
        let defect = (input - (dw + res + eddy + hyst)).abs() / scale;
        out.push(CycleBalance {
            cycle,
            input_j: input,
            delta_w_j: dw,
            res_j: res,
            eddy_j: eddy,
            hyst_j: hyst,
            defect_rel: defect,
        });
    }
    Ok(out)
}

/// A-posteriori loss estimates of one local flux-density history over one
/// cycle: time-averaged W/m³ for unit mass density γ = 1 (scale by γ).
///
/// p̄_hyst = k_hyst·(∫|Ḃ|·B̂ dt / T) / 4,  p̄_eddy = k_eddy·(∫|Ḃ|² dt / T) / 2π²,
/// with B̂ half the peak-to-peak of the local flux density.
pub fn aposteriori_point(
    times: &[f64],
    b: &[Vec2],
    k_hyst: f64,
    k_eddy: f64,
) -> (f64, f64) {
    assert_eq!(times.len(), b.len());
    if b.len() < 2 {
        return (0.0, 0.0);
    }
    let period = times.last().unwrap() - times[0];
    // B̂: half the largest pairwise distance of the sampled locus
    let mut b_hat = 0.0f64;
    for i in 0..b.len() {
        for j in i + 1..b.len() {
            b_hat = b_hat.max((b[i] - b[j]).norm());
        }
    }
    b_hat *= 0.5;
    let mut tv = 0.0; // ∫|Ḃ| dt
    let mut sq = 0.0; // ∫|Ḃ|² dt
    for k in 1..b.len() {
        let dt = times[k] - times[k - 1];
        let db = (b[k] - b[k - 1]).norm();
        tv += db;
        sq += db * db / dt;
    }
    let p_hyst = k_hyst * (tv * b_hat / period) / APOSTERIORI_HYST_DENOMINATOR;
    let p_eddy = k_eddy * (sq / period) / APOSTERIORI_EDDY_DENOMINATOR;
    (p_hyst, p_eddy)
}

/// Volume-integrated a-posteriori iron losses over the last full drive cycle.
/// Returns time-averaged powers (W/m) and per-cycle energies (J/m).
#[derive(Clone, Copy, Debug)]
pub struct AposterioriLosses {
    pub p_hyst_w: f64,
    pub p_eddy_w: f64,
    pub hyst_per_cycle_j: f64,
    pub eddy_per_cycle_j: f64,
}

pub fn aposteriori_losses(
    mesh: &Mesh,
    archive: &SolutionArchive,
    gamma: f64,
    k_hyst: f64,
    k_eddy: f64,
) -> Result<AposterioriLosses> {
    let period = archive
        .drive_period
        .ok_or_else(|| Error::invalid("a-posteriori estimate needs a periodic drive"))?;
    let n_cycles = ((archive.times.last().unwrap() + 1e-9 * period) / period) as usize;
    let (start, end) = archive
        .cycle_rows(n_cycles.max(1))
        .ok_or_else(|| Error::invalid("archive shorter than one drive cycle"))?;
    let times = &archive.times[start..=end];
    let mut p_hyst = 0.0;
    let mut p_eddy = 0.0;
    for &t in &mesh.iron_tris {
        let b: Vec<Vec2> =
            (start..=end).map(|k| mesh.flux_density(&archive.a[k], t)).collect();
        let (ph, pe) = aposteriori_point(times, &b, k_hyst, k_eddy);
        p_hyst += gamma * ph * mesh.areas[t];
        p_eddy += gamma * pe * mesh.areas[t];
    }
    Ok(AposterioriLosses {
        p_hyst_w: p_hyst,
        p_eddy_w: p_eddy,
        hyst_per_cycle_j: p_hyst * period,
        eddy_per_cycle_j: p_eddy * period,
    })
}

/// Vertical flux-density component at a probe point, one value per archived
/// time, taken from the element containing the point.
pub fn probe_dipole(mesh: &Mesh, archive: &SolutionArchive, point: Vec2) -> Result<Vec<f64>> {
    let tri = mesh
        .find_triangle(point)
        .ok_or_else(|| Error::invalid(format!("probe point ({}, {}) outside mesh", point.x, point.y)))?;
    if mesh.tags[tri] != RegionTag::Air {
        return Err(Error::invalid("dipole probe must lie in the air gap"));
    }
    Ok(archive.a.iter().map(|a| mesh.flux_density(a, tri).y).collect())
}

/// Relative-difference series |x − reference| / max|reference| between two
/// dipole series of equal sampling.
pub fn dipole_difference(series: &[f64], reference: &[f64]) -> Vec<f64> {
    let scale = reference.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    series
        .iter()
        .zip(reference)
        .map(|(s, r)| (s - r).abs() / scale)
        .collect()
}

/// Enclosed area of a BH locus over archive rows (start, end]: ∮H·dB by the
/// trapezoid rule. J/m³ for a closed cycle.
pub fn bh_loop_area(probe: &ProbeSeries, start: usize, end: usize) -> f64 {
    let mut area = 0.0;
    for k in start + 1..=end {
        let (s0, s1) = (&probe.samples[k - 1], &probe.samples[k]);
        area += (s1.h + s0.h).dot(s1.b - s0.b) * 0.5;
    }
    area
}

/// Areas enclosed between each branch of a BH cycle and the chord connecting
/// the two B-extremes. Branches are split at the extreme projections of B on
/// its dominant direction; returns (ascending, descending) areas.
pub fn bh_branch_areas(probe: &ProbeSeries, start: usize, end: usize) -> (f64, f64) {
    let samples = &probe.samples[start..=end];
    if samples.len() < 3 {
        return (0.0, 0.0);
    }
    // dominant direction from the largest pairwise spread
    let (mut pi, mut pj, mut best) = (0, 0, 0.0f64);
    for i in 0..samples.len() {
        for j in i + 1..samples.len() {
            let d = (samples[i].b - samples[j].b).norm();
            if d > best {
                best = d;
                pi = i;
                pj = j;
            }
        }
    }
    let dir = match (samples[pj].b - samples[pi].b).unit() {
        Some(d) => d,
        None => return (0.0, 0.0),
    };
    let proj: Vec<f64> = samples.iter().map(|s| s.b.dot(dir)).collect();
    let imin = (0..proj.len()).min_by(|&a, &b| proj[a].partial_cmp(&proj[b]).unwrap()).unwrap();
    let imax = (0..proj.len()).max_by(|&a, &b| proj[a].partial_cmp(&proj[b]).unwrap()).unwrap();
    let n = samples.len();
    let segment_area = |from: usize, to: usize| -> f64 {
        // line integral ∮H·dB along the branch from 'from' to 'to' (cyclic),
        // closed with the straight chord back
        let mut area = 0.0;
        let mut k = from;
        while k != to {
            let next = (k + 1) % n;
            area += (samples[next].h + samples[k].h).dot(samples[next].b - samples[k].b) * 0.5;
            k = next;
        }
        // chord closes the loop
        area += (samples[from].h + samples[to].h).dot(samples[from].b - samples[to].b) * 0.5;
        area.abs()
    };
    let ascending = segment_area(imin, imax);
    let descending = segment_area(imax, imin);
    (ascending, descending)
}

/// Hysteresis energy of one full drive cycle, J/m.
pub fn hysteresis_per_cycle(archive: &SolutionArchive, cycle: usize) -> Option<f64> {
    let (start, end) = archive.cycle_rows(cycle)?;
    Some(integrate_rows(archive, &archive.p_hyst, start, end))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn denominators_are_analytic() {
        // ∫|2π cos|dθ/2π = 4 and ∫|2π cos|²dθ/2π = 2π², checked against
        // a fine quadrature of the defining integrals
        let n = 2_000_000;
        let mut i1 = 0.0;
        let mut i2 = 0.0;
        for k in 0..n {
            let th = std::f64::consts::TAU * (k as f64 + 0.5) / n as f64;
            let v = (std::f64::consts::TAU * th.cos()).abs();
            i1 += v;
            i2 += v * v;
        }
        i1 /= n as f64;
        i2 /= n as f64;
        assert!((i1 - APOSTERIORI_HYST_DENOMINATOR).abs() < 1e-9);
        assert!((i2 - APOSTERIORI_EDDY_DENOMINATOR).abs() < 1e-6);
    }

    #[test]
    fn sinusoid_reduction_exact_for_hysteresis() {
        // uniform B = 1 T · sin(2π·50 t): p̄_hyst reduces to k_hyst·f·B̂²
        let f = 50.0;
        let n = 400; // divisible by 4 so the extremes are sampled
        let times: Vec<f64> = (0..=n).map(|k| k as f64 / (n as f64 * f)).collect();
        let b: Vec<Vec2> = times
            .iter()
            .map(|&t| Vec2::new((std::f64::consts::TAU * f * t).sin(), 0.0))
            .collect();
        let k_hyst = 13.88e-3;
        let k_eddy = 44.77e-6;
        let (ph, pe) = aposteriori_point(&times, &b, k_hyst, k_eddy);
        let ph_expect = k_hyst * f;
        assert!(
            (ph - ph_expect).abs() < 1e-12 * ph_expect,
            "hysteresis reduction: {ph} vs {ph_expect}"
        );
        // the eddy integral carries the O((π/n)²) quadrature factor
        let pe_expect = k_eddy * f * f;
        assert!((pe - pe_expect).abs() < 1e-4 * pe_expect);
    }

    #[test]
    fn triangle_wave_matches_sinusoid_hysteresis() {
        // ∫|Ḃ|dt = 4B̂ for any slope shape over a cycle
        let f = 50.0;
        let n = 400;
        let times: Vec<f64> = (0..=n).map(|k| k as f64 / (n as f64 * f)).collect();
        let tri: Vec<Vec2> = times
            .iter()
            .map(|&t| {
                let phase = (t * f).rem_euclid(1.0);
                let v = if phase < 0.25 {
                    4.0 * phase
                } else if phase < 0.75 {
                    2.0 - 4.0 * phase
                } else {
                    4.0 * phase - 4.0
                };
                Vec2::new(v, 0.0)
            })
            .collect();
        let (ph, _) = aposteriori_point(&times, &tri, 13.88e-3, 44.77e-6);
        assert!((ph - 13.88e-3 * f).abs() < 1e-12 * 13.88e-3 * f);
    }

    #[test]
    fn zero_b_dot_gives_zero() {
        let times = vec![0.0, 0.5, 1.0];
        let b = vec![Vec2::new(0.3, 0.0); 3];
        let (ph, pe) = aposteriori_point(&times, &b, 1.0, 1.0);
        assert_eq!(ph, 0.0);
        assert_eq!(pe, 0.0);
    }

    #[test]
    fn dipole_difference_scaling() {
        let r = vec![0.0, 1.0, 2.0];
        let s = vec![0.0, 1.1, 2.0];
        let d = dipole_difference(&s, &r);
        assert!((d[1] - 0.05).abs() < 1e-12);
    }
}
