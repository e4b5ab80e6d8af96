//! Finite-element assembly: circuit coupling matrices and the nonlinear
//! material contributions.
//!
//! Lowest-order nodal elements for the out-of-plane vector potential; the
//! flux density is constant per triangle, so each triangle owns exactly one
//! material evaluation point. Distribution functions are x_m = e_z·χ_m/ℓ
//! with model length ℓ = 1 m (all results per metre).

use std::sync::Arc;

use crate::anhysteretic::AnhystereticCurve;
use crate::error::{Error, Result};
use crate::inversion::{invert, InversionSettings};
use crate::math::{SymMat2, Vec2, MU0};
use crate::mesh::{Mesh, RegionTag};
use crate::play::{PlayConfig, PlayState};
use crate::sheet::SheetParams;
use crate::sparse::SymCsr;

/// Free-node numbering with Dirichlet nodes eliminated.
#[derive(Clone, Debug)]
pub struct DofMap {
    /// free index per node, -1 for Dirichlet nodes
    pub free_of_node: Vec<isize>,
    pub node_of_free: Vec<usize>,
}

impl DofMap {
    pub fn new(mesh: &Mesh) -> DofMap {
        let mut free_of_node = vec![-1isize; mesh.n_nodes()];
        let mut node_of_free = Vec::new();
        for n in 0..mesh.n_nodes() {
            if !mesh.dirichlet[n] {
                free_of_node[n] = node_of_free.len() as isize;
                node_of_free.push(n);
            }
        }
        DofMap { free_of_node, node_of_free }
    }

    pub fn n_free(&self) -> usize {
        self.node_of_free.len()
    }

    pub fn restrict(&self, full: &[f64]) -> Vec<f64> {
        self.node_of_free.iter().map(|&n| full[n]).collect()
    }

    pub fn scatter_add(&self, free: &[f64], full: &mut [f64]) {
        for (f, &n) in self.node_of_free.iter().enumerate() {
            full[n] += free[f];
        }
    }
}

/// Conductivity mass matrix M_σ, dynamic sheet matrix M_sheet, coupling
/// columns X and conductor conductances G (ℓ = 1 m).
#[derive(Clone, Debug)]
pub struct CircuitMatrices {
    /// (w_j, σ w_k) over conductor regions, full node set.
    pub m_sigma: SymCsr,
    /// (v_j, c v_k) over iron, full node set (zero when the dynamic model is off).
    pub m_sheet: SymCsr,
    /// column m of X = (w_j, σ x_m), supported on conductor m's nodes.
    pub x_cols: Vec<Vec<(usize, f64)>>,
    /// G_m = (x_m, σ x_m) = σ·S_m, siemens.
    pub g: Vec<f64>,
}

impl CircuitMatrices {
    pub fn resistances(&self) -> Vec<f64> {
        self.g.iter().map(|&g| 1.0 / g).collect()
    }
}

/// Assemble M_σ, X, G and M_sheet for conductor conductivity `sigma_cond`
/// and iron sheet coefficient `sheet_c` = σ_Fe·d²/12.
pub fn assemble_circuit_matrices(
    mesh: &Mesh,
    sigma_cond: f64,
    sheet_c: f64,
) -> Result<CircuitMatrices> {
    if !mesh.conductor_tris.is_empty()
        && mesh.conductor_tris.iter().any(|c| !c.is_empty())
        && sigma_cond <= 0.0
    {
        return Err(Error::config("conductor conductivity must be positive"));
    }
    let tri_edges = |tris: &[usize]| {
        let mut edges = Vec::with_capacity(tris.len() * 3);
        for &t in tris {
            let [a, b, c] = mesh.tris[t];
            edges.push((a, b));
            edges.push((b, c));
            edges.push((a, c));
        }
        edges
    };

    let cond_all: Vec<usize> =
        mesh.conductor_tris.iter().flat_map(|c| c.iter().copied()).collect();
    let mut m_sigma = SymCsr::from_edges(mesh.n_nodes(), tri_edges(&cond_all));
    for &t in &cond_all {
        let [n0, n1, n2] = mesh.tris[t];
        let nodes = [n0, n1, n2];
        let a = mesh.areas[t];
        for (li, &ni) in nodes.iter().enumerate() {
            for (lj, &nj) in nodes.iter().enumerate() {
                let w = if li == lj { a / 6.0 } else { a / 12.0 };
                m_sigma.add(ni, nj, sigma_cond * w);
            }
        }
    }

    let mut m_sheet = SymCsr::from_edges(mesh.n_nodes(), tri_edges(&mesh.iron_tris));
    if sheet_c != 0.0 {
        for &t in &mesh.iron_tris {
            let nodes = mesh.tris[t];
            let v = &mesh.curl_basis[t];
            let a = mesh.areas[t];
            for li in 0..3 {
                for lj in 0..3 {
                    m_sheet.add(nodes[li], nodes[lj], sheet_c * a * v[li].dot(v[lj]));
                }
            }
        }
    }

    let mut x_cols = Vec::with_capacity(mesh.conductor_tris.len());
    let mut g = Vec::with_capacity(mesh.conductor_tris.len());
    for cond in &mesh.conductor_tris {
        let mut col: Vec<(usize, f64)> = Vec::new();
        let mut area = 0.0;
        for &t in cond {
            area += mesh.areas[t];
            for &n in &mesh.tris[t] {
                // (w_j, σ x_m) with x_m = 1/ℓ: σ·area/3 per node
                match col.iter_mut().find(|(node, _)| *node == n) {
                    Some((_, v)) => *v += sigma_cond * mesh.areas[t] / 3.0,
                    None => col.push((n, sigma_cond * mesh.areas[t] / 3.0)),
                }
            }
        }
        col.sort_by_key(|&(n, _)| n);
        x_cols.push(col);
        g.push(sigma_cond * area);
    }

    Ok(CircuitMatrices { m_sigma, m_sheet, x_cols, g })
}

/// Material law selector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaterialLaw {
    Anhysteretic,
    Hysteretic,
}

/// Per-integration-point material evaluation result.
#[derive(Clone, Copy, Debug)]
pub struct PointEval {
    /// Static (rate-independent) field strength H(B), A/m.
    pub h_static: Vec2,
    /// Total field including the dynamic sheet term, A/m.
    pub h_total: Vec2,
    /// ∂H_total/∂B, symmetric positive definite.
    pub dhdb: SymMat2,
}

/// Ferromagnetic material kernel: selected law, inversion settings and the
/// dynamic sheet parameters. Immutable during a solve; evaluations against
/// distinct play states are independent and safe to run in parallel.
#[derive(Clone, Debug)]
pub struct MaterialKernel {
    pub law: MaterialLaw,
    pub curve: Arc<AnhystereticCurve>,
    pub play: PlayConfig,
    pub inversion: InversionSettings,
    pub sheet: SheetParams,
}

impl MaterialKernel {
    /// Evaluate one iron point at candidate flux density `b` against the
    /// previous committed state. `dt` and `b_prev` feed the sheet term;
    /// `h_warm` seeds the fixed-point inversion.
    pub fn evaluate(
        &self,
        b: Vec2,
        b_prev: Vec2,
        dt: f64,
        state: &PlayState,
        h_warm: Vec2,
    ) -> Result<PointEval> {
        let (h_static, dbdh) = match self.law {
            MaterialLaw::Anhysteretic => {
                let h = self.curve.invert(b)?;
                let (_, tensor) = self.curve.eval(h)?;
                (h, tensor)
            }
            MaterialLaw::Hysteretic => {
                let out = invert(&self.inversion, &self.play, state, b, h_warm)?;
                if !out.converged {
                    // indices are filled in by the assembly loop
                    return Err(Error::InversionFailure {
                        point: usize::MAX,
                        triangle: usize::MAX,
                        residual: out.residual,
                        iterations: out.iterations,
                    });
                }
                let (_, tensor, _) = self.play.eval(state, out.h)?;
                (out.h, tensor)
            }
        };
        let mut dhdb = dbdh.inverse();
        let mut h_total = h_static;
        let c = self.sheet.coefficient();
        if c != 0.0 {
            h_total += (b - b_prev) * (c / dt);
            dhdb += SymMat2::isotropic(c / dt);
        }
        Ok(PointEval { h_static, h_total, dhdb })
    }
}

/// Weighted field-strength vector ĥ_j = Σ_T area·v_j·H_T over all triangles,
/// full node set.
pub fn assemble_h_vec(mesh: &Mesh, h_per_tri: &[Vec2]) -> Vec<f64> {
    let mut out = vec![0.0; mesh.n_nodes()];
    for t in 0..mesh.n_tris() {
        let a = mesh.areas[t];
        let v = &mesh.curl_basis[t];
        let h = h_per_tri[t];
        for (l, &n) in mesh.tris[t].iter().enumerate() {
            out[n] += a * v[l].dot(h);
        }
    }
    out
}

/// Pattern of the free-node Jacobian (mesh connectivity).
pub fn jacobian_pattern(mesh: &Mesh, dofs: &DofMap) -> SymCsr {
    let mut edges = Vec::with_capacity(mesh.n_tris() * 3);
    for t in 0..mesh.n_tris() {
        let [a, b, c] = mesh.tris[t];
        for (x, y) in [(a, b), (b, c), (a, c)] {
            let (fx, fy) = (dofs.free_of_node[x], dofs.free_of_node[y]);
            if fx >= 0 && fy >= 0 {
                edges.push((fx as usize, fy as usize));
            }
        }
    }
    SymCsr::from_edges(dofs.n_free(), edges)
}

/// Assemble the Jacobian block (v_j, ∂H/∂B v_k) into the free-node pattern.
pub fn assemble_jacobian(
    mesh: &Mesh,
    dofs: &DofMap,
    dhdb_per_tri: &[SymMat2],
    out: &mut SymCsr,
) {
    out.zero_values();
    for t in 0..mesh.n_tris() {
        let a = mesh.areas[t];
        let v = &mesh.curl_basis[t];
        let tensor = dhdb_per_tri[t];
        let nodes = mesh.tris[t];
        for li in 0..3 {
            let fi = dofs.free_of_node[nodes[li]];
            if fi < 0 {
                continue;
            }
            let tv_i = tensor.apply(v[li]);
            for lj in 0..3 {
                let fj = dofs.free_of_node[nodes[lj]];
                if fj < 0 {
                    continue;
                }
                out.add(fi as usize, fj as usize, a * tv_i.dot(v[lj]));
            }
        }
    }
}

/// Add `scale`·M (full-node CSR) into the free-node matrix.
pub fn add_scaled_full_matrix(full: &SymCsr, scale: f64, dofs: &DofMap, out: &mut SymCsr) {
    for i in 0..full.n {
        let fi = dofs.free_of_node[i];
        if fi < 0 {
            continue;
        }
        for k in full.row_ptr[i]..full.row_ptr[i + 1] {
            if full.vals[k] == 0.0 {
                continue;
            }
            let fj = dofs.free_of_node[full.cols[k]];
            if fj >= 0 {
                out.add(fi as usize, fj as usize, scale * full.vals[k]);
            }
        }
    }
}

/// Region reluctivity tensor for non-iron triangles: vacuum.
pub fn vacuum_dhdb() -> SymMat2 {
    SymMat2::isotropic(1.0 / MU0)
}

/// Classify triangles once: vacuum H = B/μ0 everywhere except iron.
pub fn is_iron(tag: RegionTag) -> bool {
    tag == RegionTag::Iron
}
