//! Structured triangulation of the rectilinear geometry.
//!
//! Grid lines include every region boundary so the triangulation conforms
//! exactly; each grid cell is split into two triangles and tagged by the
//! region containing its centre. One integration point (the centroid) per
//! triangle.

use crate::error::{Error, Result};
use crate::geometry::{BoundaryKind, GeometrySpec, Rect};
use crate::math::Vec2;

/// Region ownership of a triangle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RegionTag {
    Air,
    Iron,
    /// Conductor index into the geometry's conductor list.
    Conductor(usize),
}

#[derive(Clone, Debug)]
pub struct Mesh {
    pub nodes: Vec<Vec2>,
    pub tris: Vec<[usize; 3]>,
    pub tags: Vec<RegionTag>,
    /// Dirichlet marker per node.
    pub dirichlet: Vec<bool>,
    /// Triangle areas, m².
    pub areas: Vec<f64>,
    /// Curl basis per triangle: B = Σ a_n v_n with v_n = (∂N_n/∂y, −∂N_n/∂x),
    /// constant on each triangle for lowest-order elements.
    pub curl_basis: Vec<[Vec2; 3]>,
    /// Triangle indices of the iron region (integration-point order).
    pub iron_tris: Vec<usize>,
    /// Triangle indices per conductor.
    pub conductor_tris: Vec<Vec<usize>>,
}

impl Mesh {
    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_tris(&self) -> usize {
        self.tris.len()
    }

    /// Centroid (= integration point) of a triangle.
    pub fn centroid(&self, t: usize) -> Vec2 {
        let [a, b, c] = self.tris[t];
        (self.nodes[a] + self.nodes[b] + self.nodes[c]) * (1.0 / 3.0)
    }

    /// Triangle containing a point, if any.
    pub fn find_triangle(&self, p: Vec2) -> Option<usize> {
        const EPS: f64 = 1e-12;
        for (t, tri) in self.tris.iter().enumerate() {
            let [a, b, c] = *tri;
            let (pa, pb, pc) = (self.nodes[a], self.nodes[b], self.nodes[c]);
            let s0 = cross(pb - pa, p - pa);
            let s1 = cross(pc - pb, p - pb);
            let s2 = cross(pa - pc, p - pc);
            let lo = -EPS * self.areas[t];
            if s0 >= lo && s1 >= lo && s2 >= lo {
                return Some(t);
            }
        }
        None
    }

    /// In-plane flux density on triangle t for nodal potentials `a`.
    pub fn flux_density(&self, a: &[f64], t: usize) -> Vec2 {
        let [n0, n1, n2] = self.tris[t];
        let v = &self.curl_basis[t];
        v[0] * a[n0] + v[1] * a[n1] + v[2] * a[n2]
    }

    pub fn conductor_area(&self, m: usize) -> f64 {
        self.conductor_tris[m].iter().map(|&t| self.areas[t]).sum()
    }

    pub fn iron_area(&self) -> f64 {
        self.iron_tris.iter().map(|&t| self.areas[t]).sum()
    }

    /// Plain-text export: nodes (id,x,y) and elements (id,n0,n1,n2,region).
    pub fn export_csv(&self) -> (String, String) {
        let mut nodes = String::from("id,x,y,dirichlet\n");
        for (i, p) in self.nodes.iter().enumerate() {
            nodes.push_str(&format!("{},{},{},{}\n", i, p.x, p.y, u8::from(self.dirichlet[i])));
        }
        let mut elems = String::from("id,n0,n1,n2,region\n");
        for (i, t) in self.tris.iter().enumerate() {
            let tag = match self.tags[i] {
                RegionTag::Air => "air".to_string(),
                RegionTag::Iron => "iron".to_string(),
                RegionTag::Conductor(m) => format!("conductor{m}"),
            };
            elems.push_str(&format!("{},{},{},{},{}\n", i, t[0], t[1], t[2], tag));
        }
        (nodes, elems)
    }
}

fn cross(a: Vec2, b: Vec2) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Grid coordinates along one axis: region cuts plus per-interval subdivision
/// at the finest element size among regions overlapping that strip.
fn axis_coords(
    lo: f64,
    hi: f64,
    cuts: &[(f64, f64, f64)], // (r0, r1, target size) per region on this axis
    default_size: f64,
) -> Vec<f64> {
    let mut marks: Vec<f64> = vec![lo, hi];
    for &(a, b, _) in cuts {
        if a > lo && a < hi {
            marks.push(a);
        }
        if b > lo && b < hi {
            marks.push(b);
        }
    }
    marks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    marks.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let mut coords = Vec::new();
    for w in marks.windows(2) {
        let (a, b) = (w[0], w[1]);
        let mid = 0.5 * (a + b);
        let mut target = default_size;
        for &(r0, r1, size) in cuts {
            if mid > r0 && mid < r1 {
                target = target.min(size);
            }
        }
        let n = ((b - a) / target).ceil().max(1.0) as usize;
        for i in 0..n {
            coords.push(a + (b - a) * i as f64 / n as f64);
        }
    }
    coords.push(hi);
    coords
}

/// Build the conforming triangulation of a validated geometry.
pub fn build_mesh(geom: &GeometrySpec) -> Result<Mesh> {
    geom.validate()?;
    let sizes = &geom.element_size;
    let region_size = |r: &Rect, s: f64| (r.x0, r.x1, s);
    let mut xcuts = Vec::new();
    let mut ycuts = Vec::new();
    for r in &geom.iron {
        xcuts.push(region_size(r, sizes.iron));
        ycuts.push((r.y0, r.y1, sizes.iron));
    }
    for r in &geom.conductors {
        xcuts.push(region_size(r, sizes.conductor));
        ycuts.push((r.y0, r.y1, sizes.conductor));
    }
    let xs = axis_coords(geom.domain.x0, geom.domain.x1, &xcuts, sizes.air);
    let ys = axis_coords(geom.domain.y0, geom.domain.y1, &ycuts, sizes.air);
    let (nx, ny) = (xs.len(), ys.len());
    if nx < 2 || ny < 2 {
        return Err(Error::MeshBuild("grid degenerated to a line".into()));
    }

    let mut nodes = Vec::with_capacity(nx * ny);
    for &y in &ys {
        for &x in &xs {
            nodes.push(Vec2::new(x, y));
        }
    }
    let node_at = |i: usize, j: usize| j * nx + i;

    let classify = |x: f64, y: f64| -> RegionTag {
        for (m, c) in geom.conductors.iter().enumerate() {
            if c.contains(x, y) {
                return RegionTag::Conductor(m);
            }
        }
        for f in &geom.iron {
            if f.contains(x, y) {
                return RegionTag::Iron;
            }
        }
        RegionTag::Air
    };

    let mut tris = Vec::with_capacity(2 * (nx - 1) * (ny - 1));
    let mut tags = Vec::with_capacity(tris.capacity());
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            let cx = 0.5 * (xs[i] + xs[i + 1]);
            let cy = 0.5 * (ys[j] + ys[j + 1]);
            let tag = classify(cx, cy);
            let (n00, n10) = (node_at(i, j), node_at(i + 1, j));
            let (n01, n11) = (node_at(i, j + 1), node_at(i + 1, j + 1));
            tris.push([n00, n10, n11]);
            tags.push(tag);
            tris.push([n00, n11, n01]);
            tags.push(tag);
        }
    }

    let mut areas = Vec::with_capacity(tris.len());
    let mut curl_basis = Vec::with_capacity(tris.len());
    for t in &tris {
        let (p0, p1, p2) = (nodes[t[0]], nodes[t[1]], nodes[t[2]]);
        let twice_area = cross(p1 - p0, p2 - p0);
        if twice_area <= 0.0 {
            return Err(Error::MeshBuild("non-positive triangle area".into()));
        }
        areas.push(0.5 * twice_area);
        // grad N_i = (b_i, c_i) / (2A); curl basis v_i = (c_i, -b_i) / (2A)
        let b = [p1.y - p2.y, p2.y - p0.y, p0.y - p1.y];
        let c = [p2.x - p1.x, p0.x - p2.x, p1.x - p0.x];
        curl_basis.push([
            Vec2::new(c[0], -b[0]) * (1.0 / twice_area),
            Vec2::new(c[1], -b[1]) * (1.0 / twice_area),
            Vec2::new(c[2], -b[2]) * (1.0 / twice_area),
        ]);
    }

    let mut dirichlet = vec![false; nodes.len()];
    let d = &geom.domain;
    let edge = |kind: BoundaryKind| kind == BoundaryKind::Dirichlet0;
    for (n, p) in nodes.iter().enumerate() {
        let on_left = (p.x - d.x0).abs() < 1e-12;
        let on_right = (p.x - d.x1).abs() < 1e-12;
        let on_bottom = (p.y - d.y0).abs() < 1e-12;
        let on_top = (p.y - d.y1).abs() < 1e-12;
        if (on_left && edge(geom.boundary.left))
            || (on_right && edge(geom.boundary.right))
            || (on_bottom && edge(geom.boundary.bottom))
            || (on_top && edge(geom.boundary.top))
        {
            dirichlet[n] = true;
        }
    }
    if !dirichlet.iter().any(|&b| b) {
        return Err(Error::MeshBuild("Dirichlet node set is empty".into()));
    }

    let mut iron_tris = Vec::new();
    let mut conductor_tris = vec![Vec::new(); geom.conductors.len()];
    for (t, tag) in tags.iter().enumerate() {
        match tag {
            RegionTag::Iron => iron_tris.push(t),
            RegionTag::Conductor(m) => conductor_tris[*m].push(t),
            RegionTag::Air => {}
        }
    }

    Ok(Mesh { nodes, tris, tags, dirichlet, areas, curl_basis, iron_tris, conductor_tris })
}
