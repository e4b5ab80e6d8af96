//! Rectilinear geometry description of the 2-D quarter model.

use crate::error::{Error, Result};

/// Axis-aligned rectangle, metres. Serialized as [x0, y0, x1, y1].
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl From<[f64; 4]> for Rect {
    fn from(v: [f64; 4]) -> Self {
        Rect { x0: v[0], y0: v[1], x1: v[2], y1: v[3] }
    }
}

impl From<Rect> for [f64; 4] {
    fn from(r: Rect) -> [f64; 4] {
        [r.x0, r.y0, r.x1, r.y1]
    }
}

impl Rect {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Rect { x0, y0, x1, y1 }
    }

    pub fn is_valid(&self) -> bool {
        self.x1 > self.x0 && self.y1 > self.y0
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x0 && x <= self.x1 && y >= self.y0 && y <= self.y1
    }

    pub fn contains_rect(&self, other: &Rect) -> bool {
        other.x0 >= self.x0 && other.x1 <= self.x1 && other.y0 >= self.y0 && other.y1 <= self.y1
    }

    /// Overlap with positive area (shared edges do not count).
    pub fn overlaps(&self, other: &Rect) -> bool {
        self.x0 < other.x1 && other.x0 < self.x1 && self.y0 < other.y1 && other.y0 < self.y1
    }

    pub fn area(&self) -> f64 {
        (self.x1 - self.x0) * (self.y1 - self.y0)
    }
}

/// Boundary condition of an outer domain edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryKind {
    /// Homogeneous Dirichlet on the vector potential (flux-parallel).
    Dirichlet0,
    /// Natural condition (flux-normal), nothing to assemble.
    Neumann,
}

/// Per-edge boundary tags of the rectangular domain.
#[derive(Clone, Copy, Debug, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundarySpec {
    pub left: BoundaryKind,
    pub right: BoundaryKind,
    pub bottom: BoundaryKind,
    pub top: BoundaryKind,
}

impl Default for BoundarySpec {
    fn default() -> Self {
        // quarter-dipole convention: Dirichlet on the outer boundary and on
        // the vertical symmetry cut, natural condition on the horizontal
        // midplane (dipole symmetry)
        BoundarySpec {
            left: BoundaryKind::Dirichlet0,
            right: BoundaryKind::Dirichlet0,
            bottom: BoundaryKind::Neumann,
            top: BoundaryKind::Dirichlet0,
        }
    }
}

/// Target element sizes per region class, metres.
#[derive(Clone, Copy, Debug, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ElementSizes {
    pub air: f64,
    pub iron: f64,
    pub conductor: f64,
}

impl Default for ElementSizes {
    fn default() -> Self {
        ElementSizes { air: 0.020, iron: 0.009, conductor: 0.006 }
    }
}

impl ElementSizes {
    pub fn scaled(&self, factor: f64) -> ElementSizes {
        ElementSizes {
            air: self.air * factor,
            iron: self.iron * factor,
            conductor: self.conductor * factor,
        }
    }
}

/// Rectilinear region list: air background, iron yoke rectangles, solid
/// conductor bars.
#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySpec {
    pub domain: Rect,
    #[serde(default)]
    pub iron: Vec<Rect>,
    #[serde(default)]
    pub conductors: Vec<Rect>,
    #[serde(default)]
    pub boundary: BoundarySpec,
    #[serde(default)]
    pub element_size: ElementSizes,
}

impl GeometrySpec {
    pub fn validate(&self) -> Result<()> {
        if !self.domain.is_valid() {
            return Err(Error::MeshBuild("degenerate domain rectangle".into()));
        }
        for (i, r) in self.iron.iter().chain(self.conductors.iter()).enumerate() {
            if !r.is_valid() {
                return Err(Error::MeshBuild(format!("degenerate region rectangle #{i}")));
            }
            if !self.domain.contains_rect(r) {
                return Err(Error::MeshBuild(format!(
                    "region rectangle #{i} extends outside the domain"
                )));
            }
        }
        for (ci, c) in self.conductors.iter().enumerate() {
            for (ii, f) in self.iron.iter().enumerate() {
                if c.overlaps(f) {
                    return Err(Error::MeshBuild(format!(
                        "conductor {ci} overlaps iron rectangle {ii}"
                    )));
                }
            }
            for (cj, o) in self.conductors.iter().enumerate() {
                if cj > ci && c.overlaps(o) {
                    return Err(Error::MeshBuild(format!(
                        "conductors {ci} and {cj} overlap"
                    )));
                }
            }
        }
        let s = &self.element_size;
        if !(s.air > 0.0 && s.iron > 0.0 && s.conductor > 0.0) {
            return Err(Error::MeshBuild("element sizes must be positive".into()));
        }
        Ok(())
    }

    /// Default parameterized H-type quarter dipole, dimensions in metres.
    ///
    /// The horizontal midplane (bottom edge) is the flux-normal symmetry
    /// plane; the vertical cut (left edge) carries A = 0. Two solid conductor
    /// bars sit in the winding window; mirroring gives eight in the full
    /// cross-section.
    pub fn quarter_dipole() -> GeometrySpec {
        let g = 0.020; // half-gap height
        GeometrySpec {
            domain: Rect::new(0.0, 0.0, 0.320, 0.260),
            iron: vec![
                // pole above the aperture
                Rect::new(0.0, g, 0.050, 0.100),
                // top yoke
                Rect::new(0.0, 0.100, 0.190, 0.150),
                // return leg down to the midplane
                Rect::new(0.150, 0.0, 0.190, 0.100),
            ],
            conductors: vec![
                Rect::new(0.070, 0.008, 0.086, 0.024),
                Rect::new(0.070, 0.040, 0.086, 0.056),
            ],
            boundary: BoundarySpec::default(),
            element_size: ElementSizes::default(),
        }
    }
}
