//! Small fixed-size vector/tensor types for the 2-D transverse-field setting.

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

/// Vacuum permeability in T·m/A.
pub const MU0: f64 = 4.0e-7 * std::f64::consts::PI;

/// An in-plane vector (x, y). Used for both H (A/m) and B (T).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn from_polar(r: f64, theta: f64) -> Self {
        Vec2::new(r * theta.cos(), r * theta.sin())
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_sq(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn dot(self, rhs: Vec2) -> f64 {
        self.x * rhs.x + self.y * rhs.y
    }

    /// Unit vector along `self`; `None` for the zero vector.
    pub fn unit(self) -> Option<Vec2> {
        let n = self.norm();
        if n > 0.0 {
            Some(Vec2::new(self.x / n, self.y / n))
        } else {
            None
        }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Counter-clockwise rotation by `angle` radians.
    pub fn rotated(self, angle: f64) -> Vec2 {
        let (s, c) = angle.sin_cos();
        Vec2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, rhs: Vec2) {
        self.x += rhs.x;
        self.y += rhs.y;
    }
}

impl SubAssign for Vec2 {
    fn sub_assign(&mut self, rhs: Vec2) {
        self.x -= rhs.x;
        self.y -= rhs.y;
    }
}

/// A symmetric 2×2 tensor stored as (xx, xy, yy).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SymMat2 {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

impl SymMat2 {
    pub fn identity() -> Self {
        SymMat2 { xx: 1.0, xy: 0.0, yy: 1.0 }
    }

    pub fn isotropic(v: f64) -> Self {
        SymMat2 { xx: v, xy: 0.0, yy: v }
    }

    /// a·(I − eeᵀ) + b·eeᵀ for a unit vector e.
    pub fn axial(e: Vec2, transverse: f64, axial: f64) -> Self {
        let (ex, ey) = (e.x, e.y);
        SymMat2 {
            xx: transverse * (1.0 - ex * ex) + axial * ex * ex,
            xy: (axial - transverse) * ex * ey,
            yy: transverse * (1.0 - ey * ey) + axial * ey * ey,
        }
    }

    pub fn apply(self, v: Vec2) -> Vec2 {
        Vec2::new(self.xx * v.x + self.xy * v.y, self.xy * v.x + self.yy * v.y)
    }

    pub fn det(self) -> f64 {
        self.xx * self.yy - self.xy * self.xy
    }

    pub fn trace(self) -> f64 {
        self.xx + self.yy
    }

    pub fn inverse(self) -> SymMat2 {
        let d = self.det();
        SymMat2 { xx: self.yy / d, xy: -self.xy / d, yy: self.xx / d }
    }

    /// Eigenvalues, smaller first (real by symmetry).
    pub fn eigenvalues(self) -> (f64, f64) {
        let m = 0.5 * self.trace();
        let r = (0.25 * (self.xx - self.yy).powi(2) + self.xy * self.xy).sqrt();
        (m - r, m + r)
    }

    /// Clamp both eigenvalues from below, keeping the eigenvectors.
    pub fn floor_eigenvalues(self, floor: f64) -> SymMat2 {
        let (lo, hi) = self.eigenvalues();
        if lo >= floor {
            return self;
        }
        // eigenvector basis: for a 2x2 symmetric matrix with eigenvalue l,
        // (xy, l - xx) spans the eigenvector unless xy == 0.
        if self.xy.abs() < 1e-300 {
            return SymMat2 {
                xx: self.xx.max(floor),
                xy: 0.0,
                yy: self.yy.max(floor),
            };
        }
        let l1 = lo.max(floor);
        let l2 = hi.max(floor);
        let v = Vec2::new(self.xy, hi - self.xx);
        let e = v.unit().expect("nonzero eigenvector");
        // l2 along e, l1 along the orthogonal direction
        SymMat2::axial(e, l1, l2)
    }

    /// Congruence transform R·A·Rᵀ for a rotation by `angle`.
    pub fn rotated(self, angle: f64) -> SymMat2 {
        let (s, c) = angle.sin_cos();
        let (a, b, d) = (self.xx, self.xy, self.yy);
        SymMat2 {
            xx: c * c * a - 2.0 * s * c * b + s * s * d,
            xy: s * c * (a - d) + (c * c - s * s) * b,
            yy: s * s * a + 2.0 * s * c * b + c * c * d,
        }
    }
}

impl Add for SymMat2 {
    type Output = SymMat2;
    fn add(self, rhs: SymMat2) -> SymMat2 {
        SymMat2 {
            xx: self.xx + rhs.xx,
            xy: self.xy + rhs.xy,
            yy: self.yy + rhs.yy,
        }
    }
}

impl AddAssign for SymMat2 {
    fn add_assign(&mut self, rhs: SymMat2) {
        self.xx += rhs.xx;
        self.xy += rhs.xy;
        self.yy += rhs.yy;
    }
}

impl Mul<f64> for SymMat2 {
    type Output = SymMat2;
    fn mul(self, s: f64) -> SymMat2 {
        SymMat2 { xx: self.xx * s, xy: self.xy * s, yy: self.yy * s }
    }
}

/// Symmetrized product (A·B + (A·B)ᵀ)/2 of two symmetric tensors.
pub fn sym_product(a: SymMat2, b: SymMat2) -> SymMat2 {
    // A·B = [axx*bxx + axy*bxy, axx*bxy + axy*byy; axy*bxx + ayy*bxy, axy*bxy + ayy*byy]
    let m01 = a.xx * b.xy + a.xy * b.yy;
    let m10 = a.xy * b.xx + a.yy * b.xy;
    SymMat2 {
        xx: a.xx * b.xx + a.xy * b.xy,
        xy: 0.5 * (m01 + m10),
        yy: a.xy * b.xy + a.yy * b.yy,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigenvalue_floor_preserves_spd() {
        let t = SymMat2 { xx: 1.0, xy: 2.0, yy: 1.0 }; // eigenvalues -1, 3
        let (lo, hi) = t.eigenvalues();
        assert!((lo + 1.0).abs() < 1e-12 && (hi - 3.0).abs() < 1e-12);
        let f = t.floor_eigenvalues(0.5);
        let (lo2, hi2) = f.eigenvalues();
        assert!((lo2 - 0.5).abs() < 1e-12);
        assert!((hi2 - 3.0).abs() < 1e-12);
    }

    #[test]
    fn rotation_congruence() {
        let t = SymMat2 { xx: 2.0, xy: 0.3, yy: 1.0 };
        let r = t.rotated(0.7);
        // trace and determinant are rotation invariants
        assert!((r.trace() - t.trace()).abs() < 1e-12);
        assert!((r.det() - t.det()).abs() < 1e-12);
    }

    #[test]
    fn sym_product_of_coaxial_tensors() {
        let e = Vec2::new(1.0, 0.0);
        let a = SymMat2::axial(e, 2.0, 5.0);
        let b = SymMat2::axial(e, 3.0, 7.0);
        let p = sym_product(a, b);
        assert_eq!(p, SymMat2::axial(e, 6.0, 35.0));
    }
}
