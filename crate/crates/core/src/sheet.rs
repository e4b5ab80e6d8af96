//! Thin-sheet dynamic extension: lamination eddy-current field term.
//!
//! H_surf = H(B) + (σ_Fe·d²/12)·Ḃ approximates the field strength at the
//! iron-insulation interface; ∂H/∂Ḃ is the constant σ_Fe·d²/12·I, and the
//! associated loss density is p_eddy = σ_Fe·d²/12·|Ḃ|².

use crate::error::{Error, Result};
use crate::math::Vec2;

#[derive(Clone, Copy, Debug, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SheetParams {
    /// Lamination conductivity, S/m.
    pub sigma_fe: f64,
    /// Lamination thickness, m.
    pub d: f64,
    /// Whether the dynamic term is active.
    pub enabled: bool,
}

impl Default for SheetParams {
    fn default() -> Self {
        // defaults for a 0.35 mm electrical-steel lamination; both are
        // configuration since measured values vary by grade
        SheetParams { sigma_fe: 2.0e6, d: 0.35e-3, enabled: true }
    }
}

impl SheetParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_fe >= 0.0) {
            return Err(Error::invalid("sigma_fe must be non-negative"));
        }
        if !(self.d > 0.0) {
            return Err(Error::invalid("lamination thickness d must be positive"));
        }
        Ok(())
    }

    /// Coefficient c = σ_Fe·d²/12, A·s/(m·T). Zero when disabled.
    pub fn coefficient(&self) -> f64 {
        if self.enabled {
            self.sigma_fe * self.d * self.d / 12.0
        } else {
            0.0
        }
    }
}

/// H_surf = static H + c·Ḃ.
pub fn h_surf(static_h: Vec2, b_dot: Vec2, params: &SheetParams) -> Vec2 {
    static_h + b_dot * params.coefficient()
}

/// Eddy loss density σ_Fe·d²/12·|Ḃ|², W/m³; non-negative, quadratic in |Ḃ|.
pub fn p_eddy(b_dot: Vec2, params: &SheetParams) -> f64 {
    params.coefficient() * b_dot.norm_sq()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn static_limit() {
        let p = SheetParams::default();
        let h = Vec2::new(120.0, -40.0);
        assert_eq!(h_surf(h, Vec2::ZERO, &p), h);
        assert_eq!(p_eddy(Vec2::ZERO, &p), 0.0);
    }

    #[test]
    fn additive_term_arithmetic() {
        // sigma = 2e6 S/m, d = 0.35 mm, Bdot = 1000 T/s -> 20.417 A/m
        let p = SheetParams::default();
        let h = h_surf(Vec2::ZERO, Vec2::new(1000.0, 0.0), &p);
        assert!((h.x - 20.4166666).abs() < 1e-6);
        assert_eq!(h.y, 0.0);
    }

    #[test]
    fn linearity_in_b_dot() {
        let p = SheetParams::default();
        let h = Vec2::new(50.0, 10.0);
        let a = Vec2::new(300.0, -100.0);
        let b = Vec2::new(-120.0, 40.0);
        let lhs = h_surf(h, a + b, &p) - h_surf(h, a, &p);
        let rhs = b * p.coefficient();
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn eddy_loss_quadratic() {
        let p = SheetParams::default();
        let b1 = Vec2::new(1800.0, 0.0);
        let p1 = p_eddy(b1, &p);
        let p2 = p_eddy(b1 * 2.0, &p);
        assert!((p2 - 4.0 * p1).abs() < 1e-9 * p2);
        // |Bdot| = 3600 T/s with the defaults -> 2.646e5 W/m^3
        let v = p_eddy(Vec2::new(3600.0, 0.0), &p);
        assert!((v - 2.646e5).abs() < 1.0);
    }

    #[test]
    fn disabled_sheet_is_inert() {
        let p = SheetParams { enabled: false, ..SheetParams::default() };
        assert_eq!(p.coefficient(), 0.0);
        assert_eq!(p_eddy(Vec2::new(1000.0, 0.0), &p), 0.0);
    }
}
