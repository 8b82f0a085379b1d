use serde::{Deserialize, Serialize};

/// Tolerances shared by every operation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToleranceConfig {
    /// Relative tolerance for causal classification, `|L(v)| <= tol * |v|^2`.
    pub classification: f64,
    /// Local error tolerance of the geodesic integrator.
    pub ode: f64,
    /// Absolute band around zero inside which a sign is not decided.
    pub dead_band: f64,
    /// Determinant floor factor, scaled by `scale^(dim)`.
    pub det_floor: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            classification: 1e-10,
            ode: 1e-10,
            dead_band: 1e-7,
            det_floor: 1e-12,
        }
    }
}

impl ToleranceConfig {
    /// Every tolerance replaced by `tol`.
    pub fn uniform(tol: f64) -> Self {
        Self {
            classification: tol,
            ode: tol.max(1e-14),
            dead_band: tol,
            det_floor: 1e-12,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_keeps_a_usable_ode_tolerance() {
        let t = ToleranceConfig::uniform(1e-20);
        assert_eq!(t.dead_band, 1e-20);
        assert_eq!(t.ode, 1e-14);
        assert_eq!(t.det_floor, ToleranceConfig::default().det_floor);
    }
}
