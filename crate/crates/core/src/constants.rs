use serde::{Deserialize, Serialize};

/// Physical constants in natural units (hbar = m = 1 by default).
///
/// `mu_b` is not stored: it is derived as `e * hbar / (2 m c)` so the
/// Zeeman coupling can never drift out of sync with the base constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    /// Reduced Planck constant.
    pub hbar: f64,
    /// Particle mass.
    pub mass: f64,
    /// Charge; 0 switches all electromagnetic couplings off.
    pub charge: f64,
    /// Speed of light.
    pub light_speed: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self {
            hbar: 1.0,
            mass: 1.0,
            charge: 0.0,
            light_speed: 1.0,
        }
    }
}

impl PhysicalConstants {
    /// Natural units with a given charge (hbar = m = c = 1).
    pub fn with_charge(charge: f64) -> Self {
        Self {
            charge,
            ..Self::default()
        }
    }

    /// Magneton `e hbar / (2 m c)`: coefficient of the Zeeman term.
    pub fn magneton(&self) -> f64 {
        self.charge * self.hbar / (2.0 * self.mass * self.light_speed)
    }

    /// Larmor angular frequency `e B / (m c)` for field magnitude `b`.
    pub fn larmor_frequency(&self, b: f64) -> f64 {
        self.charge * b / (self.mass * self.light_speed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_natural_units() {
        let c = PhysicalConstants::default();
        assert_eq!(c.hbar, 1.0);
        assert_eq!(c.mass, 1.0);
        assert_eq!(c.charge, 0.0);
        assert_eq!(c.light_speed, 1.0);
        assert_eq!(c.magneton(), 0.0);
    }

    #[test]
    fn magneton_tracks_charge() {
        let c = PhysicalConstants::with_charge(1.0);
        assert_eq!(c.magneton(), 0.5);
        assert_eq!(c.larmor_frequency(2.0), 2.0);
    }
}
