//! Physical constants of the two-body system.

use serde::{Deserialize, Serialize};

use crate::algebra::AlgebraElement;
use crate::error::{invalid, Result};

/// Constituent masses, reduced mass `mu`, quartic-correction mass `eta`, and `hbar`.
///
/// Units have `c = 1`; `hbar` is a runtime parameter so that tests can vary it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub m1: f64,
    pub m2: f64,
    pub hbar: f64,
    pub mu: f64,
    pub eta: f64,
}

impl PhysicalParams {
    pub fn new(m1: f64, m2: f64, hbar: f64) -> Result<Self> {
        for (name, v) in [("m1", m1), ("m2", m2), ("hbar", hbar)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(name, format!("must be finite and positive, got {v}")));
            }
        }
        let prod = m1 * m2;
        let mu = prod / (m1 + m2);
        // prod - 3 mu^2 = prod (m1^2 - m1 m2 + m2^2) / (m1 + m2)^2 > 0
        let radicand = prod / (prod - 3.0 * mu * mu);
        let eta = mu * radicand.cbrt();
        Ok(Self { m1, m2, hbar, mu, eta })
    }

    /// Coefficient of `p^4` in the kinetic energy, `1 / (8 eta^3)`.
    pub fn quartic(&self) -> f64 {
        1.0 / (8.0 * self.eta.powi(3))
    }

    /// Coefficient of `p^2` in the kinetic energy, `1 / (2 mu)`.
    pub fn quadratic(&self) -> f64 {
        1.0 / (2.0 * self.mu)
    }

    /// Kinetic energy `T(p) = p^4 / 8 eta^3 + p^2 / 2 mu`.
    pub fn kinetic(&self, p: f64) -> f64 {
        let p2 = p * p;
        self.quartic() * p2 * p2 + self.quadratic() * p2
    }

    /// `H(t) = T(p) + f x` as an algebra element for a given drive value.
    pub fn hamiltonian(&self, f: f64) -> AlgebraElement {
        AlgebraElement::kinetic(self) + AlgebraElement::x(f.into())
    }
}

impl Default for PhysicalParams {
    /// `m1 = m2 = 3`, `hbar = 1`: heavy enough that the default packet stays
    /// inside the default periodic box for the whole default run.
    fn default() -> Self {
        Self::new(3.0, 3.0, 1.0).expect("default masses are valid")
    }
}
