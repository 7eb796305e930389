//! Dynamical invariant `I(t) = A p^4 + B p^3 + C p^2 + D p + E x + F` and its checks.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{
    commutator, derive_invariant_constraints, literal_invariant_constraints, AlgebraElement, Basis,
    ConstraintTable, INVARIANT_STATE,
};
use crate::error::{Error, Result};
use crate::grid::{expectation, WaveFunction};
use crate::params::PhysicalParams;
use crate::schedule::{integrate_linear_system, Schedule, TimeGrid};

/// Initial values `A, E, B(0), C(0), D(0), F(0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvariantConstants {
    pub a: Complex64,
    pub e: Complex64,
    pub b0: Complex64,
    pub c0: Complex64,
    pub d0: Complex64,
    pub f0: Complex64,
}

impl Default for InvariantConstants {
    fn default() -> Self {
        let zero = Complex64::new(0.0, 0.0);
        Self {
            a: 1.0.into(),
            e: 1.0.into(),
            b0: zero,
            c0: zero,
            d0: zero,
            f0: zero,
        }
    }
}

impl InvariantConstants {
    /// State vector in `A, B, C, D, E, F` order.
    pub fn state(&self) -> [Complex64; 6] {
        [self.a, self.b0, self.c0, self.d0, self.e, self.f0]
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        Self {
            a: s * self.a,
            e: s * self.e,
            b0: s * self.b0,
            c0: s * self.c0,
            d0: s * self.d0,
            f0: s * self.f0,
        }
    }
}

/// Coefficient trajectories of `I(t)` on a time grid, stored as `A..F` per instant.
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantCoefficients {
    pub grid: TimeGrid,
    pub values: Vec<[Complex64; 6]>,
}

impl InvariantCoefficients {
    fn from_table(
        table: &ConstraintTable,
        schedule: &Schedule,
        constants: &InvariantConstants,
        grid: &TimeGrid,
    ) -> Result<Self> {
        let traj = integrate_linear_system(table, &constants.state(), schedule, grid)?;
        let values = traj
            .states
            .into_iter()
            .map(|s| {
                let mut v: [Complex64; 6] = std::array::from_fn(|k| s[k]);
                v[0] = constants.a;
                v[4] = constants.e;
                v
            })
            .collect();
        Ok(Self { grid: *grid, values })
    }

    /// `I(t_j)` as an algebra element.
    pub fn element(&self, j: usize) -> AlgebraElement {
        let v = &self.values[j];
        INVARIANT_STATE
            .iter()
            .zip(v)
            .fold(AlgebraElement::zero(), |acc, (&(_, b), &c)| acc.with(b, c))
    }

    /// Coefficient trajectory by symbol, `"A"` through `"F"`.
    pub fn series(&self, symbol: &str) -> Option<Vec<Complex64>> {
        let k = INVARIANT_STATE.iter().position(|(s, _)| *s == symbol)?;
        Some(self.values.iter().map(|v| v[k]).collect())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.values.iter().all(|v| v.iter().all(|c| c.im.abs() <= tol))
    }

    /// Replaces the coefficient of `basis` at instant `j`.
    pub fn set(&mut self, j: usize, basis: Basis, value: Complex64) {
        let k = INVARIANT_STATE
            .iter()
            .position(|&(_, b)| b == basis)
            .expect("basis is part of the invariant");
        self.values[j][k] = value;
    }
}

/// Integrates the commutator-derived coefficient system.
pub fn solve_coefficients(
    schedule: &Schedule,
    params: &PhysicalParams,
    constants: &InvariantConstants,
    grid: &TimeGrid,
) -> Result<InvariantCoefficients> {
    InvariantCoefficients::from_table(&derive_invariant_constraints(params), schedule, constants, grid)
}

/// Integrates the literally printed coefficient integrals; discrepancy report only.
pub fn literal_coefficients(
    schedule: &Schedule,
    params: &PhysicalParams,
    constants: &InvariantConstants,
    grid: &TimeGrid,
) -> Result<InvariantCoefficients> {
    InvariantCoefficients::from_table(&literal_invariant_constraints(params), schedule, constants, grid)
}

/// Fourth-order finite-difference derivative of `y` at index `j`.
///
/// Centered five-point stencil inside, one-sided five-point stencils at the
/// two nearest points to each end. Falls back to second order on short grids.
pub fn time_derivative(y: &[Complex64], j: usize, dt: f64) -> Complex64 {
    let n = y.len();
    let d = |coeffs: &[(isize, f64)], denom: f64| -> Complex64 {
        coeffs
            .iter()
            .map(|&(o, w)| y[(j as isize + o) as usize] * w)
            .sum::<Complex64>()
            / (denom * dt)
    };
    if n >= 5 {
        if j >= 2 && j + 2 < n {
            d(&[(-2, 1.0), (-1, -8.0), (1, 8.0), (2, -1.0)], 12.0)
        } else if j == 0 {
            d(&[(0, -25.0), (1, 48.0), (2, -36.0), (3, 16.0), (4, -3.0)], 12.0)
        } else if j == 1 {
            d(&[(-1, -3.0), (0, -10.0), (1, 18.0), (2, -6.0), (3, 1.0)], 12.0)
        } else if j == n - 1 {
            d(&[(0, 25.0), (-1, -48.0), (-2, 36.0), (-3, -16.0), (-4, 3.0)], 12.0)
        } else {
            d(&[(1, 3.0), (0, 10.0), (-1, -18.0), (-2, 6.0), (-3, -1.0)], 12.0)
        }
    } else if n >= 3 {
        if j == 0 {
            d(&[(0, -3.0), (1, 4.0), (2, -1.0)], 2.0)
        } else if j == n - 1 {
            d(&[(0, 3.0), (-1, -4.0), (-2, 1.0)], 2.0)
        } else {
            d(&[(-1, -1.0), (1, 1.0)], 2.0)
        }
    } else if j == 0 {
        d(&[(0, -1.0), (1, 1.0)], 1.0)
    } else {
        d(&[(0, 1.0), (-1, -1.0)], 1.0)
    }
}

/// `dI/dt + [I, H(t_j)] / (i hbar)` with the explicit derivative taken from the
/// stored trajectory by finite differences.
pub fn invariance_residual(
    coeffs: &InvariantCoefficients,
    schedule: &Schedule,
    params: &PhysicalParams,
    j: usize,
) -> Result<AlgebraElement> {
    let dt = coeffs.grid.dt();
    let t = coeffs.grid.time(j);
    let mut explicit = AlgebraElement::zero();
    for (k, &(_, basis)) in INVARIANT_STATE.iter().enumerate() {
        let series: Vec<Complex64> = coeffs.values.iter().map(|v| v[k]).collect();
        explicit = explicit.with(basis, time_derivative(&series, j, dt));
    }
    let h = params.hamiltonian(schedule.evaluate(t)?);
    let bracket = commutator(&coeffs.element(j), &h, params.hbar);
    Ok(explicit + (1.0 / Complex64::new(0.0, params.hbar)) * bracket)
}

/// Largest residual coefficient magnitude over all instants.
pub fn max_invariance_residual(
    coeffs: &InvariantCoefficients,
    schedule: &Schedule,
    params: &PhysicalParams,
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for j in 0..coeffs.grid.len() {
        worst = worst.max(invariance_residual(coeffs, schedule, params, j)?.max_abs());
    }
    Ok(worst)
}

/// `<I(t_j)>` along a state trajectory.
pub fn expectation_series(psi_trajectory: &[WaveFunction], coeffs: &InvariantCoefficients) -> Result<Vec<Complex64>> {
    if psi_trajectory.len() != coeffs.grid.len() {
        return Err(Error::LengthMismatch {
            what: "state trajectory vs time grid",
            left: psi_trajectory.len(),
            right: coeffs.grid.len(),
        });
    }
    psi_trajectory
        .iter()
        .enumerate()
        .map(|(j, psi)| expectation(&coeffs.element(j), psi))
        .collect()
}

/// `max_j |<I(t_j)> - <I(0)>| / max(1, |<I(0)>|)`.
pub fn expectation_drift(psi_trajectory: &[WaveFunction], coeffs: &InvariantCoefficients) -> Result<f64> {
    let values = expectation_series(psi_trajectory, coeffs)?;
    let start = values[0];
    let scale = start.norm().max(1.0);
    Ok(values.iter().map(|v| (v - start).norm()).fold(0.0, f64::max) / scale)
}
