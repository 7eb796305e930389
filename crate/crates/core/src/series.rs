//! Power-series eigenfunctions of the invariant at a frozen instant, and the
//! phase that attaches an invariant eigenfunction to a Schrodinger solution.
//!
//! With `p = -i hbar d/dx`, `I Phi = lambda Phi` reads
//! `sum_k c_k (-i hbar)^k Phi^(k) + E x Phi + (F - lambda) Phi = 0`. Collecting
//! `x^m` gives, for `m >= 0` and `a_{-1} = 0`,
//! `A hbar^4 (m+4)!/m! a_{m+4} = -[ sum_{k=1..3} c_k (-i hbar)^k (m+k)!/m! a_{m+k}
//!                                 + (F - lambda) a_m + E a_{m-1} ]`.

use num_complex::Complex64;
use serde::Serialize;

use crate::algebra::AlgebraElement;
use crate::error::{invalid, Error, Result};
use crate::grid::{apply_element, inner_product, WaveFunction};
use crate::schedule::TimeGrid;

/// Tail tolerance relative to `max(1, sum |a_n| L^n)`.
pub const TAIL_TOLERANCE: f64 = 1e-10;
/// Largest truncation order tried by [`build_series_auto`].
pub const MAX_ORDER: usize = 4096;
/// First order tried by [`build_series_auto`].
pub const START_ORDER: usize = 32;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesEigenfunction {
    pub lambda: Complex64,
    pub seeds: [Complex64; 4],
    /// `a_0 ..= a_N`.
    pub coeffs: Vec<Complex64>,
    pub order: usize,
    pub half_width: f64,
    pub frozen_time: f64,
    pub operator: AlgebraElement,
    pub hbar: f64,
    /// `sum_{n=N-3..N} |a_n| L^n`
    pub tail: f64,
    pub converged: bool,
}

/// `(m+k)! / m!`
fn rising(m: usize, k: usize) -> f64 {
    (1..=k).map(|i| (m + i) as f64).product()
}

/// `(-i hbar)^k`
fn momentum_factor(hbar: f64, k: usize) -> Complex64 {
    Complex64::new(0.0, -hbar).powu(k as u32)
}

fn weighted_abs(a: Complex64, n: usize, half_width: f64) -> f64 {
    if a.norm() == 0.0 {
        0.0
    } else {
        (a.norm().ln() + n as f64 * half_width.ln()).exp()
    }
}

/// Fills `a_4 ..= a_N` from four seeds for the invariant `operator` frozen at one instant.
pub fn build_series(
    operator: &AlgebraElement,
    hbar: f64,
    lambda: Complex64,
    seeds: [Complex64; 4],
    order: usize,
    half_width: f64,
    frozen_time: f64,
) -> Result<SeriesEigenfunction> {
    let lead = operator.cp[3] * hbar.powi(4);
    if operator.cp[3] == Complex64::new(0.0, 0.0) {
        return Err(Error::DegenerateLeadingCoefficient);
    }
    if order < 8 {
        return Err(invalid("N", format!("truncation order must be at least 8, got {order}")));
    }
    if !(half_width.is_finite() && half_width > 0.0) {
        return Err(invalid("L", "must be finite and positive"));
    }
    let lower: [Complex64; 3] = std::array::from_fn(|i| operator.cp[i] * momentum_factor(hbar, i + 1));
    let shift = operator.c0 - lambda;
    let mut a = Vec::with_capacity(order + 1);
    a.extend_from_slice(&seeds);
    for m in 0..=order - 4 {
        let mut acc = shift * a[m];
        for k in 1..=3 {
            acc += lower[k - 1] * rising(m, k) * a[m + k];
        }
        if m >= 1 {
            acc += operator.cx * a[m - 1];
        }
        let next = -acc / (lead * rising(m, 4));
        if !(next.re.is_finite() && next.im.is_finite()) {
            return Err(Error::NonFinite { index: m + 4 });
        }
        a.push(next);
    }
    let tail: f64 = (order - 3..=order).map(|n| weighted_abs(a[n], n, half_width)).sum();
    let total: f64 = a.iter().enumerate().map(|(n, &c)| weighted_abs(c, n, half_width)).sum();
    let converged = tail.is_finite() && tail < TAIL_TOLERANCE * total.max(1.0);
    Ok(SeriesEigenfunction {
        lambda,
        seeds,
        coeffs: a,
        order,
        half_width,
        frozen_time,
        operator: *operator,
        hbar,
        tail,
        converged,
    })
}

/// Doubles the truncation order from 32 until the tail bound is met or 4096 is reached.
pub fn build_series_auto(
    operator: &AlgebraElement,
    hbar: f64,
    lambda: Complex64,
    seeds: [Complex64; 4],
    half_width: f64,
    frozen_time: f64,
) -> Result<SeriesEigenfunction> {
    let mut order = START_ORDER;
    loop {
        let phi = build_series(operator, hbar, lambda, seeds, order, half_width, frozen_time)?;
        if phi.converged || order >= MAX_ORDER {
            return Ok(phi);
        }
        order *= 2;
    }
}

impl SeriesEigenfunction {
    fn check_disk(&self, x: f64) -> Result<()> {
        if x.abs() > self.half_width {
            return Err(Error::OutsideDisk {
                x,
                half_width: self.half_width,
            });
        }
        Ok(())
    }

    /// `Phi(x)` by Horner's rule.
    pub fn evaluate(&self, x: f64) -> Result<Complex64> {
        self.check_disk(x)?;
        Ok(horner(&self.coeffs, x))
    }

    /// `d^k Phi / dx^k` from the termwise-differentiated truncation.
    pub fn derivative(&self, k: usize, x: f64) -> Result<Complex64> {
        self.check_disk(x)?;
        if k >= self.coeffs.len() {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let diff: Vec<Complex64> = (k..self.coeffs.len())
            .map(|n| self.coeffs[n] * rising(n - k, k))
            .collect();
        Ok(horner(&diff, x))
    }

    /// Largest relative violation of the recurrence over all `m`.
    pub fn recurrence_defect(&self) -> f64 {
        let op = &self.operator;
        let a = &self.coeffs;
        let mut worst: f64 = 0.0;
        for m in 0..=self.order - 4 {
            let mut terms = vec![(op.c0 - self.lambda) * a[m]];
            for k in 1..=4 {
                terms.push(op.cp[k - 1] * momentum_factor(self.hbar, k) * rising(m, k) * a[m + k]);
            }
            if m >= 1 {
                terms.push(op.cx * a[m - 1]);
            }
            let scale = terms.iter().map(|t| t.norm()).fold(0.0, f64::max);
            if scale > 0.0 {
                let sum: Complex64 = terms.iter().sum();
                worst = worst.max(sum.norm() / scale);
            }
        }
        worst
    }
}

fn horner(c: &[Complex64], x: f64) -> Complex64 {
    c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &a| acc * x + a)
}

/// `max_x |(I - lambda) Phi|` with every derivative taken from the series.
pub fn eigen_residual(phi: &SeriesEigenfunction, x_samples: &[f64]) -> Result<f64> {
    let op = &phi.operator;
    let mut worst: f64 = 0.0;
    for &x in x_samples {
        let mut r = (op.c0 + op.cx * x - phi.lambda) * phi.evaluate(x)?;
        for k in 1..=4 {
            r += op.cp[k - 1] * momentum_factor(phi.hbar, k) * phi.derivative(k, x)?;
        }
        worst = worst.max(r.norm());
    }
    Ok(worst)
}

/// Phase `alpha(t_j)` with `hbar alpha' = <Phi| i hbar d/dt - H(t) |Phi> / <Phi|Phi>`
/// and `alpha(0) = 0`, so that `exp(i alpha) Phi` solves the Schrodinger equation.
///
/// The time derivative is a second-order finite difference of the trajectory;
/// the integral is the composite trapezoid rule.
pub fn lr_phase(
    phi_trajectory: &[WaveFunction],
    hamiltonian_at: impl Fn(f64) -> Result<AlgebraElement>,
    grid: &TimeGrid,
    hbar: f64,
) -> Result<Vec<f64>> {
    if phi_trajectory.len() != grid.len() {
        return Err(Error::LengthMismatch {
            what: "state trajectory vs time grid",
            left: phi_trajectory.len(),
            right: grid.len(),
        });
    }
    let dt = grid.dt();
    let n = phi_trajectory.len();
    let ihbar = Complex64::new(0.0, hbar);
    let mut rate = Vec::with_capacity(n);
    let position: Vec<WaveFunction> = phi_trajectory.iter().map(|p| p.to_position()).collect();
    for (j, phi) in position.iter().enumerate() {
        let norm = phi.norm_sqr();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::VanishingNorm { index: j });
        }
        let dphi = second_order_derivative(&position, j, dt);
        let h_phi = apply_element(&hamiltonian_at(grid.time(j))?, phi);
        let rhs = dphi.scaled(ihbar).sub(&h_phi)?;
        rate.push(inner_product(phi, &rhs)?.re / (norm * hbar));
    }
    let mut alpha = Vec::with_capacity(n);
    alpha.push(0.0);
    for j in 1..n {
        let prev = alpha[j - 1];
        alpha.push(prev + 0.5 * dt * (rate[j - 1] + rate[j]));
    }
    Ok(alpha)
}

/// Second-order finite-difference `dPhi/dt` at instant `j`, one-sided at the ends.
fn second_order_derivative(traj: &[WaveFunction], j: usize, dt: f64) -> WaveFunction {
    let n = traj.len();
    let stencil: Vec<(usize, f64)> = if n < 3 {
        if j == 0 {
            vec![(0, -1.0 / dt), (1, 1.0 / dt)]
        } else {
            vec![(j - 1, -1.0 / dt), (j, 1.0 / dt)]
        }
    } else if j == 0 {
        vec![(0, -1.5 / dt), (1, 2.0 / dt), (2, -0.5 / dt)]
    } else if j == n - 1 {
        vec![(n - 1, 1.5 / dt), (n - 2, -2.0 / dt), (n - 3, 0.5 / dt)]
    } else {
        vec![(j + 1, 0.5 / dt), (j - 1, -0.5 / dt)]
    };
    let samples = (0..traj[j].samples().len())
        .map(|i| stencil.iter().map(|&(k, w)| traj[k].samples()[i] * w).sum())
        .collect();
    WaveFunction::new(traj[j].grid().clone(), samples, traj[j].representation()).expect("same grid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Basis;
    use crate::grid::{gaussian_packet, momentum_eigenstate, SpatialGrid};
    use crate::params::PhysicalParams;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn quartic_only(a: f64) -> AlgebraElement {
        AlgebraElement::p_power(4, c(a, 0.0))
    }

    #[test]
    fn pure_quartic_coefficients() {
        let hbar = 0.8;
        let lambda = c(0.7, -0.2);
        let phi = build_series(&quartic_only(1.0), hbar, lambda, [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)], 16, 2.0, 0.0).unwrap();
        let fact = |n: u32| (1..=n).map(f64::from).product::<f64>();
        assert!((phi.coeffs[4] - lambda / (24.0 * hbar.powi(4))).norm() < 1e-15);
        assert!((phi.coeffs[8] - lambda * lambda / (fact(8) * hbar.powi(8))).norm() < 1e-15);
        for k in 0..=4 {
            let want = lambda.powu(k) / (fact(4 * k) * hbar.powi(4 * k as i32));
            assert!((phi.coeffs[4 * k as usize] - want).norm() <= 1e-14 * want.norm());
        }
        for n in (0..=16).filter(|n| n % 4 != 0) {
            assert_eq!(phi.coeffs[n], c(0.0, 0.0));
        }
        assert_eq!(phi.evaluate(0.0).unwrap(), c(1.0, 0.0));
    }

    #[test]
    fn linear_term_pattern() {
        let hbar = 1.2;
        let op = quartic_only(1.0) + AlgebraElement::x(c(1.0, 0.0));
        let phi = build_series(&op, hbar, c(0.0, 0.0), [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)], 12, 2.0, 0.0).unwrap();
        assert!((phi.coeffs[5] + 1.0 / (120.0 * hbar.powi(4))).norm() < 1e-15);
        assert_eq!(phi.coeffs[4], c(0.0, 0.0));
    }

    #[test]
    fn zero_seeds_give_zero() {
        let op = quartic_only(0.3) + AlgebraElement::p_power(3, c(0.1, 0.0)) + AlgebraElement::x(c(0.4, 0.0));
        let phi = build_series(&op, 1.0, c(2.0, 0.0), [c(0.0, 0.0); 4], 40, 8.0, 0.0).unwrap();
        assert!(phi.coeffs.iter().all(|a| *a == c(0.0, 0.0)));
        assert_eq!(phi.evaluate(3.0).unwrap(), c(0.0, 0.0));
        assert_eq!(eigen_residual(&phi, &[-1.0, 0.0, 2.5]).unwrap(), 0.0);
    }

    fn exponential_case(order: usize) -> SeriesEigenfunction {
        let hbar: f64 = 1.0;
        build_series(
            &quartic_only(1.0),
            hbar,
            c(hbar.powi(4), 0.0),
            [c(1.0, 0.0), c(1.0, 0.0), c(0.5, 0.0), c(1.0 / 6.0, 0.0)],
            order,
            1.0,
            0.0,
        )
        .unwrap()
    }

    #[test]
    fn exponential_solution() {
        let phi = exponential_case(40);
        assert!((phi.evaluate(1.0).unwrap() - std::f64::consts::E).norm() < 1e-10);
        let xs: Vec<f64> = (0..101).map(|i| -1.0 + 0.02 * i as f64).collect();
        assert!(eigen_residual(&phi, &xs).unwrap() < 1e-9);
        assert!(phi.converged);
        assert!(phi.recurrence_defect() < 1e-13);
    }

    #[test]
    fn truncated_residual_tracks_leading_tail() {
        let phi = exponential_case(8);
        let xs: Vec<f64> = (0..101).map(|i| -1.0 + 0.02 * i as f64).collect();
        let got = eigen_residual(&phi, &xs).unwrap();
        // missing a_9.. a_12 feed (I - lambda) Phi through the fourth derivative
        let fact = |n: u32| (1..=n).map(f64::from).product::<f64>();
        let lead: f64 = (5..=8).map(|n| 1.0 / fact(n)).sum();
        assert!(got <= 2.0 * lead && got >= 0.5 * lead, "{got} vs {lead}");
    }

    #[test]
    fn outside_disk_refused() {
        let phi = exponential_case(40);
        assert!(matches!(phi.evaluate(1.5), Err(Error::OutsideDisk { .. })));
    }

    #[test]
    fn rejects_degenerate_operator() {
        let op = AlgebraElement::p_power(2, c(1.0, 0.0));
        assert_eq!(
            build_series(&op, 1.0, c(0.0, 0.0), [c(1.0, 0.0); 4], 16, 1.0, 0.0),
            Err(Error::DegenerateLeadingCoefficient)
        );
        assert!(build_series(&quartic_only(1.0), 1.0, c(0.0, 0.0), [c(1.0, 0.0); 4], 7, 1.0, 0.0).is_err());
    }

    #[test]
    fn overflow_is_flagged() {
        let op = quartic_only(1e-300);
        let err = build_series(&op, 1.0, c(1e300, 0.0), [c(1.0, 0.0); 4], 64, 1.0, 0.0).unwrap_err();
        assert!(matches!(err, Error::NonFinite { index } if index >= 4));
    }

    #[test]
    fn canonical_seeds_are_independent() {
        let op = quartic_only(1.0) + AlgebraElement::p_power(3, c(0.4, 0.0)) + AlgebraElement::x(c(1.0, 0.0));
        let fact = |n: usize| (1..=n).map(|v| v as f64).product::<f64>();
        for i in 0..4 {
            let mut seeds = [c(0.0, 0.0); 4];
            seeds[i] = c(1.0, 0.0);
            let phi = build_series(&op, 1.0, c(0.3, 0.0), seeds, 32, 2.0, 0.0).unwrap();
            for k in 0..4 {
                let want = if k == i { fact(k) } else { 0.0 };
                assert_eq!(phi.derivative(k, 0.0).unwrap(), c(want, 0.0));
            }
        }
    }

    #[test]
    fn auto_order_converges() {
        let params = PhysicalParams::default();
        let op = quartic_only(1.0)
            + AlgebraElement::p_power(3, c(0.8, 0.0))
            + AlgebraElement::p_power(2, c(0.24, 0.0))
            + AlgebraElement::x(c(1.0, 0.0));
        let phi = build_series_auto(&op, params.hbar, c(0.5, 0.0), [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)], 8.0, 0.0).unwrap();
        assert!(phi.converged, "tail {}", phi.tail);
        assert!(phi.recurrence_defect() < 1e-13);
        let xs: Vec<f64> = (0..41).map(|i| -4.0 + 0.2 * i as f64).collect();
        let r = eigen_residual(&phi, &xs).unwrap();
        let scale = xs.iter().map(|&x| phi.evaluate(x).unwrap().norm()).fold(1.0, f64::max);
        assert!(r < 1e-6 * scale, "{r} vs {scale}");
        assert_eq!(phi.operator.get(Basis::X), c(1.0, 0.0));
    }

    #[test]
    fn phase_vanishes_for_frozen_state_without_hamiltonian() {
        let g = SpatialGrid::new(256, 12.0, 1.0).unwrap();
        let psi = gaussian_packet(&g, 0.0, 0.0, 1.0).unwrap();
        let grid = TimeGrid::new(1.0, 10).unwrap();
        let traj = vec![psi; grid.len()];
        let alpha = lr_phase(&traj, |_| Ok(AlgebraElement::zero()), &grid, 1.0).unwrap();
        assert!(alpha.iter().all(|&a| a == 0.0));
    }

    #[test]
    fn stationary_phase() {
        let params = PhysicalParams::default();
        let g = SpatialGrid::new(1024, 16.0, params.hbar).unwrap();
        let k = 7;
        let phi = momentum_eigenstate(&g, k).unwrap();
        let e0 = params.kinetic(g.momenta()[k]);
        let grid = TimeGrid::new(2.0, 50).unwrap();
        let traj = vec![phi; grid.len()];
        let alpha = lr_phase(&traj, |_| Ok(params.hamiltonian(0.0)), &grid, params.hbar).unwrap();
        for (j, a) in alpha.iter().enumerate() {
            assert!((a + e0 * grid.time(j) / params.hbar).abs() < 1e-12);
        }
    }

    #[test]
    fn phase_rejects_empty_state() {
        let g = SpatialGrid::new(64, 4.0, 1.0).unwrap();
        let zero = WaveFunction::from_fn(g, |_| c(0.0, 0.0));
        let grid = TimeGrid::new(1.0, 2).unwrap();
        let r = lr_phase(&vec![zero; 3], |_| Ok(AlgebraElement::zero()), &grid, 1.0);
        assert!(matches!(r, Err(Error::VanishingNorm { index: 0 })));
    }
}
