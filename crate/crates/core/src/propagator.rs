//! Evolution operator as the ordered product
//! `U(t) = e^{g1 p^4} e^{g2 p^3} e^{g3 p^2} e^{g4 p} e^{g5 x} e^{g6}`,
//! and two independent propagators it is checked against.

use num_complex::Complex64;

use crate::algebra::{derive_propagator_constraints, literal_propagator_constraints, ConstraintTable};
use crate::error::{invalid, Error, Result};
use crate::grid::{apply_element, inner_product, Representation, WaveFunction};
use crate::params::PhysicalParams;
use crate::schedule::{integrate_linear_system, Schedule, TimeGrid};

/// Phase wrap per kinetic step (radians) beyond which a warning is logged.
pub const PHASE_WRAP_WARNING: f64 = 1e3;

/// Trajectories of `g1..g6` on a [`TimeGrid`], starting from the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagatorFactors {
    pub grid: TimeGrid,
    pub gamma: Vec<[Complex64; 6]>,
}

impl PropagatorFactors {
    fn from_table(table: &ConstraintTable, schedule: &Schedule, grid: &TimeGrid) -> Result<Self> {
        let zero = [Complex64::default(); 6];
        let traj = integrate_linear_system(table, &zero, schedule, grid)?;
        let gamma = traj
            .states
            .into_iter()
            .map(|s| std::array::from_fn(|k| s[k]))
            .collect();
        Ok(Self { grid: *grid, gamma })
    }

    pub fn at(&self, j: usize) -> &[Complex64; 6] {
        &self.gamma[j]
    }

    /// `g_k` over time, `k` in `1..=6`.
    pub fn component(&self, k: usize) -> Vec<Complex64> {
        self.gamma.iter().map(|g| g[k - 1]).collect()
    }

    /// Largest `|Re g_k|` over the trajectory; zero for a unitary product.
    pub fn max_real_part(&self) -> f64 {
        self.gamma
            .iter()
            .flat_map(|g| g.iter().map(|c| c.re.abs()))
            .fold(0.0, f64::max)
    }

    pub fn max_real_part_of(&self, k: usize) -> f64 {
        self.component(k).iter().map(|c| c.re.abs()).fold(0.0, f64::max)
    }

    /// `U(t_j) psi0` for every instant.
    pub fn evolve(&self, psi0: &WaveFunction) -> Result<Vec<WaveFunction>> {
        self.gamma.iter().map(|g| apply(g, psi0)).collect()
    }
}

/// Integrates the coefficient-matched factor system from zero.
pub fn solve_gammas(schedule: &Schedule, params: &PhysicalParams, grid: &TimeGrid) -> Result<PropagatorFactors> {
    PropagatorFactors::from_table(&derive_propagator_constraints(params), schedule, grid)
}

/// Factors from the literally printed integral formulas, zero constants.
///
/// Only `g1`, `g2`, `g5` agree with [`solve_gammas`]; used by the discrepancy report.
pub fn literal_gammas(schedule: &Schedule, params: &PhysicalParams, grid: &TimeGrid) -> Result<PropagatorFactors> {
    PropagatorFactors::from_table(&literal_propagator_constraints(params), schedule, grid)
}

/// `U psi0` for one set of factors; the `x` factor acts first.
pub fn apply(gamma: &[Complex64; 6], psi0: &WaveFunction) -> Result<WaveFunction> {
    psi0.require(Representation::Position)?;
    let [g1, g2, g3, g4, g5, g6] = *gamma;
    let scalar = g6.exp();
    let shifted = psi0.map_samples(|x, v| scalar * (g5 * x).exp() * v);
    let out = shifted
        .multiply_momentum(|p| ((((g1 * p + g2) * p + g3) * p + g4) * p).exp())
        .to_position();
    Ok(out)
}

/// `M_k(t) = integral_0^t (F(t) - F(s))^k ds` for `k = 0..=4`.
///
/// Closed form for constant and linear drives; composite Simpson with
/// `n_quad` panels (rounded up to even) otherwise.
pub fn drift_moments(schedule: &Schedule, t: f64, n_quad: usize) -> Result<[f64; 5]> {
    let binom = |n: usize, k: usize| -> f64 {
        (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
    };
    match schedule {
        Schedule::Constant { f0 } => Ok(std::array::from_fn(|k| {
            f0.powi(k as i32) * t.powi(k as i32 + 1) / (k + 1) as f64
        })),
        Schedule::Linear { f0, f1 } => {
            // F(t) - F(t - u) = a u + b u^2
            let a = f0 + f1 * t;
            let b = -0.5 * f1;
            Ok(std::array::from_fn(|k| {
                (0..=k)
                    .map(|j| {
                        binom(k, j) * a.powi((k - j) as i32) * b.powi(j as i32) * t.powi((k + j + 1) as i32)
                            / (k + j + 1) as f64
                    })
                    .sum()
            }))
        }
        _ => {
            if n_quad < 16 {
                return Err(invalid("n_quad", format!("need at least 16 panels, got {n_quad}")));
            }
            let panels = n_quad + n_quad % 2;
            let total = schedule.antiderivative(t)?;
            let h = t / panels as f64;
            let mut m = [0.0; 5];
            for i in 0..=panels {
                let s = if i == panels { t } else { i as f64 * h };
                let w = if i == 0 || i == panels {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                let u = total - schedule.antiderivative(s)?;
                let mut pow = 1.0;
                for mk in m.iter_mut() {
                    *mk += w * pow;
                    pow *= u;
                }
            }
            Ok(m.map(|v| v * h / 3.0))
        }
    }
}

/// Coefficients `[theta_0, .., theta_4]` of `Theta(p) = integral_0^t T(p + F(t) - F(s)) ds`.
pub fn phase_polynomial(params: &PhysicalParams, moments: &[f64; 5]) -> [f64; 5] {
    let (q, k) = (params.quartic(), params.quadratic());
    let m = moments;
    [
        q * m[4] + k * m[2],
        q * 4.0 * m[3] + k * 2.0 * m[1],
        q * 6.0 * m[2] + k * m[0],
        q * 4.0 * m[1],
        q * m[0],
    ]
}

/// Exact solution along momentum-space characteristics:
/// `psi~(p, t) = psi~(p + F(t), 0) exp(-i Theta(p, t) / hbar)`.
pub fn characteristics_propagate(
    psi0: &WaveFunction,
    schedule: &Schedule,
    params: &PhysicalParams,
    t: f64,
    n_quad: usize,
) -> Result<WaveFunction> {
    psi0.require(Representation::Position)?;
    if n_quad < 16 {
        return Err(invalid("n_quad", format!("need at least 16 panels, got {n_quad}")));
    }
    let hbar = params.hbar;
    let shift = schedule.antiderivative(t)?;
    let theta = phase_polynomial(params, &drift_moments(schedule, t, n_quad)?);
    let out = psi0
        .multiply_position(|x| Complex64::from_polar(1.0, -shift * x / hbar))
        .multiply_momentum(|p| {
            let phase = (((theta[4] * p + theta[3]) * p + theta[2]) * p + theta[1]) * p + theta[0];
            Complex64::from_polar(1.0, -phase / hbar)
        })
        .to_position();
    Ok(out)
}

/// Characteristics solution at every instant of `grid`.
pub fn characteristics_trajectory(
    psi0: &WaveFunction,
    schedule: &Schedule,
    params: &PhysicalParams,
    grid: &TimeGrid,
    n_quad: usize,
) -> Result<Vec<WaveFunction>> {
    grid.times()
        .into_iter()
        .map(|t| characteristics_propagate(psi0, schedule, params, t, n_quad))
        .collect()
}

/// Largest kinetic phase `dt T(p_max) / hbar` accumulated in one step.
pub fn kinetic_phase_wrap(params: &PhysicalParams, p_max: f64, dt: f64) -> f64 {
    dt * params.kinetic(p_max) / params.hbar
}

/// Strang splitting `V/2 T V/2` with `f` taken at each step midpoint.
pub fn splitstep_propagate(
    psi0: &WaveFunction,
    schedule: &Schedule,
    params: &PhysicalParams,
    grid: &TimeGrid,
) -> Result<Vec<WaveFunction>> {
    psi0.require(Representation::Position)?;
    let hbar = params.hbar;
    let dt = grid.dt();
    let wrap = kinetic_phase_wrap(params, psi0.grid().p_max(), dt);
    if wrap > PHASE_WRAP_WARNING {
        log::warn!("kinetic phase advances {wrap:.3e} rad per step at the momentum cutoff");
    }
    let mut out = Vec::with_capacity(grid.len());
    let mut psi = psi0.clone();
    out.push(psi.clone());
    for j in 0..grid.n_steps {
        let t_mid = 0.5 * (grid.time(j) + grid.time(j + 1));
        let f_mid = schedule.evaluate(t_mid)?;
        let kick = |x: f64| Complex64::from_polar(1.0, -0.5 * dt * f_mid * x / hbar);
        psi = psi
            .multiply_position(kick)
            .multiply_momentum(|p| Complex64::from_polar(1.0, -dt * params.kinetic(p) / hbar))
            .multiply_position(kick);
        out.push(psi.clone());
    }
    Ok(out)
}

/// `max_j,psi || i hbar (U(t+dt) - U(t-dt)) psi / 2dt - H(t) U(t) psi || / ||psi||`
/// over interior instants.
pub fn schrodinger_residual(
    factors: &PropagatorFactors,
    schedule: &Schedule,
    params: &PhysicalParams,
    test_states: &[WaveFunction],
) -> Result<f64> {
    if test_states.len() < 3 {
        return Err(Error::TooFewStates {
            needed: 3,
            got: test_states.len(),
        });
    }
    let grid = &factors.grid;
    let dt = grid.dt();
    let ihbar = Complex64::new(0.0, params.hbar);
    let mut worst: f64 = 0.0;
    for psi in test_states {
        let scale = psi.norm();
        let evolved = factors.evolve(psi)?;
        for j in 1..grid.n_steps {
            let f = schedule.evaluate(grid.time(j))?;
            let rate = evolved[j + 1].sub(&evolved[j - 1])?.scaled(ihbar / (2.0 * dt));
            let h_psi = apply_element(&params.hamiltonian(f), &evolved[j]);
            let r = rate.sub(&h_psi)?.norm() / scale;
            // non-finite values come from non-unitary factors overflowing
            worst = if r.is_finite() { worst.max(r) } else { f64::INFINITY };
        }
    }
    Ok(worst)
}

/// `||a - b|| / ||b||`.
pub fn relative_distance(a: &WaveFunction, b: &WaveFunction) -> Result<f64> {
    Ok(a.sub(b)?.norm() / b.norm())
}

/// `|<a|b>|^2 / (<a|a> <b|b>)`.
pub fn fidelity(a: &WaveFunction, b: &WaveFunction) -> Result<f64> {
    let overlap = inner_product(a, b)?;
    Ok(overlap.norm_sqr() / (a.norm_sqr() * b.norm_sqr()))
}
