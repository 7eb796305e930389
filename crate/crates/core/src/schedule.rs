//! Drive strength `f(t)`, time grids and the fixed-step integrator.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::ConstraintTable;
use crate::error::{invalid, Error, Result};

/// Time profile of the linear potential strength.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Schedule {
    Constant { f0: f64 },
    /// `f0 + f1 t`
    Linear { f0: f64, f1: f64 },
    /// `f0 sin(omega t + phi)`
    Sinusoid { f0: f64, omega: f64, phi: f64 },
    /// Piecewise-linear interpolation through `(times[i], values[i])`.
    Tabulated { times: Vec<f64>, values: Vec<f64> },
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule::Constant { f0: 0.2 }
    }
}

impl Schedule {
    pub fn tabulated(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let s = Schedule::Tabulated { times, values };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |name: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(invalid(name, "must be finite"))
            }
        };
        match self {
            Schedule::Constant { f0 } => finite("f0", *f0),
            Schedule::Linear { f0, f1 } => {
                finite("f0", *f0)?;
                finite("f1", *f1)
            }
            Schedule::Sinusoid { f0, omega, phi } => {
                finite("f0", *f0)?;
                finite("phi", *phi)?;
                if !(omega.is_finite() && *omega != 0.0) {
                    return Err(invalid("omega", "must be finite and nonzero"));
                }
                Ok(())
            }
            Schedule::Tabulated { times, values } => {
                if times.len() != values.len() {
                    return Err(invalid("values", "length must match times"));
                }
                if times.len() < 2 {
                    return Err(invalid("times", "need at least two samples"));
                }
                if times.windows(2).any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater)) {
                    return Err(invalid("times", "must be strictly increasing"));
                }
                if times.iter().chain(values).any(|v| !v.is_finite()) {
                    return Err(invalid("values", "must be finite"));
                }
                Ok(())
            }
        }
    }

    /// Latest time at which the schedule is defined.
    pub fn t_max(&self) -> f64 {
        match self {
            Schedule::Tabulated { times, .. } => *times.last().unwrap_or(&0.0),
            _ => f64::INFINITY,
        }
    }

    fn bracket(times: &[f64], t: f64) -> Result<usize> {
        let (start, end) = (times[0], times[times.len() - 1]);
        if !(t >= start && t <= end) {
            return Err(Error::OutOfRange { t, start, end });
        }
        let idx = times.partition_point(|&s| s <= t);
        Ok(idx.clamp(1, times.len() - 1) - 1)
    }

    pub fn evaluate(&self, t: f64) -> Result<f64> {
        Ok(match self {
            Schedule::Constant { f0 } => *f0,
            Schedule::Linear { f0, f1 } => f0 + f1 * t,
            Schedule::Sinusoid { f0, omega, phi } => f0 * (omega * t + phi).sin(),
            Schedule::Tabulated { times, values } => {
                let i = Self::bracket(times, t)?;
                let w = (t - times[i]) / (times[i + 1] - times[i]);
                values[i] + w * (values[i + 1] - values[i])
            }
        })
    }

    /// `F(t) = integral of f from 0 to t`, exact for every kind.
    pub fn antiderivative(&self, t: f64) -> Result<f64> {
        Ok(match self {
            Schedule::Constant { f0 } => f0 * t,
            Schedule::Linear { f0, f1 } => f0 * t + 0.5 * f1 * t * t,
            Schedule::Sinusoid { f0, omega, phi } => f0 / omega * (phi.cos() - (omega * t + phi).cos()),
            Schedule::Tabulated { times, values } => {
                // integral from 0, so 0 must be inside the table too
                Self::bracket(times, 0.0)?;
                let i = Self::bracket(times, t)?;
                let cumulative = |upto: usize, tt: f64| {
                    let mut acc = 0.0;
                    for k in 0..upto {
                        acc += 0.5 * (values[k] + values[k + 1]) * (times[k + 1] - times[k]);
                    }
                    let w = tt - times[upto];
                    let slope = (values[upto + 1] - values[upto]) / (times[upto + 1] - times[upto]);
                    acc + values[upto] * w + 0.5 * slope * w * w
                };
                let j = Self::bracket(times, 0.0)?;
                cumulative(i, t) - cumulative(j, 0.0)
            }
        })
    }

    /// The same drive seen from a clock started at `offset`: `g(t) = f(t + offset)`.
    pub fn shifted(&self, offset: f64) -> Result<Schedule> {
        Ok(match self {
            Schedule::Constant { f0 } => Schedule::Constant { f0: *f0 },
            Schedule::Linear { f0, f1 } => Schedule::Linear {
                f0: f0 + f1 * offset,
                f1: *f1,
            },
            Schedule::Sinusoid { f0, omega, phi } => Schedule::Sinusoid {
                f0: *f0,
                omega: *omega,
                phi: phi + omega * offset,
            },
            Schedule::Tabulated { times, values } => {
                let times: Vec<f64> = times.iter().map(|t| t - offset).collect();
                Schedule::tabulated(times, values.clone())?
            }
        })
    }
}

/// Uniform instants `t_j = j dt`, `j = 0..=n_steps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t_end: f64,
    pub n_steps: usize,
}

impl TimeGrid {
    pub fn new(t_end: f64, n_steps: usize) -> Result<Self> {
        if n_steps == 0 {
            return Err(invalid("n_steps", "must be at least 1"));
        }
        if !(t_end.is_finite() && t_end > 0.0) {
            return Err(invalid("t_end", "must be finite and positive"));
        }
        Ok(Self { t_end, n_steps })
    }

    pub fn dt(&self) -> f64 {
        self.t_end / self.n_steps as f64
    }

    pub fn len(&self) -> usize {
        self.n_steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn time(&self, j: usize) -> f64 {
        if j == self.n_steps {
            self.t_end
        } else {
            j as f64 * self.dt()
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|j| self.time(j)).collect()
    }

    /// Grid with `factor` times as many steps over the same interval.
    pub fn refined(&self, factor: usize) -> Self {
        Self {
            t_end: self.t_end,
            n_steps: self.n_steps * factor,
        }
    }
}

/// State vectors at every instant of a [`TimeGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub grid: TimeGrid,
    pub states: Vec<Vec<Complex64>>,
}

impl Trajectory {
    /// Component `k` over time.
    pub fn component(&self, k: usize) -> Vec<Complex64> {
        self.states.iter().map(|s| s[k]).collect()
    }
}

/// Classical RK4 over `grid` for the system described by `rhs`.
pub fn integrate_linear_system(
    rhs: &ConstraintTable,
    initial: &[Complex64],
    schedule: &Schedule,
    grid: &TimeGrid,
) -> Result<Trajectory> {
    let table = rhs.compile()?;
    if initial.len() != table.dim() {
        return Err(Error::LengthMismatch {
            what: "initial state vs constraint table",
            left: initial.len(),
            right: table.dim(),
        });
    }
    let n = initial.len();
    let dt = grid.dt();
    let mut states = Vec::with_capacity(grid.len());
    let mut y = initial.to_vec();
    states.push(y.clone());
    let (mut k1, mut k2, mut k3, mut k4) = (vec![Complex64::default(); n], vec![Complex64::default(); n], vec![Complex64::default(); n], vec![Complex64::default(); n]);
    let mut tmp = vec![Complex64::default(); n];
    for j in 0..grid.n_steps {
        let t = j as f64 * dt;
        let f_left = schedule.evaluate(t)?;
        let f_mid = schedule.evaluate(t + 0.5 * dt)?;
        let f_right = schedule.evaluate(grid.time(j + 1))?;
        table.eval_into(&y, f_left, &mut k1);
        for i in 0..n {
            tmp[i] = y[i] + 0.5 * dt * k1[i];
        }
        table.eval_into(&tmp, f_mid, &mut k2);
        for i in 0..n {
            tmp[i] = y[i] + 0.5 * dt * k2[i];
        }
        table.eval_into(&tmp, f_mid, &mut k3);
        for i in 0..n {
            tmp[i] = y[i] + dt * k3[i];
        }
        table.eval_into(&tmp, f_right, &mut k4);
        for i in 0..n {
            y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        states.push(y.clone());
    }
    Ok(Trajectory { grid: *grid, states })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{Row, Term};
    use std::f64::consts::PI;

    fn scalar_table(terms: Vec<(f64, Vec<&str>)>) -> ConstraintTable {
        ConstraintTable {
            state: vec!["y".into()],
            rows: vec![Row {
                symbol: "ydot".into(),
                terms: terms
                    .into_iter()
                    .map(|(c, m)| Term {
                        coeff: c.into(),
                        monomial: m.into_iter().map(String::from).collect(),
                    })
                    .collect(),
            }],
        }
    }

    #[test]
    fn preset_values() {
        assert_eq!(Schedule::Constant { f0: 0.3 }.evaluate(7.0).unwrap(), 0.3);
        let s = Schedule::Sinusoid { f0: 1.0, omega: 2.0, phi: 0.0 };
        assert!((s.evaluate(PI / 4.0).unwrap() - 1.0).abs() < 1e-15);
        let tab = Schedule::tabulated(vec![0.0, 1.0], vec![0.0, 2.0]).unwrap();
        assert_eq!(tab.evaluate(0.25).unwrap(), 0.5);
    }

    #[test]
    fn preset_antiderivatives() {
        assert!((Schedule::Constant { f0: 0.3 }.antiderivative(2.0).unwrap() - 0.6).abs() < 1e-15);
        let w = 1.7;
        let s = Schedule::Sinusoid { f0: 1.0, omega: w, phi: 0.0 };
        let t = 0.9;
        assert!((s.antiderivative(t).unwrap() - (1.0 - (w * t).cos()) / w).abs() < 1e-15);
        let tab = Schedule::tabulated(vec![0.0, 1.0], vec![0.0, 2.0]).unwrap();
        assert_eq!(tab.antiderivative(1.0).unwrap(), 1.0);
        assert_eq!(tab.antiderivative(0.0).unwrap(), 0.0);
    }

    #[test]
    fn tabulated_out_of_range() {
        let tab = Schedule::tabulated(vec![0.0, 1.0, 3.0], vec![1.0, 2.0, 0.0]).unwrap();
        assert!(matches!(tab.evaluate(3.5), Err(Error::OutOfRange { .. })));
        assert!(matches!(tab.evaluate(-0.1), Err(Error::OutOfRange { .. })));
        assert!(tab.antiderivative(4.0).is_err());
        assert_eq!(tab.evaluate(3.0).unwrap(), 0.0);
        // 1.5 + 0.5 * 2 * 2
        assert!((tab.antiderivative(3.0).unwrap() - 3.5).abs() < 1e-15);
    }

    #[test]
    fn tabulated_rejects_unsorted() {
        assert!(Schedule::tabulated(vec![0.0, 0.0], vec![1.0, 2.0]).is_err());
        assert!(Schedule::tabulated(vec![0.0], vec![1.0]).is_err());
        assert!(Schedule::tabulated(vec![0.0, 1.0], vec![1.0]).is_err());
    }

    #[test]
    fn antiderivative_differentiates_back() {
        let presets = [
            Schedule::Constant { f0: -0.7 },
            Schedule::Linear { f0: 0.2, f1: 0.35 },
            Schedule::Sinusoid { f0: 0.5, omega: 2.0, phi: 0.3 },
            Schedule::tabulated(vec![0.0, 0.7, 1.1, 3.0], vec![0.1, -0.4, 0.9, 0.2]).unwrap(),
        ];
        let h = 1e-5;
        for s in &presets {
            for k in 0..100 {
                // stay off the tabulated kinks
                let t = 0.01 + 2.9 * (k as f64 + 0.5) / 100.0;
                if let Schedule::Tabulated { times, .. } = s {
                    if times.iter().any(|&tk| (tk - t).abs() < 2.0 * h) {
                        continue;
                    }
                }
                let fd = (s.antiderivative(t + h).unwrap() - s.antiderivative(t - h).unwrap()) / (2.0 * h);
                assert!((fd - s.evaluate(t).unwrap()).abs() < 1e-8, "{s:?} at {t}");
            }
        }
    }

    #[test]
    fn shifted_schedule() {
        let s = Schedule::Sinusoid { f0: 0.5, omega: 2.0, phi: 0.3 };
        let g = s.shifted(0.8).unwrap();
        assert!((g.evaluate(0.4).unwrap() - s.evaluate(1.2).unwrap()).abs() < 1e-15);
        let l = Schedule::Linear { f0: 0.2, f1: 0.1 }.shifted(1.0).unwrap();
        assert!((l.evaluate(0.5).unwrap() - 0.35).abs() < 1e-15);
    }

    #[test]
    fn time_grid_validation() {
        assert!(TimeGrid::new(1.0, 0).is_err());
        assert!(TimeGrid::new(-1.0, 3).is_err());
        let g = TimeGrid::new(2.0, 400).unwrap();
        assert_eq!(g.dt(), 0.005);
        assert_eq!(g.len(), 401);
        assert_eq!(g.time(400), 2.0);
    }

    #[test]
    fn rk4_constant_solution() {
        let table = scalar_table(vec![]);
        let grid = TimeGrid::new(3.0, 17).unwrap();
        let c = Complex64::new(0.25, -1.5);
        let traj = integrate_linear_system(&table, &[c], &Schedule::Constant { f0: 0.3 }, &grid).unwrap();
        assert!(traj.states.iter().all(|s| s[0] == c));
    }

    #[test]
    fn rk4_integrates_drive_exactly() {
        let table = scalar_table(vec![(1.0, vec!["f"])]);
        let grid = TimeGrid::new(2.0, 50).unwrap();
        let traj = integrate_linear_system(&table, &[0.0.into()], &Schedule::Constant { f0: 0.3 }, &grid).unwrap();
        for (j, s) in traj.states.iter().enumerate() {
            assert!((s[0] - 0.3 * grid.time(j)).norm() < 1e-14);
        }
    }

    #[test]
    fn rk4_fourth_order_on_exponential_growth() {
        let table = scalar_table(vec![(1.0, vec!["y", "f"])]);
        let s = Schedule::Sinusoid { f0: 0.5, omega: 2.0, phi: 0.0 };
        let t_end = 2.0;
        let err = |n: usize| {
            let grid = TimeGrid::new(t_end, n).unwrap();
            let traj = integrate_linear_system(&table, &[1.0.into()], &s, &grid).unwrap();
            traj.states
                .iter()
                .enumerate()
                .map(|(j, y)| (y[0] - s.antiderivative(grid.time(j)).unwrap().exp()).norm())
                .fold(0.0, f64::max)
        };
        let errors: Vec<f64> = [50, 100, 200, 400].iter().map(|&n| err(n)).collect();
        for w in errors.windows(2) {
            let ratio = w[0] / w[1];
            assert!((14.0..=18.0).contains(&ratio), "ratio {ratio}");
            assert!((ratio.log2() - 4.0).abs() <= 0.2);
        }
    }

    #[test]
    fn length_mismatch_rejected() {
        let table = scalar_table(vec![]);
        let grid = TimeGrid::new(1.0, 4).unwrap();
        assert!(integrate_linear_system(&table, &[], &Schedule::default(), &grid).is_err());
    }
}
