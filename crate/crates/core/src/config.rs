//! Run configuration: TOML (or JSON) text with every key optional.
//!
//! Omitted keys take the acceptance-scenario defaults. Unknown keys, type
//! mismatches and out-of-range values are errors that name the key path.

use std::fmt;
use std::path::PathBuf;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::grid::{gaussian_packet, SpatialGrid, WaveFunction};
use crate::invariant::InvariantConstants;
use crate::params::PhysicalParams;
use crate::schedule::{Schedule, TimeGrid};

/// A configuration problem located at a dotted key path.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    fn at(path: impl Into<String>, message: impl fmt::Display) -> Self {
        Self {
            path: path.into(),
            message: message.to_string(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() || self.path == "." {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

/// Complex number written either as a bare real or as `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "ComplexRepr", into = "[f64; 2]")]
pub struct Cplx(pub Complex64);

#[derive(Deserialize)]
#[serde(untagged)]
enum ComplexRepr {
    Real(f64),
    Pair([f64; 2]),
}

impl From<ComplexRepr> for Cplx {
    fn from(r: ComplexRepr) -> Self {
        match r {
            ComplexRepr::Real(re) => Cplx(Complex64::new(re, 0.0)),
            ComplexRepr::Pair([re, im]) => Cplx(Complex64::new(re, im)),
        }
    }
}

impl From<Cplx> for [f64; 2] {
    fn from(c: Cplx) -> Self {
        [c.0.re, c.0.im]
    }
}

impl From<f64> for Cplx {
    fn from(re: f64) -> Self {
        Cplx(Complex64::new(re, 0.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicalSpec {
    pub m1: f64,
    pub m2: f64,
    pub hbar: f64,
}

impl Default for PhysicalSpec {
    fn default() -> Self {
        let p = PhysicalParams::default();
        Self {
            m1: p.m1,
            m2: p.m2,
            hbar: p.hbar,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeSpec {
    pub t_end: f64,
    /// Zero is accepted and means "no evolution".
    pub n_steps: usize,
}

impl Default for TimeSpec {
    fn default() -> Self {
        Self {
            t_end: 2.0,
            n_steps: 400,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpatialSpec {
    pub n: usize,
    pub half_width: f64,
}

impl Default for SpatialSpec {
    fn default() -> Self {
        Self {
            n: 1024,
            half_width: 16.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PacketSpec {
    pub x0: f64,
    pub p0: f64,
    pub sigma: f64,
}

impl Default for PacketSpec {
    fn default() -> Self {
        Self {
            x0: -4.0,
            p0: 1.0,
            sigma: 1.0,
        }
    }
}

/// Integration constants of the invariant; keys are lowercase `a, e, b0, ..`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InvariantSpec {
    pub a: Cplx,
    pub e: Cplx,
    pub b0: Cplx,
    pub c0: Cplx,
    pub d0: Cplx,
    pub f0: Cplx,
}

impl Default for InvariantSpec {
    fn default() -> Self {
        let c = InvariantConstants::default();
        Self {
            a: Cplx(c.a),
            e: Cplx(c.e),
            b0: Cplx(c.b0),
            c0: Cplx(c.c0),
            d0: Cplx(c.d0),
            f0: Cplx(c.f0),
        }
    }
}

impl InvariantSpec {
    pub fn constants(&self) -> InvariantConstants {
        InvariantConstants {
            a: self.a.0,
            e: self.e.0,
            b0: self.b0.0,
            c0: self.c0.0,
            d0: self.d0.0,
            f0: self.f0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EigenSpec {
    pub lambda: Cplx,
    pub seeds: [Cplx; 4],
    /// Truncation order; omitted means doubling from 32 until the tail bound holds.
    pub order: Option<usize>,
    pub half_width: f64,
    pub frozen_time: f64,
    /// Number of evenly spaced points on `[-L, L]` in the value table.
    pub samples: usize,
}

impl Default for EigenSpec {
    fn default() -> Self {
        Self {
            lambda: 1.0.into(),
            seeds: [1.0.into(), 0.0.into(), 0.0.into(), 0.0.into()],
            order: None,
            half_width: 8.0,
            frozen_time: 0.0,
            samples: 161,
        }
    }
}

/// Propagation method for the `propagate` subcommand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Weinorman,
    Characteristics,
    Splitstep,
    /// Factors from the printed integral formulas; not unitary.
    #[serde(rename = "paper-literal")]
    #[value(name = "paper-literal")]
    Printed,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Weinorman => "weinorman",
            Method::Characteristics => "characteristics",
            Method::Splitstep => "splitstep",
            Method::Printed => "paper-literal",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PropagateSpec {
    pub method: Method,
    /// Number of evenly spaced checkpoints after `t = 0`.
    pub checkpoints: usize,
    /// Simpson panels for the characteristics oracle on non-polynomial drives.
    pub n_quad: usize,
    /// Write the final state as `psi_final.bin`.
    pub dump: bool,
}

impl Default for PropagateSpec {
    fn default() -> Self {
        Self {
            method: Method::Weinorman,
            checkpoints: 20,
            n_quad: 256,
            dump: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: PathBuf,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { dir: PathBuf::from("out") }
    }
}

/// Schedules and sampling used by the `verify` suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySpec {
    pub constant: Schedule,
    pub linear: Schedule,
    pub sinusoid: Schedule,
    /// Step of the invariant-residual check.
    pub invariant_dt: f64,
    /// Seed of the random algebra elements.
    pub seed: u64,
    pub random_pairs: usize,
    /// Grid of the operator-to-matrix homomorphism check.
    pub homomorphism_n: usize,
    pub homomorphism_half_width: f64,
    /// Step counts of the convergence studies, coarse to fine.
    pub refinements: Vec<usize>,
}

impl Default for VerifySpec {
    fn default() -> Self {
        Self {
            constant: Schedule::Constant { f0: 0.2 },
            linear: Schedule::Linear { f0: 0.2, f1: 0.1 },
            sinusoid: Schedule::Sinusoid {
                f0: 0.5,
                omega: 2.0,
                phi: 0.0,
            },
            invariant_dt: 1e-3,
            seed: 20240607,
            random_pairs: 1000,
            homomorphism_n: 1024,
            homomorphism_half_width: 32.0,
            refinements: vec![100, 200, 400],
        }
    }
}

/// Pass thresholds of the `verify` and `sweep` checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub homomorphism: f64,
    pub invariance_residual: f64,
    pub literal_residual_min: f64,
    pub expectation_drift: f64,
    pub gamma1_relative: f64,
    pub gamma5: f64,
    pub gamma3: f64,
    pub oracle_polynomial: f64,
    pub oracle_sinusoid: f64,
    pub splitstep_order: f64,
    pub splitstep_order_band: f64,
    pub norm_drift: f64,
    pub imaginary_gamma: f64,
    pub residual_order: f64,
    pub residual_order_band: f64,
    pub literal_plateau_min: f64,
    pub series_identity: f64,
    pub series_closed_form: f64,
    pub series_eigen_residual: f64,
    pub phase_stationary: f64,
    pub phase_order_min: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            homomorphism: 1e-8,
            invariance_residual: 1e-6,
            literal_residual_min: 1e-2,
            expectation_drift: 1e-6,
            gamma1_relative: 1e-14,
            gamma5: 1e-12,
            gamma3: 1e-10,
            oracle_polynomial: 1e-8,
            oracle_sinusoid: 1e-6,
            splitstep_order: 2.0,
            splitstep_order_band: 0.2,
            norm_drift: 1e-10,
            imaginary_gamma: 1e-12,
            residual_order: 2.0,
            residual_order_band: 0.2,
            literal_plateau_min: 1e-3,
            series_identity: 1e-13,
            series_closed_form: 1e-10,
            series_eigen_residual: 1e-9,
            phase_stationary: 1e-10,
            phase_order_min: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub physical: PhysicalSpec,
    pub f: Schedule,
    pub time: TimeSpec,
    pub spatial: SpatialSpec,
    pub packet: PacketSpec,
    pub invariant: InvariantSpec,
    pub eigen: EigenSpec,
    pub propagate: PropagateSpec,
    pub output: OutputSpec,
    pub verify: VerifySpec,
    pub tolerances: Tolerances,
}

/// Parses and validates configuration text; JSON if it starts with `{`, TOML otherwise.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let value: serde_json::Value = if text.trim_start().starts_with('{') {
        serde_json::from_str(text).map_err(|e| ConfigError::at("", format!("malformed JSON: {e}")))?
    } else {
        let table: toml::Table = toml::from_str(text).map_err(|e| ConfigError::at("", format!("malformed TOML: {e}")))?;
        serde_json::to_value(table).map_err(|e| ConfigError::at("", e))?
    };
    let config: RunConfig =
        serde_path_to_error::deserialize(value).map_err(|e| ConfigError::at(e.path().to_string(), e.inner()))?;
    config.validate()?;
    Ok(config)
}

fn positive(path: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(ConfigError::at(path, format!("must be finite and positive, got {v}")))
    }
}

fn finite(path: &str, v: Complex64) -> Result<(), ConfigError> {
    if v.re.is_finite() && v.im.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::at(path, "must be finite"))
    }
}

/// Prefixes a core validation error with the section that holds the offending key.
fn located(section: &str, err: Error) -> ConfigError {
    match err {
        Error::InvalidParameter { name, reason } => ConfigError::at(format!("{section}.{name}"), reason),
        other => ConfigError::at(section, other),
    }
}

fn schedule_valid(path: &str, s: &Schedule, t_end: f64) -> Result<(), ConfigError> {
    s.validate().map_err(|e| located(path, e))?;
    if s.t_max() < t_end {
        return Err(ConfigError::at(
            path,
            format!("tabulated range ends at {} before time.t_end = {t_end}", s.t_max()),
        ));
    }
    Ok(())
}

impl RunConfig {
    /// Checks every section against the preconditions of the code that consumes it.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.params()?;
        positive("time.t_end", self.time.t_end)?;
        schedule_valid("f", &self.f, self.time.t_end)?;
        self.spatial_grid()?;
        self.packet_state()?;

        let inv = &self.invariant;
        for (name, v) in [("a", inv.a), ("e", inv.e), ("b0", inv.b0), ("c0", inv.c0), ("d0", inv.d0), ("f0", inv.f0)] {
            finite(&format!("invariant.{name}"), v.0)?;
        }

        let eigen = &self.eigen;
        finite("eigen.lambda", eigen.lambda.0)?;
        for (i, s) in eigen.seeds.iter().enumerate() {
            finite(&format!("eigen.seeds[{i}]"), s.0)?;
        }
        if let Some(order) = eigen.order {
            if order < 8 {
                return Err(ConfigError::at("eigen.order", format!("must be at least 8, got {order}")));
            }
        }
        positive("eigen.half_width", eigen.half_width)?;
        if !(0.0..=self.time.t_end).contains(&eigen.frozen_time) {
            return Err(ConfigError::at(
                "eigen.frozen_time",
                format!("must lie in [0, time.t_end], got {}", eigen.frozen_time),
            ));
        }
        if eigen.samples < 2 {
            return Err(ConfigError::at("eigen.samples", "need at least 2 points"));
        }
        if self.time.n_steps == 0 && eigen.frozen_time != 0.0 {
            return Err(ConfigError::at("eigen.frozen_time", "must be 0 when time.n_steps = 0"));
        }

        if self.propagate.checkpoints == 0 {
            return Err(ConfigError::at("propagate.checkpoints", "must be at least 1"));
        }
        if self.propagate.n_quad < 16 {
            return Err(ConfigError::at("propagate.n_quad", "must be at least 16"));
        }

        let v = &self.verify;
        let t_end = self.time.t_end;
        for (name, s, kind_ok) in [
            ("constant", &v.constant, matches!(v.constant, Schedule::Constant { .. })),
            ("linear", &v.linear, matches!(v.linear, Schedule::Linear { .. })),
            ("sinusoid", &v.sinusoid, matches!(v.sinusoid, Schedule::Sinusoid { .. })),
        ] {
            let path = format!("verify.{name}");
            if !kind_ok {
                return Err(ConfigError::at(format!("{path}.kind"), format!("must be \"{name}\"")));
            }
            schedule_valid(&path, s, t_end)?;
        }
        positive("verify.invariant_dt", v.invariant_dt)?;
        if v.invariant_dt > t_end / 5.0 {
            return Err(ConfigError::at("verify.invariant_dt", "needs at least 5 steps per run"));
        }
        if v.random_pairs == 0 {
            return Err(ConfigError::at("verify.random_pairs", "must be at least 1"));
        }
        SpatialGrid::new(v.homomorphism_n, v.homomorphism_half_width, self.physical.hbar)
            .map_err(|e| located("verify", e))?;
        if v.refinements.len() < 3 {
            return Err(ConfigError::at("verify.refinements", "need at least 3 levels"));
        }
        for (i, pair) in v.refinements.windows(2).enumerate() {
            if pair[0] < 2 || pair[1] != 2 * pair[0] {
                return Err(ConfigError::at(
                    format!("verify.refinements[{}]", i + 1),
                    "levels must double, starting from at least 2 steps",
                ));
            }
        }

        let t = &self.tolerances;
        for (name, value) in [
            ("homomorphism", t.homomorphism),
            ("invariance_residual", t.invariance_residual),
            ("literal_residual_min", t.literal_residual_min),
            ("expectation_drift", t.expectation_drift),
            ("gamma1_relative", t.gamma1_relative),
            ("gamma5", t.gamma5),
            ("gamma3", t.gamma3),
            ("oracle_polynomial", t.oracle_polynomial),
            ("oracle_sinusoid", t.oracle_sinusoid),
            ("splitstep_order", t.splitstep_order),
            ("splitstep_order_band", t.splitstep_order_band),
            ("norm_drift", t.norm_drift),
            ("imaginary_gamma", t.imaginary_gamma),
            ("residual_order", t.residual_order),
            ("residual_order_band", t.residual_order_band),
            ("literal_plateau_min", t.literal_plateau_min),
            ("series_identity", t.series_identity),
            ("series_closed_form", t.series_closed_form),
            ("series_eigen_residual", t.series_eigen_residual),
            ("phase_stationary", t.phase_stationary),
            ("phase_order_min", t.phase_order_min),
        ] {
            positive(&format!("tolerances.{name}"), value)?;
        }
        Ok(())
    }

    pub fn params(&self) -> Result<PhysicalParams, ConfigError> {
        let p = &self.physical;
        PhysicalParams::new(p.m1, p.m2, p.hbar).map_err(|e| located("physical", e))
    }

    /// Scenario time grid; `None` when `time.n_steps = 0`.
    pub fn time_grid(&self) -> Result<Option<TimeGrid>, ConfigError> {
        if self.time.n_steps == 0 {
            return Ok(None);
        }
        TimeGrid::new(self.time.t_end, self.time.n_steps)
            .map(Some)
            .map_err(|e| located("time", e))
    }

    pub fn spatial_grid(&self) -> Result<Arc<SpatialGrid>, ConfigError> {
        let s = &self.spatial;
        SpatialGrid::new(s.n, s.half_width, self.physical.hbar).map_err(|e| located("spatial", e))
    }

    /// The initial Gaussian packet; resolution and edge-leak guards apply.
    pub fn packet_state(&self) -> Result<WaveFunction, ConfigError> {
        let p = &self.packet;
        gaussian_packet(&self.spatial_grid()?, p.x0, p.p0, p.sigma).map_err(|e| located("packet", e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_defaults() {
        let c = parse_config("").unwrap();
        assert_eq!(c, RunConfig::default());
        assert_eq!(c.spatial.n, 1024);
        assert_eq!(c.time.n_steps, 400);
        assert_eq!(c.f, Schedule::Constant { f0: 0.2 });
    }

    #[test]
    fn empty_json_object_gives_defaults() {
        assert_eq!(parse_config("{}").unwrap(), RunConfig::default());
    }

    #[test]
    fn negative_mass_names_its_key() {
        let err = parse_config("[physical]\nm1 = -1.0\n").unwrap_err();
        assert_eq!(err.path, "physical.m1");
        assert!(err.to_string().starts_with("physical.m1:"));
    }

    #[test]
    fn sinusoid_without_omega_names_the_missing_key() {
        let err = parse_config("f = { kind = \"sinusoid\", f0 = 0.5, phi = 0.0 }\n").unwrap_err();
        assert!(err.to_string().contains("omega"), "{err}");
        assert_eq!(err.path, "f");
    }

    #[test]
    fn unknown_keys_are_errors_with_paths() {
        let err = parse_config("[physical]\nm3 = 1.0\n").unwrap_err();
        assert_eq!(err.path, "physical.m3");
        assert!(err.message.contains("m3"), "{err}");
        let err = parse_config("[plotting]\nenabled = true\n").unwrap_err();
        assert!(err.message.contains("plotting"), "{err}");
        let err = parse_config("f = { kind = \"constant\", f0 = 0.1, f1 = 2.0 }\n").unwrap_err();
        assert!(err.message.contains("f1"), "{err}");
    }

    #[test]
    fn type_mismatch_names_the_key() {
        let err = parse_config("[spatial]\nn = \"big\"\n").unwrap_err();
        assert_eq!(err.path, "spatial.n");
    }

    #[test]
    fn schedule_parameters_are_validated_in_place() {
        let err = parse_config("f = { kind = \"sinusoid\", f0 = 0.5, omega = 0.0, phi = 0.0 }\n").unwrap_err();
        assert_eq!(err.path, "f.omega");
        let err = parse_config("[verify]\nrefinements = [100, 300, 400]\n").unwrap_err();
        assert_eq!(err.path, "verify.refinements[1]");
    }

    #[test]
    fn packet_guards_fail_during_validation() {
        let err = parse_config("[packet]\nx0 = 15.0\n").unwrap_err();
        assert_eq!(err.path, "packet.x0");
        let err = parse_config("[spatial]\nn = 1000\n").unwrap_err();
        assert!(err.path.starts_with("spatial"), "{err}");
    }

    #[test]
    fn complex_values_accept_reals_and_pairs() {
        let c = parse_config("[eigen]\nlambda = [1.0, -2.0]\nseeds = [1.0, [0.0, 1.0], 0.5, 0]\n").unwrap();
        assert_eq!(c.eigen.lambda.0, Complex64::new(1.0, -2.0));
        assert_eq!(c.eigen.seeds[1].0, Complex64::new(0.0, 1.0));
        assert_eq!(c.eigen.seeds[3].0, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn method_names_are_the_cli_spellings() {
        let c = parse_config("[propagate]\nmethod = \"paper-literal\"\n").unwrap();
        assert_eq!(c.propagate.method, Method::Printed);
        assert_eq!(c.propagate.method.name(), "paper-literal");
        assert!(parse_config("[propagate]\nmethod = \"rk4\"\n").is_err());
    }

    #[test]
    fn json_and_toml_agree() {
        let toml_text = "f = { kind = \"linear\", f0 = 0.1, f1 = 0.3 }\n[time]\nn_steps = 50\n";
        let json_text = r#"{"f": {"kind": "linear", "f0": 0.1, "f1": 0.3}, "time": {"n_steps": 50}}"#;
        assert_eq!(parse_config(toml_text).unwrap(), parse_config(json_text).unwrap());
    }

    #[test]
    fn zero_steps_is_accepted_without_a_time_grid() {
        let c = parse_config("[time]\nn_steps = 0\n").unwrap();
        assert!(c.time_grid().unwrap().is_none());
    }

    #[test]
    fn defaults_round_trip_through_json() {
        let c = RunConfig::default();
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(parse_config(&text).unwrap(), c);
    }
}
