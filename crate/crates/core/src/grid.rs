//! Periodic spatial grid, unitary position/momentum transforms, and the
//! spectral action of algebra elements on sampled states.
//!
//! Position samples sit at `x_j = -L + j dx`. The momentum amplitude is the
//! Riemann sum of the continuum transform,
//! `psi~(p_k) = dx / sqrt(2 pi hbar) * sum_j psi(x_j) exp(-i p_k x_j / hbar)`,
//! so a packet with mean momentum `p0 > 0` peaks at `p_k = +p0`.

use std::fmt;
use std::io::{Read, Write};
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::algebra::AlgebraElement;
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Representation {
    Position,
    Momentum,
}

impl Representation {
    pub fn name(self) -> &'static str {
        match self {
            Representation::Position => "position",
            Representation::Momentum => "momentum",
        }
    }

    fn flag(self) -> u32 {
        match self {
            Representation::Position => 0,
            Representation::Momentum => 1,
        }
    }
}

/// Uniform periodic grid on `[-L, L)` with its conjugate momentum grid.
pub struct SpatialGrid {
    n: usize,
    half_width: f64,
    hbar: f64,
    x: Vec<f64>,
    /// FFT order: `k = 0, 1, .., n/2 - 1, -n/2, .., -1`.
    p: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for SpatialGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpatialGrid")
            .field("n", &self.n)
            .field("half_width", &self.half_width)
            .field("hbar", &self.hbar)
            .finish()
    }
}

impl PartialEq for SpatialGrid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.half_width == other.half_width && self.hbar == other.hbar
    }
}

impl SpatialGrid {
    pub fn new(n: usize, half_width: f64, hbar: f64) -> Result<Arc<Self>> {
        if n < 64 || !n.is_power_of_two() {
            return Err(invalid("n", format!("must be a power of two >= 64, got {n}")));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(invalid("half_width", "must be finite and positive"));
        }
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(invalid("hbar", "must be finite and positive"));
        }
        let dx = 2.0 * half_width / n as f64;
        let x = (0..n).map(|j| -half_width + j as f64 * dx).collect();
        let dp = std::f64::consts::PI * hbar / half_width;
        let p = (0..n)
            .map(|k| {
                let signed = if k < n / 2 { k as f64 } else { k as f64 - n as f64 };
                signed * dp
            })
            .collect();
        let mut planner = FftPlanner::new();
        Ok(Arc::new(Self {
            n,
            half_width,
            hbar,
            x,
            p,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    pub fn dp(&self) -> f64 {
        std::f64::consts::PI * self.hbar / self.half_width
    }

    pub fn positions(&self) -> &[f64] {
        &self.x
    }

    /// Momentum samples in FFT order.
    pub fn momenta(&self) -> &[f64] {
        &self.p
    }

    pub fn p_max(&self) -> f64 {
        self.n as f64 / 2.0 * self.dp()
    }
}

/// Complex samples of a state on a [`SpatialGrid`].
#[derive(Debug, Clone)]
pub struct WaveFunction {
    samples: Vec<Complex64>,
    repr: Representation,
    grid: Arc<SpatialGrid>,
}

impl PartialEq for WaveFunction {
    fn eq(&self, other: &Self) -> bool {
        self.repr == other.repr && *self.grid == *other.grid && self.samples == other.samples
    }
}

impl WaveFunction {
    pub fn new(grid: Arc<SpatialGrid>, samples: Vec<Complex64>, repr: Representation) -> Result<Self> {
        if samples.len() != grid.n {
            return Err(Error::LengthMismatch {
                what: "samples vs grid points",
                left: samples.len(),
                right: grid.n,
            });
        }
        Ok(Self { samples, repr, grid })
    }

    pub fn from_fn(grid: Arc<SpatialGrid>, f: impl Fn(f64) -> Complex64) -> Self {
        let samples = grid.x.iter().map(|&x| f(x)).collect();
        Self {
            samples,
            repr: Representation::Position,
            grid,
        }
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn representation(&self) -> Representation {
        self.repr
    }

    pub fn grid(&self) -> &Arc<SpatialGrid> {
        &self.grid
    }

    fn measure(&self) -> f64 {
        match self.repr {
            Representation::Position => self.grid.dx(),
            Representation::Momentum => self.grid.dp(),
        }
    }

    /// Switches representation with the unitary transform pair.
    pub fn transform(&self) -> WaveFunction {
        let g = &self.grid;
        let mut buf = self.samples.clone();
        let (repr, scale) = match self.repr {
            Representation::Position => {
                g.forward.process(&mut buf);
                (Representation::Momentum, g.dx() / (2.0 * std::f64::consts::PI * g.hbar).sqrt())
            }
            Representation::Momentum => {
                for (k, v) in buf.iter_mut().enumerate() {
                    if k % 2 == 1 {
                        *v = -*v;
                    }
                }
                g.inverse.process(&mut buf);
                (Representation::Position, g.dp() / (2.0 * std::f64::consts::PI * g.hbar).sqrt())
            }
        };
        for (k, v) in buf.iter_mut().enumerate() {
            // exp(i p_k L / hbar) = (-1)^k on the forward leg
            let sign = if repr == Representation::Momentum && k % 2 == 1 { -1.0 } else { 1.0 };
            *v *= scale * sign;
        }
        WaveFunction {
            samples: buf,
            repr,
            grid: Arc::clone(&self.grid),
        }
    }

    pub fn to_representation(&self, repr: Representation) -> WaveFunction {
        if self.repr == repr {
            self.clone()
        } else {
            self.transform()
        }
    }

    pub fn to_position(&self) -> WaveFunction {
        self.to_representation(Representation::Position)
    }

    pub fn to_momentum(&self) -> WaveFunction {
        self.to_representation(Representation::Momentum)
    }

    pub fn require(&self, repr: Representation) -> Result<()> {
        if self.repr == repr {
            Ok(())
        } else {
            Err(Error::RepresentationMismatch {
                expected: repr.name(),
                got: self.repr.name(),
            })
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.samples.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.measure()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalized(&self) -> Result<WaveFunction> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::VanishingNorm { index: 0 });
        }
        Ok(self.scaled(Complex64::new(1.0 / n, 0.0)))
    }

    pub fn scaled(&self, c: Complex64) -> WaveFunction {
        self.map_samples(|_, v| c * v)
    }

    /// Applies `f(coordinate, value)` where the coordinate is `x_j` or `p_k`
    /// according to the current representation.
    pub fn map_samples(&self, f: impl Fn(f64, Complex64) -> Complex64) -> WaveFunction {
        let coords = match self.repr {
            Representation::Position => &self.grid.x,
            Representation::Momentum => &self.grid.p,
        };
        let samples = coords.iter().zip(&self.samples).map(|(&c, &v)| f(c, v)).collect();
        WaveFunction {
            samples,
            repr: self.repr,
            grid: Arc::clone(&self.grid),
        }
    }

    /// Pointwise multiplication by `g(x)` in position space, returned in position space.
    pub fn multiply_position(&self, g: impl Fn(f64) -> Complex64) -> WaveFunction {
        self.to_position().map_samples(|x, v| g(x) * v)
    }

    /// Pointwise multiplication by `g(p)` in momentum space, returned in momentum space.
    pub fn multiply_momentum(&self, g: impl Fn(f64) -> Complex64) -> WaveFunction {
        self.to_momentum().map_samples(|p, v| g(p) * v)
    }

    pub fn add(&self, other: &WaveFunction) -> Result<WaveFunction> {
        if *self.grid != *other.grid {
            return Err(Error::GridMismatch);
        }
        let other = other.to_representation(self.repr);
        let samples = self.samples.iter().zip(&other.samples).map(|(a, b)| a + b).collect();
        Ok(WaveFunction {
            samples,
            repr: self.repr,
            grid: Arc::clone(&self.grid),
        })
    }

    pub fn sub(&self, other: &WaveFunction) -> Result<WaveFunction> {
        self.add(&other.scaled(Complex64::new(-1.0, 0.0)))
    }

    /// CSV rows `x, re, im, |psi|^2` in position space.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let pos = self.to_position();
        writeln!(out, "x,re,im,density")?;
        for (x, v) in pos.grid.x.iter().zip(&pos.samples) {
            writeln!(out, "{},{},{},{}", x, v.re, v.im, v.norm_sqr())?;
        }
        Ok(())
    }

    /// Binary dump: `SSEQPSI1`, `u32` point count, `u32` representation flag
    /// (0 position, 1 momentum), then little-endian `f64` pairs `re, im`.
    pub fn write_binary<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        out.write_all(MAGIC)?;
        out.write_all(&(self.samples.len() as u32).to_le_bytes())?;
        out.write_all(&self.repr.flag().to_le_bytes())?;
        for v in &self.samples {
            out.write_all(&v.re.to_le_bytes())?;
            out.write_all(&v.im.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(grid: Arc<SpatialGrid>, mut input: R) -> std::io::Result<WaveFunction> {
        use std::io::{Error as IoError, ErrorKind};
        let mut header = [0u8; 16];
        input.read_exact(&mut header)?;
        if &header[..8] != MAGIC {
            return Err(IoError::new(ErrorKind::InvalidData, "bad magic"));
        }
        let n = u32::from_le_bytes(header[8..12].try_into().expect("4 bytes")) as usize;
        let repr = match u32::from_le_bytes(header[12..16].try_into().expect("4 bytes")) {
            0 => Representation::Position,
            1 => Representation::Momentum,
            other => {
                return Err(IoError::new(ErrorKind::InvalidData, format!("bad representation flag {other}")))
            }
        };
        if n != grid.n {
            return Err(IoError::new(ErrorKind::InvalidData, "point count does not match grid"));
        }
        let mut samples = Vec::with_capacity(n);
        let mut pair = [0u8; 16];
        for _ in 0..n {
            input.read_exact(&mut pair)?;
            let re = f64::from_le_bytes(pair[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(pair[8..].try_into().expect("8 bytes"));
            samples.push(Complex64::new(re, im));
        }
        Ok(WaveFunction { samples, repr, grid })
    }
}

const MAGIC: &[u8; 8] = b"SSEQPSI1";

/// Normalized `exp(-(x - x0)^2 / 4 sigma^2 + i p0 x / hbar)`.
pub fn gaussian_packet(grid: &Arc<SpatialGrid>, x0: f64, p0: f64, sigma: f64) -> Result<WaveFunction> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(invalid("sigma", "must be finite and positive"));
    }
    if grid.dx() > sigma / 4.0 {
        return Err(invalid(
            "sigma",
            format!("unresolved: dx = {} exceeds sigma / 4 = {}", grid.dx(), sigma / 4.0),
        ));
    }
    let edge = grid.half_width - x0.abs();
    let leak = (-edge.max(0.0).powi(2) / (4.0 * sigma * sigma)).exp();
    if edge <= 0.0 || leak >= 1e-12 {
        return Err(invalid("x0", format!("packet leaks to the boundary (relative amplitude {leak:e})")));
    }
    let momentum_sigma = grid.hbar / (2.0 * sigma);
    let p_edge = grid.p_max() - p0.abs();
    let p_leak = (-p_edge.max(0.0).powi(2) / (4.0 * momentum_sigma * momentum_sigma)).exp();
    if p_edge <= 0.0 || p_leak >= 1e-12 {
        return Err(invalid("p0", format!("packet leaks past the momentum cutoff (relative amplitude {p_leak:e})")));
    }
    let hbar = grid.hbar;
    let psi = WaveFunction::from_fn(Arc::clone(grid), |x| {
        let d = x - x0;
        Complex64::from_polar((-d * d / (4.0 * sigma * sigma)).exp(), p0 * x / hbar)
    });
    psi.normalized()
}

/// Unit-norm plane wave sitting on momentum sample `k` (FFT order).
pub fn momentum_eigenstate(grid: &Arc<SpatialGrid>, k: usize) -> Result<WaveFunction> {
    let mut samples = vec![Complex64::new(0.0, 0.0); grid.n];
    *samples
        .get_mut(k)
        .ok_or_else(|| invalid("k", format!("index {k} outside the grid")))? = Complex64::new(1.0, 0.0);
    WaveFunction::new(Arc::clone(grid), samples, Representation::Momentum)?.normalized()
}

/// `e psi`, returned in the representation of `psi`.
pub fn apply_element(e: &AlgebraElement, psi: &WaveFunction) -> WaveFunction {
    let zero = Complex64::new(0.0, 0.0);
    let local = psi
        .to_position()
        .map_samples(|x, v| (e.c0 + e.cx * x) * v);
    let out = if e.cp.iter().any(|&c| c != zero) {
        let kinetic = psi.to_momentum().map_samples(|p, v| {
            let poly = ((e.cp[3] * p + e.cp[2]) * p + e.cp[1]) * p + e.cp[0];
            poly * p * v
        });
        local.add(&kinetic).expect("same grid")
    } else {
        local
    };
    out.to_representation(psi.repr)
}

/// `<a|b>`, with `b` brought into the representation of `a`.
pub fn inner_product(a: &WaveFunction, b: &WaveFunction) -> Result<Complex64> {
    if *a.grid != *b.grid {
        return Err(Error::GridMismatch);
    }
    let b = b.to_representation(a.repr);
    let sum: Complex64 = a.samples.iter().zip(&b.samples).map(|(u, v)| u.conj() * v).sum();
    Ok(sum * a.measure())
}

/// `<psi|e psi> / <psi|psi>`.
pub fn expectation(e: &AlgebraElement, psi: &WaveFunction) -> Result<Complex64> {
    let norm = psi.norm_sqr();
    if norm == 0.0 {
        return Err(Error::VanishingNorm { index: 0 });
    }
    Ok(inner_product(psi, &apply_element(e, psi))? / norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::PhysicalParams;
    use rand::{Rng, SeedableRng};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn default_grid() -> Arc<SpatialGrid> {
        SpatialGrid::new(1024, 16.0, 1.0).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(SpatialGrid::new(100, 16.0, 1.0).is_err());
        assert!(SpatialGrid::new(32, 16.0, 1.0).is_err());
        assert!(SpatialGrid::new(64, 0.0, 1.0).is_err());
        let g = SpatialGrid::new(256, 8.0, 0.7).unwrap();
        assert!((g.dx() * g.dp() - 2.0 * std::f64::consts::PI * 0.7 / 256.0).abs() < 1e-15);
        assert_eq!(g.momenta()[128], -g.p_max());
    }

    #[test]
    fn constant_maps_to_zero_mode() {
        let g = SpatialGrid::new(64, 4.0, 1.0).unwrap();
        let psi = WaveFunction::from_fn(Arc::clone(&g), |_| c(1.0, 0.0));
        let m = psi.transform();
        assert!(m.samples()[0].norm() > 1.0);
        for v in &m.samples()[1..] {
            assert!(v.norm() < 1e-13);
        }
    }

    #[test]
    fn gaussian_fourier_pair() {
        let g = default_grid();
        let sigma = 1.0;
        let psi = gaussian_packet(&g, 0.0, 0.0, sigma).unwrap();
        let m = psi.to_momentum();
        // (2 pi sigma^2)^(-1/4) e^{-x^2/4s^2}  <->  (2 sigma^2 / pi hbar^2)^(1/4) e^{-sigma^2 p^2 / hbar^2}
        let amp = (2.0 * sigma * sigma / std::f64::consts::PI).powf(0.25);
        for (&p, v) in g.momenta().iter().zip(m.samples()) {
            let want = amp * (-sigma * sigma * p * p).exp();
            assert!((v - want).norm() < 1e-8 * amp, "p = {p}");
        }
    }

    #[test]
    fn translated_packet_pins_sign_convention() {
        let g = default_grid();
        let psi = gaussian_packet(&g, -3.0, 2.0, 1.0).unwrap().to_momentum();
        let (k, _) = psi
            .samples()
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .unwrap();
        assert!((g.momenta()[k] - 2.0).abs() <= g.dp());
        // a translated packet acquires phase exp(-i p x0 / hbar) relative to the centered one
        let centered = gaussian_packet(&g, 0.0, 0.0, 1.0).unwrap().to_momentum();
        let moved = gaussian_packet(&g, -3.0, 0.0, 1.0).unwrap().to_momentum();
        for (i, &p) in g.momenta().iter().enumerate() {
            let want = centered.samples()[i] * Complex64::from_polar(1.0, 3.0 * p);
            assert!((moved.samples()[i] - want).norm() < 1e-12);
        }
        // multiplying by exp(-i F x / hbar) moves momentum down by F
        let shifted = gaussian_packet(&g, 0.0, 2.0, 1.0)
            .unwrap()
            .multiply_position(|x| Complex64::from_polar(1.0, -0.5 * x));
        let p_mean = expectation(&AlgebraElement::p_power(1, c(1.0, 0.0)), &shifted).unwrap();
        assert!((p_mean.re - 1.5).abs() < 1e-9);
    }

    #[test]
    fn transform_round_trip_and_parseval() {
        let g = SpatialGrid::new(256, 8.0, 1.3).unwrap();
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for _ in 0..100 {
            let samples: Vec<Complex64> = (0..256).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            let psi = WaveFunction::new(Arc::clone(&g), samples, Representation::Position).unwrap();
            let m = psi.transform();
            assert!((m.norm() - psi.norm()).abs() < 1e-13 * psi.norm());
            let back = m.transform();
            let diff = back.sub(&psi).unwrap().norm();
            assert!(diff < 1e-13 * psi.norm());
        }
    }

    #[test]
    fn packet_moments() {
        let g = default_grid();
        let (x0, p0, sigma) = (-4.0, 1.0, 1.0);
        let psi = gaussian_packet(&g, x0, p0, sigma).unwrap();
        assert!((psi.norm() - 1.0).abs() < 1e-12);
        assert!((inner_product(&psi, &psi).unwrap() - 1.0).norm() < 1e-12);
        let x = expectation(&AlgebraElement::x(c(1.0, 0.0)), &psi).unwrap();
        let p = expectation(&AlgebraElement::p_power(1, c(1.0, 0.0)), &psi).unwrap();
        let p2 = expectation(&AlgebraElement::p_power(2, c(1.0, 0.0)), &psi).unwrap();
        assert!((x.re - x0).abs() < 1e-9 && x.im.abs() < 1e-10);
        assert!((p.re - p0).abs() < 1e-9);
        assert!((p2.re - p.re * p.re - 1.0 / (4.0 * sigma * sigma)).abs() < 1e-8);
    }

    #[test]
    fn packet_guards() {
        let g = default_grid();
        assert!(gaussian_packet(&g, 0.0, 0.0, 0.1).is_err());
        assert!(gaussian_packet(&g, 12.0, 0.0, 1.0).is_err());
        assert!(gaussian_packet(&g, 0.0, 99.0, 1.0).is_err());
    }

    #[test]
    fn identity_and_plane_wave() {
        let g = default_grid();
        let psi = gaussian_packet(&g, 1.0, -0.5, 1.2).unwrap();
        let same = apply_element(&AlgebraElement::identity(c(1.0, 0.0)), &psi);
        assert!(same.sub(&psi).unwrap().norm() < 1e-15);

        let k = 5;
        let wave = momentum_eigenstate(&g, k).unwrap();
        let out = apply_element(&AlgebraElement::p_power(2, c(1.0, 0.0)), &wave);
        let pk = g.momenta()[k];
        let want = wave.scaled(c(pk * pk, 0.0));
        assert!(out.sub(&want).unwrap().norm() < 1e-12);
    }

    #[test]
    fn hamiltonian_expectation_matches_gaussian_moments() {
        let g = default_grid();
        let params = PhysicalParams::default();
        let (x0, p0, sigma) = (-4.0, 1.0, 1.0);
        let psi = gaussian_packet(&g, x0, p0, sigma).unwrap();
        let f = 0.2;
        let got = expectation(&params.hamiltonian(f), &psi).unwrap();
        let s2 = 1.0 / (4.0 * sigma * sigma);
        let p2 = p0 * p0 + s2;
        let p4 = p0.powi(4) + 6.0 * p0 * p0 * s2 + 3.0 * s2 * s2;
        let want = params.quartic() * p4 + params.quadratic() * p2 + f * x0;
        assert!((got.re - want).abs() < 1e-7);
        assert!(got.im.abs() < 1e-10);
    }

    #[test]
    fn apply_is_linear() {
        let g = SpatialGrid::new(256, 12.0, 1.0).unwrap();
        let a = gaussian_packet(&g, -1.0, 0.5, 0.6).unwrap();
        let b = gaussian_packet(&g, 2.0, -0.3, 0.4).unwrap();
        let e1 = AlgebraElement::x(c(0.5, 0.1)) + AlgebraElement::p_power(3, c(-0.2, 0.0));
        let e2 = AlgebraElement::p_power(4, c(0.05, 0.0)) + AlgebraElement::identity(c(1.0, -1.0));
        let sum = apply_element(&(e1 + e2), &a);
        let split = apply_element(&e1, &a).add(&apply_element(&e2, &a)).unwrap();
        assert!(sum.sub(&split).unwrap().norm() < 1e-12);
        let both = apply_element(&e1, &a.add(&b).unwrap());
        let each = apply_element(&e1, &a).add(&apply_element(&e1, &b)).unwrap();
        // p^3 lifts FFT rounding at the momentum cutoff
        assert!(both.sub(&each).unwrap().norm() < 1e-11 * both.norm());
    }

    #[test]
    fn binary_dump_round_trip() {
        let g = SpatialGrid::new(128, 4.0, 1.0).unwrap();
        let psi = gaussian_packet(&g, 0.0, 0.5, 0.3).unwrap().to_momentum();
        let mut bytes = Vec::new();
        psi.write_binary(&mut bytes).unwrap();
        assert_eq!(&bytes[..8], b"SSEQPSI1");
        assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 128);
        assert_eq!(u32::from_le_bytes(bytes[12..16].try_into().unwrap()), 1);
        assert_eq!(bytes.len(), 16 + 128 * 16);
        assert_eq!(f64::from_le_bytes(bytes[16..24].try_into().unwrap()), psi.samples()[0].re);
        let back = WaveFunction::read_binary(Arc::clone(&g), bytes.as_slice()).unwrap();
        assert_eq!(back, psi);
    }

    #[test]
    fn grid_mismatch() {
        let a = gaussian_packet(&SpatialGrid::new(256, 8.0, 1.0).unwrap(), 0.0, 0.0, 0.5).unwrap();
        let b = gaussian_packet(&SpatialGrid::new(512, 8.0, 1.0).unwrap(), 0.0, 0.0, 0.5).unwrap();
        assert_eq!(inner_product(&a, &b), Err(Error::GridMismatch));
    }
}
