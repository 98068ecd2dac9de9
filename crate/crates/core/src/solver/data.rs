use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::norms::sobolev_norm;
use crate::spectral::{fft_nd, DerivativeAxes, Direction, Field, Flavor, GridAxis, TorusGrid};

/// A random superposition of Gaussian wave packets
/// `a_k exp(-|z - c_k|^2 / (2 w^2)) e^{i kappa_k . z}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PacketSpec {
    pub count: usize,
    pub width: f64,
    /// Packet wave vectors are drawn uniformly from this ball.
    pub max_wavenumber: f64,
    /// Centers are drawn uniformly from `[-spread, spread]^N`.
    pub center_spread: f64,
    /// Target `L^2` norm of the sum.
    pub amplitude: f64,
}

impl Default for PacketSpec {
    fn default() -> Self {
        PacketSpec { count: 4, width: 1.0, max_wavenumber: 1.5, center_spread: 1.0, amplitude: 1.0 }
    }
}

pub fn wave_packets(grid: &Arc<TorusGrid>, spec: &PacketSpec, rng: &mut impl Rng) -> Result<Field> {
    if spec.count == 0 || !(spec.width > 0.0) || !(spec.amplitude >= 0.0) {
        return invalid("packet spec needs count >= 1, width > 0 and amplitude >= 0");
    }
    let dim = grid.dim();
    let packets: Vec<(Complex64, Vec<f64>, Vec<f64>)> = (0..spec.count)
        .map(|_| {
            let a = Complex64::from_polar(rng.random_range(0.5..1.0), rng.random_range(0.0..2.0 * PI));
            let c: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..=1.0) * spec.center_spread).collect();
            let kappa = loop {
                let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..=1.0)).collect();
                if v.iter().map(|x| x * x).sum::<f64>() <= 1.0 {
                    break v.into_iter().map(|x| x * spec.max_wavenumber).collect::<Vec<f64>>();
                }
            };
            (a, c, kappa)
        })
        .collect();
    let inv = 0.5 / (spec.width * spec.width);
    let f = Field::from_fn(grid.clone(), |z| {
        packets
            .iter()
            .map(|(a, c, k)| {
                let r2: f64 = z.iter().zip(c).map(|(z, c)| (z - c).powi(2)).sum();
                let ph: f64 = z.iter().zip(k).map(|(z, k)| z * k).sum();
                a * Complex64::from_polar((-r2 * inv).exp(), ph)
            })
            .sum()
    });
    let n = f.l2_norm();
    if n == 0.0 {
        return Ok(f);
    }
    Ok(f.scaled(Complex64::new(spec.amplitude / n, 0.0)))
}

/// Rough-in-x, smooth-in-y tensor product datum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoughProfile {
    /// `eps` in the spectral decay `<xi>^{-(d/2 + eps)}` of the x-factor.
    pub rough_x_exponent: f64,
    /// Width `w` of the Gaussian `exp(-|y|^2 / (2 w^2))`.
    pub y_width: f64,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormPair {
    pub base: f64,
    pub doubled: f64,
}

impl NormPair {
    pub fn ratio(&self) -> f64 {
        self.doubled / self.base
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoughDiagnostics {
    pub phi1_l2: NormPair,
    pub phi1_hs: NormPair,
    /// `||f||_{L^2_x H^s_y}`.
    pub partial_norm: NormPair,
    /// `||f||_{H^s}` over all axes.
    pub full_norm: NormPair,
    /// Asymptotic growth `2^{s - eps}` of `||phi1||_{H^s}` per doubling.
    pub expected_hs_growth: f64,
}

const MODE_OFFSET: i64 = 1 << 20;

/// Deterministic phase for the x-mode `m`, shared by every grid resolution.
fn mode_phase(seed: u64, m: &[i64]) -> f64 {
    let key = m
        .iter()
        .enumerate()
        .fold(0u64, |k, (a, &mi)| k | (((mi + MODE_OFFSET) as u64) << (21 * a)));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(key);
    rng.random_range(0.0..2.0 * PI)
}

fn x_factor(grid: &TorusGrid, profile: &RoughProfile) -> (Arc<TorusGrid>, Field) {
    let xd = grid.x_dim();
    let axes: Vec<GridAxis> = grid.axes()[..xd].to_vec();
    let xgrid = Arc::new(TorusGrid::new(axes, xd).expect("x axes valid"));
    let shape = xgrid.shape();
    let power = -(0.5 * xd as f64 + profile.rough_x_exponent);
    let volume = xgrid.volume();
    let scale = (xgrid.len() as f64).sqrt() / volume;
    let mut coeffs = vec![Complex64::default(); xgrid.len()];
    let mut m = vec![0i64; xd];
    xgrid.for_each_index(|flat, idx| {
        let mut xi2 = 0.0;
        let mut nyquist = false;
        let mut parity = 0i64;
        for (a, &i) in idx.iter().enumerate() {
            m[a] = xgrid.mode(a, i);
            nyquist |= m[a] == -(shape[a] as i64) / 2;
            parity += m[a];
            xi2 += xgrid.wavenumber(a, i).powi(2);
        }
        if nyquist {
            return;
        }
        let sign = if parity.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        let amp = sign * scale * (1.0 + xi2).powf(0.5 * power);
        coeffs[flat] = Complex64::from_polar(amp, mode_phase(profile.seed, &m));
    });
    fft_nd(&mut coeffs, &shape, Direction::Inverse);
    let phi1 = Field::from_samples(xgrid.clone(), coeffs).expect("shape");
    (xgrid, phi1)
}

/// `f = phi1(x) phi2(y)` with `phi1` synthesized from Fourier-series
/// coefficients `<xi>^{-(d/2+eps)} e^{i theta_m}` (the same coefficients on
/// every resolution, Nyquist modes dropped) and `phi2` a Gaussian.
pub fn rough_tensor_field(grid: &Arc<TorusGrid>, profile: &RoughProfile) -> Result<(Field, Field)> {
    if grid.x_dim() == 0 {
        return invalid("rough data needs at least one x axis");
    }
    if !(profile.y_width > 0.0) {
        return invalid("y width must be positive");
    }
    let (_, phi1) = x_factor(grid, profile);
    let yl = grid.y_len();
    let xd = grid.x_dim();
    let inv = 0.5 / (profile.y_width * profile.y_width);
    let mut phi2 = vec![0.0; yl];
    let mut idx = vec![0usize; grid.split()];
    for (flat, slot) in phi2.iter_mut().enumerate() {
        let mut rem = flat;
        for a in (0..grid.split()).rev() {
            let n = grid.axes()[xd + a].points;
            idx[a] = rem % n;
            rem /= n;
        }
        let r2: f64 = idx.iter().enumerate().map(|(a, &i)| grid.coordinate(xd + a, i).powi(2)).sum();
        *slot = (-r2 * inv).exp();
    }
    let samples = phi1
        .samples()
        .iter()
        .flat_map(|&a| phi2.iter().map(move |&b| a * b))
        .collect();
    Ok((Field::from_samples(grid.clone(), samples)?, phi1))
}

/// Build the rough datum on `grid` and compare its norms with the same
/// construction on the grid with doubled resolution.
pub fn rough_data_builder(profile: &RoughProfile, grid: &Arc<TorusGrid>, s: f64) -> Result<(Field, RoughDiagnostics)> {
    let (f, phi1) = rough_tensor_field(grid, profile)?;
    let fine_grid = Arc::new(grid.refined()?);
    let (f2, phi1_2) = rough_tensor_field(&fine_grid, profile)?;
    let pair = |a: f64, b: f64| NormPair { base: a, doubled: b };
    let hs = |g: &Field, axes| sobolev_norm(g, s, Flavor::Inhomogeneous, axes);
    let diag = RoughDiagnostics {
        phi1_l2: pair(phi1.l2_norm(), phi1_2.l2_norm()),
        phi1_hs: pair(hs(&phi1, DerivativeAxes::All), hs(&phi1_2, DerivativeAxes::All)),
        partial_norm: pair(hs(&f, DerivativeAxes::YOnly), hs(&f2, DerivativeAxes::YOnly)),
        full_norm: pair(hs(&f, DerivativeAxes::All), hs(&f2, DerivativeAxes::All)),
        expected_hs_growth: 2f64.powf(s - profile.rough_x_exponent),
    };
    Ok((f, diag))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn packets_are_normalized_and_seeded() {
        let g = Arc::new(TorusGrid::cube(2, 16.0, 32, 1).unwrap());
        let spec = PacketSpec { amplitude: 0.3, ..Default::default() };
        let a = wave_packets(&g, &spec, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        let b = wave_packets(&g, &spec, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        assert!((a.l2_norm() - 0.3).abs() < 1e-12);
        assert_eq!(a.samples(), b.samples());
    }

    #[test]
    fn mode_phases_are_resolution_independent() {
        assert_eq!(mode_phase(3, &[5, -2]), mode_phase(3, &[5, -2]));
        assert_ne!(mode_phase(3, &[5, -2]), mode_phase(3, &[-2, 5]));
        assert_ne!(mode_phase(3, &[5, -2]), mode_phase(4, &[5, -2]));
    }
}
