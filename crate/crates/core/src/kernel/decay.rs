use serde::{Deserialize, Serialize};

use super::value::{kernel_radial_unchecked, kernel_value_radial, l2_eta_aggregate, l2_eta_unchecked};
use crate::error::{invalid, Result};
use crate::exponents::{dispersive_beta, rational_to_f64, ExtRational, FlowOrder};
use crate::spectral::SpectralCutoff;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormMode {
    /// `sup_{x,y} |K(x, y, t)|`.
    SupXy,
    /// `sup_x (int |K~(x, eta, t)|^2 d eta)^{1/2}`.
    SupXL2Eta,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecaySample {
    pub t: f64,
    pub value: f64,
    /// Probe radius where the supremum was attained.
    pub argmax: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFitReport {
    pub norm_mode: NormMode,
    pub sigma: i64,
    pub n: u32,
    pub k: u32,
    pub fitted_slope: f64,
    pub predicted_beta: f64,
    pub t_range: (f64, f64),
    /// Root-mean-square residual of the log-log fit.
    pub residual: f64,
    /// Smallest `C` with `value(t) <= C (1 + t)^{-beta}` on the samples.
    pub bound_constant: f64,
    pub samples: Vec<DecaySample>,
}

impl DecayFitReport {
    pub fn slope_error(&self) -> f64 {
        (self.fitted_slope + self.predicted_beta).abs()
    }
}

/// `count` logarithmically spaced points from `a` to `b` inclusive.
pub fn log_spaced(a: f64, b: f64, count: usize) -> Vec<f64> {
    assert!(a > 0.0 && b > a && count >= 2);
    let (la, lb) = (a.ln(), b.ln());
    (0..count)
        .map(|i| (la + (lb - la) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

/// Least-squares slope and RMS residual of `y` against `x`.
pub fn least_squares_slope(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let rms = (x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - my - slope * (a - mx)).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    (slope, rms)
}

/// Maximize `f` over `[0, rho_max]`: uniform scan then golden-section
/// refinement around the best scan point.
fn scan_max(rho_max: f64, points: usize, f: impl Fn(f64) -> f64) -> (f64, f64) {
    let h = rho_max / points as f64;
    let (mut best_i, mut best_v) = (0usize, f64::MIN);
    for i in 0..=points {
        let v = f(i as f64 * h);
        if v > best_v {
            best_i = i;
            best_v = v;
        }
    }
    let mut a = (best_i as f64 - 1.0).max(0.0) * h;
    let mut b = (best_i as f64 + 1.0) * h;
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..40 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let (rho, v) = if fc > fd { (c, fc) } else { (d, fd) };
    if v >= best_v {
        (rho, v)
    } else {
        (best_i as f64 * h, best_v)
    }
}

/// Fit the decay of the kernel norm in `t`.
///
/// Probes are radii `|z|` (the kernels are radial) on `[0, v t + 8]`, where
/// `v` bounds the group velocity on the annulus, so the dispersive front is
/// always inside the probe set. The supremum found by the scan is then
/// re-evaluated with a refinement check.
pub fn decay_fit(
    flow: FlowOrder,
    n: u32,
    k: u32,
    mode: NormMode,
    t_grid: &[f64],
    cutoff: &SpectralCutoff,
) -> Result<DecayFitReport> {
    if t_grid.len() < 2 || t_grid.iter().any(|&t| !(t > 0.0)) || t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return invalid("t grid must be positive, increasing, with at least two points");
    }
    if k < 1 || k >= n {
        return invalid(format!("need 1 <= k < N, got N = {n}, k = {k}"));
    }
    let inf = ExtRational::Infinite;
    let beta = match mode {
        NormMode::SupXy => dispersive_beta(n, k, flow, inf, inf)?,
        NormMode::SupXL2Eta => dispersive_beta(n, k, flow, inf, ExtRational::integer(2))?,
    };
    let beta = rational_to_f64(&beta);
    let speed = match flow {
        FlowOrder::Schrodinger => 4.0,
        FlowOrder::Wave => 1.0,
    };
    let (nd, xd, yd) = (n as usize, (n - k) as usize, k as usize);
    let mut samples = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let rho_max = speed * t + 8.0;
        let sample = match mode {
            NormMode::SupXy => {
                let points = ((rho_max / 0.25).ceil() as usize).max(64);
                let (rho, _) = scan_max(rho_max, points, |r| {
                    kernel_radial_unchecked(nd, r, t, flow, cutoff, 1).norm()
                });
                let value = kernel_value_radial(nd, rho, t, flow, cutoff)?.norm();
                DecaySample { t, value, argmax: rho }
            }
            NormMode::SupXL2Eta => {
                let (rho, _) = scan_max(rho_max, 48, |r| l2_eta_unchecked(xd, yd, r, t, flow, cutoff, 16, 1));
                let value = l2_eta_aggregate(xd, yd, rho, t, flow, cutoff)?;
                DecaySample { t, value, argmax: rho }
            }
        };
        samples.push(sample);
    }
    let lx: Vec<f64> = samples.iter().map(|s| s.t.ln()).collect();
    let ly: Vec<f64> = samples.iter().map(|s| s.value.ln()).collect();
    let (slope, residual) = least_squares_slope(&lx, &ly);
    let bound_constant = samples
        .iter()
        .map(|s| s.value * (1.0 + s.t).powf(beta))
        .fold(0.0, f64::max);
    Ok(DecayFitReport {
        norm_mode: mode,
        sigma: flow.sigma(),
        n,
        k,
        fitted_slope: slope,
        predicted_beta: beta,
        t_range: (t_grid[0], *t_grid.last().unwrap()),
        residual,
        bound_constant,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_exact_power_law() {
        let t = log_spaced(1.0, 100.0, 9);
        let x: Vec<f64> = t.iter().map(|v| v.ln()).collect();
        let y: Vec<f64> = t.iter().map(|v| (3.0 * v.powf(-1.25)).ln()).collect();
        let (s, r) = least_squares_slope(&x, &y);
        assert!((s + 1.25).abs() < 1e-12 && r < 1e-12);
    }

    #[test]
    fn scan_max_finds_interior_peak() {
        let (x, v) = scan_max(10.0, 20, |r| -(r - 3.3).powi(2));
        assert!((x - 3.3).abs() < 1e-6 && v.abs() < 1e-10);
    }
}
