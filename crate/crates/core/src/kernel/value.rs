use std::f64::consts::PI;

use num_complex::Complex64;

use super::quadrature::{composite_rule, sphere_area, spherical_mean, PANEL_ORDER};
use crate::error::{invalid, Error, Result};
use crate::exponents::FlowOrder;
use crate::spectral::SpectralCutoff;

/// Relative change allowed when the node count is doubled.
pub const REFINEMENT_TOL: f64 = 1e-4;

fn phase(flow: FlowOrder, rho_sq: f64) -> f64 {
    match flow {
        FlowOrder::Schrodinger => rho_sq,
        FlowOrder::Wave => rho_sq.sqrt(),
    }
}

/// Largest `|d/d rho (t rho^sigma)|` on `rho <= 2`.
fn phase_speed(flow: FlowOrder, t: f64) -> f64 {
    match flow {
        FlowOrder::Schrodinger => 4.0 * t.abs(),
        FlowOrder::Wave => t.abs(),
    }
}

/// `(2 pi)^{-N} int psi`, the value of the kernel at the origin and `t = 0`.
pub fn kernel_scale(dim: usize, cutoff: &SpectralCutoff) -> f64 {
    let (r, w) = composite_rule(0.5, 2.0, 8);
    let radial: f64 = r.iter().zip(&w).map(|(r, w)| w * cutoff.psi(*r) * r.powi(dim as i32 - 1)).sum();
    sphere_area(dim) * radial / (2.0 * PI).powi(dim as i32)
}

/// Tensor Gauss-Legendre sum of `e^{i(z.zeta + t phi(zeta))} amp(zeta)` over
/// `[-2, 2]^d`, with `nodes[a]` points on axis `a`.
fn tensor_sum(
    z: &[f64],
    nodes: &[usize],
    amplitude_phase: impl Fn(&[f64]) -> Option<(f64, f64)>,
) -> Complex64 {
    let d = z.len();
    let rules: Vec<(Vec<f64>, Vec<f64>)> = nodes
        .iter()
        .map(|&n| composite_rule(-2.0, 2.0, n.div_ceil(PANEL_ORDER)))
        .collect();
    let mut idx = vec![0usize; d];
    let mut zeta = vec![0.0; d];
    let mut total = Complex64::default();
    'outer: loop {
        let mut w = 1.0;
        let mut lin = 0.0;
        for a in 0..d {
            let x = rules[a].0[idx[a]];
            zeta[a] = x;
            w *= rules[a].1[idx[a]];
            lin += z[a] * x;
        }
        if let Some((amp, ph)) = amplitude_phase(&zeta) {
            total += Complex64::from_polar(w * amp, lin + ph);
        }
        for a in (0..d).rev() {
            idx[a] += 1;
            if idx[a] < rules[a].0.len() {
                continue 'outer;
            }
            idx[a] = 0;
        }
        break;
    }
    total
}

fn node_counts(z: &[f64], speed: f64, quad_points: usize) -> Vec<usize> {
    z.iter()
        .map(|&zi| {
            let periods = 4.0 * (zi.abs() + speed) / (2.0 * PI);
            let need = (4.0 * periods).ceil() as usize;
            need.max(quad_points).max(PANEL_ORDER).div_ceil(PANEL_ORDER) * PANEL_ORDER
        })
        .collect()
}

fn refine(coarse: Complex64, fine: Complex64, scale: f64, what: &str) -> Result<Complex64> {
    let shift = (fine - coarse).norm();
    if shift > REFINEMENT_TOL * fine.norm().max(scale) {
        return Err(Error::NonConvergence(format!(
            "{what}: doubling the nodes moved the value by {shift:.3e} (value {:.3e})",
            fine.norm()
        )));
    }
    Ok(fine)
}

/// `K(x, y, t) = (2 pi)^{-N} int e^{i (x,y).zeta} e^{it|zeta|^sigma} psi(zeta) d zeta`
/// by tensor Gauss-Legendre quadrature over `[-2, 2]^N`.
///
/// The per-axis node count is at least `quad_points` and at least four
/// nodes per period of the integrand; the result is accepted only if
/// doubling every node count changes it by less than [`REFINEMENT_TOL`]
/// relative to `max(|K|, K(0, 0, 0))`.
pub fn kernel_value(
    x: &[f64],
    y: &[f64],
    t: f64,
    flow: FlowOrder,
    cutoff: &SpectralCutoff,
    quad_points: usize,
) -> Result<Complex64> {
    let z: Vec<f64> = x.iter().chain(y).copied().collect();
    if z.is_empty() {
        return invalid("kernel needs at least one spatial dimension");
    }
    let integrand = |zeta: &[f64]| {
        let rho_sq: f64 = zeta.iter().map(|v| v * v).sum();
        if !(0.25..=4.0).contains(&rho_sq) {
            return None;
        }
        Some((cutoff.psi(rho_sq.sqrt()), t * phase(flow, rho_sq)))
    };
    let norm = (2.0 * PI).powi(-(z.len() as i32));
    let nodes = node_counts(&z, phase_speed(flow, t), quad_points);
    let coarse = tensor_sum(&z, &nodes, integrand) * norm;
    let doubled: Vec<usize> = nodes.iter().map(|n| 2 * n).collect();
    let fine = tensor_sum(&z, &doubled, integrand) * norm;
    refine(coarse, fine, kernel_scale(z.len(), cutoff), "kernel_value")
}

/// `(2 pi)^{-N} int e^{i x.xi} e^{it|(xi, eta)|^sigma} psi(xi, eta) d xi`
/// over the xi-section of the annulus, `N = dim x + dim eta`.
pub fn partial_kernel_value(
    x: &[f64],
    eta: &[f64],
    t: f64,
    flow: FlowOrder,
    cutoff: &SpectralCutoff,
    quad_points: usize,
) -> Result<Complex64> {
    if x.is_empty() {
        return invalid("partial kernel needs at least one x dimension");
    }
    let eta_sq: f64 = eta.iter().map(|v| v * v).sum();
    if eta_sq >= 4.0 {
        return Ok(Complex64::default());
    }
    let integrand = |xi: &[f64]| {
        let rho_sq = xi.iter().map(|v| v * v).sum::<f64>() + eta_sq;
        if !(0.25..=4.0).contains(&rho_sq) {
            return None;
        }
        Some((cutoff.psi(rho_sq.sqrt()), t * phase(flow, rho_sq)))
    };
    let dim = x.len() + eta.len();
    let norm = (2.0 * PI).powi(-(dim as i32));
    let nodes = node_counts(x, phase_speed(flow, t), quad_points);
    let coarse = tensor_sum(x, &nodes, integrand) * norm;
    let doubled: Vec<usize> = nodes.iter().map(|n| 2 * n).collect();
    let fine = tensor_sum(x, &doubled, integrand) * norm;
    refine(coarse, fine, kernel_scale(dim, cutoff), "partial_kernel_value")
}

/// `int_{R^d} e^{i z.xi} g(|xi|) d xi` for `|z| = rho`, reduced to
/// `|S^{d-1}| int g(r) m_d(rho r) r^{d-1} dr` over `[r_lo, r_hi]`.
fn radial_transform(
    d: usize,
    rho: f64,
    r_lo: f64,
    r_hi: f64,
    panels: usize,
    g: impl Fn(f64) -> Complex64,
) -> Complex64 {
    if r_hi <= r_lo {
        return Complex64::default();
    }
    let (r, w) = composite_rule(r_lo, r_hi, panels);
    let sum: Complex64 = r
        .iter()
        .zip(&w)
        .map(|(&r, &w)| g(r) * (w * spherical_mean(d, rho * r) * r.powi(d as i32 - 1)))
        .sum();
    sum * sphere_area(d)
}

fn radial_panels(range: f64, omega: f64) -> usize {
    8 + (range * omega / PI).ceil() as usize
}

fn check_dim(d: usize) -> Result<()> {
    if !(1..=5).contains(&d) {
        return invalid(format!("radial route supports 1..=5 dimensions, got {d}"));
    }
    Ok(())
}

/// Radial evaluation of the full kernel at `|(x, y)| = rho`, `N = dim`.
pub(crate) fn kernel_radial_unchecked(
    dim: usize,
    rho: f64,
    t: f64,
    flow: FlowOrder,
    cutoff: &SpectralCutoff,
    refinement: usize,
) -> Complex64 {
    let panels = refinement * radial_panels(1.5, phase_speed(flow, t) + rho);
    let g = |r: f64| Complex64::from_polar(cutoff.psi(r), t * phase(flow, r * r));
    radial_transform(dim, rho, 0.5, 2.0, panels, g) * (2.0 * PI).powi(-(dim as i32))
}

/// Full kernel at `|(x, y)| = rho` through its radial (Hankel) form, with a
/// panel-doubling convergence check.
pub fn kernel_value_radial(
    dim: usize,
    rho: f64,
    t: f64,
    flow: FlowOrder,
    cutoff: &SpectralCutoff,
) -> Result<Complex64> {
    check_dim(dim)?;
    let coarse = kernel_radial_unchecked(dim, rho, t, flow, cutoff, 1);
    let fine = kernel_radial_unchecked(dim, rho, t, flow, cutoff, 2);
    refine(coarse, fine, kernel_scale(dim, cutoff), "kernel_value_radial")
}

pub(crate) fn partial_radial_unchecked(
    x_dim: usize,
    y_dim: usize,
    rho_x: f64,
    eta_norm: f64,
    t: f64,
    flow: FlowOrder,
    cutoff: &SpectralCutoff,
    refinement: usize,
) -> Complex64 {
    let e2 = eta_norm * eta_norm;
    if e2 >= 4.0 {
        return Complex64::default();
    }
    let r_lo = (0.25 - e2).max(0.0).sqrt();
    let r_hi = (4.0 - e2).sqrt();
    let panels = refinement * radial_panels(r_hi - r_lo, phase_speed(flow, t) + rho_x);
    let g = |r: f64| {
        let rho_sq = r * r + e2;
        Complex64::from_polar(cutoff.psi(rho_sq.sqrt()), t * phase(flow, rho_sq))
    };
    radial_transform(x_dim, rho_x, r_lo, r_hi, panels, g) * (2.0 * PI).powi(-((x_dim + y_dim) as i32))
}

/// Partial kernel at `|x| = rho_x`, `|eta| = eta_norm` through the radial
/// form in `xi`.
pub fn partial_kernel_value_radial(
    x_dim: usize,
    y_dim: usize,
    rho_x: f64,
    eta_norm: f64,
    t: f64,
    flow: FlowOrder,
    cutoff: &SpectralCutoff,
) -> Result<Complex64> {
    check_dim(x_dim)?;
    let coarse = partial_radial_unchecked(x_dim, y_dim, rho_x, eta_norm, t, flow, cutoff, 1);
    let fine = partial_radial_unchecked(x_dim, y_dim, rho_x, eta_norm, t, flow, cutoff, 2);
    refine(coarse, fine, kernel_scale(x_dim + y_dim, cutoff), "partial_kernel_value_radial")
}

pub(crate) fn l2_eta_unchecked(
    x_dim: usize,
    y_dim: usize,
    rho_x: f64,
    t: f64,
    flow: FlowOrder,
    cutoff: &SpectralCutoff,
    eta_panels: usize,
    refinement: usize,
) -> f64 {
    let (e, w) = composite_rule(0.0, 2.0, eta_panels);
    let sum: f64 = e
        .iter()
        .zip(&w)
        .map(|(&e, &w)| {
            let v = partial_radial_unchecked(x_dim, y_dim, rho_x, e, t, flow, cutoff, refinement);
            w * v.norm_sqr() * e.powi(y_dim as i32 - 1)
        })
        .sum();
    (sphere_area(y_dim) * sum).sqrt()
}

/// `(int_{R^k} |K~(x, eta, t)|^2 d eta)^{1/2}` at `|x| = rho_x`, refined in
/// both the eta and the xi quadrature until stable.
pub fn l2_eta_aggregate(
    x_dim: usize,
    y_dim: usize,
    rho_x: f64,
    t: f64,
    flow: FlowOrder,
    cutoff: &SpectralCutoff,
) -> Result<f64> {
    check_dim(x_dim)?;
    check_dim(y_dim)?;
    let mut panels = 8;
    let mut prev = l2_eta_unchecked(x_dim, y_dim, rho_x, t, flow, cutoff, panels, 1);
    let scale = kernel_scale(x_dim + y_dim, cutoff);
    for _ in 0..8 {
        panels *= 2;
        let next = l2_eta_unchecked(x_dim, y_dim, rho_x, t, flow, cutoff, panels, 1);
        if (next - prev).abs() <= 1e-6 * next.max(scale) {
            let fine = l2_eta_unchecked(x_dim, y_dim, rho_x, t, flow, cutoff, panels, 2);
            return refine(Complex64::new(next, 0.0), Complex64::new(fine, 0.0), scale, "l2_eta_aggregate")
                .map(|v| v.re);
        }
        prev = next;
    }
    Err(Error::NonConvergence(format!("l2_eta_aggregate: eta quadrature unsettled at {panels} panels")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radial_matches_tensor_in_two_dimensions() {
        let c = SpectralCutoff::default();
        for &(x, y, t) in &[(0.0, 0.0, 0.0), (0.7, -0.4, 0.5), (1.5, 2.0, 1.0)] {
            for flow in [FlowOrder::Schrodinger, FlowOrder::Wave] {
                let a = kernel_value(&[x], &[y], t, flow, &c, 64).unwrap();
                let b = kernel_value_radial(2, f64::hypot(x, y), t, flow, &c).unwrap();
                assert!((a - b).norm() < 1e-9, "{flow:?} {x} {y} {t}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn partial_kernel_outside_support_vanishes() {
        let c = SpectralCutoff::default();
        let v = partial_kernel_value(&[0.3], &[2.1, 0.0], 1.0, FlowOrder::Schrodinger, &c, 32).unwrap();
        assert_eq!(v, Complex64::default());
    }
}
