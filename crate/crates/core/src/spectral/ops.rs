use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::cutoff::SpectralCutoff;
use super::field::{fft_nd, Direction, Field};
use super::grid::TorusGrid;
use crate::error::{invalid, Error, Result};
use crate::exponents::FlowOrder;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeAxes {
    All,
    YOnly,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flavor {
    /// `|zeta|^s`, zero mode mapped to 0.
    Homogeneous,
    /// `(1 + |zeta|^2)^{s/2}`.
    Inhomogeneous,
}

/// Multiply the spectrum by `m(zeta)`, where `zeta` is the full frequency
/// vector of each lattice point.
pub fn apply_multiplier(f: &Field, m: impl Fn(&[f64]) -> Complex64) -> Result<Field> {
    let grid = f.grid().clone();
    let shape = grid.shape();
    let mut data = f.samples().to_vec();
    fft_nd(&mut data, &shape, Direction::Forward);
    let mut zeta = vec![0.0; grid.dim()];
    let mut bad = None;
    grid.for_each_index(|flat, idx| {
        for (a, &i) in idx.iter().enumerate() {
            zeta[a] = grid.wavenumber(a, i);
        }
        let v = m(&zeta);
        if !(v.re.is_finite() && v.im.is_finite()) && bad.is_none() {
            bad = Some(zeta.clone());
        }
        data[flat] *= v;
    });
    if let Some(z) = bad {
        return Err(Error::NonFinite(format!("multiplier at frequency {z:?}")));
    }
    fft_nd(&mut data, &shape, Direction::Inverse);
    Field::from_samples(grid, data)
}

/// Field whose spectrum samples the continuum transform `m`, i.e. `m(D)`
/// applied to the unit point mass at the origin `z = 0`.
pub fn from_symbol(grid: Arc<TorusGrid>, m: impl Fn(&[f64]) -> Complex64) -> Result<Field> {
    let shape = grid.shape();
    let origin = shape.iter().fold(0, |acc, &n| acc * n + n / 2);
    let mut delta = Field::zeros(grid.clone());
    delta.samples_mut()[origin] = Complex64::new(1.0 / grid.cell_volume(), 0.0);
    apply_multiplier(&delta, m)
}

/// Fast path for multipliers depending only on `|zeta|^2` and `|eta|^2`.
pub(crate) fn apply_radial(f: &Field, m: impl Fn(f64, f64) -> Complex64) -> Field {
    let grid = f.grid().clone();
    let lat = grid.lattice();
    let shape = grid.shape();
    let mut data = f.samples().to_vec();
    fft_nd(&mut data, &shape, Direction::Forward);
    for ((v, &z), &e) in data.iter_mut().zip(&lat.zeta_sq).zip(&lat.eta_sq) {
        *v *= m(z, e);
    }
    fft_nd(&mut data, &shape, Direction::Inverse);
    Field::from_samples(grid, data).expect("shape preserved")
}

/// `P_j f`: spectrum multiplied by `psi(2^{-j} |zeta|)`.
pub fn lp_project(f: &Field, j: i32, cutoff: &SpectralCutoff) -> Field {
    apply_radial(f, |z, _| Complex64::new(cutoff.psi_j(j, z.sqrt()), 0.0))
}

pub fn derivative_symbol(s: f64, axes: DerivativeAxes, flavor: Flavor, zeta_sq: f64, eta_sq: f64) -> f64 {
    let w = match axes {
        DerivativeAxes::All => zeta_sq,
        DerivativeAxes::YOnly => eta_sq,
    };
    match flavor {
        Flavor::Homogeneous if w == 0.0 => 0.0,
        Flavor::Homogeneous => w.powf(0.5 * s),
        Flavor::Inhomogeneous => (1.0 + w).powf(0.5 * s),
    }
}

/// `|nabla|^s f` or `<nabla>^s f`, over all axes or only the y-axes.
pub fn fractional_derivative(f: &Field, s: f64, axes: DerivativeAxes, flavor: Flavor) -> Field {
    if s == 0.0 && flavor == Flavor::Inhomogeneous {
        return f.clone();
    }
    apply_radial(f, |z, e| Complex64::new(derivative_symbol(s, axes, flavor, z, e), 0.0))
}

/// `e^{it|zeta|^sigma} f`. With `sigma = 2` this is `e^{-it Delta}`.
pub fn propagate(f: &Field, t: f64, flow: FlowOrder) -> Field {
    match flow {
        FlowOrder::Schrodinger => apply_radial(f, |z, _| Complex64::from_polar(1.0, t * z)),
        FlowOrder::Wave => apply_radial(f, |z, _| Complex64::from_polar(1.0, t * z.sqrt())),
    }
}

/// `f_delta(z) = delta^a f(delta z)` for dyadic `delta`. The samples are
/// reused on a grid whose extents are divided by `delta`.
pub fn rescale_field(f: &Field, delta: f64, amplitude_exp: f64) -> Result<Field> {
    if !(delta > 0.0 && delta.is_finite()) {
        return invalid(format!("delta must be positive, got {delta}"));
    }
    let m = delta.log2().round();
    if 2f64.powi(m as i32) != delta {
        return invalid(format!("delta = {delta} is not a power of two"));
    }
    let grid = Arc::new(f.grid().shrunk(delta)?);
    let amp = Complex64::new(delta.powf(amplitude_exp), 0.0);
    f.scaled(amp).with_grid(grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::TorusGrid;
    use std::f64::consts::PI;

    #[test]
    fn laplacian_eigen_relation() {
        let g = Arc::new(TorusGrid::cube(2, 2.0 * PI, 16, 1).unwrap());
        let f = Field::from_fn(g, |z| Complex64::from_polar(1.0, 3.0 * z[0] - 2.0 * z[1]));
        let lap = apply_multiplier(&f, |zeta| Complex64::new(zeta.iter().map(|v| v * v).sum(), 0.0)).unwrap();
        for (a, b) in lap.samples().iter().zip(f.samples()) {
            assert!((a - b * 13.0).norm() < 1e-10);
        }
    }

    #[test]
    fn non_finite_multiplier_rejected() {
        let g = Arc::new(TorusGrid::cube(1, 1.0, 8, 1).unwrap());
        let f = Field::from_fn(g, |_| Complex64::new(1.0, 0.0));
        let r = apply_multiplier(&f, |z| Complex64::new(1.0 / z[0], 0.0));
        assert!(matches!(r, Err(Error::NonFinite(_))));
    }

    #[test]
    fn non_dyadic_delta_rejected() {
        let g = Arc::new(TorusGrid::cube(1, 1.0, 8, 1).unwrap());
        let f = Field::zeros(g);
        assert!(rescale_field(&f, 3.0, 1.0).is_err());
        assert!(rescale_field(&f, 0.25, 1.0).is_ok());
    }
}
