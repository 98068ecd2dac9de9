use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::nonlinearity::Nonlinearity;
use crate::error::{invalid, Error, Result};
use crate::norms::Trajectory;
use crate::spectral::{fft_nd, Direction, Field};

/// Initial data for the Schrödinger (`f`) or wave (`f`, `g`) problem.
#[derive(Clone, Debug)]
pub enum CauchyData {
    Schrodinger { f: Field },
    Wave { f: Field, g: Field },
}

/// Zero-mode content removed when wave data is made mean-zero.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MeanProjection {
    pub removed_f: [f64; 2],
    pub removed_g: [f64; 2],
}

fn remove_mean(f: &Field) -> (Field, Complex64) {
    let mean = f.samples().iter().sum::<Complex64>() / f.samples().len() as f64;
    (f.map(|v| v - mean), mean)
}

impl CauchyData {
    pub fn schrodinger(f: Field) -> Self {
        CauchyData::Schrodinger { f }
    }

    /// Wave data projected to mean zero; the removed means are returned.
    pub fn wave(f: Field, g: Field) -> Result<(Self, MeanProjection)> {
        if !f.same_grid(&g) {
            return Err(Error::GridMismatch("wave data f and g on different grids".into()));
        }
        let (f, mf) = remove_mean(&f);
        let (g, mg) = remove_mean(&g);
        let proj = MeanProjection { removed_f: [mf.re, mf.im], removed_g: [mg.re, mg.im] };
        Ok((CauchyData::Wave { f, g }, proj))
    }

    pub fn primary(&self) -> &Field {
        match self {
            CauchyData::Schrodinger { f } | CauchyData::Wave { f, .. } => f,
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        let c = Complex64::new(c, 0.0);
        match self {
            CauchyData::Schrodinger { f } => CauchyData::Schrodinger { f: f.scaled(c) },
            CauchyData::Wave { f, g } => CauchyData::Wave { f: f.scaled(c), g: g.scaled(c) },
        }
    }

    /// `Phi(u)` for the matching equation.
    pub fn duhamel(&self, u: &Trajectory, nl: &Nonlinearity) -> Result<Trajectory> {
        match self {
            CauchyData::Schrodinger { f } => duhamel_map_s(f, u, nl, u.horizon()),
            CauchyData::Wave { f, g } => duhamel_map_w(f, g, u, nl, u.horizon()),
        }
    }

    /// The free evolution on the given time samples.
    pub fn free(&self, template: &Trajectory) -> Result<Trajectory> {
        let zero = Nonlinearity { p: 2.0, lambda: 0.0, form: super::NonlinearityForm::PowerPreserving };
        self.duhamel(template, &zero)
    }
}

fn check_inputs(f: &Field, u: &Trajectory, horizon: f64) -> Result<()> {
    if (u.horizon() - horizon).abs() > 1e-12 * horizon.max(1.0) {
        return invalid(format!("trajectory horizon {} differs from T = {horizon}", u.horizon()));
    }
    if u.times()[0] != 0.0 {
        return invalid("trajectory must start at t = 0");
    }
    if !u.states()[0].same_grid(f) {
        return Err(Error::GridMismatch("data and trajectory on different grids".into()));
    }
    Ok(())
}

fn spectrum(f: &Field) -> Vec<Complex64> {
    let mut v = f.samples().to_vec();
    fft_nd(&mut v, &f.grid().shape(), Direction::Forward);
    v
}

fn to_field(template: &Field, mut spec: Vec<Complex64>) -> Field {
    fft_nd(&mut spec, &template.grid().shape(), Direction::Inverse);
    Field::from_samples(template.grid().clone(), spec).expect("shape preserved")
}

/// `Phi(u)(t) = e^{it Delta} f - i int_0^t e^{i(t-tau) Delta} F(u(tau)) d tau`
/// with a cumulative trapezoid in `tau` on the trajectory's samples.
pub fn duhamel_map_s(f: &Field, u: &Trajectory, nl: &Nonlinearity, horizon: f64) -> Result<Trajectory> {
    check_inputs(f, u, horizon)?;
    let lat = f.grid().lattice();
    let f_hat = spectrum(f);
    let mut acc = vec![Complex64::default(); f_hat.len()];
    let mut prev: Option<Vec<Complex64>> = None;
    let mut states = Vec::with_capacity(u.len());
    let times = u.times();
    for (i, state) in u.states().iter().enumerate() {
        let t = times[i];
        let linear = nl.lambda == 0.0;
        let g = if linear {
            None
        } else {
            // Interaction picture: e^{i tau |zeta|^2} F^(tau).
            let mut g = spectrum(&nl.evaluate(state));
            for (v, &z) in g.iter_mut().zip(&lat.zeta_sq) {
                *v *= Complex64::from_polar(1.0, t * z);
            }
            Some(g)
        };
        if let (Some(g), Some(p)) = (&g, &prev) {
            let h = 0.5 * (t - times[i - 1]);
            for ((a, x), y) in acc.iter_mut().zip(p).zip(g) {
                *a += (x + y) * h;
            }
        }
        let out: Vec<Complex64> = f_hat
            .iter()
            .zip(&acc)
            .zip(&lat.zeta_sq)
            .map(|((&fh, &a), &z)| Complex64::from_polar(1.0, -t * z) * (fh - Complex64::i() * a))
            .collect();
        states.push(to_field(f, out));
        prev = g;
    }
    u.with_states(states)
}

/// `sin(t rho) / rho`, equal to `t` at `rho = 0`.
pub(crate) fn sinc_t(t: f64, rho: f64) -> f64 {
    let x = t * rho;
    if x.abs() < 1e-8 {
        t * (1.0 - x * x / 6.0)
    } else {
        (x).sin() / rho
    }
}

/// `Phi(u)(t) = cos(t rho) f + sin(t rho)/rho g + int_0^t sin((t-tau) rho)/rho F(u) d tau`,
/// `rho = sqrt(-Delta)`, using
/// `sin((t-tau) rho)/rho = sinc(t) cos(tau rho) - cos(t rho) sinc(tau)`.
pub fn duhamel_map_w(
    f: &Field,
    g: &Field,
    u: &Trajectory,
    nl: &Nonlinearity,
    horizon: f64,
) -> Result<Trajectory> {
    check_inputs(f, u, horizon)?;
    if !f.same_grid(g) {
        return Err(Error::GridMismatch("wave data f and g on different grids".into()));
    }
    let lat = f.grid().lattice();
    let rho: Vec<f64> = lat.zeta_sq.iter().map(|z| z.sqrt()).collect();
    let f_hat = spectrum(f);
    let g_hat = spectrum(g);
    let n = f_hat.len();
    let mut acc_cos = vec![Complex64::default(); n];
    let mut acc_sin = vec![Complex64::default(); n];
    let mut prev: Option<(Vec<Complex64>, Vec<Complex64>)> = None;
    let times = u.times();
    let mut states = Vec::with_capacity(u.len());
    for (i, state) in u.states().iter().enumerate() {
        let t = times[i];
        let terms = if nl.lambda == 0.0 {
            None
        } else {
            let fh = spectrum(&nl.evaluate(state));
            let c: Vec<Complex64> = fh.iter().zip(&rho).map(|(v, &r)| v * (t * r).cos()).collect();
            let s: Vec<Complex64> = fh.iter().zip(&rho).map(|(v, &r)| v * sinc_t(t, r)).collect();
            Some((c, s))
        };
        if let (Some((c, s)), Some((pc, ps))) = (&terms, &prev) {
            let h = 0.5 * (t - times[i - 1]);
            for j in 0..n {
                acc_cos[j] += (pc[j] + c[j]) * h;
                acc_sin[j] += (ps[j] + s[j]) * h;
            }
        }
        let out: Vec<Complex64> = (0..n)
            .map(|j| {
                let (ct, st) = ((t * rho[j]).cos(), sinc_t(t, rho[j]));
                f_hat[j] * ct + g_hat[j] * st + acc_cos[j] * st - acc_sin[j] * ct
            })
            .collect();
        states.push(to_field(f, out));
        prev = terms;
    }
    u.with_states(states)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::TorusGrid;
    use std::sync::Arc;

    #[test]
    fn sinc_limit() {
        assert_eq!(sinc_t(0.7, 0.0), 0.7);
        assert!((sinc_t(0.7, 2.0) - (1.4f64).sin() / 2.0).abs() < 1e-15);
        assert!((sinc_t(0.7, 1e-10) - 0.7).abs() < 1e-15);
    }

    #[test]
    fn wave_data_projected_mean_zero() {
        let g = Arc::new(TorusGrid::cube(2, 4.0, 8, 1).unwrap());
        let f = Field::from_fn(g.clone(), |z| Complex64::new(1.0 + z[0], 0.0));
        let (data, proj) = CauchyData::wave(f.clone(), f).unwrap();
        let CauchyData::Wave { f, .. } = data else { unreachable!() };
        assert!(f.samples().iter().sum::<Complex64>().norm() < 1e-12);
        assert!(proj.removed_f[0] != 0.0);
    }
}
