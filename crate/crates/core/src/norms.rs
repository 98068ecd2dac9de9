//! Mixed spatial norms `L^r_x L^{r~}_y`, Sobolev norms, space-time norms
//! `L^q_t L^r_x L^{r~}_y` over sampled trajectories, the contraction
//! distance, and empirical Strichartz and embedding constants.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::exponents::{check_scaling_conditions, rational_to_f64, EquationParams, ExponentTriple, ExtRational};
use crate::spectral::{fractional_derivative, propagate, DerivativeAxes, Field, Flavor, TorusGrid};

/// `(sum w |v|^p)^{1/p}`, or `max |v|` for `p = inf`, computed with a
/// max-rescaling so large exponents do not overflow.
fn weighted_lp(values: impl Iterator<Item = f64> + Clone, weight: f64, p: f64) -> f64 {
    let m = values.clone().fold(0.0, f64::max);
    if p.is_infinite() || m == 0.0 {
        return m;
    }
    let sum: f64 = values.map(|v| (v / m).powf(p)).sum();
    m * (weight * sum).powf(1.0 / p)
}

/// Per-x-slice `L^{r~}_y` norms of `f`.
fn y_slice_norms(f: &Field, r_tilde: f64) -> Vec<f64> {
    let g = f.grid();
    let dy = g.y_cell_volume();
    f.samples()
        .chunks_exact(g.y_len())
        .map(|slice| weighted_lp(slice.iter().map(|v| v.norm()), dy, r_tilde))
        .collect()
}

pub(crate) fn mixed_norm_f64(f: &Field, r: f64, r_tilde: f64) -> f64 {
    let inner = y_slice_norms(f, r_tilde);
    weighted_lp(inner.iter().copied(), f.grid().x_cell_volume(), r)
}

/// Plain `L^p` norm over the whole grid.
pub fn lebesgue_norm(f: &Field, p: f64) -> f64 {
    weighted_lp(f.samples().iter().map(|v| v.norm()), f.grid().cell_volume(), p)
}

/// Riemann-sum `(int (int |f|^{r~} dy)^{r/r~} dx)^{1/r}`.
pub fn mixed_space_norm(f: &Field, r: ExtRational, r_tilde: ExtRational) -> f64 {
    mixed_norm_f64(f, r.to_f64(), r_tilde.to_f64())
}

/// `L^2` norm of `|nabla|^s f` or `<nabla>^s f`.
pub fn sobolev_norm(f: &Field, s: f64, flavor: Flavor, axes: DerivativeAxes) -> f64 {
    fractional_derivative(f, s, axes, flavor).l2_norm()
}

/// Time samples on `[0, T]` with quadrature weights and one field per sample.
#[derive(Clone, Debug)]
pub struct Trajectory {
    grid: Arc<TorusGrid>,
    horizon: f64,
    times: Vec<f64>,
    weights: Vec<f64>,
    states: Vec<Field>,
}

/// Trapezoid nodes and weights on `samples` uniform points of `[0, T]`.
pub fn trapezoid(horizon: f64, samples: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return invalid(format!("time horizon must be positive, got {horizon}"));
    }
    if samples < 2 {
        return invalid("need at least two time samples");
    }
    let dt = horizon / (samples - 1) as f64;
    let times = (0..samples).map(|i| i as f64 * dt).collect();
    let weights = (0..samples)
        .map(|i| if i == 0 || i == samples - 1 { 0.5 * dt } else { dt })
        .collect();
    Ok((times, weights))
}

impl Trajectory {
    pub fn new(horizon: f64, times: Vec<f64>, weights: Vec<f64>, states: Vec<Field>) -> Result<Self> {
        if states.is_empty() || states.len() != times.len() || times.len() != weights.len() {
            return invalid("times, weights and states must be nonempty and of equal length");
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return invalid("sample times must be strictly increasing");
        }
        if weights.iter().any(|&w| !(w > 0.0)) {
            return invalid("quadrature weights must be positive");
        }
        if times[0] < 0.0 || *times.last().unwrap() > horizon * (1.0 + 1e-12) {
            return invalid("sample times must lie in [0, T]");
        }
        let total: f64 = weights.iter().sum();
        if (total - horizon).abs() > 1e-12 * horizon.max(1.0) {
            return invalid(format!("weights sum to {total}, expected {horizon}"));
        }
        let grid = states[0].grid().clone();
        if states.iter().any(|s| !s.same_grid(&states[0])) {
            return Err(Error::GridMismatch("trajectory states on different grids".into()));
        }
        Ok(Trajectory { grid, horizon, times, weights, states })
    }

    /// Uniform trapezoid samples of `state(t)`.
    pub fn sample(horizon: f64, samples: usize, state: impl Fn(f64) -> Field) -> Result<Self> {
        let (times, weights) = trapezoid(horizon, samples)?;
        let states = times.iter().map(|&t| state(t)).collect();
        Self::new(horizon, times, weights, states)
    }

    /// The free flow `e^{it|D|^sigma} f` on uniform samples.
    pub fn free(f: &Field, flow: crate::exponents::FlowOrder, horizon: f64, samples: usize) -> Result<Self> {
        Self::sample(horizon, samples, |t| propagate(f, t, flow))
    }

    pub fn grid(&self) -> &Arc<TorusGrid> {
        &self.grid
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn states(&self) -> &[Field] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Same times and weights, new states.
    pub fn with_states(&self, states: Vec<Field>) -> Result<Self> {
        Self::new(self.horizon, self.times.clone(), self.weights.clone(), states)
    }

    pub fn map(&self, f: impl Fn(&Field) -> Field) -> Result<Self> {
        self.with_states(self.states.iter().map(f).collect())
    }

    pub fn compatible(&self, other: &Trajectory) -> bool {
        self.times == other.times
            && self.weights == other.weights
            && (Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid)
    }

    pub fn zip_with(&self, other: &Trajectory, f: impl Fn(&Field, &Field) -> Result<Field>) -> Result<Self> {
        if !self.compatible(other) {
            return Err(Error::GridMismatch("trajectories differ in grid or time samples".into()));
        }
        let states = self
            .states
            .iter()
            .zip(&other.states)
            .map(|(a, b)| f(a, b))
            .collect::<Result<Vec<_>>>()?;
        self.with_states(states)
    }

    pub fn sub(&self, other: &Trajectory) -> Result<Self> {
        self.zip_with(other, |a, b| a.sub(b))
    }

    pub fn add(&self, other: &Trajectory) -> Result<Self> {
        self.zip_with(other, |a, b| a.add(b))
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        self.map(|s| s.scaled(c)).expect("times unchanged")
    }

    /// The first `count` samples as a trajectory on `[0, t_{count-1}]`, with
    /// trapezoid weights rebuilt from the sample spacing.
    pub fn prefix(&self, count: usize) -> Result<Self> {
        if count < 2 || count > self.len() {
            return invalid(format!("prefix length {count} outside 2..={}", self.len()));
        }
        if self.times[0] != 0.0 {
            return invalid("prefix needs a trajectory starting at t = 0");
        }
        let times = self.times[..count].to_vec();
        let mut weights = vec![0.0; count];
        for i in 1..count {
            let h = 0.5 * (times[i] - times[i - 1]);
            weights[i - 1] += h;
            weights[i] += h;
        }
        Self::new(times[count - 1], times, weights, self.states[..count].to_vec())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeWeight {
    None,
    YOnly,
    All,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormSpec {
    pub q: ExtRational,
    pub r: ExtRational,
    pub r_tilde: ExtRational,
    pub s: f64,
    pub derivative_axes: DerivativeWeight,
    pub derivative_flavor: Flavor,
}

impl NormSpec {
    /// `L^q_t L^r_x L^{r~}_y` without derivatives.
    pub fn plain(t: &ExponentTriple) -> Self {
        NormSpec {
            q: t.q,
            r: t.r,
            r_tilde: t.r_tilde,
            s: 0.0,
            derivative_axes: DerivativeWeight::None,
            derivative_flavor: Flavor::Inhomogeneous,
        }
    }

    /// `L^q_t L^r_x W^{s, r~}_y` with the Bessel potential in y.
    pub fn y_sobolev(t: &ExponentTriple, s: f64) -> Self {
        NormSpec { s, derivative_axes: DerivativeWeight::YOnly, ..Self::plain(t) }
    }

    fn weight(&self, f: &Field) -> Field {
        match self.derivative_axes {
            DerivativeWeight::None => f.clone(),
            DerivativeWeight::YOnly => fractional_derivative(f, self.s, DerivativeAxes::YOnly, self.derivative_flavor),
            DerivativeWeight::All => fractional_derivative(f, self.s, DerivativeAxes::All, self.derivative_flavor),
        }
    }

    /// Spatial part of the norm at one instant.
    pub fn spatial(&self, f: &Field) -> f64 {
        mixed_norm_f64(&self.weight(f), self.r.to_f64(), self.r_tilde.to_f64())
    }
}

/// `(sum_i w_i ||u(t_i)||^q)^{1/q}`, or the max over samples for `q = inf`.
pub fn spacetime_norm(u: &Trajectory, spec: &NormSpec) -> f64 {
    let inner: Vec<f64> = u.states.iter().map(|s| spec.spatial(s)).collect();
    let q = spec.q.to_f64();
    if q.is_infinite() {
        return inner.iter().copied().fold(0.0, f64::max);
    }
    let m = inner.iter().copied().fold(0.0, f64::max);
    if m == 0.0 {
        return 0.0;
    }
    let sum: f64 = inner.iter().zip(&u.weights).map(|(v, w)| w * (v / m).powf(q)).sum();
    m * sum.powf(1.0 / q)
}

/// Empirical constant `||e^{it|D|^sigma} f||_{L^q L^r L^{r~}} / ||f||_{H^{s}}`
/// over `[0, T]`, with `s` the regularity forced by scaling.
pub fn strichartz_quotient(
    f: &Field,
    params: &EquationParams,
    t: &ExponentTriple,
    horizon: f64,
    time_samples: usize,
) -> Result<f64> {
    let report = check_scaling_conditions(params, t);
    if !report.dispersion_ok {
        return invalid(format!("triple {t} fails the dispersion condition for these parameters"));
    }
    let s = rational_to_f64(&report.implied_s);
    let denom = sobolev_norm(f, s, Flavor::Homogeneous, DerivativeAxes::All);
    if denom == 0.0 {
        return invalid("datum has zero homogeneous Sobolev norm");
    }
    let u = Trajectory::free(f, params.flow, horizon, time_samples)?;
    Ok(spacetime_norm(&u, &NormSpec::plain(t)) / denom)
}

/// `max` over `triples` of `||u - v||_{L^q L^r L^{r~}}` with the given
/// y-regularity weight (use `s = 0` for the plain distance).
pub fn contraction_distance_weighted(
    u: &Trajectory,
    v: &Trajectory,
    triples: &[ExponentTriple],
    s_y: f64,
) -> Result<f64> {
    if triples.is_empty() {
        return invalid("triple set must be nonempty");
    }
    let diff = u.sub(v)?;
    Ok(triples
        .iter()
        .map(|t| {
            let spec = if s_y == 0.0 { NormSpec::plain(t) } else { NormSpec::y_sobolev(t, s_y) };
            spacetime_norm(&diff, &spec)
        })
        .fold(0.0, f64::max))
}

pub fn contraction_distance(u: &Trajectory, v: &Trajectory, triples: &[ExponentTriple]) -> Result<f64> {
    contraction_distance_weighted(u, v, triples, 0.0)
}

/// Largest over x-slices of `||f(x, .)||_{L^target_y} / ||<nabla_y>^s f(x, .)||_{L^{r~}_y}`.
pub fn embedding_check(
    f: &Field,
    s: f64,
    r_tilde: ExtRational,
    target: ExtRational,
    y_dim: usize,
) -> Result<f64> {
    if y_dim != f.grid().split() {
        return invalid(format!("y dimension {y_dim} differs from the grid split {}", f.grid().split()));
    }
    let num = y_slice_norms(f, target.to_f64());
    let weighted = fractional_derivative(f, s, DerivativeAxes::YOnly, Flavor::Inhomogeneous);
    let den = y_slice_norms(&weighted, r_tilde.to_f64());
    let ratio = num
        .iter()
        .zip(&den)
        .filter(|(_, &d)| d > 0.0)
        .map(|(n, d)| n / d)
        .fold(f64::NAN, f64::max);
    if ratio.is_nan() {
        return invalid("field has zero W^{s,r} norm on every slice");
    }
    Ok(ratio)
}
