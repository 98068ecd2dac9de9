use std::sync::Arc;

use dispersive_lab::exponents::{EpsilonPick, EquationParams};
use dispersive_lab::norms::Trajectory;
use dispersive_lab::solver::*;
use dispersive_lab::spectral::{Field, TorusGrid};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{is_numerical, lib, Experiment, Outcome};
use crate::config::{config_error, DataConfig, EquationConfig, EquationKind, GridConfig, PacketConfig};
use crate::record::{Cell, Series, Status};

fn grid_for(eq: &EquationConfig, grid: &GridConfig) -> anyhow::Result<(EquationParams, Arc<TorusGrid>)> {
    let params = eq.params()?;
    let grid = grid.build(params.n as usize, params.k as usize)?;
    Ok((params, grid))
}

fn build_data(
    eq: &EquationConfig,
    grid: &Arc<TorusGrid>,
    data: &DataConfig,
    rng: &mut ChaCha8Rng,
) -> anyhow::Result<(CauchyData, Option<MeanProjection>, PacketConfig)> {
    match (&data.packets, &data.constant) {
        (Some(_), Some(_)) => config_error("data: give either `packets` or `constant`"),
        (_, Some([re, im])) => {
            if eq.kind == EquationKind::Nlw {
                return config_error("data.constant: wave data are projected mean-zero, a constant would vanish");
            }
            let k = Complex64::new(*re, *im);
            Ok((CauchyData::schrodinger(Field::from_fn(grid.clone(), |_| k)), None, PacketConfig::default()))
        }
        (packets, None) => {
            let pc = packets.unwrap_or_default();
            let spec = pc.into();
            let f = wave_packets(grid, &spec, rng).map_err(lib)?;
            match eq.kind {
                EquationKind::Nls => Ok((CauchyData::schrodinger(f), None, pc)),
                EquationKind::Nlw => {
                    let g = wave_packets(grid, &spec, rng).map_err(lib)?;
                    let (d, proj) = CauchyData::wave(f, g).map_err(lib)?;
                    Ok((d, Some(proj), pc))
                }
            }
        }
    }
}

fn seventeen() -> usize {
    17
}

fn nine() -> usize {
    9
}

fn twenty() -> usize {
    20
}

fn amplitude_range() -> [f64; 2] {
    [0.2, 2.0]
}

fn five() -> usize {
    5
}

fn default_scalar() -> [f64; 2] {
    [0.37, -1.2]
}

/// Nonlinear-estimate ratios on free trajectories of random packet data.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonlinearCheckConfig {
    pub seed: u64,
    pub anchor: Option<String>,
    pub equation: EquationConfig,
    pub grid: GridConfig,
    pub horizon: f64,
    /// Odd, so that the first half of the samples covers `[0, T/2]`.
    #[serde(default = "seventeen")]
    pub time_samples: usize,
    #[serde(default = "twenty")]
    pub trajectories: usize,
    #[serde(default)]
    pub packets: PacketConfig,
    #[serde(default = "amplitude_range")]
    pub amplitude_range: [f64; 2],
    #[serde(default = "five")]
    pub max_count: usize,
    /// Recorded constant bounding every ratio.
    pub bound: Option<f64>,
    /// Scalar used for the invariance check, `[re, im]`.
    #[serde(default = "default_scalar")]
    pub scalar: [f64; 2],
}

impl Experiment for NonlinearCheckConfig {
    const NAME: &'static str = "nonlinear-check";
    const ANCHOR: &'static str = "nonlinear estimate in the contraction space";

    fn anchor(&self) -> Option<&String> {
        self.anchor.as_ref()
    }

    fn run(&self) -> anyhow::Result<Outcome> {
        let (params, grid) = grid_for(&self.equation, &self.grid)?;
        let nl = self.equation.nonlinearity()?;
        if self.time_samples < 3 || self.time_samples % 2 == 0 {
            return config_error("field `time_samples` must be odd and at least 3");
        }
        let [a_lo, a_hi] = self.amplitude_range;
        if !(a_lo > 0.0 && a_hi > a_lo) || self.max_count == 0 || self.trajectories == 0 {
            return config_error("need 0 < amplitude_range[0] < amplitude_range[1], max_count >= 1, trajectories >= 1");
        }
        let sel = select_for(&params, EpsilonPick::Midpoint).map_err(lib)?;
        let alpha = Complex64::new(self.scalar[0], self.scalar[1]);
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut series = Series::new(&["index", "ratio", "ratio_scaled", "ratio_half"]);
        let (mut max_ratio, mut invariance, mut q_lo, mut q_hi) = (0.0f64, 0.0f64, f64::INFINITY, 0.0f64);
        for i in 0..self.trajectories {
            let mut spec: PacketSpec = self.packets.into();
            spec.amplitude = rng.random_range(a_lo..a_hi);
            spec.count = rng.random_range(1..=self.max_count);
            let f = wave_packets(&grid, &spec, &mut rng).map_err(lib)?;
            let u = Trajectory::free(&f, params.flow, self.horizon, self.time_samples).map_err(lib)?;
            let r = nonlinear_estimate_check(&u, &nl, &params, &sel, self.horizon).map_err(lib)?;
            let ra = nonlinear_estimate_check(&u.scaled(alpha), &nl, &params, &sel, self.horizon).map_err(lib)?;
            let half = u.prefix(self.time_samples / 2 + 1).map_err(lib)?;
            let rh = nonlinear_estimate_check(&half, &nl, &params, &sel, half.horizon()).map_err(lib)?;
            max_ratio = max_ratio.max(r);
            if r > 0.0 {
                invariance = invariance.max((ra / r - 1.0).abs());
                q_lo = q_lo.min(rh / r);
                q_hi = q_hi.max(rh / r);
            }
            series.push(vec![Cell::I(i as i64), Cell::F(r), Cell::F(ra), Cell::F(rh)]);
        }
        let bound_ok = self.bound.is_none_or(|b| max_ratio <= b);
        let ok = bound_ok && invariance < 1e-8 && q_lo > 0.25 && q_hi < 4.0;
        let summary = format!("max ratio {max_ratio:.4}, invariance {invariance:.1e}, T/2 quotient [{q_lo:.3}, {q_hi:.3}]");
        let tolerance = match self.bound {
            Some(b) => format!("ratio <= {b}; invariance < 1e-8; T/2 within factor 4"),
            None => "invariance < 1e-8; T/2 within factor 4".into(),
        };
        let results = json!({
            "triple": sel.triple.to_string(),
            "beta": sel.beta.to_string(),
            "max_ratio": max_ratio,
            "scalar_invariance": invariance,
            "half_horizon_quotient": [q_lo, q_hi],
        });
        let mut out = Outcome::new(Status::from_bool(ok), summary, tolerance, results);
        out.series = Some(series);
        out.grid = Some(grid);
        Ok(out)
    }
}

fn max_iter() -> usize {
    50
}

fn tol() -> f64 {
    1e-10
}

/// Picard iteration of the Duhamel map on a fixed horizon.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    pub seed: u64,
    pub anchor: Option<String>,
    pub equation: EquationConfig,
    pub grid: GridConfig,
    pub horizon: f64,
    #[serde(default = "seventeen")]
    pub time_samples: usize,
    #[serde(default = "max_iter")]
    pub max_iter: usize,
    #[serde(default = "tol")]
    pub tol: f64,
    #[serde(default)]
    pub data: DataConfig,
    /// Write the final state as a binary snapshot next to the record.
    #[serde(default)]
    pub snapshot: bool,
}

impl Experiment for SolveConfig {
    const NAME: &'static str = "solve";
    const ANCHOR: &'static str = "Picard iteration for the Duhamel map";

    fn anchor(&self) -> Option<&String> {
        self.anchor.as_ref()
    }

    fn run(&self) -> anyhow::Result<Outcome> {
        let (params, grid) = grid_for(&self.equation, &self.grid)?;
        let nl = self.equation.nonlinearity()?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let (data, proj, _) = build_data(&self.equation, &grid, &self.data, &mut rng)?;
        let cfg = SolverConfig { time_samples: self.time_samples, max_iter: self.max_iter, tol: self.tol, triples: Vec::new() };
        let tolerance = format!("gap < {}", self.tol);
        let (u, rep) = match picard_solve(&data, &nl, &params, self.horizon, &cfg) {
            Ok(x) => x,
            Err(e) if is_numerical(&e) => {
                let mut out = Outcome::inconclusive(&e, tolerance);
                out.grid = Some(grid);
                return Ok(out);
            }
            Err(e) => return Err(lib(e)),
        };
        let m0 = u.states()[0].l2_norm();
        let mass_drift = u.states().iter().map(|s| (s.l2_norm() / m0 - 1.0).abs()).fold(0.0, f64::max);
        let mut series = Series::new(&["iteration", "gap"]);
        for (i, g) in rep.iterates_gap.iter().enumerate() {
            series.push(vec![Cell::I(i as i64 + 1), Cell::F(*g)]);
        }
        let status = if rep.converged { Status::Pass } else { Status::Inconclusive };
        let summary = format!(
            "{} after {} iterations, residual {:.2e}, mass drift {mass_drift:.2e}",
            if rep.converged { "converged" } else { "not converged" },
            rep.iterates_gap.len(),
            rep.fixed_point_residual.unwrap_or(f64::NAN)
        );
        let results = json!({
            "report": rep,
            "mass_drift": mass_drift,
            "mass_flagged": self.equation.kind == EquationKind::Nls && mass_drift >= 0.01,
            "mean_projection": proj,
        });
        let mut out = Outcome::new(status, summary, tolerance, results);
        out.series = Some(series);
        out.snapshot = self.snapshot.then(|| u.states().last().expect("nonempty trajectory").clone());
        out.grid = Some(grid);
        Ok(out)
    }
}

fn eight() -> usize {
    8
}

fn twelve() -> usize {
    12
}

fn three() -> usize {
    3
}

/// Halving and bisection on `T` for the contraction experiment, followed by
/// a Picard run at the horizon found.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContractionConfig {
    pub seed: u64,
    pub anchor: Option<String>,
    pub equation: EquationConfig,
    pub grid: GridConfig,
    pub t_start: f64,
    #[serde(default = "eight")]
    pub n_pairs: usize,
    #[serde(default = "nine")]
    pub time_samples: usize,
    #[serde(default = "twelve")]
    pub max_halvings: usize,
    #[serde(default = "three")]
    pub bisection_steps: usize,
    #[serde(default)]
    pub data: DataConfig,
}

impl Experiment for ContractionConfig {
    const NAME: &'static str = "contraction";
    const ANCHOR: &'static str = "contraction of the Duhamel map on a ball";

    fn anchor(&self) -> Option<&String> {
        self.anchor.as_ref()
    }

    fn run(&self) -> anyhow::Result<Outcome> {
        let (params, grid) = grid_for(&self.equation, &self.grid)?;
        let nl = self.equation.nonlinearity()?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let (data, proj, packets) = build_data(&self.equation, &grid, &self.data, &mut rng)?;
        let opts = ExperimentOptions { time_samples: self.time_samples, seed: self.seed, triples: Vec::new(), packets: packets.into() };
        let tolerance = "ratios <= 1/2; budget holds; geometric Picard gaps".to_string();
        let found = match find_contraction_time(&data, &nl, &params, self.t_start, self.n_pairs, &opts, self.max_halvings, self.bisection_steps) {
            Ok(x) => x,
            Err(e) if is_numerical(&e) => return Ok(Outcome::inconclusive(&e, tolerance)),
            Err(e) => return Err(lib(e)),
        };
        let mut series = Series::new(&["T", "converged", "max_ratio", "budget_lhs", "budget_rhs"]);
        for s in &found.history {
            series.push(vec![
                Cell::F(s.horizon),
                Cell::I(s.converged as i64),
                Cell::F(s.max_ratio),
                Cell::F(s.budget_lhs),
                Cell::F(s.budget_rhs),
            ]);
        }
        let Some(rep) = &found.report else {
            let mut out = Outcome::new(
                Status::Fail,
                format!("no contracting T after {} steps", found.history.len()),
                tolerance,
                json!({ "history": found.history, "mean_projection": proj }),
            );
            out.series = Some(series);
            return Ok(out);
        };
        let cfg = SolverConfig { time_samples: self.time_samples, ..Default::default() };
        let picard = picard_solve(&data, &nl, &params, rep.horizon, &cfg);
        let (geometric, picard_json) = match &picard {
            Ok((_, p)) => (p.converged && gaps_geometric(&p.iterates_gap), json!(p)),
            Err(e) => (false, json!({ "error": e.to_string() })),
        };
        let ok = rep.converged && geometric;
        let status = match (&picard, ok) {
            (_, true) => Status::Pass,
            (Err(e), false) if is_numerical(e) => Status::Inconclusive,
            _ => Status::Fail,
        };
        let summary = format!(
            "T {:.4}, max ratio {:.3}, budget {:.3e} <= {:.3e}, Picard geometric {geometric}",
            rep.horizon,
            rep.max_ratio(),
            rep.budget_lhs.unwrap_or(f64::NAN),
            rep.budget_rhs.unwrap_or(f64::NAN)
        );
        let results = json!({
            "report": rep,
            "history": found.history,
            "picard": picard_json,
            "mean_projection": proj,
        });
        let mut out = Outcome::new(status, summary, tolerance, results);
        out.series = Some(series);
        out.grid = Some(grid);
        Ok(out)
    }
}

fn tol_1() -> f64 {
    0.01
}

fn tol_2() -> f64 {
    0.02
}

fn growth() -> f64 {
    1.2
}

/// Tensor data rough in x and smooth in y, compared under grid doubling.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoughDataConfig {
    pub seed: u64,
    pub anchor: Option<String>,
    pub grid: GridConfig,
    pub n: usize,
    pub y_dims: usize,
    pub rough_x_exponent: f64,
    pub y_width: f64,
    pub s: f64,
    #[serde(default = "tol_1")]
    pub l2_tolerance: f64,
    #[serde(default = "tol_2")]
    pub partial_tolerance: f64,
    #[serde(default = "growth")]
    pub min_growth: f64,
}

impl Experiment for RoughDataConfig {
    const NAME: &'static str = "rough-data";
    const ANCHOR: &'static str = "tensor data in L2_x H^s_y outside H^s";

    fn anchor(&self) -> Option<&String> {
        self.anchor.as_ref()
    }

    fn run(&self) -> anyhow::Result<Outcome> {
        let grid = self.grid.build(self.n, self.y_dims)?;
        let prof = RoughProfile { rough_x_exponent: self.rough_x_exponent, y_width: self.y_width, seed: self.seed };
        let (_, d) = rough_data_builder(&prof, &grid, self.s).map_err(lib)?;
        let mut series = Series::new(&["quantity", "base", "doubled", "ratio"]);
        for (name, pair) in [
            ("phi1_l2", d.phi1_l2),
            ("phi1_hs", d.phi1_hs),
            ("partial_norm", d.partial_norm),
            ("full_norm", d.full_norm),
        ] {
            series.push(vec![Cell::S(name.into()), Cell::F(pair.base), Cell::F(pair.doubled), Cell::F(pair.ratio())]);
        }
        let ok = (d.phi1_l2.ratio() - 1.0).abs() < self.l2_tolerance
            && (d.partial_norm.ratio() - 1.0).abs() < self.partial_tolerance
            && d.full_norm.ratio() >= self.min_growth;
        let summary = format!(
            "doubling ratios: partial {:.4}, full {:.4}, phi1 L2 {:.4}",
            d.partial_norm.ratio(),
            d.full_norm.ratio(),
            d.phi1_l2.ratio()
        );
        let tolerance = format!(
            "phi1 L2 within {}; partial within {}; full growth >= {}",
            self.l2_tolerance, self.partial_tolerance, self.min_growth
        );
        let mut out = Outcome::new(Status::from_bool(ok), summary, tolerance, json!({ "diagnostics": d }));
        out.series = Some(series);
        out.grid = Some(grid);
        Ok(out)
    }
}
