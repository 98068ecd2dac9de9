use std::sync::Arc;

use dispersive_lab::exponents::{EpsilonPick, ExponentTriple, FlowOrder};
use dispersive_lab::kernel::{decay_fit, finite_difference_hessian, hessian_of_phase, hessian_rank, log_spaced, NormMode, PhaseSpec};
use dispersive_lab::norms::strichartz_quotient;
use dispersive_lab::solver::select_for;
use dispersive_lab::spectral::{from_symbol, lp_project, SpectralCutoff, TorusGrid};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{is_numerical, lib, Experiment, Outcome};
use crate::config::{config_error, EquationConfig};
use crate::record::{Cell, Series, Status};

fn default_bands() -> Vec<i32> {
    (-2..=2).collect()
}

fn default_triples() -> Vec<String> {
    vec!["inf,2,2".into(), "selected".into()]
}

fn default_width() -> f64 {
    4.0
}

fn default_samples() -> usize {
    17
}

fn tol_20() -> f64 {
    0.2
}

/// Strichartz quotients of `P_j f` across dyadic bands. Band `j` lives on a
/// grid with extents `extent * 2^{-j}` over the horizon `horizon * 2^{-sigma j}`.
/// The datum has spectrum `exp(-|xi - xi0|^2 / (2 width^2))`, `xi0` drawn
/// from the seed in `[-1/2, 1/2]^N`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrichartzScanConfig {
    pub seed: u64,
    pub anchor: Option<String>,
    pub equation: EquationConfig,
    pub extent: f64,
    pub points: usize,
    pub horizon: f64,
    #[serde(default = "default_samples")]
    pub time_samples: usize,
    #[serde(default = "default_bands")]
    pub bands: Vec<i32>,
    /// Triples as text, or `"selected"` for the contraction triple.
    #[serde(default = "default_triples")]
    pub triples: Vec<String>,
    #[serde(default = "default_width")]
    pub datum_width: f64,
    /// Allowed `max / min - 1` of the quotients across bands.
    #[serde(default = "tol_20")]
    pub tolerance: f64,
}

impl Experiment for StrichartzScanConfig {
    const NAME: &'static str = "strichartz-scan";
    const ANCHOR: &'static str = "frequency-localized Strichartz estimate rescaled to band 0";

    fn anchor(&self) -> Option<&String> {
        self.anchor.as_ref()
    }

    fn run(&self) -> anyhow::Result<Outcome> {
        let params = self.equation.params()?;
        let mut triples: Vec<(String, ExponentTriple)> = Vec::new();
        for t in &self.triples {
            let triple = if t == "selected" {
                select_for(&params, EpsilonPick::Midpoint).map_err(lib)?.triple
            } else {
                match t.parse() {
                    Ok(x) => x,
                    Err(e) => return config_error(format!("field `triples`: {e}")),
                }
            };
            triples.push((t.clone(), triple));
        }
        if self.bands.is_empty() || triples.is_empty() {
            return config_error("`bands` and `triples` must be nonempty");
        }
        let n = params.n as usize;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let xi0: Vec<f64> = (0..n).map(|_| rng.random_range(-0.5..0.5)).collect();
        let w2 = 2.0 * self.datum_width * self.datum_width;
        let cut = SpectralCutoff::default();
        let sigma = params.flow.sigma_f64();
        let mut series = Series::new(&["band", "triple", "quotient"]);
        let mut table = vec![Vec::new(); triples.len()];
        let mut grid0 = None;
        for &j in &self.bands {
            let scale = 2f64.powi(j);
            let grid = TorusGrid::cube(n, self.extent / scale, self.points, params.k as usize).map_err(lib)?;
            let grid = Arc::new(grid);
            if j == 0 {
                grid0 = Some(grid.clone());
            }
            let datum = from_symbol(grid, |z| {
                let d2: f64 = z.iter().zip(&xi0).map(|(a, b)| (a - b) * (a - b)).sum();
                Complex64::new((-d2 / w2).exp(), 0.0)
            })
            .map_err(lib)?;
            let fj = lp_project(&datum, j, &cut);
            let horizon = self.horizon / scale.powf(sigma);
            for (i, (name, t)) in triples.iter().enumerate() {
                let q = strichartz_quotient(&fj, &params, t, horizon, self.time_samples).map_err(lib)?;
                table[i].push(q);
                series.push(vec![Cell::I(j as i64), Cell::S(name.clone()), Cell::F(q)]);
            }
        }
        let mut ok = true;
        let mut per_triple = Vec::new();
        let mut parts = Vec::new();
        for ((name, t), qs) in triples.iter().zip(&table) {
            let lo = qs.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = qs.iter().copied().fold(0.0, f64::max);
            let spread = hi / lo - 1.0;
            ok &= spread <= self.tolerance;
            let energy = *t == "inf,2,2".parse::<ExponentTriple>().expect("literal triple");
            let energy_dev = qs.iter().map(|q| (q - 1.0).abs()).fold(0.0, f64::max);
            if energy {
                ok &= energy_dev < 1e-8;
            }
            parts.push(format!("{t} spread {spread:.3}"));
            per_triple.push(json!({
                "name": name,
                "triple": t.to_string(),
                "quotients": qs,
                "spread": spread,
                "energy_deviation": if energy { Some(energy_dev) } else { None },
            }));
        }
        let results = json!({ "bands": self.bands, "xi0": xi0, "triples": per_triple });
        let mut out = Outcome::new(Status::from_bool(ok), parts.join("; "), format!("spread <= {}", self.tolerance), results);
        out.series = Some(series);
        out.grid = grid0;
        Ok(out)
    }
}

fn t_min() -> f64 {
    1.0
}

fn t_max() -> f64 {
    100.0
}

fn t_count() -> usize {
    9
}

fn tol_15() -> f64 {
    0.15
}

/// Fitted decay slope of the frequency-localized kernel.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelDecayConfig {
    pub seed: u64,
    pub anchor: Option<String>,
    pub sigma: i64,
    pub n: u32,
    pub k: u32,
    pub norm_mode: NormMode,
    #[serde(default = "t_min")]
    pub t_min: f64,
    #[serde(default = "t_max")]
    pub t_max: f64,
    #[serde(default = "t_count")]
    pub t_count: usize,
    /// Target slope; `-predicted_beta` when absent.
    pub expected_slope: Option<f64>,
    #[serde(default = "tol_15")]
    pub tolerance: f64,
}

impl Experiment for KernelDecayConfig {
    const NAME: &'static str = "kernel-decay";
    const ANCHOR: &'static str = "fixed-time decay of the frequency-localized kernel";

    fn anchor(&self) -> Option<&String> {
        self.anchor.as_ref()
    }

    fn run(&self) -> anyhow::Result<Outcome> {
        let flow = FlowOrder::from_sigma(self.sigma).map_err(lib)?;
        if !(self.t_min > 0.0 && self.t_max > self.t_min && self.t_count >= 2) {
            return config_error("need 0 < t_min < t_max and t_count >= 2");
        }
        let ts = log_spaced(self.t_min, self.t_max, self.t_count);
        let tolerance = format!("|slope - target| <= {}", self.tolerance);
        let rep = match decay_fit(flow, self.n, self.k, self.norm_mode, &ts, &SpectralCutoff::default()) {
            Ok(r) => r,
            Err(e) if is_numerical(&e) => return Ok(Outcome::inconclusive(&e, tolerance)),
            Err(e) => return Err(lib(e)),
        };
        let target = self.expected_slope.unwrap_or(-rep.predicted_beta);
        let ok = (rep.fitted_slope - target).abs() <= self.tolerance;
        let mut series = Series::new(&["t", "value", "argmax"]);
        for s in &rep.samples {
            series.push(vec![Cell::F(s.t), Cell::F(s.value), Cell::F(s.argmax)]);
        }
        let summary = format!("fitted slope {:.4} vs {target}", rep.fitted_slope);
        let results = json!({ "target_slope": target, "report": rep });
        let mut out = Outcome::new(Status::from_bool(ok), summary, tolerance, results);
        out.series = Some(series);
        Ok(out)
    }
}

fn default_cases() -> Vec<[u32; 2]> {
    vec![[3, 1], [3, 2], [4, 2]]
}

fn thousand() -> usize {
    1000
}

fn rank_tol() -> f64 {
    1e-8
}

fn fd_step() -> f64 {
    1e-4
}

fn fd_tol() -> f64 {
    1e-6
}

/// Ranks of the phase Hessians on random annulus samples, plus analytic
/// versus finite-difference agreement.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HessianScanConfig {
    pub seed: u64,
    pub anchor: Option<String>,
    /// `[N, k]` pairs.
    #[serde(default = "default_cases")]
    pub cases: Vec<[u32; 2]>,
    #[serde(default = "thousand")]
    pub samples: usize,
    #[serde(default = "rank_tol")]
    pub rank_tol: f64,
    #[serde(default = "fd_step")]
    pub fd_step: f64,
    #[serde(default = "fd_tol")]
    pub fd_tol: f64,
}

impl Experiment for HessianScanConfig {
    const NAME: &'static str = "hessian-scan";
    const ANCHOR: &'static str = "rank of the phase Hessian in the xi variables";

    fn anchor(&self) -> Option<&String> {
        self.anchor.as_ref()
    }

    fn run(&self) -> anyhow::Result<Outcome> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut series = Series::new(&["n", "k", "sigma", "required_rank", "min_rank", "max_rank", "max_fd_error"]);
        let mut ok = true;
        let mut rows = Vec::new();
        for &[n, k] in &self.cases {
            if k < 1 || k >= n {
                return config_error(format!("field `cases`: need 1 <= k < N, got [{n}, {k}]"));
            }
            let (n, k) = (n as usize, k as usize);
            // (min rank, max rank, max fd error) for sigma = 1, 2.
            let mut stats = [(usize::MAX, 0usize, 0.0f64); 2];
            for _ in 0..self.samples {
                let z = loop {
                    let v: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
                    let r = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                    if (0.5..=2.0).contains(&r) {
                        break v;
                    }
                };
                let (xi, eta) = z.split_at(n - k);
                for (i, flow) in [FlowOrder::Wave, FlowOrder::Schrodinger].into_iter().enumerate() {
                    let spec = PhaseSpec::new(flow, eta.to_vec()).map_err(lib)?;
                    let rank = hessian_rank(&spec, xi, self.rank_tol).map_err(lib)?;
                    let a = hessian_of_phase(&spec, xi).map_err(lib)?;
                    let b = finite_difference_hessian(&spec, xi, self.fd_step);
                    let st = &mut stats[i];
                    st.0 = st.0.min(rank);
                    st.1 = st.1.max(rank);
                    st.2 = st.2.max((a - b).abs().max());
                }
            }
            for (i, sigma) in [1i64, 2].into_iter().enumerate() {
                let required = if sigma == 2 { n - k } else { n - k - 1 };
                let (lo, hi, fd) = stats[i];
                let case_ok = lo >= required && (sigma == 1 || hi == required) && fd < self.fd_tol;
                ok &= case_ok;
                series.push(vec![
                    Cell::I(n as i64),
                    Cell::I(k as i64),
                    Cell::I(sigma),
                    Cell::I(required as i64),
                    Cell::I(lo as i64),
                    Cell::I(hi as i64),
                    Cell::F(fd),
                ]);
                rows.push(json!({
                    "n": n, "k": k, "sigma": sigma, "required_rank": required,
                    "min_rank": lo, "max_rank": hi, "max_fd_error": fd, "pass": case_ok,
                }));
            }
        }
        let max_fd = rows.iter().map(|r| r["max_fd_error"].as_f64().unwrap_or(0.0)).fold(0.0, f64::max);
        let summary = format!("{} cases x {} samples, max fd error {max_fd:.2e}", self.cases.len(), self.samples);
        let tolerance = format!("exact ranks; fd error < {}", self.fd_tol);
        let mut out = Outcome::new(Status::from_bool(ok), summary, tolerance, json!({ "cases": rows }));
        out.series = Some(series);
        Ok(out)
    }
}
